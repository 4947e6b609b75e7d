"""Restarted Lanczos with full reorthogonalization for the lowest eigenpair."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from flp.ed.basis import SectorBasis
from flp.ed.hamiltonian import StateVector, make_matvec
from flp.errors import NotConverged
from flp.model import ModelParams

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 20_000
DEFAULT_KRYLOV_CAP = 400
# bytes reserved for stored Lanczos vectors
DEFAULT_MEMORY_BUDGET = 1 << 30


@dataclass(frozen=True)
class LanczosReport:
    e0: float
    iterations: int
    residual: float
    converged: bool


def _orthogonalize(w: np.ndarray, vectors: np.ndarray) -> None:
    # classical Gram-Schmidt; a second pass only when the first cancelled heavily
    if vectors.shape[0]:
        before = np.linalg.norm(w)
        w -= vectors.T @ (vectors @ w)
        if np.linalg.norm(w) < 0.7071 * before:
            w -= vectors.T @ (vectors @ w)


def lanczos(
    matvec: Callable[[np.ndarray], np.ndarray],
    dim: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
    krylov_cap: int = DEFAULT_KRYLOV_CAP,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    deflate: Sequence[np.ndarray] = (),
    v0: np.ndarray | None = None,
) -> tuple[LanczosReport, np.ndarray]:
    """Lowest eigenpair of a real symmetric operator given as ``matvec``.

    Every new Krylov vector is reorthogonalized against all stored ones and
    against ``deflate`` (converged eigenvectors to keep out of the search).
    When the Krylov space hits its cap the current Ritz vector becomes the
    new start vector. Convergence is declared on the true residual
    ``|H x - e0 x| <= tol``.

    Raises
    ------
    NotConverged
        After ``max_iter`` matrix-vector products; carries the best estimate.
    """
    locked = np.array(deflate, dtype=np.float64).reshape(len(deflate), dim)
    free_dim = dim - locked.shape[0]
    if free_dim <= 0:
        raise ValueError("deflation space already spans the whole sector")
    cap = min(krylov_cap, free_dim, max(8, memory_budget // (8 * dim)))

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) if v0 is None else np.array(v0, dtype=np.float64)
    _orthogonalize(v, locked)
    v /= np.linalg.norm(v)

    V = np.empty((cap, dim))
    matvecs = 0
    e0, residual = np.inf, np.inf
    while True:
        alphas, betas = [], []
        V[0] = v
        k = 0
        while True:
            w = matvec(V[k])
            matvecs += 1
            alpha = float(V[k] @ w)
            w -= alpha * V[k]
            if k:
                w -= betas[-1] * V[k - 1]
            _orthogonalize(w, V[: k + 1])
            _orthogonalize(w, locked)
            beta = float(np.linalg.norm(w))
            alphas.append(alpha)
            theta, s = eigh_tridiagonal(
                np.array(alphas), np.array(betas), select="i", select_range=(0, 0)
            )
            estimate = beta * abs(s[-1, 0])
            if estimate <= 0.1 * tol or beta <= 1e-14 or k + 1 == cap or matvecs >= max_iter:
                break
            betas.append(beta)
            V[k + 1] = w / beta
            k += 1

        x = V[: k + 1].T @ s[:, 0]
        _orthogonalize(x, locked)
        x /= np.linalg.norm(x)
        hx = matvec(x)
        matvecs += 1
        e0 = float(x @ hx)
        residual = float(np.linalg.norm(hx - e0 * x))
        log.debug("lanczos restart: k=%d e0=%.15g residual=%.3g", k + 1, e0, residual)
        if residual <= tol:
            return LanczosReport(e0, matvecs, residual, True), x
        if matvecs >= max_iter:
            raise NotConverged(
                f"Lanczos stopped after {matvecs} products with residual {residual:.3g} > {tol:.3g}",
                e0=e0,
                residual=residual,
            )
        v = x


def ground_state_lanczos(
    params: ModelParams,
    basis: SectorBasis,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
    krylov_cap: int = DEFAULT_KRYLOV_CAP,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> tuple[LanczosReport, StateVector]:
    """Sector ground state of the Hamiltonian; deterministic for a given seed."""
    if basis.dimension == 1:
        e = make_matvec(params, basis)(np.ones(1))[0]
        return LanczosReport(float(e), 1, 0.0, True), StateVector(np.ones(1), basis)
    report, x = lanczos(
        make_matvec(params, basis), basis.dimension, tol, max_iter, seed, krylov_cap, memory_budget
    )
    return report, StateVector(x, basis)


def ground_manifold(
    params: ModelParams,
    basis: SectorBasis,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    degeneracy_tol: float = 1e-8,
    max_states: int = 32,
    max_iter: int = DEFAULT_MAX_ITER,
    krylov_cap: int = DEFAULT_KRYLOV_CAP,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    probe_tol: float = 1e-6,
) -> tuple[list[LanczosReport], list[StateVector]]:
    """Orthonormal basis of the (possibly degenerate) ground space.

    Further states are sought by Lanczos deflated against the ones already
    found. Each probe is converged only to ``probe_tol``; a probe landing
    within ``degeneracy_tol`` of the ground energy is polished to ``tol`` and
    kept, otherwise the search stops.
    """
    report, state = ground_state_lanczos(
        params, basis, tol, max_iter, seed, krylov_cap, memory_budget
    )
    reports, vectors = [report], [state.amplitudes]
    matvec = make_matvec(params, basis)
    while len(vectors) < min(max_states, basis.dimension):
        probe, x = lanczos(
            matvec, basis.dimension, max(tol, probe_tol), max_iter, seed + len(vectors),
            krylov_cap, memory_budget, deflate=vectors,
        )
        if probe.e0 > report.e0 + degeneracy_tol + probe.residual:
            break
        nxt, x = lanczos(
            matvec, basis.dimension, tol, max_iter, seed, krylov_cap, memory_budget,
            deflate=vectors, v0=x,
        )
        if nxt.e0 > report.e0 + degeneracy_tol:
            break
        reports.append(nxt)
        vectors.append(x)
    return reports, [StateVector(x, basis) for x in vectors]
