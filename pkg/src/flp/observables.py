"""Ground-state measurements: pair density, density correlations, N(q), charge gap.

All observables here are diagonal in the occupation basis, so a state enters
only through its probability weights. A degenerate ground space, given as a
list of orthonormal vectors, is measured as the equal mixture of its members;
that mixture inherits the ring's translation and reflection symmetry.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence, Union

import numpy as np

from flp.ed.basis import DEFAULT_MAX_DIMENSION, SectorBasis, build_basis
from flp.ed.hamiltonian import StateVector
from flp.ed.lanczos import ground_manifold, ground_state_lanczos
from flp.errors import BasisMismatch, ImaginaryResidue
from flp.model import FillingSpec, ModelParams, Sector, sector_for

StateLike = Union[StateVector, Sequence[StateVector]]

RESIDUE_TOL = 1e-10


def _weights(state: StateLike, basis: SectorBasis | None = None) -> tuple[np.ndarray, SectorBasis]:
    states = [state] if isinstance(state, StateVector) else list(state)
    if not states:
        raise ValueError("no state given")
    basis = basis or states[0].basis
    total = np.zeros(basis.dimension)
    for s in states:
        if s.basis is not basis and s.basis.sector != basis.sector:
            raise BasisMismatch(f"state lives in {s.basis.sector}, expected {basis.sector}")
        total += np.abs(s.amplitudes) ** 2
    total /= total.sum()
    return total.reshape(len(basis.up_masks), len(basis.dn_masks)), basis


def density_moments(state: StateLike, basis: SectorBasis | None = None):
    """Site densities ``<n_a>`` and the matrix ``<n_a n_b>``."""
    W, basis = _weights(state, basis)
    U, D = basis.occupations("up"), basis.occupations("dn")
    wu, wd = W.sum(axis=1), W.sum(axis=0)
    ud = U.T @ W @ D
    nn = (U.T * wu) @ U + (D.T * wd) @ D + ud + ud.T
    n = wu @ U + wd @ D
    return n, nn


def pair_density(state: StateLike, basis: SectorBasis | None = None) -> float:
    """Doubly occupied sites per site, ``(1/L) sum_i <n_i,up n_i,dn>``."""
    W, basis = _weights(state, basis)
    ud = basis.occupations("up").T @ W @ basis.occupations("dn")
    return float(np.trace(ud) / basis.L)


def density_correlations(state: StateLike, basis: SectorBasis | None = None, j: int | None = None):
    """``C(r) = <n_j n_{j+r}> - <n_j><n_{j+r}>`` for ``r = 0..L-1`` (sites mod L).

    ``j`` defaults to the half-chain site ``L // 2``.
    """
    n, nn = density_moments(state, basis)
    L = n.size
    j = L // 2 if j is None else j
    if not 0 <= j < L:
        raise ValueError(f"site {j} outside 0..{L - 1}")
    others = (j + np.arange(L)) % L
    return nn[j, others] - n[j] * n[others]


def structure_factor(corr: np.ndarray, residue_tol: float = RESIDUE_TOL) -> np.ndarray:
    """``N(q_k) = sum_r exp(i q_k r) C(r)`` at ``q_k = 2 pi k / L``.

    Raises
    ------
    ImaginaryResidue
        If the transform has an imaginary part above ``residue_tol``.
    """
    corr = np.asarray(corr, dtype=float)
    L = corr.size
    r = np.arange(L)
    phases = np.exp(2j * np.pi * np.outer(r, r) / L)
    nq = phases @ corr
    residue = np.abs(nq.imag).max(initial=0.0)
    if residue > residue_tol:
        raise ImaginaryResidue(f"N(q) has imaginary part {residue:.3g}")
    return nq.real


def peak_momentum(nq: np.ndarray, atol: float = 1e-12) -> float:
    """``2 pi k / L`` of the largest ``N(q_k)`` over ``k = 1..L/2``.

    Values within ``atol`` of the maximum count as tied; ties go to the
    smaller ``k``.
    """
    nq = np.asarray(nq, dtype=float)
    L = nq.size
    window = nq[1 : L // 2 + 1]
    if window.size == 0:
        raise ValueError("need at least two momenta")
    k = 1 + int(np.flatnonzero(window >= window.max() - atol)[0])
    return 2.0 * np.pi * k / L


@dataclass(frozen=True)
class ObservableSet:
    n_d: float
    corr: tuple
    nq: tuple
    peak_q: float
    j: int

    def __post_init__(self):
        nq = np.asarray(self.nq)
        L = nq.size
        if abs(nq[0]) > RESIDUE_TOL:
            raise ValueError(f"N(0) = {nq[0]:.3g}, expected 0 in a fixed-N sector")
        if L > 1 and np.abs(nq[1:] - nq[1:][::-1]).max() > RESIDUE_TOL:
            raise ValueError("N(q) is not reflection symmetric")

    @property
    def L(self) -> int:
        return len(self.nq)

    @property
    def q(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.L) / self.L

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ObservableSet":
        data = dict(data)
        data["corr"] = tuple(data["corr"])
        data["nq"] = tuple(data["nq"])
        return cls(**data)


def measure(state: StateLike, basis: SectorBasis | None = None, j: int | None = None) -> ObservableSet:
    corr = density_correlations(state, basis, j)
    L = corr.size
    nq = structure_factor(corr)
    return ObservableSet(
        n_d=pair_density(state, basis),
        corr=tuple(float(c) for c in corr),
        nq=tuple(float(v) for v in nq),
        peak_q=peak_momentum(nq),
        j=L // 2 if j is None else j,
    )


def commensurate_polarizations(L: int, n: float) -> list[float]:
    """Polarizations realizable on an ``L``-site ring at filling ``n``, ascending."""
    N = round(n * L)
    out = []
    for N_up in range((N + 1) // 2, min(N, L) + 1):
        N_dn = N - N_up
        if 0 <= N_dn <= L and N:
            out.append((N_up - N_dn) / N)
    return out


def ed_observables(
    params: ModelParams,
    L: int,
    spec: FillingSpec,
    seed: int = 0,
    tol: float = 1e-10,
    j: int | None = None,
    degeneracy_tol: float = 1e-8,
    max_dimension: int | None = DEFAULT_MAX_DIMENSION,
    **lanczos_kwargs,
):
    """Ground space of the sector realizing ``spec`` and its observables.

    Returns ``(reports, observables)``; ``reports`` lists one Lanczos report per
    member of the ground space. ``max_dimension=None`` lifts the sector cap.
    """
    sector = sector_for(L, spec)
    basis = build_basis(sector, max_dimension)
    reports, states = ground_manifold(
        params, basis, tol=tol, seed=seed, degeneracy_tol=degeneracy_tol, **lanczos_kwargs
    )
    return reports, measure(states, basis, j)


def _gap_sectors(L: int, N: int) -> tuple[Sector, Sector, Sector]:
    def split(count):
        return Sector(L, (count + 1) // 2, count // 2)

    return split(N - 1), split(N), split(N + 1)


def charge_gap(params: ModelParams, L: int, N: int, tol: float = 1e-10, seed: int = 0, **kwargs) -> float:
    """``E0(N+1) + E0(N-1) - 2 E0(N)`` with each count split as evenly as possible."""
    if not 1 <= N <= 2 * L - 1:
        raise ValueError(f"need 1 <= N <= 2L-1 for the gap, got N={N}, L={L}")
    energies = [
        ground_state_lanczos(params, build_basis(s), tol=tol, seed=seed, **kwargs)[0].e0
        for s in _gap_sectors(L, N)
    ]
    return energies[0] + energies[2] - 2.0 * energies[1]
