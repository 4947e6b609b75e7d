"""Matrix-free action of the correlated-hopping Hamiltonian on a sector.

Fermionic modes are ordered all-up (sites 0..L-1) then all-down, so a hop of
either species only picks up signs from its own species; the opposite
species enters only through the occupation-dependent amplitude.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from numba import njit, prange

from flp.ed.basis import SectorBasis, bonds
from flp.errors import BasisMismatch, DimensionTooLarge
from flp.model import ModelParams

DENSE_LIMIT = 4000
# below this dimension the thread launch costs more than the product itself
SERIAL_LIMIT = 1 << 14

# TBB is often too old on stock images; prefer OpenMP
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    basis: SectorBasis

    def __post_init__(self):
        if self.amplitudes.shape != (self.basis.dimension,):
            raise BasisMismatch(
                f"vector of shape {self.amplitudes.shape} does not match dimension {self.basis.dimension}"
            )

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@njit(cache=True, inline="always")
def _popcount(x):
    count = 0
    while x:
        x &= x - 1
        count += 1
    return count


@njit(cache=True, parallel=True)
def _apply_kernel(
    v, out, up_masks, dn_masks,
    u_ptr, u_tgt, u_a, u_b, u_sgn,
    d_ptr, d_tgt, d_a, d_b, d_sgn,
    amps, delta,
):
    n_up = up_masks.shape[0]
    n_dn = dn_masks.shape[0]
    for iu in prange(n_up):
        mu = up_masks[iu]
        base = iu * n_dn
        for idn in range(n_dn):
            out[base + idn] = delta * _popcount(mu & dn_masks[idn]) * v[base + idn]
        for h in range(u_ptr[iu], u_ptr[iu + 1]):
            src = u_tgt[h] * n_dn
            a = u_a[h]
            b = u_b[h]
            s = u_sgn[h]
            for idn in range(n_dn):
                md = dn_masks[idn]
                k = ((md >> a) & 1) + ((md >> b) & 1)
                out[base + idn] += s * amps[k] * v[src + idn]
        for idn in range(n_dn):
            acc = 0.0
            for h in range(d_ptr[idn], d_ptr[idn + 1]):
                k = ((mu >> d_a[h]) & 1) + ((mu >> d_b[h]) & 1)
                acc += d_sgn[h] * amps[k] * v[base + d_tgt[h]]
            out[base + idn] += acc


_apply_kernel_serial = njit(cache=True)(_apply_kernel.py_func)


def _check(basis: SectorBasis, v) -> np.ndarray:
    if isinstance(v, StateVector):
        if v.basis is not basis and v.basis.sector != basis.sector:
            raise BasisMismatch(f"state lives in {v.basis.sector}, operator in {basis.sector}")
        v = v.amplitudes
    v = np.asarray(v)
    if v.shape != (basis.dimension,):
        raise BasisMismatch(f"vector of shape {v.shape} does not match dimension {basis.dimension}")
    return v


def make_matvec(params: ModelParams, basis: SectorBasis):
    """Return ``f(v, out=None) -> H v`` for real float64 vectors, bound to ``basis``."""
    up, dn = basis.up_hops, basis.dn_hops
    amps = np.array(params.hop_amplitudes(), dtype=np.float64)
    delta = float(params.delta)
    kernel = _apply_kernel_serial if basis.dimension < SERIAL_LIMIT else _apply_kernel

    def matvec(v, out=None):
        if out is None:
            out = np.empty(basis.dimension, dtype=np.float64)
        kernel(
            v, out, basis.up_masks, basis.dn_masks,
            up.ptr, up.target, up.site_a, up.site_b, up.sign,
            dn.ptr, dn.target, dn.site_a, dn.site_b, dn.sign,
            amps, delta,
        )
        return out

    return matvec


def apply_hamiltonian(params: ModelParams, basis: SectorBasis, v):
    """``H v``; returns a :class:`StateVector` when given one, an array otherwise."""
    arr = _check(basis, v)
    matvec = make_matvec(params, basis)
    if np.iscomplexobj(arr):
        result = matvec(np.ascontiguousarray(arr.real, dtype=np.float64)) + 1j * matvec(
            np.ascontiguousarray(arr.imag, dtype=np.float64)
        )
    else:
        result = matvec(np.ascontiguousarray(arr, dtype=np.float64))
    return StateVector(result, basis) if isinstance(v, StateVector) else result


def assemble_matrix(params: ModelParams, basis: SectorBasis) -> np.ndarray:
    """Dense matrix built column by column from :func:`apply_hamiltonian`."""
    dim = basis.dimension
    if dim > DENSE_LIMIT:
        raise DimensionTooLarge(dim, DENSE_LIMIT)
    matvec = make_matvec(params, basis)
    # row k of the buffer holds column k of H
    buf = np.empty((dim, dim))
    e = np.zeros(dim)
    for col in range(dim):
        e[col] = 1.0
        matvec(e, out=buf[col])
        e[col] = 0.0
    return buf.T


def _second_quantized_matrix(params: ModelParams, basis: SectorBasis) -> np.ndarray:
    """Dense matrix from explicit ``c^dag_{i s} c_{j s}`` on the 2L-mode string.

    Independent of the hop tables: mode ``s * L + i`` carries spin ``s`` at
    site ``i``, and signs come from counting occupied modes below each
    operator.
    """
    L = basis.L
    t, dg, dt, delta = params.t, params.delta_g, params.delta_t, params.delta
    dim = basis.dimension
    H = np.zeros((dim, dim))

    def annihilate(state, mode):
        if not (state >> mode) & 1:
            return None, 0
        sign = -1 if bin(state & ((1 << mode) - 1)).count("1") % 2 else 1
        return state ^ (1 << mode), sign

    def create(state, mode):
        if (state >> mode) & 1:
            return None, 0
        sign = -1 if bin(state & ((1 << mode) - 1)).count("1") % 2 else 1
        return state | (1 << mode), sign

    pairs = []
    for i, j in bonds(L):
        pairs += [(i, j), (j, i)]
    for col in range(dim):
        mu, md = basis.masks(col)
        state = mu | (md << L)
        occ = [[(mu >> i) & 1 for i in range(L)], [(md >> i) & 1 for i in range(L)]]
        H[col, col] += delta * 0.5 * sum(
            (occ[0][i] + occ[1][i]) * (occ[0][i] + occ[1][i] - 1) for i in range(L)
        )
        for s in (0, 1):
            other = occ[1 - s]
            for i, j in pairs:
                amplitude = -(t + dg * (other[i] + other[j]) + dt * other[i] * other[j])
                mid, s1 = annihilate(state, s * L + j)
                if mid is None:
                    continue
                new, s2 = create(mid, s * L + i)
                if new is None:
                    continue
                row = basis.index(new & ((1 << L) - 1), new >> L)
                H[row, col] += amplitude * s1 * s2
    return H


def dense_oracle(params: ModelParams, basis: SectorBasis) -> np.ndarray:
    """All eigenvalues, ascending, of the explicitly assembled sector matrix."""
    if basis.dimension > DENSE_LIMIT:
        raise DimensionTooLarge(basis.dimension, DENSE_LIMIT)
    return np.linalg.eigvalsh(_second_quantized_matrix(params, basis))


def dense_ground_state(params: ModelParams, basis: SectorBasis) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors (columns) of the second-quantized matrix."""
    if basis.dimension > DENSE_LIMIT:
        raise DimensionTooLarge(basis.dimension, DENSE_LIMIT)
    return np.linalg.eigh(_second_quantized_matrix(params, basis))


def doublon_counts(basis: SectorBasis) -> np.ndarray:
    """Number of doubly occupied sites of every basis state."""
    both = basis.up_masks[:, None] & basis.dn_masks[None, :]
    counts = np.zeros(both.shape, dtype=np.int64)
    for i in range(basis.L):
        counts += (both >> i) & 1
    return counts.ravel()
