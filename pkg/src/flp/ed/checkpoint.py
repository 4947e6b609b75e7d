"""Binary checkpoint of a converged ground-state vector.

Layout (little-endian): 4-byte magic ``FLP1``; uint64 ``L``, ``N_up``,
``N_dn``, ``dimension``; then ``dimension`` float64 amplitudes.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from flp.ed.basis import SectorBasis
from flp.ed.hamiltonian import StateVector
from flp.errors import BasisMismatch
from flp.model import Sector

MAGIC = b"FLP1"
_HEADER = struct.Struct("<4s4Q")


def write_checkpoint(path, state: StateVector) -> None:
    sector = state.basis.sector
    amplitudes = np.asarray(state.amplitudes)
    if np.iscomplexobj(amplitudes):
        if np.abs(amplitudes.imag).max(initial=0.0) > 0.0:
            raise ValueError("checkpoint format stores real amplitudes only")
        amplitudes = amplitudes.real
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, sector.L, sector.N_up, sector.N_dn, amplitudes.size))
        fh.write(amplitudes.astype("<f8").tobytes())


def read_checkpoint(path, basis: SectorBasis | None = None) -> tuple[Sector, np.ndarray]:
    """Return the stored sector and amplitudes; validate against ``basis`` if given."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, L, n_up, n_dn, dim = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    payload = raw[_HEADER.size:]
    if len(payload) != 8 * dim:
        raise ValueError(f"{path}: expected {dim} amplitudes, found {len(payload) / 8:g}")
    sector = Sector(int(L), int(n_up), int(n_dn))
    if basis is not None and (basis.sector != sector or basis.dimension != dim):
        raise BasisMismatch(f"checkpoint holds {sector} (dim {dim}), basis is {basis.sector}")
    return sector, np.frombuffer(payload, dtype="<f8").astype(np.float64)
