"""Coupling conventions, filling bookkeeping and finite-lattice sectors.

The hopping amplitude for a species-sigma atom across a bond depends on how
many atoms of the other species sit on the two bond sites:

====================  =====================  ==========
opposite occupation   amplitude              name
====================  =====================  ==========
0                     ``-t``                 direct
1                     ``-(t + delta_g)``     ``-g``
2                     ``-(t + 2 delta_g + delta_t)``  ``-t_ad``
====================  =====================  ==========

All energies are in units of ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from flp.errors import NonIntegerSector

_COMMENSURATE_TOL = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """Couplings of the correlated-hopping Hamiltonian.

    Only the shifts are stored; ``g`` and ``t_ad`` are always recomputed.
    """

    delta_g: float = 0.0
    delta_t: float = 0.0
    delta: float = 0.0
    t: float = 1.0

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError(f"t must be positive, got {self.t}")
        for name in ("delta_g", "delta_t", "delta", "t"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def g(self) -> float:
        return derive_couplings(self)[0]

    @property
    def t_ad(self) -> float:
        return derive_couplings(self)[1]

    @property
    def is_integrable(self) -> bool:
        """True at ``g = 0``, where the doublon number is conserved."""
        return abs(self.delta_g + self.t) <= 1e-12

    @classmethod
    def from_couplings(cls, g: float, t_ad: float, delta: float = 0.0, t: float = 1.0):
        """Inverse of :func:`derive_couplings`."""
        return cls(delta_g=g - t, delta_t=t_ad - 2.0 * g + t, delta=delta, t=t)

    def hop_amplitudes(self) -> tuple[float, float, float]:
        """Matrix elements of ``c^dag_i c_j`` for 0, 1, 2 opposite-species atoms on the bond."""
        return (
            -self.t,
            -(self.t + self.delta_g),
            -(self.t + 2.0 * self.delta_g + self.delta_t),
        )

    def replace(self, **changes) -> "ModelParams":
        fields = dict(delta_g=self.delta_g, delta_t=self.delta_t, delta=self.delta, t=self.t)
        fields.update(changes)
        return ModelParams(**fields)


def derive_couplings(params: ModelParams) -> tuple[float, float]:
    """Return ``(g, t_ad)`` with ``g = delta_g + t`` and ``t_ad = delta_t + 2 g - t``."""
    g = params.delta_g + params.t
    t_ad = params.delta_t + 2.0 * g - params.t
    return g, t_ad


@dataclass(frozen=True)
class FillingSpec:
    """Average filling ``n`` and imbalance ``p``; negative ``p`` is folded to ``|p|``."""

    n: float
    p: float = 0.0

    def __post_init__(self):
        if self.p < 0:
            object.__setattr__(self, "p", -self.p)
        if not 0.0 <= self.n <= 2.0:
            raise ValueError(f"filling n must lie in [0, 2], got {self.n}")
        if not self.p <= 1.0:
            raise ValueError(f"polarization |p| must not exceed 1, got {self.p}")
        # majority species holds at most one atom per site
        if self.n * (1.0 + self.p) / 2.0 > 1.0 + _COMMENSURATE_TOL:
            raise ValueError(
                f"n={self.n}, p={self.p} puts {self.n * (1 + self.p) / 2} majority atoms per site"
            )


@dataclass(frozen=True)
class Sector:
    """Finite ring of ``L`` sites with fixed species counts."""

    L: int
    N_up: int
    N_dn: int

    def __post_init__(self):
        if self.L < 1:
            raise ValueError(f"L must be positive, got {self.L}")
        for name in ("N_up", "N_dn"):
            count = getattr(self, name)
            if not 0 <= count <= self.L:
                raise ValueError(f"{name}={count} outside [0, {self.L}]")

    @property
    def N(self) -> int:
        return self.N_up + self.N_dn

    @property
    def filling(self) -> float:
        return self.N / self.L

    @property
    def polarization(self) -> float:
        return abs(self.N_up - self.N_dn) / self.N if self.N else 0.0

    def swapped(self) -> "Sector":
        return Sector(self.L, self.N_dn, self.N_up)

    def to_filling(self) -> FillingSpec:
        return FillingSpec(self.filling, self.polarization)


def _as_integer(value: float, what: str) -> int:
    nearest = round(value)
    if abs(value - nearest) > _COMMENSURATE_TOL:
        raise NonIntegerSector(f"{what} = {value:.12g} is not an integer")
    return int(nearest)


def sector_for(L: int, spec: FillingSpec) -> Sector:
    """Sector of an ``L``-site ring realizing ``spec`` exactly (majority species up).

    Raises
    ------
    NonIntegerSector
        If ``n L`` or ``N (1 +- p) / 2`` is not integral.
    """
    if L < 2:
        raise ValueError(f"need at least two sites, got L={L}")
    N = _as_integer(spec.n * L, f"N = n*L = {spec.n}*{L}")
    N_up = _as_integer(N * (1.0 + spec.p) / 2.0, f"N_up = N(1+p)/2 with N={N}, p={spec.p}")
    N_dn = _as_integer(N * (1.0 - spec.p) / 2.0, f"N_dn = N(1-p)/2 with N={N}, p={spec.p}")
    return Sector(L, N_up, N_dn)
