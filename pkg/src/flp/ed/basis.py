"""Occupation-number basis of a fixed (N_up, N_dn) sector.

A basis state is a pair of L-bit masks; bit ``i`` set means site ``i`` is
occupied by that species. The linear index of ``(up_masks[a], dn_masks[b])``
is ``a * len(dn_masks) + b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import comb

import numpy as np

from flp.errors import DimensionTooLarge
from flp.model import Sector

# L = 14 at half filling still fits; L = 16 requires an explicit opt-in
DEFAULT_MAX_DIMENSION = 20_000_000


def masks_with_popcount(L: int, count: int) -> np.ndarray:
    """All L-bit integers with ``count`` set bits, ascending."""
    masks = [sum(1 << i for i in sites) for sites in combinations(range(L), count)]
    return np.array(sorted(masks), dtype=np.int64)


def bonds(L: int) -> list[tuple[int, int]]:
    """Nearest-neighbour bonds of a periodic ring; L = 2 is a single open bond."""
    if L < 2:
        return []
    if L == 2:
        return [(0, 1)]
    return [(i, (i + 1) % L) for i in range(L)]


@dataclass(frozen=True)
class HopTable:
    """CSR list of single-species hops ``c^dag_a c_b`` out of each mask.

    ``target[h]`` is the index of the resulting mask, ``site_a``/``site_b``
    the two bond sites and ``sign`` the Jordan-Wigner sign.
    """

    ptr: np.ndarray
    target: np.ndarray
    site_a: np.ndarray
    site_b: np.ndarray
    sign: np.ndarray


def build_hops(masks: np.ndarray, index: np.ndarray, L: int) -> HopTable:
    ptr = [0]
    target, site_a, site_b, sign = [], [], [], []
    for mask in masks.tolist():
        for i, j in bonds(L):
            if ((mask >> i) ^ (mask >> j)) & 1:
                lo, hi = min(i, j), max(i, j)
                between = ((1 << hi) - 1) & ~((1 << (lo + 1)) - 1)
                target.append(index[mask ^ ((1 << i) | (1 << j))])
                site_a.append(i)
                site_b.append(j)
                sign.append(-1.0 if bin(mask & between).count("1") % 2 else 1.0)
        ptr.append(len(target))
    return HopTable(
        ptr=np.array(ptr, dtype=np.int64),
        target=np.array(target, dtype=np.int64),
        site_a=np.array(site_a, dtype=np.int64),
        site_b=np.array(site_b, dtype=np.int64),
        sign=np.array(sign, dtype=np.float64),
    )


@dataclass(frozen=True, eq=False)
class SectorBasis:
    sector: Sector
    up_masks: np.ndarray
    dn_masks: np.ndarray
    up_index: np.ndarray = field(repr=False)
    dn_index: np.ndarray = field(repr=False)

    @property
    def L(self) -> int:
        return self.sector.L

    @property
    def dimension(self) -> int:
        return len(self.up_masks) * len(self.dn_masks)

    def index(self, up_mask: int, dn_mask: int) -> int:
        a, b = self.up_index[up_mask], self.dn_index[dn_mask]
        if a < 0 or b < 0:
            raise KeyError(f"masks ({up_mask:#b}, {dn_mask:#b}) not in sector {self.sector}")
        return int(a) * len(self.dn_masks) + int(b)

    def masks(self, idx: int) -> tuple[int, int]:
        a, b = divmod(int(idx), len(self.dn_masks))
        return int(self.up_masks[a]), int(self.dn_masks[b])

    def occupations(self, species: str) -> np.ndarray:
        """0/1 matrix of shape (masks, L) for ``'up'`` or ``'dn'``."""
        masks = self.up_masks if species == "up" else self.dn_masks
        return ((masks[:, None] >> np.arange(self.L)) & 1).astype(np.float64)

    @cached_property
    def up_hops(self) -> HopTable:
        return build_hops(self.up_masks, self.up_index, self.L)

    @cached_property
    def dn_hops(self) -> HopTable:
        return build_hops(self.dn_masks, self.dn_index, self.L)


def _lookup(masks: np.ndarray, L: int) -> np.ndarray:
    table = np.full(1 << L, -1, dtype=np.int64)
    table[masks] = np.arange(len(masks), dtype=np.int64)
    return table


def build_basis(sector: Sector, max_dimension: int | None = DEFAULT_MAX_DIMENSION) -> SectorBasis:
    """Enumerate the sector; masks ascend, so enumeration is lexicographic.

    Raises
    ------
    DimensionTooLarge
        When ``C(L, N_up) C(L, N_dn)`` exceeds ``max_dimension`` (``None`` lifts the cap).
    """
    L = sector.L
    dimension = comb(L, sector.N_up) * comb(L, sector.N_dn)
    if max_dimension is not None and dimension > max_dimension:
        raise DimensionTooLarge(dimension, max_dimension)
    up = masks_with_popcount(L, sector.N_up)
    dn = masks_with_popcount(L, sector.N_dn)
    return SectorBasis(sector, up, dn, _lookup(up, L), _lookup(dn, L))
