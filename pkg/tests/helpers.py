import numpy as np

from flp.ed.basis import SectorBasis


def translate(basis: SectorBasis, v: np.ndarray) -> np.ndarray:
    """Image of ``v`` under a one-site translation, with fermionic wrap signs."""
    L = basis.L
    full = (1 << L) - 1
    out = np.zeros_like(v)
    for idx in range(basis.dimension):
        mu, md = basis.masks(idx)
        sign = 1.0
        for mask, count in ((mu, basis.sector.N_up), (md, basis.sector.N_dn)):
            if (mask >> (L - 1)) & 1 and (count - 1) % 2:
                sign = -sign
        shifted = [((m << 1) | (m >> (L - 1))) & full for m in (mu, md)]
        out[basis.index(*shifted)] = sign * v[idx]
    return out
