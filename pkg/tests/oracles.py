"""Independent reference computations used by the tests."""

import numpy as np


def two_fluid_energy(n, n_d, l_h, delta, t_ad):
    """Energy per site written directly from the phase densities, vectorized."""
    n_d, l_h = np.broadcast_arrays(np.asarray(n_d, float), np.asarray(l_h, float))
    with np.errstate(divide="ignore", invalid="ignore"):
        n_low = 1.0 - (1.0 - n + n_d) / (1.0 - l_h)
        n_high = 1.0 + n_d / l_h
    low = np.where(l_h < 1.0, (1.0 - l_h) * np.sin(np.pi * np.nan_to_num(n_low)), 0.0)
    high = np.where(l_h > 0.0, l_h * abs(t_ad) * np.sin(np.pi * (2.0 - np.nan_to_num(n_high))), 0.0)
    return -(2.0 / np.pi) * (low + high) + delta * n_d


def brute_force_minimum(n, p, delta, t_ad, m=2000):
    """Minimum over an m x m grid whose rows and columns run edge to edge of the
    feasible polygon (so every vertex and edge is sampled).

    Returns ``(energy, n_d, l_h)``.
    """
    lo = max(0.0, n - 1.0)
    hi = n * (1.0 - p) / 2.0
    n_d = np.linspace(lo, hi, m)[:, None]
    top = np.minimum(1.0, n - n_d)
    frac = np.linspace(0.0, 1.0, m)[None, :]
    l_h = n_d + (top - n_d) * frac
    e = two_fluid_energy(n, n_d, l_h, delta, t_ad)
    i, j = np.unravel_index(np.argmin(e), e.shape)
    return float(e[i, j]), float(n_d[i, 0]), float(l_h[i, j])


def free_ring_energy(L, count):
    """Ground energy of ``count`` free fermions on a periodic L-ring (t = 1)."""
    levels = np.sort(-2.0 * np.cos(2.0 * np.pi * np.arange(L) / L))
    return float(levels[:count].sum())


def reflection_permutation(basis):
    """Basis permutation induced by the site reflection ``i -> L - 1 - i``."""
    L = basis.L

    def reverse(mask):
        return int(format(mask, f"0{L}b")[::-1], 2)

    return np.array([basis.index(*map(reverse, basis.masks(i))) for i in range(basis.dimension)])


def reflection_blocked_ground_energy(H, perm):
    """Lowest eigenvalue of ``H`` via its even/odd blocks under site reflection.

    Reflection reverses the site order within each species, so it acts on the
    basis as the permutation ``perm`` times a sector-wide sign; ``H`` must
    commute with ``perm`` (checked exactly).
    """
    assert np.array_equal(H[np.ix_(perm, perm)], H)
    reps = np.array([i for i in range(len(perm)) if i <= perm[i]])
    partners = perm[reps]
    norm = np.where(reps == partners, 2.0, np.sqrt(2.0))
    even = 2.0 * (H[np.ix_(reps, reps)] + H[np.ix_(reps, partners)]) / np.outer(norm, norm)
    lows = [np.linalg.eigvalsh(even)[0]]
    free = reps != partners
    if free.any():
        r, q = reps[free], partners[free]
        lows.append(np.linalg.eigvalsh(H[np.ix_(r, r)] - H[np.ix_(r, q)])[0])
    return float(min(lows))
