"""Thermodynamic-limit ground state at the integrable point ``delta_g = -t``.

At ``g = 0`` the doublon number is conserved and the ground state is a
two-fluid state: a high-density core of length fraction ``l_h`` holding all
``n_d`` dressed molecules plus single atoms, and a low-density shell of
single atoms. Each region is a free spinless band, so the energy per site is

    e(n_d, l_h) = -(2/pi) [(1 - l_h) sin(pi n_l) + l_h |t_ad| sin(pi (2 - n_h))] + Delta n_d

with ``n_l = 1 - (1 - n + n_d) / (1 - l_h)`` and ``n_h = 1 + n_d / l_h``.
The band magnitude ``|t_ad|`` is used because the sign of a 1D hopping can be
gauged away. ``e`` is convex on the feasible polygon (each term is the
perspective of a concave function), so a coarse grid followed by a compass
search over the polygon's edge directions reaches the global minimum.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from numba import njit

from flp.errors import (
    InfeasiblePoint,
    IntegrablePointRequired,
    NoInteriorSolution,
    UnclassifiablePoint,
)
from flp.model import FillingSpec, ModelParams

DEFAULT_GRID = 512
DEFAULT_STEP_TOL = 1e-10
ENERGY_TIE = 1e-12
CLASSIFY_TOL = 1e-6
PC_TIE = 1e-9
_FEAS_TOL = 1e-12


class PhaseLabel(str, enum.Enum):
    SF0 = "SF0"
    SF0_plus_NFP = "SF0_plus_NFP"
    SF0_plus_NP = "SF0_plus_NP"
    SFP_plus_NP = "SFP_plus_NP"
    SFP_plus_NFP = "SFP_plus_NFP"
    NP = "NP"
    SFP_uniform = "SFP_uniform"
    Insulator = "Insulator"

    def __str__(self):
        return self.value

    @property
    def is_coexistence(self) -> bool:
        return "_plus_" in self.value


@dataclass(frozen=True)
class VariationalPoint:
    """Pair density ``n_d`` and high-core length fraction ``l_h``."""

    n_d: float
    l_h: float

    def check(self, n: float, p: float = 0.0, tol: float = _FEAS_TOL) -> None:
        """Raise :class:`InfeasiblePoint` unless the point is admissible at filling ``n``."""
        n_d, l_h = self.n_d, self.l_h
        problems = []
        if n_d < max(0.0, n - 1.0) - tol:
            problems.append("n_d below max(0, n-1)")
        if l_h < n_d - tol:
            problems.append("l_h < n_d")
        if l_h > 1.0 + tol:
            problems.append("l_h > 1")
        if l_h > n - n_d + tol:
            problems.append("l_h > n - n_d")
        if n_d > n * (1.0 - p) / 2.0 + tol:
            problems.append("n_d exceeds the minority-species count n(1-p)/2")
        if problems:
            raise InfeasiblePoint(
                f"(n_d={n_d!r}, l_h={l_h!r}) infeasible at n={n}, p={p}: " + "; ".join(problems)
            )


@dataclass(frozen=True)
class ExactSolution:
    n: float
    p: float
    e_gs: float
    point: VariationalPoint
    n_l: Optional[float]
    n_h: Optional[float]
    p_c: float
    constraint_active: bool
    label: Optional[PhaseLabel] = None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["label"] = None if self.label is None else self.label.value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExactSolution":
        data = dict(data)
        data["point"] = VariationalPoint(**data["point"])
        if data.get("label") is not None:
            data["label"] = PhaseLabel(data["label"])
        return cls(**data)


# ---------------------------------------------------------------- core kernels


@njit(cache=True)
def _energy(n, n_d, l_h, t_ad, delta):
    low = 0.0
    if l_h < 1.0:
        n_l = (n - n_d - l_h) / (1.0 - l_h)
        low = (1.0 - l_h) * math.sin(math.pi * n_l)
    high = 0.0
    if l_h > 0.0:
        high = l_h * t_ad * math.sin(math.pi * (1.0 - n_d / l_h))
    return -(2.0 / math.pi) * (low + high) + delta * n_d


@njit(cache=True)
def _lerp(lo, hi, k, m):
    # exact endpoints: lo + (hi - lo) * k / (m - 1) can overshoot hi by an ulp
    if k == m - 1:
        return hi
    return lo + (hi - lo) * k / (m - 1)


@njit(cache=True)
def _grid_search(n, t_ad, delta, lo, hi, m):
    """Best point of an m x m grid spanning the polygon edge to edge."""
    if m < 2:
        return hi, hi, _energy(n, hi, hi, t_ad, delta)
    e_min = np.inf
    for a in range(m):
        n_d = _lerp(lo, hi, a, m)
        top = max(n_d, min(1.0, n - n_d))
        for b in range(m):
            e = _energy(n, n_d, _lerp(n_d, top, b, m), t_ad, delta)
            if e < e_min:
                e_min = e
    # ties resolved toward larger n_d, then larger l_h
    for a in range(m - 1, -1, -1):
        n_d = _lerp(lo, hi, a, m)
        top = max(n_d, min(1.0, n - n_d))
        for b in range(m - 1, -1, -1):
            l_h = _lerp(n_d, top, b, m)
            e = _energy(n, n_d, l_h, t_ad, delta)
            if e <= e_min + 1e-12:
                return n_d, l_h, e
    return hi, hi, _energy(n, hi, hi, t_ad, delta)


@njit(cache=True)
def _max_step(n_d, l_h, a, b, n, lo, hi):
    # constraints g . x <= h for the feasible polygon
    gx = (-1.0, 1.0, 1.0, 0.0, 1.0)
    gy = (0.0, 0.0, -1.0, 1.0, 1.0)
    h = (-lo, hi, 0.0, 1.0, n)
    best = np.inf
    for k in range(5):
        rate = gx[k] * a + gy[k] * b
        if rate > 0.0:
            slack = h[k] - (gx[k] * n_d + gy[k] * l_h)
            s = slack / rate
            if s < best:
                best = s
    return max(best, 0.0)


@njit(cache=True)
def _compass_search(n, t_ad, delta, lo, hi, n_d, l_h, step, step_tol):
    dirs_a = (1.0, -1.0, 0.0, 0.0, 1.0, -1.0, 1.0, -1.0)
    dirs_b = (0.0, 0.0, 1.0, -1.0, 1.0, -1.0, -1.0, 1.0)
    e = _energy(n, n_d, l_h, t_ad, delta)
    while step > step_tol:
        moved = False
        for k in range(8):
            a = dirs_a[k]
            b = dirs_b[k]
            s = min(step, _max_step(n_d, l_h, a, b, n, lo, hi))
            if s <= 0.0:
                continue
            cand_d = n_d + s * a
            cand_h = l_h + s * b
            e_new = _energy(n, cand_d, cand_h, t_ad, delta)
            if e_new < e:
                n_d, l_h, e = cand_d, cand_h, e_new
                moved = True
        if not moved:
            step *= 0.5
    return n_d, l_h, e


def _project(n: float, n_d: float, l_h: float, lo: float, hi: float) -> tuple[float, float]:
    n_d = min(max(n_d, lo), hi)
    l_h = min(max(l_h, n_d), min(1.0, n - n_d))
    return n_d, l_h


@lru_cache(maxsize=65536)
def _solve(n, t_ad, delta, lo, hi, grid, step_tol):
    n_d, l_h, e = _grid_search(n, t_ad, delta, lo, hi, grid)
    spacing = max(hi - lo, 1.0) / max(grid - 1, 1)
    n_d2, l_h2, _ = _compass_search(n, t_ad, delta, lo, hi, n_d, l_h, spacing, step_tol)
    n_d2, l_h2 = _project(n, n_d2, l_h2, lo, hi)
    e2 = float(_energy(n, n_d2, l_h2, t_ad, delta))
    if e2 < e:
        return n_d2, l_h2, e2
    n_d, l_h = _project(n, float(n_d), float(l_h), lo, hi)
    return n_d, l_h, float(_energy(n, n_d, l_h, t_ad, delta))


# ---------------------------------------------------------------- operations


def densities(n: float, point: VariationalPoint) -> tuple[Optional[float], Optional[float]]:
    """Densities ``(n_l, n_h)`` of the low shell and the high core.

    A phase that occupies no length (``l_h = 1`` for the shell, ``l_h = 0``
    for the core) has no density and is returned as ``None``.
    """
    point.check(n)
    n_d, l_h = point.n_d, point.l_h
    n_l = None if l_h >= 1.0 else 1.0 - (1.0 - n + n_d) / (1.0 - l_h)
    n_h = None if l_h <= 0.0 else 1.0 + n_d / l_h
    return n_l, n_h


def energy_functional(n: float, params: ModelParams, point: VariationalPoint) -> float:
    """Energy per site of the two-fluid state at ``point``."""
    point.check(n)
    return float(_energy(n, point.n_d, point.l_h, abs(params.t_ad), params.delta))


def _require_integrable(params: ModelParams) -> None:
    if not params.is_integrable:
        raise IntegrablePointRequired(
            f"exact solution needs delta_g = -t, got delta_g={params.delta_g}, t={params.t}; "
            "use the ED engine for g != 0"
        )


def _validate_filling(n: float, p: float) -> FillingSpec:
    if not 0.0 < n < 2.0:
        raise ValueError(f"exact solver needs 0 < n < 2, got {n}")
    return FillingSpec(n, p)


def _unconstrained(n: float, params: ModelParams, grid: int, step_tol: float):
    return _solve(
        float(n), abs(params.t_ad), float(params.delta), max(0.0, n - 1.0), n / 2.0, grid, step_tol
    )


def critical_polarization(
    n: float, params: ModelParams, grid: int = DEFAULT_GRID, step_tol: float = DEFAULT_STEP_TOL
) -> float:
    """Imbalance above which the optimal pair density can no longer be held."""
    _require_integrable(params)
    _validate_filling(n, 0.0)
    n_d_bar = _unconstrained(n, params, grid, step_tol)[0]
    return min(1.0, max(0.0, 1.0 - 2.0 * n_d_bar / n))


def minimize_ground_state(
    n: float,
    p: float,
    params: ModelParams,
    grid: int = DEFAULT_GRID,
    step_tol: float = DEFAULT_STEP_TOL,
) -> ExactSolution:
    """Global minimum of :func:`energy_functional` with ``n_d <= n (1 - p) / 2``.

    The functional does not depend on ``p``; only the pair cap moves. Below
    the critical polarization the balanced optimum is returned unchanged.
    """
    _require_integrable(params)
    spec = _validate_filling(n, p)
    n, p = float(spec.n), float(spec.p)
    lo = max(0.0, n - 1.0)
    cap = n * (1.0 - p) / 2.0

    n_d, l_h, e = _unconstrained(n, params, grid, step_tol)
    p_c = min(1.0, max(0.0, 1.0 - 2.0 * n_d / n))
    if n_d > cap:
        n_d, l_h, e = _solve(n, abs(params.t_ad), float(params.delta), lo, cap, grid, step_tol)

    point = VariationalPoint(n_d, l_h)
    point.check(n, p, tol=0.0)
    n_l, n_h = densities(n, point)
    sol = ExactSolution(
        n=n,
        p=p,
        e_gs=e,
        point=point,
        n_l=n_l,
        n_h=n_h,
        p_c=p_c,
        constraint_active=p > p_c + PC_TIE,
    )
    return replace(sol, label=classify_phase(n, p, sol))


def stationary_pair_density(n_l: float, l_h: float, params: ModelParams) -> float:
    """Pair density zeroing ``d e / d n_d`` at fixed ``l_h`` and shell density ``n_l``.

    Raises
    ------
    NoInteriorSolution
        When the arccos argument leaves [-1, 1]: the optimum is on the boundary.
    """
    if not 0.0 < l_h < 1.0:
        raise ValueError(f"need 0 < l_h < 1, got {l_h}")
    t_ad = abs(params.t_ad)
    numerator = params.delta + 2.0 * math.cos(math.pi * n_l)
    if t_ad == 0.0:
        raise NoInteriorSolution("t_ad = 0: the core band is flat")
    x = numerator / (2.0 * t_ad)
    if abs(x) > 1.0:
        raise NoInteriorSolution(f"stationarity argument {x:.6g} outside [-1, 1]")
    return l_h / math.pi * math.acos(x)


def nd_of_p(
    n: float, p: float, params: ModelParams, grid: int = DEFAULT_GRID,
    step_tol: float = DEFAULT_STEP_TOL,
) -> float:
    return minimize_ground_state(n, p, params, grid, step_tol).point.n_d


def critical_detuning(n: float, params: ModelParams, samples: int = 4001) -> float:
    """Smallest detuning at which no pairs form at ``p = 0`` (``n <= 1``).

    The empty core is optimal iff every feasible direction ``(n_d, l_h) = s (r, 1)``
    out of the origin is uphill, which gives
    ``Delta_c = max_r (2/pi) [pi cos(pi n)(n - 1 - r) - sin(pi n) + |t_ad| sin(pi r)] / r``.
    """
    _require_integrable(params)
    if not 0.0 < n <= 1.0:
        raise ValueError(f"critical detuning defined for 0 < n <= 1, got {n}")
    t_ad = abs(params.t_ad)
    if abs(n - 1.0) <= 1e-12:
        # slope decreases in r; its supremum is the r -> 0 limit
        return 2.0 + 2.0 * t_ad

    def slope(r):
        return (2.0 / np.pi) * (
            np.pi * np.cos(np.pi * n) * (n - 1.0 - r) - np.sin(np.pi * n) + t_ad * np.sin(np.pi * r)
        ) / r

    r = np.linspace(1.0 / samples, 1.0, samples)
    k = int(np.argmax(slope(r)))
    a, b = r[max(k - 1, 0)], r[min(k + 1, samples - 1)]
    # golden-section polish of the bracketing interval
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    for _ in range(200):
        c, d = b - phi * (b - a), a + phi * (b - a)
        if slope(c) > slope(d):
            b = d
        else:
            a = c
    return float(max(slope(r[k]), slope(0.5 * (a + b))))


def _singles_polarized(n: float, p: float, sol: ExactSolution, tol: float) -> bool:
    if sol.constraint_active or abs(p - sol.p_c) <= tol:
        return True
    singles = n - 2.0 * sol.point.n_d
    return singles <= tol or p * n >= singles - tol


def classify_phase(
    n: float, p: float, sol: ExactSolution, tol: float = CLASSIFY_TOL
) -> PhaseLabel:
    """Label the phase of an exact solution, with equalities tested at ``tol``."""
    n_d, l_h = sol.point.n_d, sol.point.l_h
    if l_h <= tol:
        if n < 1.0 - tol:
            return PhaseLabel.NP
        if abs(n - 1.0) <= tol:
            return PhaseLabel.Insulator
    elif l_h >= 1.0 - tol:
        if n > 1.0 + tol:
            return PhaseLabel.SFP_uniform
        if abs(n - 1.0) <= tol:
            return PhaseLabel.Insulator
    else:
        n_l = sol.n_l if sol.n_l is not None else 0.0
        if abs(n_d - l_h) <= tol:
            if p <= tol and n_l <= tol:
                return PhaseLabel.SF0
            if _singles_polarized(n, p, sol, tol):
                return PhaseLabel.SF0_plus_NFP
            if n_l > tol and p < sol.p_c:
                return PhaseLabel.SF0_plus_NP
        elif n_d < l_h:
            if _singles_polarized(n, p, sol, tol):
                return PhaseLabel.SFP_plus_NFP
            if p < sol.p_c:
                return PhaseLabel.SFP_plus_NP
    raise UnclassifiablePoint(
        f"no phase rule matches n={n}, p={p}, n_d={n_d!r}, l_h={l_h!r}, p_c={sol.p_c!r}"
    )


# ---------------------------------------------------------------- phase diagram


@dataclass(frozen=True)
class PhaseDiagramGrid:
    """Exact solutions on a detuning x polarization lattice, ``cells[i][j]`` at
    ``(delta_axis[i], p_axis[j])``."""

    n: float
    params: ModelParams
    delta_axis: tuple
    p_axis: tuple
    cells: tuple

    def __post_init__(self):
        for name in ("delta_axis", "p_axis"):
            axis = np.asarray(getattr(self, name))
            if axis.size > 1 and not np.all(np.diff(axis) > 0):
                raise ValueError(f"{name} must be strictly increasing")
        if len(self.cells) != len(self.delta_axis) or any(
            len(col) != len(self.p_axis) for col in self.cells
        ):
            raise ValueError("cells must have one entry per (delta, p) pair")

    def labels(self) -> np.ndarray:
        return np.array([[c.label.value for c in col] for col in self.cells], dtype=object)

    def field(self, name: str) -> np.ndarray:
        """Cell attribute as a float array; absent densities become NaN."""
        def get(cell):
            if name in ("n_d", "l_h"):
                return getattr(cell.point, name)
            value = getattr(cell, name)
            return np.nan if value is None else value
        return np.array([[get(c) for c in col] for col in self.cells], dtype=float)

    def boundaries(self) -> list[tuple[tuple[int, int], tuple[int, int], str, str]]:
        """Adjacent cell pairs whose labels differ."""
        lab = self.labels()
        out = []
        n_delta, n_p = lab.shape
        for i in range(n_delta):
            for j in range(n_p):
                for di, dj in ((1, 0), (0, 1)):
                    a, b = i + di, j + dj
                    if a < n_delta and b < n_p and lab[i, j] != lab[a, b]:
                        out.append(((i, j), (a, b), lab[i, j], lab[a, b]))
        return out

    def breached_pair_line(self) -> np.ndarray:
        """``p_c`` per detuning: the line ``n_d_bar = n (1 - p) / 2``."""
        return np.array([col[0].p_c for col in self.cells])

    def pairing_line(self, tol: float = CLASSIFY_TOL) -> np.ndarray:
        """Per polarization, the first detuning where the core stops being fully paired
        (``n_h`` drops below 2); NaN if it never does."""
        n_h = self.field("n_h")
        out = np.full(len(self.p_axis), np.nan)
        for j in range(len(self.p_axis)):
            for i, cell in enumerate(col[j] for col in self.cells):
                if cell.label.is_coexistence and n_h[i, j] < 2.0 - tol:
                    out[j] = self.delta_axis[i]
                    break
        return out

    def uniform_line(self, tol: float = CLASSIFY_TOL) -> Optional[float]:
        """First scanned detuning with ``n_d_bar = l_h_bar = 0``, or None."""
        for delta, col in zip(self.delta_axis, self.cells):
            bal = col[0]
            if bal.p_c >= 1.0 - tol and bal.point.l_h <= tol:
                return float(delta)
        return None


def _solve_column(args):
    n, params, delta, p_axis, grid, step_tol = args
    cell_params = params.replace(delta=float(delta))
    column = []
    for p in p_axis:
        try:
            column.append(minimize_ground_state(n, float(p), cell_params, grid, step_tol))
        except Exception as exc:
            raise type(exc)(f"scan cell (delta={delta!r}, p={p!r}): {exc}") from exc
    return tuple(column)


def scan_phase_diagram(
    n: float,
    params: ModelParams,
    delta_range: tuple[float, float] = (-6.0, 3.0),
    p_range: tuple[float, float] = (0.0, 1.0),
    steps: tuple[int, int] = (121, 101),
    grid: int = DEFAULT_GRID,
    step_tol: float = DEFAULT_STEP_TOL,
    jobs: int = 1,
    delta_axis: Optional[Sequence[float]] = None,
    p_axis: Optional[Sequence[float]] = None,
) -> PhaseDiagramGrid:
    """Solve every cell of a detuning x polarization lattice.

    Columns of fixed detuning share their balanced solve. With ``jobs > 1``
    columns are farmed out to worker processes and reassembled by index.
    """
    _require_integrable(params)
    if delta_axis is None:
        if min(steps) < 2:
            raise ValueError("need at least two steps per axis")
        delta_axis = np.linspace(delta_range[0], delta_range[1], steps[0])
    if p_axis is None:
        p_axis = np.linspace(p_range[0], p_range[1], steps[1])
    delta_axis = tuple(float(d) for d in delta_axis)
    p_axis = tuple(float(p) for p in p_axis)

    tasks = [(n, params, d, p_axis, grid, step_tol) for d in delta_axis]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = tuple(pool.map(_solve_column, tasks))
    else:
        cells = tuple(_solve_column(task) for task in tasks)
    return PhaseDiagramGrid(n, params, delta_axis, p_axis, cells)
