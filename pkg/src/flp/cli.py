"""Command-line front end writing deterministic CSV/JSON artifacts.

Grids (``scan``, ``nd-curve``, ``pc-curve``) default to CSV; single solves and
ED observables are JSON with a provenance block. Floats are written in their
shortest round-trip form, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from flp import __version__
from flp.errors import FLPError, NonIntegerSector, UsageError
from flp.model import FillingSpec, ModelParams, Sector, sector_for

COMMANDS = ("exact", "scan", "pc-curve", "nd-curve", "ed", "structure-factor", "gap")
GRID_COMMANDS = ("scan", "pc-curve", "nd-curve")
SCAN_HEADER = ["delta", "p", "n_d", "l_h", "n_l", "n_h", "e_gs", "p_c", "phase"]


@dataclass
class RunSpec:
    command: str
    params: ModelParams
    filling: FillingSpec | None
    options: dict = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _steps(text):
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError(f"need at least 2 steps, got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _finite(text):
    value = float(text)
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text}")
    return value


def _default_jobs():
    try:
        return max(1, int(os.environ.get("FLP_JOBS", "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="flp", description="Phase diagrams of the correlated-hopping Hubbard chain.")
    parser.add_argument("--version", action="version", version=f"flp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def couplings(p, delta_g_default):
        p.add_argument("--delta-g", type=_finite, default=delta_g_default,
                       help=f"correlated-hopping shift (default {delta_g_default})")
        p.add_argument("--delta-t", type=_finite, default=0.4, help="pair-exchange shift (default 0.4)")
        p.add_argument("--delta", type=_finite, default=0.0, help="detuning (default 0)")
        p.add_argument("-o", "--output", help="output file (default: stdout)")

    def exact_opts(p):
        p.add_argument("--grid", type=_steps, default=512, help="coarse grid per axis (default 512)")
        p.add_argument("--step-tol", type=_positive_float, default=1e-10,
                       help="final compass step (default 1e-10)")

    def ed_opts(p, with_p=True):
        p.add_argument("--L", type=int, default=12, help="ring length (default 12)")
        p.add_argument("--n", type=_finite, default=1.0, help="filling (default 1)")
        if with_p:
            p.add_argument("--p", type=_finite, default=0.0, help="polarization (default 0)")
        p.add_argument("--tol", type=_positive_float, default=1e-10, help="Lanczos residual (default 1e-10)")
        p.add_argument("--max-iter", type=_positive_int, default=20_000)
        p.add_argument("--allow-large", action="store_true",
                       help="lift the sector dimension cap (needed for L=16)")

    p = sub.add_parser("exact", help="exact solution at one (n, p, delta)")
    couplings(p, -1.0)
    exact_opts(p)
    p.add_argument("--n", type=_finite, required=True)
    p.add_argument("--p", type=_finite, default=0.0)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("scan", help="exact phase diagram on a delta x p lattice")
    couplings(p, -1.0)
    exact_opts(p)
    p.add_argument("--n", type=_finite, required=True)
    p.add_argument("--delta-min", type=_finite, default=-6.0)
    p.add_argument("--delta-max", type=_finite, default=3.0)
    p.add_argument("--delta-steps", type=_steps, default=121)
    p.add_argument("--p-min", type=_finite, default=0.0)
    p.add_argument("--p-max", type=_finite, default=1.0)
    p.add_argument("--p-steps", type=_steps, default=101)
    p.add_argument("--jobs", type=_positive_int, default=_default_jobs(),
                   help="worker processes (default $FLP_JOBS or 1)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("nd-curve", help="exact pair density versus polarization")
    couplings(p, -1.0)
    exact_opts(p)
    p.add_argument("--n", type=_finite, required=True)
    p.add_argument("--p-steps", type=_steps, default=101)
    p.add_argument("--format", choices=("csv",), default="csv")

    p = sub.add_parser("pc-curve", help="exact critical polarization versus filling")
    couplings(p, -1.0)
    exact_opts(p)
    p.add_argument("--n-min", type=_finite, default=0.05)
    p.add_argument("--n-max", type=_finite, default=1.95)
    p.add_argument("--n-steps", type=_steps, default=39)
    p.add_argument("--format", choices=("csv",), default="csv")

    p = sub.add_parser("ed", help="Lanczos ground state of one sector")
    couplings(p, -0.8)
    ed_opts(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--checkpoint", help="write the ground-state vector here (FLP1 format)")
    p.add_argument("--format", choices=("json",), default="json")

    p = sub.add_parser("structure-factor", help="charge structure factor of the ED ground space")
    couplings(p, -0.8)
    ed_opts(p)
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3])
    p.add_argument("--site", type=int, default=None, help="reference site j (default L/2)")
    p.add_argument("--degeneracy-tol", type=_positive_float, default=1e-8)
    p.add_argument("--format", choices=("json",), default="json")

    p = sub.add_parser("gap", help="charge gap E0(N+1) + E0(N-1) - 2 E0(N) at p = 0")
    couplings(p, -0.8)
    ed_opts(p, with_p=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json",), default="json")
    return parser


def _check_range(name, value, lo, hi):
    if not lo <= value <= hi:
        raise UsageError(f"--{name} must lie in [{lo}, {hi}], got {value}")


def parse(argv) -> RunSpec:
    """Parse ``argv`` into a validated :class:`RunSpec`; raises :class:`UsageError`."""
    ns = build_parser().parse_args(argv)
    opts = vars(ns).copy()
    command = opts.pop("command")
    try:
        params = ModelParams(
            delta_g=opts.pop("delta_g"), delta_t=opts.pop("delta_t"), delta=opts.pop("delta")
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    filling = None
    n, p = opts.pop("n", None), opts.pop("p", None)
    if n is not None:
        _check_range("n", n, 0.0, 2.0)
        if p is not None:
            _check_range("p", p, -1.0, 1.0)
        try:
            filling = FillingSpec(n, p or 0.0)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc

    if command in ("exact", "scan", "nd-curve") and not 0.0 < filling.n < 2.0:
        raise UsageError("exact solver needs 0 < n < 2")
    if command == "scan":
        if not opts["delta_min"] < opts["delta_max"]:
            raise UsageError("--delta-min must be below --delta-max")
        _check_range("p-min", opts["p_min"], 0.0, 1.0)
        _check_range("p-max", opts["p_max"], 0.0, 1.0)
        if not opts["p_min"] < opts["p_max"]:
            raise UsageError("--p-min must be below --p-max")
        if filling.n * (1.0 + opts["p_max"]) / 2.0 > 1.0 + 1e-9:
            raise UsageError(f"--p-max {opts['p_max']} overfills the majority species at n={filling.n}")
    if command == "nd-curve" and filling.n > 1.0:
        raise UsageError("nd-curve covers p in [0, 1] and so needs n <= 1")
    if command == "pc-curve":
        _check_range("n-min", opts["n_min"], 1e-9, 2.0 - 1e-9)
        _check_range("n-max", opts["n_max"], 1e-9, 2.0 - 1e-9)
        if not opts["n_min"] < opts["n_max"]:
            raise UsageError("--n-min must be below --n-max")
    if command in ("ed", "structure-factor", "gap"):
        L = opts["L"]
        if L < 2:
            raise UsageError(f"--L must be at least 2, got {L}")
        try:
            if command == "gap":
                N = sector_for(L, FillingSpec(filling.n, 0.0)).N
                if not 1 <= N <= 2 * L - 1:
                    raise UsageError(f"gap needs 1 <= N <= 2L-1, got N={N}")
                opts["N"] = N
            else:
                opts["sector"] = sector_for(L, filling)
        except NonIntegerSector as exc:
            raise UsageError(f"(L={L}, n={filling.n}, p={filling.p}) is not commensurate: {exc}") from exc
        if command == "structure-factor":
            site = opts["site"]
            if site is not None and not 0 <= site < L:
                raise UsageError(f"--site must lie in [0, {L - 1}]")
            if not opts["seeds"]:
                raise UsageError("need at least one seed")
    return RunSpec(command, params, filling, opts)


# ---------------------------------------------------------------- serialization


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _provenance(spec: RunSpec) -> dict:
    options = {}
    for key, value in sorted(spec.options.items()):
        if key in ("output", "checkpoint", "format"):
            continue
        if isinstance(value, Sector):
            value = asdict(value)
        options[key] = value
    return {
        "code": "flp",
        "version": __version__,
        "command": spec.command,
        "parameters": {**asdict(spec.params), "g": spec.params.g, "t_ad": spec.params.t_ad},
        "filling": None if spec.filling is None else asdict(spec.filling),
        "options": options,
    }


def _scan_rows(grid):
    for i, delta in enumerate(grid.delta_axis):
        for j, p in enumerate(grid.p_axis):
            c = grid.cells[i][j]
            yield [delta, p, c.point.n_d, c.point.l_h, c.n_l, c.n_h, c.e_gs, c.p_c, c.label.value]


# ---------------------------------------------------------------- commands


def _run_exact(spec: RunSpec) -> str:
    from flp.exact import minimize_ground_state

    o = spec.options
    sol = minimize_ground_state(spec.filling.n, spec.filling.p, spec.params, o["grid"], o["step_tol"])
    if o["format"] == "csv":
        return _csv(SCAN_HEADER, [[spec.params.delta, sol.p, sol.point.n_d, sol.point.l_h, sol.n_l,
                                   sol.n_h, sol.e_gs, sol.p_c, sol.label.value]])
    return _json({"provenance": _provenance(spec), "solution": sol.to_dict()})


def _run_scan(spec: RunSpec) -> str:
    from flp.exact import scan_phase_diagram

    o = spec.options
    grid = scan_phase_diagram(
        spec.filling.n, spec.params,
        (o["delta_min"], o["delta_max"]), (o["p_min"], o["p_max"]),
        (o["delta_steps"], o["p_steps"]), o["grid"], o["step_tol"], jobs=o["jobs"],
    )
    if o["format"] == "csv":
        return _csv(SCAN_HEADER, _scan_rows(grid))
    return _json({
        "provenance": _provenance(spec),
        "delta_axis": list(grid.delta_axis),
        "p_axis": list(grid.p_axis),
        "cells": [[c.to_dict() for c in col] for col in grid.cells],
    })


def _run_nd_curve(spec: RunSpec) -> str:
    from flp.exact import nd_of_p

    o = spec.options
    ps = np.linspace(0.0, 1.0, o["p_steps"])
    rows = [[float(p), nd_of_p(spec.filling.n, float(p), spec.params, o["grid"], o["step_tol"])] for p in ps]
    return _csv(["p", "n_d"], rows)


def _run_pc_curve(spec: RunSpec) -> str:
    from flp.exact import critical_polarization

    o = spec.options
    ns = np.linspace(o["n_min"], o["n_max"], o["n_steps"])
    rows = [[float(n), critical_polarization(float(n), spec.params, o["grid"], o["step_tol"])] for n in ns]
    return _csv(["n", "p_c"], rows)


def _basis_kwargs(o) -> dict:
    return {"max_dimension": None} if o["allow_large"] else {}


def _run_ed(spec: RunSpec) -> str:
    from flp.ed import build_basis, ground_state_lanczos, write_checkpoint
    from flp.observables import pair_density

    o = spec.options
    basis = build_basis(o["sector"], **_basis_kwargs(o))
    report, state = ground_state_lanczos(spec.params, basis, o["tol"], o["max_iter"], o["seed"])
    if o.get("checkpoint"):
        write_checkpoint(o["checkpoint"], state)
    return _json({
        "provenance": _provenance(spec),
        "sector": asdict(basis.sector),
        "dimension": basis.dimension,
        "report": asdict(report),
        "n_d": pair_density(state),
    })


def _run_structure_factor(spec: RunSpec) -> str:
    from flp.observables import ed_observables, peak_momentum

    o = spec.options
    L = o["sector"].L
    runs = []
    for seed in o["seeds"]:
        runs.append(ed_observables(
            spec.params, L, spec.filling, seed=seed, tol=o["tol"], j=o["site"],
            degeneracy_tol=o["degeneracy_tol"], max_iter=o["max_iter"], **_basis_kwargs(o),
        ))
    nq = np.mean([obs.nq for _, obs in runs], axis=0)
    corr = np.mean([obs.corr for _, obs in runs], axis=0)
    spread = float(np.ptp([obs.nq for _, obs in runs], axis=0).max())

    return _json({
        "provenance": _provenance(spec),
        "sector": asdict(o["sector"]),
        "q": [2.0 * math.pi * k / L for k in range(L)],
        "nq": [float(v) for v in nq],
        "corr": [float(v) for v in corr],
        "peak_q": peak_momentum(nq),
        "n_d": float(np.mean([obs.n_d for _, obs in runs])),
        "j": runs[0][1].j,
        "seeds": list(o["seeds"]),
        "spread": spread,
        "e0": [reports[0].e0 for reports, _ in runs],
        "degeneracy": [len(reports) for reports, _ in runs],
    })


def _run_gap(spec: RunSpec) -> str:
    from flp.ed import build_basis, ground_state_lanczos
    from flp.observables import _gap_sectors

    o = spec.options
    energies = {}
    for sector in _gap_sectors(o["L"], o["N"]):
        basis = build_basis(sector, **_basis_kwargs(o))
        energies[sector.N] = ground_state_lanczos(spec.params, basis, o["tol"], o["max_iter"], o["seed"])[0].e0
    N = o["N"]
    return _json({
        "provenance": _provenance(spec),
        "N": N,
        "energies": {str(k): v for k, v in sorted(energies.items())},
        "gap": energies[N + 1] + energies[N - 1] - 2.0 * energies[N],
    })


_RUNNERS = {
    "exact": _run_exact,
    "scan": _run_scan,
    "nd-curve": _run_nd_curve,
    "pc-curve": _run_pc_curve,
    "ed": _run_ed,
    "structure-factor": _run_structure_factor,
    "gap": _run_gap,
}


def execute(spec: RunSpec) -> int:
    """Run ``spec`` and write its artifact; returns the exit status."""
    text = _RUNNERS[spec.command](spec)
    out = spec.options.get("output")
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    try:
        return execute(parse(sys.argv[1:] if argv is None else argv))
    except FLPError as exc:
        print(f"flp: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
