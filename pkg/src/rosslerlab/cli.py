"""Command-line drivers writing reproducible JSON and CSV outputs.

Every command prints a JSON summary on stdout and writes its files under
``--out``. Settings come from built-in defaults, then an optional
``--config`` key-value file, then explicit flags.

Exit codes: 0 success (including a reported "not found"), 1 assumption
failure, 2 analysis error, 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .exceptions import DegenerateFixedPoints, NoDiscontinuityFound, NotSaddleFocus, RosslerError
from .flow import Params, fixed_points
from .integrator import IntegratorConfig, section_crossings, write_trajectory_csv
from .knots import (
    enumerate_words,
    figure_eight_curve,
    knot_polynomial,
    knot_report,
    template_embed,
    torus_knot_id,
    trefoil_curve,
)
from .manifolds import (
    certify_trefoil,
    hetero_mismatch,
    trace_separatrix,
    trefoil_search,
    write_certificate_json,
    write_separatrix_csv,
)
from .periodic import (
    DEFAULT_ORBIT_CONFIG,
    attach_word,
    find_periodic,
    fixed_point_index,
    recurrence_seeds,
    write_orbit_curves_csv,
)
from .return_map import (
    ScanGrid,
    build_partition,
    find_discontinuities,
    return_images,
    write_polylines_csv,
)
from .spectral import check_assumptions, saddle_report

EXIT_OK = 0
EXIT_ASSUMPTION = 1
EXIT_ANALYSIS = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    """Resolved settings of one command."""

    command: str
    params: Params
    integrator: IntegratorConfig
    out_dir: Path
    seed: int
    workers: int
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "params": self.params.to_dict(),
            "integrator": self.integrator.to_dict(),
            "out_dir": str(self.out_dir),
            "seed": self.seed,
            "options": {k: _jsonable(v) for k, v in sorted(self.options.items())},
        }


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (tuple, list)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def read_config(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; keys use ``-`` or ``_``."""
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


_BASE_DEFAULTS = {
    "a": 0.468, "b": 0.3, "c": 4.615,
    "rel_tol": 1e-10, "abs_tol": 1e-12, "max_step": 0.1, "max_time": 1000.0,
    "out": "run", "seed": 0, "workers": os.cpu_count() or 1,
}


def _resolve(args, parser: argparse.ArgumentParser, defaults: dict) -> dict:
    """Merge defaults, config file and flags (flags win)."""
    vals = dict(_BASE_DEFAULTS)
    vals.update(defaults)
    actions = {a.dest: a for a in parser._actions}
    if args.config:
        for k, raw in read_config(args.config).items():
            if k not in actions or k in ("config", "help"):
                raise UsageError(f"unknown config key {k!r}")
            act = actions[k]
            conv = act.type or str
            if act.nargs in (2, "+"):
                vals[k] = [conv(x) for x in raw.replace(",", " ").split()]
            elif isinstance(act, argparse._StoreTrueAction):
                vals[k] = raw.lower() in ("1", "true", "yes", "on")
            else:
                vals[k] = conv(raw)
    for k, v in vars(args).items():
        if v is not None and k not in ("config", "func", "command"):
            vals[k] = v
    return vals


def _run_config(command: str, vals: dict, keys: tuple[str, ...]) -> RunConfig:
    for k in ("rel_tol", "abs_tol", "max_step", "max_time"):
        if not vals[k] > 0:
            raise UsageError(f"{k.replace('_', '-')} must be positive")
    if int(vals["workers"]) < 1:
        raise UsageError("workers must be at least 1")
    integ = IntegratorConfig(
        rel_tol=float(vals["rel_tol"]), abs_tol=float(vals["abs_tol"]),
        max_step=float(vals["max_step"]), max_time=float(vals["max_time"]),
    )
    return RunConfig(
        command=command,
        params=Params(float(vals["a"]), float(vals["b"]), float(vals["c"])),
        integrator=integ,
        out_dir=Path(vals["out"]),
        seed=int(vals["seed"]),
        workers=int(vals["workers"]),
        options={k: vals[k] for k in keys},
    )


def _emit(rc: RunConfig, result: dict, status: str = "ok", filename: str | None = None) -> dict:
    doc = {
        "tool": "rosslerlab",
        "version": __version__,
        "status": status,
        "config": rc.to_dict(),
        "result": _jsonable(result),
    }
    text = json.dumps(doc, indent=2, sort_keys=True)
    if filename:
        rc.out_dir.mkdir(parents=True, exist_ok=True)
        (rc.out_dir / filename).write_text(text + "\n")
    print(text)
    return doc


# --------------------------------------------------------------------------
# commands


def cmd_analyze(rc: RunConfig) -> int:
    p = rc.params
    try:
        fp = fixed_points(p)
    except DegenerateFixedPoints as exc:
        _emit(rc, {"error": exc.code, "message": str(exc)}, "error")
        return EXIT_ANALYSIS
    status = check_assumptions(p)
    result = {
        "fixed_points": {"p_in": fp.p_in.tolist(), "p_out": fp.p_out.tolist()},
        "assumptions": status.to_dict(),
    }
    try:
        rep = saddle_report(p)
        result["gamma_in"] = rep.spectrum_in.gamma
        result["gamma_out"] = rep.spectrum_out.gamma
        result["nu_in"], result["nu_out"] = rep.nu_in, rep.nu_out
    except NotSaddleFocus as exc:
        result["saddle_report_error"] = str(exc)
        if status.report is None:
            # no complex pair at some fixed point: nothing to analyse
            result.update({"error": exc.code, "message": str(exc)})
            _emit(rc, result, "error", "analyze.json")
            return EXIT_ANALYSIS
    _emit(rc, result, "ok" if status.all_pass else "assumptions_failed", "analyze.json")
    return EXIT_OK if status.all_pass else EXIT_ASSUMPTION


def _grid(o: dict) -> ScanGrid:
    u, v = o["u_range"], o["v_range"]
    if not (u[0] < u[1] and v[0] < v[1]):
        raise UsageError("scan ranges must be increasing intervals")
    return ScanGrid(tuple(u), tuple(v), n_lines=int(o["n_lines"]), n_points=int(o["n_points"]))


def cmd_return_map(rc: RunConfig) -> int:
    o = rc.options
    p = rc.params
    rc.out_dir.mkdir(parents=True, exist_ok=True)
    start = np.asarray(o["start"], dtype=float)
    events, traj = section_crossings(p, start, int(o["n_returns"]), rc.integrator, record=bool(o["trajectory"]))
    with open(rc.out_dir / "section_run.csv", "w") as fh:
        fh.write("n,t,u,v,ydot_rate\n")
        for i, e in enumerate(events):
            fh.write(f"{i},{e.t:.17g},{e.point.u:.17g},{e.point.v:.17g},{e.ydot_rate:.17g}\n")
    if o["trajectory"]:
        write_trajectory_csv(rc.out_dir / "trajectory.csv", traj)
    files = ["section_run.csv"] + (["trajectory.csv"] if o["trajectory"] else [])
    result = {"n_crossings": len(events), "termination": traj.status}
    if int(o["n_lines"]) > 0:
        grid = _grid(o)
        pts = np.vstack([grid.line_points(i) for i in range(grid.n_lines)])
        imgs = return_images(p, pts, rc.integrator, workers=rc.workers)
        with open(rc.out_dir / "return_samples.csv", "w") as fh:
            fh.write("u,v,u_next,v_next,flight_time\n")
            for q, im in zip(pts, imgs):
                fh.write(",".join(f"{x:.17g}" for x in (*q, im[0], im[1], im[3])) + "\n")
        files.append("return_samples.csv")
        result["n_samples"] = len(pts)
        result["n_escaped"] = int(np.sum(~np.isfinite(imgs[:, 0])))
    result["files"] = files
    _emit(rc, result, "ok", "return_map.json")
    return EXIT_OK


def cmd_scan(rc: RunConfig) -> int:
    o = rc.options
    p = rc.params
    grid = _grid(o)
    p0 = None if o["p0"] is None else tuple(o["p0"])
    try:
        st = find_discontinuities(p, grid, rc.integrator, p0=p0, workers=rc.workers)
    except NoDiscontinuityFound as exc:
        _emit(rc, {"message": str(exc)}, "not_found", "discontinuities.json")
        return EXIT_OK
    curves = {"delta": st.delta_polyline}
    curves.update({f"rho_{i}": r for i, r in enumerate(st.rho_polylines)})
    rc.out_dir.mkdir(parents=True, exist_ok=True)
    write_polylines_csv(rc.out_dir / "discontinuities.csv", curves)
    result = st.to_dict()
    if p0 is not None and st.rho_polylines:
        part = build_partition(st, p0)
        result["partition"] = {"ref_one": list(part.ref_one.uv), "ref_two": list(part.ref_two.uv)}
    result["files"] = ["discontinuities.csv"]
    _emit(rc, result, "ok", "discontinuities.json")
    return EXIT_OK


def cmd_hetero(rc: RunConfig) -> int:
    o = rc.options
    free = tuple(o["free"])
    box = float(o["box"])
    if not box > 0:
        raise UsageError("search box is empty: --box must be positive")
    if len(free) != 2 or len(set(free)) != 2 or not set(free) <= {"a", "b", "c"}:
        raise UsageError("--free must name two distinct parameters among a, b, c")
    p = rc.params
    seed_mm = hetero_mismatch(p, rc.integrator)
    res = trefoil_search(p, free, box, rc.integrator, tol=float(o["tol"]), maxiter=int(o["maxiter"]))
    rc.out_dir.mkdir(parents=True, exist_ok=True)
    result = {"seed_mismatch": seed_mm.to_dict(), "search": res.to_dict()}
    cert = certify_trefoil(res.params, rc.integrator, mismatch_tol=float(o["tol"]))
    write_certificate_json(rc.out_dir / "certificate.json", cert)
    result["certificate"] = cert.to_dict()
    seps = [
        trace_separatrix(res.params, "p_out_unstable", br, rc.integrator, max_time=300.0)
        for br in ("plus", "minus")
    ] + [
        trace_separatrix(res.params, "p_in_stable", br, rc.integrator, max_time=300.0,
                         arclength_cap=500.0)
        for br in ("plus", "minus")
    ]
    write_separatrix_csv(rc.out_dir / "separatrices.csv", seps)
    result["files"] = ["certificate.json", "separatrices.csv"]
    _emit(rc, result, "found" if res.found else "not_found", "hetero_search.json")
    return EXIT_OK


def _periods(spec: str) -> list[int]:
    out = []
    for part in str(spec).split(","):
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part.strip():
            out.append(int(part))
    if not out or min(out) < 1:
        raise UsageError("--k needs positive periods, e.g. 3 or 1-4")
    return sorted(set(out))


def cmd_orbits(rc: RunConfig) -> int:
    o = rc.options
    p = rc.params
    cfg = IntegratorConfig(
        rel_tol=min(rc.integrator.rel_tol, DEFAULT_ORBIT_CONFIG.rel_tol),
        abs_tol=min(rc.integrator.abs_tol, DEFAULT_ORBIT_CONFIG.abs_tol),
        max_step=rc.integrator.max_step, max_time=rc.integrator.max_time,
    )
    part = None
    if o["p0"] is not None:
        grid = _grid(o)
        try:
            st = find_discontinuities(p, grid, cfg, p0=tuple(o["p0"]), workers=rc.workers)
            part = build_partition(st, tuple(o["p0"]))
        except NoDiscontinuityFound:
            part = None
    orbits, fails = [], []
    for k in _periods(o["k"]):
        seeds = recurrence_seeds(p, k, cfg, n_returns=int(o["n_returns"]), n_seeds=int(o["n_seeds"]))
        orbits.extend(find_periodic(p, k, seeds, cfg, workers=rc.workers, failures=fails))
    records = []
    for orb in orbits:
        d = orb.to_dict()
        if part is not None:
            try:
                d["word"] = attach_word(orb, part)
            except RosslerError as exc:
                d["word_error"] = exc.code
        if o["index"]:
            try:
                d["index"] = fixed_point_index(p, orb, float(o["loop_radius"]), cfg=cfg,
                                               workers=rc.workers).to_dict()
            except RosslerError as exc:
                d["index_error"] = exc.code
        records.append(d)
    rc.out_dir.mkdir(parents=True, exist_ok=True)
    write_orbit_curves_csv(rc.out_dir / "orbit_curves.csv", orbits)
    result = {
        "orbits": records,
        "failures": [{"seed": list(f.seed), "k": f.k, "reason": f.reason} for f in fails],
        "files": ["orbit_curves.csv"],
    }
    _emit(rc, result, "ok" if orbits else "not_found", "orbits.json")
    return EXIT_OK


def _read_curve(path) -> np.ndarray:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return np.column_stack([data["x"], data["y"], data["z"]])


def cmd_knots(rc: RunConfig) -> int:
    o = rc.options
    rng = np.random.default_rng(rc.seed)
    reports = []
    if o["template"]:
        n = int(o["max_len"])
        if n < 1:
            raise UsageError("--max-len must be at least 1")
        for w in enumerate_words(n, min_len=int(o["min_len"])):
            reports.append(knot_report(w, template_embed(w)))
    if o["fixture"]:
        curve = {"trefoil": trefoil_curve, "figure-eight": figure_eight_curve}[o["fixture"]]()
        poly = knot_polynomial(curve, rng=rng)
        reports.append({"word": o["fixture"], "alexander": list(poly.coeffs),
                        "alexander_text": str(poly), "torus": torus_knot_id(poly)})
    if o["curve"]:
        poly = knot_polynomial(_read_curve(o["curve"]), rng=rng)
        reports.append({"word": str(o["curve"]), "alexander": list(poly.coeffs),
                        "alexander_text": str(poly), "torus": torus_knot_id(poly)})
    if not reports:
        raise UsageError("nothing to do: give --template, --fixture or --curve")
    _emit(rc, {"reports": reports}, "ok", "knots.json")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _common(sp: argparse.ArgumentParser) -> None:
    g = sp.add_argument_group("run settings")
    g.add_argument("--config", help="key = value settings file; flags override it")
    g.add_argument("--a", type=float)
    g.add_argument("--b", type=float)
    g.add_argument("--c", type=float)
    g.add_argument("--rel-tol", type=float)
    g.add_argument("--abs-tol", type=float)
    g.add_argument("--max-step", type=float)
    g.add_argument("--max-time", type=float)
    g.add_argument("--out", help="output directory (default: run)")
    g.add_argument("--seed", type=int, help="random seed for projection retries")
    g.add_argument("--workers", type=int, help="parallel workers (default: CPU count)")


def _grid_args(sp, u=(-1.7, -0.05), v=(-0.3, 0.3), n_lines=11, n_points=201):
    sp.add_argument("--u-range", type=float, nargs=2, metavar=("LO", "HI"))
    sp.add_argument("--v-range", type=float, nargs=2, metavar=("LO", "HI"))
    sp.add_argument("--n-lines", type=int)
    sp.add_argument("--n-points", type=int)
    return {"u_range": list(u), "v_range": list(v), "n_lines": n_lines, "n_points": n_points}


COMMANDS = {}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rosslerlab", description="Return-map, manifold and knot experiments for the Rossler flow.")
    parser.add_argument("--version", action="version", version=f"rosslerlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("analyze", help="fixed points, spectra and assumption checks")
    _common(sp)
    COMMANDS["analyze"] = (sp, cmd_analyze, {})

    sp = sub.add_parser("return-map", help="section run and grid of return-map samples")
    _common(sp)
    d = _grid_args(sp, n_lines=0)
    sp.add_argument("--start", type=float, nargs=3, metavar=("X", "Y", "Z"))
    sp.add_argument("--n-returns", type=int)
    sp.add_argument("--trajectory", action="store_true", default=None, help="also write the sampled trajectory")
    d.update({"start": [-1.0, 2.0, 0.0], "n_returns": 500, "trajectory": False})
    COMMANDS["return-map"] = (sp, cmd_return_map, d)

    sp = sub.add_parser("scan-discontinuities", help="locate the jump curve and its preimages")
    _common(sp)
    d = _grid_args(sp)
    sp.add_argument("--p0", type=float, nargs=2, metavar=("U", "V"), help="symbol-2 reference point")
    d.update({"p0": None})
    COMMANDS["scan-discontinuities"] = (sp, cmd_scan, d)

    sp = sub.add_parser("hetero-search", help="Nelder-Mead search for the trefoil parameter")
    _common(sp)
    sp.add_argument("--free", nargs=2, metavar=("P1", "P2"))
    sp.add_argument("--box", type=float, help="half-width of the search box")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--maxiter", type=int)
    COMMANDS["hetero-search"] = (sp, cmd_hetero, {"free": ["a", "c"], "box": 0.05, "tol": 1e-3, "maxiter": 200})

    sp = sub.add_parser("orbits", help="periodic orbits of the return map")
    _common(sp)
    d = _grid_args(sp, n_lines=7, n_points=161)
    sp.add_argument("--k", help="period or range, e.g. 3 or 1-4")
    sp.add_argument("--n-returns", type=int)
    sp.add_argument("--n-seeds", type=int)
    sp.add_argument("--p0", type=float, nargs=2, metavar=("U", "V"), help="symbol-2 reference for words")
    sp.add_argument("--index", action="store_true", default=None, help="compute fixed-point indices")
    sp.add_argument("--loop-radius", type=float)
    d.update({"k": "1", "n_returns": 600, "n_seeds": 8, "p0": None, "index": False, "loop_radius": 1e-3})
    COMMANDS["orbits"] = (sp, cmd_orbits, d)

    sp = sub.add_parser("knots", help="knot types of template orbits and curves")
    _common(sp)
    sp.add_argument("--template", action="store_true", default=None, help="template orbits of primitive words")
    sp.add_argument("--max-len", type=int)
    sp.add_argument("--min-len", type=int)
    sp.add_argument("--fixture", choices=("trefoil", "figure-eight"))
    sp.add_argument("--curve", help="CSV with x,y,z columns of a closed curve")
    COMMANDS["knots"] = (sp, cmd_knots, {"template": False, "max_len": 4, "min_len": 2, "fixture": None, "curve": None})
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    sp, fn, defaults = COMMANDS[args.command]
    try:
        vals = _resolve(args, sp, defaults)
        rc = _run_config(args.command, vals, tuple(defaults))
    except (UsageError, ValueError, OSError) as exc:
        print(f"rosslerlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return fn(rc)
    except UsageError as exc:
        print(f"rosslerlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RosslerError as exc:
        _emit(rc, {"error": exc.code, "message": str(exc)}, "error")
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
