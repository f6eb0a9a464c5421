"""Command line interface.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import os
import sys
from importlib import resources

import numpy as np

from . import errors
from .abelian import default_grid, limit_speed, speed_curve
from .dynamics import (SHOOTING_TOL, find_limit_cycle, manifold_residual, on_manifold, phase_portrait,
                       simulate_full, simulate_reduced, solve_wave_speed)
from .model import ModelParams, equilibria, hamiltonian, slow_manifold_w
from .numerics import DEFAULT_TOL, Tolerances

log = logging.getLogger("mkdvwave")

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

SPEED_COLUMNS = ("h", "B0", "Bn", "Btilde", "c0", "c0_prime")

SCHEMAS = {
    "speed-curve": "speed_curve.schema.json",
    "phase-portrait": "phase_portrait.schema.json",
    "find-speed": "find_speed.schema.json",
    "verify": "verify.schema.json",
    "limit-cycle": "limit_cycle.schema.json",
    "manifold-residual": "manifold_residual.schema.json",
}

# default integration horizon per simulate mode
T_END = {"reduced": 50.0, "full": 50.0, "limit-cycle": 0.0, "manifold-residual": 10.0}


def load_schema(command: str) -> dict:
    """JSON schema shipped for the JSON output of ``command``."""
    ref = resources.files("mkdvwave") / "schemas" / SCHEMAS[command]
    return json.loads(ref.read_text(encoding="utf-8"))


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


# ------------------------------------------------------------ formatting

def fmt_num(x) -> str:
    if x is None:
        return "nan"
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return "%.17g" % float(x)


def write_csv(stream, columns, rows) -> None:
    stream.write(",".join(columns) + "\n")
    for row in rows:
        stream.write(",".join(fmt_num(v) for v in row) + "\n")


def _json_num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def emit_text(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    write_csv(buf, columns, rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


# ------------------------------------------------------------- arguments

def _tolerances(args, base: Tolerances = DEFAULT_TOL) -> Tolerances:
    kw = {}
    if args.root_tol is not None:
        kw["root_tol"] = args.root_tol
    if args.quad_tol is not None:
        kw["quad_rel_tol"] = args.quad_tol
    if args.ode_tol is not None:
        kw["ode_rel_tol"] = args.ode_tol
        kw["ode_abs_tol"] = args.ode_tol * 1e-2
    try:
        return base.with_(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _params(args, eps=None) -> ModelParams:
    try:
        return ModelParams(args.n, args.c, args.eps if eps is None else eps)
    except errors.ParameterError as exc:
        raise ConfigError(str(exc)) from exc


def _svg_path(args):
    if args.format == "svg" and not args.out:
        return sys.stdout.buffer
    return args.out


def _common(p: argparse.ArgumentParser, formats=("csv", "json")) -> None:
    p.add_argument("--n", type=int, default=2, help="integer exponent n >= 1")
    p.add_argument("--c", type=float, default=1.0, help="wave speed c > 0")
    p.add_argument("--eps", type=float, default=0.0, help="perturbation eps >= 0")
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--format", choices=formats, default=formats[0])
    p.add_argument("--plot", metavar="FILE", help="also render a matplotlib figure to FILE")
    p.add_argument("--width", type=int, default=800)
    p.add_argument("--height", type=int, default=600)
    p.add_argument("--root-tol", type=float)
    p.add_argument("--quad-tol", type=float)
    p.add_argument("--ode-tol", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mkdvwave", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("speed-curve", help="limit wave speed c0(h) on an energy grid")
    _common(p, ("csv", "json", "svg"))
    p.add_argument("--h-min", type=float)
    p.add_argument("--h-max", type=float)
    p.add_argument("--num", type=int, default=200)
    p.set_defaults(func=cmd_speed_curve)

    p = sub.add_parser("phase-portrait", help="orbits of the unperturbed system")
    _common(p, ("csv", "json", "svg"))
    p.add_argument("--num", type=int, default=8, help="number of closed orbits")
    p.add_argument("--samples", type=int, default=400)
    p.set_defaults(func=cmd_phase_portrait)

    p = sub.add_parser("find-speed", help="wave speed c(eps, h)")
    _common(p, ("json",))
    p.add_argument("--h", type=float, required=True)
    p.set_defaults(func=cmd_find_speed)

    p = sub.add_parser("verify", help="run the invariant battery")
    _common(p, ("table", "json"))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="integrate the perturbed flows")
    simsub = p.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    for mode, fmts in (("reduced", ("csv", "svg")), ("full", ("csv", "svg")),
                       ("limit-cycle", ("json",)), ("manifold-residual", ("json",))):
        q = simsub.add_parser(mode)
        _common(q, fmts)
        q.add_argument("--h", type=float, default=0.3)
        q.add_argument("--t-end", type=float, default=T_END[mode])
        q.add_argument("--samples", type=int, default=1000)
        q.add_argument("--w-offset", type=float, default=0.0)
        q.add_argument("--trace-out", help="limit-cycle: CSV file for the cycle trace")
    p.set_defaults(func=cmd_simulate)
    return parser


# --------------------------------------------------------------- commands

def cmd_speed_curve(args) -> int:
    params = _params(args)
    tol = _tolerances(args)
    dn = params.d_n
    h_min = 1e-6 * dn if args.h_min is None else args.h_min
    h_max = dn if args.h_max is None else args.h_max
    if abs(h_max - dn) <= 1e-12 * dn:
        h_max = dn
    if args.num < 2 or not (0.0 < h_min < h_max <= dn):
        raise ConfigError(f"need num >= 2 and 0 < h_min < h_max <= d_n = {dn!r}")
    grid = default_grid(params, args.num, h_min, h_max)
    rows = speed_curve(params, grid, tol)
    if args.format == "csv":
        emit_text(_csv_text(SPEED_COLUMNS, ([getattr(r, k) for k in SPEED_COLUMNS] for r in rows)),
                  args.out)
    elif args.format == "json":
        emit_text(_json_text([{k: _json_num(getattr(r, k)) for k in SPEED_COLUMNS} for r in rows]),
                  args.out)
    else:
        from .plotting import speed_curve_figure
        speed_curve_figure(rows, params.n, _svg_path(args), args.width, args.height, fmt="svg")
    if args.plot:
        from .plotting import speed_curve_figure
        speed_curve_figure(rows, params.n, args.plot, args.width, args.height)
    return EXIT_OK


def cmd_phase_portrait(args) -> int:
    params = _params(args, eps=0.0)
    if args.num < 1 or args.samples < 2:
        raise ConfigError("need --num >= 1 and --samples >= 2")
    orbits = phase_portrait(params, args.num, args.samples, _tolerances(args))
    eqs = equilibria(params)
    if args.format == "csv":
        rows = []
        for orb in orbits:
            rows += [(orb["orbit_id"], t, u, v) for t, u, v in zip(orb["tau"], orb["u"], orb["v"])]
        emit_text(_csv_text(("orbit_id", "tau", "u", "v"), rows), args.out)
    elif args.format == "json":
        doc = {
            "n": params.n,
            "d_n": params.d_n,
            "equilibria": [{"u": e.u, "kind": e.kind} for e in eqs],
            "orbits": [{"orbit_id": o["orbit_id"], "h": o["h"], "separatrix": o["separatrix"],
                        "tau": o["tau"].tolist(), "u": o["u"].tolist(), "v": o["v"].tolist()}
                       for o in orbits],
        }
        emit_text(_json_text(doc), args.out)
    else:
        from .plotting import phase_portrait_figure
        phase_portrait_figure(orbits, eqs, params.n, _svg_path(args), args.width, args.height,
                              fmt="svg")
    if args.plot:
        from .plotting import phase_portrait_figure
        phase_portrait_figure(orbits, eqs, params.n, args.plot, args.width, args.height)
    return EXIT_OK


def cmd_find_speed(args) -> int:
    params = _params(args)
    dn = params.d_n
    if not (0.0 < args.h < dn):
        raise ConfigError(f"h={args.h} outside (0, d_n = {dn!r})")
    tol = _tolerances(args)
    c0 = limit_speed(ModelParams(params.n), args.h, tol)
    if params.eps == 0:
        c, route = c0, "abelian"
    else:
        try:
            c = solve_wave_speed(params, args.h, params.eps, _tolerances(args, SHOOTING_TOL))
        except errors.ParameterError as exc:
            raise ConfigError(str(exc)) from exc
        route = "shooting"
    emit_text(_json_text({"n": params.n, "h": args.h, "eps": params.eps, "c": c,
                          "route": route, "c0_reference": c0}), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verification import run_battery
    params = _params(args, eps=0.0)
    checks = run_battery(params.n, _tolerances(args))
    ok = all(c.passed for c in checks)
    if args.format == "json":
        emit_text(_json_text({"n": params.n, "passed": ok,
                              "checks": [{**c.as_dict(), "measured": _json_num(c.measured),
                                          "threshold": _json_num(c.threshold)}
                                         for c in checks]}), args.out)
    else:
        width = max(len(c.name) for c in checks)
        lines = [f"verification battery, n = {params.n}"]
        for c in checks:
            status = "PASS" if c.passed else "FAIL"
            thr = "" if math.isnan(c.threshold) else f" (limit {c.threshold:.1e})"
            note = f"  [{c.note}]" if c.note else ""
            lines.append(f"{status}  {c.name:<{width}}  {c.measured:.6e}{thr}{note}")
        lines.append("ALL PASS" if ok else "SOME CHECKS FAILED")
        emit_text("\n".join(lines) + "\n", args.out)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_simulate(args) -> int:
    params = _params(args)
    tol = _tolerances(args)
    mode = args.mode
    base = ModelParams(params.n)
    if mode in ("reduced", "full") and not (0.0 < args.h < base.d_n):
        raise ConfigError(f"h={args.h} outside (0, d_n = {base.d_n!r})")
    if args.samples < 2 or (mode != "limit-cycle" and args.t_end <= 0):
        raise ConfigError("need --samples >= 2 and --t-end > 0")

    if mode == "reduced":
        tr = simulate_reduced(params, args.h, args.t_end, args.samples, tol)
        H = [hamiltonian(params, y) for y in tr.y]
        cols = ("tau", "u", "v", "H")
        rows = [(t, y[0], y[1], e) for t, y, e in zip(tr.t, tr.y, H)]
        series = {"u": tr.y[:, 0], "v": tr.y[:, 1], "H": H}
    elif mode == "full":
        if params.eps <= 0:
            raise ConfigError("the third-order system needs --eps > 0")
        init = on_manifold(params, args.h, args.w_offset)
        try:
            tr = simulate_full(params, init, args.t_end, args.samples, tol)
        except errors.ParameterError as exc:
            raise ConfigError(str(exc)) from exc
        u, v, w = tr.y[:, 0], tr.y[:, 1], tr.y[:, 2]
        res = w - slow_manifold_w(params, (u, v))
        cols = ("tau", "u", "v", "w", "residual")
        rows = list(zip(tr.t, u, v, w, res))
        series = {"u": u, "v": v, "w": w, "residual": res}
    elif mode == "limit-cycle":
        if params.eps <= 0:
            raise ConfigError("limit-cycle needs --eps > 0")
        lc = find_limit_cycle(params, _tolerances(args, SHOOTING_TOL), samples=args.samples)
        cyc = lc.cycle
        doc = {"n": params.n, "c": params.c, "eps": params.eps, "h_star": lc.h_star,
               "predicted_h": lc.predicted_h, "u0_star": lc.u0_star,
               "tau_start": float(cyc.t[0]), "tau_end": float(cyc.t[-1])}
        emit_text(_json_text(doc), args.out)
        if args.trace_out:
            H = [hamiltonian(params, y) for y in cyc.y]
            emit_text(_csv_text(("tau", "u", "v", "H"),
                                [(t, y[0], y[1], e) for t, y, e in zip(cyc.t, cyc.y, H)]),
                      args.trace_out)
        if args.plot:
            from .plotting import orbit_figure
            orbit_figure(cyc.y[:, 0], cyc.y[:, 1], args.plot,
                         f"limit cycle, n = {params.n}, c = {params.c:g}, eps = {params.eps:g}",
                         args.width, args.height)
        return EXIT_OK
    else:
        if params.eps <= 0:
            raise ConfigError("manifold-residual needs --eps > 0")
        half = params.replace(eps=params.eps / 2.0)
        span = (0.0, args.t_end)
        r1 = manifold_residual(params, on_manifold(params, args.h, args.w_offset), span, tol=tol)
        r2 = manifold_residual(half, on_manifold(half, args.h, args.w_offset), span, tol=tol)
        emit_text(_json_text({"n": params.n, "c": params.c, "h": args.h,
                              "eps": params.eps, "residual": r1,
                              "eps_half": half.eps, "residual_half": r2, "ratio": r1 / r2}),
                  args.out)
        return EXIT_OK

    if args.format == "csv":
        emit_text(_csv_text(cols, rows), args.out)
    else:
        from .plotting import trace_figure
        trace_figure(tr.t, series, _svg_path(args), f"{mode} flow", args.width, args.height, "svg")
    if args.plot:
        from .plotting import trace_figure
        trace_figure(tr.t, series, args.plot, f"{mode} flow", args.width, args.height)
    return EXIT_OK


# ------------------------------------------------------------------ main

def _setup_logging() -> None:
    level = os.environ.get("MKDV_LOG", "warn").lower()
    levels = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
              "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"mkdvwave: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except errors.EnergyOutOfRange as exc:
        print(f"mkdvwave: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except errors.NumericalError as exc:
        print(f"mkdvwave: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
