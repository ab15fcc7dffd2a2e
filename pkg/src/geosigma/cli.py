"""Command-line entry point: ``geosigma <command> [--config FILE] [options]``.

Exit codes: 0 success, 2 invalid input or configuration, 3 numerical
non-convergence (a ``diagnostics.json`` is written to the output directory).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import traceback

import numpy as np

from . import __version__
from .analyzer import (convexity_report, farey_directions, polygon_is_convex, run_sweep,
                       wulff_shape_2d, write_polygon_csv)
from .config import ConfigError, RunConfig, validate
from .eikonal import ConvergenceError, GridError, make_strip_grid, solve_signed_distance
from .medium import ExprError, MediumError, direction_frame, make_field
from .oracle import assemble, minimize_cell_energy
from .sigma import metric_slope_c, sigma_estimate

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 2, 3
COMMANDS = ("sigma", "sweep", "convexity", "metric-slope", "oracle", "wulff", "selftest")


def _parse_p(text: str):
    try:
        vals = [int(v) for v in text.replace(" ", "").split(",")]
    except ValueError:
        raise ConfigError("--p", f"expected comma-separated integers, got {text!r}")
    if len(vals) not in (2, 3) or not any(vals):
        raise ConfigError("--p", "expected a nonzero vector with 2 or 3 integer entries")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="geosigma",
                                 description="Homogenised surface tension of periodic phase-field media.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("target", nargs="?", help="selftest target (e.g. 'profile')")
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--expr", help="coefficient a(x) (overrides medium.expr)")
    ap.add_argument("--p", help="integer direction, e.g. '1,2' (overrides direction.p)")
    ap.add_argument("--T", type=float, help="oracle cell size")
    ap.add_argument("--delta", type=float, help="grid spacing")
    ap.add_argument("--bc", choices=["step", "profile"], help="oracle boundary condition")
    ap.add_argument("--workers", type=int, help="parallel direction jobs")
    ap.add_argument("--output", help="output directory (overrides output.directory)")
    ap.add_argument("--dump-distance", metavar="CSV", help="write the distance field of the first direction")
    return ap


def _config_from_args(args) -> RunConfig:
    data = {}
    if args.config:
        with open(args.config) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError("<file>", f"invalid JSON at line {exc.lineno} column {exc.colno}")
        if not isinstance(data, dict):
            return validate(data)
    if args.expr:
        data.setdefault("medium", {})["expr"] = args.expr
    if args.p:
        data.setdefault("direction", {})["p"] = _parse_p(args.p)
    num = {}
    if args.workers:
        num["workers"] = args.workers
    if args.command == "oracle":
        orc = {k: v for k, v in (("T", args.T), ("delta", args.delta), ("bc", args.bc)) if v}
        if orc:
            num["oracle"] = orc
    elif args.delta:
        num["delta"] = args.delta
    if num:
        merged = data.setdefault("numerics", {})
        if "oracle" in num:
            merged.setdefault("oracle", {}).update(num.pop("oracle"))
        merged.update(num)
    if args.output:
        data.setdefault("output", {})["directory"] = args.output
    return validate(data)


def _field(cfg: RunConfig):
    m = cfg.medium
    return make_field(m["expr"], dim=m["dim"], period=m.get("period"),
                      samples_per_axis=m["samples_per_axis"])


def _outdir(cfg: RunConfig) -> str:
    d = cfg.output["directory"]
    os.makedirs(d, exist_ok=True)
    return d


def _sweep_dirs(cfg: RunConfig):
    dirs = cfg.directions()
    if "farey_max_denominator" in cfg.direction:
        dirs = dirs + farey_directions(cfg.direction["farey_max_denominator"])
    if not dirs:
        dirs = farey_directions(5)
    return dirs


def _write_rows(path, header, rows):
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    wr.writerows(rows)
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())
    return buf.getvalue()


SIGMA_HEADER = ["nu_x", "nu_y", "sigma", "error_budget", "tail_bound", "delta", "H"]


def _sigma_row(e):
    return [repr(e.nu[0]), repr(e.nu[1]), repr(e.sigma_value), repr(e.error_budget),
            repr(e.tail_bound), repr(e.delta), repr(e.H)]


def cmd_sigma(cfg, args):
    fld = _field(cfg)
    dirs = cfg.directions() or [(1, 0)]
    n = cfg.numerics
    ests = [sigma_estimate(fld, p, delta=n["delta"], eps_tail=n["eps_tail"],
                           T_multipliers=n["T_multipliers"], profile=n["profile"],
                           lateral_window=n.get("lateral_window")) for p in dirs]
    out = _outdir(cfg)
    text = _write_rows(os.path.join(out, "sigma.csv"), SIGMA_HEADER, [_sigma_row(e) for e in ests])
    if "json" in cfg.output["formats"]:
        with open(os.path.join(out, "sigma.json"), "w") as fh:
            json.dump([{"nu": e.nu, "sigma": e.sigma_value, "error_budget": e.error_budget,
                        "tail_bound": e.tail_bound, "T_schedule": e.T_schedule, "per_T": e.per_T,
                        "raw": {repr(k): v for k, v in e.raw.items()}, "warnings": e.warnings}
                       for e in ests], fh, indent=1, sort_keys=True)
    for e in ests:
        for w in e.warnings:
            print(f"warning: nu={e.nu}: {w}", file=sys.stderr)
    sys.stdout.write(text)
    return EXIT_OK


def _do_sweep(cfg):
    n = cfg.numerics
    return run_sweep(_field(cfg), _sweep_dirs(cfg), delta=n["delta"], eps_tail=n["eps_tail"],
                     T_multipliers=n["T_multipliers"], workers=n["workers"], profile=n["profile"])


def cmd_sweep(cfg, args):
    sw = _do_sweep(cfg)
    out = _outdir(cfg)
    sw.to_csv(os.path.join(out, "sweep.csv"))
    if "json" in cfg.output["formats"]:
        sw.to_json(os.path.join(out, "sweep.json"))
    for w in sw.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"{len(sw.estimates)} directions: sigma in [{sw.sigma.min():.6f}, {sw.sigma.max():.6f}]")
    return EXIT_OK


def cmd_convexity(cfg, args):
    sw = _do_sweep(cfg)
    rep = convexity_report(sw)
    out = _outdir(cfg)
    rep.to_csv(os.path.join(out, "convexity.csv"))
    with open(os.path.join(out, "convexity.json"), "w") as fh:
        json.dump(rep.summary(), fh, indent=1, sort_keys=True)
    s = rep.summary()
    print(f"min_gap = {s['min_gap']:.6e} at {s['min_gap_theta_deg']:.2f} deg "
          f"(noise floor {s['noise_floor']:.3e}): {s['verdict']}")
    print(f"b_probe: {s['b_verdict']}")
    return EXIT_OK


def cmd_wulff(cfg, args):
    sw = _do_sweep(cfg)
    verts = wulff_shape_2d(sw, cfg.numerics["n_halfplanes"])
    out = _outdir(cfg)
    write_polygon_csv(verts, os.path.join(out, "wulff.csv"))
    r = np.hypot(verts[:, 0], verts[:, 1])
    print(f"{len(verts)} vertices, radius in [{r.min():.6f}, {r.max():.6f}], "
          f"convex={polygon_is_convex(verts)}")
    return EXIT_OK


def cmd_metric_slope(cfg, args):
    fld = _field(cfg)
    dirs = cfg.directions() or [(1, 0)]
    rows = []
    for p in dirs:
        ms = metric_slope_c(fld, p, cfg.numerics["m_list"], cfg.numerics["delta"])
        for m, c in zip(ms.m_list, ms.c):
            rows.append([",".join(str(v) for v in p), str(m), repr(c)])
        if ms.flagged:
            print(f"warning: p={p}: c_m spread {ms.spread:.3%} exceeds 5%", file=sys.stderr)
    text = _write_rows(os.path.join(_outdir(cfg), "metric_slope.csv"), ["p", "m", "c_m"], rows)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_oracle(cfg, args):
    fld = _field(cfg)
    dirs = cfg.directions() or [(1, 0)]
    o = cfg.numerics["oracle"]
    bc = {"step": "mollified_step", "profile": "profile_trace"}[o["bc"]]
    rows = []
    for p in dirs:
        prob = assemble(fld, p, T=o["T"], delta=o["delta"], bc_kind=bc)
        res = minimize_cell_energy(prob, max_iter=o["max_iter"], grad_tol=o.get("grad_tol"))
        if not res.converged:
            raise ConvergenceError(f"oracle did not reach grad_tol for p={p}",
                                   residual=res.grad_norm, iterations=res.iterations)
        rows.append([",".join(str(v) for v in p), o["bc"], repr(o["T"]), repr(o["delta"]),
                     repr(res.energy_per_area), str(res.iterations), repr(res.grad_norm), res.start])
    text = _write_rows(os.path.join(_outdir(cfg), "oracle.csv"),
                       ["p", "bc", "T", "delta", "energy_per_area", "iterations", "grad_norm", "start"],
                       rows)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_selftest(args):
    from . import selftest
    if args.target == "profile":
        return selftest.profile_tables()
    if args.target not in (None, "all"):
        raise ConfigError("selftest", f"unknown selftest target {args.target!r}")
    return selftest.run_battery()


def _dump_distance(cfg, path):
    fld = _field(cfg)
    p = (cfg.directions() or [(1, 0)])[0]
    frame = direction_frame(p, fld.lateral_scale)
    grid = make_strip_grid(frame, cfg.numerics["delta"], 4.0,
                           None if frame.is_rational else 8.0 * fld.lateral_scale, fld.lateral_scale)
    solve_signed_distance(fld, grid).to_csv(path)


HANDLERS = {"sigma": cmd_sigma, "sweep": cmd_sweep, "convexity": cmd_convexity,
            "metric-slope": cmd_metric_slope, "oracle": cmd_oracle, "wulff": cmd_wulff}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = None
    try:
        if args.command == "selftest":
            return cmd_selftest(args)
        cfg = _config_from_args(args)
        if args.dump_distance:
            _dump_distance(cfg, args.dump_distance)
        return HANDLERS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ExprError as exc:
        print(f"error: medium.expr: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (MediumError, GridError, ValueError) as exc:
        print(f"error: {type(exc).__module__.split('.')[-1]}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConvergenceError as exc:
        out = cfg.output["directory"] if cfg else "."
        os.makedirs(out, exist_ok=True)
        diag = {"command": args.command, "error": str(exc), "residual": exc.residual,
                "iterations": exc.iterations, "traceback": traceback.format_exc()}
        path = os.path.join(out, "diagnostics.json")
        with open(path, "w") as fh:
            json.dump(diag, fh, indent=1, default=float)
        print(f"error: numerical non-convergence: {exc} (details in {path})", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
