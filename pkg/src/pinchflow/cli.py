"""Command line interface: ``pinchflow <subcommand> [--config FILE] [--out DIR] [--seed N]``.

Exit codes: 0 success, 1 a certification violation (or pinching lost before
``|H|_max`` grew tenfold), 2 configuration error, 3 numerical failure or I/O
error.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys

import numpy as np

from . import __version__
from .config import SUBCOMMANDS, RunConfig, load_config, parse_config
from .diagnostics import global_diagnostics
from .errors import ConfigError, DomainError, GeometryError, NumericalFailure
from .flow import StopReason, geodesic_sphere_ode, run
from .geometry import (fundamental_forms, gauss_curvature_extrinsic, gauss_curvature_intrinsic, simons_residual)
from .pinching import PinchingParams, epsilon_bound_check
from .reaction import Convention, ScanSampler, gradient_coefficient, scan
from .reporting import (TimeSeriesWriter, Units, ensure_dir, units_for, write_json, write_points_csv,
                        write_sites_csv)
from .tensors import (codazzi_identity_check, evol_lower_bound_check, min_trace_ratio, random_tensors)

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_FAILURE = 0, 1, 2, 3

DDVV_TOL = -1e-8
TRACE_RATIO_BOUND = 0.75
GROWTH_THRESHOLD = 10.0


def _header(units: Units | None, command: str) -> dict:
    out = {"tool": "pinchflow", "version": __version__, "command": command}
    if units is not None:
        out["units"] = units.header()
    return out


# --------------------------------------------------------------------------
# subcommands


def cmd_simulate(rc: RunConfig, out: str) -> int:
    surface = rc.surface()
    units = units_for(surface, rc.pinching["sigma"])
    cfg = rc.flow_config()
    L = units.length
    snap_every = int(rc.flow["snapshot_every"])
    snaps = []
    last_snap = [-1]

    with TimeSeriesWriter(os.path.join(out, "timeseries.csv"), units, cfg.lp) as writer:
        def callback(diag, s):
            writer.write(diag)
            if snap_every and diag.step // snap_every > last_snap[0]:
                last_snap[0] = diag.step // snap_every
                name = f"points_{diag.step:07d}.csv"
                write_points_csv(os.path.join(out, name), s, units)
                snaps.append({"step": diag.step, "t": diag.t / L ** 2, "file": name})

        traj = run(surface, cfg, callback)

    recs = traj.records
    h0 = recs[0].H_max if recs else math.nan
    lost_early = [e for e in traj.events if e["H_growth"] < GROWTH_THRESHOLD]
    ddvv_min = min((r.ddvv_min for r in recs), default=math.nan)
    pre = [r for r in recs if r.H_max <= GROWTH_THRESHOLD * h0]
    cert = {
        "Q_max_initial": recs[0].Q_max * L ** 2 if recs else None,
        "Q_max_before_threshold": max((r.Q_max for r in pre), default=math.nan) * L ** 2,
        "growth_threshold": GROWTH_THRESHOLD,
        "ddvv_min": ddvv_min * L ** 2,
        "ddvv_tolerance": DDVV_TOL,
        "pinching_lost_before_threshold": bool(lost_early),
        "ratio_max_final": recs[-1].ratio_max if recs else None,
        "H_ratio_final": recs[-1].H_min / recs[-1].H_max if recs else None,
    }
    violation = bool(lost_early) or not ddvv_min * L ** 2 >= DDVV_TOL
    ext = None
    if traj.extinction is not None:
        e = traj.extinction
        ext = {"time": e.time / L ** 2, "residual": e.residual, "points": e.points}
    events = [dict(e, t=e["t"] / L ** 2, H_max=e["H_max"] * L) for e in traj.events]
    if traj.final is not None:
        write_points_csv(os.path.join(out, "final_points.csv"), traj.final, units)
    summary = {
        "header": _header(units, "simulate"),
        "config": rc.to_dict(),
        "stop_reason": traj.stop_reason.value,
        "steps": traj.steps,
        "records": len(recs),
        "final_time": (recs[-1].t / L ** 2) if recs else None,
        "h_stop": traj.h_stop * L,
        "extinction": ext,
        "events": events,
        "certification": cert,
        "violation": violation,
        "failure": traj.failure,
        "snapshots": snaps,
    }
    write_json(os.path.join(out, "summary.json"), summary)
    if traj.stop_reason is StopReason.NUMERICAL_FAILURE:
        print(f"numerical failure: {traj.failure}", file=sys.stderr)
        return EXIT_FAILURE
    print(f"stop_reason={traj.stop_reason.value} steps={traj.steps} outputs in {out}")
    return EXIT_VIOLATION if violation else EXIT_OK


def cmd_check(rc: RunConfig, out: str) -> int:
    surface = rc.surface()
    units = units_for(surface, rc.pinching["sigma"])
    L = units.length
    params = rc.pinching_params()
    kbar = surface.model.curvature
    shape = fundamental_forms(surface)
    diag = global_diagnostics(surface, params, shape, lp_list=tuple(rc.flow["lp"]),
                              monitors=tuple(rc.pinching["monitors"]))
    rows = surface.interior_rows()
    k_int = gauss_curvature_intrinsic(surface, shape=shape)
    k_ext = gauss_curvature_extrinsic(shape, kbar)
    simons = simons_residual(surface, shape=shape)
    eps = epsilon_bound_check(shape, params, kbar)
    kperp_excess = float(np.max(2 * np.abs(shape.kperp) - shape.Ao2))
    write_points_csv(os.path.join(out, "points.csv"), surface, units)
    write_sites_csv(os.path.join(out, "sites.csv"), surface, params, units, shape)
    d = diag.to_dict()
    scaled = {key: d[key] * units.column_factors().get(key, 1.0) for key in units.column_factors()}
    ddvv_ok = diag.ddvv_min * L ** 2 >= DDVV_TOL
    kperp_ok = kperp_excess * L ** 2 <= 1e-12
    summary = {
        "header": _header(units, "check"),
        "config": rc.to_dict(),
        "diagnostics": scaled,
        "pinched": diag.Q_max < 0,
        "monitors": {k: {"Q_max": v["Q_max"] * L ** 2} for k, v in d["monitors"].items()},
        "gauss_residual_max": float(np.max(np.abs(k_int - k_ext)[rows])) * L ** 2,
        "simons_residual_max": float(np.max(np.abs(simons[rows]))) * L ** 4,
        "epsilon_bound_min": float(np.nanmin(eps[rows])) * L ** 2 if np.any(np.isfinite(eps[rows])) else None,
        "kperp_excess_max": kperp_excess * L ** 2,
        "certification": {"ddvv_ok": ddvv_ok, "kperp_ok": kperp_ok},
        "violation": not (ddvv_ok and kperp_ok),
    }
    write_json(os.path.join(out, "summary.json"), summary)
    print(f"Q_max={diag.Q_max * L ** 2:.6g} ddvv_min={diag.ddvv_min * L ** 2:.3g} outputs in {out}")
    return EXIT_OK if ddvv_ok and kperp_ok else EXIT_VIOLATION


def cmd_scan(rc: RunConfig, out: str) -> int:
    sc = rc.scan
    sampler = ScanSampler(count=sc["samples"], seed=rc.seed, scales=tuple(sc["scales"]), tolerance=sc["tolerance"])
    reports = []
    for k in sc["ks"]:
        for kbar in sc["kbars"]:
            rep = scan(PinchingParams(k, kbar), kbar, sampler, Convention(sc["convention"]))
            reports.append(rep.to_dict())
            status = "ok" if rep.ok else f"{rep.violation_count} violations"
            print(f"k={k:.6g} kbar={kbar:g}: max_reaction={rep.max_reaction:.3e} ({status})")
    bad = any(r["violation_count"] for r in reports)
    summary = {
        "header": _header(None, "scan-reaction"),
        "config": rc.to_dict(),
        "reports": reports,
        "max_reaction": max(r["max_reaction"] for r in reports),
        "violations": [v for r in reports for v in r["violations"]],
        "violation": bad,
    }
    write_json(os.path.join(out, "scan.json"), summary)
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_tensors(rc: RunConfig, out: str) -> int:
    te = rc.tensor
    search = min_trace_ratio(samples=te["trace_samples"], refine=te["refine"], seed=rc.seed)
    best_val, best_comps, codazzi = math.inf, None, 0.0
    for chunk in random_tensors(te["samples"], seed=rc.seed + 1):
        vals = evol_lower_bound_check(chunk)
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val, best_comps = float(vals[i]), chunk.comps[i]
        codazzi = max(codazzi, float(np.max(np.abs(codazzi_identity_check(chunk)))))
    ks = np.linspace(0.5, 29 / 40, 10_001)[1:]
    coef = np.array([gradient_coefficient(float(k)) for k in ks])
    ok_ratio = search.minimum >= TRACE_RATIO_BOUND - 1e-9
    ok_evol = best_val >= -1e-12
    ok_grad = bool(np.all(coef <= 1e-15))
    summary = {
        "header": _header(None, "tensor-tests"),
        "config": rc.to_dict(),
        "trace_ratio": {"minimum": search.minimum, "bound": TRACE_RATIO_BOUND, "argmin": search.argmin.comps,
                        "samples": search.samples, "refinements": search.refinements},
        "evolution_bound": {"minimum": best_val, "argmin": best_comps, "samples": te["samples"]},
        "codazzi_residual_max": codazzi,
        "gradient_coefficient": {"max": float(np.max(coef)), "argmax_k": float(ks[int(np.argmax(coef))]),
                                 "points": len(ks)},
        "violation": not (ok_ratio and ok_evol and ok_grad),
    }
    write_json(os.path.join(out, "tensors.json"), summary)
    print(f"min ratio={search.minimum:.6f} min |T|^2-2E={best_val:.4g} max grad coef={np.max(coef):.3g}")
    return EXIT_OK if ok_ratio and ok_evol and ok_grad else EXIT_VIOLATION


def cmd_ode(rc: RunConfig, out: str) -> int:
    model = rc.model
    od = rc.ode
    oracle, t, rho = geodesic_sphere_ode(model, od["rho0"], od["horizon"] or None, od["n"])
    L = model.radius if model.kind.value != "euclidean" else 1.0
    H = oracle.mean_curvature(t)
    tq = oracle.trace_quantity(rho)
    with open(os.path.join(out, "ode.csv"), "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "rho", "H", "trace"])
        for row in zip(t / L ** 2, rho / L, H * L, tq / (L ** 2 if model.kind.value == "euclidean" else 1.0)):
            w.writerow([repr(float(x)) for x in row])
    basis = "ambient radius R" if model.kind.value != "euclidean" else "unit length"
    summary = {
        "header": dict(_header(None, "ode-oracle"), units={"reference_length": L, "basis": basis}),
        "config": rc.to_dict(),
        "extinction": oracle.extinction / L ** 2,
        "rho0": od["rho0"] / L,
        "samples": len(t),
    }
    write_json(os.path.join(out, "ode.json"), summary)
    print(f"extinction={oracle.extinction / L ** 2:.10g}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "check": cmd_check,
    "scan-reaction": cmd_scan,
    "tensor-tests": cmd_tensors,
    "ode-oracle": cmd_ode,
}


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pinchflow", description="Mean curvature flow of surfaces in 4D space forms.")
    parser.add_argument("--version", action="version", version=f"pinchflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML configuration file")
        p.add_argument("--out", help="output directory (overrides the configuration)")
        p.add_argument("--seed", type=int, help="random seed (overrides the configuration)")
        if name == "scan-reaction":
            p.add_argument("--k", type=float, nargs="+", help="pinching constants")
            p.add_argument("--kbar", type=float, nargs="+", help="ambient curvatures")
            p.add_argument("--samples", type=int)
            p.add_argument("--scales", type=float, nargs="+")
            p.add_argument("--convention", choices=[c.value for c in Convention])
            p.add_argument("--tolerance", type=float)
        elif name == "tensor-tests":
            p.add_argument("--samples", type=int)
            p.add_argument("--refine", type=int)
    return parser


def _overrides(args) -> dict:
    ov: dict = {}
    if args.seed is not None:
        ov["seed"] = args.seed
    if args.out is not None:
        ov["output"] = args.out
    if args.command == "scan-reaction":
        scan_ov = {"ks": args.k, "kbars": args.kbar, "samples": args.samples, "scales": args.scales,
                   "convention": args.convention, "tolerance": args.tolerance}
        scan_ov = {k: v for k, v in scan_ov.items() if v is not None}
        if scan_ov:
            ov["scan"] = scan_ov
    elif args.command == "tensor-tests":
        te = {"samples": args.samples, "refine": args.refine}
        te = {k: v for k, v in te.items() if v is not None}
        if te:
            ov["tensor"] = te
    return ov


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        ov = _overrides(args)
        if args.config:
            rc = load_config(args.config, args.command, ov)
        else:
            rc = parse_config("", args.command, ov)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out = ensure_dir(rc.output)
        return COMMANDS[rc.subcommand](rc, out)
    except (ConfigError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, GeometryError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
