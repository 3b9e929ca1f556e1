"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they are
produced; a summary table is also printed at the end of every pytest session
that includes this module.
"""

import math
import os
import time

import numpy as np
import pytest

from conftest import band_rms, observed_orders
from pinchflow.cli import main as cli_main
from pinchflow.flow import FlowConfig, StopReason, adaptive_dt, geodesic_sphere_ode, run, step
from pinchflow.geometry import fundamental_forms, gauss_curvature_extrinsic, gauss_curvature_intrinsic, simons_residual
from pinchflow.pinching import PinchingParams, pinching_q
from pinchflow.presets import PRESETS, preset_surface
from pinchflow.reaction import Convention, ScanSampler, gradient_coefficient, reaction_terms, scan
from pinchflow.spaceform import euclidean, hyperbolic, sphere
from pinchflow.tensors import evol_lower_bound_check, min_trace_ratio, random_tensors

DIMS = (32, 64)  # 64 x 32: 64 longitudes, 32 latitudes
PRESERVATION_KS = (0.6, 0.7, 29 / 40)
# At 64 x 32 the H4 run reaches a discretisation floor of |Ao|^2/|H|^2 in the
# last 0.2% of its lifetime and f_max creeps up 10%; the floor falls with the
# grid (no rise at 96 x 48 or 128 x 64), so the preservation runs use 96 x 48.
PRESERVATION_DIMS = (48, 96)

RESULTS = {}


def report(number, ok, detail):
    RESULTS[number] = (bool(ok), detail)
    print(f"\ncriterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


# --------------------------------------------------------------------------
# shared flow runs


@pytest.fixture(scope="module")
def oracle_runs():
    runs = {}
    for key, name, model in (("r4", "round-sphere-r4", euclidean()),
                             ("s4", "geodesic-sphere-s4", sphere(1.0)),
                             ("h4", "geodesic-sphere-h4", hyperbolic(-1.0))):
        t0 = time.perf_counter()
        traj = run(preset_surface(name, dims=DIMS, model=model))
        runs[key] = (traj, time.perf_counter() - t0)
    return runs


@pytest.fixture(scope="module")
def perturbed_runs():
    runs = {}
    for key, model, r in (("r4", euclidean(), 1.0), ("s4", sphere(1.0), 1.0), ("h4", hyperbolic(-1.0), 0.5)):
        s = preset_surface("perturbed-sphere", {"r": r, "eps": 0.05}, dims=PRESERVATION_DIMS, model=model)
        cfg = FlowConfig(params=PinchingParams(0.7, model.curvature), monitors=(0.6, 29 / 40))
        runs[key] = (s, run(s, cfg))
    return runs


def series_for(traj, k, name):
    if k == 0.7:
        return np.array([getattr(r, name) for r in traj.records])
    return np.array([r.monitors[k][name] for r in traj.records])


# --------------------------------------------------------------------------


def test_criterion_01_round_sphere():
    t0 = time.perf_counter()
    s = preset_surface("round-sphere-r4", dims=DIMS)
    sh = fundamental_forms(s)
    rows = s.interior_rows()
    h_err = float(np.max(np.abs(sh.H_norm[rows] - 2)))
    ao_max = float(np.max(sh.Ao2[rows]))
    elapsed = time.perf_counter() - t0
    errs = []
    for n in (16, 32, 64):
        shn = fundamental_forms(preset_surface("round-sphere-r4", dims=(n, 2 * n)))
        errs.append(float(np.max(np.abs(shn.H_norm - 2))))
    orders = observed_orders(errs)
    ok = h_err <= 0.02 and ao_max <= 1e-3 and np.all(orders >= 1.8) and elapsed < 5
    report(1, ok, f"||H|-2|={h_err:.2e} |Ao|^2 max={ao_max:.1e} orders={np.round(orders, 3).tolist()} "
                  f"time={elapsed:.2f}s")


def test_criterion_02_tori():
    s = preset_surface("clifford-torus-s4", dims=(64, 64))
    sh = fundamental_forms(s)
    a2_err = float(np.max(np.abs(sh.A2 - 2)))
    h_max = float(np.max(sh.H_norm))
    q = float(np.max(pinching_q(sh, PinchingParams(0.7, 1.0), 1.0)))
    errs, h2_err = [], math.nan
    for n in (16, 32, 64):
        shn = fundamental_forms(preset_surface("torus-h4", dims=(n, n)))
        errs.append(float(np.max(np.abs(shn.A2 - shn.H_norm ** 2 + 2))))
        h2_err = float(np.max(np.abs(shn.H_norm ** 2 - 8)))
    orders = observed_orders(errs)
    ok = (a2_err <= 0.02 and h_max <= 0.02 and abs(q - 1.2) <= 0.05 and h2_err <= 0.2
          and np.all(np.diff(errs) < 0) and np.all(orders > 1))
    report(2, ok, f"Clifford |A|^2 err={a2_err:.1e} |H|max={h_max:.1e} Q={q:.4f}; "
                  f"H4 torus ||H|^2-8|={h2_err:.2e} relation residuals={['%.1e' % e for e in errs]}")


def test_criterion_03_identity_residuals():
    gauss, simons = [], []
    for n in (16, 32, 64, 128):
        s = preset_surface("ellipsoid-r4", dims=(n, 2 * n))
        sh = fundamental_forms(s)
        k_int = gauss_curvature_intrinsic(s, shape=sh)
        gauss.append(band_rms(s, sh, k_int - gauss_curvature_extrinsic(sh)))
        simons.append(band_rms(s, sh, simons_residual(s, shape=sh)))
    og, os_ = observed_orders(gauss), observed_orders(simons)
    ok = np.all(og >= 1.5) and np.all(os_ >= 1.5)
    report(3, ok, f"Gauss orders={np.round(og, 2).tolist()} Simons orders={np.round(os_, 2).tolist()}")


def test_criterion_04_ddvv(oracle_runs, perturbed_runs):
    worst = {}
    for name in sorted(PRESETS):
        worst[name] = float(np.min(fundamental_forms(preset_surface(name)).ddvv))
    for key, (traj, _) in oracle_runs.items():
        worst[f"flow-{key}"] = min(r.ddvv_min for r in traj.records)
    for key, (_, traj) in perturbed_runs.items():
        worst[f"flow-perturbed-{key}"] = min(r.ddvv_min for r in traj.records)
    name = min(worst, key=worst.get)
    report(4, worst[name] >= -1e-8, f"min residual {worst[name]:.2e} ({name}) over {len(worst)} surfaces/runs")


def test_criterion_05_reaction_certificate():
    t0 = time.perf_counter()
    sampler = ScanSampler(count=1_000_000, seed=0)
    failures, lines, disc_flat, disc_curved = [], [], 0.0, 0.0
    for k in (0.51, 0.6, 2 / 3, 0.7, 29 / 40):
        for kbar in (0.0, 1.0, -1.0):
            rep = scan(PinchingParams(k, kbar), kbar, sampler)
            if kbar == 0:
                disc_flat = max(disc_flat, rep.max_discrepancy)
            else:
                disc_curved = max(disc_curved, rep.max_discrepancy)
            if rep.max_reaction > 1e-10:
                failures.append(f"k={k:.4g} kbar={kbar:g}: max={rep.max_reaction:.4g} at {rep.argmax}")
            lines.append(rep.max_reaction)
    elapsed = time.perf_counter() - t0
    ok = not failures and disc_flat <= 1e-10 and elapsed < 60
    detail = (f"max reaction={max(lines):.3e}, discrepancy flat={disc_flat:.1e} curved={disc_curved:.1e}, "
              f"time={elapsed:.1f}s")
    if failures:
        detail += "; violations: " + "; ".join(failures)
    report(5, ok, detail)


def test_criterion_06_convention_oracle():
    worst_std, best_prn = 0.0, math.inf
    for t in np.linspace(0.0, 0.24, 25):
        r2 = 1.0 - 4 * t
        A2 = 2 / r2
        exact = 2 * A2 ** 2
        std = reaction_terms(0.0, 0.0, 0.0, 2 * A2, Convention.STANDARD)
        prn = reaction_terms(0.0, 0.0, 0.0, 2 * A2, Convention.PRINTED)
        worst_std = max(worst_std, abs(2 * std.R1 - exact) / exact)
        best_prn = min(best_prn, abs(2 * prn.R1 - exact) / exact)
    ok = worst_std <= 1e-12 and best_prn > 1e-3
    report(6, ok, f"StandardAB rel err={worst_std:.1e}; PaperPrinted min rel err={best_prn:.3f}")


def test_criterion_07_tensor_inequalities():
    res = min_trace_ratio(samples=100_000, refine=100, seed=0)
    worst = math.inf
    for chunk in random_tensors(1_000_000, seed=1):
        worst = min(worst, float(np.min(evol_lower_bound_check(chunk))))
    ks = np.linspace(0.5, 29 / 40, 10_001)[1:]
    coef = max(gradient_coefficient(float(k)) for k in ks)
    ok = abs(res.minimum - 0.75) <= 1e-3 and worst >= -1e-12 and coef <= 0
    report(7, ok, f"min ratio={res.minimum:.6f} min(|T|^2-2E)={worst:.3e} max gradient coefficient={coef:.2e}")


def test_criterion_08_flow_oracles(oracle_runs):
    r4, t_r4 = oracle_runs["r4"]
    s4, t_s4 = oracle_runs["s4"]
    h4, t_h4 = oracle_runs["h4"]
    e_r4 = r4.extinction.time if r4.extinction else math.nan
    e_h4 = h4.extinction.time if h4.extinction else math.nan
    ode_h4 = geodesic_sphere_ode(hyperbolic(-1.0), 0.5)[0].extinction
    t = s4.times
    rho = s4.series("center_distance")
    keep = rho >= 0.1
    predicted = math.cos(0.7) * np.exp(2 * t[keep])
    trace_err = float(np.max(np.abs(np.cos(rho[keep]) - predicted) / predicted))
    ok = (abs(e_r4 - 0.25) <= 0.02 * 0.25 and abs(e_h4 - ode_h4) <= 0.02 * ode_h4 and trace_err <= 0.02
          and rho.min() < 0.1 and max(t_r4, t_s4, t_h4) < 120
          and all(tr.stop_reason is StopReason.ROUND_POINT for tr in (r4, s4, h4)))
    report(8, ok, f"R4 extinction={e_r4:.5f}; S4 trace err={trace_err:.2e} down to rho={rho[keep].min():.3f}; "
                  f"H4 extinction={e_h4:.5f} (oracle {ode_h4:.5f}); times={t_r4:.1f}/{t_s4:.1f}/{t_h4:.1f}s")


def test_criterion_09_pinching_preservation(perturbed_runs):
    problems, notes = [], []
    for key, (s, traj) in perturbed_runs.items():
        kbar = s.model.curvature
        sh = fundamental_forms(s)
        recs = traj.records
        t = traj.times
        h0 = recs[0].H_max
        before = np.array([r.H_max <= 10 * h0 for r in recs])
        window = t >= 0.05 * t[-1]
        growth_all = []
        for k in PRESERVATION_KS:
            q0 = float(np.max(pinching_q(sh, PinchingParams(k, kbar), kbar)[s.interior_rows()]))
            if not q0 < 0:
                problems.append(f"{key} k={k:.4g}: Q not negative at t=0 ({q0:.3g})")
                continue
            q = series_for(traj, k, "Q_max")[before]
            if not np.all(q < 0):
                problems.append(f"{key} k={k:.4g}: Q_max={q.max():.3g} before tenfold growth")
            f = series_for(traj, k, "f_max")[window]
            growth = float(np.max(f[1:] / np.minimum.accumulate(f)[:-1]))
            growth_all.append(growth)
            if growth > 1.01:
                j = int(np.argmax(f[1:] / np.minimum.accumulate(f)[:-1])) + 1
                problems.append(f"{key} k={k:.4g}: f_max rose by {100 * (growth - 1):.1f}% "
                                f"(t/T={t[window][j] / t[-1]:.4f})")
        ratio = recs[-1].ratio_max
        if traj.stop_reason is not StopReason.ROUND_POINT or not ratio < 0.01:
            problems.append(f"{key}: stop={traj.stop_reason.value} ratio={ratio:.3g}")
        notes.append(f"{key}: ratio={ratio:.1e} f growth={max(growth_all, default=math.nan):.4f}")
    report(9, not problems, "; ".join(notes + problems))


def test_criterion_10_stationary():
    drifts = {}
    for name in ("totally-geodesic-s2", "clifford-torus-s4"):
        s0 = preset_surface(name)
        s = s0
        cfg = FlowConfig()
        for _ in range(100):
            s = step(s, adaptive_dt(s, cfg), cfg)
        drifts[name] = float(np.max(np.linalg.norm(s.points - s0.points, axis=-1))) / s.t
    ok = all(d <= 1e-4 for d in drifts.values())
    report(10, ok, " ".join(f"{k}: {v:.1e}/unit time" for k, v in drifts.items()))


def test_criterion_11_reproducibility(tmp_path):
    out = tmp_path / "run"
    cfg = tmp_path / "sim.toml"
    cfg.write_text(f'seed = 3\noutput = "{out}"\n[preset]\nname = "perturbed-sphere"\n'
                   '[ambient]\nkind = "sphere"\n[grid]\nn_u = 16\nn_v = 32\n[flow]\nmax_steps = 400\n'
                   'snapshot_every = 200\n[pinching]\nmonitors = [0.6]\n')
    scan_out = tmp_path / "scan"

    def snapshot():
        files = {}
        for root in (out, scan_out):
            for name in sorted(os.listdir(root)):
                files[f"{root.name}/{name}"] = (root / name).read_bytes()
        return files

    runs = []
    for _ in range(2):
        codes = (cli_main(["simulate", "--config", str(cfg)]),
                 cli_main(["scan-reaction", "--k", "0.7", "--samples", "50000", "--seed", "3", "--out",
                           str(scan_out)]))
        runs.append((codes, snapshot()))
    same = runs[0][1] == runs[1][1]
    ok = same and runs[0][0] == runs[1][0] == (0, 0)
    report(11, ok, f"{len(runs[0][1])} files, identical={same}, exit codes={runs[0][0]}")
