import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import band_mask, band_rms, observed_orders
from oracles import ellipsoid_gauss_curvature, ellipsoid_mean_curvature
from pinchflow.diagnostics import global_diagnostics
from pinchflow.errors import GeometryError
from pinchflow.geometry import (adapted_decomposition, ddvv_residual, fundamental_forms,
                                gauss_curvature_extrinsic, gauss_curvature_extrinsic_arrays,
                                gauss_curvature_intrinsic, gradients, simons_residual)
from pinchflow.grid import SurfaceGrid, Topology
from pinchflow.pinching import PinchingParams
from pinchflow.presets import PRESETS, preset_surface
from pinchflow.spaceform import euclidean, sphere


@pytest.fixture(scope="module")
def sphere64():
    s = preset_surface("round-sphere-r4", dims=(32, 64))
    return s, fundamental_forms(s)


@pytest.fixture(scope="module")
def clifford64():
    s = preset_surface("clifford-torus-s4", dims=(64, 64))
    return s, fundamental_forms(s)


def test_round_sphere_values(sphere64):
    s, sh = sphere64
    rows = s.interior_rows()
    assert np.all(np.abs(sh.H_norm[rows] - 2) <= 0.02)
    assert np.max(sh.Ao2[rows]) <= 1e-3
    assert np.max(np.abs(sh.kperp)) <= 1e-6
    assert np.all(sh.det_g > 0)


def test_decomposition_identities(sphere64, clifford64):
    for s, sh in (sphere64, clifford64):
        np.testing.assert_allclose(sh.A2, sh.Ao2 + 0.5 * sh.H_norm ** 2, atol=1e-12)
        ok = sh.adapted
        np.testing.assert_allclose(sh.Ao2[ok], 2 * (sh.a ** 2 + sh.b ** 2 + sh.c ** 2)[ok], rtol=1e-10, atol=1e-12)
        assert np.all(2 * np.abs(sh.kperp) <= sh.Ao2 + 1e-12)


def test_clifford_torus(clifford64):
    s, sh = clifford64
    assert np.all(np.abs(sh.A2 - 2) <= 0.02)
    assert np.max(sh.H_norm) <= 0.02
    assert not np.any(sh.adapted)


def test_clifford_torus_relation_converges():
    errs = []
    for n in (16, 32, 64):
        sh = fundamental_forms(preset_surface("clifford-torus-s4", dims=(n, n)))
        errs.append(np.max(np.abs(sh.A2 - sh.H_norm ** 2 - 2)))
    assert errs[-1] < 0.01
    assert np.all(observed_orders(errs) > 1.8)


def test_h4_torus():
    errs = []
    for n in (16, 32, 64):
        sh = fundamental_forms(preset_surface("torus-h4", dims=(n, n)))
        errs.append(np.max(np.abs(sh.A2 - sh.H_norm ** 2 + 2)))
        if n == 64:
            assert np.all(np.abs(sh.H_norm ** 2 - 8) <= 0.2)
    assert np.all(observed_orders(errs) > 1.8)


@pytest.mark.parametrize("h3,h4,H,expected", [
    ([[1.5, 0], [0, 0.5]], [[0.3, 0.2], [0.2, -0.3]], [2.0, 0.0], (0.5, 0.3, 0.2, 0.2)),
    ([[1, 0], [0, 1]], [[0, 0], [0, 0]], [2.0, 0.0], (0.0, 0.0, 0.0, 0.0)),
])
def test_adapted_examples(h3, h4, H, expected):
    d = adapted_decomposition(np.array([h3, h4], dtype=float), np.array(H))
    assert d.adapted
    np.testing.assert_allclose([d.a, d.b, d.c, d.kperp], expected, atol=1e-14)


def test_adapted_minimal_branch():
    d = adapted_decomposition(np.array([[[1, 0], [0, -1]], [[0, 1], [1, 0]]], dtype=float), np.zeros(2))
    assert not d.adapted
    assert d.kperp == pytest.approx(2.0)
    assert math.isnan(d.a)


def _rot(t):
    return np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(0.01, 5),
       st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_reconstruction_and_gauge_invariance(a, b, c, h, t_tan, t_nor):
    h3 = np.array([[h / 2 + a, 0], [0, h / 2 - a]])
    h4 = np.array([[b, c], [c, -b]])
    T = np.array([h3, h4])
    R, N = _rot(t_tan), _rot(t_nor)
    Tt = np.einsum("ai,bj,kij->kab", R.T, R.T, T)       # new tangent frame
    Tn = np.einsum("lk,kab->lab", N.T, Tt)               # new oriented normal frame
    Hn = N.T @ np.array([h, 0.0])
    d = adapted_decomposition(Tn, Hn)
    assert d.adapted
    assert abs(d.a - abs(a)) <= 1e-10 * (1 + abs(a) + h)
    assert abs(d.kperp - 2 * a * c) <= 1e-10 * (1 + (abs(a) + abs(b) + abs(c) + h) ** 2)
    ao2 = 2 * (a * a + b * b + c * c)
    assert 2 * (d.a ** 2 + d.b ** 2 + d.c ** 2) == pytest.approx(ao2, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("abc,expected", [((1, 0, 1), 0.0), ((1, 1, 0), 4.0), ((0, 0, 0), 0.0)])
def test_ddvv_examples(abc, expected):
    a, b, c = abc
    h = 1.7
    T = np.array([[[h / 2 + a, 0], [0, h / 2 - a]], [[b, c], [c, -b]]], dtype=float)
    d = adapted_decomposition(T, np.array([h, 0.0]))
    ao2 = 2 * (d.a ** 2 + d.b ** 2 + d.c ** 2)
    A2 = ao2 + h * h / 2

    class S:
        pass

    sh = S()
    sh.A2, sh.H_norm, sh.kperp = A2, h, d.kperp
    assert ddvv_residual(sh) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("H,Ao2,kbar,expected", [(2.0, 0.0, 0.0, 1.0), (0.0, 2.0, 1.0, 0.0), (0.0, 0.0, -0.7, -0.7)])
def test_gauss_extrinsic_examples(H, Ao2, kbar, expected):
    assert gauss_curvature_extrinsic_arrays(H, Ao2, kbar) == pytest.approx(expected)


def test_gauss_intrinsic_sphere_and_flat_torus(sphere64, clifford64):
    s, sh = sphere64
    Ki = gauss_curvature_intrinsic(s, shape=sh)
    # the chart error grows like (du / u)**2 towards the poles
    assert np.max(np.abs(Ki[band_mask(s, math.pi / 4)] - 1)) < 0.01
    errs = []
    for n in (16, 32, 64):
        sn = preset_surface("round-sphere-r4", dims=(n, 2 * n))
        shn = fundamental_forms(sn)
        errs.append(band_rms(sn, shn, gauss_curvature_intrinsic(sn, shape=shn) - 1))
    assert np.all(observed_orders(errs) > 1.6), errs
    t, tsh = clifford64
    assert np.max(np.abs(gauss_curvature_intrinsic(t, shape=tsh))) < 1e-10


def test_gauss_intrinsic_single_site(sphere64):
    s, sh = sphere64
    full = gauss_curvature_intrinsic(s, shape=sh)
    assert gauss_curvature_intrinsic(s, site=(10, 3)) == pytest.approx(full[10, 3])


def test_ellipsoid_against_closed_form():
    axes = (1.0, 1.0, 1.2)
    errs_k, errs_h = [], []
    for n in (16, 32, 64):
        s = preset_surface("ellipsoid-r4", {"axes": list(axes)}, dims=(n, 2 * n))
        sh = fundamental_forms(s)
        Kx = ellipsoid_gauss_curvature(axes, s.points[..., :3])
        Hx = ellipsoid_mean_curvature(axes, s.points[..., :3])
        errs_k.append(band_rms(s, sh, gauss_curvature_intrinsic(s, shape=sh) - Kx))
        errs_h.append(band_rms(s, sh, sh.H_norm - Hx))
    assert np.all(observed_orders(errs_k) > 1.6), errs_k
    assert np.all(observed_orders(errs_h) > 1.8), errs_h


def test_ellipsoid_gauss_cross_oracle():
    s = preset_surface("ellipsoid-r4", dims=(32, 64))
    sh = fundamental_forms(s)
    diff = np.abs(gauss_curvature_intrinsic(s, shape=sh) - gauss_curvature_extrinsic(sh))
    # stencil error of the chart: (du / sin u)**2 per unit curvature
    tol = (s.du / np.sin(s.u))[:, None] ** 2 * np.maximum(1.0, np.abs(sh.K))
    assert np.all(diff <= 3 * tol)


def test_gradients_vanish_on_homogeneous_surfaces(sphere64, clifford64):
    for s, sh in (sphere64, clifford64):
        g = gradients(s, sh)
        assert np.max(g.grad_A2[s.interior_rows()]) <= 1e-4
        assert np.all(g.grad_A2 >= 0) and np.all(np.isfinite(g.nabla_A))


def test_normal_curvature_gradient_bound():
    s = preset_surface("perturbed-sphere", dims=(32, 64))
    sh = fundamental_forms(s)
    g = gradients(s, sh)
    # |nabla Ao|^2 = |nabla A|^2 - |nabla H|^2 / 2 in two dimensions
    grad_ao = np.sqrt(np.maximum(g.grad_A2 - 0.5 * g.grad_H2, 0.0))
    rows = s.interior_rows()
    lhs = g.grad_kperp_norm[rows]
    rhs = 4 * np.sqrt(sh.Ao2[rows]) * grad_ao[rows] + 5e-3
    assert np.all(lhs <= rhs)


@pytest.mark.parametrize("name", ["round-sphere-r4", "clifford-torus-s4"])
def test_simons_zero_on_homogeneous(name):
    s = preset_surface(name)
    res = simons_residual(s)
    assert np.max(np.abs(res[s.interior_rows()])) <= 1e-3


def test_simons_converges_on_ellipsoid():
    errs = []
    for n in (16, 32, 64):
        s = preset_surface("ellipsoid-r4", dims=(n, 2 * n))
        sh = fundamental_forms(s)
        errs.append(band_rms(s, sh, simons_residual(s, shape=sh)))
    assert np.all(observed_orders(errs) >= 1.5), errs


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_simons_small_on_every_preset(name):
    s = preset_surface(name)
    sh = fundamental_forms(s)
    scale = 1 + float(np.max(sh.A2[s.interior_rows()])) ** 2
    assert band_rms(s, sh, simons_residual(s, shape=sh)) <= 0.05 * scale


def test_simons_extrinsic_option_and_bad_option(clifford64):
    s, sh = clifford64
    ext = simons_residual(s, shape=sh, curvature="extrinsic")
    assert np.max(np.abs(ext)) < 0.05
    with pytest.raises(ValueError):
        simons_residual(s, shape=sh, curvature="other")


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_ddvv_on_every_preset(name):
    sh = fundamental_forms(preset_surface(name))
    assert np.min(sh.ddvv) >= -1e-8


def test_diagnostics_examples(sphere64, clifford64):
    s, sh = sphere64
    d = global_diagnostics(s, PinchingParams(0.7, 0.0), sh)
    assert d.Q_max == pytest.approx(-0.8, abs=0.05)
    assert d.area == pytest.approx(4 * math.pi, rel=0.01)
    assert d.diameter == pytest.approx(2.0, rel=0.01)
    t, tsh = clifford64
    dt = global_diagnostics(t, PinchingParams(0.7, 1.0), tsh)
    qmin = float(np.min(tsh.A2 - 0.7 * tsh.H_norm ** 2 - 0.8))
    assert qmin >= 1.1 and dt.Q_max == pytest.approx(1.2, abs=0.05)


def test_degenerate_metric_raises():
    pts = np.zeros((8, 8, 4))
    pts[..., 0] = np.arange(8)[:, None]
    with pytest.raises(GeometryError):
        fundamental_forms(SurfaceGrid(euclidean(), Topology.TORUS, pts))


def test_site_access(sphere64):
    s, sh = sphere64
    one = fundamental_forms(s, site=(5, 7))
    assert one.H_norm == pytest.approx(sh.H_norm[5, 7])
    assert sh.at((5, 7)).A2 == pytest.approx(sh.A2[5, 7])
