import math

import numpy as np
import pytest

from pinchflow.errors import DomainError, GeometryError
from pinchflow.grid import SurfaceGrid, Topology
from pinchflow.presets import preset_surface
from pinchflow.spaceform import euclidean, sphere


def test_latlong_coordinates_are_cell_centred():
    s = preset_surface("round-sphere-r4", dims=(16, 32))
    assert s.du == pytest.approx(math.pi / 16)
    assert s.u[0] == pytest.approx(0.5 * s.du)
    assert s.u[-1] == pytest.approx(math.pi - 0.5 * s.du)
    assert s.v[1] == pytest.approx(2 * math.pi / 32)


def test_interior_rows():
    s = preset_surface("round-sphere-r4", dims=(16, 32))
    assert s.interior_rows() == slice(2, 14)
    t = preset_surface("clifford-torus-s4", dims=(16, 16))
    assert t.interior_rows() == slice(None)


@pytest.mark.parametrize("shape,topology", [((7, 16, 4), Topology.TORUS), ((16, 9, 4), Topology.LATLONG),
                                            ((16, 16, 5), Topology.TORUS)])
def test_bad_shapes_rejected(shape, topology):
    with pytest.raises(DomainError):
        SurfaceGrid(euclidean(), topology, np.zeros(shape))


def test_off_model_points_rejected():
    with pytest.raises(GeometryError):
        SurfaceGrid(sphere(), Topology.TORUS, np.full((8, 8, 5), 0.3))


def test_points_are_read_only():
    s = preset_surface("round-sphere-r4", dims=(16, 32))
    with pytest.raises(ValueError):
        s.points[0, 0, 0] = 1.0


def _latlong_field(n_u, f):
    s = preset_surface("round-sphere-r4", dims=(n_u, 2 * n_u))
    U, V = np.meshgrid(s.u, s.v, indexing="ij")
    return s, U, V, f(U, V)


@pytest.mark.parametrize("op", ["d_u", "d_uu", "d_v", "d_vv", "d_uv"])
def test_stencils_second_order_across_poles(op):
    # z-coordinate times x-coordinate of the unit sphere: smooth through the poles
    f = lambda U, V: np.cos(U) * np.sin(U) * np.cos(V)
    exact = {
        "d_u": lambda U, V: np.cos(2 * U) * np.cos(V),
        "d_uu": lambda U, V: -2 * np.sin(2 * U) * np.cos(V),
        "d_v": lambda U, V: -np.cos(U) * np.sin(U) * np.sin(V),
        "d_vv": lambda U, V: -np.cos(U) * np.sin(U) * np.cos(V),
        "d_uv": lambda U, V: -np.cos(2 * U) * np.sin(V),
    }[op]
    errs = []
    for n in (16, 32, 64):
        s, U, V, F = _latlong_field(n, f)
        errs.append(np.max(np.abs(getattr(s.stencil, op)(F) - exact(U, V))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.9), errs


def test_odd_parity_field():
    # d_u of an even field is odd under the pole reflection
    s, U, V, F = _latlong_field(32, lambda U, V: np.cos(U))
    dF = s.stencil.d_u(F)
    d2 = s.stencil.d_u(dF, parity=-1)
    assert np.max(np.abs(d2 + np.cos(U))) < 5e-3


def test_torus_periodic_stencil_exact_on_low_modes():
    s = preset_surface("clifford-torus-s4", dims=(16, 16))
    U, V = np.meshgrid(np.arange(16) * s.du, s.v, indexing="ij")
    F = np.sin(U)
    expected = np.cos(U) * math.sin(s.du) / s.du
    np.testing.assert_allclose(s.stencil.d_u(F), expected, atol=1e-14)


def test_with_points_advances_time():
    s = preset_surface("round-sphere-r4", dims=(16, 32))
    s2 = s.with_points(0.5 * s.points, t=0.1)
    assert s2.t == 0.1 and s2.topology is s.topology
