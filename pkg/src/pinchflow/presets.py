"""Catalogue of initial surfaces.

Every constructor returns an on-model :class:`~pinchflow.grid.SurfaceGrid`.
Sphere-type surfaces use the cell-centred lat-long chart and are built with
the exponential map at the distinguished point ``p`` of the model (origin of
:math:`\\mathbb{R}^4`, or ``R e_0``) applied to ``rho * omega(u, v)`` where

.. math:: \\omega(u, v) = (\\sin u \\cos v, \\sin u \\sin v, \\cos u, 0)

is written in the coordinates of ``T_p`` (the last four ambient axes for
curved models).

The perturbed sphere uses the fixed profile

.. math::
    Y = \\tfrac12 \\cdot \\tfrac12(3\\omega_3^2 - 1) + \\omega_1 \\omega_2,
    \\qquad Z = \\omega_1 \\omega_3,

and the tangent vector ``r [(1 + eps Y) omega + eps Z e_4]``. The ``Z`` term
pushes the surface out of a totally geodesic 3-space so that the normal
curvature is not identically zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, DomainError
from .grid import SurfaceGrid, Topology
from .spaceform import AmbientModel, ModelKind, base_point, exp_map

__all__ = ["PRESETS", "preset_surface", "preset_names", "default_dims", "PresetEntry"]

Y_COEFFS = {"zonal_l2": 0.5, "sectoral_xy": 1.0}
Z_COEFFS = {"xz": 1.0}


def _latlong(n_u, n_v):
    u = (np.arange(n_u) + 0.5) * math.pi / n_u
    v = np.arange(n_v) * 2 * math.pi / n_v
    return np.meshgrid(u, v, indexing="ij")


def _torus(n_u, n_v):
    u = np.arange(n_u) * 2 * math.pi / n_u
    v = np.arange(n_v) * 2 * math.pi / n_v
    return np.meshgrid(u, v, indexing="ij")


def _omega(U, V):
    return np.stack([np.sin(U) * np.cos(V), np.sin(U) * np.sin(V), np.cos(U), np.zeros_like(U)], -1)


def _lift(model, tangent4):
    """Place a vector of ``T_p`` (4 components) into ambient coordinates."""
    if model.kind is ModelKind.EUCLIDEAN:
        return tangent4
    out = np.zeros(tangent4.shape[:-1] + (5,))
    out[..., 1:] = tangent4
    return out


def _from_tangent(model, tangent4):
    p = base_point(model)
    return exp_map(model, np.broadcast_to(p, tangent4.shape[:-1] + (model.dim,)), _lift(model, tangent4))


def _require(model, kind, name):
    if model.kind is not kind:
        raise ConfigError(f"preset {name!r} needs a {kind.value} ambient, got {model.kind.value}")


def _positive(params, key):
    val = float(params[key])
    if not val > 0 or not math.isfinite(val):
        raise ConfigError(f"preset parameter {key} must be positive, got {val}")
    return val


def round_sphere_r4(model, params, n_u, n_v):
    _require(model, ModelKind.EUCLIDEAN, "round-sphere-r4")
    r = _positive(params, "r")
    U, V = _latlong(n_u, n_v)
    return SurfaceGrid(model, Topology.LATLONG, r * _omega(U, V))


def geodesic_sphere(model, params, n_u, n_v, kind, name):
    _require(model, kind, name)
    rho = _positive(params, "rho")
    if kind is ModelKind.SPHERE and not rho < 0.5 * math.pi * model.radius:
        raise ConfigError("geodesic sphere radius must be below pi R / 2")
    U, V = _latlong(n_u, n_v)
    return SurfaceGrid(model, Topology.LATLONG, _from_tangent(model, rho * _omega(U, V)))


def totally_geodesic_s2(model, params, n_u, n_v):
    _require(model, ModelKind.SPHERE, "totally-geodesic-s2")
    U, V = _latlong(n_u, n_v)
    return SurfaceGrid(model, Topology.LATLONG, _lift(model, model.radius * _omega(U, V)))


def clifford_torus_s4(model, params, n_u, n_v):
    _require(model, ModelKind.SPHERE, "clifford-torus-s4")
    U, V = _torus(n_u, n_v)
    R = model.radius
    pts = np.stack([np.zeros_like(U), np.cos(U), np.sin(U), np.cos(V), np.sin(V)], -1) * (R / math.sqrt(2))
    return SurfaceGrid(model, Topology.TORUS, pts)


def torus_h4(model, params, n_u, n_v):
    """Product torus of two circles of radius ``R/sqrt(2)`` in the geodesic
    sphere of Euclidean radius ``R`` at height ``sqrt(2) R``."""
    _require(model, ModelKind.HYPERBOLIC, "torus-h4")
    U, V = _torus(n_u, n_v)
    R = model.radius
    pts = np.stack([np.full_like(U, math.sqrt(2)), np.cos(U) / math.sqrt(2), np.sin(U) / math.sqrt(2),
                    np.cos(V) / math.sqrt(2), np.sin(V) / math.sqrt(2)], -1) * R
    return SurfaceGrid(model, Topology.TORUS, pts)


def ellipsoid_r4(model, params, n_u, n_v):
    _require(model, ModelKind.EUCLIDEAN, "ellipsoid-r4")
    axes = params.get("axes", (1.0, 1.0, 1.2))
    axes = np.asarray(axes, dtype=float)
    if axes.shape != (3,) or not np.all(axes > 0):
        raise ConfigError("ellipsoid axes must be three positive numbers")
    U, V = _latlong(n_u, n_v)
    pts = _omega(U, V) * np.array([axes[0], axes[1], axes[2], 0.0])
    return SurfaceGrid(model, Topology.LATLONG, pts)


def perturbation_profile(om):
    """The fixed profile ``(Y, Z)`` evaluated on unit vectors ``om``."""
    x, y, z = om[..., 0], om[..., 1], om[..., 2]
    Y = Y_COEFFS["zonal_l2"] * 0.5 * (3 * z ** 2 - 1) + Y_COEFFS["sectoral_xy"] * x * y
    Z = Z_COEFFS["xz"] * x * z
    return Y, Z


def perturbed_sphere(model, params, n_u, n_v):
    r = _positive(params, "r")
    eps = float(params.get("eps", 0.05))
    if not 0 <= eps < 0.5:
        raise ConfigError("perturbation amplitude eps must lie in [0, 0.5)")
    if model.kind is ModelKind.SPHERE and not r * (1 + 1.5 * eps) < 0.5 * math.pi * model.radius:
        raise ConfigError("perturbed sphere does not fit in a hemisphere")
    U, V = _latlong(n_u, n_v)
    om = _omega(U, V)
    Y, Z = perturbation_profile(om)
    vec = r * ((1 + eps * Y)[..., None] * om)
    vec[..., 3] = r * eps * Z
    return SurfaceGrid(model, Topology.LATLONG, _from_tangent(model, vec))


@dataclass(frozen=True)
class PresetEntry:
    builder: Callable
    topology: Topology
    default_kind: ModelKind
    defaults: dict = field(default_factory=dict)
    kinds: tuple = ()


PRESETS: dict[str, PresetEntry] = {
    "round-sphere-r4": PresetEntry(round_sphere_r4, Topology.LATLONG, ModelKind.EUCLIDEAN, {"r": 1.0}),
    "geodesic-sphere-s4": PresetEntry(
        lambda m, p, a, b: geodesic_sphere(m, p, a, b, ModelKind.SPHERE, "geodesic-sphere-s4"),
        Topology.LATLONG, ModelKind.SPHERE, {"rho": 0.7}),
    "geodesic-sphere-h4": PresetEntry(
        lambda m, p, a, b: geodesic_sphere(m, p, a, b, ModelKind.HYPERBOLIC, "geodesic-sphere-h4"),
        Topology.LATLONG, ModelKind.HYPERBOLIC, {"rho": 0.5}),
    "totally-geodesic-s2": PresetEntry(totally_geodesic_s2, Topology.LATLONG, ModelKind.SPHERE, {}),
    "clifford-torus-s4": PresetEntry(clifford_torus_s4, Topology.TORUS, ModelKind.SPHERE, {}),
    "torus-h4": PresetEntry(torus_h4, Topology.TORUS, ModelKind.HYPERBOLIC, {}),
    "ellipsoid-r4": PresetEntry(ellipsoid_r4, Topology.LATLONG, ModelKind.EUCLIDEAN, {"axes": [1.0, 1.0, 1.2]}),
    "perturbed-sphere": PresetEntry(perturbed_sphere, Topology.LATLONG, ModelKind.EUCLIDEAN,
                                   {"r": 1.0, "eps": 0.05}),
}


def preset_names():
    return sorted(PRESETS)


def default_dims(name: str) -> tuple[int, int]:
    """Default ``(n_u, n_v)``: 32 x 64 lat-long or 64 x 64 torus."""
    entry = _lookup(name)
    return (64, 64) if entry.topology is Topology.TORUS else (32, 64)


def _lookup(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(preset_names())}") from None


def default_model(name: str, curvature: float | None = None) -> AmbientModel:
    entry = _lookup(name)
    kind = entry.default_kind
    if curvature is None:
        curvature = {ModelKind.EUCLIDEAN: 0.0, ModelKind.SPHERE: 1.0, ModelKind.HYPERBOLIC: -1.0}[kind]
    if kind is ModelKind.EUCLIDEAN and curvature != 0 and name == "perturbed-sphere":
        kind = ModelKind.SPHERE if curvature > 0 else ModelKind.HYPERBOLIC
    return AmbientModel(kind, curvature)


def preset_surface(name: str, params: dict | None = None, dims=None, model: AmbientModel | None = None) -> SurfaceGrid:
    """Build a named preset.

    Parameters
    ----------
    name : str
        One of :func:`preset_names`.
    params : dict, optional
        Preset parameters; missing keys take the preset defaults.
    dims : tuple of int, optional
        ``(n_u, n_v)``; defaults to :func:`default_dims`.
    model : AmbientModel, optional
        Ambient space; defaults to the preset's natural model with unit
        curvature magnitude.

    Raises
    ------
    ConfigError
        Unknown preset, unknown parameter, wrong ambient, or bad values.
    """
    entry = _lookup(name)
    merged = dict(entry.defaults)
    for key, val in (params or {}).items():
        if key not in entry.defaults:
            raise ConfigError(f"preset {name!r} has no parameter {key!r}")
        merged[key] = val
    model = default_model(name) if model is None else model
    n_u, n_v = default_dims(name) if dims is None else tuple(int(d) for d in dims)
    try:
        return entry.builder(model, merged, n_u, n_v)
    except (TypeError, ValueError, DomainError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"preset {name!r}: {exc}") from exc
