"""Whole-surface diagnostic records.

Global extrema skip the two latitude rows next to each pole of a lat-long
grid, where the chart is singular and stencil errors behave like
``(du / u)**2``. Area uses every row.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .geometry import ShapeData, fundamental_forms, tol_h
from .grid import SurfaceGrid
from .pinching import PinchingParams, f_sigma, lp_norm, monitor_params, pinching_q
from .spaceform import base_point, geodesic_distance

__all__ = ["Diagnostics", "global_diagnostics", "DIAGNOSTIC_COLUMNS", "sample_diameter"]

DIAGNOSTIC_COLUMNS = [
    "t", "Q_max", "f_max", "H_min", "H_max", "A2_max", "ratio_max", "ddvv_min", "area", "diameter",
]


@dataclass
class Diagnostics:
    """One row of the diagnostics time series."""

    t: float
    Q_max: float
    f_max: float
    H_min: float
    H_max: float
    A2_max: float
    ratio_max: float
    ddvv_min: float
    area: float
    diameter: float
    lp: dict = field(default_factory=dict)
    step: int = 0
    dt: float = math.nan
    Q_argmax: tuple | None = None
    f_undefined: int = 0
    H_mean: float = math.nan
    center_distance: float = math.nan
    monitors: dict = field(default_factory=dict)

    def row(self, lp_list=()):
        vals = [getattr(self, c) for c in DIAGNOSTIC_COLUMNS]
        vals += [self.lp.get(float(p), math.nan) for p in lp_list]
        return vals

    def to_dict(self):
        d = asdict(self)
        d["lp"] = {str(k): v for k, v in self.lp.items()}
        d["monitors"] = {str(k): v for k, v in self.monitors.items()}
        return d


def sample_diameter(surface: SurfaceGrid, max_points: int = 256) -> float:
    """Largest pairwise geodesic distance over a strided subsample of sites."""
    pts = surface.points.reshape(-1, surface.model.dim)
    stride = max(1, int(math.ceil(len(pts) / max_points)))
    sub = pts[::stride]
    d = geodesic_distance(surface.model, sub[:, None, :], sub[None, :, :], check=False)
    return float(np.max(d))


def global_diagnostics(surface: SurfaceGrid, params: PinchingParams, shape: ShapeData | None = None,
                       lp_list=(2.0,), monitors=(), step: int = 0, dt: float = math.nan) -> Diagnostics:
    """Aggregate the monitored quantities of one snapshot.

    Parameters
    ----------
    surface : SurfaceGrid
    params : PinchingParams
        Used for ``Q``; the decay quantity uses :func:`monitor_params`.
    lp_list : sequence of float
        Exponents for ``L^p`` norms of the decay quantity.
    monitors : sequence of float
        Extra ``k`` values whose ``Q_max`` and ``f_max`` are also recorded.
    """
    model = surface.model
    kbar = model.curvature
    if shape is None:
        shape = fundamental_forms(surface)
    rows = surface.interior_rows()
    Hn = shape.H_norm
    Hin = Hn[rows]
    Q = pinching_q(shape, params, kbar)
    Qin = Q[rows]
    qi = np.unravel_index(int(np.argmax(Qin)), Qin.shape)
    q_site = (qi[0] + (rows.start or 0), qi[1])
    mp = monitor_params(params.k, kbar, params.sigma)
    fs = f_sigma(shape, mp, kbar, tol_h(model))
    fin = fs.values[rows]
    f_max = float(np.nanmax(fin)) if np.any(np.isfinite(fin)) else math.nan
    th = tol_h(model)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(Hin >= th, shape.Ao2[rows] / np.where(Hin >= th, Hin, 1.0) ** 2, np.nan)
    ratio_max = float(np.nanmax(ratio)) if np.any(np.isfinite(ratio)) else math.nan
    area = float(np.sum(np.sqrt(shape.det_g)) * surface.du * surface.dv)
    fvals = np.nan_to_num(fs.values, nan=0.0)
    lp = {float(p): lp_norm(surface, fvals, p, shape) for p in lp_list}
    mons = {}
    for km in monitors:
        pk = PinchingParams(float(km), kbar, params.sigma)
        mk = monitor_params(float(km), kbar, params.sigma)
        fk = f_sigma(shape, mk, kbar, th).values[rows]
        mons[float(km)] = {
            "Q_max": float(np.max(pinching_q(shape, pk, kbar)[rows])),
            "f_max": float(np.nanmax(fk)) if np.any(np.isfinite(fk)) else math.nan,
        }
    center = base_point(model)
    cd = float(np.mean(geodesic_distance(model, surface.points, np.broadcast_to(center, surface.points.shape), check=False)))
    return Diagnostics(
        t=surface.t, Q_max=float(np.max(Qin)), f_max=f_max, H_min=float(np.min(Hin)),
        H_max=float(np.max(Hin)), A2_max=float(np.max(shape.A2[rows])), ratio_max=ratio_max,
        ddvv_min=float(np.min(shape.ddvv)), area=area, diameter=sample_diameter(surface), lp=lp,
        step=int(step), dt=float(dt), Q_argmax=tuple(int(x) for x in q_site),
        f_undefined=int(fs.undefined), H_mean=float(np.mean(Hin)), center_distance=cd, monitors=mons,
    )
