"""CSV and JSON emission.

CSV files use the :mod:`csv` module defaults (comma separated, CRLF line
ends, ``.`` decimal point) with floats written by ``repr`` so that the same
numbers always produce the same bytes. JSON files are written with sorted
keys; NaN and infinities become ``null``.

Output values are dimensionless. Lengths are divided by a reference length
``L``: the ambient radius ``R`` in curved models, and ``2 / mean|H|`` of the
initial surface in Euclidean space (the radius of the round sphere with the
same mean curvature). Times are divided by ``L**2`` and curvatures of order
``1/L**2`` are multiplied by ``L**2``.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from . import __version__
from .diagnostics import DIAGNOSTIC_COLUMNS
from .geometry import fundamental_forms, gauss_curvature_extrinsic, tol_h
from .grid import SurfaceGrid
from .pinching import PinchingParams, f_sigma, monitor_params, pinching_q
from .spaceform import ModelKind

__all__ = [
    "Units", "units_for", "to_jsonable", "write_json", "dumps_json", "timeseries_columns",
    "TimeSeriesWriter", "write_points_csv", "write_sites_csv", "point_columns", "SITE_COLUMNS",
]

SITE_COLUMNS = ["u_index", "v_index", "u", "v", "H", "A2", "Ao2", "kperp", "K", "Q", "f", "ddvv", "ratio"]


def point_columns(dim: int) -> list:
    return ["u_index", "v_index"] + [f"x{i}" for i in range(dim)]


@dataclass(frozen=True)
class Units:
    """Reference length used to make outputs dimensionless."""

    length: float
    basis: str
    sigma: float = 0.05

    @property
    def time(self) -> float:
        return self.length ** 2

    def header(self) -> dict:
        return {
            "reference_length": self.length,
            "basis": self.basis,
            "scaling": {
                "t": "t / L^2", "H": "|H| L", "A2": "|A|^2 L^2", "Q": "Q L^2",
                "f": "f L^(2 sigma)", "area": "area / L^2", "diameter": "diameter / L",
                "points": "x / L", "Lp": "||f||_p L^(2 sigma - 2/p)",
            },
        }

    def column_factors(self, lp_list=()) -> dict:
        L = self.length
        fac = {
            "t": 1 / L ** 2, "Q_max": L ** 2, "f_max": L ** (2 * self.sigma), "H_min": L, "H_max": L,
            "A2_max": L ** 2, "ratio_max": 1.0, "ddvv_min": L ** 2, "area": 1 / L ** 2, "diameter": 1 / L,
        }
        for p in lp_list:
            fac[_lp_name(p)] = L ** (2 * self.sigma - 2 / float(p))
        return fac


def units_for(surface: SurfaceGrid, sigma: float = 0.05) -> Units:
    """Reference length for a run starting from ``surface``."""
    model = surface.model
    if model.kind is not ModelKind.EUCLIDEAN:
        return Units(model.radius, "ambient radius R", sigma)
    shape = fundamental_forms(surface)
    mean_h = float(np.mean(shape.H_norm[surface.interior_rows()]))
    if not mean_h > 0:
        return Units(1.0, "unit length (initial mean |H| vanishes)", sigma)
    return Units(2.0 / mean_h, "2 / mean |H| of the initial surface", sigma)


def _lp_name(p) -> str:
    p = float(p)
    return f"Lp_{int(p)}" if p.is_integer() else f"Lp_{p!r}"


def timeseries_columns(lp_list=()) -> list:
    return list(DIAGNOSTIC_COLUMNS) + [_lp_name(p) for p in lp_list]


def to_jsonable(obj):
    """Convert numpy scalars/arrays, tuples and enums; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def dumps_json(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_json(obj))


def _fmt(x):
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


class TimeSeriesWriter:
    """Append diagnostics rows to a CSV file as they are produced."""

    def __init__(self, path, units: Units, lp_list=()):
        self.lp_list = tuple(lp_list)
        self.columns = timeseries_columns(self.lp_list)
        self.factors = units.column_factors(self.lp_list)
        self._fh = open(path, "w", encoding="utf-8", newline="")
        self._w = csv.writer(self._fh)
        self._w.writerow(self.columns)
        self._fh.flush()

    def write(self, diag) -> None:
        vals = diag.row(self.lp_list)
        self._w.writerow([_fmt(v * self.factors[c]) for c, v in zip(self.columns, vals)])
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_points_csv(path, surface: SurfaceGrid, units: Units | None = None) -> None:
    """Point dump: ``u_index, v_index, x0, ..., x{D-1}`` in row-major order."""
    L = units.length if units is not None else 1.0
    D = surface.model.dim
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(point_columns(D))
        pts = surface.points / L
        for i in range(surface.n_u):
            for j in range(surface.n_v):
                w.writerow([i, j] + [repr(float(x)) for x in pts[i, j]])


def write_sites_csv(path, surface: SurfaceGrid, params: PinchingParams, units: Units | None = None,
                    shape=None) -> None:
    """Per-site diagnostics in the order of :data:`SITE_COLUMNS`.

    ``f`` is the decay quantity with the monitoring constants; it is empty
    where its denominator is not positive, as is ``ratio`` where ``|H|`` is
    below the adapted-frame threshold.
    """
    L = units.length if units is not None else 1.0
    sig = params.sigma
    kbar = surface.model.curvature
    if shape is None:
        shape = fundamental_forms(surface)
    Q = pinching_q(shape, params, kbar)
    fs = f_sigma(shape, monitor_params(params.k, kbar, sig), kbar, tol_h(surface.model)).values
    K = gauss_curvature_extrinsic(shape, kbar)
    th = tol_h(surface.model)
    H = shape.H_norm
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(H >= th, shape.Ao2 / np.where(H >= th, H, 1.0) ** 2, np.nan)
    U, V = surface.u, surface.v

    def cell(x):
        return "" if not math.isfinite(x) else repr(float(x))

    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SITE_COLUMNS)
        for i in range(surface.n_u):
            for j in range(surface.n_v):
                w.writerow([
                    i, j, repr(float(U[i])), repr(float(V[j])), cell(H[i, j] * L), cell(shape.A2[i, j] * L ** 2),
                    cell(shape.Ao2[i, j] * L ** 2), cell(shape.kperp[i, j] * L ** 2), cell(K[i, j] * L ** 2),
                    cell(Q[i, j] * L ** 2), cell(fs[i, j] * L ** (2 * sig)), cell(shape.ddvv[i, j] * L ** 2),
                    cell(ratio[i, j]),
                ])


def ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return str(path)
