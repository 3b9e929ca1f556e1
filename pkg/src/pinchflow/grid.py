"""Parametric surface grids and their finite-difference stencils.

Two chart topologies are supported.

``TORUS``
    Doubly periodic grid on :math:`[0, 2\\pi)^2`.
``LATLONG``
    Cell-centred latitude/longitude grid on the sphere,
    :math:`u_i = (i + 1/2)\\pi/n_u`, :math:`v_j = 2\\pi j/n_v`. No grid point
    sits on a pole. The stencil row beyond the first (last) latitude is the
    reflection across the pole, ``f(-u, v) = f(u, v + pi)``, which needs an
    even ``n_v``. Coordinate-tensor fields pick up a sign ``(-1)**m`` under the
    reflection, where ``m`` is the number of ``u`` indices they carry; this is
    the ``parity`` argument of the difference operators.

All operators are second-order central differences.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError
from .spaceform import AmbientModel, check_on_model

__all__ = ["Topology", "SurfaceGrid", "Stencil"]


class Topology(str, enum.Enum):
    TORUS = "torus"
    LATLONG = "latlong"


@dataclass(frozen=True, eq=False)
class SurfaceGrid:
    """Time-stamped grid of on-model points.

    Parameters
    ----------
    model : AmbientModel
    topology : Topology
    points : ndarray, shape (n_u, n_v, D)
    t : float
        Flow time of the snapshot.
    """

    model: AmbientModel
    topology: Topology
    points: np.ndarray
    t: float = 0.0
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology(self.topology))
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 3 or pts.shape[2] != self.model.dim:
            raise DomainError(f"points must have shape (n_u, n_v, {self.model.dim}), got {pts.shape}")
        n_u, n_v = pts.shape[:2]
        if n_u < 8 or n_v < 8:
            raise DomainError("grid needs n_u, n_v >= 8")
        if self.topology is Topology.LATLONG and n_v % 2:
            raise DomainError("lat-long grids need an even number of longitudes")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "t", float(self.t))
        if self.validate:
            check_on_model(self.model, pts)

    @property
    def shape(self) -> tuple[int, int]:
        return self.points.shape[:2]

    @property
    def n_u(self) -> int:
        return self.points.shape[0]

    @property
    def n_v(self) -> int:
        return self.points.shape[1]

    @property
    def du(self) -> float:
        span = math.pi if self.topology is Topology.LATLONG else 2 * math.pi
        return span / self.n_u

    @property
    def dv(self) -> float:
        return 2 * math.pi / self.n_v

    @property
    def u(self) -> np.ndarray:
        if self.topology is Topology.LATLONG:
            return (np.arange(self.n_u) + 0.5) * self.du
        return np.arange(self.n_u) * self.du

    @property
    def v(self) -> np.ndarray:
        return np.arange(self.n_v) * self.dv

    def with_points(self, points, t=None, validate=True) -> "SurfaceGrid":
        return replace(self, points=points, t=self.t if t is None else t, validate=validate)

    def interior_rows(self, margin: int = 2) -> slice:
        """Rows used for global extrema: all rows on a torus, pole rows dropped otherwise."""
        if self.topology is Topology.TORUS:
            return slice(None)
        return slice(margin, self.n_u - margin)

    @property
    def stencil(self) -> "Stencil":
        return Stencil(self.topology, self.n_u, self.n_v, self.du, self.dv)


@dataclass(frozen=True)
class Stencil:
    """Central difference operators acting on fields of shape ``(n_u, n_v, ...)``."""

    topology: Topology
    n_u: int
    n_v: int
    du: float
    dv: float

    def pad_u(self, f: np.ndarray, parity: int = 1) -> np.ndarray:
        """Return ``f`` with one ghost row prepended and appended in ``u``."""
        if self.topology is Topology.TORUS:
            return np.concatenate([f[-1:], f, f[:1]], axis=0)
        half = self.n_v // 2
        top = parity * np.roll(f[:1], half, axis=1)
        bot = parity * np.roll(f[-1:], half, axis=1)
        return np.concatenate([top, f, bot], axis=0)

    def d_u(self, f, parity: int = 1):
        fp = self.pad_u(f, parity)
        return (fp[2:] - fp[:-2]) / (2 * self.du)

    def d_uu(self, f, parity: int = 1):
        fp = self.pad_u(f, parity)
        return (fp[2:] - 2 * f + fp[:-2]) / self.du ** 2

    def d_v(self, f):
        return (np.roll(f, -1, axis=1) - np.roll(f, 1, axis=1)) / (2 * self.dv)

    def d_vv(self, f):
        return (np.roll(f, -1, axis=1) - 2 * f + np.roll(f, 1, axis=1)) / self.dv ** 2

    def d_uv(self, f, parity: int = 1):
        return self.d_v(self.d_u(f, parity))

    def gradient(self, f, parity_u: int = 1):
        """Stack ``(d_u f, d_v f)`` on a new axis 2.

        ``parity_u`` is the reflection parity of ``f`` itself.
        """
        return np.stack([self.d_u(f, parity_u), self.d_v(f)], axis=2)
