"""Explicit time integration of mean curvature flow, ``dF/dt = H``.

Each step moves every grid point along the discrete mean curvature vector and
retracts the result onto the ambient model:

.. math:: x \\mapsto \\operatorname{retract}(x + \\Delta t\\, H(x)).

On lat-long grids the velocity is filtered in longitude row by row. Fourier
modes whose stencil eigenvalue exceeds that of the latitude direction (all
but one mode on the rows next to the poles, then 3, 5, ... kept) are damped
so that their effective stiffness equals that of the highest kept mode.
Without the filter the shrinking longitude spacing next to the poles would
force a time step about ``(n_v/2)**2`` times smaller. The damped modes are
those a smooth field carries with amplitude ``O(sin(u)**m)``; they still
relax, only more slowly than the unfiltered stencil would move them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import Diagnostics, global_diagnostics
from .errors import ConfigError, DomainError, EstimationError, GeometryError, NumericalFailure
from .geometry import _derivatives, tol_h
from .grid import SurfaceGrid, Topology
from .pinching import PinchingParams
from .spaceform import AmbientModel, ModelKind, retract

__all__ = [
    "StopReason",
    "FlowConfig",
    "FlowTrajectory",
    "FlowFields",
    "flow_fields",
    "adaptive_dt",
    "step",
    "run",
    "geodesic_sphere_ode",
    "GeodesicSphereODE",
    "extinction_estimate",
    "Extinction",
]


class StopReason(str, enum.Enum):
    ROUND_POINT = "RoundPoint"
    STATIONARY = "Stationary"
    MAX_TIME = "MaxTime"
    NUMERICAL_FAILURE = "NumericalFailure"
    PINCHING_LOST = "PinchingLost"


@dataclass(frozen=True)
class FlowConfig:
    """Integrator settings.

    Attributes
    ----------
    c_cfl : float
        Safety factor in ``(0, 0.5]``.
    cap : float
        Curvature cap: ``dt <= c_cfl * cap / (|A|^2_max + |K_bar|)``.
    max_steps, max_time : int, float
        Budget; exhausting either ends the run with ``MaxTime``.
    h_stop : float or None
        ``|H|_max`` at which a round point is declared (together with
        ``eps_round``). ``None`` means ``25 * max(mean |H| at t=0, 1/L)`` with
        ``L`` the model length scale.
    eps_round : float
        Bound on ``max |Ao|^2/|H|^2`` for a round point.
    stationary_tol : float
        Displacement per unit time (in units of the model length scale)
        below which a step counts as stationary.
    stationary_window : int
        Consecutive stationary steps needed to stop.
    cadence : int
        Steps between diagnostic records.
    params : PinchingParams or None
        Constants for ``Q`` and ``f_sigma``; defaults to ``k = 0.7``.
    monitors : tuple of float
        Extra ``k`` values recorded in each diagnostics row.
    lp : tuple of float
        ``L^p`` exponents of the decay quantity.
    polar_filter : bool
        Longitude filter on lat-long grids.
    filter_floor : int
        Lowest retained cutoff mode.
    tangential : float
        Weight of an optional tangential term that pulls the chart toward a
        harmonic parametrisation; 0 gives pure normal motion.
    """

    c_cfl: float = 0.2
    cap: float = 0.1
    max_steps: int = 200_000
    max_time: float = math.inf
    h_stop: float | None = None
    eps_round: float = 0.01
    stationary_tol: float = 1e-4
    stationary_window: int = 50
    cadence: int = 10
    params: PinchingParams | None = None
    monitors: tuple = ()
    lp: tuple = (2.0,)
    polar_filter: bool = True
    filter_floor: int = 1
    tangential: float = 0.0

    def __post_init__(self):
        if not 0 < self.c_cfl <= 0.5:
            raise ConfigError("c_cfl must lie in (0, 0.5]")
        for name in ("cap", "eps_round", "stationary_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.h_stop is not None and not self.h_stop > 0:
            raise ConfigError("h_stop must be positive")
        if not self.max_time > 0:
            raise ConfigError("max_time must be positive")
        if int(self.max_steps) < 1 or int(self.cadence) < 1 or int(self.stationary_window) < 1:
            raise ConfigError("max_steps, cadence and stationary_window must be positive integers")
        if int(self.filter_floor) < 1:
            raise ConfigError("filter_floor must be at least 1")
        if self.tangential < 0:
            raise ConfigError("tangential weight must be nonnegative")

    def pinching(self, kbar: float) -> PinchingParams:
        p = self.params or PinchingParams(0.7, kbar)
        if (p.kbar >= 0) != (kbar >= 0):
            p = PinchingParams(p.k, kbar, p.sigma, p.gamma_offset)
        return p


@dataclass
class FlowFields:
    """Quantities needed for one explicit step."""

    H: np.ndarray          # (n_u, n_v, D)
    A2: np.ndarray         # (n_u, n_v)
    H_norm: np.ndarray
    g: np.ndarray
    tangential: np.ndarray | None = None


def flow_fields(surface: SurfaceGrid, tangential: bool = False) -> FlowFields:
    """Mean curvature vector, ``|A|^2`` and metric without building frames.

    Written with explicit components (rather than the tensor contractions of
    :mod:`pinchflow.geometry`) because it runs once per time step.
    """
    model = surface.model
    sig = model.signature
    flat = model.kind is ModelKind.EUCLIDEAN
    lorentz = model.kind is ModelKind.HYPERBOLIC
    X, Fu, Fv, Fuu, Fuv, Fvv = _derivatives(surface)

    def ip(a, b):
        if lorentz:
            return np.einsum("...d,...d->...", a, b) - 2 * a[..., 0] * b[..., 0]
        return np.einsum("...d,...d->...", a, b)

    if flat:
        proj = lambda w: w
    else:
        R2 = model.radius ** 2
        sgn = 1.0 if lorentz else -1.0
        proj = lambda w: w + (sgn / R2) * ip(X, w)[..., None] * X
    tu, tv = proj(Fu), proj(Fv)
    g11, g12, g22 = ip(tu, tu), ip(tu, tv), ip(tv, tv)
    det = g11 * g22 - g12 * g12
    scale = np.median(g11 + g22) ** 2
    if not np.all(det > 1e-14 * scale):
        site = np.unravel_index(int(np.argmax(~(det > 1e-14 * scale))), det.shape)
        raise GeometryError("degenerate induced metric", site=site)
    i11, i12, i22 = g22 / det, -g12 / det, g11 / det
    N, T = [], []
    for w in (Fuu, Fuv, Fvv):
        w = proj(w)
        pu, pv = ip(w, tu), ip(w, tv)
        cu = i11 * pu + i12 * pv
        cv = i12 * pu + i22 * pv
        tan = cu[..., None] * tu + cv[..., None] * tv
        N.append(w - tan)
        T.append(tan)
    N11, N12, N22 = N
    H = i11[..., None] * N11 + 2 * i12[..., None] * N12 + i22[..., None] * N22
    # |A|^2 = g^{ik} g^{jl} <N_ij, N_kl>; raise one index and take the trace
    M11 = i11[..., None] * N11 + i12[..., None] * N12
    M12 = i11[..., None] * N12 + i12[..., None] * N22
    M21 = i12[..., None] * N11 + i22[..., None] * N12
    M22 = i12[..., None] * N12 + i22[..., None] * N22
    A2 = ip(M11, M11) + 2 * ip(M12, M21) + ip(M22, M22)
    Hn = np.sqrt(np.maximum(ip(H, H), 0.0))
    g = np.stack([np.stack([g11, g12], -1), np.stack([g12, g22], -1)], -2)
    Tv = None
    if tangential:
        Tv = i11[..., None] * T[0] + 2 * i12[..., None] * T[1] + i22[..., None] * T[2]
    return FlowFields(H=H, A2=A2, H_norm=Hn, g=g, tangential=Tv)


def _cutoffs(surface: SurfaceGrid, floor: int) -> np.ndarray:
    """Highest kept longitude mode per row.

    Mode ``m`` is kept when ``sin(u) dv / sin(m dv/2) >= du``, i.e. when its
    stencil eigenvalue on a unit sphere chart does not exceed that of the
    latitude direction.
    """
    half = surface.n_v // 2
    ratio = np.minimum(1.0, np.sin(surface.u) * surface.dv / surface.du)
    mc = np.floor(2.0 * np.arcsin(ratio) / surface.dv + 1e-9).astype(int)
    return np.clip(mc, floor, half)


def _filter(surface: SurfaceGrid, field: np.ndarray, floor: int) -> np.ndarray:
    """Scale longitude modes above the row cutoff by their eigenvalue ratio.

    Mode ``m > m_c`` is multiplied by ``sin(m_c dv/2)**2 / sin(m dv/2)**2``,
    which caps its stiffness at that of the cutoff mode. Zeroing these modes
    instead would freeze their absolute amplitude, which then grows relative
    to a shrinking surface.
    """
    mc = _cutoffs(surface, floor)
    modes = np.fft.rfft(field, axis=1)
    m = np.arange(modes.shape[1])
    half_angle = 0.5 * surface.dv
    lam = np.sin(m * half_angle) ** 2
    lam_c = np.sin(np.minimum(mc * half_angle, 0.5 * math.pi)) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(m[None, :] <= mc[:, None], 1.0, lam_c[:, None] / np.where(lam > 0, lam, 1.0)[None, :])
    modes *= scale.reshape(scale.shape + (1,) * (field.ndim - 2))
    return np.fft.irfft(modes, n=surface.n_v, axis=1)


def _uses_filter(surface, config):
    return config.polar_filter and surface.topology is Topology.LATLONG


def min_spacing(surface: SurfaceGrid, g: np.ndarray, config: FlowConfig | None = None) -> float:
    """Smallest effective metric grid spacing.

    With the polar filter active a row keeping modes ``m <= m_c`` has
    effective longitude spacing ``sqrt(g_vv) dv / sin(m_c dv / 2)``, the
    spacing whose unfiltered stencil has the same largest eigenvalue.
    """
    su = np.sqrt(g[..., 0, 0]) * surface.du
    sv = np.sqrt(g[..., 1, 1]) * surface.dv
    if config is not None and _uses_filter(surface, config):
        mc = _cutoffs(surface, config.filter_floor)
        sv = sv / np.sin(np.minimum(mc * surface.dv / 2, math.pi / 2))[:, None]
    return float(min(np.min(su), np.min(sv)))


def adaptive_dt(surface: SurfaceGrid, config: FlowConfig, fields: FlowFields | None = None) -> float:
    """``c_cfl * min(ds^2/4, cap/(|A|^2_max + |K_bar| + eps))``."""
    if fields is None:
        fields = flow_fields(surface)
    a2max = float(np.max(fields.A2))
    if not math.isfinite(a2max):
        bad = np.unravel_index(int(np.argmax(~np.isfinite(fields.A2))), fields.A2.shape)
        raise NumericalFailure("non-finite curvature", site=bad)
    ds = min_spacing(surface, fields.g, config)
    eps = 1e-12 / surface.model.length_scale ** 2
    return config.c_cfl * min(ds * ds / 4.0, config.cap / (a2max + abs(surface.model.curvature) + eps))


def _velocity(surface, config, fields):
    V = fields.H
    if config.tangential > 0 and fields.tangential is not None:
        V = V + config.tangential * fields.tangential
    if _uses_filter(surface, config):
        V = _filter(surface, V, config.filter_floor)
    return V


def step(surface: SurfaceGrid, dt: float, config: FlowConfig | None = None,
         fields: FlowFields | None = None) -> SurfaceGrid:
    """One explicit Euler step followed by retraction.

    Raises
    ------
    NumericalFailure
        Non-positive ``dt`` or non-finite update (with the site).
    """
    config = config or FlowConfig()
    if not dt > 0:
        raise NumericalFailure("time step must be positive")
    if fields is None:
        fields = flow_fields(surface, tangential=config.tangential > 0)
    V = _velocity(surface, config, fields)
    Y = surface.points + dt * V
    new = retract(surface.model, Y)
    return surface.with_points(new, t=surface.t + dt, validate=False)


@dataclass
class Extinction:
    time: float
    residual: float
    slope: float
    points: int


def extinction_estimate(trajectory, n_last: int = 20) -> Extinction:
    """Fit ``1/|H|^2_max`` linearly in ``t`` over the last records; return the zero.

    Parameters
    ----------
    trajectory : FlowTrajectory or tuple of arrays ``(t, H_max)``

    Raises
    ------
    EstimationError
        Fewer than ``n_last`` records, or ``|H|_max`` not strictly growing
        over them.
    """
    if isinstance(trajectory, FlowTrajectory):
        t = np.array([r.t for r in trajectory.records])
        h = np.array([r.H_max for r in trajectory.records])
    else:
        t, h = (np.asarray(x, dtype=float) for x in trajectory)
    if len(t) < n_last:
        raise EstimationError(f"need at least {n_last} records, have {len(t)}")
    t, h = t[-n_last:], h[-n_last:]
    if not np.all(np.diff(h) > 0):
        raise EstimationError("|H|_max is not growing over the fitted records")
    y = 1.0 / h ** 2
    A = np.stack([t, np.ones_like(t)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    slope, icpt = coef
    if not slope < 0:
        raise EstimationError("no blow-up trend in 1/|H|^2")
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return Extinction(time=float(-icpt / slope), residual=resid, slope=float(slope), points=len(t))


@dataclass
class FlowTrajectory:
    """Time series of diagnostics and the reason the run ended."""

    records: list
    stop_reason: StopReason
    steps: int
    final: SurfaceGrid | None = None
    events: list = field(default_factory=list)
    extinction: Extinction | None = None
    failure: str | None = None
    h_stop: float = math.nan

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def _default_h_stop(surface, fields):
    rows = surface.interior_rows()
    return 25.0 * max(float(np.mean(fields.H_norm[rows])), 1.0 / surface.model.length_scale)


def run(initial: SurfaceGrid, config: FlowConfig | None = None, callback=None) -> FlowTrajectory:
    """Integrate until a round point, stationarity, the budget, or a failure.

    ``PinchingLost`` events (the maximum of ``Q``, or of a monitored ``Q``,
    turning nonnegative after being negative) are recorded in ``events`` and
    do not stop the run. ``callback(diagnostics, surface)`` is called for
    every recorded row.
    """
    config = config or FlowConfig()
    model = initial.model
    params = config.pinching(model.curvature)
    L = model.length_scale
    th = tol_h(model)
    surface = initial
    records: list[Diagnostics] = []
    events: list = []
    rows = surface.interior_rows()
    last_q = {}

    def record(s, n, dt):
        d = global_diagnostics(s, params, lp_list=config.lp, monitors=config.monitors, step=n, dt=dt)
        if records and not d.t > records[-1].t:
            return d
        records.append(d)
        qs = {params.k: d.Q_max}
        qs.update({k: m["Q_max"] for k, m in d.monitors.items()})
        for k, q in qs.items():
            prev = last_q.get(k)
            if prev is not None and prev < 0 <= q:
                events.append({"type": StopReason.PINCHING_LOST.value, "k": k, "t": d.t, "step": n,
                               "H_max": d.H_max, "H_growth": d.H_max / records[0].H_max})
            last_q[k] = q
        if callback is not None:
            callback(d, s)
        return d

    try:
        fields = flow_fields(surface, tangential=config.tangential > 0)
        h_stop = config.h_stop if config.h_stop is not None else _default_h_stop(surface, fields)
        record(surface, 0, math.nan)
        quiet = 0
        n = 0
        reason = StopReason.MAX_TIME
        while True:
            if n >= config.max_steps or surface.t >= config.max_time:
                reason = StopReason.MAX_TIME
                break
            dt = adaptive_dt(surface, config, fields)
            dt = min(dt, config.max_time - surface.t)
            new = step(surface, dt, config, fields)
            n += 1
            diff = new.points - surface.points
            disp = float(np.max(np.sqrt(np.abs(np.sum(diff * diff * model.signature, axis=-1))))) / dt / L
            surface = new
            fields = flow_fields(surface, tangential=config.tangential > 0)
            if not np.all(np.isfinite(fields.A2)):
                bad = np.unravel_index(int(np.argmax(~np.isfinite(fields.A2))), fields.A2.shape)
                raise NumericalFailure("non-finite curvature", site=bad, step=n)
            quiet = quiet + 1 if disp < config.stationary_tol else 0
            Hin = fields.H_norm[rows]
            hmax = float(np.max(Hin))
            round_point = False
            if hmax >= h_stop:
                ok = Hin >= th
                ratio = np.max((fields.A2[rows][ok] - 0.5 * Hin[ok] ** 2) / Hin[ok] ** 2)
                round_point = ratio <= config.eps_round
                if not round_point and hmax >= 10 * h_stop:
                    raise NumericalFailure("curvature blew up without becoming round", step=n)
            if n % config.cadence == 0 or round_point or quiet >= config.stationary_window:
                record(surface, n, dt)
            if round_point:
                reason = StopReason.ROUND_POINT
                break
            if quiet >= config.stationary_window:
                reason = StopReason.STATIONARY
                break
        if records[-1].step != n:
            record(surface, n, dt if n else math.nan)
        traj = FlowTrajectory(records, reason, n, surface, events, h_stop=h_stop)
    except (NumericalFailure, GeometryError) as exc:
        traj = FlowTrajectory(records, StopReason.NUMERICAL_FAILURE, len(records), surface, events,
                              failure=str(exc))
        return traj
    if traj.stop_reason is StopReason.ROUND_POINT:
        try:
            traj.extinction = extinction_estimate(traj)
        except EstimationError:
            traj.extinction = None
    return traj


# --------------------------------------------------------------------------
# closed-form oracles


@dataclass(frozen=True)
class GeodesicSphereODE:
    """Umbilic solution of the flow starting from a geodesic sphere.

    Euclidean: ``r(t) = sqrt(r0^2 - 4t)``. Sphere:
    ``cos(rho/R) = cos(rho0/R) exp(2t/R^2)``. Hyperbolic:
    ``cosh(rho/R) = cosh(rho0/R) exp(-2t/R^2)``.
    """

    model: AmbientModel
    rho0: float

    @property
    def extinction(self) -> float:
        m, r0 = self.model, self.rho0
        if m.kind is ModelKind.EUCLIDEAN:
            return r0 * r0 / 4.0
        R = m.radius
        if m.kind is ModelKind.SPHERE:
            return 0.5 * R * R * math.log(1.0 / math.cos(r0 / R))
        return 0.5 * R * R * math.log(math.cosh(r0 / R))

    def rho(self, t):
        t = np.asarray(t, dtype=float)
        m, r0 = self.model, self.rho0
        with np.errstate(invalid="ignore"):
            if m.kind is ModelKind.EUCLIDEAN:
                out = np.sqrt(np.maximum(r0 * r0 - 4 * t, 0.0))
            else:
                R = m.radius
                if m.kind is ModelKind.SPHERE:
                    out = R * np.arccos(np.minimum(math.cos(r0 / R) * np.exp(2 * t / R ** 2), 1.0))
                else:
                    out = R * np.arccosh(np.maximum(math.cosh(r0 / R) * np.exp(-2 * t / R ** 2), 1.0))
        return out[()] if out.ndim == 0 else out

    def mean_curvature(self, t):
        """``|H|`` of the umbilic solution: ``2/r``, ``(2/R) cot(rho/R)``, ``(2/R) coth(rho/R)``."""
        rho = np.asarray(self.rho(t))
        m = self.model
        with np.errstate(divide="ignore"):
            if m.kind is ModelKind.EUCLIDEAN:
                return 2.0 / rho
            R = m.radius
            if m.kind is ModelKind.SPHERE:
                return 2.0 / (R * np.tan(rho / R))
            return 2.0 / (R * np.tanh(rho / R))

    def trace_quantity(self, rho):
        """Quantity that evolves exponentially: ``cos(rho/R)`` or ``cosh(rho/R)`` (``rho^2`` flat)."""
        m = self.model
        rho = np.asarray(rho, dtype=float)
        if m.kind is ModelKind.EUCLIDEAN:
            return rho ** 2
        R = m.radius
        return np.cos(rho / R) if m.kind is ModelKind.SPHERE else np.cosh(rho / R)

    def sample(self, horizon: float | None = None, n: int = 101):
        horizon = self.extinction if horizon is None else min(horizon, self.extinction)
        t = np.linspace(0.0, horizon, n)
        return t, self.rho(t)


def geodesic_sphere_ode(model: AmbientModel, rho0: float, horizon: float | None = None, n: int = 101):
    """Closed-form radius of a shrinking geodesic sphere.

    Returns
    -------
    oracle : GeodesicSphereODE
    t, rho : ndarray
        ``n`` samples on ``[0, min(horizon, extinction)]``.

    Raises
    ------
    DomainError
        ``rho0`` not in ``(0, pi R/2)`` (sphere) or not positive.
    """
    rho0 = float(rho0)
    if not rho0 > 0 or not math.isfinite(rho0):
        raise DomainError("initial radius must be positive")
    if model.kind is ModelKind.SPHERE and not rho0 < 0.5 * math.pi * model.radius:
        raise DomainError("geodesic sphere radius must be below pi R / 2")
    oracle = GeodesicSphereODE(model, rho0)
    t, rho = oracle.sample(horizon, n)
    return oracle, t, rho
