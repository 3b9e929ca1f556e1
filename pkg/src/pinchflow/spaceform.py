"""Ambient space-form models.

Three simply connected constant-curvature 4-manifolds are supported, each
realised concretely inside a flat vector space so that points and tangent
vectors are plain ``numpy`` arrays:

* ``EUCLIDEAN``: :math:`\\mathbb{R}^4` itself, curvature 0.
* ``SPHERE``: the round sphere of radius :math:`R = 1/\\sqrt{\\bar K}` in
  :math:`\\mathbb{R}^5`.
* ``HYPERBOLIC``: the upper sheet of the hyperboloid
  :math:`\\langle x, x\\rangle_L = -R^2`, :math:`x_0 > 0`, in Minkowski space
  :math:`\\mathbb{R}^{4,1}` with :math:`\\langle u, v\\rangle_L = -u_0 v_0 + \\sum_{i\\ge1} u_i v_i`.

All functions are vectorised over leading axes: a "point" may be an array of
shape ``(..., D)`` where ``D`` is the embedding dimension of the model.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GeometryError, NumericalFailure

__all__ = [
    "ModelKind",
    "AmbientModel",
    "euclidean",
    "sphere",
    "hyperbolic",
    "metric_inner",
    "project_to_model_tangent",
    "retract",
    "geodesic_distance",
    "exp_map",
    "membership_residual",
    "check_on_model",
    "check_tangent",
    "base_point",
]


class ModelKind(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    SPHERE = "sphere"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class AmbientModel:
    """A space form together with its concrete embedding.

    Parameters
    ----------
    kind : ModelKind
        Which of the three models.
    curvature : float
        Sectional curvature :math:`\\bar K`; must be 0 for ``EUCLIDEAN``,
        positive for ``SPHERE`` and negative for ``HYPERBOLIC``.
    """

    kind: ModelKind
    curvature: float = 0.0

    def __post_init__(self):
        kind = ModelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        kb = float(self.curvature)
        object.__setattr__(self, "curvature", kb)
        if not math.isfinite(kb):
            raise DomainError("curvature must be finite")
        if kind is ModelKind.EUCLIDEAN and kb != 0.0:
            raise DomainError("Euclidean model requires curvature 0")
        if kind is ModelKind.SPHERE and not kb > 0.0:
            raise DomainError("sphere model requires positive curvature")
        if kind is ModelKind.HYPERBOLIC and not kb < 0.0:
            raise DomainError("hyperbolic model requires negative curvature")

    @property
    def radius(self) -> float:
        """``1/sqrt(|K|)`` for curved models, ``inf`` for the flat one."""
        if self.kind is ModelKind.EUCLIDEAN:
            return math.inf
        return 1.0 / math.sqrt(abs(self.curvature))

    @property
    def length_scale(self) -> float:
        """Characteristic length: R for curved models and 1 for Euclidean."""
        return 1.0 if self.kind is ModelKind.EUCLIDEAN else self.radius

    @property
    def dim(self) -> int:
        """Embedding dimension (4 or 5)."""
        return 4 if self.kind is ModelKind.EUCLIDEAN else 5

    @property
    def signature(self) -> np.ndarray:
        """Diagonal of the ambient bilinear form."""
        sig = np.ones(self.dim)
        if self.kind is ModelKind.HYPERBOLIC:
            sig[0] = -1.0
        return sig

    @property
    def membership_tol(self) -> float:
        return 1e-9 * self.length_scale

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "curvature": self.curvature}


def euclidean() -> AmbientModel:
    return AmbientModel(ModelKind.EUCLIDEAN, 0.0)


def sphere(curvature: float = 1.0) -> AmbientModel:
    return AmbientModel(ModelKind.SPHERE, curvature)


def hyperbolic(curvature: float = -1.0) -> AmbientModel:
    return AmbientModel(ModelKind.HYPERBOLIC, curvature)


def _as_vec(model: AmbientModel, v, name="vector") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim == 0 or v.shape[-1] != model.dim:
        raise DomainError(
            f"{name} has trailing dimension {v.shape[-1] if v.ndim else 0}, "
            f"model expects {model.dim}"
        )
    return v


def metric_inner(model: AmbientModel, u, v) -> np.ndarray:
    """Ambient bilinear form of the model (Euclidean or Minkowski).

    Parameters
    ----------
    model : AmbientModel
    u, v : array_like, shape (..., D)

    Returns
    -------
    ndarray or float
        Inner products broadcast over leading axes.
    """
    u = _as_vec(model, u, "u")
    v = _as_vec(model, v, "v")
    out = np.einsum("...i,...i->...", u * model.signature, v)
    return out[()] if out.ndim == 0 else out


def membership_residual(model: AmbientModel, x) -> np.ndarray:
    """Signed defect of the membership equation, in units of length.

    For the sphere this is ``|x| - R``; for the hyperboloid
    ``sqrt(-<x,x>_L) - R`` (``inf`` where the point is not timelike or lies
    on the lower sheet); zero for Euclidean space.
    """
    x = _as_vec(model, x, "x")
    if model.kind is ModelKind.EUCLIDEAN:
        return np.zeros(x.shape[:-1])[()]
    q = metric_inner(model, x, x)
    R = model.radius
    if model.kind is ModelKind.SPHERE:
        return np.sqrt(q) - R
    q = np.asarray(q)
    out = np.full(q.shape, np.inf)
    ok = (q < 0) & (x[..., 0] > 0)
    out[ok] = np.sqrt(-q[ok]) - R
    return out[()]


def check_on_model(model: AmbientModel, x, tol: float | None = None) -> None:
    """Raise :class:`GeometryError` unless every point of ``x`` is on the model."""
    if model.kind is ModelKind.EUCLIDEAN:
        _as_vec(model, x, "x")
        return
    tol = model.membership_tol if tol is None else tol
    res = np.abs(np.asarray(membership_residual(model, x)))
    if res.ndim == 0:
        if not res <= tol:
            raise GeometryError(f"point off model by {float(res):.3e}")
        return
    bad = ~(res <= tol)
    if bad.any():
        idx = np.unravel_index(int(np.argmax(np.where(bad, np.nan_to_num(res, posinf=1e300), -1))), res.shape)
        raise GeometryError(f"point off model by {float(res[idx]):.3e}", site=idx if len(idx) == 2 else None)


def check_tangent(model: AmbientModel, x, v, rtol: float = 1e-12) -> bool:
    """True if ``<x, v> = 0`` to relative tolerance ``rtol`` at every site."""
    if model.kind is ModelKind.EUCLIDEAN:
        return True
    x = _as_vec(model, x)
    v = _as_vec(model, v)
    scale = np.linalg.norm(x, axis=-1) * np.linalg.norm(v, axis=-1)
    return bool(np.all(np.abs(metric_inner(model, x, v)) <= rtol * np.maximum(scale, 1e-300)))


def project_to_model_tangent(model: AmbientModel, x, v, check: bool = True) -> np.ndarray:
    """Orthogonal projection of an ambient vector onto ``T_x`` of the model.

    Sphere: ``v - (<x,v>/R^2) x``. Hyperboloid: ``v + (<x,v>_L/R^2) x``.
    Euclidean: identity.
    """
    x = _as_vec(model, x, "x")
    v = _as_vec(model, v, "v")
    if model.kind is ModelKind.EUCLIDEAN:
        return np.array(v, copy=True)
    if check:
        check_on_model(model, x)
    R2 = model.radius ** 2
    s = metric_inner(model, x, v) / R2
    s = np.asarray(s)[..., None]
    if model.kind is ModelKind.SPHERE:
        return v - s * x
    return v + s * x


def retract(model: AmbientModel, y) -> np.ndarray:
    """Map a nearby raw point back onto the model by radial normalisation.

    Raises
    ------
    NumericalFailure
        If ``y`` is zero (sphere) or not a future timelike vector (hyperboloid),
        or contains non-finite entries. The offending site is reported.
    """
    y = _as_vec(model, y, "y")
    finite = np.all(np.isfinite(y), axis=-1)
    if not np.all(finite):
        raise NumericalFailure("non-finite point in retraction", site=_first_bad(~finite))
    if model.kind is ModelKind.EUCLIDEAN:
        return np.array(y, copy=True)
    R = model.radius
    q = np.asarray(metric_inner(model, y, y))
    if model.kind is ModelKind.SPHERE:
        bad = ~(q > 0)
        if bad.any():
            raise NumericalFailure("cannot retract the zero vector onto the sphere", site=_first_bad(bad))
        return R * y / np.sqrt(q)[..., None]
    bad = ~((q < 0) & (y[..., 0] > 0))
    if bad.any():
        raise NumericalFailure("cannot retract a non-timelike vector onto the hyperboloid", site=_first_bad(bad))
    return R * y / np.sqrt(-q)[..., None]


def _first_bad(mask):
    mask = np.asarray(mask)
    if mask.ndim == 0:
        return None
    idx = np.unravel_index(int(np.argmax(mask)), mask.shape)
    return idx if len(idx) == 2 else None


def geodesic_distance(model: AmbientModel, x, y, check: bool = True) -> np.ndarray:
    """Intrinsic distance between points of the model.

    The arccos / arccosh arguments are clamped to ``[-1, 1]`` and ``[1, inf)``
    so that rounding at coincident or antipodal points cannot produce NaN.
    """
    x = _as_vec(model, x, "x")
    y = _as_vec(model, y, "y")
    if model.kind is ModelKind.EUCLIDEAN:
        out = np.linalg.norm(x - y, axis=-1)
        return out[()] if np.ndim(out) == 0 else out
    if check:
        check_on_model(model, x)
        check_on_model(model, y)
    R = model.radius
    q = np.asarray(metric_inner(model, x, y)) / R ** 2
    if model.kind is ModelKind.SPHERE:
        out = R * np.arccos(np.clip(q, -1.0, 1.0))
    else:
        out = R * np.arccosh(np.maximum(-q, 1.0))
    return out[()] if np.ndim(out) == 0 else out


def base_point(model: AmbientModel) -> np.ndarray:
    """Distinguished point used to build presets: origin, ``R e_0``."""
    p = np.zeros(model.dim)
    if model.kind is not ModelKind.EUCLIDEAN:
        p[0] = model.radius
    return p


def exp_map(model: AmbientModel, x, v) -> np.ndarray:
    """Riemannian exponential map at ``x`` applied to tangent vector ``v``."""
    x = _as_vec(model, x, "x")
    v = _as_vec(model, v, "v")
    if model.kind is ModelKind.EUCLIDEAN:
        return x + v
    R = model.radius
    nv2 = np.asarray(metric_inner(model, v, v))
    nv = np.sqrt(np.maximum(nv2, 0.0))[..., None]
    s = nv / R
    with np.errstate(invalid="ignore", divide="ignore"):
        if model.kind is ModelKind.SPHERE:
            ratio = np.where(s > 0, R * np.sin(s) / np.where(s > 0, nv, 1.0), 1.0)
            return np.cos(s) * x + ratio * v
        ratio = np.where(s > 0, R * np.sinh(s) / np.where(s > 0, nv, 1.0), 1.0)
        return np.cosh(s) * x + ratio * v
