"""Pinching functionals.

For a pinching exponent :math:`k \\in (1/2, 29/40]` the constants are

.. math::
    \\gamma(k) = \\begin{cases} 1 - \\tfrac32 k, & k \\le 2/3 \\\\
                                1 - \\tfrac43 k, & k > 2/3 \\end{cases},
    \\qquad \\alpha = k - \\tfrac12,
    \\qquad \\beta = \\begin{cases} 4k - 2, & \\bar K \\ge 0 \\\\
                                   4 - 2/k, & \\bar K < 0 \\end{cases}

and the pointwise functional is
:math:`Q = |A|^2 + 2\\gamma|K^\\perp| - k|H|^2 - \\beta\\bar K`.
The decay quantity is :math:`f_\\sigma = (|\\mathring A|^2 + 2\\gamma|K^\\perp|)/
(\\alpha|H|^2 + \\beta\\bar K)^{1-\\sigma}` for :math:`\\bar K \\ge 0` and the same
numerator over :math:`|H|^{2(1-\\sigma)}` for :math:`\\bar K < 0`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "K_MAX",
    "PinchingParams",
    "gamma_of_k",
    "beta_of",
    "check_k",
    "pinching_q",
    "f_sigma",
    "FSigma",
    "epsilon_constant",
    "epsilon_bound_check",
    "lp_norm",
    "monitor_params",
]

K_MAX = 29.0 / 40.0
MONITOR_GAMMA_OFFSET = 0.01


def check_k(k: float) -> float:
    k = float(k)
    if not (0.5 < k <= K_MAX):
        raise DomainError(f"k outside (1/2, 29/40]: {k}")
    return k


def gamma_of_k(k: float) -> float:
    """Branch value of gamma; ``k = 2/3`` belongs to the first branch."""
    k = check_k(k)
    return 1.0 - 1.5 * k if k <= 2.0 / 3.0 else 1.0 - 4.0 * k / 3.0


def beta_of(k: float, kbar: float) -> float:
    """``4k - 2`` for nonnegative ambient curvature, ``4 - 2/k`` otherwise."""
    k = check_k(k)
    return 4.0 * k - 2.0 if kbar >= 0 else 4.0 - 2.0 / k


@dataclass(frozen=True)
class PinchingParams:
    """Constants of the pinching condition for one ``k`` and one ambient sign.

    Parameters
    ----------
    k : float
        Pinching exponent in ``(1/2, 29/40]``.
    kbar : float
        Ambient curvature; only its sign matters (it selects beta).
    sigma : float
        Exponent of the decay quantity, in ``[0, 1]``.
    gamma_offset : float
        Amount subtracted from the branch gamma. Used by the decay monitor on
        the second branch, where the gradient margin would otherwise be 0.
    """

    k: float
    kbar: float = 0.0
    sigma: float = 0.05
    gamma_offset: float = 0.0

    def __post_init__(self):
        check_k(self.k)
        if not 0.0 <= self.sigma <= 1.0:
            raise DomainError(f"sigma outside [0, 1]: {self.sigma}")
        if not 0.0 <= self.gamma_offset < 1.0:
            raise DomainError("gamma offset out of range")

    @property
    def gamma(self) -> float:
        return gamma_of_k(self.k) - self.gamma_offset

    @property
    def beta(self) -> float:
        return beta_of(self.k, self.kbar)

    @property
    def alpha(self) -> float:
        return self.k - 0.5

    @property
    def eps_grad(self) -> float:
        """Gradient margin ``1 - 4k/3 - gamma``."""
        return 1.0 - 4.0 * self.k / 3.0 - self.gamma

    def to_dict(self) -> dict:
        return {"k": self.k, "gamma": self.gamma, "beta": self.beta, "alpha": self.alpha,
                "sigma": self.sigma, "eps_grad": self.eps_grad}


def monitor_params(k: float, kbar: float, sigma: float = 0.05) -> PinchingParams:
    """Parameters for decay monitoring.

    On the second gamma branch the gradient margin vanishes identically; the
    monitor then lowers gamma by 0.01, which keeps the pinching hypothesis
    (a smaller gamma weakens the condition's left side) and makes the margin
    ``0.01``.
    """
    base = PinchingParams(k, kbar, sigma)
    if base.eps_grad <= 1e-14:
        return PinchingParams(k, kbar, sigma, MONITOR_GAMMA_OFFSET)
    return base


def _fields(shape):
    return (np.asarray(shape.A2), np.asarray(shape.Ao2), np.asarray(shape.H_norm),
            np.abs(np.asarray(shape.kperp)))


def pinching_q(shape, params: PinchingParams, kbar: float | None = None):
    """``|A|^2 + 2 gamma |K_perp| - k|H|^2 - beta K_bar`` at every site."""
    kbar = params.kbar if kbar is None else kbar
    A2, _, Hn, kp = _fields(shape)
    out = A2 + 2 * params.gamma * kp - params.k * Hn ** 2 - params.beta * kbar
    return out[()] if np.ndim(out) == 0 else out


@dataclass
class FSigma:
    """Values of the decay quantity; NaN where the denominator is not positive."""

    values: np.ndarray
    undefined: int

    @property
    def max(self) -> float:
        v = np.asarray(self.values)
        return float(np.nanmax(v)) if np.any(np.isfinite(v)) else math.nan


def f_sigma(shape, params: PinchingParams, kbar: float | None = None, tol_h: float = 1e-8) -> FSigma:
    """Decay quantity, selecting the variant by the sign of ``K_bar``."""
    kbar = params.kbar if kbar is None else kbar
    _, Ao2, Hn, kp = _fields(shape)
    num = Ao2 + 2 * params.gamma * kp
    if kbar >= 0:
        den = params.alpha * Hn ** 2 + params.beta * kbar
        ok = den > 0
        base = np.where(ok, den, 1.0)
    else:
        ok = Hn > tol_h
        base = np.where(ok, Hn ** 2, 1.0)
    vals = np.where(ok, num / base ** (1.0 - params.sigma), np.nan)
    return FSigma(values=vals[()] if vals.ndim == 0 else vals, undefined=int(np.size(ok) - np.count_nonzero(ok)))


def epsilon_constant(params: PinchingParams, kbar: float) -> float:
    """Constant of the pointwise lower bound.

    ``2(1-k)/(1+gamma)`` against ``alpha|H|^2 + beta K_bar`` when
    ``K_bar >= 0``; ``(1-k)/(2(1+gamma))`` against ``|H|^2`` when ``K_bar < 0``.
    """
    if kbar >= 0:
        return 2 * (1 - params.k) / (1 + params.gamma)
    return (1 - params.k) / (2 * (1 + params.gamma))


def epsilon_bound_check(shape, params: PinchingParams, kbar: float | None = None):
    """Residual ``2K|Ao|^2 - 2K_perp^2 - eps (|Ao|^2 + 2 gamma|K_perp|) D``.

    ``D`` is ``alpha|H|^2 + beta K_bar`` (``K_bar >= 0``) or ``|H|^2``. Sites
    where the pinching condition fails (``Q > 0``) are skipped and returned as
    NaN. ``K`` is taken from the Gauss equation.
    """
    kbar = params.kbar if kbar is None else kbar
    _, Ao2, Hn, kp = _fields(shape)
    K = kbar + 0.25 * Hn ** 2 - 0.5 * Ao2
    lhs = 2 * K * Ao2 - 2 * kp ** 2
    D = params.alpha * Hn ** 2 + params.beta * kbar if kbar >= 0 else Hn ** 2
    res = lhs - epsilon_constant(params, kbar) * (Ao2 + 2 * params.gamma * kp) * D
    q = pinching_q(shape, params, kbar)
    out = np.where(np.asarray(q) <= 0, res, np.nan)
    return out[()] if out.ndim == 0 else out


def lp_norm(surface, field, p: float, shape=None) -> float:
    """``(integral of field**p dmu)**(1/p)`` with midpoint area quadrature.

    Parameters
    ----------
    surface : SurfaceGrid
    field : ndarray, shape (n_u, n_v)
    p : float
        Exponent ``>= 1``.
    shape : ShapeData, optional
        Reused for the area element if given.
    """
    p = float(p)
    if not p >= 1:
        raise DomainError("p must be at least 1")
    f = np.asarray(field, dtype=float)
    if not np.all(np.isfinite(f)):
        raise DomainError("field must be finite")
    if np.any(f < 0) and not float(p).is_integer():
        raise DomainError("negative field values need an integer exponent")
    if shape is None:
        from .geometry import fundamental_forms

        shape = fundamental_forms(surface)
    dA = np.sqrt(shape.det_g) * surface.du * surface.dv
    integral = float(np.sum(f ** p * dA))
    if p == 1:
        return integral
    if integral < 0:
        raise DomainError("integral of an odd power is negative")
    return integral ** (1.0 / p)
