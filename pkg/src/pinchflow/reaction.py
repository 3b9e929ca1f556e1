"""Reaction terms of the evolution of the pinching functional.

At a point where the tangent frame diagonalises the ``H``-direction
component of the second fundamental form,

.. math::
    A_3 = \\begin{pmatrix} h/2 + a & 0 \\\\ 0 & h/2 - a \\end{pmatrix}, \\qquad
    A_4 = \\begin{pmatrix} b & c \\\\ c & -b \\end{pmatrix}, \\qquad h = |H|,

so :math:`|\\mathring A|^2 = 2a^2 + 2b^2 + 2c^2` and :math:`K^\\perp = 2ac`. The
zeroth-order part of :math:`(\\partial_t - \\Delta) Q` is

.. math::
    2R_1 - 2kR_2 + 2\\gamma R_3 + 4\\bar K|H|^2 - 4\\bar K|A|^2
    - 4k\\bar K|H|^2 - 8\\gamma\\bar K|K^\\perp|

with :math:`R_2 = h^2(h^2/2 + 2a^2)` and :math:`R_1, R_3` given by the chosen
:class:`Convention`. At a maximum of ``Q`` with ``Q = 0`` the constraint
:math:`(k - 1/2)|H|^2 = |\\mathring A|^2 + 2\\gamma|K^\\perp| - \\beta\\bar K`
eliminates ``|H|`` and the reaction becomes a quartic form in ``(a, b, c)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .pinching import PinchingParams, check_k, gamma_of_k

__all__ = [
    "Convention",
    "hsq_from_constraint",
    "reaction_raw",
    "reaction_decomposed",
    "reaction_terms",
    "gradient_coefficient",
    "lili_check",
    "ScanSampler",
    "ScanReport",
    "scan",
]


class Convention(str, enum.Enum):
    """Which form of ``R_1`` and ``R_3`` to use.

    ``STANDARD``
        ``R_1 = sum_ab <A_a, A_b>^2 + |Rm_perp|^2`` and
        ``R_3 = |K_perp| (|A|^2 + 2|Ao|^2)``. Both agree with a direct
        computation from the evolution of ``h_ij`` (the shrinking sphere pins
        ``R_1``; the normal curvature evolution pins ``R_3``).
    ``PRINTED``
        ``R_1 = 2 sum_ab <A_a, A_b>^2 + |Rm_perp|^2`` and
        ``R_3 = |K_perp| (|A|^2 + 2|Ao|^2 - 2b^2)``.
    """

    STANDARD = "StandardAB"
    PRINTED = "PaperPrinted"


def _conv(convention) -> Convention:
    if isinstance(convention, Convention):
        return convention
    for c in Convention:
        if convention in (c.value, c.name, c.value.lower(), c.name.lower()):
            return c
    raise DomainError(f"unknown convention {convention!r}")


def hsq_from_constraint(a, b, c, kbar, params: PinchingParams):
    """``|H|^2`` that puts the configuration on ``Q = 0``.

    Negative results mean the configuration is not admissible; they are
    returned as is (callers test ``>= 0``).
    """
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    ao2 = 2 * (a * a + b * b + c * c)
    out = (ao2 + 2 * params.gamma * np.abs(2 * a * c) - params.beta * kbar) / params.alpha
    return out[()] if out.ndim == 0 else out


@dataclass
class ReactionTerms:
    R1: np.ndarray
    R2: np.ndarray
    R3: np.ndarray
    A2: np.ndarray
    kperp: np.ndarray


def reaction_terms(a, b, c, hsq, convention=Convention.STANDARD) -> ReactionTerms:
    """``R_1, R_2, R_3`` and ``|A|^2, |K_perp|`` for an adapted configuration."""
    conv = _conv(convention)
    a, b, c, hsq = (np.asarray(x, dtype=float) for x in (a, b, c, hsq))
    if np.any(hsq < 0):
        raise DomainError("|H|^2 must be nonnegative")
    p33 = 0.5 * hsq + 2 * a * a
    p44 = 2 * b * b + 2 * c * c
    p34 = 2 * a * b
    gram = p33 ** 2 + 2 * p34 ** 2 + p44 ** 2
    kp = np.abs(2 * a * c)
    rm = 4 * kp ** 2
    ao2 = 2 * (a * a + b * b + c * c)
    A2 = 0.5 * hsq + ao2
    R2 = hsq * p33
    if conv is Convention.STANDARD:
        R1 = gram + rm
        R3 = kp * (A2 + 2 * ao2)
    else:
        R1 = 2 * gram + rm
        R3 = kp * (A2 + 2 * ao2 - 2 * b * b)
    return ReactionTerms(R1, R2, R3, A2, kp)


def reaction_raw(a, b, c, hsq, kbar, params: PinchingParams, convention=Convention.STANDARD):
    """Assembled reaction term (see module docstring).

    With ``hsq = 0`` this is the reaction on the ``|H| = 0`` branch.
    """
    t = reaction_terms(a, b, c, hsq, convention)
    k, g = params.k, params.gamma
    hsq = np.asarray(hsq, dtype=float)
    out = (2 * t.R1 - 2 * k * t.R2 + 2 * g * t.R3 + 4 * kbar * hsq - 4 * kbar * t.A2
           - 4 * k * kbar * hsq - 8 * g * kbar * t.kperp)
    return out[()] if np.ndim(out) == 0 else out


def reaction_decomposed(a, b, c, kbar, params: PinchingParams, parts: bool = False):
    """Reaction on ``Q = 0`` written as five ``K_bar``-free terms plus
    ``K_bar`` and ``K_bar**2`` corrections.

    Parameters
    ----------
    parts : bool
        Return a dict with ``T1..T5``, ``kbar1``, ``kbar2`` and ``total``.
    """
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    al, g, be = params.alpha, params.gamma, params.beta
    kp = np.abs(2 * a * c)
    ao1 = 2 * a * a
    ao2p = 2 * b * b + 2 * c * c
    ao = ao1 + ao2p
    T1 = (2 - 1 / al) * 4 * a * a * b * b
    T2 = (2 - 1 / al) * g * kp * ao1
    T3 = (6 - 3 / al) * g * kp * ao2p
    T4 = (2 - 1 / al) * ao2p ** 2
    T5 = (6 - (1 + 2 * g * g) / al) * kp ** 2
    c1 = 2 * ao1 * be + (2 * ao * be - ao1 * be + 3 * g * kp * be) / al - 8 * ao - 16 * g * kp
    c2 = -(be * be / al - 4 * be)
    total = T1 + T2 + T3 + T4 + T5 + c1 * kbar + c2 * kbar ** 2
    if parts:
        return {"T1": T1, "T2": T2, "T3": T3, "T4": T4, "T5": T5,
                "kbar1": c1 * kbar, "kbar2": c2 * kbar ** 2, "total": total}
    return total[()] if np.ndim(total) == 0 else total


def gradient_coefficient(params: PinchingParams | float) -> float:
    """Coefficient ``-2 + 2 gamma + 8k/3`` of ``|nabla A|^2``."""
    if isinstance(params, PinchingParams):
        k, g = params.k, params.gamma
    else:
        k = check_k(params)
        g = gamma_of_k(k)
    return -2.0 + 2.0 * g + 8.0 * k / 3.0


def lili_check(a, b, c, convention=Convention.STANDARD):
    """``3|A|^4 - 2 R_1`` for a traceless configuration (``|H| = 0``)."""
    t = reaction_terms(a, b, c, 0.0, convention)
    out = 3 * t.A2 ** 2 - 2 * t.R1
    return out[()] if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# sampling certificate


@dataclass(frozen=True)
class ScanSampler:
    """Sampling plan for :func:`scan`.

    Attributes
    ----------
    count : int
        Total number of configurations (grid and boundary points included).
    seed : int
    scales : tuple of float
        Magnitudes in units of ``sqrt(|K_bar|)``; unused when ``K_bar = 0``
        because the reaction is then homogeneous of degree 4 and samples are
        normalised to ``|Ao|^2 = 1``.
    grid_per_axis : int
        Resolution of the deterministic angular grid.
    chunk : int
        Random samples per seeded substream.
    tolerance : float
        Certification threshold on the normalised reaction.
    max_violations : int
        Number of worst violations kept in the report.
    """

    count: int = 1_000_000
    seed: int = 42
    scales: tuple = (0.1, 1.0, 10.0)
    grid_per_axis: int = 24
    chunk: int = 1 << 16
    tolerance: float = 1e-10
    max_violations: int = 20

    def __post_init__(self):
        if int(self.count) < 1:
            raise DomainError("sample count must be at least 1")
        if not self.scales or any(not s > 0 for s in self.scales):
            raise DomainError("scales must be positive")


@dataclass
class ScanReport:
    """Result of a sampling certificate.

    ``max_reaction`` is the largest reaction divided by
    ``(|Ao|^2 + |K_bar|)**2``; ``max_discrepancy`` is the largest
    ``|raw - decomposed|`` under the same normalisation.
    """

    k: float
    kbar: float
    convention: str
    samples: int
    admissible: int
    max_reaction: float
    argmax: dict | None
    max_discrepancy: float
    discrepancy_argmax: dict | None
    tolerance: float
    violation_count: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.violation_count == 0

    def to_dict(self) -> dict:
        return {
            "k": self.k, "kbar": self.kbar, "convention": self.convention,
            "samples": self.samples, "admissible": self.admissible,
            "max_reaction": self.max_reaction, "argmax": self.argmax,
            "max_discrepancy": self.max_discrepancy,
            "discrepancy_argmax": self.discrepancy_argmax,
            "tolerance": self.tolerance, "violation_count": self.violation_count,
            "violations": self.violations,
        }


def _unit_directions(n):
    """Deterministic directions on the unit sphere of R^3 (latitude grid)."""
    th = (np.arange(n) + 0.5) * math.pi / n
    ph = np.arange(2 * n) * math.pi / n
    T, P = np.meshgrid(th, ph, indexing="ij")
    d = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], -1).reshape(-1, 3)
    # coordinate planes and diagonals hit the equality cases of the quadratic forms
    extra = []
    for v in ((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 0, 1), (1, 0, -1), (1, 1, 0), (0, 1, 1),
              (1, 1, 1), (1, -1, 1)):
        v = np.asarray(v, float)
        extra.append(v / np.linalg.norm(v))
    return np.concatenate([np.asarray(extra), d])


def _boundary_scale(dirs, kbar, params):
    """Rescale directions so that ``|H|^2 = 0`` exactly (only when ``beta K_bar > 0``)."""
    a, b, c = dirs.T
    w = 2 * (a * a + b * b + c * c) + 2 * params.gamma * np.abs(2 * a * c)
    return dirs * np.sqrt(params.beta * kbar / w)[:, None]


class _Accumulator:
    def __init__(self, tol, keep):
        self.tol, self.keep = tol, keep
        self.n = 0
        self.adm = 0
        self.best = (-math.inf, None)
        self.disc = (-math.inf, None)
        self.nviol = 0
        self.viol = []

    @staticmethod
    def _better(val, cfg, cur):
        cval, ccfg = cur
        if val > cval:
            return True
        return val == cval and ccfg is not None and tuple(cfg) < tuple(ccfg)

    def add(self, cfg, hsq, val, disc):
        self.n += len(cfg)
        ok = hsq >= 0
        self.adm += int(ok.sum())
        if not ok.any():
            return
        cfg, hsq, val, disc = cfg[ok], hsq[ok], val[ok], disc[ok]
        i = int(np.argmax(val))
        ties = np.flatnonzero(val == val[i])
        if len(ties) > 1:
            i = int(min(ties, key=lambda j: tuple(cfg[j])))
        if self._better(val[i], cfg[i], self.best):
            self.best = (float(val[i]), (*map(float, cfg[i]), float(hsq[i])))
        j = int(np.argmax(disc))
        if self._better(disc[j], cfg[j], self.disc):
            self.disc = (float(disc[j]), (*map(float, cfg[j]), float(hsq[j])))
        bad = np.flatnonzero(val > self.tol)
        self.nviol += len(bad)
        if len(bad):
            order = bad[np.argsort(-val[bad], kind="stable")][: self.keep]
            self.viol.extend((float(val[m]), (*map(float, cfg[m]), float(hsq[m]))) for m in order)
            self.viol.sort(key=lambda t: (-t[0], t[1]))
            del self.viol[self.keep:]


def _cfg_dict(t, kbar):
    if t is None:
        return None
    a, b, c, hsq = t
    return {"a": a, "b": b, "c": c, "kbar": kbar, "hsq": hsq}


def scan(params: PinchingParams, kbar: float | None = None, sampler: ScanSampler | None = None,
         convention=Convention.STANDARD) -> ScanReport:
    """Sample the reaction on the constraint surface ``Q = 0``.

    The sample set is a deterministic angular grid, boundary configurations
    with ``|H| = 0`` (when ``beta K_bar > 0``), and pseudorandom Gaussian
    directions from independent ``SeedSequence`` substreams. With
    ``K_bar = 0`` every sample is normalised to ``|Ao|^2 = 1``; otherwise
    directions are multiplied by each scale times ``sqrt(|K_bar|)``.
    """
    sampler = sampler or ScanSampler()
    kbar = params.kbar if kbar is None else float(kbar)
    if (kbar >= 0) != (params.kbar >= 0):
        params = PinchingParams(params.k, kbar, params.sigma, params.gamma_offset)
    conv = _conv(convention)
    acc = _Accumulator(sampler.tolerance, sampler.max_violations)
    total = int(sampler.count)
    scales = (1.0,) if kbar == 0 else tuple(float(s) * math.sqrt(abs(kbar)) for s in sampler.scales)

    def evaluate(cfg):
        a, b, c = cfg.T
        hsq = hsq_from_constraint(a, b, c, kbar, params)
        ok = hsq >= 0
        h = np.where(ok, hsq, 0.0)
        raw = reaction_raw(a, b, c, h, kbar, params, conv)
        dec = reaction_decomposed(a, b, c, kbar, params)
        norm = (2 * (a * a + b * b + c * c) + abs(kbar)) ** 2
        norm = np.where(norm > 0, norm, 1.0)
        acc.add(cfg, hsq, raw / norm, np.abs(raw - dec) / norm)

    def place(dirs, scale):
        if kbar == 0:
            return dirs / np.sqrt(2 * np.sum(dirs * dirs, axis=1))[:, None]
        return dirs * scale

    # deterministic part
    grid = _unit_directions(sampler.grid_per_axis)
    det_parts = [place(grid, s) for s in scales]
    if params.beta * kbar > 0:
        det_parts.append(_boundary_scale(grid, kbar, params))
    det = np.concatenate(det_parts)[: total]
    evaluate(det)
    remaining = total - len(det)

    # random part: one seeded substream per chunk
    if remaining > 0:
        nchunks = -(-remaining // sampler.chunk)
        streams = np.random.SeedSequence(sampler.seed).spawn(nchunks)
        for idx, ss in enumerate(streams):
            n = min(sampler.chunk, remaining - idx * sampler.chunk)
            rng = np.random.default_rng(ss)
            dirs = rng.standard_normal((n, 3))
            if kbar == 0:
                cfg = place(dirs, 1.0)
            else:
                which = rng.integers(0, len(scales) + (1 if params.beta * kbar > 0 else 0), size=n)
                cfg = np.empty_like(dirs)
                for s_i, s in enumerate(scales):
                    m = which == s_i
                    cfg[m] = dirs[m] * s
                m = which == len(scales)
                if m.any():
                    cfg[m] = _boundary_scale(dirs[m], kbar, params)
            evaluate(cfg)

    return ScanReport(
        k=params.k, kbar=kbar, convention=conv.value, samples=acc.n, admissible=acc.adm,
        max_reaction=acc.best[0] if acc.adm else math.nan, argmax=_cfg_dict(acc.best[1], kbar),
        max_discrepancy=acc.disc[0] if acc.adm else math.nan,
        discrepancy_argmax=_cfg_dict(acc.disc[1], kbar),
        tolerance=sampler.tolerance, violation_count=acc.nviol,
        violations=[dict(_cfg_dict(cfg, kbar), value=v) for v, cfg in acc.viol],
    )
