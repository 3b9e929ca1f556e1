"""Totally symmetric gradient tensors of a surface with two normal directions.

A tensor ``T[q, i, j, alpha]`` (tangent indices 1, 2; normal labels 3, 4)
that is symmetric in ``(q, i, j)`` has four independent components per normal
label, stored in the order ``(111, 112, 122, 222)``. It models
``nabla_q h_{ij alpha}`` in a space form, where the Codazzi equation makes the
covariant derivative of the second fundamental form totally symmetric.

Three pointwise inequalities are checked:

* trace ratio: ``|tr T|^2 <= (4/3)|T|^2``;
* the same in the form ``|T|^2 - |tr T|^2/2 >= |T|^2/3``;
* ``|T|^2 >= 2 E(T)`` with
  ``E(T) = sum_{p,q} (T_{q1p,3} T_{q2p,4} - T_{q2p,3} T_{q1p,4})``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "SymmetricGradientTensor",
    "trace_ratio",
    "codazzi_identity_check",
    "evol_lower_bound_check",
    "evol_term",
    "min_trace_ratio",
    "equality_tensor",
    "random_tensors",
    "TraceSearch",
]

# multiplicity of each stored component in the full tensor
_MULT = np.array([1.0, 3.0, 3.0, 1.0])
# full index (q, i, j) -> stored slot
_SLOT = np.zeros((2, 2, 2), dtype=int)
for _q in range(2):
    for _i in range(2):
        for _j in range(2):
            _SLOT[_q, _i, _j] = _q + _i + _j


@dataclass(frozen=True)
class SymmetricGradientTensor:
    """Stack of symmetric tensors.

    Parameters
    ----------
    comps : array_like, shape (..., 2, 4)
        ``comps[..., alpha, s]`` with ``s`` indexing ``(111, 112, 122, 222)``.
    """

    comps: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.comps, dtype=float)
        if c.shape[-2:] != (2, 4):
            raise DomainError(f"components must end with shape (2, 4), got {c.shape}")
        object.__setattr__(self, "comps", c)

    @classmethod
    def from_full(cls, T, check: bool = True, atol: float = 1e-12):
        """Build from ``T[..., q, i, j, alpha]``; symmetry is verified when ``check``."""
        T = np.asarray(T, dtype=float)
        if check:
            for perm in ((0, 2, 1), (1, 0, 2), (2, 1, 0)):
                axes = list(range(T.ndim - 4)) + [T.ndim - 4 + p for p in perm] + [T.ndim - 1]
                if not np.allclose(T, np.transpose(T, axes), atol=atol, rtol=0):
                    raise DomainError("tensor is not symmetric in its tangent indices")
        comps = np.stack([T[..., 0, 0, 0, :], T[..., 0, 0, 1, :], T[..., 0, 1, 1, :], T[..., 1, 1, 1, :]], -1)
        return cls(comps)

    def full(self) -> np.ndarray:
        """Expanded array ``T[..., q, i, j, alpha]``."""
        c = np.moveaxis(self.comps, -2, -1)          # (..., 4, alpha)
        return c[..., _SLOT, :]

    @property
    def norm2(self) -> np.ndarray:
        return np.einsum("...as,s->...", self.comps ** 2, _MULT)

    @property
    def trace(self) -> np.ndarray:
        """``(tr T)[..., q, alpha] = sum_i T_{qii, alpha}``."""
        c = self.comps
        return np.stack([c[..., 0] + c[..., 2], c[..., 1] + c[..., 3]], axis=-2)

    @property
    def trace_norm2(self) -> np.ndarray:
        return np.sum(self.trace ** 2, axis=(-2, -1))

    def rotated(self, tangent: np.ndarray | float = 0.0, normal: np.ndarray | float = 0.0):
        """Apply tangent and normal rotations (angles or 2 x 2 matrices)."""
        Rt = _rot(tangent)
        Rn = _rot(normal)
        T = np.einsum("qa,ib,jc,nm,...abcm->...qijn", Rt, Rt, Rt, Rn, self.full())
        return SymmetricGradientTensor.from_full(T, check=False)

    def swapped_normals(self):
        return SymmetricGradientTensor(self.comps[..., ::-1, :])

    def __mul__(self, lam):
        return SymmetricGradientTensor(self.comps * lam)

    __rmul__ = __mul__


def _rot(x):
    if np.ndim(x) == 0:
        c, s = math.cos(float(x)), math.sin(float(x))
        return np.array([[c, -s], [s, c]])
    return np.asarray(x, dtype=float)


def _as_tensor(T) -> SymmetricGradientTensor:
    return T if isinstance(T, SymmetricGradientTensor) else SymmetricGradientTensor(T)


def trace_ratio(T):
    """``|tr T|^2 / |T|^2``; at most 4/3.

    Raises
    ------
    DomainError
        For the zero tensor.
    """
    T = _as_tensor(T)
    n2 = T.norm2
    if np.any(n2 <= 0):
        raise DomainError("trace ratio of the zero tensor is undefined")
    out = T.trace_norm2 / n2
    return out[()] if np.ndim(out) == 0 else out


def codazzi_identity_check(T):
    """``(|T|^2 - |tr T|^2/2) - |T|^2/3``; nonnegative."""
    T = _as_tensor(T)
    out = T.norm2 - 0.5 * T.trace_norm2 - T.norm2 / 3.0
    return out[()] if np.ndim(out) == 0 else out


def evol_term(T):
    """``E(T) = sum_{p,q} (T_{q1p,3} T_{q2p,4} - T_{q2p,3} T_{q1p,4})``."""
    F = _as_tensor(T).full()
    out = np.einsum("...qp,...qp->...", F[..., :, 0, :, 0], F[..., :, 1, :, 1]) - np.einsum(
        "...qp,...qp->...", F[..., :, 1, :, 0], F[..., :, 0, :, 1])
    return out[()] if np.ndim(out) == 0 else out


def evol_lower_bound_check(T):
    """``|T|^2 - 2 E(T)``; nonnegative."""
    T = _as_tensor(T)
    out = T.norm2 - 2 * evol_term(T)
    return out[()] if np.ndim(out) == 0 else out


def equality_tensor(w=(1.0, 0.0), alpha: int = 0) -> SymmetricGradientTensor:
    """``T_{qij} = g_qi w_j + g_qj w_i + g_ij w_q`` in one normal direction."""
    w = np.asarray(w, dtype=float)
    g = np.eye(2)
    T = (np.einsum("qi,j->qij", g, w) + np.einsum("qj,i->qij", g, w) + np.einsum("ij,q->qij", g, w))
    full = np.zeros((2, 2, 2, 2))
    full[..., alpha] = T
    return SymmetricGradientTensor.from_full(full)


def random_tensors(n: int, seed: int = 7, chunk: int = 1 << 16):
    """Yield batches of standard Gaussian tensors from seeded substreams."""
    n = int(n)
    nchunks = max(1, -(-n // chunk))
    for idx, ss in enumerate(np.random.SeedSequence(seed).spawn(nchunks)):
        m = min(chunk, n - idx * chunk)
        if m <= 0:
            break
        yield SymmetricGradientTensor(np.random.default_rng(ss).standard_normal((m, 2, 4)))


@dataclass
class TraceSearch:
    minimum: float
    argmin: SymmetricGradientTensor
    samples: int
    refinements: int


def _inv_ratio(c):
    T = SymmetricGradientTensor(c)
    return T.norm2 / T.trace_norm2


def min_trace_ratio(samples: int = 100_000, refine: int = 100, seed: int = 0, initial=None,
                    keep: int = 8) -> TraceSearch:
    """Minimise ``|T|^2 / |tr T|^2`` by sampling and coordinate descent.

    Parameters
    ----------
    samples : int
        Number of Gaussian starting tensors (ignored if ``initial`` is given).
    refine : int
        Sweeps of coordinate descent. Each sweep tries ``+/- step`` on every
        component of the ``keep`` best candidates, renormalises to unit trace
        norm, and halves the step when nothing improved. The step schedule is
        fixed, so results are reproducible bit for bit.
    initial : array_like or SymmetricGradientTensor, optional
        Explicit starting tensors.
    """
    if initial is not None:
        cand = _as_tensor(initial).comps.reshape(-1, 2, 4)
    else:
        if int(samples) < 1:
            raise DomainError("need at least one sample")
        cand = np.concatenate([t.comps for t in random_tensors(samples, seed)])
    n_start = len(cand)
    tn = SymmetricGradientTensor(cand).trace_norm2
    cand = cand[tn > 0]
    if not len(cand):
        raise DomainError("all starting tensors are trace free")
    cand = cand / np.sqrt(SymmetricGradientTensor(cand).trace_norm2)[:, None, None]
    vals = _inv_ratio(cand)
    order = np.argsort(vals, kind="stable")[:keep]
    cand, vals = cand[order].copy(), vals[order].copy()
    step = 0.1
    for _ in range(int(refine)):
        improved = False
        for a in range(2):
            for s in range(4):
                for sign in (1.0, -1.0):
                    trial = cand.copy()
                    trial[:, a, s] += sign * step
                    tn = SymmetricGradientTensor(trial).trace_norm2
                    ok = tn > 0
                    trial[ok] /= np.sqrt(tn[ok])[:, None, None]
                    tv = np.where(ok, _inv_ratio(trial), np.inf)
                    better = tv < vals
                    if better.any():
                        improved = True
                        cand[better] = trial[better]
                        vals[better] = tv[better]
        if not improved:
            step *= 0.5
    i = int(np.argmin(vals))
    return TraceSearch(minimum=float(vals[i]), argmin=SymmetricGradientTensor(cand[i]),
                       samples=n_start, refinements=int(refine))
