"""Discrete extrinsic geometry of codimension-two surfaces on parametric grids.

Everything is computed for the whole grid at once with ``numpy`` broadcasting.
Ambient quantities are arrays whose last axis is the embedding dimension; the
second fundamental form is stored as ambient normal vectors ``A_ij`` (coordinate
indices) and as components ``h[alpha, a, b]`` in orthonormal tangent and
normal frames.

The central routine is :func:`fundamental_forms`. Starting from the points it

1. differences the chart with second-order central stencils,
2. projects derivatives onto the tangent space of the ambient model (which
   realises the ambient Levi-Civita connection),
3. splits the projected second derivatives into tangential (Christoffel
   symbols) and normal (second fundamental form) parts,
4. builds frames: ``e_1`` along ``F_u``, ``e_2`` by Gram-Schmidt; the normal
   pair is seeded by the ambient coordinate axis with the largest normal
   projection and oriented so that ``(x, e_1, e_2, nu_3, nu_4)`` is positive,
5. reduces to the adapted scalars ``(a, b, c)`` and the normal curvature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, NumericalFailure
from .grid import SurfaceGrid, Topology
from .spaceform import ModelKind, project_to_model_tangent

__all__ = [
    "ShapeData",
    "Decomposition",
    "GradientData",
    "fundamental_forms",
    "adapted_decomposition",
    "gauss_curvature_extrinsic",
    "gauss_curvature_intrinsic",
    "gradients",
    "simons_residual",
    "ddvv_residual",
    "mean_curvature_vector",
    "tol_h",
]

# parity of the (i, j) coordinate components under reflection across a pole
_PAR2 = np.array([[1, -1], [-1, 1]])
_PAR1 = np.array([-1, 1])


def tol_h(model) -> float:
    """Threshold on ``|H|`` below which the adapted frame is not formed."""
    return 1e-8 / model.length_scale


def _ip(sig, u, v):
    return np.sum(u * v * sig, axis=-1)


def _derivatives(grid: SurfaceGrid):
    st = grid.stencil
    X = grid.points
    Fu = st.d_u(X, 1)
    Fv = st.d_v(X)
    Fuu = st.d_uu(X, 1)
    Fvv = st.d_vv(X)
    Fuv = st.d_uv(X, 1)
    return X, Fu, Fv, Fuu, Fuv, Fvv


def _proj(model, X, W):
    # tangent projection broadcast over extra axes between the site axes and D
    extra = W.ndim - X.ndim
    Xb = X.reshape(X.shape[:2] + (1,) * extra + X.shape[2:])
    return project_to_model_tangent(model, np.broadcast_to(Xb, W.shape), W, check=False)


def _metric_inverse(g, grid):
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
    scale = np.median(g[..., 0, 0] + g[..., 1, 1]) ** 2
    bad = ~(det > 1e-14 * scale)
    if bad.any():
        site = np.unravel_index(int(np.argmax(bad)), bad.shape)
        raise GeometryError("degenerate induced metric", site=site)
    ginv = np.empty_like(g)
    ginv[..., 0, 0] = g[..., 1, 1] / det
    ginv[..., 1, 1] = g[..., 0, 0] / det
    ginv[..., 0, 1] = ginv[..., 1, 0] = -g[..., 0, 1] / det
    return det, ginv


def christoffel_from_metric(surface: SurfaceGrid, g, ginv):
    """Christoffel symbols ``Gamma[..., l, i, j]`` of the differenced metric.

    Using the same stencil for the metric and for tensor fields makes the
    discrete connection exactly metric compatible, ``D_k g_ij = Gamma_ki^l g_lj
    + Gamma_kj^l g_il`` at every site, so that parallel quantities such as the
    second fundamental form of a round sphere have vanishing discrete
    covariant derivative even in the singular polar chart.
    """
    st = surface.stencil
    dg = np.empty(g.shape[:2] + (2, 2, 2))   # dg[..., k, i, j] = d_k g_ij
    for i in range(2):
        for j in range(2):
            dg[..., 0, i, j] = st.d_u(g[..., i, j], int(_PAR2[i, j]))
            dg[..., 1, i, j] = st.d_v(g[..., i, j])
    low = 0.5 * (np.einsum("...ijm->...mij", dg) + np.einsum("...jim->...mij", dg)
                 - np.einsum("...mij->...mij", dg))
    return np.einsum("...lm,...mij->...lij", ginv, low)


@dataclass
class Decomposition:
    """Output of :func:`adapted_decomposition` (arrays over sites)."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    kperp: np.ndarray
    adapted: np.ndarray
    theta: np.ndarray | None = None


def adapted_decomposition(h, H, tol=1e-8) -> Decomposition:
    """Reduce a codimension-two second fundamental form to ``(a, b, c, K_perp)``.

    Parameters
    ----------
    h : array_like, shape (..., 2, 2, 2)
        Components ``h[..., alpha, i, j]`` in oriented orthonormal tangent and
        normal frames (``alpha = 0, 1`` stand for the labels 3, 4).
    H : array_like, shape (..., 2)
        Normal components of the mean curvature vector.
    tol : float
        Threshold on ``|H|``.

    Returns
    -------
    Decomposition
        Where ``|H| >= tol`` the normal frame is turned so that the first normal
        is ``H/|H|`` and the tangent frame diagonalises the first normal
        component, ``diag(|H|/2 + a, |H|/2 - a)`` with ``a >= 0``; ``b`` and
        ``c`` are read from the second component ``[[b, c], [c, -b]]`` and
        ``K_perp = 2ac``. Elsewhere ``a, b, c`` are NaN, ``adapted`` is false
        and ``K_perp`` is the frame-invariant commutator entry
        ``sum_p (h_1p3 h_2p4 - h_2p3 h_1p4)``.
    """
    h = np.asarray(h, dtype=float)
    H = np.asarray(H, dtype=float)
    h3, h4 = h[..., 0, :, :], h[..., 1, :, :]
    hn = np.hypot(H[..., 0], H[..., 1])
    adapted = hn >= tol
    safe = np.where(adapted, hn, 1.0)
    n3 = np.where(adapted[..., None], H / safe[..., None], np.array([1.0, 0.0]))
    # second normal completes an oriented pair
    n4 = np.stack([-n3[..., 1], n3[..., 0]], axis=-1)
    k3 = n3[..., 0, None, None] * h3 + n3[..., 1, None, None] * h4
    k4 = n4[..., 0, None, None] * h3 + n4[..., 1, None, None] * h4
    p, q, r = k3[..., 0, 0], k3[..., 0, 1], k3[..., 1, 1]
    theta = 0.5 * np.arctan2(2 * q, p - r)
    cs, sn = np.cos(theta), np.sin(theta)
    a = 0.5 * np.hypot(p - r, 2 * q)
    # rotate the second component into the eigenframe of the first
    m11 = cs * cs * k4[..., 0, 0] + 2 * cs * sn * k4[..., 0, 1] + sn * sn * k4[..., 1, 1]
    m22 = sn * sn * k4[..., 0, 0] - 2 * cs * sn * k4[..., 0, 1] + cs * cs * k4[..., 1, 1]
    m12 = (cs * cs - sn * sn) * k4[..., 0, 1] + cs * sn * (k4[..., 1, 1] - k4[..., 0, 0])
    b = 0.5 * (m11 - m22)
    c = m12
    comm = np.einsum("...ip,...pj->...ij", h3, h4)
    kp_inv = comm[..., 0, 1] - comm[..., 1, 0]
    kperp = np.where(adapted, 2 * a * c, kp_inv)
    nan = np.nan
    return Decomposition(
        a=np.where(adapted, a, nan)[()],
        b=np.where(adapted, b, nan)[()],
        c=np.where(adapted, c, nan)[()],
        kperp=np.asarray(kperp)[()],
        adapted=np.asarray(adapted)[()],
        theta=np.asarray(theta)[()],
    )


@dataclass
class ShapeData:
    """Per-site geometric package for a whole grid.

    Array fields have leading shape ``(n_u, n_v)``. ``h`` holds
    ``h[..., alpha, a, b]`` in the working orthonormal frames ``e`` (tangent)
    and ``nu`` (normal). Use :meth:`at` for a single site.
    """

    model: object
    points: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    det_g: np.ndarray
    tangent: np.ndarray        # coordinate tangents t_u, t_v: (..., 2, D)
    frame: np.ndarray          # coefficient matrix E: e_a = E[i, a] t_i
    e: np.ndarray              # (..., 2, D)
    nu: np.ndarray             # (..., 2, D)
    christoffel: np.ndarray    # Gamma[..., l, i, j]
    A_coord: np.ndarray        # ambient normal vectors A_ij: (..., 2, 2, D)
    h_coord: np.ndarray        # (..., alpha, i, j)
    h: np.ndarray              # (..., alpha, a, b)
    H_vec: np.ndarray          # (..., D)
    H_normal: np.ndarray       # (..., 2)
    H_norm: np.ndarray
    A2: np.ndarray
    Ao2: np.ndarray
    Ao1_sq: np.ndarray
    Ao2_sq: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    kperp: np.ndarray
    K: np.ndarray
    ddvv: np.ndarray
    adapted: np.ndarray

    @property
    def curvature(self) -> float:
        return self.model.curvature

    def at(self, site) -> "ShapeData":
        i, j = site
        vals = {}
        for name in self.__dataclass_fields__:
            val = getattr(self, name)
            vals[name] = val[i, j] if isinstance(val, np.ndarray) and val.ndim >= 2 else val
        return ShapeData(**vals)


def _normal_frame(model, X, e, sig):
    D = model.dim
    axes = np.eye(D)
    # candidate normals: each ambient axis projected to the model tangent space
    # and then off the surface tangent plane
    W = _proj(model, X, np.broadcast_to(axes, X.shape[:2] + (D, D)).copy())
    for a in range(2):
        ea = e[..., a, None, :]
        W = W - _ip(sig, W, ea)[..., None] * ea
    n2 = _ip(sig, W, W)
    k = np.argmax(n2, axis=-1)
    best = np.take_along_axis(n2, k[..., None], axis=-1)[..., 0]
    if not np.all(best > 1e-12):
        site = np.unravel_index(int(np.argmin(best)), best.shape)
        raise GeometryError("normal frame construction broke down", site=site)
    w3 = np.take_along_axis(W, k[..., None, None], axis=-2)[..., 0, :]
    nu3 = w3 / np.sqrt(best)[..., None]
    W2 = W - _ip(sig, W, nu3[..., None, :])[..., None] * nu3[..., None, :]
    n2b = _ip(sig, W2, W2)
    k2 = np.argmax(n2b, axis=-1)
    best2 = np.take_along_axis(n2b, k2[..., None], axis=-1)[..., 0]
    if not np.all(best2 > 1e-12):
        site = np.unravel_index(int(np.argmin(best2)), best2.shape)
        raise GeometryError("normal frame construction broke down", site=site)
    w4 = np.take_along_axis(W2, k2[..., None, None], axis=-2)[..., 0, :]
    nu4 = w4 / np.sqrt(best2)[..., None]
    cols = [e[..., 0, :], e[..., 1, :], nu3, nu4]
    if model.kind is not ModelKind.EUCLIDEAN:
        cols = [X] + cols
    det = np.linalg.det(np.stack(cols, axis=-1))
    nu4 = np.where((det < 0)[..., None], -nu4, nu4)
    return np.stack([nu3, nu4], axis=-2)


def mean_curvature_vector(grid: SurfaceGrid, with_norm_a: bool = False):
    """Ambient mean curvature vector at every site (fast path, no frames).

    Returns
    -------
    H : ndarray, shape (n_u, n_v, D)
    A2 : ndarray, shape (n_u, n_v)
        Only when ``with_norm_a`` is true.
    """
    model = grid.model
    sig = model.signature
    X, Fu, Fv, Fuu, Fuv, Fvv = _derivatives(grid)
    t = _proj(model, X, np.stack([Fu, Fv], axis=2))
    g = np.einsum("...id,...jd->...ij", t * sig, t)
    _, ginv = _metric_inverse(g, grid)
    Fij = np.stack([np.stack([Fuu, Fuv], 2), np.stack([Fuv, Fvv], 2)], 2)
    W = _proj(model, X, Fij)
    Gam = np.einsum("...lm,...ijd,...md->...lij", ginv, W * sig, t)
    A = W - np.einsum("...lij,...ld->...ijd", Gam, t)
    H = np.einsum("...ij,...ijd->...d", ginv, A)
    if not with_norm_a:
        return H
    A2 = np.einsum("...ik,...jl,...ijd,...kld->...", ginv, ginv, A * sig, A)
    return H, A2


def fundamental_forms(surface: SurfaceGrid, site=None) -> ShapeData:
    """Metric, frames, second fundamental form and derived scalars.

    Parameters
    ----------
    surface : SurfaceGrid
    site : tuple of int, optional
        When given, the :class:`ShapeData` of that single site is returned
        (the stencil still uses the neighbours).

    Raises
    ------
    GeometryError
        Degenerate metric or normal-frame breakdown, with the offending site.
    """
    model = surface.model
    sig = model.signature
    X, Fu, Fv, Fuu, Fuv, Fvv = _derivatives(surface)
    if not all(np.all(np.isfinite(f)) for f in (Fu, Fv, Fuu, Fuv, Fvv)):
        raise NumericalFailure("non-finite chart derivatives")
    t = _proj(model, X, np.stack([Fu, Fv], axis=2))
    g = np.einsum("...id,...jd->...ij", t * sig, t)
    det, ginv = _metric_inverse(g, surface)
    Fij = np.stack([np.stack([Fuu, Fuv], 2), np.stack([Fuv, Fvv], 2)], 2)
    W = _proj(model, X, Fij)
    Gp = np.einsum("...lm,...ijd,...md->...lij", ginv, W * sig, t)
    A = W - np.einsum("...lij,...ld->...ijd", Gp, t)
    Hv = np.einsum("...ij,...ijd->...d", ginv, A)
    Gam = christoffel_from_metric(surface, g, ginv)

    # orthonormal tangent frame: e_1 along t_u
    g11, g12 = g[..., 0, 0], g[..., 0, 1]
    E = np.zeros(g.shape)
    E[..., 0, 0] = 1.0 / np.sqrt(g11)
    E[..., 0, 1] = -g12 / np.sqrt(g11 * det)
    E[..., 1, 1] = np.sqrt(g11 / det)
    e = np.einsum("...ia,...id->...ad", E, t)
    nu = _normal_frame(model, X, e, sig)

    hc = np.einsum("...ijd,...ad->...aij", A * sig, nu)
    hf = np.einsum("...ia,...jb,...nij->...nab", E, E, hc)
    Hn = np.einsum("...d,...ad->...a", Hv * sig, nu)
    Hnorm = np.hypot(Hn[..., 0], Hn[..., 1])
    A2 = np.sum(hf ** 2, axis=(-3, -2, -1))
    Ao2 = A2 - 0.5 * Hnorm ** 2
    dec = adapted_decomposition(hf, Hn, tol=tol_h(model))
    K = gauss_curvature_extrinsic_arrays(Hnorm, Ao2, model.curvature)
    ddvv = A2 - 0.5 * Hnorm ** 2 - 2 * np.abs(dec.kperp)
    shape = ShapeData(
        model=model, points=X, g=g, ginv=ginv, det_g=det, tangent=t, frame=E,
        e=e, nu=nu, christoffel=Gam, A_coord=A, h_coord=hc, h=hf, H_vec=Hv,
        H_normal=Hn, H_norm=Hnorm, A2=A2, Ao2=Ao2,
        Ao1_sq=2 * dec.a ** 2, Ao2_sq=2 * dec.b ** 2 + 2 * dec.c ** 2,
        a=dec.a, b=dec.b, c=dec.c, kperp=dec.kperp, K=K, ddvv=ddvv,
        adapted=dec.adapted,
    )
    return shape.at(site) if site is not None else shape


def gauss_curvature_extrinsic_arrays(Hnorm, Ao2, kbar):
    return kbar + 0.25 * np.asarray(Hnorm) ** 2 - 0.5 * np.asarray(Ao2)


def gauss_curvature_extrinsic(shape: ShapeData, kbar: float | None = None):
    """Gauss curvature from the Gauss equation, ``K_bar + |H|^2/4 - |Ao|^2/2``."""
    kbar = shape.model.curvature if kbar is None else kbar
    return gauss_curvature_extrinsic_arrays(shape.H_norm, shape.Ao2, kbar)


def gauss_curvature_intrinsic(surface: SurfaceGrid, site=None, shape: ShapeData | None = None):
    """Curvature of the induced metric by the Brioschi formula.

    Only the metric coefficients ``E, F, G`` and their central differences
    enter, so this is independent of the second fundamental form.
    """
    if shape is None:
        shape = fundamental_forms(surface)
    st = surface.stencil
    Eg, Fg, Gg = shape.g[..., 0, 0], shape.g[..., 0, 1], shape.g[..., 1, 1]
    E_u, E_v = st.d_u(Eg, 1), st.d_v(Eg)
    F_u, F_v = st.d_u(Fg, -1), st.d_v(Fg)
    G_u, G_v = st.d_u(Gg, 1), st.d_v(Gg)
    E_vv, G_uu, F_uv = st.d_vv(Eg), st.d_uu(Gg, 1), st.d_uv(Fg, -1)
    m1 = np.empty(Eg.shape + (3, 3))
    m1[..., 0, 0] = -0.5 * E_vv + F_uv - 0.5 * G_uu
    m1[..., 0, 1] = 0.5 * E_u
    m1[..., 0, 2] = F_u - 0.5 * E_v
    m1[..., 1, 0] = F_v - 0.5 * G_u
    m1[..., 1, 1] = Eg
    m1[..., 1, 2] = Fg
    m1[..., 2, 0] = 0.5 * G_v
    m1[..., 2, 1] = Fg
    m1[..., 2, 2] = Gg
    m2 = np.zeros_like(m1)
    m2[..., 0, 1] = m2[..., 1, 0] = 0.5 * E_v
    m2[..., 0, 2] = m2[..., 2, 0] = 0.5 * G_u
    m2[..., 1:, 1:] = m1[..., 1:, 1:]
    K = (np.linalg.det(m1) - np.linalg.det(m2)) / (Eg * Gg - Fg ** 2) ** 2
    return K[site] if site is not None else K


@dataclass
class GradientData:
    """Discrete covariant derivatives, per site.

    ``nabla_A[..., a, b, c, alpha]`` is ``nabla_{e_a} h_{bc alpha}`` in the
    working orthonormal frames.
    """

    nabla_A: np.ndarray
    nabla_H: np.ndarray        # (..., a, alpha)
    nabla_A_coord: np.ndarray  # (..., k, i, j, alpha)
    nabla_kperp: np.ndarray    # coordinate derivatives (..., 2)
    grad_A2: np.ndarray
    grad_H2: np.ndarray
    grad_Ao2: np.ndarray
    grad_kperp_norm: np.ndarray


def _polar2(M):
    """Orthogonal polar factor of a stack of invertible 2 x 2 matrices."""
    S = np.einsum("...ka,...kb->...ab", M, M)
    s = np.sqrt(np.maximum(S[..., 0, 0] * S[..., 1, 1] - S[..., 0, 1] * S[..., 1, 0], 0.0))
    tau = np.sqrt(S[..., 0, 0] + S[..., 1, 1] + 2 * s)
    root = (S + s[..., None, None] * np.eye(2)) / tau[..., None, None]
    det = root[..., 0, 0] * root[..., 1, 1] - root[..., 0, 1] * root[..., 1, 0]
    inv = np.empty_like(root)
    inv[..., 0, 0] = root[..., 1, 1]
    inv[..., 1, 1] = root[..., 0, 0]
    inv[..., 0, 1] = -root[..., 0, 1]
    inv[..., 1, 0] = -root[..., 1, 0]
    inv /= det[..., None, None]
    return np.einsum("...ab,...bc->...ac", M, inv)


def _neighbours(surface: SurfaceGrid, f, parity):
    """Values of ``f`` at the four stencil neighbours: (u-, u+, v-, v+)."""
    fp = surface.stencil.pad_u(f, parity)
    return fp[:-2], fp[2:], np.roll(f, 1, axis=1), np.roll(f, -1, axis=1)


def transported_derivative(surface: SurfaceGrid, comp, nu, parity_u):
    """Central differences of normal-frame components with frame transport.

    Parameters
    ----------
    comp : ndarray, shape (n_u, n_v, ..., 2)
        Components on the working normal frame ``nu`` (last axis).
    nu : ndarray, shape (n_u, n_v, 2, D)
    parity_u : int or ndarray
        Reflection parity of ``comp`` (broadcast over its index axes).

    Each neighbour's normal frame is moved to the centre by projection onto
    the centre normal plane followed by the orthogonal polar factor, so the
    transported frame stays orthonormal. Returns ``(D_u, D_v)``.
    """
    sig = surface.model.signature
    st = surface.stencil
    cn = _neighbours(surface, comp, parity_u) if np.isscalar(parity_u) else None
    if cn is None:
        par = np.broadcast_to(parity_u, comp.shape[2:-1])
        lo, hi = np.empty_like(comp), np.empty_like(comp)
        for idx in np.ndindex(par.shape):
            sl = (slice(None), slice(None)) + idx
            a, b, _, _ = _neighbours(surface, comp[sl], int(par[idx]))
            lo[sl], hi[sl] = a, b
        cn = (lo, hi, np.roll(comp, 1, axis=1), np.roll(comp, -1, axis=1))
    nn = _neighbours(surface, nu, 1)
    extra = comp.ndim - 3
    moved = []
    for c_n, nu_n in zip(cn, nn):
        Q = _polar2(np.einsum("...ad,...bd->...ab", nu * sig, nu_n))
        Q = Q.reshape(Q.shape[:2] + (1,) * extra + (2, 2))
        moved.append(np.einsum("...ab,...b->...a", Q, c_n))
    du = (moved[1] - moved[0]) / (2 * st.du)
    dv = (moved[3] - moved[2]) / (2 * st.dv)
    return du, dv


def gradients(surface: SurfaceGrid, shape: ShapeData | None = None) -> GradientData:
    """Covariant derivative of the second fundamental form.

    Normal components of ``A_ij`` at neighbouring sites are carried to the
    centre with :func:`transported_derivative`; tangent indices are corrected
    with the Christoffel symbols of the differenced metric.
    """
    if shape is None:
        shape = fundamental_forms(surface)
    st = surface.stencil
    hc = shape.h_coord                        # (..., alpha, i, j)
    comp = np.moveaxis(hc, -3, -1)            # (..., i, j, alpha)
    du, dv = transported_derivative(surface, comp, shape.nu, _PAR2)
    nab = np.stack([du, dv], axis=2)          # (..., k, i, j, alpha)
    Gam = shape.christoffel
    nab = nab - np.einsum("...lki,...alj->...kija", Gam, hc)
    nab = nab - np.einsum("...lkj,...ail->...kija", Gam, hc)
    E = shape.frame
    T = np.einsum("...ka,...ib,...jc,...kijn->...abcn", E, E, E, nab)
    grad_A2 = np.sum(T ** 2, axis=(-4, -3, -2, -1))
    trH = np.einsum("...abbn->...an", T)
    grad_H2 = np.sum(trH ** 2, axis=(-2, -1))
    dK = st.gradient(shape.kperp, 1)
    gk = np.sqrt(np.maximum(np.einsum("...ij,...i,...j->...", shape.ginv, dK, dK), 0.0))
    return GradientData(
        nabla_A=T, nabla_H=trH, nabla_A_coord=nab, nabla_kperp=dK,
        grad_A2=grad_A2, grad_H2=grad_H2, grad_Ao2=grad_A2 - 0.5 * grad_H2,
        grad_kperp_norm=gk,
    )


def laplacian(surface: SurfaceGrid, f, shape: ShapeData):
    """Laplace-Beltrami operator of a reflection-even scalar field."""
    st = surface.stencil
    D2 = np.stack([np.stack([st.d_uu(f, 1), st.d_uv(f, 1)], -1),
                   np.stack([st.d_uv(f, 1), st.d_vv(f)], -1)], -2)
    D1 = st.gradient(f, 1)
    return np.einsum("...ij,...ij->...", shape.ginv,
                     D2 - np.einsum("...lij,...l->...ij", shape.christoffel, D1))


def simons_residual(surface: SurfaceGrid, site=None, shape: ShapeData | None = None,
                    grad: GradientData | None = None, curvature: str = "intrinsic"):
    """Discrete residual of the Simons identity for the squared norm of ``A``.

    Returns ``0.5*Lap|A|^2 - <A, Hess H> - |nabla A|^2 - 2K|Ao|^2 + 2 K_perp^2``.

    Parameters
    ----------
    curvature : {"intrinsic", "extrinsic"}
        Source of the Gauss curvature ``K``: the Brioschi formula on the
        differenced metric (default) or the Gauss equation. The two agree to
        second order; the intrinsic value is exactly zero on a flat torus
        grid, whereas the Gauss-equation value carries the stencil bias of
        ``|A|^2``.
    """
    if shape is None:
        shape = fundamental_forms(surface)
    if grad is None:
        grad = gradients(surface, shape)
    nab = grad.nabla_A_coord
    nabH = np.einsum("...ij,...kija->...ka", shape.ginv, nab)
    du, dv = transported_derivative(surface, nabH, shape.nu, _PAR1)
    hess = np.stack([du, dv], axis=2)
    hess = hess - np.einsum("...lij,...la->...ija", shape.christoffel, nabH)
    A_hess = np.einsum("...ik,...jl,...aij,...kla->...", shape.ginv, shape.ginv, shape.h_coord, hess)
    lap = laplacian(surface, shape.A2, shape)
    if curvature == "intrinsic":
        K = gauss_curvature_intrinsic(surface, shape=shape)
    elif curvature == "extrinsic":
        K = shape.K
    else:
        raise ValueError("curvature must be 'intrinsic' or 'extrinsic'")
    res = 0.5 * lap - A_hess - grad.grad_A2 - 2 * K * shape.Ao2 + 2 * shape.kperp ** 2
    return res[site] if site is not None else res


def ddvv_residual(shape: ShapeData):
    """``|A|^2 - |H|^2/2 - 2|K_perp|``; nonnegative for codimension-two surfaces."""
    return shape.A2 - 0.5 * shape.H_norm ** 2 - 2 * np.abs(shape.kperp)
