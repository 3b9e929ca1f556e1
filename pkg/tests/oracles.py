"""Independent reference computations used by the tests.

The reaction oracle builds the full second fundamental form ``h[i, j, alpha]``
from adapted scalars and evaluates the zeroth-order part of its evolution
under mean curvature flow in Euclidean space,

    dh_ij/dt = (h_ij . h_pq) h_pq + (h_iq . h_qp) h_pj + (h_jq . h_qp) h_pi
               - 2 (h_ip . h_jq) h_pq,

summed over repeated indices, with ``.`` the inner product on the normal
index. Rates of change of ``|A|^2``, ``|H|^2`` and the normal curvature are
then obtained by the chain rule, with no reference to the closed forms in
the package.
"""

import numpy as np


def adapted_tensor(a, b, c, h):
    """``T[i, j, alpha]`` for the adapted configuration (alpha = 0 is the H direction)."""
    T = np.zeros((2, 2, 2))
    T[:, :, 0] = [[h / 2 + a, 0.0], [0.0, h / 2 - a]]
    T[:, :, 1] = [[b, c], [c, -b]]
    return T


def hdot(T):
    """Zeroth-order evolution of ``T`` in Euclidean space."""
    dot = np.einsum
    out = dot("ijb,pqb,pqa->ija", T, T, T)
    out += dot("iqb,qpb,pja->ija", T, T, T)
    out += dot("jqb,qpb,pia->ija", T, T, T)
    out -= 2 * dot("ipb,jqb,pqa->ija", T, T, T)
    return out


def normal_curvature(T, S=None):
    """``R_perp_{12 34} = sum_p (h_1p3 h_2p4 - h_2p3 h_1p4)``, bilinear in ``(T, S)``."""
    S = T if S is None else S
    return float(T[0, :, 0] @ S[1, :, 1] - T[1, :, 0] @ S[0, :, 1])


def reaction_rates(a, b, c, h):
    """Return ``(d|A|^2/dt, d|H|^2/dt, d|K_perp|/dt)`` from the evolution of ``h``."""
    T = adapted_tensor(a, b, c, h)
    D = hdot(T)
    dA2 = 2 * np.sum(T * D)
    H = np.einsum("iia->a", T)
    dH = np.einsum("iia->a", D)
    dH2 = 2 * H @ dH
    kp = normal_curvature(T)
    dkp = np.sign(kp) * (normal_curvature(D, T) + normal_curvature(T, D))
    return dA2, dH2, dkp, kp


def ellipsoid_gauss_curvature(axes, x):
    """Gauss curvature of the ellipsoid ``sum x_i^2/a_i^2 = 1`` at points ``x``."""
    a1, a2, a3 = axes
    s = x[..., 0] ** 2 / a1 ** 4 + x[..., 1] ** 2 / a2 ** 4 + x[..., 2] ** 2 / a3 ** 4
    return 1.0 / ((a1 * a2 * a3) ** 2 * s ** 2)


def ellipsoid_mean_curvature(axes, x):
    """Norm of the mean curvature vector (trace convention) of the same ellipsoid."""
    a1, a2, a3 = axes
    n = np.stack([x[..., 0] / a1 ** 2, x[..., 1] / a2 ** 2, x[..., 2] / a3 ** 2], axis=-1)
    nn = np.linalg.norm(n, axis=-1)
    num = (x[..., 0] ** 2 / a1 ** 2 * (1 / a2 ** 2 + 1 / a3 ** 2) / a1 ** 2
           + x[..., 1] ** 2 / a2 ** 2 * (1 / a1 ** 2 + 1 / a3 ** 2) / a2 ** 2
           + x[..., 2] ** 2 / a3 ** 2 * (1 / a1 ** 2 + 1 / a2 ** 2) / a3 ** 2)
    return num / nn ** 3
