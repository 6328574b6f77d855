"""Independent reference values used by the tests.

Nothing here calls the radial quadrature or the Monte-Carlo samplers of the
package; tangent-ball volumes of polytopes are computed exactly from convex
hulls, hyperbolic quantities from Klein-model formulas.
"""
import math

import numpy as np
from scipy.spatial import ConvexHull


def polytope_leb(A, b, p):
    """Exact tangent-ball volume of ``{a_i . x < b_i}`` at ``p``.

    With ``g_i = a_i / (b_i - a_i . p)`` the Finsler norm is
    ``(h_G(v) + h_G(-v)) / 2``, the support function of ``D = (G - G) / 2``
    where ``G = conv(g_i)``; the tangent ball is the polar body of ``D``.
    """
    A = np.asarray(A, float)
    g = A / (np.asarray(b, float) - A @ np.asarray(p, float))[:, None]
    D = 0.5 * (g[:, None, :] - g[None, :, :]).reshape(-1, A.shape[1])
    hull = ConvexHull(D)
    # facets n.x + c <= 0 with c < 0 become polar vertices -n / c
    normals, offsets = hull.equations[:, :-1], hull.equations[:, -1]
    return ConvexHull(-normals / offsets[:, None]).volume


def box_hs(lo, hi):
    lo, hi = np.atleast_1d(lo).astype(float), np.atleast_1d(hi).astype(float)
    n = len(lo)
    return np.vstack([np.eye(n), -np.eye(n)]), np.concatenate([hi, -lo])


def orthant_leb(p):
    n = len(p)
    # a bounded cut-off of the orthant far away does not change the ball
    far = 1e9 * (1 + max(p))
    A = np.vstack([-np.eye(n), np.ones((1, n))])
    b = np.concatenate([np.zeros(n), [far]])
    return polytope_leb(A, b, p)


def klein_distance(p, q):
    p, q = np.asarray(p, float), np.asarray(q, float)
    c = (1 - p @ q) / math.sqrt((1 - p @ p) * (1 - q @ q))
    return math.acosh(max(c, 1.0))


def hyperbolic_disk_area(R):
    return 2 * math.pi * (math.cosh(R) - 1)


def square_tent_quotient(R, order=48):
    """lambda1 quotient of the tent of radius ``R`` at the centre of ``[-1, 1]^2``.

    In coordinates ``u = atanh(x)`` the distance to the centre is ``max |u_i|``
    and the differential of the tent has dual norm ``1/R`` on the support.
    The measure is ``omega_2 prod(1 - x_i^2) / Leb(x) du``; by symmetry the
    integrals reduce to the triangle ``0 <= u_2 <= u_1 <= R``, handled with a
    collapsed Gauss-Legendre rule.
    """
    t, w = np.polynomial.legendre.leggauss(order)
    s, ws = 0.5 * R * (t + 1), 0.5 * R * w
    tt, wt = 0.5 * (t + 1), 0.5 * w
    A, b = box_hs([-1, -1], [1, 1])
    num = den = 0.0
    for si, wsi in zip(s, ws):
        for ti, wti in zip(tt, wt):
            u = np.array([si, si * ti])
            x = np.tanh(u)
            rho = math.pi * np.prod(1 - x * x) / polytope_leb(A, b, x)
            wgt = wsi * wti * si * rho
            num += wgt / R**2
            den += wgt * (1 - si / R) ** 2
    return num / den


def square_tent_integrals(R, order=48):
    """``(int ||df||*^2 dmu, int f^2 dmu)`` for :func:`square_tent_quotient`."""
    t, w = np.polynomial.legendre.leggauss(order)
    s, ws = 0.5 * R * (t + 1), 0.5 * R * w
    tt, wt = 0.5 * (t + 1), 0.5 * w
    A, b = box_hs([-1, -1], [1, 1])
    num = den = 0.0
    for si, wsi in zip(s, ws):
        for ti, wti in zip(tt, wt):
            u = np.array([si, si * ti])
            x = np.tanh(u)
            rho = math.pi * np.prod(1 - x * x) / polytope_leb(A, b, x)
            wgt = 8 * wsi * wti * si * rho
            num += wgt / R**2
            den += wgt * (1 - si / R) ** 2
    return num, den


def disk_tent_quotient(R, power=2):
    """Tent quotient at the centre of the Klein disk, by 1-D quadrature.

    The tent is ``1 - r/R`` in geodesic polar coordinates, where the measure is
    ``sinh r dr dtheta`` and the differential has norm ``1/R``.
    """
    from scipy.integrate import quad

    num = hyperbolic_disk_area(R) / R**power
    den = 2 * math.pi * quad(lambda r: (1 - r / R) ** power * math.sinh(r), 0, R)[0]
    return num / den
