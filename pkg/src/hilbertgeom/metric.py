"""Hilbert distance, Finsler norm and the Busemann density.

All quantities are expressed through chord times, so no boundary point is
ever formed explicitly.  For ``v = q - p`` let ``s`` be the backward chord
time from ``p`` and ``u`` the forward chord time from ``q``.  The cross ratio
of ``(a, p, q, b)`` is ``(1 + 1/s) * (1 + 1/u)``, whence

    d(p, q) = (log1p(1/s) + log1p(1/u)) / 2.

Each term uses the slack at its own point, so the result stays accurate
when either point is close to the boundary, and it is exactly symmetric.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .bodies import ConvexBody, Ellipsoid, Interval, _vector, as_points
from .errors import ConfigError, ImproperBody, NonFiniteRadial, PointOutside

ANGLE_GRID = "angle_grid"
MC_DIRECTIONS = "mc_directions"

# rows of (points x directions) handled per vectorised block
_BLOCK = 1 << 21
_WHITEN_PASSES = 40
_WHITEN_COND = 4.0


def unit_ball_volume(n: int) -> float:
    """Euclidean volume of the unit ball of R^n."""
    return math.exp(0.5 * n * math.log(math.pi) - gammaln(0.5 * n + 1.0))


@dataclass(frozen=True)
class QuadratureSpec:
    """Direction set used for tangent-ball integrals and dual norms.

    ``angle_grid`` is the uniform grid ``2 pi k / count`` (planar bodies
    only); ``mc_directions`` uses seeded scrambled Sobol points mapped to the
    sphere, together with their antipodes.  Tangent-ball volumes are computed
    in a frame whitened by coarse pre-passes when ``whiten`` is set.
    """

    mode: str = ANGLE_GRID
    count: int = 4096
    seed: int = 0
    whiten: bool = True

    def __post_init__(self):
        if self.mode not in (ANGLE_GRID, MC_DIRECTIONS):
            raise ConfigError(f"unknown quadrature mode {self.mode!r}")
        if int(self.count) != self.count or self.count < 8:
            raise ConfigError(f"quadrature count must be an integer >= 8, got {self.count}")

    @classmethod
    def default(cls, dim: int) -> "QuadratureSpec":
        if dim == 2:
            return cls(ANGLE_GRID, 4096)
        if dim == 1:
            return cls(MC_DIRECTIONS, 8)
        return cls(MC_DIRECTIONS, 65536)

    def coarse(self) -> "QuadratureSpec":
        return QuadratureSpec(self.mode, max(32, self.count // 16), self.seed, False)


@dataclass(frozen=True)
class DensityValue:
    leb_tangent_ball: float
    density: float
    omega_n: float


@functools.lru_cache(maxsize=64)
def _direction_set(mode, count, seed, dim):
    if dim == 1:
        dirs = np.array([[1.0], [-1.0]])
    elif mode == ANGLE_GRID:
        if dim != 2:
            raise ConfigError("angle_grid quadrature is only defined for planar bodies")
        theta = 2.0 * np.pi * np.arange(count) / count
        dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    else:
        from scipy.stats import qmc, norm

        half = count // 2
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # non power-of-two Sobol sizes are fine here
            u = qmc.Sobol(dim, scramble=True, seed=seed).random(half)
        g = norm.ppf(np.clip(u, 1e-15, 1.0 - 1e-15))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        dirs = np.empty((2 * half, dim))
        dirs[0::2] = g
        dirs[1::2] = -g
    dirs.flags.writeable = False
    return dirs


def directions(quad: QuadratureSpec, dim: int) -> np.ndarray:
    """Unit direction set of ``quad`` in R^dim (read-only array)."""
    return _direction_set(quad.mode, int(quad.count), int(quad.seed), int(dim))


def _check_inside(body, p):
    p = _vector(p, body.dim)
    if not body.contains(p):
        raise PointOutside(f"{p.tolist()} is not in the open body")
    return p


# -- batch kernels (no validation) ---------------------------------------------


def finsler_batch(body: ConvexBody, P, V):
    """Finsler norms ``F(P_i, V_i)``; zero rows of ``V`` give 0."""
    tp, tm = body._chords(P, V)
    return 0.5 * (1.0 / tp + 1.0 / tm)


def distance_batch(body: ConvexBody, P, Q):
    """Hilbert distances ``d(P_i, Q_i)`` for interior rows."""
    V = Q - P
    _, s = body._chords(P, V)
    u, _ = body._chords(Q, V)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = 0.5 * (np.log1p(1.0 / s) + np.log1p(1.0 / u))
    same = ~np.any(V, axis=-1)
    return np.where(same, 0.0, np.where(u > 0, d, np.inf))


# -- validated single-point API -------------------------------------------------


def finsler_norm(body: ConvexBody, p, v) -> float:
    p = _check_inside(body, p)
    v = _vector(v, body.dim, "direction")
    if not np.any(v):
        return 0.0
    tp, tm = body._chords(p[None, :], v[None, :])
    if math.isinf(tp[0]) and math.isinf(tm[0]):
        raise ImproperBody("the line through p along v never leaves the body")
    return float(0.5 * (1.0 / tp[0] + 1.0 / tm[0]))


def cross_ratio_distance(body: ConvexBody, p, q) -> float:
    p = _check_inside(body, p)
    q = _check_inside(body, q)
    if np.array_equal(p, q):
        return 0.0
    tp, tm = body._chords(p[None, :], (q - p)[None, :])
    if math.isinf(tp[0]) and math.isinf(tm[0]):
        raise ImproperBody("the line through p and q never leaves the body")
    return float(distance_batch(body, p[None, :], q[None, :])[0])


def dual_norm(body: ConvexBody, p, xi, quad: QuadratureSpec | None = None) -> float:
    """``sup {xi . v : F(p, v) <= 1}`` scanned over the quadrature directions."""
    p = _check_inside(body, p)
    xi = _vector(xi, body.dim, "covector")
    quad = quad or QuadratureSpec.default(body.dim)
    dirs = directions(quad, body.dim)
    F = finsler_batch(body, np.broadcast_to(p, dirs.shape), dirs)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(F > 0, (dirs @ xi) / F, np.where(dirs @ xi > 0, np.inf, 0.0))
    return float(max(ratio.max(), 0.0))


# -- tangent unit balls -----------------------------------------------------------


def _radial_moments(body, P, dirs, L, inertia=True):
    """Mean of ``r^n`` and the inertia of the ball ``L^{-1} B(p)``.

    ``r(u) = 1 / F(p, L u)`` is the radial function of the tangent ball seen
    in the frame ``L``.
    """
    N, n = P.shape
    D = len(dirs)
    if L is None:
        V = np.broadcast_to(dirs, (N, D, n))
    else:
        V = np.matmul(dirs, np.swapaxes(L, 1, 2))
    F = finsler_batch(body, np.repeat(P, D, axis=0), V.reshape(N * D, n)).reshape(N, D)
    if np.any(F <= 0) or not np.all(np.isfinite(F)):
        raise NonFiniteRadial("tangent ball is unbounded in a sampled direction")
    r = 1.0 / F
    rn = r**n
    if not inertia:
        return rn.mean(axis=1), None
    outer = (dirs[:, :, None] * dirs[:, None, :]).reshape(D, n * n)
    S = ((rn * r * r) @ outer).reshape(N, n, n) / D
    return rn.mean(axis=1), S


def _sqrt_spd(S):
    S = S / np.trace(S, axis1=1, axis2=2)[:, None, None]
    w, U = np.linalg.eigh(S)
    w = np.maximum(w, 1e-300)
    return np.einsum("kij,kj,klj->kil", U, np.sqrt(w), U)


def _leb_quadrature(body, P, quad):
    N, n = P.shape
    omega = unit_ball_volume(n)
    dirs = directions(quad, n)
    if n == 1 or not quad.whiten:
        m, _ = _radial_moments(body, P, dirs, None, inertia=False)
        return omega * m
    coarse = directions(quad.coarse(), n)
    L = np.broadcast_to(np.eye(n), (N, n, n)).copy()
    # needle-like balls near corners need several passes before the coarse
    # directions resolve them; stop once the inertia is nearly isotropic
    active = np.arange(N)
    for _ in range(_WHITEN_PASSES):
        _, S = _radial_moments(body, P[active], coarse, L[active])
        w = np.linalg.eigvalsh(S)
        L[active] = L[active] @ _sqrt_spd(S)
        active = active[w[:, -1] > _WHITEN_COND * w[:, 0]]
        if len(active) == 0:
            break
    m, _ = _radial_moments(body, P, dirs, L, inertia=False)
    return omega * m * np.abs(np.linalg.det(L))


def closed_form_leb(body: ConvexBody, P):
    """Exact tangent-ball volumes where a closed form exists, else ``None``.

    Interval: the ball is ``(-1/F, 1/F)``.  Ellipsoid: ``F(p, .)^2`` is the
    quadratic form ``((w'Qv)^2 + delta v'Qv) / delta^2`` with ``w = p - c`` and
    ``delta = 1 - w'Qw``, whose unit ball has volume
    ``omega_n delta^((n+1)/2) / sqrt(det Q)``.
    """
    if isinstance(body, Interval):
        x = P[:, 0]
        return 4.0 * (body.max - x) * (x - body.min) / (body.max - body.min)
    if isinstance(body, Ellipsoid):
        W = P - body.center
        delta = 1.0 - np.einsum("ij,ij->i", W @ body.Q, W)
        n = body.dim
        return unit_ball_volume(n) * delta ** (0.5 * (n + 1)) / math.sqrt(np.linalg.det(body.Q))
    return None


def tangent_ball_volumes(body: ConvexBody, P, quad: QuadratureSpec | None = None):
    """Vectorised :func:`tangent_ball_volume` for interior rows of ``P``."""
    P = as_points(P, body.dim)
    quad = quad or QuadratureSpec.default(body.dim)
    D = len(directions(quad, body.dim))
    step = max(1, _BLOCK // D)
    out = np.empty(len(P))
    for i in range(0, len(P), step):
        out[i:i + step] = _leb_quadrature(body, P[i:i + step], quad)
    return out


def tangent_ball_volume(body: ConvexBody, p, quad: QuadratureSpec | None = None) -> float:
    """Lebesgue volume of ``{v : F(p, v) < 1}`` by the radial formula."""
    p = _check_inside(body, p)
    return float(tangent_ball_volumes(body, p[None, :], quad)[0])


def densities(body: ConvexBody, P, quad: QuadratureSpec | None = None):
    """Busemann densities at interior rows of ``P``.

    With ``quad=None`` the closed form is used when the body has one and the
    default quadrature otherwise; an explicit ``quad`` always integrates.
    """
    P = as_points(P, body.dim)
    leb = closed_form_leb(body, P) if quad is None else None
    if leb is None:
        leb = tangent_ball_volumes(body, P, quad)
    return unit_ball_volume(body.dim) / leb


def density(body: ConvexBody, p, quad: QuadratureSpec | None = None) -> DensityValue:
    p = _check_inside(body, p)
    P = p[None, :]
    leb = closed_form_leb(body, P) if quad is None else None
    if leb is None:
        leb = tangent_ball_volumes(body, P, quad)
    leb = float(leb[0])
    omega = unit_ball_volume(body.dim)
    return DensityValue(leb, omega / leb, omega)
