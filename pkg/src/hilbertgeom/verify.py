"""Seeded pass/fail suites for the product inequalities and closed forms.

Tolerances follow the error source of each check: ``1e-9`` (relative to
``max(1, |value|)``) where only floating-point noise enters, 1% where a
direction quadrature is involved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _parallel
from .bodies import (
    ConvexBody,
    Ellipsoid,
    Interval,
    Orthant,
    Product,
    affine_image,
    cube,
    disk,
    sample_uniform,
)
from .measure import PolarPlan
from .metric import (
    ANGLE_GRID,
    MC_DIRECTIONS,
    QuadratureSpec,
    distance_batch,
    finsler_batch,
    tangent_ball_volumes,
)

CHORD_TOL = 1e-9
EMBED_TOL = 1e-12
QUAD_TOL = 0.01


@dataclass
class SuiteReport:
    suite_name: str
    trials: int
    failures: int
    worst_violation: float
    seed: int
    details: list = field(default_factory=list)

    @property
    def passed(self):
        return self.failures == 0

    def as_dict(self):
        return {
            "suite_name": self.suite_name,
            "trials": self.trials,
            "failures": self.failures,
            "worst_violation": self.worst_violation,
            "seed": self.seed,
            "passed": self.passed,
            "details": self.details,
        }


class _Tally:
    def __init__(self, name, seed):
        self.name = name
        self.seed = seed
        self.trials = 0
        self.worst = 0.0
        self.details = []

    def check(self, check, violation, tol, context=None):
        """Record a batch of violations; entries above ``tol`` are failures."""
        violation = np.atleast_1d(np.asarray(violation, dtype=float))
        self.trials += len(violation)
        if len(violation):
            self.worst = max(self.worst, float(np.nanmax(np.where(np.isnan(violation), np.inf, violation))))
        bad = np.flatnonzero(~(violation <= tol))
        for i in bad:
            rec = {"check": check, "index": int(i), "violation": float(violation[i])}
            if context is not None:
                rec.update({k: np.asarray(v[i]).tolist() for k, v in context.items()})
            self.details.append(rec)

    def report(self):
        return SuiteReport(self.name, self.trials, len(self.details), self.worst, self.seed, self.details)


# -- random configurations ------------------------------------------------------------


def _unit_vectors(rng, n, dim):
    g = rng.standard_normal((n, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def random_points(body: ConvexBody, n: int, rng, stress: float = 0.1) -> np.ndarray:
    """Interior points; a ``stress`` fraction is pushed to within ``1e-3`` of the boundary.

    Bounded bodies are sampled uniformly; orthants use log-normal
    coordinates; products combine their factors.
    """
    if isinstance(body, Product):
        X = np.hstack([random_points(f, n, rng, 0.0) for f in body.factors])
    elif isinstance(body, Orthant):
        X = np.exp(rng.standard_normal((n, body.dim)))
    elif body.is_bounded:
        X = sample_uniform(body, n, int(rng.integers(2**31)))
    else:
        raise ValueError(f"no sampler for unbounded {body!r}")
    if stress > 0:
        k = int(round(stress * n))
        if k:
            idx = rng.choice(n, size=k, replace=False)
            V = _unit_vectors(rng, k, body.dim)
            tp, tm = body._chords(X[idx], V)
            # walk towards the nearer finite exit
            use_minus = ~np.isfinite(tp) | (np.isfinite(tm) & (tm < tp))
            t = np.where(use_minus, tm, tp)
            V = np.where(use_minus[:, None], -V, V)
            step = np.maximum(t - 1e-3, 0.5 * t)
            Y = X[idx] + step[:, None] * V
            ok = body._contains(Y)
            X[idx[ok]] = Y[ok]
    return X


def _scaled(excess, scale):
    return np.maximum(excess, 0.0) / np.maximum(1.0, np.abs(scale))


# -- suites ----------------------------------------------------------------------------------


def suite_finsler_sandwich(bodies, trials: int = 10000, seed: int = 0) -> SuiteReport:
    """``max_i F_i(p_i, v_i) <= F(p, v) <= sum_i F_i(p_i, v_i)`` on random ``(p, v)``."""
    bodies = list(bodies)
    prod = Product(bodies)
    rng = _parallel.substream(seed, _parallel.STREAM_SUITE, 1)
    tally = _Tally("finsler_sandwich", seed)
    P = random_points(prod, trials, rng)
    V = _unit_vectors(rng, trials, prod.dim)
    F = finsler_batch(prod, P, V)
    Fi = np.column_stack([finsler_batch(f, Pi, Vi) for f, Pi, Vi in zip(prod.factors, prod.blocks(P), prod.blocks(V))])
    ctx = {"p": P, "v": V}
    tally.check("lower", _scaled(Fi.max(axis=1) - F, F), CHORD_TOL, ctx)
    tally.check("upper", _scaled(F - Fi.sum(axis=1), F), CHORD_TOL, ctx)

    # directions living in a single factor: all three quantities coincide
    m = max(1, trials // 10)
    which = rng.integers(len(bodies), size=m)
    V1 = _unit_vectors(rng, m, prod.dim)
    mask = np.zeros_like(V1)
    for i, (a, b) in enumerate(zip(prod.offsets[:-1], prod.offsets[1:])):
        mask[which == i, a:b] = 1.0
    V1 *= mask
    P1 = P[:m]
    F1 = finsler_batch(prod, P1, V1)
    Fi1 = np.column_stack([finsler_batch(f, Pi, Vi) for f, Pi, Vi in zip(prod.factors, prod.blocks(P1), prod.blocks(V1))])
    tally.check("embedding", np.abs(F1 - Fi1.sum(axis=1)) / np.maximum(1.0, F1), EMBED_TOL)
    return tally.report()


def suite_distance_sandwich(bodies, trials: int = 10000, seed: int = 0) -> SuiteReport:
    """``max_i d_i <= d <= sum_i d_i`` for random pairs of a product."""
    bodies = list(bodies)
    prod = Product(bodies)
    rng = _parallel.substream(seed, _parallel.STREAM_SUITE, 2)
    tally = _Tally("distance_sandwich", seed)
    P = random_points(prod, trials, rng)
    Q = random_points(prod, trials, rng)
    d = distance_batch(prod, P, Q)
    di = np.column_stack([distance_batch(f, a, b) for f, a, b in zip(prod.factors, prod.blocks(P), prod.blocks(Q))])
    ctx = {"p": P, "q": Q}
    tally.check("lower", _scaled(di.max(axis=1) - d, d), CHORD_TOL, ctx)
    tally.check("upper", _scaled(d - di.sum(axis=1), d), CHORD_TOL, ctx)

    same = distance_batch(prod, P[:10], P[:10])
    tally.check("identical_points", np.abs(same), 0.0)

    # pairs differing in one factor only
    m = max(1, trials // 10)
    which = rng.integers(len(bodies), size=m)
    Q1 = P[:m].copy()
    for i, (a, b) in enumerate(zip(prod.offsets[:-1], prod.offsets[1:])):
        sel = which == i
        Q1[sel, a:b] = Q[:m][sel, a:b]
    d1 = distance_batch(prod, P[:m], Q1)
    di1 = np.column_stack([distance_batch(f, a, b) for f, a, b in zip(prod.factors, prod.blocks(P[:m]), prod.blocks(Q1))])
    tally.check("single_factor", np.abs(d1 - di1.sum(axis=1)) / np.maximum(1.0, d1), EMBED_TOL)
    return tally.report()


def _quad_for(dim, quad):
    if dim == 1:
        return QuadratureSpec(MC_DIRECTIONS, 8)
    if quad is not None and ((dim == 2) == (quad.mode == ANGLE_GRID)):
        return quad
    return QuadratureSpec.default(dim)


def suite_density_sandwich(bodies, trials: int = 200, seed: int = 0, quad: QuadratureSpec | None = None) -> SuiteReport:
    """Tangent-ball form of the product measure comparison.

    With ``Leb_i`` the factors' tangent-ball volumes and ``k`` factors of total
    dimension ``N``: ``prod Leb_i / k^N <= Leb <= prod Leb_i``, equivalently
    ``c prod h_i <= h <= c k^N prod h_i`` with ``c = omega_N / prod omega_{n_i}``.
    Both sides are computed by direction quadrature.
    """
    bodies = list(bodies)
    prod = Product(bodies)
    k = len(bodies)
    rng = _parallel.substream(seed, _parallel.STREAM_SUITE, 3)
    tally = _Tally("density_sandwich", seed)
    P = random_points(prod, trials, rng, stress=0.0)
    leb = tangent_ball_volumes(prod, P, _quad_for(prod.dim, quad))
    leb_i = np.ones(trials)
    for f, Pi in zip(prod.factors, prod.blocks(P)):
        leb_i *= tangent_ball_volumes(f, Pi, _quad_for(f.dim, quad))
    ctx = {"p": P, "leb": leb, "leb_factors": leb_i}
    tally.check("upper_ball", (leb - leb_i) / leb_i, QUAD_TOL, ctx)
    tally.check("lower_ball", (leb_i / k ** prod.dim - leb) / leb, QUAD_TOL, ctx)
    return tally.report()


def suite_closed_forms(quad: QuadratureSpec | None = None, trials: int = 100, seed: int = 0,
                       dims=(2, 3)) -> SuiteReport:
    """Tangent-ball volumes of cubes, orthants and the disk against closed forms."""
    rng = _parallel.substream(seed, _parallel.STREAM_SUITE, 4)
    tally = _Tally("closed_forms", seed)
    for n in dims:
        q = _quad_for(n, quad)
        C = cube(n)
        X = sample_uniform(C, trials, int(rng.integers(2**31)))
        leb = tangent_ball_volumes(C, X, q)
        base = 2.0**n * np.prod(1.0 - X**2, axis=1)
        ctx = {"p": X, "leb": leb}
        tally.check(f"cube{n}_upper", (leb - base) / base, QUAD_TOL, ctx)
        lower = base / math.factorial(n)
        tally.check(f"cube{n}_lower", (lower - leb) / lower, QUAD_TOL, ctx)

        O = Orthant(n)
        Y = np.exp(rng.uniform(-2, 2, size=(trials, n)))
        leb = tangent_ball_volumes(O, Y, q)
        base = 4.0**n * np.prod(Y, axis=1)
        ctx = {"p": Y, "leb": leb}
        tally.check(f"orthant{n}_upper", (leb - base) / base, QUAD_TOL, ctx)
        lower = base / math.factorial(n)
        tally.check(f"orthant{n}_lower", (lower - leb) / lower, QUAD_TOL, ctx)
        if n == 2:
            exact = 12.0 * np.prod(Y, axis=1)
            tally.check("orthant2_exact", np.abs(leb - exact) / exact, 0.005, ctx)

    q2 = _quad_for(2, quad)
    leb = tangent_ball_volumes(disk(), np.zeros((1, 2)), q2)
    tally.check("disk_center", np.abs(leb - math.pi) / math.pi, 0.005)
    cleb = tangent_ball_volumes(cube(3), np.zeros((1, 3)), _quad_for(3, quad))
    tally.check("cube3_center", np.abs(cleb - 8.0) / 8.0, QUAD_TOL)
    return tally.report()


def _random_affine(body, rng):
    """Random well-conditioned affine map, block-diagonal along product factors."""
    dims = body.dims if isinstance(body, Product) else (body.dim,)
    A = np.zeros((body.dim, body.dim))
    o = 0
    for n in dims:
        Q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
        Q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
        A[o:o + n, o:o + n] = Q1 @ np.diag(np.exp(rng.uniform(-0.5, 0.5, n))) @ Q2
        o += n
    return A, rng.standard_normal(body.dim)


def suite_metric_axioms(body: ConvexBody, trials: int = 10000, seed: int = 0, n_maps: int = 8) -> SuiteReport:
    """Symmetry, triangle inequality, chord additivity and affine invariance."""
    rng = _parallel.substream(seed, _parallel.STREAM_SUITE, 5)
    tally = _Tally("metric_axioms", seed)
    P = random_points(body, trials, rng)
    Q = random_points(body, trials, rng)
    R = random_points(body, trials, rng)
    dpq = distance_batch(body, P, Q)
    dqp = distance_batch(body, Q, P)
    tally.check("symmetry", np.abs(dpq - dqp) / np.maximum(1.0, dpq), CHORD_TOL, {"p": P, "q": Q})

    dqr = distance_batch(body, Q, R)
    dpr = distance_batch(body, P, R)
    tally.check("triangle", _scaled(dpr - dpq - dqr, dpr), CHORD_TOL, {"p": P, "q": Q, "r": R})

    lam = rng.uniform(0.05, 0.95, size=trials)[:, None]
    M = P + lam * (R - P)
    d1 = distance_batch(body, P, M)
    d2 = distance_batch(body, M, R)
    tally.check("chord_additivity", np.abs(dpr - d1 - d2) / np.maximum(1.0, dpr), CHORD_TOL, {"p": P, "r": R})

    per = -(-trials // n_maps)
    viol = []
    for j in range(n_maps):
        A, c = _random_affine(body, rng)
        img = affine_image(body, A, c)
        sl = slice(j * per, min(trials, (j + 1) * per))
        TP = P[sl] @ A.T + c
        TQ = Q[sl] @ A.T + c
        dt = distance_batch(img, TP, TQ)
        viol.append(np.abs(dt - dpq[sl]) / np.maximum(1.0, dpq[sl]))
    tally.check("affine_invariance", np.concatenate(viol), CHORD_TOL)
    return tally.report()


def _ball_samples(body, p, R, n, seed):
    plan = PolarPlan.for_ball(body, p, R + 1.0, max(n, 1000))
    X, _, _ = plan.draw(seed)
    return X[distance_batch(body, np.broadcast_to(p, X.shape), X) <= R]


def suite_ball_inclusions(bodies, R: float = 2.0, trials: int = 2000, seed: int = 0) -> SuiteReport:
    """Metric-ball inclusions for a product of bounded bodies.

    * ``B(p, R)`` lies in the product of the factor balls ``B_i(p_i, R)``;
    * the product of the factor balls ``B_i(p_i, R / k)`` lies in ``B(p, R)``;
    * ``B(p, R - 1)`` lies in the asymptotic ball ``AsB(p, R)``.
    """
    bodies = list(bodies)
    prod = Product(bodies)
    k = len(bodies)
    rng = _parallel.substream(seed, _parallel.STREAM_SUITE, 6)
    tally = _Tally("ball_inclusions", seed)
    p = random_points(prod, 1, rng, stress=0.0)[0]
    s = int(rng.integers(2**31))

    X = _ball_samples(prod, p, R, trials, s)[:trials]
    P = np.broadcast_to(p, X.shape)
    for i, (f, a, b) in enumerate(zip(prod.factors, prod.blocks(P), prod.blocks(X))):
        di = distance_batch(f, a, b)
        tally.check(f"factor_ball_{i}", np.maximum(di - R, 0.0), 0.0, {"x": X})

    blocks = []
    for f, pi in zip(prod.factors, prod.blocks(p)):
        Xi = np.empty((0, f.dim))
        j = 0
        while len(Xi) < trials:
            Xi = np.vstack([Xi, _ball_samples(f, pi, R / k, trials, s + 1 + j)])
            j += 1
        blocks.append(Xi[rng.permutation(len(Xi))[:trials]])
    Y = np.hstack(blocks)
    dY = distance_batch(prod, np.broadcast_to(p, Y.shape), Y)
    tally.check("split_ball", _scaled(dY - R, R), CHORD_TOL, {"x": Y})

    if R > 1:
        Z = _ball_samples(prod, p, R - 1.0, trials, s + 1000)[:trials]
        asb = prod._dilate(p, math.tanh(R))
        tally.check("asymptotic_lower", (~asb._contains(Z)).astype(float), 0.0, {"x": Z})
    return tally.report()


SUITES = {
    "sandwich": suite_finsler_sandwich,
    "distance": suite_distance_sandwich,
    "density": suite_density_sandwich,
    "closed-forms": suite_closed_forms,
    "axioms": suite_metric_axioms,
    "inclusions": suite_ball_inclusions,
}
