"""Hilbert measure of regions, metric-ball volumes and volume entropy.

Ball volumes are estimated on the asymptotic ball ``AsB(p, R + 1)``, the
image of the body under the dilation of ratio ``tanh(R + 1)`` about ``p``,
which contains ``B(p, R)``.  The integral is taken in polar coordinates
about ``p``: a point is ``p + s * rho(theta) * theta`` where ``rho`` is the
distance to the boundary along the unit direction ``theta`` and ``s`` is the
gauge, and ``dx = rho^n s^(n-1) ds dtheta``.  The gauge range is split into
shells ``tanh(r_j) <= s < tanh(r_{j+1})`` of equal hyperbolic width, and the
sample budget is spread evenly across shells (stratified sampling).  For a
product body every factor gets its own polar coordinates and shells, since
the asymptotic ball of a product is the product of the factors' asymptotic
balls.  The density grows like ``exp((n+1) r)`` towards the boundary; within
one shell it varies by a bounded factor, which keeps the variance flat in R.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _parallel
from .bodies import ConvexBody, Product, _vector, bounding_box
from .errors import (
    ConfigError,
    DegenerateFit,
    DivergentIntegral,
    PointOutside,
    RegionEscapesBody,
    UnboundedBody,
    UnderSampled,
)
from .metric import (
    ANGLE_GRID,
    MC_DIRECTIONS,
    QuadratureSpec,
    closed_form_leb,
    distance_batch,
    tangent_ball_volumes,
    unit_ball_volume,
)

EXACT = "exact"
PRODUCT_APPROX = "product_approx"
MIN_SAMPLES = 1000


@dataclass(frozen=True)
class SamplerSpec:
    """Monte-Carlo budget, seed and density evaluation mode.

    ``shell_width`` is the hyperbolic width of the polar strata; it is widened
    automatically when the budget cannot give every stratum 8 samples.
    """

    n_samples: int = 20000
    seed: int = 0
    density_mode: str = EXACT
    shell_width: float = 0.25

    def __post_init__(self):
        if self.density_mode not in (EXACT, PRODUCT_APPROX):
            raise ConfigError(f"unknown density mode {self.density_mode!r}")
        if self.n_samples < MIN_SAMPLES:
            raise UnderSampled(f"n_samples={self.n_samples} is below {MIN_SAMPLES}")
        if not self.shell_width > 0:
            raise ConfigError("shell_width must be positive")

    def with_seed(self, seed):
        return SamplerSpec(self.n_samples, seed, self.density_mode, self.shell_width)


@dataclass
class BallVolumeEstimate:
    value: float
    stderr: float
    n_accepted: int
    sampling_region_volume: float

    def as_dict(self):
        return {
            "value": self.value,
            "stderr": self.stderr,
            "n_accepted": self.n_accepted,
            "sampling_region_volume": self.sampling_region_volume,
        }


@dataclass
class EntropyEstimate:
    slope: float
    intercept: float
    r_grid: np.ndarray
    log_volumes: np.ndarray
    stderr_slope: float
    volumes: list = field(default_factory=list)

    def as_dict(self):
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "stderr_slope": self.stderr_slope,
            "r_grid": [float(r) for r in self.r_grid],
            "log_volumes": [float(v) for v in self.log_volumes],
            "volumes": [v.as_dict() for v in self.volumes],
        }

    def csv_rows(self):
        """Rows ``(R, log_volume, stderr, n_accepted)``; stderr is of log_volume."""
        rows = []
        for r, lv, v in zip(self.r_grid, self.log_volumes, self.volumes):
            rows.append((float(r), float(lv), v.stderr / v.value, v.n_accepted))
        return rows


# -- density evaluation -------------------------------------------------------------


def _factor_quad(quad, n):
    if quad is not None and ((n == 2 and quad.mode == ANGLE_GRID) or (n >= 3 and quad.mode == MC_DIRECTIONS)):
        return quad
    return QuadratureSpec.default(n)


def _leb_exact(body, X, quad):
    leb = closed_form_leb(body, X)
    if leb is None:
        leb = tangent_ball_volumes(body, X, quad or QuadratureSpec.default(body.dim))
    return leb


def density_function(body: ConvexBody, mode: str = EXACT, quad: QuadratureSpec | None = None):
    """Vectorised ``X -> h(X)`` for the chosen density mode.

    ``exact`` uses the closed form where one exists (intervals, ellipsoids)
    and the direction quadrature otherwise.  ``product_approx`` replaces the
    product's tangent ball by the product of the factors' tangent balls,
    which contains it, so it underestimates the density by a factor in
    ``[1, k^(n_1 + ... + n_k)]``.
    """
    omega = unit_ball_volume(body.dim)
    if mode == EXACT:
        return lambda X: omega / _leb_exact(body, X, quad)
    if not isinstance(body, Product):
        raise ConfigError("product_approx density needs a product body")

    def h(X):
        leb = np.ones(len(X))
        for f, Xi in zip(body.factors, body.blocks(X)):
            leb *= _leb_exact(f, Xi, _factor_quad(quad, f.dim))
        return omega / leb

    return h


# -- stratified polar sampling ----------------------------------------------------------


def _sphere(rng, m, n):
    if n == 1:
        return np.where(rng.random((m, 1)) < 0.5, -1.0, 1.0)
    g = rng.standard_normal((m, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


class PolarPlan:
    """Stratified polar sampler of ``prod_i AsB_i(c_i, rho_max_i)``.

    ``parts`` lists ``(factor_body, center, rho_max)``; a non-product body is
    its own single factor.
    """

    def __init__(self, body, parts, n_samples, shell_width=0.25, min_per_stratum=8):
        self.body = body
        self.parts = []
        for f, c, rho in parts:
            if not f.is_bounded:
                raise UnboundedBody("polar sampling needs a bounded body")
            self.parts.append((f, np.asarray(c, dtype=float), float(rho)))
        width = float(shell_width)
        while True:
            counts = [max(1, math.ceil(rho / width)) for _, _, rho in self.parts]
            if math.prod(counts) * min_per_stratum <= n_samples or all(c == 1 for c in counts):
                break
            width *= 1.25
        self.edges = []
        for (f, _, rho), J in zip(self.parts, counts):
            s = np.tanh(np.linspace(0.0, rho, J + 1))
            self.edges.append(s ** f.dim)  # stratify w = s^n, uniform in each shell
        self.strata = list(itertools.product(*[range(J) for J in counts]))
        self.per_stratum = max(2, n_samples // len(self.strata))
        self.volumes = np.array(
            [
                math.prod(unit_ball_volume(f.dim) * (e[j + 1] - e[j]) for (f, _, _), e, j in zip(self.parts, self.edges, idx))
                for idx in self.strata
            ]
        )

    @classmethod
    def for_ball(cls, body, center, rho, n_samples, shell_width=0.25):
        center = np.asarray(center, dtype=float)
        if isinstance(body, Product):
            parts = [(f, c, rho) for f, c in zip(body.factors, body.blocks(center))]
        else:
            parts = [(body, center, rho)]
        return cls(body, parts, n_samples, shell_width)

    def draw(self, seed):
        """Sample points, their polar weights and stratum labels."""
        m = self.per_stratum
        S = len(self.strata)
        k = len(self.parts)
        thetas = [np.empty((S * m, f.dim)) for f, _, _ in self.parts]
        u = np.empty((S * m, k))

        def fill(j):
            rng = _parallel.substream(seed, _parallel.STREAM_POLAR, j)
            for i, (f, _, _) in enumerate(self.parts):
                thetas[i][j * m:(j + 1) * m] = _sphere(rng, m, f.dim)
            u[j * m:(j + 1) * m] = rng.random((m, k))

        _parallel.map_chunks(fill, range(S))
        label = np.repeat(np.arange(S), m)
        idx = np.array(self.strata)[label]
        weight = np.ones(S * m)
        blocks = []
        for i, (f, c, _) in enumerate(self.parts):
            th = thetas[i]
            rho_k, _ = f._chords(np.broadcast_to(c, th.shape), th)
            if not np.all(np.isfinite(rho_k)):
                raise UnboundedBody("a sampled ray from the center never leaves the body")
            e = self.edges[i]
            lo, hi = e[idx[:, i]], e[idx[:, i] + 1]
            s = (lo + u[:, i] * (hi - lo)) ** (1.0 / f.dim)
            blocks.append(c + (s * rho_k)[:, None] * th)
            weight *= rho_k ** f.dim
        return np.hstack(blocks), weight, label

    def integrate(self, values, weight, label):
        """Stratified estimates of ``int g_k dx`` for the columns of ``values``.

        Returns ``(estimates, covariance)``.
        """
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        m = self.per_stratum
        S = len(self.strata)
        Y = (values * weight[:, None]).reshape(S, m, -1)
        mean = Y.mean(axis=1)
        dev = Y - mean[:, None, :]
        cov = np.einsum("smi,smj->sij", dev, dev) / (m - 1)
        est = self.volumes @ mean
        covar = np.einsum("s,sij->ij", self.volumes**2 / m, cov)
        return est, covar


# -- public estimators --------------------------------------------------------------------


def _check_point(body, p):
    p = _vector(p, body.dim)
    if not body.contains(p):
        raise PointOutside(f"{p.tolist()} is not in the open body")
    return p


def _evaluate_masked(fn, X, mask, block=65536):
    out = np.zeros(len(X))
    idx = np.flatnonzero(mask)
    for i in range(0, len(idx), block):
        sl = idx[i:i + block]
        out[sl] = fn(X[sl])
    return out


def metric_ball_volume(
    body: ConvexBody,
    p,
    R: float,
    sampler: SamplerSpec | None = None,
    quad: QuadratureSpec | None = None,
) -> BallVolumeEstimate:
    """Hilbert measure of the metric ball ``B(p, R)``."""
    sampler = sampler or SamplerSpec()
    if not body.is_bounded:
        raise UnboundedBody("metric ball volumes are estimated for bounded bodies only")
    p = _check_point(body, p)
    if not R > 0:
        raise ConfigError("radius must be positive")
    h = density_function(body, sampler.density_mode, quad)
    plan = PolarPlan.for_ball(body, p, R + 1.0, sampler.n_samples, sampler.shell_width)
    X, weight, label = plan.draw(sampler.seed)
    accept = distance_batch(body, np.broadcast_to(p, X.shape), X) <= R
    g = _evaluate_masked(h, X, accept)
    est, cov = plan.integrate(np.column_stack([g, np.ones(len(g))]), weight, label)
    return BallVolumeEstimate(
        value=float(est[0]),
        stderr=float(math.sqrt(cov[0, 0])),
        n_accepted=int(accept.sum()),
        sampling_region_volume=float(est[1]),
    )


def _hill_tail_index(values, frac=0.01, k_min=20):
    v = np.sort(values[values > 0])[::-1]
    k = max(k_min, len(v) // int(1 / frac))
    if len(v) <= k:
        return math.inf
    logs = np.log(v[:k]) - math.log(v[k])
    mean = logs.mean()
    return math.inf if mean <= 0 else 1.0 / mean


def _divergence_check(vals, box_volume):
    n = len(vals)
    est = box_volume * vals.mean()
    se = box_volume * vals.std(ddof=1) / math.sqrt(n)
    if est > 0 and se / est > 10:
        raise DivergentIntegral(f"relative stderr {se / est:.3g} exceeds 10")
    alpha = _hill_tail_index(vals)
    if alpha < 1.5:
        raise DivergentIntegral(
            f"integrand tail index {alpha:.2f} < 1.5: the region reaches the boundary "
            "(or comes too close for this budget) and the estimate does not converge"
        )
    return est, se


def hilbert_measure(
    body: ConvexBody,
    region: ConvexBody,
    sampler: SamplerSpec | None = None,
    quad: QuadratureSpec | None = None,
) -> BallVolumeEstimate:
    """``mu_body(region)`` by uniform sampling of the region's bounding box.

    The Hilbert measure of the whole body is infinite; a region touching the
    boundary produces a heavy-tailed integrand, which is reported as
    :class:`DivergentIntegral` rather than returned as a number.
    """
    sampler = sampler or SamplerSpec()
    if region.dim != body.dim:
        raise ConfigError("region and body dimensions differ")
    box = bounding_box(region)
    h = density_function(body, sampler.density_mode, quad)
    n = sampler.n_samples
    chunk = _parallel.CHUNK_SIZE
    n_chunks = -(-n // chunk)

    def run(k):
        rng = _parallel.substream(sampler.seed, _parallel.STREAM_MEASURE, k)
        m = min(chunk, n - k * chunk)
        X = rng.uniform(box.min, box.max, size=(m, body.dim))
        inside = region._contains(X)
        if not np.all(body._contains(X[inside])):
            raise RegionEscapesBody("a sampled region point lies outside the body")
        return _evaluate_masked(h, X, inside), int(inside.sum())

    half = (n_chunks + 1) // 2
    first = _parallel.map_chunks(run, range(half))
    if n_chunks > 1:
        _divergence_check(np.concatenate([v for v, _ in first]), box.volume)
    rest = _parallel.map_chunks(run, range(half, n_chunks))
    vals = np.concatenate([v for v, _ in first + rest])
    est, se = _divergence_check(vals, box.volume)
    return BallVolumeEstimate(float(est), float(se), sum(c for _, c in first + rest), box.volume)


def _radius_seed(seed, i):
    return int(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, 7919, i]).generate_state(1)[0])


def fit_log_slope(r_grid, volumes):
    """Least-squares slope of ``log value`` against ``R`` with propagated stderr."""
    r = np.asarray(r_grid, dtype=float)
    vals = np.array([v.value for v in volumes])
    if np.any(vals <= 0):
        raise DegenerateFit("a ball volume estimate is zero")
    logs = np.log(vals)
    rel = np.array([v.stderr for v in volumes]) / vals
    dr = r - r.mean()
    w = dr / np.sum(dr**2)
    slope = float(w @ logs)
    intercept = float(logs.mean() - slope * r.mean())
    return slope, intercept, logs, float(math.sqrt(np.sum((w * rel) ** 2)))


def entropy_estimate(
    body: ConvexBody,
    p,
    r_min: float = 3.0,
    r_max: float = 6.0,
    steps: int = 7,
    sampler: SamplerSpec | None = None,
    quad: QuadratureSpec | None = None,
) -> EntropyEstimate:
    """Regression slope of ``log mu(B(p, R))`` over a uniform radius grid.

    This is the finite-window proxy of ``limsup log mu(B(p, R)) / R``; with
    polynomial growth ``R^a`` it reads about ``a / R`` rather than 0.
    """
    sampler = sampler or SamplerSpec()
    if not 0 < r_min < r_max:
        raise ConfigError("need 0 < r_min < r_max")
    if steps < 4:
        raise ConfigError("entropy fits need at least 4 radii")
    grid = np.linspace(r_min, r_max, steps)
    vols = [
        metric_ball_volume(body, p, R, sampler.with_seed(_radius_seed(sampler.seed, i)), quad)
        for i, R in enumerate(grid)
    ]
    slope, intercept, logs, se = fit_log_slope(grid, vols)
    return EntropyEstimate(slope, intercept, grid, logs, se, vols)


@dataclass
class AdditivityReport:
    factor_entropies: list
    product_entropy: EntropyEstimate
    max_factor: float
    sum_factors: float
    lower_violation: bool
    upper_violation: bool

    @property
    def triple(self):
        return (self.max_factor, self.product_entropy.slope, self.sum_factors)

    @property
    def ok(self):
        return not (self.lower_violation or self.upper_violation)

    def as_dict(self):
        return {
            "max_factor": self.max_factor,
            "product": self.product_entropy.slope,
            "sum_factors": self.sum_factors,
            "factor_slopes": [e.slope for e in self.factor_entropies],
            "factor_stderrs": [e.stderr_slope for e in self.factor_entropies],
            "product_stderr": self.product_entropy.stderr_slope,
            "lower_violation": self.lower_violation,
            "upper_violation": self.upper_violation,
        }


def entropy_additivity_report(
    bodies,
    points,
    r_min: float = 3.0,
    r_max: float = 6.0,
    steps: int = 7,
    sampler: SamplerSpec | None = None,
    quad: QuadratureSpec | None = None,
    product_sampler: SamplerSpec | None = None,
    n_sigma: float = 3.0,
) -> AdditivityReport:
    """Entropy of each factor and of their product, with the sandwich check.

    Flags ``max_i ent(A_i) <= ent(prod) <= sum_i ent(A_i)`` violations that
    exceed ``n_sigma`` combined standard errors.
    """
    bodies = list(bodies)
    sampler = sampler or SamplerSpec()
    product_sampler = product_sampler or sampler
    for b in bodies:
        if not b.is_bounded:
            raise UnboundedBody("entropy additivity is checked for bounded factors only")
    factor_sampler = SamplerSpec(sampler.n_samples, sampler.seed, EXACT, sampler.shell_width)
    ents = [entropy_estimate(b, p, r_min, r_max, steps, factor_sampler, None) for b, p in zip(bodies, points)]
    prod = Product(bodies)
    pp = np.concatenate([np.atleast_1d(np.asarray(p, dtype=float)) for p in points])
    pe = entropy_estimate(prod, pp, r_min, r_max, steps, product_sampler, quad)
    slopes = np.array([e.slope for e in ents])
    ses = np.array([e.stderr_slope for e in ents])
    imax = int(np.argmax(slopes))
    lo_tol = n_sigma * math.hypot(ses[imax], pe.stderr_slope)
    hi_tol = n_sigma * math.sqrt(np.sum(ses**2) + pe.stderr_slope**2)
    return AdditivityReport(
        factor_entropies=ents,
        product_entropy=pe,
        max_factor=float(slopes[imax]),
        sum_factors=float(slopes.sum()),
        lower_violation=bool(slopes[imax] - pe.slope > lo_tol),
        upper_violation=bool(pe.slope - slopes.sum() > hi_tol),
    )
