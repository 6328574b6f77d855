"""Rayleigh quotients of tent functions and the product-amenability checks.

Every quotient computed here is a witness: it bounds the corresponding
infimum (bottom of the spectrum or Sobolev constant) from above.  Nothing in
this module claims the value of an infimum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import ConvexBody, Product, _vector
from .errors import (
    ConfigError,
    PointOutside,
    PrecisionLoss,
    SupportEscapesBody,
    VariantBodyMismatch,
    ZeroDenominator,
)
from .measure import PolarPlan, SamplerSpec, _factor_quad, density_function
from .metric import ANGLE_GRID, MC_DIRECTIONS, QuadratureSpec, directions, distance_batch, finsler_batch

LAMBDA1 = "lambda1"
SOBOLEV = "sobolev"
_FORM_POWER = {LAMBDA1: 2, SOBOLEV: 1}
FD_STEP = 1e-4
# largest tolerated ratio of coordinate rounding (in Hilbert length) to the FD step
FD_NOISE = 1e-3


@dataclass(frozen=True)
class Tent:
    """``scale * max(0, 1 - d(center, x) / radius)``; Lipschitz constant ``|scale| / radius``."""

    center: tuple
    radius: float
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not self.radius > 0:
            raise ConfigError("tent radius must be positive")


@dataclass(frozen=True)
class ProductOf:
    """``h(x_A, x_C) = f(x_A) g(x_C)`` on a two-factor product body."""

    f: object
    g: object


@dataclass
class RayleighResult:
    numerator: float
    denominator: float
    quotient: float
    form: str
    stderr_numerator: float = 0.0
    stderr_denominator: float = 0.0
    stderr: float = 0.0
    params: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "form": self.form,
            "quotient": self.quotient,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "stderr": self.stderr,
            "stderr_numerator": self.stderr_numerator,
            "stderr_denominator": self.stderr_denominator,
            "params": self.params,
        }


def _check_variant(body, tf):
    if isinstance(tf, Tent):
        if len(tf.center) != body.dim:
            raise VariantBodyMismatch(f"tent center has dimension {len(tf.center)}, body has {body.dim}")
        if not body.contains(tf.center):
            raise SupportEscapesBody("tent center is outside the body")
    elif isinstance(tf, ProductOf):
        if not isinstance(body, Product) or len(body.factors) != 2:
            raise VariantBodyMismatch("ProductOf needs a two-factor product body")
        _check_variant(body.factors[0], tf.f)
        _check_variant(body.factors[1], tf.g)
    else:
        raise VariantBodyMismatch(f"unknown test function {tf!r}")


def tf_values(body: ConvexBody, tf, X):
    """Vectorised test-function values at interior rows of ``X``."""
    if isinstance(tf, Tent):
        c = np.asarray(tf.center)
        d = distance_batch(body, np.broadcast_to(c, X.shape), X)
        return tf.scale * np.maximum(0.0, 1.0 - d / tf.radius)
    XA, XC = body.blocks(X)
    return tf_values(body.factors[0], tf.f, XA) * tf_values(body.factors[1], tf.g, XC)


def _maybe_nonzero(body, tf, X, margin):
    """Rows whose Hilbert ``margin``-neighbourhood may meet the support."""
    if isinstance(tf, Tent):
        if tf.scale == 0:
            return np.zeros(len(X), dtype=bool)
        c = np.asarray(tf.center)
        return distance_batch(body, np.broadcast_to(c, X.shape), X) <= tf.radius + margin
    XA, XC = body.blocks(X)
    return _maybe_nonzero(body.factors[0], tf.f, XA, margin) & _maybe_nonzero(body.factors[1], tf.g, XC, margin)


def evaluate_test_function(body: ConvexBody, tf, x) -> float:
    _check_variant(body, tf)
    x = _vector(x, body.dim)
    if not body.contains(x):
        raise PointOutside(f"{x.tolist()} is not in the open body")
    return float(tf_values(body, tf, x[None, :])[0])


def _default_quad(dim):
    if dim == 2:
        return QuadratureSpec(ANGLE_GRID, 256)
    if dim == 1:
        return QuadratureSpec(MC_DIRECTIONS, 8)
    return QuadratureSpec(MC_DIRECTIONS, 2048)


def fd_dual_gradients(body, tf, X, fd_step=FD_STEP, quad=None, block=1 << 20):
    """Vectorised :func:`fd_dual_gradient_norm` over the rows of ``X``.

    Along direction ``theta`` the step is ``fd_step * min(1, 1 / F(x, theta))``
    in ambient units, so its Hilbert length never exceeds ``fd_step``; this
    keeps ``x +- step * theta`` inside the body.

    Rounding a coordinate moves a point by a Hilbert length of about
    ``ulp * max_theta F(x, theta)``, which blows up near the boundary; when
    that exceeds ``FD_NOISE * fd_step`` the differences are meaningless and
    :class:`PrecisionLoss` is raised.
    """
    quad = quad or _default_quad(body.dim)
    dirs = directions(quad, body.dim)
    D, n = dirs.shape
    out = np.zeros(len(X))
    live = np.flatnonzero(_maybe_nonzero(body, tf, X, 1.001 * fd_step))
    step = max(1, block // D)
    for i in range(0, len(live), step):
        rows = live[i:i + step]
        P = np.repeat(X[rows], D, axis=0)
        V = np.tile(dirs, (len(rows), 1))
        F = finsler_batch(body, P, V)
        Fmax = F.reshape(len(rows), D).max(axis=1)
        noise = np.spacing(np.abs(X[rows]).max(axis=1)) * math.sqrt(n) * Fmax
        if np.any(noise > FD_NOISE * fd_step):
            raise PrecisionLoss(
                f"support reaches points where rounding ({noise.max():.1e} in Hilbert length) "
                f"swamps fd_step={fd_step:g}; use a smaller radius or a larger step"
            )
        eps = fd_step * np.minimum(1.0, 1.0 / F)
        fp = tf_values(body, tf, P + eps[:, None] * V)
        fm = tf_values(body, tf, P - eps[:, None] * V)
        ratio = np.abs(fp - fm) / (2.0 * eps * F)
        out[rows] = ratio.reshape(len(rows), D).max(axis=1)
    return out


def fd_dual_gradient_norm(body: ConvexBody, tf, x, fd_step: float = FD_STEP, quad: QuadratureSpec | None = None) -> float:
    """Central-difference estimate of the dual norm of ``df`` at ``x``.

    ``max_theta |f(x + e theta) - f(x - e theta)| / (2 e F(x, theta))`` over the
    quadrature directions.
    """
    _check_variant(body, tf)
    x = _vector(x, body.dim)
    if not body.contains(x):
        raise PointOutside(f"{x.tolist()} is not in the open body")
    return float(fd_dual_gradients(body, tf, x[None, :], fd_step, quad)[0])


def _plan_for(body, tf, n_samples, shell_width):
    if isinstance(tf, Tent):
        return PolarPlan.for_ball(body, tf.center, tf.radius + 1.0, n_samples, shell_width)
    parts = [
        (body.factors[0], tf.f.center, tf.f.radius + 1.0),
        (body.factors[1], tf.g.center, tf.g.radius + 1.0),
    ]
    return PolarPlan(body, parts, n_samples, shell_width)


def rayleigh_quotient(
    body: ConvexBody,
    tf,
    form: str = LAMBDA1,
    sampler: SamplerSpec | None = None,
    quad: QuadratureSpec | None = None,
    fd_step: float = FD_STEP,
) -> RayleighResult:
    """``int ||df||*^k dmu / int |f|^k dmu`` with ``k = 2`` (lambda1) or ``1`` (sobolev).

    The support of a tent of radius ``R`` is the metric ball ``B(c, R)``,
    which lies in the asymptotic ball ``AsB(c, R + 1)``; both integrals are
    estimated on the same stratified polar samples of that set.
    """
    if form not in _FORM_POWER:
        raise ConfigError(f"unknown Rayleigh form {form!r}")
    if not body.is_bounded:
        raise ConfigError("Rayleigh quotients are estimated on bounded bodies")
    sampler = sampler or SamplerSpec()
    quad = quad or _default_quad(body.dim)
    _check_variant(body, tf)
    k = _FORM_POWER[form]
    plan = _plan_for(body, tf, sampler.n_samples, sampler.shell_width)
    X, weight, label = plan.draw(sampler.seed)
    if not np.all(body._contains(X)):
        raise SupportEscapesBody("a sampled support point lies outside the body")
    fvals = tf_values(body, tf, X)
    grads = fd_dual_gradients(body, tf, X, fd_step, quad)
    live = (fvals != 0) | (grads != 0)
    h = np.zeros(len(X))
    hfun = density_function(body, sampler.density_mode, quad)
    if live.any():
        h[live] = hfun(X[live])
    est, cov = plan.integrate(np.column_stack([grads**k * h, np.abs(fvals) ** k * h]), weight, label)
    num, den = float(est[0]), float(est[1])
    if den <= 0:
        raise ZeroDenominator("the test function vanishes on every sample")
    q = num / den
    var_q = q * q * (cov[0, 0] / num**2 + cov[1, 1] / den**2 - 2 * cov[0, 1] / (num * den)) if num > 0 else cov[0, 0] / den**2
    return RayleighResult(
        numerator=num,
        denominator=den,
        quotient=q,
        form=form,
        stderr_numerator=float(math.sqrt(cov[0, 0])),
        stderr_denominator=float(math.sqrt(cov[1, 1])),
        stderr=float(math.sqrt(max(var_q, 0.0))),
        params={"n_samples": sampler.n_samples, "seed": sampler.seed, "fd_step": fd_step,
                "quadrature": {"mode": quad.mode, "count": quad.count}},
    )


@dataclass
class AmenabilityReport:
    sobolev_product: RayleighResult
    sobolev_f: RayleighResult
    sobolev_g: RayleighResult
    sobolev_bound: float
    sobolev_holds: bool
    lambda_product: RayleighResult
    lambda_f: RayleighResult
    lambda_g: RayleighResult
    lambda_bound: float
    lambda_holds: bool

    @property
    def ok(self):
        return self.sobolev_holds and self.lambda_holds

    def as_dict(self):
        return {
            "sobolev": {
                "product": self.sobolev_product.as_dict(),
                "f": self.sobolev_f.as_dict(),
                "g": self.sobolev_g.as_dict(),
                "bound": self.sobolev_bound,
                "holds": self.sobolev_holds,
            },
            "lambda1": {
                "product": self.lambda_product.as_dict(),
                "f": self.lambda_f.as_dict(),
                "g": self.lambda_g.as_dict(),
                "bound": self.lambda_bound,
                "holds": self.lambda_holds,
            },
        }


def product_amenability_check(
    bodyA: ConvexBody,
    bodyC: ConvexBody,
    f: Tent,
    g: Tent,
    sampler: SamplerSpec | None = None,
    quad: QuadratureSpec | None = None,
    fd_step: float = FD_STEP,
    n_sigma: float = 3.0,
) -> AmenabilityReport:
    """Compare quotients of ``h = f g`` on ``A x C`` with those of ``f`` and ``g``.

    Sobolev direction: ``Q(h) <= 2^(nA+nC) (Q(f) + Q(g))``.  Spectral
    direction, for product test functions: ``Q(h) >= 2^-(nA+nC) max(Q(f), Q(g))``.
    Both are checked up to ``n_sigma`` combined standard errors.
    """
    sampler = sampler or SamplerSpec()
    prod = Product([bodyA, bodyC])
    h = ProductOf(f, g)
    qA = _factor_quad(quad, bodyA.dim) if quad is not None and bodyA.dim > 1 else None
    qC = _factor_quad(quad, bodyC.dim) if quad is not None and bodyC.dim > 1 else None
    c = 2.0 ** (bodyA.dim + bodyC.dim)
    results = {}
    for form in (SOBOLEV, LAMBDA1):
        rp = rayleigh_quotient(prod, h, form, sampler, quad, fd_step)
        rf = rayleigh_quotient(bodyA, f, form, sampler, qA, fd_step)
        rg = rayleigh_quotient(bodyC, g, form, sampler, qC, fd_step)
        results[form] = (rp, rf, rg)
    sp, sf, sg = results[SOBOLEV]
    s_bound = c * (sf.quotient + sg.quotient)
    s_tol = n_sigma * math.sqrt(sp.stderr**2 + c * c * (sf.stderr**2 + sg.stderr**2))
    lp, lf, lg = results[LAMBDA1]
    best = lf if lf.quotient >= lg.quotient else lg
    l_bound = best.quotient / c
    l_tol = n_sigma * math.sqrt(lp.stderr**2 + (best.stderr / c) ** 2)
    return AmenabilityReport(
        sobolev_product=sp,
        sobolev_f=sf,
        sobolev_g=sg,
        sobolev_bound=s_bound,
        sobolev_holds=bool(sp.quotient <= s_bound + s_tol),
        lambda_product=lp,
        lambda_f=lf,
        lambda_g=lg,
        lambda_bound=l_bound,
        lambda_holds=bool(lp.quotient >= l_bound - l_tol),
    )
