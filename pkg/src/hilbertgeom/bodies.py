"""Convex bodies and exact chord computations.

A body is one of five variants: :class:`Interval`, :class:`HPolytope`,
:class:`Ellipsoid`, :class:`Orthant` and :class:`Product`.  All of them are
open sets.  Each variant implements two vectorised kernels used by the rest
of the package:

``_contains(P)``
    strict membership of the rows of ``P`` (shape ``(N, dim)``);
``_chords(P, V)``
    the exit times ``(t_plus, t_minus)`` of the lines ``P + t V`` with
    ``np.inf`` when a ray never leaves the body.

The public module-level functions validate their inputs and then call these
kernels.
"""
from __future__ import annotations

import json
import math
from typing import NamedTuple, Sequence

import numpy as np

from . import _parallel
from .errors import (
    ConfigError,
    DimensionMismatch,
    ImproperBody,
    InvalidBodySpec,
    MissingBBox,
    PointOutside,
    RejectionStall,
    UnboundedBody,
    UnrepresentableImage,
    ZeroDirection,
)

INF = math.inf


class ChordTimes(NamedTuple):
    """Times at which ``p + t v`` and ``p - t v`` reach the boundary."""

    t_plus: float
    t_minus: float


class Box(NamedTuple):
    min: np.ndarray
    max: np.ndarray

    @property
    def volume(self) -> float:
        return float(np.prod(self.max - self.min))

    @property
    def dim(self) -> int:
        return len(self.min)


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


def as_points(P, dim):
    P = np.asarray(P, dtype=float)
    if P.ndim == 1:
        P = P.reshape(1, -1) if P.size == dim else P.reshape(-1, 1) if dim == 1 else P
    if P.ndim != 2 or P.shape[1] != dim:
        raise DimensionMismatch(f"expected points of dimension {dim}, got shape {P.shape}")
    return P


def _vector(p, dim, what="point"):
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if p.shape != (dim,):
        raise DimensionMismatch(f"{what} has shape {p.shape}, body dimension is {dim}")
    return p


class ConvexBody:
    """Common interface of the body variants."""

    kind = "abstract"
    dim: int

    def contains(self, p) -> bool:
        p = _vector(p, self.dim)
        return bool(self._contains(p[None, :])[0])

    @property
    def is_bounded(self) -> bool:
        raise NotImplementedError

    def _contains(self, P):
        raise NotImplementedError

    def _chords(self, P, V):
        raise NotImplementedError

    def bounding_box(self) -> Box:
        raise NotImplementedError

    def _dilate(self, p, ratio):
        raise NotImplementedError

    def _affine(self, A, c):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __ne__(self, other):
        return not self == other

    __hash__ = None


class Interval(ConvexBody):
    kind = "interval"
    dim = 1

    def __init__(self, min: float, max: float):
        lo, hi = float(min), float(max)
        if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
            raise InvalidBodySpec(f"interval needs finite min < max, got ({lo}, {hi})")
        self.min = lo
        self.max = hi

    @property
    def is_bounded(self):
        return True

    def _contains(self, P):
        x = P[:, 0]
        return (x > self.min) & (x < self.max)

    def _chords(self, P, V):
        p, v = P[:, 0], V[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            tp = np.where(v > 0, (self.max - p) / v, np.where(v < 0, (self.min - p) / v, INF))
            tm = np.where(v > 0, (p - self.min) / v, np.where(v < 0, (p - self.max) / v, INF))
        return tp, tm

    def bounding_box(self):
        return Box(np.array([self.min]), np.array([self.max]))

    def _dilate(self, p, ratio):
        return Interval(p[0] + ratio * (self.min - p[0]), p[0] + ratio * (self.max - p[0]))

    def _affine(self, A, c):
        a = A[0, 0]
        ends = sorted((a * self.min + c[0], a * self.max + c[0]))
        return Interval(*ends)

    def to_dict(self):
        return {"type": "interval", "min": self.min, "max": self.max}

    def __eq__(self, other):
        return isinstance(other, Interval) and (self.min, self.max) == (other.min, other.max)

    def __repr__(self):
        return f"Interval({self.min!r}, {self.max!r})"


class HPolytope(ConvexBody):
    """Intersection of open halfspaces ``a . x < b``.

    ``bbox`` is optional but required for sampling.  When given it is checked
    by shooting rays from sampled interior points: every exit point must lie
    in the box.  Pass ``validate=False`` for boxes derived from an already
    validated body.
    """

    kind = "hpolytope"

    def __init__(self, A, b, bbox: Box | None = None, *, validate: bool = True):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        if A.ndim != 2 or b.shape != (A.shape[0],) or A.shape[0] == 0:
            raise InvalidBodySpec(f"halfspace arrays do not match: A{A.shape}, b{b.shape}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise InvalidBodySpec("halfspace data must be finite")
        if np.any(np.all(A == 0, axis=1)):
            raise InvalidBodySpec("halfspace normal vectors must be nonzero")
        self.A = _frozen(A)
        self.b = _frozen(b)
        self.dim = A.shape[1]
        if bbox is not None:
            lo = np.asarray(bbox[0], dtype=float)
            hi = np.asarray(bbox[1], dtype=float)
            if lo.shape != (self.dim,) or hi.shape != (self.dim,) or not np.all(lo < hi):
                raise InvalidBodySpec("bbox must have min < max componentwise in every coordinate")
            bbox = Box(_frozen(lo), _frozen(hi))
        self.bbox = bbox
        if validate:
            self._check_interior()
            if bbox is not None:
                self._probe_bbox()

    def _check_interior(self):
        # largest inscribed ball: max r s.t. a.x + r|a| <= b, r <= 1
        from scipy.optimize import linprog

        norms = np.linalg.norm(self.A, axis=1)
        c = np.zeros(self.dim + 1)
        c[-1] = -1.0
        res = linprog(c, A_ub=np.column_stack([self.A, norms]), b_ub=self.b,
                      bounds=[(None, None)] * self.dim + [(0.0, 1.0)])
        if res.status == 2 or (res.status == 0 and res.x[-1] <= 1e-12):
            raise InvalidBodySpec("halfspaces have an empty interior")

    def _probe_bbox(self, n_probe=1000, n_rays=8):
        rng = np.random.default_rng(0)
        lo, hi = self.bbox
        X = rng.uniform(lo, hi, size=(n_probe, self.dim))
        inside = X[self._contains(X)][:16]
        if len(inside) == 0:
            return
        dirs = np.vstack([np.eye(self.dim), rng.standard_normal((n_rays, self.dim))])
        P = np.repeat(inside, len(dirs), axis=0)
        V = np.tile(dirs, (len(inside), 1))
        tp, tm = self._chords(P, V)
        tol = 1e-9 * (1.0 + np.abs(hi - lo).max())
        for t, sign in ((tp, 1.0), (tm, -1.0)):
            if not np.all(np.isfinite(t)):
                raise InvalidBodySpec("bbox given for an unbounded polytope")
            ends = P + sign * t[:, None] * V
            if np.any(ends < lo - tol) or np.any(ends > hi + tol):
                raise InvalidBodySpec("declared bbox does not contain the polytope")

    @property
    def is_bounded(self):
        return self.bbox is not None

    def _contains(self, P):
        return np.all(P @ self.A.T < self.b, axis=1)

    def _chords(self, P, V):
        slack = self.b - P @ self.A.T
        av = V @ self.A.T
        with np.errstate(divide="ignore", invalid="ignore"):
            tp = np.where(av > 0, slack / av, INF).min(axis=1)
            tm = np.where(av < 0, slack / -av, INF).min(axis=1)
        return tp, tm

    def bounding_box(self):
        if self.bbox is None:
            raise MissingBBox("hpolytope has no declared bbox")
        return Box(self.bbox.min.copy(), self.bbox.max.copy())

    def _dilate(self, p, ratio):
        b = ratio * self.b + (1.0 - ratio) * (self.A @ p)
        bbox = None
        if self.bbox is not None:
            bbox = Box(p + ratio * (self.bbox.min - p), p + ratio * (self.bbox.max - p))
        return HPolytope(self.A, b, bbox, validate=False)

    def _affine(self, A, c):
        Ainv = np.linalg.inv(A)
        An = self.A @ Ainv
        bn = self.b + An @ c
        bbox = None
        if self.bbox is not None:
            mid = 0.5 * (self.bbox.min + self.bbox.max)
            half = 0.5 * (self.bbox.max - self.bbox.min)
            mid = A @ mid + c
            half = np.abs(A) @ half
            bbox = Box(mid - half, mid + half)
        return HPolytope(An, bn, bbox, validate=False)

    def to_dict(self):
        d = {
            "type": "hpolytope",
            "dim": self.dim,
            "halfspaces": [{"a": a.tolist(), "b": float(b)} for a, b in zip(self.A, self.b)],
        }
        if self.bbox is not None:
            d["bbox"] = {"min": self.bbox.min.tolist(), "max": self.bbox.max.tolist()}
        return d

    def __eq__(self, other):
        if not isinstance(other, HPolytope) or self.A.shape != other.A.shape:
            return False
        if (self.bbox is None) != (other.bbox is None):
            return False
        same_box = self.bbox is None or (
            np.array_equal(self.bbox.min, other.bbox.min) and np.array_equal(self.bbox.max, other.bbox.max)
        )
        return same_box and np.array_equal(self.A, other.A) and np.array_equal(self.b, other.b)

    def __repr__(self):
        return f"HPolytope(dim={self.dim}, m={len(self.b)}, bounded={self.is_bounded})"


class Ellipsoid(ConvexBody):
    """``{x : (x - c)^T Q (x - c) < 1}`` with ``Q`` symmetric positive definite."""

    kind = "ellipsoid"

    def __init__(self, center, shape):
        c = np.atleast_1d(np.asarray(center, dtype=float))
        Q = np.atleast_2d(np.asarray(shape, dtype=float))
        if c.ndim != 1 or Q.shape != (len(c), len(c)):
            raise InvalidBodySpec(f"ellipsoid center {c.shape} and shape {Q.shape} disagree")
        if not np.allclose(Q, Q.T, rtol=1e-12, atol=0.0):
            raise InvalidBodySpec("ellipsoid shape matrix must be symmetric")
        try:
            np.linalg.cholesky(Q)
        except np.linalg.LinAlgError:
            raise InvalidBodySpec("ellipsoid shape matrix must be positive definite") from None
        self.center = _frozen(c)
        self.Q = _frozen(0.5 * (Q + Q.T))
        self.dim = len(c)

    @classmethod
    def ball(cls, center, radius=1.0):
        center = np.atleast_1d(np.asarray(center, dtype=float))
        return cls(center, np.eye(len(center)) / radius**2)

    @property
    def is_bounded(self):
        return True

    def _contains(self, P):
        W = P - self.center
        return np.einsum("ij,ij->i", W @ self.Q, W) < 1.0

    def _chords(self, P, V):
        W = P - self.center
        QV = V @ self.Q
        a = np.einsum("ij,ij->i", V, QV)
        bq = 2.0 * np.einsum("ij,ij->i", W, QV)
        cc = np.einsum("ij,ij->i", W @ self.Q, W) - 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            disc = np.sqrt(np.maximum(bq * bq - 4.0 * a * cc, 0.0))
            pos = bq >= 0
            # roots q/a and cc/q; the sign trick avoids cancellation
            q = -0.5 * (bq + np.where(pos, disc, -disc))
            tp = np.where(pos, cc / q, q / a)
            tm = np.where(pos, -q / a, -cc / q)
        moving = a > 0
        return np.where(moving, tp, INF), np.where(moving, tm, INF)

    def bounding_box(self):
        half = np.sqrt(np.diag(np.linalg.inv(self.Q)))
        return Box(self.center - half, self.center + half)

    def _dilate(self, p, ratio):
        return Ellipsoid(p + ratio * (self.center - p), self.Q / ratio**2)

    def _affine(self, A, c):
        Ainv = np.linalg.inv(A)
        return Ellipsoid(A @ self.center + c, Ainv.T @ self.Q @ Ainv)

    def to_dict(self):
        return {"type": "ellipsoid", "center": self.center.tolist(), "shape": self.Q.tolist()}

    def __eq__(self, other):
        return (
            isinstance(other, Ellipsoid)
            and np.array_equal(self.center, other.center)
            and np.array_equal(self.Q, other.Q)
        )

    def __repr__(self):
        return f"Ellipsoid(dim={self.dim}, center={self.center.tolist()})"


class Orthant(ConvexBody):
    """The open positive orthant ``{x : x_i > 0}``."""

    kind = "orthant"

    def __init__(self, dim: int):
        if int(dim) != dim or dim < 1:
            raise InvalidBodySpec(f"orthant dimension must be a positive integer, got {dim}")
        self.dim = int(dim)

    @property
    def is_bounded(self):
        return False

    def _contains(self, P):
        return np.all(P > 0, axis=1)

    def _chords(self, P, V):
        with np.errstate(divide="ignore", invalid="ignore"):
            tp = np.where(V < 0, P / -V, INF).min(axis=1)
            tm = np.where(V > 0, P / V, INF).min(axis=1)
        return tp, tm

    def bounding_box(self):
        raise UnboundedBody("the orthant is unbounded")

    def as_hpolytope(self):
        return HPolytope(-np.eye(self.dim), np.zeros(self.dim))

    def _dilate(self, p, ratio):
        return HPolytope(-np.eye(self.dim), -(1.0 - ratio) * p)

    def _affine(self, A, c):
        if not np.any(c) and np.count_nonzero(A - np.diag(np.diag(A))) == 0 and np.all(np.diag(A) > 0):
            return Orthant(self.dim)
        return self.as_hpolytope()._affine(A, c)

    def to_dict(self):
        return {"type": "orthant", "dim": self.dim}

    def __eq__(self, other):
        return isinstance(other, Orthant) and other.dim == self.dim

    def __repr__(self):
        return f"Orthant({self.dim})"


class Product(ConvexBody):
    """Cartesian product; coordinates are the factors' coordinates in order."""

    kind = "product"

    def __init__(self, factors: Sequence[ConvexBody]):
        factors = tuple(factors)
        if len(factors) < 1 or not all(isinstance(f, ConvexBody) for f in factors):
            raise InvalidBodySpec("a product needs at least one factor body")
        self.factors = factors
        self.dims = tuple(f.dim for f in factors)
        self.offsets = tuple(int(o) for o in np.concatenate([[0], np.cumsum(self.dims)]))
        self.dim = self.offsets[-1]

    @property
    def is_bounded(self):
        return all(f.is_bounded for f in self.factors)

    def blocks(self, X):
        """Split the last axis of ``X`` into the factors' coordinate blocks."""
        X = np.asarray(X)
        return [X[..., a:b] for a, b in zip(self.offsets[:-1], self.offsets[1:])]

    def _contains(self, P):
        out = np.ones(len(P), dtype=bool)
        for f, Pi in zip(self.factors, self.blocks(P)):
            out &= f._contains(Pi)
        return out

    def factor_chords(self, P, V):
        return [f._chords(Pi, Vi) for f, Pi, Vi in zip(self.factors, self.blocks(P), self.blocks(V))]

    def _chords(self, P, V):
        per = self.factor_chords(P, V)
        tp = per[0][0]
        tm = per[0][1]
        for a, b in per[1:]:
            tp = np.minimum(tp, a)
            tm = np.minimum(tm, b)
        return tp, tm

    def bounding_box(self):
        boxes = [f.bounding_box() for f in self.factors]
        return Box(np.concatenate([b.min for b in boxes]), np.concatenate([b.max for b in boxes]))

    def _dilate(self, p, ratio):
        return Product([f._dilate(pi, ratio) for f, pi in zip(self.factors, self.blocks(p))])

    def _affine(self, A, c):
        o = self.offsets
        parts = []
        for i, f in enumerate(self.factors):
            blk = A[o[i]:o[i + 1], o[i]:o[i + 1]]
            off = A[o[i]:o[i + 1]].copy()
            off[:, o[i]:o[i + 1]] = 0
            if np.any(off):
                raise UnrepresentableImage("product images need a block-diagonal linear part")
            parts.append(f._affine(blk, c[o[i]:o[i + 1]]))
        return Product(parts)

    def to_dict(self):
        return {"type": "product", "factors": [f.to_dict() for f in self.factors]}

    def __eq__(self, other):
        return isinstance(other, Product) and self.factors == other.factors

    def __repr__(self):
        return "Product(" + ", ".join(repr(f) for f in self.factors) + ")"


def cube(dim: int, halfwidth: float = 1.0) -> HPolytope:
    """``]-h, h[^dim`` as an H-polytope."""
    I = np.eye(dim)
    h = float(halfwidth)
    return HPolytope(np.vstack([I, -I]), np.full(2 * dim, h), Box(np.full(dim, -h), np.full(dim, h)),
                     validate=False)


def simplex(dim: int) -> HPolytope:
    """The standard simplex ``x_i > 0, sum x_i < 1``."""
    A = np.vstack([-np.eye(dim), np.ones((1, dim))])
    b = np.concatenate([np.zeros(dim), [1.0]])
    return HPolytope(A, b, Box(np.zeros(dim), np.ones(dim)), validate=False)


def disk(radius: float = 1.0) -> Ellipsoid:
    return Ellipsoid.ball(np.zeros(2), radius)


# -- validated public operations ---------------------------------------------


def contains(body: ConvexBody, p) -> bool:
    return body.contains(p)


def chord_times(body: ConvexBody, p, v) -> ChordTimes:
    p = _vector(p, body.dim)
    v = _vector(v, body.dim, "direction")
    if not body.contains(p):
        raise PointOutside(f"{p.tolist()} is not in the open body")
    if not np.any(v):
        raise ZeroDirection("chord times need a nonzero direction")
    tp, tm = body._chords(p[None, :], v[None, :])
    tp, tm = float(tp[0]), float(tm[0])
    if math.isinf(tp) and math.isinf(tm):
        raise ImproperBody("the line through p along v never leaves the body")
    return ChordTimes(tp, tm)


def chord_times_batch(body: ConvexBody, P, V):
    """Unvalidated vectorised chord times; rows of ``P`` must be interior."""
    return body._chords(np.asarray(P, dtype=float), np.asarray(V, dtype=float))


def bounding_box(body: ConvexBody) -> Box:
    if isinstance(body, HPolytope) and body.bbox is None:
        raise MissingBBox("hpolytope without a declared bbox")
    return body.bounding_box()


def sample_uniform(body: ConvexBody, n: int, seed: int = 0, chunk_size: int = _parallel.CHUNK_SIZE):
    """``n`` i.i.d. Lebesgue-uniform points of ``body`` by rejection from its box.

    Chunk ``k`` of the output is drawn from its own substream, so the points
    do not depend on the number of workers.
    """
    if n < 0:
        raise ConfigError("sample count must be nonnegative")
    box = bounding_box(body)
    if n == 0:
        return np.empty((0, body.dim))
    lo, hi = box.min, box.max
    n_chunks = -(-n // chunk_size)

    def run(k):
        need = min(chunk_size, n - k * chunk_size)
        rng = _parallel.substream(seed, _parallel.STREAM_UNIFORM, k)
        got, tries, accepted = [], 0, 0
        batch = max(256, 2 * need)
        while accepted < need:
            X = rng.uniform(lo, hi, size=(batch, body.dim))
            X = X[body._contains(X)]
            tries += batch
            accepted += len(X)
            got.append(X)
            if tries >= 1_000_000 and accepted < 1e-6 * tries:
                raise RejectionStall(f"acceptance rate {accepted / tries:.2e} below 1e-6")
            rate = max(accepted / tries, 1e-3)
            batch = int(min(1 << 20, max(256, 1.2 * (need - accepted) / rate)))
        return np.concatenate(got)[:need]

    return np.concatenate(_parallel.map_chunks(run, range(n_chunks)))


def dilate(body: ConvexBody, center, ratio: float) -> ConvexBody:
    """Image of ``body`` under ``x -> center + ratio (x - center)``."""
    p = _vector(center, body.dim)
    if not body.contains(p):
        raise PointOutside("dilation center must be interior")
    if not 0.0 < ratio < 1.0:
        raise ConfigError(f"dilation ratio must lie in (0, 1), got {ratio}")
    return body._dilate(p, float(ratio))


def affine_image(body: ConvexBody, A, c=None) -> ConvexBody:
    """Image of ``body`` under ``x -> A x + c``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    c = np.zeros(body.dim) if c is None else _vector(c, body.dim, "offset")
    if A.shape != (body.dim, body.dim):
        raise DimensionMismatch(f"map of shape {A.shape} for a body of dimension {body.dim}")
    if not np.isfinite(np.linalg.cond(A)) or abs(np.linalg.det(A)) == 0:
        raise UnrepresentableImage("affine map is not invertible")
    return body._affine(A, c)


def factor_list(body: ConvexBody):
    return list(body.factors) if isinstance(body, Product) else [body]


# -- JSON ---------------------------------------------------------------------


def body_from_dict(d) -> ConvexBody:
    if not isinstance(d, dict) or "type" not in d:
        raise InvalidBodySpec("body specification must be an object with a 'type' key")
    kind = d["type"]
    try:
        if kind == "interval":
            return Interval(d["min"], d["max"])
        if kind == "hpolytope":
            dim = int(d["dim"])
            hs = d["halfspaces"]
            A = np.array([h["a"] for h in hs], dtype=float).reshape(len(hs), dim)
            b = np.array([h["b"] for h in hs], dtype=float)
            bbox = d.get("bbox")
            if bbox is not None:
                bbox = (bbox["min"], bbox["max"])
            return HPolytope(A, b, bbox)
        if kind == "ellipsoid":
            return Ellipsoid(d["center"], d["shape"])
        if kind == "orthant":
            return Orthant(d["dim"])
        if kind == "product":
            return Product([body_from_dict(f) for f in d["factors"]])
        if kind == "cube":
            return cube(int(d["dim"]), float(d.get("halfwidth", 1.0)))
        if kind == "simplex":
            return simplex(int(d["dim"]))
    except InvalidBodySpec:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidBodySpec(f"bad {kind!r} specification: {exc}") from exc
    raise InvalidBodySpec(f"unknown body type {kind!r}")


def body_to_dict(body: ConvexBody) -> dict:
    return body.to_dict()


def load_body(path) -> ConvexBody:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidBodySpec(f"cannot read body file {path}: {exc}") from exc
    return body_from_dict(data)
