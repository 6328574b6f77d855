import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hilbertgeom import (
    Ellipsoid,
    HPolytope,
    Interval,
    Orthant,
    Product,
    affine_image,
    body_from_dict,
    body_to_dict,
    bounding_box,
    chord_times,
    contains,
    cube,
    dilate,
    disk,
    load_body,
    sample_uniform,
    simplex,
)
from hilbertgeom.bodies import chord_times_batch
from hilbertgeom.errors import (
    ConfigError,
    DimensionMismatch,
    InvalidBodySpec,
    UnboundedBody,
    UnrepresentableImage,
    ZeroDirection,
)

coord = st.floats(-0.95, 0.95)
unit = st.floats(-1, 1).filter(lambda x: abs(x) > 1e-3)


def test_contains_examples():
    I = Interval(-1, 1)
    assert contains(I, [0.0])
    assert not contains(I, [1.0])
    assert not contains(Orthant(2), [1.0, -0.1])
    assert not contains(disk(), [1.0, 0.0])


@pytest.mark.parametrize(
    "body,p,v,expected",
    [
        (cube(2), (0, 0), (1, 0), (1.0, 1.0)),
        (cube(2), (0.5, 0), (1, 0), (0.5, 1.5)),
        (Orthant(1), (2,), (1,), (math.inf, 2.0)),
        (Product([Interval(-1, 1), Interval(-1, 1)]), (0.5, 0.3), (1, 1), (0.5, 1.3)),
        (disk(), (0, 0), (0.5, 0), (2.0, 2.0)),
    ],
)
def test_chord_time_examples(body, p, v, expected):
    ct = chord_times(body, p, v)
    assert ct.t_plus == pytest.approx(expected[0], rel=1e-12)
    assert ct.t_minus == pytest.approx(expected[1], rel=1e-12)


def test_chord_times_errors():
    with pytest.raises(ZeroDirection):
        chord_times(cube(2), (0, 0), (0, 0))
    with pytest.raises(DimensionMismatch):
        chord_times(cube(2), (0, 0, 0), (1, 0, 0))


def test_bounding_boxes():
    box = bounding_box(disk())
    np.testing.assert_allclose(box.min, [-1, -1])
    np.testing.assert_allclose(box.max, [1, 1])
    box = bounding_box(Product([Interval(-1, 1), Interval(0, 2)]))
    np.testing.assert_allclose(box.min, [-1, 0])
    np.testing.assert_allclose(box.max, [1, 2])
    with pytest.raises(UnboundedBody):
        bounding_box(Orthant(2))


def test_sample_uniform_statistics():
    X = sample_uniform(cube(2), 10_000, seed=1)
    assert np.all(np.abs(X.mean(axis=0)) < 0.03)
    assert np.all(cube(2)._contains(X))
    D = sample_uniform(disk(), 10_000, seed=2)
    # fraction of disk samples inside the inscribed square [-r, r]^2, r = 1/sqrt 2
    frac = np.mean(np.all(np.abs(D) < 1 / math.sqrt(2), axis=1))
    assert frac == pytest.approx(2 / math.pi, abs=0.02)
    assert sample_uniform(cube(2), 0).shape == (0, 2)


def test_sample_uniform_is_deterministic_and_worker_independent(monkeypatch):
    a = sample_uniform(disk(), 10_000, seed=5)
    monkeypatch.setenv("HILBERTGEOM_WORKERS", "4")
    b = sample_uniform(disk(), 10_000, seed=5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, sample_uniform(disk(), 10_000, seed=6))


def test_sample_uniform_rejects_unbounded():
    with pytest.raises(UnboundedBody):
        sample_uniform(Orthant(2), 10)


def test_dilate_examples():
    r = math.tanh(1.0)
    d = dilate(Interval(-1, 1), [0.0], r)
    assert d == Interval(-r, r)
    sq = Product([Interval(-1, 1), Interval(-1, 1)])
    assert dilate(sq, [0.0, 0.0], 0.5) == Product([Interval(-0.5, 0.5), Interval(-0.5, 0.5)])
    for bad in (1.0, 0.0, -0.2, 1.5):
        with pytest.raises(ConfigError):
            dilate(Interval(-1, 1), [0.0], bad)


def test_dilate_composes():
    C = cube(3)
    p = np.array([0.2, -0.1, 0.3])
    twice = dilate(dilate(C, p, 0.5), p, 0.4)
    once = dilate(C, p, 0.2)
    np.testing.assert_allclose(twice.A, once.A, rtol=1e-12)
    np.testing.assert_allclose(twice.b, once.b, rtol=1e-12)


def test_affine_image_examples(rng):
    C = cube(2)
    assert affine_image(C, np.eye(2)) == C
    img = affine_image(C, 2 * np.eye(2), np.array([1.0, -1.0]))
    X = rng.uniform(-4, 4, size=(2000, 2))
    inside = np.all(np.abs(X - [1, -1]) < 2, axis=1)
    np.testing.assert_array_equal(img._contains(X), inside)

    A = rng.standard_normal((2, 2)) + 2 * np.eye(2)
    E = affine_image(disk(), A)
    assert isinstance(E, Ellipsoid)
    Y = rng.uniform(-4, 4, size=(1000, 2))
    np.testing.assert_array_equal(E._contains(Y), disk()._contains(np.linalg.solve(A, Y.T).T))


def test_affine_image_of_product_must_be_block_diagonal():
    sq = Product([Interval(-1, 1), Interval(-1, 1)])
    img = affine_image(sq, np.diag([2.0, 3.0]), np.array([1.0, 0.0]))
    assert img == Product([Interval(-1, 3), Interval(-3, 3)])
    with pytest.raises(UnrepresentableImage):
        affine_image(sq, np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_hpolytope_square_matches_product(rng):
    P = rng.uniform(-0.99, 0.99, size=(10_000, 2))
    V = rng.standard_normal((10_000, 2))
    a = chord_times_batch(cube(2), P, V)
    b = chord_times_batch(Product([Interval(-1, 1), Interval(-1, 1)]), P, V)
    np.testing.assert_allclose(a[0], b[0], rtol=1e-12)
    np.testing.assert_allclose(a[1], b[1], rtol=1e-12)


def test_product_chord_rule_is_exact(rng):
    prod = Product([disk(), Interval(-1, 2), cube(2)])
    P = sample_uniform(prod, 500, seed=3)
    V = rng.standard_normal((500, 5))
    tp, tm = chord_times_batch(prod, P, V)
    parts = [chord_times_batch(f, a, b) for f, a, b in zip(prod.factors, prod.blocks(P), prod.blocks(V))]
    np.testing.assert_array_equal(tp, np.min([t[0] for t in parts], axis=0))
    np.testing.assert_array_equal(tm, np.min([t[1] for t in parts], axis=0))


@pytest.mark.parametrize("body", [cube(2), disk(), simplex(3), Product([disk(), Interval(-1, 1)]), Orthant(2)])
@given(seed=st.integers(0, 2**31 - 1))
def test_chord_times_hit_the_boundary(body, seed):
    r = np.random.default_rng(seed)
    if body.is_bounded:
        p = sample_uniform(body, 1, seed)[0]
    else:
        p = np.exp(r.standard_normal(body.dim))
    v = r.standard_normal(body.dim)
    ct = chord_times(body, p, v)
    for t, sign in ((ct.t_plus, 1), (ct.t_minus, -1)):
        if math.isinf(t):
            continue
        eps = 1e-7 * (1 + t)
        assert contains(body, p + sign * (t - eps) * v)
        assert not contains(body, p + sign * (t + eps) * v)


def test_ellipsoid_chords_near_boundary_are_stable():
    E = disk()
    p = np.array([1 - 1e-12, 0.0])
    ct = chord_times(E, p, [1.0, 0.0])
    assert ct.t_plus == pytest.approx(1e-12, rel=1e-3)
    assert ct.t_minus == pytest.approx(2.0, rel=1e-9)


def test_json_round_trip(tmp_path):
    specs = [
        {"type": "interval", "min": -1, "max": 1},
        {"type": "hpolytope", "dim": 2,
         "halfspaces": [{"a": [1, 0], "b": 1}, {"a": [-1, 0], "b": 1}, {"a": [0, 1], "b": 1}, {"a": [0, -1], "b": 1}],
         "bbox": {"min": [-1, -1], "max": [1, 1]}},
        {"type": "ellipsoid", "center": [0, 0], "shape": [[1, 0], [0, 1]]},
        {"type": "orthant", "dim": 2},
        {"type": "product", "factors": [{"type": "interval", "min": -1, "max": 1}, {"type": "orthant", "dim": 1}]},
    ]
    for spec in specs:
        body = body_from_dict(spec)
        assert body_from_dict(body_to_dict(body)) == body
    assert body_from_dict({"type": "cube", "dim": 2}) == cube(2)
    assert body_from_dict({"type": "simplex", "dim": 2}) == simplex(2)
    path = tmp_path / "b.json"
    path.write_text('{"type":"interval","min":-1,"max":1}')
    assert load_body(path) == Interval(-1, 1)


@pytest.mark.parametrize(
    "spec",
    [
        {"type": "blob"},
        {"min": 1},
        {"type": "interval", "min": 1, "max": -1},
        {"type": "ellipsoid", "center": [0, 0], "shape": [[1, 0], [0, -1]]},
        {"type": "hpolytope", "dim": 2, "halfspaces": [{"a": [1, 0], "b": 1}], "bbox": {"min": [-1, -1], "max": [1, 1]}},
        {"type": "hpolytope", "dim": 2,
         "halfspaces": [{"a": [1, 0], "b": 1}, {"a": [-1, 0], "b": 1}, {"a": [0, 1], "b": 1}, {"a": [0, -1], "b": 1}],
         "bbox": {"min": [-0.5, -0.5], "max": [0.5, 0.5]}},
    ],
)
def test_invalid_specs(spec):
    with pytest.raises(InvalidBodySpec):
        body_from_dict(spec)


def test_load_body_missing_file(tmp_path):
    with pytest.raises(InvalidBodySpec):
        load_body(tmp_path / "missing.json")


def test_hpolytope_needs_interior():
    with pytest.raises(InvalidBodySpec):
        HPolytope([[1.0], [-1.0]], [-1.0, -1.0], ([-1.0], [1.0]))
