import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hilbertgeom import (
    Interval,
    Orthant,
    Product,
    QuadratureSpec,
    cross_ratio_distance,
    cube,
    density,
    disk,
    dual_norm,
    finsler_norm,
    sample_uniform,
    tangent_ball_volume,
    unit_ball_volume,
)
from hilbertgeom.bodies import Ellipsoid
from hilbertgeom.errors import ConfigError, PointOutside
from hilbertgeom.metric import (
    closed_form_leb,
    densities,
    directions,
    distance_batch,
    finsler_batch,
    tangent_ball_volumes,
)

HALF_LN3 = 0.5 * math.log(3.0)


def test_unit_ball_volumes():
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)
    assert unit_ball_volume(4) == pytest.approx(math.pi**2 / 2)


def test_finsler_examples():
    assert finsler_norm(Interval(-1, 1), [0], [1]) == 1.0
    for x in (0.3, 1.0, 7.5):
        assert finsler_norm(Orthant(1), [x], [1]) == pytest.approx(1 / (2 * x))
    assert finsler_norm(cube(2), [0.5, 0], [1, 0]) == pytest.approx(4 / 3)
    assert finsler_norm(cube(2), [0.5, 0], [0, 0]) == 0.0
    with pytest.raises(PointOutside):
        finsler_norm(cube(2), [1.5, 0], [1, 0])


def test_distance_examples():
    assert cross_ratio_distance(Interval(-1, 1), [0], [0.5]) == pytest.approx(HALF_LN3, rel=1e-12)
    assert cross_ratio_distance(Orthant(1), [1], [math.e**2]) == pytest.approx(1.0, rel=1e-12)
    assert cross_ratio_distance(disk(), [0, 0], [0.5, 0]) == pytest.approx(math.atanh(0.5), rel=1e-12)
    assert cross_ratio_distance(cube(2), [0.2, 0.1], [0.2, 0.1]) == 0.0


def test_klein_distance_oracle(rng):
    # Klein model: cosh d(p, q) = (1 - p.q) / sqrt((1 - |p|^2)(1 - |q|^2))
    P = sample_uniform(disk(), 2000, seed=4)
    Q = sample_uniform(disk(), 2000, seed=5)
    d = distance_batch(disk(), P, Q)
    c = (1 - np.einsum("ij,ij->i", P, Q)) / np.sqrt((1 - (P**2).sum(1)) * (1 - (Q**2).sum(1)))
    np.testing.assert_allclose(d, np.arccosh(c), rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("x", [1 - 1e-13, -1 + 1e-12, 0.999999])
def test_distance_near_boundary_keeps_precision(x):
    # d(0, x) = atanh|x| on the segment, evaluated close to an end point
    I = Interval(-1, 1)
    assert cross_ratio_distance(I, [0], [x]) == pytest.approx(math.atanh(abs(x)), rel=1e-12)
    assert cross_ratio_distance(I, [x], [0]) == cross_ratio_distance(I, [0], [x])


@given(lam=st.floats(0.01, 100), seed=st.integers(0, 2**31 - 1))
def test_finsler_homogeneity(lam, seed):
    r = np.random.default_rng(seed)
    body = cube(3)
    p = sample_uniform(body, 1, seed)[0]
    v = r.standard_normal(3)
    F = finsler_norm(body, p, v)
    assert finsler_norm(body, p, lam * v) == pytest.approx(lam * F, rel=1e-15)
    assert finsler_norm(body, p, -lam * v) == pytest.approx(lam * F, rel=1e-12)


def test_factor_embedding_is_exact(rng):
    prod = Product([disk(), Interval(-1, 1)])
    P = sample_uniform(prod, 1000, seed=9)
    V = np.zeros((1000, 3))
    V[:, :2] = rng.standard_normal((1000, 2))
    np.testing.assert_array_equal(finsler_batch(prod, P, V), finsler_batch(disk(), P[:, :2], V[:, :2]))


@pytest.mark.parametrize("body,xi,expected", [(disk(), (1, 0), 1.0), (cube(2), (1, 0), 1.0), (cube(2), (1, 1), 2.0)])
def test_dual_norm_examples(body, xi, expected):
    assert dual_norm(body, [0, 0], xi) == pytest.approx(expected, rel=1e-9)


def test_dual_norm_nested_directions_are_monotone():
    body = disk()
    p = [0.3, -0.6]
    xi = [0.7, 1.3]
    for mode, dim, b in (("angle_grid", 2, body), ("mc_directions", 3, cube(3))):
        pt = p if dim == 2 else [0.3, -0.6, 0.1]
        x = xi if dim == 2 else [0.7, 1.3, -0.2]
        vals = [dual_norm(b, pt, x, QuadratureSpec(mode, m)) for m in (64, 128, 256, 512)]
        assert all(a <= c for a, c in zip(vals, vals[1:]))


def test_dual_norm_of_gradient_of_distance_is_one():
    # the distance from the centre of the disk is atanh|x|; its differential has dual norm 1
    x = np.array([0.4, 0.3])
    r = np.linalg.norm(x)
    grad = x / r / (1 - r * r)
    assert dual_norm(disk(), x, grad) == pytest.approx(1.0, rel=1e-5)


def test_direction_sets_are_nested_and_read_only():
    a = directions(QuadratureSpec("mc_directions", 64, seed=3), 4)
    b = directions(QuadratureSpec("mc_directions", 128, seed=3), 4)
    np.testing.assert_array_equal(a, b[:64])
    np.testing.assert_allclose(np.linalg.norm(b, axis=1), 1.0)
    with pytest.raises(ValueError):
        a[0, 0] = 1.0


def test_quadrature_spec_validation():
    with pytest.raises(ConfigError):
        QuadratureSpec("angle_grid", 4)
    with pytest.raises(ConfigError):
        QuadratureSpec("gauss", 64)
    with pytest.raises(ConfigError):
        tangent_ball_volume(cube(3), [0, 0, 0], QuadratureSpec("angle_grid", 64))


@pytest.mark.parametrize("p", [(1, 1), (2, 0.5), (0.3, 5)])
def test_orthant_tangent_ball(p):
    assert tangent_ball_volume(Orthant(2), p) == pytest.approx(12 * p[0] * p[1], rel=5e-3)


def test_center_values():
    assert tangent_ball_volume(disk(), [0, 0]) == pytest.approx(math.pi, rel=1e-6)
    assert tangent_ball_volume(cube(2), [0, 0]) == pytest.approx(4.0, rel=1e-6)
    assert tangent_ball_volume(cube(3), [0, 0, 0]) == pytest.approx(8.0, rel=5e-3)
    assert density(disk(), [0, 0]).density == pytest.approx(1.0)
    assert density(cube(2), [0, 0]).density == pytest.approx(math.pi / 4, rel=1e-6)
    assert density(Orthant(2), [1, 1]).density == pytest.approx(math.pi / 12, rel=5e-3)


def test_density_times_leb_is_omega():
    for body, p in ((disk(), [0.2, 0.5]), (cube(2), [0.9, 0]), (Orthant(2), [3, 0.1]), (cube(3), [0.1, 0.2, 0.3])):
        d = density(body, p)
        assert d.density * d.leb_tangent_ball == d.omega_n or math.isclose(
            d.density * d.leb_tangent_ball, d.omega_n, rel_tol=1e-15
        )


def test_ellipsoid_closed_form_matches_quadrature(rng):
    A = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    E = Ellipsoid(np.array([0.5, -1.0, 2.0]), A @ A.T / 10)
    P = sample_uniform(E, 50, seed=7)
    exact = closed_form_leb(E, P)
    quad = tangent_ball_volumes(E, P, QuadratureSpec("mc_directions", 16384))
    np.testing.assert_allclose(quad, exact, rtol=5e-3)
    D = sample_uniform(disk(), 200, seed=8)
    np.testing.assert_allclose(tangent_ball_volumes(disk(), D), closed_form_leb(disk(), D), rtol=1e-6)


def test_interval_closed_form(rng):
    I = Interval(-1, 3)
    x = rng.uniform(-0.99, 2.99, size=(100, 1))
    np.testing.assert_allclose(closed_form_leb(I, x), tangent_ball_volumes(I, x), rtol=1e-12)
    # density 1/((x-a)(b-x)) scaled: omega_1 / Leb
    np.testing.assert_allclose(densities(I, x), 2 / closed_form_leb(I, x))


def test_cube_sandwich_2d(rng):
    X = rng.uniform(-0.999, 0.999, size=(300, 2))
    leb = tangent_ball_volumes(cube(2), X)
    base = 4 * np.prod(1 - X**2, axis=1)
    assert np.all(leb <= base * 1.01)
    assert np.all(leb >= base / 2 * 0.99)


def test_tangent_ball_worker_independent(monkeypatch):
    X = sample_uniform(cube(3), 20, seed=1)
    q = QuadratureSpec("mc_directions", 4096)
    a = tangent_ball_volumes(cube(3), X, q)
    monkeypatch.setenv("HILBERTGEOM_WORKERS", "3")
    np.testing.assert_array_equal(a, tangent_ball_volumes(cube(3), X, q))


@given(seed=st.integers(0, 2**31 - 1))
def test_affine_invariance_of_tangent_ball_ratio(seed):
    # Leb scales by |det A| under an affine map; the Hilbert measure is invariant
    r = np.random.default_rng(seed)
    A = r.standard_normal((2, 2)) + 2 * np.eye(2)
    if abs(np.linalg.det(A)) < 0.1:
        return
    from hilbertgeom import affine_image

    body = cube(2)
    p = r.uniform(-0.9, 0.9, size=2)
    q = QuadratureSpec("angle_grid", 2048)
    lhs = tangent_ball_volumes(affine_image(body, A), (A @ p)[None, :], q)[0]
    rhs = abs(np.linalg.det(A)) * tangent_ball_volume(body, p, q)
    assert lhs == pytest.approx(rhs, rel=5e-3)
