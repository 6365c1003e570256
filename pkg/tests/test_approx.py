import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvxwhitney.approx import (best_uniform, best_uniform_on_points, e1_convex,
                               e1_dual_certificate, symmetric_linear_approx, verify_certificate)
from cvxwhitney.errors import InputError, PreconditionError, VerificationFailed
from cvxwhitney.geometry import AffineMap, ConvexBody, GridSpec, sample_grid, transform
from cvxwhitney.polynomials import design_matrix, parse_polynomial
from cvxwhitney.smoothness import ScalarField, lattice_modulus
from cvxwhitney.whitney import entropy_fn, prop18_f, ramp, random_convex_field, random_field

I = ConvexBody.cube(1)
G1 = GridSpec(201)


def poly_field(text, n, convex=True):
    return ScalarField.from_polynomial(parse_polynomial(text, n), declared_convex=convex)


SQ = poly_field("x^2", 1)
R18 = np.array(list(itertools.product([-1.0, 0.0, 1.0], [0.0, 1.0])))


def test_square_best_line():
    sol = best_uniform(SQ, I, 1, G1)
    assert sol.error == 0.5
    np.testing.assert_allclose(sol.polynomial.coefficients, [0.5, 0.0], atol=1e-15)
    np.testing.assert_array_equal(sol.active_points[:, 0], [-1.0, 0.0, 1.0])


@pytest.mark.parametrize("delta", [0.5, 0.25, 0.1])
def test_ramp_best_line(delta):
    assert best_uniform(ramp(delta).field, I, 1, G1).error == pytest.approx(0.5 - delta / 4, abs=1e-12)


def test_roof_best_quadratic():
    w = prop18_f()
    err = best_uniform(w.field, w.natural_body, 2, GridSpec((101, 51))).error
    assert err == pytest.approx(0.5, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 2))
def test_E0_is_half_oscillation(seed, n):
    K = ConvexBody.cube(n)
    f = random_field(np.random.default_rng(seed), n)
    grid = GridSpec(21 if n == 1 else 9)
    v = f(sample_grid(K, grid))
    e0 = best_uniform(f, K, 0, grid).error
    assert abs(e0 - 0.5 * (v.max() - v.min())) <= 1e-12
    assert abs(e0 - 0.5 * lattice_modulus(f, K, 1, grid).value) <= 1e-10


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(0, 3))
def test_dual_orthogonality(seed, m):
    K = ConvexBody.unit_ball(2)
    f = random_field(np.random.default_rng(seed), 2)
    sol = best_uniform(f, K, m, GridSpec(11))
    X = sample_grid(K, GridSpec(11))
    assert abs(np.max(np.abs(f(X) - sol.polynomial(X))) - sol.error) <= 1e-10
    Phi = design_matrix(sol.active_points, 2, m)
    assert np.max(np.abs(sol.dual_weights @ Phi)) <= 1e-7
    assert abs(np.sum(np.abs(sol.dual_weights)) - 1) <= 1e-9
    res = f(sol.active_points) - sol.polynomial(sol.active_points)
    nz = np.abs(sol.dual_weights) > 1e-12
    assert np.all(np.sign(sol.dual_weights[nz]) == np.sign(res[nz]))


def test_monotone_in_degree_and_grid():
    f = random_field(np.random.default_rng(11), 2)
    K = ConvexBody.cube(2)
    errs = [best_uniform(f, K, m, GridSpec(9)).error for m in range(4)]
    assert all(a >= b - 1e-12 for a, b in zip(errs, errs[1:]))
    # a 9-lattice is a sub-lattice of the 17-lattice
    assert best_uniform(f, K, 2, GridSpec(17)).error >= best_uniform(f, K, 2, GridSpec(9)).error - 1e-12


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.floats(0.25, 4.0), st.floats(-3, 3), st.floats(-3, 3))
def test_translation_dilation_invariance(seed, s, v1, v2):
    f = random_field(np.random.default_rng(seed), 2)
    K = ConvexBody.cube(2)
    T = AffineMap(s * np.eye(2), np.array([v1, v2]))
    g = f.composed(T.inverse())
    grid = GridSpec(9)
    for m in (0, 1, 2):
        a = best_uniform(f, K, m, grid).error
        b = best_uniform(g, transform(K, T), m, grid).error
        assert abs(a - b) <= 1e-9


def test_rank_deficient_grid():
    with pytest.raises(Exception):
        best_uniform_on_points(np.zeros(2), np.array([[0.0], [1.0]]), 2)


# -- E_1 of convex functions ---------------------------------------------------------------


def test_e1_convex_examples():
    assert e1_convex(SQ, I, G1) == 0.5
    e = entropy_fn(1)
    assert e1_convex(e.field, e.natural_body, G1) == pytest.approx(0.25, abs=1e-12)
    assert abs(e1_convex(poly_field("1 + 2x - y", 2), ConvexBody.cube(2), GridSpec(11))) <= 1e-12


def test_entropy_e1_brute_force():
    # oracle: 1-D Jensen gap over all pairs of grid points and 101 weights
    e = entropy_fn(1)
    t = np.linspace(0, 1, 41)
    f = lambda z: e.field(np.asarray(z)[:, None])
    a = np.linspace(0, 1, 101)
    best = 0.0
    for x, y in itertools.combinations(t, 2):
        gap = a * f([x])[0] + (1 - a) * f([y])[0] - f(a * x + (1 - a) * y)
        best = max(best, gap.max())
    assert 0.5 * best == pytest.approx(0.25, abs=1e-12)


def test_e1_requires_convexity():
    with pytest.raises(PreconditionError):
        e1_convex(poly_field("-x^2", 1), I, G1)


@pytest.mark.parametrize("seed", range(6))
def test_e1_two_ways(seed):
    f = random_convex_field(np.random.default_rng(seed), 1 + seed % 2, smooth=True)
    K = ConvexBody.cube(f.dimension)
    grid = GridSpec(41)
    assert abs(e1_convex(f, K, grid) - best_uniform(f, K, 1, grid).error) <= 1e-2


def test_e1_certificate_square():
    sol = best_uniform(SQ, I, 1, G1)
    c = e1_dual_certificate(sol, SQ, I)
    np.testing.assert_allclose(c.a, [0.5, 0.5])
    np.testing.assert_array_equal(c.x[:, 0], [-1.0, 1.0])
    np.testing.assert_allclose(c.b, [1.0])
    assert c.y[0, 0] == 0.0
    assert c.value == 0.5


@pytest.mark.parametrize("delta", [0.5, 0.25, 0.1])
def test_e1_certificate_ramp(delta):
    w = ramp(delta)
    sol = best_uniform(w.field, I, 1, G1)
    c = e1_dual_certificate(sol, w.field, I)
    pts = np.concatenate([c.x[:, 0], c.y[:, 0]])
    assert len(pts) <= 3
    assert all(np.isclose(p, [-1.0, 1 - delta, 1.0]).any() for p in pts)
    assert c.value == pytest.approx(0.5 - delta / 4, abs=1e-9)
    assert abs(c.a @ c.x[:, 0] - c.b @ c.y[:, 0]) <= 1e-6


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_e1_certificate_pruned(seed):
    f = random_convex_field(np.random.default_rng(seed), 2)
    K = ConvexBody.unit_ball(2)
    sol = best_uniform(f, K, 1, GridSpec(15))
    c = e1_dual_certificate(sol, f, K)
    assert len(c.a) + len(c.b) <= 4
    assert abs(c.a.sum() - 1) <= 1e-8 and abs(c.b.sum() - 1) <= 1e-8
    assert np.max(np.abs(c.a @ c.x - c.b @ c.y)) <= 1e-6
    assert abs(c.value - sol.error) <= 1e-6


def test_e1_certificate_linear():
    f = poly_field("1 + 2x", 1)
    c = e1_dual_certificate(best_uniform(f, I, 1, G1), f, I)
    assert c.value == 0.0


def test_e1_certificate_needs_degree_one():
    with pytest.raises(InputError):
        e1_dual_certificate(best_uniform(SQ, I, 2, G1), SQ, I)


# -- optimality certificates for the roof function -------------------------------------------


def test_certificate_weights_on_R():
    # oracle: on R the monomial y^2 equals y, so the 6 x 6 system has a one-dimensional
    # null space; its SVD null vector, normalized to sum 1, is (1, 1, 2, 2, 1, 1) / 8
    w = prop18_f()
    P = parse_polynomial("3/2 + x^2 - y^2")
    r = w.field(R18) - P(R18)
    A = (design_matrix(R18, 2, 2) * r[:, None]).T
    z = np.linalg.svd(A)[2][-1]
    z = z / z.sum()
    np.testing.assert_allclose(z, np.array([1, 1, 2, 2, 1, 1]) / 8, atol=1e-12)
    for text in ("3/2 + x^2 - y^2", "3/2 + x^2 + y^2 - 2y"):
        cert = verify_certificate(w.field, parse_polynomial(text), R18, 2, tol=1e-9,
                                  K=w.natural_body, grid=GridSpec((101, 51)))
        c = cert.multipliers / cert.multipliers.sum()
        np.testing.assert_allclose(c, np.array([1, 1, 2, 2, 1, 1]) / 8, atol=1e-12)
        assert cert.orthogonality_residual <= 1e-9
        assert np.all(cert.multipliers > 0)


def test_uniform_multipliers_do_not_annihilate_y():
    # sum over R of (f - P) * y with equal weights
    w = prop18_f()
    P = parse_polynomial("3/2 + x^2 - y^2")
    r = w.field(R18) - P(R18)
    assert abs(np.sum(r * R18[:, 1])) == 0.5


def test_single_point_cannot_certify():
    with pytest.raises(VerificationFailed):
        verify_certificate(SQ, parse_polynomial("0", 1), [[1.0]], 1)


def test_certificate_needs_sup_points():
    w = prop18_f()
    P = parse_polynomial("3/2 + x^2 - y^2")
    with pytest.raises(VerificationFailed):
        verify_certificate(w.field, P, np.vstack([R18, [[0.5, 0.5]]]), 2)


# -- linear approximation on symmetric bodies ------------------------------------------------


def test_symmetric_examples():
    p, r = symmetric_linear_approx(poly_field("x^2 + y^2", 2), ConvexBody.unit_ball(2), GridSpec(41))
    np.testing.assert_array_equal(p.coefficients, [0.5, 0.0, 0.0])
    assert r.error == 0.5 and r.equality_ok and r.bound_ok
    assert r.omega2 == pytest.approx(2.0, abs=1e-6)
    ab = ScalarField(2, lambda X: np.abs(X[:, 0]), declared_convex=True)
    p, r = symmetric_linear_approx(ab, ConvexBody.cube(2), GridSpec(41))
    assert r.error == 0.5 and r.omega2 == pytest.approx(2.0, abs=1e-12)
    p, r = symmetric_linear_approx(poly_field("1 + 2x - y", 2), ConvexBody.cube(2), GridSpec(21))
    assert r.error <= 1e-12


def test_symmetric_needs_symmetry():
    with pytest.raises(PreconditionError):
        symmetric_linear_approx(SQ, ConvexBody.box([0.0], [1.0]), G1)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([ConvexBody.cube(2), ConvexBody.unit_ball(2),
                                                     ConvexBody.cross_polytope(2)]))
def test_symmetric_half_bound(seed, K):
    f = random_convex_field(np.random.default_rng(seed), 2)
    _, r = symmetric_linear_approx(f, K, GridSpec(21))
    assert r.equality_ok
    assert r.error <= 0.5 * r.omega2 + 1e-6


def test_to_dict_keys():
    d = best_uniform(SQ, I, 1, G1).to_dict()
    assert set(d) == {"m", "error", "coefficients", "active_points", "dual_weights"}
