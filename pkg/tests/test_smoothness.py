import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvxwhitney.errors import DegenerateGridError, InputError, PreconditionError
from cvxwhitney.geometry import ConvexBody, GridSpec, contains_points
from cvxwhitney.polynomials import parse_polynomial
from cvxwhitney.smoothness import (ScalarField, finite_difference, lattice_modulus,
                                   midpoint_violation, modulus, require_convex)
from cvxwhitney.suites import brute_force_modulus
from cvxwhitney.whitney import entropy_fn, ramp, random_convex_field, random_field, random_polynomial

I = ConvexBody.cube(1)
SQ = ScalarField.from_polynomial(parse_polynomial("x^2", 1))


def field(text, n):
    return ScalarField.from_polynomial(parse_polynomial(text, n))


@pytest.mark.parametrize("f, x, h, m, expected", [
    (SQ, [0.0], [1.0], 2, 2.0),
    (ramp(0.5).field, [-1.0], [1.0], 2, 1.0),
    (SQ, [0.3], [0.0], 3, 0.0),
    (field("x^3", 1), [0.0], [1.0], 3, -6.0),
])
def test_finite_difference_examples(f, x, h, m, expected):
    assert finite_difference(f, x, h, m) == expected


def test_finite_difference_order_checked():
    with pytest.raises(InputError):
        finite_difference(SQ, [0.0], [1.0], 0)


def test_modulus_examples():
    w = modulus(ramp(0.5).field, I, 2, GridSpec(201))
    assert w.value == pytest.approx(1.0, abs=1e-12)
    assert modulus(field("3 + 2x - y", 2), ConvexBody.cube(2), 2, GridSpec(21)).value <= 1e-12
    e = entropy_fn(1)
    assert modulus(e.field, e.natural_body, 2, GridSpec(201)).value <= 1 + 1e-6


def test_witness_is_feasible_and_exact():
    f = random_field(np.random.default_rng(4), 2)
    K = ConvexBody.unit_ball(2)
    for m in (1, 2, 3):
        w = modulus(f, K, m, GridSpec(15))
        nodes = w.x + np.arange(m + 1)[:, None] * w.h
        assert np.all(contains_points(K, nodes, 1e-9))
        assert abs(abs(finite_difference(f, w.x, w.h, m)) - w.value) <= 1e-12


def test_square_on_interval():
    # oracle: Delta_h^2 x^2 = 2 h^2, largest chain -1, 0, 1
    assert lattice_modulus(SQ, I, 2, GridSpec(21)).value == 2.0


def test_empty_feasible_set():
    with pytest.raises(DegenerateGridError):
        lattice_modulus(SQ, I, 3, GridSpec(3))


@pytest.mark.parametrize("n, res, m", [(n, r, m) for n in (1, 2) for r in (3, 5, 7)
                                       for m in (1, 2, 3) if (r - 1) // m >= 1])
def test_brute_force_oracle(n, res, m):
    K = ConvexBody.unit_ball(2) if n == 2 else ConvexBody.box([0.0], [1.0])
    f = random_field(np.random.default_rng([n, res, m]), n)
    assert lattice_modulus(f, K, m, GridSpec(res)).value == brute_force_modulus(f, K, m, GridSpec(res))


def _fields(seed, n):
    rng = np.random.default_rng(seed)
    return random_field(rng, n), random_field(rng, n)


BODIES = [ConvexBody.cube(2), ConvexBody.unit_ball(2), ConvexBody.standard_simplex(2)]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from(BODIES))
def test_order_reduction_and_boundedness(seed, K):
    f, _ = _fields(seed, 2)
    grid = GridSpec(13)
    om = {m: lattice_modulus(f, K, m, grid).value for m in (1, 2, 3)}
    for m, k in ((2, 1), (3, 1), (3, 2)):
        assert om[m] <= 2 ** (m - k) * om[k] + 1e-8
    from cvxwhitney.geometry import sample_grid

    top = np.max(np.abs(f(sample_grid(K, grid))))
    for m in (1, 2, 3):
        assert om[m] <= 2 ** m * top + 1e-8


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from(BODIES), st.integers(1, 3))
def test_subadditivity(seed, K, m):
    f, g = _fields(seed, 2)
    grid = GridSpec(13)
    assert (lattice_modulus(f + g, K, m, grid).value
            <= lattice_modulus(f, K, m, grid).value + lattice_modulus(g, K, m, grid).value + 1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from(BODIES), st.integers(3, 4))
def test_quadratic_annihilation(seed, K, m):
    rng = np.random.default_rng(seed)
    f = random_field(rng, 2)
    q = ScalarField.from_polynomial(random_polynomial(rng, 2, 2))
    grid = GridSpec(13)
    assert abs(lattice_modulus(f + q, K, m, grid).value - lattice_modulus(f, K, m, grid).value) <= 1e-8


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from(BODIES))
def test_convex_second_differences_nonnegative(seed, K):
    f = random_convex_field(np.random.default_rng(seed), 2)
    from cvxwhitney.geometry import lattice

    lat = lattice(K, GridSpec(9))
    X = lat.points()
    for x in X[::3]:
        for h in X[::5] - x:
            if np.all(contains_points(K, x + np.arange(3)[:, None] * h, 1e-9)):
                assert finite_difference(f, x, h, 2) >= -1e-9


def test_refinement_never_lowers():
    f = random_field(np.random.default_rng(9), 2)
    K = ConvexBody.unit_ball(2)
    lat = lattice_modulus(f, K, 2, GridSpec(11)).value
    assert modulus(f, K, 2, GridSpec(11)).value >= lat


def test_convexity_spot_check():
    X = np.linspace(-1, 1, 41)[:, None]
    require_convex(ScalarField.from_polynomial(parse_polynomial("x^2", 1), declared_convex=True), X)
    with pytest.raises(PreconditionError):
        require_convex(SQ, X)  # not declared convex
    concave = ScalarField.from_polynomial(parse_polynomial("-x^2", 1), declared_convex=True)
    assert midpoint_violation(concave, X) > 0
    with pytest.raises(PreconditionError):
        require_convex(concave, X)


def test_witness_json():
    d = modulus(SQ, I, 2, GridSpec(21)).to_dict()
    assert set(d) == {"value", "x", "h", "m"}
