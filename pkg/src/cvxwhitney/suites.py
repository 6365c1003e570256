"""Reproduction and property suites.  Each returns a :class:`Report`."""

from __future__ import annotations

import itertools
import math

import numpy as np

from .approx import best_uniform, e1_convex, symmetric_linear_approx, verify_certificate
from .convexify import convexify_quadratic, convexify_smooth
from .errors import VerificationFailed
from .geometry import ConvexBody, GridSpec, canonical_position, lattice, sample_grid, transform
from .polynomials import (Polynomial, hessian_min_eig_on, is_convex_on, parse_polynomial,
                          quadratic_parts)
from .report import Report, eq, ge, holds, le, within
from .smoothness import ScalarField, binomial_weights, lattice_modulus, modulus
from .whitney import (entropy_fn, prop18_f, ramp, random_convex_field, random_field,
                      random_polynomial, whitney_ratio)


def _rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng([seed, *keys])


# -- the roof function on [-1,1] x [0,1] ------------------------------------------------


def prop18_suite(resolution=(101, 51)) -> Report:
    """Assertions about 2 max{1 - y, |x|} and its two best quadratics.

    The certificate is checked twice: for some positive multipliers, and for
    uniform multipliers.  On these six points y^2
    equals y, so the certificate is unique up to scale and is proportional to
    (1, 1, 2, 2, 1, 1); the uniform row fails.
    """
    rep = Report("prop18")
    w = prop18_f()
    f, K = w.field, w.natural_body
    grid = GridSpec(resolution)
    P = parse_polynomial("3/2 + x^2 - y^2")
    Q = parse_polynomial("3/2 + x^2 + y^2 - 2y")
    X = sample_grid(K, grid)
    fX = f(X)

    sol = best_uniform(f, K, 2, grid)
    rep.add(within("E2_grid", sol.error, 0.49, 0.5 + 1e-12, "reference"))

    nP = float(np.max(np.abs(fX - P(X))))
    nQ = float(np.max(np.abs(fX - Q(X))))
    rep.add(eq("norm_f_minus_P_and_Q", [0.5, 0.5], [nP, nQ], 1e-9, "reference"))

    R = np.array(list(itertools.product([-1.0, 0.0, 1.0], [0.0, 1.0])))
    sign = 0.5 * (-1.0) ** (R[:, 0] + R[:, 1])
    dev = max(float(np.max(np.abs(f(R) - P(R) - sign))),
              float(np.max(np.abs(f(R) - Q(R) - sign))))
    rep.add(eq("alternation_on_R", 0.0, dev, 0.0, "reference"))

    orth, spread = 0.0, 0.0
    try:
        for R_poly in (P, Q):
            cert = verify_certificate(f, R_poly, R, 2, tol=1e-9, K=K, grid=grid)
            c = cert.multipliers / cert.multipliers.sum()
            orth = max(orth, cert.orthogonality_residual)
            spread = max(spread, float(np.max(np.abs(c - 1 / len(R)))))
    except VerificationFailed:
        orth = spread = math.inf
    rep.add(le("certificates_positive", orth, 0.0, 1e-9, "reference"))
    rep.add(le("certificates_uniform", spread, 0.0, 1e-9, "reference"))

    eP, eQ = hessian_min_eig_on(P, K, grid), hessian_min_eig_on(Q, K, grid)
    case = eq("hessian_min_eig", [-2.0, 2.0], [eP, eQ], 0.0, "reference")
    case.passed = case.passed and not is_convex_on(P, K, grid) and is_convex_on(Q, K, grid)
    rep.add(case)
    return rep


# -- linear approximation on symmetric bodies ---------------------------------------------


def symmetric_halving_suite(seed: int = 0, n_random: int = 100, deltas=(0.5, 0.25, 0.1),
                            resolution: dict | None = None,
                            random_resolution: dict | None = None) -> Report:
    """Ramp witnesses reach 1/2 - delta/4; the support construction stays within omega_2 / 2."""
    rep = Report("thm13")
    # 0.01 spacing along x_1 puts every hinge 1 - delta on the lattice
    res = {1: 201, 2: (201, 51), **(resolution or {})}
    rres = {2: 41, 3: 15, **(random_resolution or {})}

    for n in (1, 2):
        grid = GridSpec(res[n])
        for d in deltas:
            est = whitney_ratio(ramp(d, n), None, 2, grid)
            tag = f"ramp[{d:g}]/n{n}"
            rep.add(eq(f"{tag}/E1", 0.5 - d / 4, est.E, 1e-3, "reference"))
            rep.add(eq(f"{tag}/omega2", 1.0, est.omega, 1e-6, "reference"))
            rep.add(eq(f"{tag}/ratio", 0.5 - d / 4, est.ratio, 1e-3, "reference"))

    K2, g2 = ConvexBody.cube(2), GridSpec(41)
    sq = ScalarField.from_polynomial(Polynomial.norm_squared(2), declared_convex=True)
    _, r = symmetric_linear_approx(sq, K2, g2)
    rep.add(le("norm2/cube2", r.error, 0.5 * r.omega2, 1e-6, "oracle"))
    aff = ScalarField.from_polynomial(parse_polynomial("1 + 2x - y"), declared_convex=True)
    _, r = symmetric_linear_approx(aff, K2, g2)
    rep.add(eq("affine/cube2", 0.0, r.error, 1e-12, "identity"))

    bodies = {2: [ConvexBody.cube(2), ConvexBody.unit_ball(2), ConvexBody.cross_polytope(2)],
              3: [ConvexBody.cube(3), ConvexBody.unit_ball(3), ConvexBody.cross_polytope(3)]}
    worst, records = -math.inf, []
    for i in range(n_random):
        n = 2 + i % 2
        K = bodies[n][(i // 2) % 3]
        f = random_convex_field(_rng(seed, 13, i), n, name=f"convex{i}")
        _, r = symmetric_linear_approx(f, K, GridSpec(rres[n]))
        worst = max(worst, r.error - 0.5 * r.omega2)
        records.append({"id": i, "n": n, "body": K.kind, "error": r.error, "omega2": r.omega2})
    if n_random:
        rep.add(le("random/error_minus_half_omega2", worst, 0.0, 1e-6, "reference"))
    rep.extras["random_cases"] = records
    return rep


# -- the entropy witness on simplices --------------------------------------------------------


def entropy_suite(dims=(1, 2, 3), resolution: dict | None = None) -> Report:
    """E_1 of 1/2 sum x log2 x on the n-simplex is at least log2(n+1)/4, with omega_2 <= 1."""
    rep = Report("entropy")
    res = {1: 201, 2: 101, 3: 41, **(resolution or {})}
    measured = {}
    for n in dims:
        w = entropy_fn(n)
        grid = GridSpec(res[n])
        e1 = e1_convex(w.field, w.natural_body, grid)
        om = modulus(w.field, w.natural_body, 2, grid).value
        lower = 0.25 * math.log2(n + 1)
        rep.add(ge(f"entropy/n{n}/E1", e1, lower, 1e-2, "reference"))
        rep.add(le(f"entropy/n{n}/omega2", om, 1.0, 1e-6, "reference"))
        measured[f"n{n}"] = {"E1": e1, "omega2": om, "lower": lower}
        if n == 1:
            rep.add(eq("entropy/n1/E1_exact", 0.25, e1, 1e-3, "oracle"))
            lp = best_uniform(w.field, w.natural_body, 1, grid).error
            rep.add(eq("entropy/n1/E1_lp", 0.25, lp, 1e-3, "oracle"))
    rep.extras["measured"] = measured
    return rep


# -- quadratic repair ----------------------------------------------------------------------


def _positioned_body(kind: str, n: int, rng: np.random.Generator):
    if kind == "ball":
        K = ConvexBody.ball(rng.normal(size=n), rng.uniform(0.5, 2.0))
    elif kind == "box":
        lo = rng.normal(size=n)
        K = ConvexBody.box(lo, lo + rng.uniform(0.5, 2.0, size=n))
    else:
        while True:
            V = rng.normal(size=(n + 1, n))
            if abs(np.linalg.det(V[1:] - V[0])) > 0.1:
                break
        K = ConvexBody.simplex(V)
    T, lam = canonical_position(K)
    return transform(K, T), lam


def _random_quadratic(rng: np.random.Generator, n: int) -> Polynomial:
    c = rng.normal(size=len(Polynomial.zero(n, 2).coefficients))
    return Polynomial(n, 2, c / np.linalg.norm(c) * rng.uniform(0.0, 1.0))


def repair_case(seed: int, i: int, resolution: dict | None = None) -> dict:
    """One randomized repair with every checked quantity."""
    res = {2: 15, 3: 9, **(resolution or {})}
    rng = _rng(seed, 16, i)
    n = 2 + i % 2
    kind = ("ball", "box", "simplex")[(i // 2) % 3]
    Kc, lam = _positioned_body(kind, n, rng)
    grid = GridSpec(res[n])
    f = random_convex_field(rng, n, name=f"f{i}")
    P = best_uniform(f, Kc, 2, grid).polynomial + _random_quadratic(rng, n)
    r = convexify_quadratic(f, P, Kc, grid, lam=lam)

    min_eig = float(np.linalg.eigvalsh(quadratic_parts(r.Q).M)[0])
    # sampled unit vectors y and the auxiliary quantities of the error chain
    Y = rng.normal(size=(32, n))
    Y /= np.linalg.norm(Y, axis=1, keepdims=True)
    D, Dp = r.D, r.D_plus
    Ym = np.where(D < 0, Y, 0.0)
    lhs = np.einsum("ij,j,ij->i", Ym, D, Ym)
    rhs = np.einsum("ij,j,ij->i", Y, D, Y) - np.einsum("ij,j,ij->i", Y, Dp, Y)
    neg_part = float(np.max(np.abs(lhs - rhs) / (1 + np.abs(rhs))))
    X = Y @ r.O.T
    origin = np.zeros((1, n))
    second = f(X) - 2 * f(origin) + f(-X)
    yDy = np.einsum("ij,j,ij->i", Y, D, Y)
    lam_s = rng.uniform(1.0, lam, size=(32, 1))
    Xs = X * rng.uniform(0, 1, size=(32, 1))
    g = lambda Z: P(Z) - r.Q(Z) - r.shift
    homog = float(np.max(np.abs(g(lam_s * Xs) - lam_s[:, 0] ** 2 * g(Xs))
                         / (1 + np.abs(g(lam_s * Xs)))))
    return {
        "id": i, "n": n, "body": kind, "lam": lam, "result": r, "min_eig": min_eig,
        "ball_excess": r.pq_ball - r.e_ball * (1 + r.inflation),
        "bound_excess": r.achieved - 2 * lam * lam * r.e_K * (1 + r.inflation),
        "neg_part": neg_part, "homogeneity": homog,
        "second_diff_min": float(np.min(second)),
        "aux_excess": float(np.max(-2 * r.e_ball - yDy)),
    }


def thm16_suite(seed: int = 0, n_cases: int = 500, resolution: dict | None = None) -> Report:
    """Randomized quadratic repairs: PSD, the ball estimate and the 2 lam^2 bound in every case."""
    rep = Report("thm16")
    cases = [repair_case(seed, i, resolution) for i in range(n_cases)]
    agg = lambda key, fn: fn(c[key] for c in cases) if cases else 0.0
    rep.add(ge("psd_min_eig", agg("min_eig", min), 0.0, 1e-10, "reference"))
    rep.add(le("ball_estimate_excess", agg("ball_excess", max), 0.0, 1e-8, "reference"))
    rep.add(le("bound_excess", agg("bound_excess", max), 0.0, 1e-8, "reference"))
    rep.add(le("negative_part_identity", agg("neg_part", max), 0.0, 1e-12, "reference"))
    rep.add(le("homogeneity", agg("homogeneity", max), 0.0, 1e-9, "reference"))
    rep.add(ge("second_difference_min", agg("second_diff_min", min), 0.0, 1e-9, "reference"))
    rep.add(le("aux_bound_excess", agg("aux_excess", max), 0.0, 1e-8, "reference"))
    rep.add(holds("intermediate_ok", all(c["result"].intermediate_ok for c in cases), "reference"))
    rep.extras["cases"] = [
        {"id": c["id"], "n": c["n"], "body": c["body"], "lambda": c["lam"],
         "e_ball": c["result"].e_ball, "e_K": c["result"].e_K,
         "achieved": c["result"].achieved, "bound": c["result"].bound,
         "ratio": c["result"].ratio}
        for c in cases]
    ratios = [c["result"].ratio for c in cases]
    if ratios:
        rep.extras["ratio_summary"] = {"max": max(ratios), "mean": float(np.mean(ratios)),
                                       "above_one": int(sum(x > 1 + 1e-9 for x in ratios))}
    return rep


# -- smooth convexification ------------------------------------------------------------------


def smooth_suite(seed: int = 0, n_cases: int = 50, m: int = 3, resolution: int = 21) -> Report:
    """Adding L ||x||^2 makes g convex and leaves E_{m-1} and omega_m unchanged."""
    rep = Report("smooth")
    K, grid = ConvexBody.cube(2), GridSpec(resolution)
    min_eig, dE, dW = math.inf, 0.0, 0.0
    for i in range(n_cases):
        g = random_polynomial(_rng(seed, 14, i), 2, 3 + i % 2)
        h, _ = convexify_smooth(g, K, grid)
        fg, fh = ScalarField.from_polynomial(g), ScalarField.from_polynomial(h)
        min_eig = min(min_eig, hessian_min_eig_on(h, K, grid))
        dE = max(dE, abs(best_uniform(fh, K, m - 1, grid).error
                         - best_uniform(fg, K, m - 1, grid).error))
        dW = max(dW, abs(lattice_modulus(fh, K, m, grid).value
                         - lattice_modulus(fg, K, m, grid).value))
    rep.add(ge("h_min_hessian_eig", min_eig, 0.0, 1e-9, "reference"))
    rep.add(le("E_difference", dE, 0.0, 1e-8, "reference"))
    rep.add(le("omega_difference", dW, 0.0, 1e-8, "reference"))
    return rep


# -- identities and brute-force oracles -------------------------------------------------------


def brute_force_modulus(f: ScalarField, K: ConvexBody, m: int, grid: GridSpec) -> float:
    """max |Delta_h^m f(x)| over every ordered lattice pair, by explicit index loops."""
    lat = lattice(K, grid)
    F = np.full(lat.shape, np.nan)
    F[lat.mask] = f(lat.points())
    w = binomial_weights(m)
    best = -1.0
    idx_all = list(itertools.product(*(range(r) for r in lat.shape)))
    for i in idx_all:
        if not lat.mask[i]:
            continue
        for j in idx_all:
            k = tuple(b - a for a, b in zip(i, j))
            if not any(k):
                continue
            nodes = [tuple(a + s * d for a, d in zip(i, k)) for s in range(m + 1)]
            if any(not all(0 <= c < r for c, r in zip(nd, lat.shape)) or not lat.mask[nd]
                   for nd in nodes):
                continue
            total = None
            for s, nd in enumerate(nodes):
                term = w[s] * F[nd]
                total = term if total is None else total + term
            best = max(best, abs(float(total)))
    return best


def _identity_bodies(n: int):
    if n == 1:
        return [ConvexBody.cube(1), ConvexBody.box([0.0], [1.0])]
    return [ConvexBody.cube(2), ConvexBody.unit_ball(2), ConvexBody.standard_simplex(2)]


def identities_suite(seed: int = 0, n_fields: int = 50, n_convex: int = 20) -> Report:
    """E_0 = omega_1 / 2, brute-force moduli, E_1 two ways, order reduction, quadratic invariance."""
    rep = Report("identities")
    grids = {1: GridSpec(41), 2: GridSpec(15)}
    e0_gap, order_excess, quad_gap = 0.0, -math.inf, 0.0
    for i in range(n_fields):
        rng = _rng(seed, 6, i)
        n = 1 + i % 2
        K = _identity_bodies(n)[(i // 2) % len(_identity_bodies(n))]
        f = random_field(rng, n, name=f"field{i}")
        grid = grids[n]
        om = {k: lattice_modulus(f, K, k, grid).value for k in (1, 2, 3)}
        e0 = best_uniform(f, K, 0, grid).error
        e0_gap = max(e0_gap, abs(e0 - 0.5 * om[1]))
        for mm, k in ((2, 1), (3, 1), (3, 2)):
            order_excess = max(order_excess, om[mm] - 2 ** (mm - k) * om[k])
        q = random_polynomial(rng, n, 2)
        fq = f + q
        quad_gap = max(quad_gap, abs(lattice_modulus(fq, K, 3, grid).value - om[3]))
    rep.add(le("E0_minus_half_omega1", e0_gap, 0.0, 1e-10, "reference"))
    rep.add(le("order_reduction_excess", order_excess, 0.0, 1e-8, "reference"))
    rep.add(le("omega3_quadratic_invariance", quad_gap, 0.0, 1e-8, "reference"))

    brute_gap = 0.0
    for i, (n, res, m) in enumerate(itertools.product((1, 2), (5, 7), (1, 2, 3))):
        K = _identity_bodies(n)[i % len(_identity_bodies(n))]
        f = random_field(_rng(seed, 66, i), n)
        grid = GridSpec(res)
        brute_gap = max(brute_gap, abs(lattice_modulus(f, K, m, grid).value
                                       - brute_force_modulus(f, K, m, grid)))
    rep.add(eq("lattice_vs_brute_force", 0.0, brute_gap, 0.0, "oracle"))

    e1_gap = 0.0
    for i in range(n_convex):
        n = 1 + i % 2
        K = _identity_bodies(n)[(i // 2) % len(_identity_bodies(n))]
        f = random_convex_field(_rng(seed, 61, i), n, smooth=True)
        grid = GridSpec(41)
        e1_gap = max(e1_gap, abs(e1_convex(f, K, grid) - best_uniform(f, K, 1, grid).error))
    rep.add(le("e1_jensen_vs_lp", e1_gap, 0.0, 1e-2, "oracle"))

    half_gap = 0.0
    for w in (ramp(0.5), entropy_fn(1), prop18_f()):
        grid = GridSpec(41 if w.field.dimension == 1 else 15)
        est = whitney_ratio(w, None, 1, grid, refine=False)
        half_gap = max(half_gap, abs(est.ratio - 0.5))
    rep.add(eq("degree1_ratio_half", 0.0, half_gap, 1e-10, "reference"))
    return rep


# -- one-dimensional sanity --------------------------------------------------------------------


def _segment_functions(seed: int):
    fixed = [
        ("x^3", lambda X: X[:, 0] ** 3, False),
        ("exp", lambda X: np.exp(X[:, 0]), True),
        ("sin3x", lambda X: np.sin(3 * X[:, 0]), False),
        ("abs", lambda X: np.abs(X[:, 0] - 0.3), True),
        ("hinge", lambda X: np.maximum(0.0, X[:, 0] - 0.5), True),
        ("sqrt", lambda X: np.sqrt(X[:, 0]), False),
        ("xlogx", lambda X: np.where(X[:, 0] > 0, X[:, 0] * np.log(np.maximum(X[:, 0], 1e-300)),
                                     0.0), True),
        ("cos5x", lambda X: np.cos(5 * X[:, 0]), False),
        ("recip", lambda X: 1 / (1 + X[:, 0]), True),
        ("x^4", lambda X: X[:, 0] ** 4, True),
    ]
    out = [(name, ScalarField(1, ev, declared_convex=cvx, name=name), cvx)
           for name, ev, cvx in fixed]
    for i in range(5):
        out.append((f"convex{i}", random_convex_field(_rng(seed, 7, i), 1), True))
    for i in range(5):
        out.append((f"field{i}", random_field(_rng(seed, 77, i), 1), False))
    return out


def segment_suite(seed: int = 0, resolution: int = 201) -> Report:
    """E_2 <= omega_3 on [0, 1]; the best quadratic to a convex function opens upward."""
    rep = Report("segment")
    K, grid = ConvexBody.box([0.0], [1.0]), GridSpec(resolution)
    for name, f, cvx in _segment_functions(seed):
        sol = best_uniform(f, K, 2, grid)
        om = modulus(f, K, 3, grid).value
        rep.add(le(f"{name}/E2_vs_omega3", sol.error, om, 1e-6, "reference"))
        if cvx:
            rep.add(ge(f"{name}/leading_coefficient", sol.polynomial.coefficient((2,)), 0.0,
                       1e-9, "reference"))
    return rep


SUITES = {
    "prop18": prop18_suite,
    "thm13": symmetric_halving_suite,
    "entropy": entropy_suite,
    "thm16": thm16_suite,
    "smooth": smooth_suite,
    "identities": identities_suite,
    "segment": segment_suite,
}
