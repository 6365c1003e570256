"""Best uniform polynomial approximation on a grid, with dual certificates."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ._search import compass_maximize
from .errors import (CertificateUnavailable, DegenerateGridError, InputError, LPError,
                     PreconditionError, VerificationFailed)
from .geometry import ConvexBody, GridSpec, contains, contains_points, sample_grid
from .lp import simplex
from .polynomials import Polynomial, basis_size, design_matrix
from .smoothness import FEAS_TOL, ScalarField, modulus, require_convex

ACTIVE_GAP = 1e-7


@dataclass(frozen=True, eq=False)
class ApproxSolution:
    """Grid-optimal polynomial of degree <= m and its dual certificate.

    ``dual_weights`` is aligned with ``active_points``; its sign is the sign of
    the residual f - p there and its absolute values sum to 1.
    """

    polynomial: Polynomial
    error: float
    active_points: np.ndarray
    dual_weights: np.ndarray
    m: int
    points: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "error": self.error,
            "coefficients": self.polynomial.to_json_terms(),
            "active_points": self.active_points.tolist(),
            "dual_weights": self.dual_weights.tolist(),
        }


def best_uniform_on_points(f_vals, X, m: int) -> ApproxSolution:
    """Discrete Chebyshev approximation of values ``f_vals`` at the rows of ``X``.

    Solved through its dual,

        max  sum_i w_i f_i   s.t.  sum_i w_i phi(x_i) = 0,  sum_i |w_i| = 1,

    with w = u - v, u, v >= 0.  The simplex multipliers of the equality rows are
    (minus) the polynomial coefficients and the minimax level.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    fv = np.asarray(f_vals, dtype=float)
    G, n = X.shape
    N = basis_size(n, m)
    if G < N + 1:
        raise DegenerateGridError(f"need at least {N + 1} grid points for degree {m}, got {G}")
    Phi = design_matrix(X, n, m)
    if np.linalg.matrix_rank(Phi) < N:
        raise DegenerateGridError("monomial basis is rank deficient on the grid")
    rowscale = np.max(np.abs(Phi), axis=0)
    A = np.zeros((N + 1, 2 * G))
    A[:N, :G] = (Phi / rowscale).T
    A[:N, G:] = -A[:N, :G]
    A[N] = 1.0
    b = np.zeros(N + 1)
    b[N] = 1.0
    c = np.concatenate([-fv, fv])
    res = simplex(c, A, b)
    coef = -res.y[:N] / rowscale
    p = Polynomial(n, m, coef)
    resid = fv - Phi @ coef
    err = float(np.max(np.abs(resid)))
    w = res.x[:G] - res.x[G:]
    active = np.flatnonzero(np.abs(resid) >= err - ACTIVE_GAP)
    stray = np.setdiff1d(np.flatnonzero(np.abs(w) > 0), active)
    if stray.size and np.max(np.abs(w[stray])) > 1e-9:
        raise LPError("dual weight on an inactive point: complementary slackness violated")
    wa = w[active]
    wa = np.where(np.sign(wa) == np.sign(resid[active]), wa, 0.0)
    if np.sum(np.abs(wa)) > 0:
        wa = wa / np.sum(np.abs(wa))
    return ApproxSolution(p, err, X[active], wa, m, X, resid)


def best_uniform(f: ScalarField, K: ConvexBody, m: int, grid: GridSpec) -> ApproxSolution:
    """Best uniform approximation by P_{m,n} over the lattice points of K."""
    if m < 0:
        raise InputError("degree must be nonnegative")
    X = sample_grid(K, grid)
    return best_uniform_on_points(f(X), X, m)


# -- E_1 for convex functions via the Jensen gap --------------------------------


def _hull_vertices(X: np.ndarray) -> np.ndarray:
    if X.shape[1] == 1:
        return np.array([X[np.argmin(X[:, 0])], X[np.argmax(X[:, 0])]])
    from scipy.spatial import ConvexHull

    return X[np.sort(ConvexHull(X).vertices)]


def _simplex_lattice(k: int, divisions: int) -> np.ndarray:
    rows = [c for c in itertools.product(range(divisions + 1), repeat=k - 1)
            if sum(c) <= divisions]
    W = np.array([[divisions - sum(c), *c] for c in rows], dtype=float)
    return W / divisions


def e1_convex(f: ScalarField, K: ConvexBody, search: GridSpec, divisions: int | None = None,
              refine: bool = True) -> float:
    """Half the largest Jensen gap sum a_i f(x_i) - f(sum a_i x_i) over (n+1)-tuples.

    For convex f the concave envelope at a point is reached with extreme
    points, so tuples are drawn from the vertices of the hull of the search
    grid; weights run over a simplex lattice and the best tuple is then
    polished by compass search on points and weights together.
    """
    X = sample_grid(K, search)
    require_convex(f, X)
    n = K.dimension
    V = _hull_vertices(X)
    k = min(n + 1, V.shape[0])
    if divisions is None:
        divisions = {1: 64, 2: 24, 3: 12}.get(k, 8)
    W = _simplex_lattice(k, divisions)
    fV = f(V)
    best_gap, best = -np.inf, None
    for combo in itertools.combinations(range(V.shape[0]), k):
        P = V[list(combo)]
        centers = W @ P
        gaps = W @ fV[list(combo)] - f(centers)
        j = int(np.argmax(gaps))
        if gaps[j] > best_gap:
            best_gap, best = float(gaps[j]), (P.copy(), W[j].copy())
    if not refine:
        return 0.5 * max(best_gap, 0.0)

    P0, w0 = best
    spacing = np.max(X.max(axis=0) - X.min(axis=0)) / (min(search.per_axis(n)) - 1)

    def objective(Z):
        Ps = Z[:, :k * n].reshape(-1, k, n)
        Ws = np.abs(Z[:, k * n:])
        tot = Ws.sum(axis=1)
        out = np.full(Z.shape[0], -np.inf)
        ok = (tot > 0) & contains_points(K, Ps.reshape(-1, n), FEAS_TOL).reshape(-1, k).all(axis=1)
        if ok.any():
            Wn = Ws[ok] / tot[ok, None]
            centers = np.einsum("ik,ikd->id", Wn, Ps[ok])
            vals = f(Ps[ok].reshape(-1, n)).reshape(-1, k)
            out[ok] = np.sum(Wn * vals, axis=1) - f(centers)
        return out

    z0 = np.concatenate([P0.ravel(), w0])
    step = np.concatenate([np.full(k * n, spacing), np.full(k, 1.0 / divisions)])
    _, gap = compass_maximize(objective, z0, step)
    return 0.5 * max(gap, best_gap, 0.0)


# -- certificates ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class E1Certificate:
    a: np.ndarray
    x: np.ndarray
    b: np.ndarray
    y: np.ndarray
    value: float


def _caratheodory(Cmat: np.ndarray, weights: np.ndarray, limit: int) -> np.ndarray:
    """Reduce the support of ``weights >= 0`` while keeping ``Cmat @ weights`` fixed."""
    w = weights.copy()
    while np.count_nonzero(w) > limit:
        S = np.flatnonzero(w)
        z = np.linalg.svd(Cmat[:, S])[2][-1]  # |S| > rows, so this is a null vector
        if not np.any(z > 1e-14):
            z = -z
        pos = z > 1e-14
        ratios = np.where(pos, w[S] / np.where(pos, z, 1.0), np.inf)
        i = int(np.argmin(ratios))
        w[S] = np.maximum(w[S] - ratios[i] * z, 0.0)
        w[S[i]] = 0.0
    return w


def e1_dual_certificate(sol: ApproxSolution, f: ScalarField, K: ConvexBody) -> E1Certificate:
    """Split the m = 1 dual weights into the two convex combinations of the E_1 formula."""
    if sol.m != 1:
        raise InputError("e1_dual_certificate needs a degree-1 solution")
    n = K.dimension
    P, w = sol.active_points, sol.dual_weights
    if sol.error <= 1e-12 or not np.any(w):
        x = P[:1]
        return E1Certificate(np.ones(1), x, np.ones(1), x.copy(), 0.0)
    # rows: barycenter difference (n), sum a - sum b, sum a
    sgn = np.sign(w)
    Cmat = np.vstack([sgn[None, :] * P.T, sgn[None, :], (sgn > 0)[None, :].astype(float)])
    keep = _caratheodory(Cmat, np.abs(w), n + 2)
    pos, neg = (sgn > 0) & (keep > 0), (sgn < 0) & (keep > 0)
    if not pos.any() or not neg.any():
        raise CertificateUnavailable("dual weights lack one residual sign", raw=w)
    a, b = keep[pos] / keep[pos].sum(), keep[neg] / keep[neg].sum()
    x, y = P[pos], P[neg]
    value = 0.5 * (a @ f(x) - b @ f(y))
    ok = (abs(a.sum() - 1) <= 1e-8 and abs(b.sum() - 1) <= 1e-8
          and np.max(np.abs(a @ x - b @ y)) <= 1e-6 and abs(value - sol.error) <= 1e-6)
    if not ok:
        raise CertificateUnavailable("pruned weights fail the certificate checks", raw=w)
    return E1Certificate(a, x, b, y, float(value))


@dataclass(frozen=True, eq=False)
class Certificate:
    points: np.ndarray
    multipliers: np.ndarray
    residual_signs: np.ndarray
    orthogonality_residual: float


def verify_certificate(f: ScalarField, R: Polynomial, points, m: int, tol: float = 1e-9,
                       K: ConvexBody | None = None, grid: GridSpec | None = None) -> Certificate:
    """Find c_i > 0, sum c_i = 1, with sum c_i (f - R)(x_i) S(x_i) = 0 for all S in P_{m,n}.

    Every point must carry the full residual |f - R| = ||f - R||; the sup is
    taken over the K grid when ``K`` and ``grid`` are given, else over the
    points themselves.
    """
    X = np.atleast_2d(np.asarray(points, dtype=float))
    n = X.shape[1]
    r = f(X) - R(X)
    sup = float(np.max(np.abs(r)))
    if K is not None and grid is not None:
        G = sample_grid(K, grid)
        sup = max(sup, float(np.max(np.abs(f(G) - R(G)))))
    if np.any(np.abs(np.abs(r) - sup) > tol * max(1.0, sup)):
        raise VerificationFailed("not every point attains the sup norm of f - R")
    Phi = design_matrix(X, n, m)
    N, k = Phi.shape[1], X.shape[0]
    Arow = (Phi * r[:, None]).T  # N x k
    # variables: tau, s_1..s_k >= 0 with c_i = tau + s_i; maximize tau
    A = np.zeros((N + 1, k + 1))
    A[:N, 0] = Arow.sum(axis=1)
    A[:N, 1:] = Arow
    A[N, 0] = k
    A[N, 1:] = 1.0
    b = np.zeros(N + 1)
    b[N] = 1.0
    cost = np.zeros(k + 1)
    cost[0] = -1.0
    try:
        res = simplex(cost, A, b)
    except LPError:
        raise VerificationFailed("no nonnegative multipliers annihilate the basis") from None
    tau = res.x[0]
    if tau <= 1e-12:
        raise VerificationFailed("no strictly positive multipliers annihilate the basis")
    c = tau + res.x[1:]
    orth = float(np.max(np.abs(Arow @ c)))
    if orth > tol:
        raise VerificationFailed(f"orthogonality residual {orth:.3g} exceeds {tol:.3g}")
    return Certificate(X, c, np.sign(r), orth)


# -- linear approximation on symmetric bodies ----------------------------------------


@dataclass(frozen=True, eq=False)
class SymmetricBoundReport:
    error: float
    half_g_norm: float
    omega2: float
    correction: float
    equality_ok: bool
    bound_ok: bool


def symmetric_linear_approx(f: ScalarField, K: ConvexBody, grid: GridSpec, tol: float = 1e-6,
                            fd_step: float = 1e-5):
    """Constant-shifted support function at the origin.

    l is the tangent plane at 0 (the field's subgradient if it has one, else
    central differences), lowered if needed so
    that l <= f on the grid; g = f - l and p = l + ||g|| / 2.
    """
    if not K.symmetric:
        raise PreconditionError("symmetric_linear_approx needs K = -K")
    n = K.dimension
    if not contains(K, np.zeros(n)):
        raise PreconditionError("origin must lie in K")
    X = sample_grid(K, grid)
    require_convex(f, X)
    f0 = f(np.zeros((1, n)))[0]
    if f.subgradient is not None:
        grad = np.asarray(f.subgradient(np.zeros(n)), dtype=float).reshape(n)
    else:
        E = np.eye(n) * fd_step
        grad = (f(E) - f(-E)) / (2 * fd_step)
    l = Polynomial(n, 1, np.concatenate([[f0], grad]))
    fX = f(X)
    corr = max(0.0, float(np.max(l(X) - fX)))
    if corr > 1e-3 * (1.0 + abs(f0)):
        raise PreconditionError(f"support construction failed (correction {corr:.3g})")
    l = l - corr
    g = fX - l(X)
    gnorm = float(np.max(np.abs(g)))
    p = l + 0.5 * gnorm
    err = float(np.max(np.abs(fX - p(X))))
    om = modulus(f, K, 2, grid).value
    report = SymmetricBoundReport(err, 0.5 * gnorm, om, corr,
                                  equality_ok=abs(err - 0.5 * gnorm) <= 1e-12 * (1 + gnorm),
                                  bound_ok=err <= 0.5 * om + tol)
    return p, report
