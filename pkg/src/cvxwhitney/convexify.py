"""Making polynomial approximants convex.

Two devices live here: the repair of a quadratic approximant of a convex
function (clip the negative curvature of its quadratic form and shift it down
by the approximation error on the inscribed unit ball), and the smooth
convexification h = g + L ||x||^2 of a polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._search import compass_maximize
from .errors import PreconditionError
from .geometry import (AffineMap, ConvexBody, GridSpec, canonical_position, contains_points,
                       sample_grid, sandwich_radii, sphere_directions, transform)
from .polynomials import (Polynomial, hessian_min_eig_on, quadratic_from_parts,
                          quadratic_parts, symm_eig)
from .smoothness import FEAS_TOL, ScalarField, require_convex

CLIP_ZERO = 1e-12
INFLATION = 1e-3


@dataclass(frozen=True, eq=False)
class RepairResult:
    """A convex quadratic Q built from P, with every operand of the error chain.

    ``e_ball`` and ``e_K`` are sup norms of f - P on the unit-ball sample and
    the K sample, ``achieved`` is the sup norm of f - Q on the K sample and
    ``pq_ball`` that of P - Q on the ball sample.  ``bound`` already carries
    the safety inflation applied to the shift.
    """

    Q: Polynomial
    P: Polynomial
    e_ball: float
    e_K: float
    bound: float
    achieved: float
    pq_ball: float
    intermediate_ok: bool
    lam: float
    shift: float
    O: np.ndarray
    D: np.ndarray
    D_plus: np.ndarray
    inflation: float = INFLATION

    @property
    def ratio(self) -> float:
        """achieved / e_K, or 0 when P already matches f on the grid."""
        return self.achieved / self.e_K if self.e_K > 0 else 0.0

    @property
    def bound_ok(self) -> bool:
        return self.achieved <= self.bound + 1e-8

    @property
    def min_eig(self) -> float:
        return float(np.min(self.D_plus)) if self.D_plus.size else 0.0

    def to_dict(self) -> dict:
        return {
            "Q": self.Q.to_json_terms(),
            "e_ball": self.e_ball,
            "e_K": self.e_K,
            "bound": self.bound,
            "achieved": self.achieved,
            "pq_ball": self.pq_ball,
            "intermediate_ok": self.intermediate_ok,
            "lambda": self.lam,
            "shift": self.shift,
            "ratio": self.ratio,
        }


BALL_RESOLUTION = {1: 401, 2: 61, 3: 25}


def _ball_sample(n: int, grid: GridSpec | None) -> tuple[np.ndarray, float]:
    if grid is None:
        grid = GridSpec(BALL_RESOLUTION.get(n, 11))
    X = sample_grid(ConvexBody.unit_ball(n), grid)
    if n > 1:
        X = np.vstack([X, sphere_directions(n, 64 * n)])
    return X, 2.0 / (min(grid.per_axis(n)) - 1)


def _ball_sup(err, X: np.ndarray, spacing: float, top: int = 16):
    """sup of err over the unit ball and the polished maximizers.

    Compass search starts from the ``top`` best sample points that are local
    maxima among their sample neighbours.
    """
    vals = err(X)
    order = np.argsort(-vals, kind="stable")
    starts = []
    for i in order[:256]:
        d = np.linalg.norm(X - X[i], axis=1)
        near = d <= 1.5 * spacing
        if vals[i] >= np.max(vals[near]):
            starts.append(i)
        if len(starts) == top:
            break

    def objective(Z):
        out = np.full(Z.shape[0], -np.inf)
        ok = np.sum(Z * Z, axis=1) <= 1.0
        if ok.any():
            out[ok] = err(Z[ok])
        return out

    best, pts = float(vals[order[0]]), [X[order[0]]]
    for i in starts:
        z, v = compass_maximize(objective, X[i], spacing)
        best = max(best, v)
        pts.append(z)
    return best, np.array(pts)


def convexify_quadratic(f: ScalarField, P: Polynomial, K: ConvexBody, grid: GridSpec,
                        lam: float | None = None, ball_grid: GridSpec | None = None,
                        inflation: float = INFLATION) -> RepairResult:
    """Replace P by the convex quadratic x^T O D_+ O^T x + L(x) - shift.

    K must contain the unit ball about the origin; ``lam`` defaults to the
    outer radius of K.  The ball is sampled on its own grid (``ball_grid``,
    default :data:`BALL_RESOLUTION`) plus sphere directions.  The shift is
    (1 + inflation) times the sup of |f - P| on the unit ball, which guards
    the inequality chain against a grid estimate that falls short of the
    true sup.
    """
    n = K.dimension
    inner, outer = sandwich_radii(K)
    if inner < 1 - 1e-9:
        raise PreconditionError(f"K must contain the unit ball (inner radius {inner:.6g})")
    if lam is None:
        lam = max(1.0, outer)
    XB, spacing = _ball_sample(n, ball_grid)
    XK = sample_grid(K, grid)
    require_convex(f, XK)

    parts = quadratic_parts(P)
    eig = symm_eig(parts.M)
    D = np.where((eig.D < 0) & (eig.D > -CLIP_ZERO), 0.0, eig.D)
    D_plus = np.maximum(D, 0.0)
    e_ball, peaks = _ball_sup(lambda X: np.abs(f(X) - P(X)), XB, spacing)
    # the ball points lie in K, so the K sample includes them
    XB = np.vstack([XB, peaks])
    XK = np.vstack([XK, XB[contains_points(K, XB, FEAS_TOL)]])
    shift = (1.0 + inflation) * e_ball
    Q = quadratic_from_parts(eig.O @ np.diag(D_plus) @ eig.O.T, parts.linear) - shift

    fK = f(XK)
    e_K = float(np.max(np.abs(fK - P(XK))))
    achieved = float(np.max(np.abs(fK - Q(XK))))
    pq_ball = float(np.max(np.abs(P(XB) - Q(XB))))
    return RepairResult(
        Q=Q, P=P, e_ball=e_ball, e_K=e_K,
        bound=2 * lam * lam * e_K * (1.0 + inflation),
        achieved=achieved, pq_ball=pq_ball,
        intermediate_ok=pq_ball <= shift + 1e-8,
        lam=float(lam), shift=shift, O=eig.O, D=D, D_plus=D_plus, inflation=inflation)


@dataclass(frozen=True, eq=False)
class PositionedRepair:
    """A repair carried out in canonical position and pulled back to K."""

    result: RepairResult
    Q: Polynomial
    T: AffineMap
    achieved: float


def convexify_in_position(f: ScalarField, P: Polynomial, K: ConvexBody, grid: GridSpec,
                          **kwargs) -> PositionedRepair:
    """Move K to canonical position, repair there and map Q back.

    Convexity survives affine changes of variables, so the pulled-back Q is a
    convex quadratic on the original body.
    """
    T, lam = canonical_position(K)
    Tinv = T.inverse()
    Kc = transform(K, T)
    res = convexify_quadratic(f.composed(Tinv), P.compose_affine(Tinv.matrix, Tinv.offset),
                              Kc, grid, lam=lam, **kwargs)
    Q = res.Q.compose_affine(T.matrix, T.offset)
    X = sample_grid(K, grid)
    achieved = float(np.max(np.abs(f(X) - Q(X))))
    return PositionedRepair(res, Q, T, achieved)


def convexify_smooth(g: Polynomial, K: ConvexBody, grid: GridSpec) -> tuple[Polynomial, float]:
    """h = g + L ||x||^2 with L half the largest Hessian spectral radius on the grid."""
    n = g.dimension
    if g.effective_degree() <= 2:
        M = 2 * quadratic_parts(g).M if g.effective_degree() == 2 else np.zeros((n, n))
        rho = float(np.max(np.abs(symm_eig(M).D)))
    else:
        X = sample_grid(K, grid)
        rho = float(np.max(np.abs(np.linalg.eigvalsh(g.hessian(X)))))
    L = 0.5 * rho
    h = g + L * Polynomial.norm_squared(n) if L > 0 else g
    return h, L


def smooth_is_convex(h: Polynomial, K: ConvexBody, grid: GridSpec, tol: float = 1e-9) -> bool:
    return hessian_min_eig_on(h, K, grid) >= -tol
