"""Convex bodies: membership, lattice sampling and ball-sandwich positioning.

A body is one of four shapes (ball, box, simplex, V-polytope).  Every
non-ball shape also carries an H-representation with unit normals, which is
what membership and positioning work with.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from .errors import DegenerateBodyError, DegenerateGridError, InputError

SHAPES = ("ball", "box", "simplex", "polytope")

# absorbs last-bit roundoff of lattice coordinates sitting on the boundary
_ROUNDOFF = 1e-12
_SYM_TOL = 1e-12
_INRADIUS_MIN = 1e-8


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """A compact convex body in R^n.

    Use the constructors (:meth:`ball`, :meth:`box`, :meth:`simplex`,
    :meth:`polytope`) rather than calling the class directly.
    """

    kind: str
    dimension: int
    center: np.ndarray | None = None
    radius: float | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    vertices: np.ndarray | None = None
    symmetric: bool = False
    normals: np.ndarray | None = field(default=None, repr=False)
    offsets: np.ndarray | None = field(default=None, repr=False)

    # -- constructors -----------------------------------------------------

    @classmethod
    def ball(cls, center, radius=1.0) -> "ConvexBody":
        c = np.atleast_1d(np.asarray(center, dtype=float))
        if c.ndim != 1:
            raise InputError("ball center must be a point")
        if not radius > 0:
            raise DegenerateBodyError(f"ball radius must be positive, got {radius}")
        sym = bool(np.max(np.abs(c)) <= _SYM_TOL)
        return cls("ball", c.size, center=c, radius=float(radius), symmetric=sym)

    @classmethod
    def unit_ball(cls, n: int) -> "ConvexBody":
        return cls.ball(np.zeros(n), 1.0)

    @classmethod
    def box(cls, lower, upper) -> "ConvexBody":
        lo = np.atleast_1d(np.asarray(lower, dtype=float))
        hi = np.atleast_1d(np.asarray(upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise InputError("box bounds must be points of equal dimension")
        if np.any(hi <= lo):
            raise DegenerateBodyError("box needs lower < upper componentwise")
        n = lo.size
        A = np.vstack([np.eye(n), -np.eye(n)])
        b = np.concatenate([hi, -lo])
        sym = bool(np.max(np.abs(lo + hi)) <= _SYM_TOL)
        return cls("box", n, lower=lo, upper=hi, symmetric=sym, normals=A, offsets=b)

    @classmethod
    def cube(cls, n: int, half: float = 1.0) -> "ConvexBody":
        return cls.box(-half * np.ones(n), half * np.ones(n))

    @classmethod
    def simplex(cls, vertices) -> "ConvexBody":
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[0] != V.shape[1] + 1:
            raise InputError("a simplex in R^n needs n+1 vertices")
        n = V.shape[1]
        E = (V[1:] - V[0]).T
        sv = np.linalg.svd(E, compute_uv=False)
        if sv[-1] <= 1e-10 * max(1.0, sv[0]):
            raise DegenerateBodyError("simplex vertices are affinely dependent")
        W = np.linalg.inv(E)  # rows: gradients of barycentric coords 1..n
        c = -W @ V[0]
        W = np.vstack([-W.sum(axis=0), W])
        c = np.concatenate([[1.0 - c.sum()], c])
        # lambda_i(x) = W_i.x + c_i >= 0  <=>  -W_i.x <= c_i
        norms = np.linalg.norm(W, axis=1)
        A = -W / norms[:, None]
        b = c / norms
        return cls("simplex", n, vertices=V, symmetric=_closed_under_negation(V),
                   normals=A, offsets=b)

    @classmethod
    def standard_simplex(cls, n: int, scale: float = 1.0) -> "ConvexBody":
        """conv{0, s*e_1, ..., s*e_n}."""
        return cls.simplex(np.vstack([np.zeros(n), scale * np.eye(n)]))

    @classmethod
    def polytope(cls, vertices) -> "ConvexBody":
        P = np.asarray(vertices, dtype=float)
        if P.ndim != 2 or P.shape[0] < 2:
            raise InputError("polytope needs a list of points")
        n = P.shape[1]
        if n == 1:
            lo, hi = P.min(), P.max()
            if hi - lo <= _INRADIUS_MIN:
                raise DegenerateBodyError("interval has empty interior")
            V = np.array([[lo], [hi]])
            A = np.array([[1.0], [-1.0]])
            b = np.array([hi, -lo])
        else:
            centered = P - P.mean(axis=0)
            sv = np.linalg.svd(centered, compute_uv=False)
            if sv.size < n or sv[n - 1] <= 1e-10 * max(1.0, sv[0]):
                raise DegenerateBodyError("polytope vertices span a lower-dimensional set")
            hull = ConvexHull(P)
            V = P[np.sort(hull.vertices)]
            V = V[np.lexsort(V.T[::-1])]
            A = hull.equations[:, :-1]
            b = -hull.equations[:, -1]
        return cls("polytope", n, vertices=V, symmetric=_closed_under_negation(V),
                   normals=A, offsets=b)

    @classmethod
    def cross_polytope(cls, n: int, radius: float = 1.0) -> "ConvexBody":
        I = radius * np.eye(n)
        return cls.polytope(np.vstack([I, -I]))

    # -- queries ----------------------------------------------------------

    def extreme_points(self) -> np.ndarray | None:
        """Vertices of a polyhedral body; ``None`` for a ball."""
        if self.kind == "ball":
            return None
        if self.kind == "box":
            corners = itertools.product(*zip(self.lower, self.upper))
            return np.array(list(corners), dtype=float)
        return self.vertices

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "ball":
            return self.center - self.radius, self.center + self.radius
        if self.kind == "box":
            return self.lower.copy(), self.upper.copy()
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def support(self, u) -> float:
        """Support function h_K(u) = max_{x in K} <x, u>."""
        u = np.asarray(u, dtype=float)
        if self.kind == "ball":
            return float(self.center @ u + self.radius * np.linalg.norm(u))
        return float(np.max(self.extreme_points() @ u))

    def _scale(self) -> float:
        lo, hi = self.bounding_box()
        return max(1.0, float(np.max(np.abs(np.concatenate([lo, hi])))))

    def to_dict(self) -> dict:
        if self.kind == "ball":
            return {"shape": "ball", "center": self.center.tolist(), "radius": self.radius}
        if self.kind == "box":
            return {"shape": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}
        return {"shape": self.kind, "vertices": self.vertices.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ConvexBody":
        shape = d.get("shape")
        try:
            if shape == "ball":
                return cls.ball(d["center"], d.get("radius", 1.0))
            if shape == "box":
                return cls.box(d["lower"], d["upper"])
            if shape == "simplex":
                return cls.simplex(d["vertices"])
            if shape == "polytope":
                return cls.polytope(d["vertices"])
        except KeyError as exc:
            raise InputError(f"body descriptor missing field {exc}") from None
        raise InputError(f"unknown shape {shape!r}; expected one of {SHAPES}")


def _closed_under_negation(V: np.ndarray) -> bool:
    for v in V:
        if np.min(np.linalg.norm(V + v, axis=1)) > _SYM_TOL:
            return False
    return True


def _as_points(body: ConvexBody, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :] if body.dimension > 1 or X.size == 1 else X[:, None]
    if X.shape[-1] != body.dimension:
        raise InputError(f"point dimension {X.shape[-1]} != body dimension {body.dimension}")
    return X


def contains_points(body: ConvexBody, X, tol: float = 0.0) -> np.ndarray:
    """Vectorized membership of the rows of ``X`` in K inflated by ``tol``.

    Ball and box use the exact Euclidean distance; simplex and polytope use
    the unit-normal half-space test, i.e. every facet is pushed out by ``tol``.
    """
    X = _as_points(body, X)
    eps = tol + _ROUNDOFF * body._scale()
    if body.kind == "ball":
        return np.linalg.norm(X - body.center, axis=1) <= body.radius + eps
    if body.kind == "box":
        clipped = np.clip(X, body.lower, body.upper)
        return np.linalg.norm(X - clipped, axis=1) <= eps
    slack = X @ body.normals.T - body.offsets
    return np.all(slack <= eps, axis=1)


def contains(body: ConvexBody, x, tol: float = 0.0) -> bool:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.size != body.dimension:
        raise InputError(f"point dimension {x.size} != body dimension {body.dimension}")
    return bool(contains_points(body, x[None, :], tol)[0])


# -- grids ------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Points per axis: one integer for every axis, or a tuple with one per axis."""

    resolution: int | tuple
    includes_boundary: bool = True

    def __post_init__(self):
        res = self.resolution if isinstance(self.resolution, tuple) else (self.resolution,)
        for r in res:
            if int(r) != r or r < 2:
                raise InputError(f"grid resolution must be integers >= 2, got {self.resolution}")

    def per_axis(self, n: int) -> tuple:
        if isinstance(self.resolution, tuple):
            if len(self.resolution) != n:
                raise InputError(f"resolution {self.resolution} does not match dimension {n}")
            return tuple(int(r) for r in self.resolution)
        return (int(self.resolution),) * n


@dataclass(frozen=True, eq=False)
class Lattice:
    """Axis-aligned lattice over a body's bounding box plus the inside mask."""

    axes: tuple
    mask: np.ndarray

    @property
    def shape(self) -> tuple:
        return self.mask.shape

    @property
    def spacing(self) -> np.ndarray:
        return np.array([a[1] - a[0] if a.size > 1 else 0.0 for a in self.axes])

    def all_points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def points(self) -> np.ndarray:
        return self.all_points()[self.mask.ravel()]


def _axis(lo: float, hi: float, r: int, boundary: bool) -> np.ndarray:
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    i = np.arange(r, dtype=float)
    # integer numerators keep the lattice exactly symmetric about mid
    t = (2 * i - (r - 1)) / (r - 1) if boundary else (2 * i + 1 - r) / r
    return mid + half * t


def lattice(body: ConvexBody, grid: GridSpec) -> Lattice:
    lo, hi = body.bounding_box()
    shape = grid.per_axis(body.dimension)
    axes = tuple(_axis(a, b, r, grid.includes_boundary) for a, b, r in zip(lo, hi, shape))
    lat = Lattice(axes, np.zeros(shape, dtype=bool))
    mask = contains_points(body, lat.all_points(), 0.0).reshape(shape)
    return Lattice(axes, mask)


def sample_grid(body: ConvexBody, grid: GridSpec) -> np.ndarray:
    """Lattice points inside ``body`` as an (N, n) array in lexicographic order."""
    pts = lattice(body, grid).points()
    if pts.shape[0] == 0:
        raise DegenerateGridError(
            f"no lattice point of resolution {grid.resolution} lies inside the body")
    return pts


def sphere_directions(n: int, count: int) -> np.ndarray:
    """Deterministic, roughly uniform unit vectors in R^n."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        t = 2 * np.pi * np.arange(count) / count
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    if n == 3:
        k = np.arange(count) + 0.5
        z = 1 - 2 * k / count
        phi = np.pi * (1 + 5 ** 0.5) * k
        rho = np.sqrt(1 - z * z)
        return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    # higher dimensions: coordinate directions plus a fixed-seed cloud
    rng = np.random.default_rng(12345)
    U = rng.standard_normal((count, n))
    U = np.vstack([np.eye(n), -np.eye(n), U])
    return U / np.linalg.norm(U, axis=1, keepdims=True)


# -- affine maps and positioning ----------------------------------------------


@dataclass(frozen=True, eq=False)
class AffineMap:
    """x -> matrix @ x + offset."""

    matrix: np.ndarray
    offset: np.ndarray

    @classmethod
    def identity(cls, n: int) -> "AffineMap":
        return cls(np.eye(n), np.zeros(n))

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        return X @ self.matrix.T + self.offset

    def inverse(self) -> "AffineMap":
        Ainv = np.linalg.inv(self.matrix)
        return AffineMap(Ainv, -Ainv @ self.offset)

    def then(self, other: "AffineMap") -> "AffineMap":
        """Composition: apply ``self`` first, then ``other``."""
        return AffineMap(other.matrix @ self.matrix, other.matrix @ self.offset + other.offset)

    def scaled(self, s: float) -> "AffineMap":
        return AffineMap(s * self.matrix, s * self.offset)


def transform(body: ConvexBody, T: AffineMap) -> ConvexBody:
    """Image T(K).  A ball only survives under similarities."""
    A = T.matrix
    if abs(np.linalg.det(A)) <= 1e-12:
        raise DegenerateBodyError("positioning map is singular")
    if body.kind == "ball":
        G = A @ A.T
        s2 = G[0, 0]
        if not np.allclose(G, s2 * np.eye(body.dimension), rtol=1e-12, atol=1e-12):
            raise InputError("the image of a ball under a non-similarity is an ellipsoid")
        return ConvexBody.ball(T(body.center), body.radius * math.sqrt(s2))
    if body.kind == "box":
        if np.count_nonzero(A - np.diag(np.diag(A))) == 0:
            a, b = T(body.lower), T(body.upper)
            return ConvexBody.box(np.minimum(a, b), np.maximum(a, b))
        return ConvexBody.polytope(T(body.extreme_points()))
    if body.kind == "simplex":
        return ConvexBody.simplex(T(body.vertices))
    return ConvexBody.polytope(T(body.vertices))


def sandwich_radii(body: ConvexBody) -> tuple[float, float]:
    """(r, R) with r B ⊂ K ⊂ R B about the origin; r < 0 if 0 is outside K."""
    if body.kind == "ball":
        c = float(np.linalg.norm(body.center))
        return body.radius - c, body.radius + c
    inner = float(np.min(body.offsets / np.linalg.norm(body.normals, axis=1)))
    outer = float(np.max(np.linalg.norm(body.extreme_points(), axis=1)))
    return inner, outer


def _regular_simplex(n: int) -> np.ndarray:
    """n+1 vertices of the regular simplex centred at 0 with inradius 1."""
    Z = np.eye(n + 1) - 1.0 / (n + 1)
    U = np.linalg.svd(Z)[0][:, :n]  # orthonormal basis of {sum = 0}
    P = Z @ U
    circum = math.sqrt(n / (n + 1))
    return P * (n / circum)


def _john_map(body: ConvexBody) -> AffineMap:
    """Whitening map of the max-volume inscribed ellipsoid of an H-polytope."""
    import cvxpy as cp

    A, b = body.normals, body.offsets
    n = body.dimension
    B = cp.Variable((n, n), PSD=True)
    d = cp.Variable(n)
    cons = [cp.norm(B @ A[i]) + A[i] @ d <= b[i] for i in range(A.shape[0])]
    prob = cp.Problem(cp.Maximize(cp.log_det(B)), cons)
    for solver in ("CLARABEL", "SCS"):
        try:
            prob.solve(solver=solver)
        except cp.error.SolverError:
            continue
        if prob.status in ("optimal", "optimal_inaccurate"):
            break
    else:
        raise DegenerateBodyError("inscribed-ellipsoid solve failed")
    Bv = 0.5 * (B.value + B.value.T)
    if np.linalg.eigvalsh(Bv)[0] <= _INRADIUS_MIN:
        raise DegenerateBodyError("inscribed ellipsoid is flat")
    Binv = np.linalg.inv(Bv)
    return AffineMap(Binv, -Binv @ d.value)


def canonical_position(body: ConvexBody) -> tuple[AffineMap, float]:
    """Affine map T and lam >= 1 with B ⊂ T(K) ⊂ lam B.

    Ball, box and simplex use their closed-form John ellipsoids; a general
    polytope goes through a log-det solve.  The map is finally rescaled so the
    inner radius about the origin is exactly the unit ball, which makes both
    inclusions hold up to roundoff whatever the solver accuracy was.
    """
    n = body.dimension
    if body.kind == "ball":
        r = body.radius
        return AffineMap(np.eye(n) / r, -body.center / r), 1.0
    if body.kind == "box" or n == 1:
        lo, hi = body.bounding_box()
        s = 2.0 / (hi - lo)
        T = AffineMap(np.diag(s), -s * (hi + lo) / 2)
    elif body.kind == "simplex":
        V = body.vertices
        R = _regular_simplex(n)
        M = (R[1:] - R[0]).T @ np.linalg.inv((V[1:] - V[0]).T)
        T = AffineMap(M, R[0] - M @ V[0])
    else:
        T = _john_map(body)
    inner, outer = sandwich_radii(transform(body, T))
    if inner < _INRADIUS_MIN * max(1.0, outer):
        raise DegenerateBodyError(f"positioned inradius {inner:.3g} is too small")
    T = T.scaled(1.0 / inner)
    inner, outer = sandwich_radii(transform(body, T))
    return T, max(1.0, outer / min(1.0, inner))


def banach_mazur_upper(body: ConvexBody) -> float:
    """Upper bound for d(K): achieved lam, capped by n (or sqrt(n) if K = -K)."""
    _, lam = canonical_position(body)
    n = body.dimension
    cap = math.sqrt(n) if body.symmetric else float(n)
    return min(lam, cap)


def check_sandwich(body: ConvexBody, lam: float, tol: float = 1e-9, directions: int = 256) -> bool:
    """Inner inclusion via support values in sampled directions, outer via extreme norms."""
    U = sphere_directions(body.dimension, directions)
    inner_ok = all(body.support(u) >= 1 - tol for u in U)
    if body.kind == "ball":
        outer = body.radius + float(np.linalg.norm(body.center))
    else:
        outer = float(np.max(np.linalg.norm(body.extreme_points(), axis=1)))
    return inner_ok and outer <= lam + tol
