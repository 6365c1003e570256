"""Finite differences and the m-th modulus of smoothness on a convex body."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._search import compass_maximize
from .errors import DegenerateGridError, InputError, PreconditionError
from .geometry import ConvexBody, GridSpec, contains_points, lattice
from .polynomials import Polynomial

FEAS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A real function on R^n given by a vectorized evaluator.

    ``evaluator`` maps an (N, n) array to N values.  ``declared_convex`` is a
    promise by the caller; routines that rely on it spot-check it.
    """

    dimension: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    declared_convex: bool = False
    subgradient: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "f"

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim <= 1:
            X = X.reshape(1, -1) if self.dimension > 1 or X.size == 1 else X.reshape(-1, 1)
            vals = np.asarray(self.evaluator(X), dtype=float)
            return float(vals[0]) if vals.size == 1 else vals
        if X.shape[1] != self.dimension:
            raise InputError(f"point dimension {X.shape[1]} != field dimension {self.dimension}")
        return np.asarray(self.evaluator(X), dtype=float).reshape(X.shape[0])

    @classmethod
    def from_polynomial(cls, p: Polynomial, declared_convex: bool = False, name: str = "p"):
        return cls(p.dimension, p, declared_convex,
                   subgradient=lambda x: p.gradient(np.reshape(x, (1, -1)))[0], name=name)

    def __add__(self, other):
        if isinstance(other, Polynomial):
            other = ScalarField.from_polynomial(other)
        if not isinstance(other, ScalarField):
            return NotImplemented
        if other.dimension != self.dimension:
            raise InputError("field dimension mismatch")
        f, g = self.evaluator, other.evaluator
        return ScalarField(self.dimension, lambda X: f(X) + g(X),
                           self.declared_convex and other.declared_convex,
                           name=f"{self.name}+{other.name}")

    def scaled(self, s: float) -> "ScalarField":
        f = self.evaluator
        return ScalarField(self.dimension, lambda X: s * f(X),
                           self.declared_convex and s >= 0, name=f"{s}*{self.name}")

    def composed(self, T) -> "ScalarField":
        """x -> f(T(x)) for an affine map T."""
        f = self.evaluator
        return ScalarField(self.dimension, lambda X: f(T(X)), self.declared_convex,
                           name=self.name)


def midpoint_violation(f: ScalarField, X: np.ndarray, n_pairs: int = 2000, seed: int = 0) -> float:
    """Largest relative violation of f(x) + f(y) >= 2 f((x+y)/2) over sampled pairs."""
    X = np.asarray(X, dtype=float)
    rng = np.random.default_rng(seed)
    i = rng.integers(0, X.shape[0], n_pairs)
    j = rng.integers(0, X.shape[0], n_pairs)
    a, b, mid = f(X[i]), f(X[j]), f(0.5 * (X[i] + X[j]))
    gap = 2 * mid - a - b
    return float(np.max(gap / (1.0 + np.abs(a) + np.abs(b))))


def require_convex(f: ScalarField, X: np.ndarray, tol: float = 1e-9) -> None:
    """Raise unless f is declared convex and passes the midpoint spot-check on X."""
    if not f.declared_convex:
        raise PreconditionError(f"{f.name} is not declared convex")
    v = midpoint_violation(f, X)
    if v > tol:
        raise PreconditionError(f"midpoint convexity spot-check failed by {v:.3g}")


def binomial_weights(m: int) -> np.ndarray:
    return np.array([(-1) ** j * math.comb(m, j) for j in range(m + 1)], dtype=float)


def finite_difference(f: ScalarField, x, h, m: int) -> float:
    """Sum_{j=0..m} (-1)^j C(m, j) f(x + j h), accumulated in order of j."""
    if m < 1:
        raise InputError("difference order must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    h = np.atleast_1d(np.asarray(h, dtype=float))
    nodes = x[None, :] + np.arange(m + 1)[:, None] * h[None, :]
    vals = np.asarray(f(nodes), dtype=float).reshape(m + 1)
    total = 0.0
    for w, v in zip(binomial_weights(m), vals):
        total += w * v
    return total


@dataclass(frozen=True, eq=False)
class ModulusWitness:
    value: float
    x: np.ndarray
    h: np.ndarray
    m: int

    def to_dict(self) -> dict:
        return {"value": self.value, "x": self.x.tolist(), "h": self.h.tolist(), "m": self.m}


def _offsets(kmax: tuple):
    """Nonzero integer vectors in the box |k_d| <= kmax_d, in lexicographic order."""
    for k in itertools.product(*(range(-q, q + 1) for q in kmax)):
        if any(k):
            yield k


def lattice_modulus(f: ScalarField, K: ConvexBody, m: int, grid: GridSpec) -> ModulusWitness:
    """Exact maximum of |Delta_h^m f(x)| over lattice pairs (x, h) with all nodes in K.

    Both h and -h are swept even though |Delta_{-h}^m f(x + m h)| equals
    |Delta_h^m f(x)| in exact arithmetic: the two sums round differently, and
    sweeping both makes the result the exact maximum over every ordered pair.
    Ties go to the lexicographically smallest (x, h).
    """
    if m < 1:
        raise InputError("difference order must be positive")
    lat = lattice(K, grid)
    res = lat.shape
    F = np.full(lat.shape, np.nan)
    pts = lat.points()
    if pts.shape[0]:
        F[lat.mask] = f(pts)
    w = binomial_weights(m)
    n = K.dimension
    best = (-1.0, None, None)
    for k in _offsets(tuple((r - 1) // m for r in res)):
        lo = [max(0, -m * kd) for kd in k]
        hi = [r - max(0, m * kd) for r, kd in zip(res, k)]
        D = None
        for j in range(m + 1):
            sl = tuple(slice(lo[d] + j * k[d], hi[d] + j * k[d]) for d in range(n))
            term = w[j] * F[sl]
            D = term if D is None else D + term
        A = np.abs(D)
        A[np.isnan(A)] = -1.0
        flat = int(np.argmax(A))
        v = float(A.flat[flat])
        if v < 0:
            continue
        idx = np.add(np.unravel_index(flat, A.shape), lo)
        key = (tuple(idx), tuple(k))
        if v > best[0] or (v == best[0] and key < (best[1], best[2])):
            best = (v, key[0], key[1])
    if best[1] is None:
        raise DegenerateGridError(
            f"no feasible (x, h) pair for m = {m} at resolution {grid.resolution}")
    v, idx, k = best
    x = np.array([lat.axes[d][idx[d]] for d in range(n)])
    h = np.array(k, dtype=float) * lat.spacing
    return ModulusWitness(v, x, h, m)


def _nodes_objective(f: ScalarField, K: ConvexBody, m: int):
    n = K.dimension
    w = binomial_weights(m)
    js = np.arange(m + 1)

    def objective(Z):
        X, H = Z[:, :n], Z[:, n:]
        nodes = X[:, None, :] + js[None, :, None] * H[:, None, :]
        flat = nodes.reshape(-1, n)
        ok = contains_points(K, flat, FEAS_TOL).reshape(Z.shape[0], m + 1).all(axis=1)
        out = np.full(Z.shape[0], -np.inf)
        if ok.any():
            vals = f(nodes[ok].reshape(-1, n)).reshape(-1, m + 1)
            out[ok] = np.abs(vals @ w)
        return out

    return objective


def modulus(f: ScalarField, K: ConvexBody, m: int, grid: GridSpec,
            refine: bool = True) -> ModulusWitness:
    """Lower bound for omega_m(f; K) with its maximizing pair (x, h).

    The lattice sweep of :func:`lattice_modulus` is followed, when ``refine``
    is set, by a compass search over the continuous (x, h) started from the
    lattice winner.
    """
    wit = lattice_modulus(f, K, m, grid)
    if not refine:
        return wit
    lat = lattice(K, grid)
    step = np.concatenate([lat.spacing, lat.spacing])
    obj = _nodes_objective(f, K, m)
    z0 = np.concatenate([wit.x, wit.h])
    z, val = compass_maximize(obj, z0, step)
    n = K.dimension
    if val <= wit.value:
        return ModulusWitness(abs(finite_difference(f, wit.x, wit.h, m)), wit.x, wit.h, m)
    return ModulusWitness(val, z[:n], z[n:], m)
