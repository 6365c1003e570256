"""Witness functions and empirical Whitney ratios E_{m-1} / omega_m."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .approx import best_uniform
from .errors import InputError, NotAWitness
from .geometry import ConvexBody, GridSpec
from .polynomials import Polynomial, multi_indices
from .smoothness import ScalarField, modulus

OMEGA_MIN = 1e-12


@dataclass(frozen=True, eq=False)
class WitnessFunction:
    """A catalog function with its natural body.

    ``expected`` maps a quantity name to ``(value, provenance)``.
    """

    id: str
    field: ScalarField
    natural_body: ConvexBody
    expected: dict = field(default_factory=dict)


def ramp(delta: float, n: int = 1) -> WitnessFunction:
    """max{0, (x_1 - 1 + delta) / delta} on the cube [-1, 1]^n."""
    if not 0 < delta < 1:
        raise InputError(f"ramp needs 0 < delta < 1, got {delta}")

    def ev(X):
        return np.maximum(0.0, (X[:, 0] - 1 + delta) / delta)

    def sub(x):
        g = np.zeros(n)
        if x[0] > 1 - delta:
            g[0] = 1 / delta
        return g

    return WitnessFunction(
        f"ramp[{delta:g}]",
        ScalarField(n, ev, declared_convex=True, subgradient=sub, name=f"ramp[{delta:g}]"),
        ConvexBody.cube(n),
        {"E1": (0.5 - delta / 4, "reference"), "omega2": (1.0, "reference")})


def _xlog2x(t):
    t = np.clip(t, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(t > 0, t * np.log2(np.where(t > 0, t, 1.0)), 0.0)


def entropy_fn(n: int) -> WitnessFunction:
    """1/2 sum_k x_k log2 x_k over the n-simplex conv{0, e_1, ..., e_n}.

    A point x of the body is lifted to barycentric coordinates
    (x_1, ..., x_n, 1 - sum x); 0 log 0 is taken as 0.
    """
    if n < 1:
        raise InputError("entropy_fn needs n >= 1")

    def ev(X):
        last = 1.0 - X.sum(axis=1)
        return 0.5 * (_xlog2x(X).sum(axis=1) + _xlog2x(last))

    return WitnessFunction(
        f"entropy[{n}]", ScalarField(n, ev, declared_convex=True, name=f"entropy[{n}]"),
        ConvexBody.standard_simplex(n),
        {"E1_lower": (0.25 * math.log2(n + 1), "reference"), "omega2_upper": (1.0, "reference")})


def prop18_f() -> WitnessFunction:
    """2 max{1 - y, |x|} on [-1, 1] x [0, 1]."""

    def ev(X):
        return 2 * np.maximum(1 - X[:, 1], np.abs(X[:, 0]))

    return WitnessFunction(
        "prop18", ScalarField(2, ev, declared_convex=True, name="prop18"),
        ConvexBody.box([-1.0, 0.0], [1.0, 1.0]), {"E2": (0.5, "reference")})


def polynomial_witness(p: Polynomial, body: ConvexBody | None = None,
                       name: str | None = None) -> WitnessFunction:
    body = body or ConvexBody.cube(p.dimension)
    label = name or repr(p)
    return WitnessFunction(label, ScalarField.from_polynomial(p, name=label), body)


CATALOG = {
    "ramp": lambda delta=0.5, n=1: ramp(delta, n),
    "entropy": lambda n=1, **_: entropy_fn(n),
    "prop18": lambda **_: prop18_f(),
}


@dataclass(frozen=True)
class WhitneyEstimate:
    function_id: str
    m: int
    E: float
    omega: float
    ratio: float

    def to_dict(self) -> dict:
        return {"function": self.function_id, "m": self.m, "E": self.E,
                "omega": self.omega, "ratio": self.ratio}


def whitney_ratio(w: WitnessFunction, K: ConvexBody | None, m: int, grid: GridSpec,
                  refine: bool = True) -> WhitneyEstimate:
    """E_{m-1}(f; K) / omega_m(f; K) on the grid, a lower bound for w_m(K) up to discretization."""
    if m < 1:
        raise InputError("m must be at least 1")
    K = K or w.natural_body
    om = modulus(w.field, K, m, grid, refine=refine).value
    if om < OMEGA_MIN:
        raise NotAWitness(f"omega_{m} = {om:.3g}: {w.id} is a polynomial of degree < {m} on the grid")
    E = best_uniform(w.field, K, m - 1, grid).error
    return WhitneyEstimate(w.id, m, E, om, E / om)


# -- random fields for the property suites ------------------------------------------


def random_convex_field(rng: np.random.Generator, n: int, hinges: int = 3,
                        name: str = "convex", smooth: bool = False) -> ScalarField:
    """PSD quadratic + linear + hinges max(0, a.x - b) with b > 0 (smooth at 0).

    With ``smooth`` the hinges become softplus terms log(1 + e^{k z}) / k.
    """
    A = rng.normal(size=(n, n))
    M = A @ A.T * rng.uniform(0.1, 1.0) / n
    c = rng.normal(size=n)
    H = rng.normal(size=(hinges, n))
    b = rng.uniform(0.1, 0.9, size=hinges)
    s = rng.uniform(0.5, 2.0, size=hinges)

    k = 8.0

    def hinge(Z):
        return np.logaddexp(0.0, k * Z) / k if smooth else np.maximum(0.0, Z)

    def ev(X):
        q = np.einsum("ij,jk,ik->i", X, M, X)
        return q + X @ c + hinge(X @ H.T - b) @ s

    def sub(x):
        z = H @ np.asarray(x, dtype=float) - b
        slope = 1 / (1 + np.exp(-k * z)) if smooth else (z > 0).astype(float)
        return 2 * M @ np.asarray(x, dtype=float) + c + (s * slope) @ H

    return ScalarField(n, ev, declared_convex=True, subgradient=sub, name=name)


def random_field(rng: np.random.Generator, n: int, name: str = "field") -> ScalarField:
    """A smooth non-polynomial field: random trigonometric and exponential terms."""
    a = rng.normal(size=(3, n))
    ph = rng.uniform(0, 2 * np.pi, size=3)
    amp = rng.normal(size=3)
    e = rng.normal(size=n) * 0.5

    def ev(X):
        return np.sin(X @ a.T + ph) @ amp + np.exp(X @ e)

    return ScalarField(n, ev, name=name)


def random_polynomial(rng: np.random.Generator, n: int, degree: int,
                      scale: float = 1.0) -> Polynomial:
    k = len(multi_indices(n, degree))
    return Polynomial(n, degree, rng.normal(size=k) * scale)
