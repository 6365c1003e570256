"""Total-degree polynomials in the monomial basis.

Coefficients are indexed by multi-indices in graded-lexicographic order:
degree 0 first, then degree 1, ...; inside a degree the exponent tuples are
sorted in decreasing lexicographic order, e.g. for n = 2, m = 2::

    1, x, y, x^2, xy, y^2
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InputError


@lru_cache(maxsize=None)
def multi_indices(n: int, m: int) -> tuple:
    """All exponent tuples of length n with total degree <= m, graded-lex order."""

    def compositions(total, parts):
        if parts == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in compositions(total - first, parts - 1):
                yield (first,) + rest

    out = []
    for d in range(m + 1):
        out.extend(compositions(d, n))
    return tuple(out)


def basis_size(n: int, m: int) -> int:
    return math.comb(n + m, n)


@lru_cache(maxsize=None)
def _index_map(n: int, m: int) -> dict:
    return {a: i for i, a in enumerate(multi_indices(n, m))}


@lru_cache(maxsize=None)
def _parents(n: int, m: int) -> tuple:
    """For each multi-index (after the constant): (parent index, variable)."""
    idx = _index_map(n, m)
    out = [(-1, -1)]
    for a in multi_indices(n, m)[1:]:
        k = next(i for i, e in enumerate(a) if e > 0)
        parent = list(a)
        parent[k] -= 1
        out.append((idx[tuple(parent)], k))
    return tuple(out)


def design_matrix(X, n: int, m: int) -> np.ndarray:
    """Monomial values: column j holds x^alpha_j at each row of X.

    Each monomial is its graded-lex parent times one variable, so the table is
    built by one multiplication per entry.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != n:
        raise InputError(f"point dimension {X.shape[1]} != polynomial dimension {n}")
    out = np.empty((X.shape[0], basis_size(n, m)))
    out[:, 0] = 1.0
    for j, (p, k) in enumerate(_parents(n, m)):
        if j:
            out[:, j] = out[:, p] * X[:, k]
    return out


@dataclass(frozen=True, eq=False)
class Polynomial:
    """A polynomial of total degree <= ``degree`` in ``dimension`` variables."""

    dimension: int
    degree: int
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float).ravel()
        if c.size != basis_size(self.dimension, self.degree):
            raise InputError(
                f"need {basis_size(self.dimension, self.degree)} coefficients, got {c.size}")
        object.__setattr__(self, "coefficients", c)

    # -- construction -----------------------------------------------------

    @classmethod
    def zero(cls, n: int, m: int = 0) -> "Polynomial":
        return cls(n, m, np.zeros(basis_size(n, m)))

    @classmethod
    def constant(cls, n: int, value: float) -> "Polynomial":
        return cls(n, 0, [value])

    @classmethod
    def from_terms(cls, terms: dict, n: int, m: int | None = None) -> "Polynomial":
        """Build from ``{exponent tuple: coefficient}``."""
        if m is None:
            m = max((sum(a) for a in terms), default=0)
        idx = _index_map(n, m)
        c = np.zeros(basis_size(n, m))
        for a, v in terms.items():
            a = tuple(int(e) for e in a)
            if len(a) != n or min(a) < 0:
                raise InputError(f"bad exponent tuple {a} for n = {n}")
            if a not in idx:
                raise InputError(f"exponent {a} exceeds degree bound {m}")
            c[idx[a]] += v
        return cls(n, m, c)

    @classmethod
    def variable(cls, n: int, k: int) -> "Polynomial":
        a = [0] * n
        a[k] = 1
        return cls.from_terms({tuple(a): 1.0}, n, 1)

    @classmethod
    def norm_squared(cls, n: int) -> "Polynomial":
        terms = {}
        for k in range(n):
            a = [0] * n
            a[k] = 2
            terms[tuple(a)] = 1.0
        return cls.from_terms(terms, n, 2)

    # -- inspection -------------------------------------------------------

    def terms(self) -> dict:
        return {a: float(c) for a, c in zip(multi_indices(self.dimension, self.degree),
                                            self.coefficients) if c != 0.0}

    def effective_degree(self, tol: float = 0.0) -> int:
        deg = 0
        for a, c in zip(multi_indices(self.dimension, self.degree), self.coefficients):
            if abs(c) > tol:
                deg = max(deg, sum(a))
        return deg

    def coefficient(self, exponents) -> float:
        a = tuple(exponents)
        if sum(a) > self.degree:
            return 0.0
        return float(self.coefficients[_index_map(self.dimension, self.degree)[a]])

    def with_degree(self, m: int) -> "Polynomial":
        """Same polynomial in the basis of degree bound m (must not truncate)."""
        if m == self.degree:
            return self
        if m < self.effective_degree():
            raise InputError(f"cannot represent degree {self.effective_degree()} with bound {m}")
        return Polynomial.from_terms(self.terms(), self.dimension, m)

    # -- evaluation -------------------------------------------------------

    def __call__(self, X):
        X = np.atleast_1d(np.asarray(X, dtype=float))
        single = X.ndim == 1 and (self.dimension > 1 or X.size == 1)
        if X.ndim == 1 and not single:
            X = X[:, None]
        vals = design_matrix(X if X.ndim == 2 else X[None, :], self.dimension,
                             self.degree) @ self.coefficients
        return float(vals[0]) if single else vals

    # -- arithmetic -------------------------------------------------------

    def _aligned(self, other: "Polynomial"):
        if other.dimension != self.dimension:
            raise InputError("polynomial dimension mismatch")
        m = max(self.degree, other.degree)
        return self.with_degree(m), other.with_degree(m), m

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.dimension, float(other))
        if not isinstance(other, Polynomial):
            return NotImplemented
        a, b, m = self._aligned(other)
        return Polynomial(self.dimension, m, a.coefficients + b.coefficients)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.dimension, self.degree, -self.coefficients)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Polynomial(self.dimension, self.degree, float(other) * self.coefficients)
        if not isinstance(other, Polynomial):
            return NotImplemented
        if other.dimension != self.dimension:
            raise InputError("polynomial dimension mismatch")
        terms: dict = {}
        for a, ca in self.terms().items():
            for b, cb in other.terms().items():
                key = tuple(x + y for x, y in zip(a, b))
                terms[key] = terms.get(key, 0.0) + ca * cb
        return Polynomial.from_terms(terms, self.dimension, self.degree + other.degree)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Polynomial.constant(self.dimension, 1.0)
        for _ in range(int(k)):
            out = out * self
        return out

    def compose_affine(self, A, b) -> "Polynomial":
        """The polynomial x -> p(A x + b)."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        n = self.dimension
        lin = [Polynomial(n, 1, np.concatenate([[b[k]], A[k]])) for k in range(n)]
        out = Polynomial.zero(n, self.degree)
        for a, c in self.terms().items():
            term = Polynomial.constant(n, c)
            for k, e in enumerate(a):
                if e:
                    term = term * lin[k] ** e
            out = out + term
        return out.with_degree(self.degree)

    def partial(self, k: int) -> "Polynomial":
        terms = {}
        for a, c in self.terms().items():
            if a[k]:
                b = list(a)
                b[k] -= 1
                terms[tuple(b)] = terms.get(tuple(b), 0.0) + c * a[k]
        return Polynomial.from_terms(terms, self.dimension, max(self.degree - 1, 0))

    def gradient(self, X) -> np.ndarray:
        """Gradients at the rows of X, shape (N, n)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.stack([self.partial(k)(X) for k in range(self.dimension)], axis=1)

    def hessian(self, X) -> np.ndarray:
        """Hessians at the rows of X, shape (N, n, n)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n = self.dimension
        H = np.empty((X.shape[0], n, n))
        for i in range(n):
            di = self.partial(i)
            for j in range(i, n):
                H[:, i, j] = H[:, j, i] = di.partial(j)(X)
        return H

    # -- serialization ----------------------------------------------------

    def to_json_terms(self) -> list:
        return [{"exponents": list(a), "coefficient": c} for a, c in self.terms().items()]

    @classmethod
    def from_json_terms(cls, items, n: int | None = None) -> "Polynomial":
        if isinstance(items, str):
            items = json.loads(items)
        if n is None:
            if not items:
                raise InputError("cannot infer dimension of an empty term list")
            n = len(items[0]["exponents"])
        return cls.from_terms({tuple(t["exponents"]): float(t["coefficient"]) for t in items}, n)

    def __repr__(self):
        return f"Polynomial(n={self.dimension}, m={self.degree}, {self.terms()})"


# -- quadratic structure ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuadraticParts:
    """p(x) = x^T M x + linear(x)."""

    M: np.ndarray
    linear: Polynomial


def quadratic_parts(p: Polynomial) -> QuadraticParts:
    if p.effective_degree() > 2:
        raise InputError(f"quadratic_parts needs degree <= 2, got {p.effective_degree()}")
    n = p.dimension
    M = np.zeros((n, n))
    lin = {}
    for a, c in p.terms().items():
        if sum(a) <= 1:
            lin[a] = c
            continue
        nz = [i for i, e in enumerate(a) if e]
        if len(nz) == 1:
            M[nz[0], nz[0]] += c
        else:
            i, j = nz
            M[i, j] += 0.5 * c
            M[j, i] += 0.5 * c
    return QuadraticParts(M, Polynomial.from_terms(lin, n, 1))


def quadratic_from_parts(M, linear: Polynomial | None = None) -> Polynomial:
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    S = 0.5 * (M + M.T)
    terms = {}
    for i in range(n):
        for j in range(i, n):
            a = [0] * n
            a[i] += 1
            a[j] += 1
            terms[tuple(a)] = S[i, i] if i == j else 2 * S[i, j]
    q = Polynomial.from_terms(terms, n, 2)
    return q if linear is None else q + linear


@dataclass(frozen=True, eq=False)
class EigenPair:
    """M = O diag(D) O^T with O orthogonal, D sorted descending."""

    O: np.ndarray
    D: np.ndarray


def symm_eig(M, max_sweeps: int = 50) -> EigenPair:
    """Cyclic Jacobi eigendecomposition of a symmetric matrix."""
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError("symm_eig needs a square matrix")
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    V = np.eye(n)
    thresh = 1e-14 * max(np.linalg.norm(A), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                # A <- J^T A J with J the (p, q) rotation
                ap, aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap, aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    d = np.diag(A).copy()
    order = np.argsort(-d, kind="stable")
    d, V = d[order], V[:, order]
    for k in range(n):
        nz = np.flatnonzero(np.abs(V[:, k]) > 1e-12)
        if nz.size and V[nz[0], k] < 0:
            V[:, k] = -V[:, k]
    return EigenPair(V, d)


def hessian_min_eig_on(p: Polynomial, K, grid) -> float:
    """Smallest Hessian eigenvalue over the grid; exact for degree <= 2."""
    if p.effective_degree() <= 2:
        if p.effective_degree() < 2:
            return 0.0
        return float(symm_eig(2 * quadratic_parts(p).M).D[-1])
    from .geometry import sample_grid

    X = sample_grid(K, grid)
    return float(np.min(np.linalg.eigvalsh(p.hessian(X))))


def is_convex_on(p: Polynomial, K, grid, tol: float = 1e-10) -> bool:
    return hessian_min_eig_on(p, K, grid) >= -tol


# -- literal parsing -----------------------------------------------------------


class _Parser:
    """Recursive-descent parser for polynomial literals.

    Grammar::

        expr   := ['+'|'-'] term (('+'|'-') term)*
        term   := factor (('*' | '/' number | implicit) factor)*
        factor := atom ['^' integer]
        atom   := number | variable | '(' expr ')'
    """

    def __init__(self, text: str, names: list[str]):
        self.s = text
        self.i = 0
        self.names = names
        self.n = len(names)

    def error(self, msg):
        raise InputError(f"{msg} at position {self.i} in {self.s!r}")

    def peek(self):
        while self.i < len(self.s) and self.s[self.i].isspace():
            self.i += 1
        return self.s[self.i] if self.i < len(self.s) else ""

    def parse(self) -> Polynomial:
        p = self.expr()
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return p

    def expr(self):
        sign = 1.0
        if self.peek() in "+-" and self.peek():
            sign = -1.0 if self.s[self.i] == "-" else 1.0
            self.i += 1
        p = self.term() * sign
        while self.peek() and self.peek() in "+-":
            op = self.s[self.i]
            self.i += 1
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self):
        p = self.factor()
        while True:
            c = self.peek()
            if c == "*":
                self.i += 1
                p = p * self.factor()
            elif c == "/":
                self.i += 1
                start = self.i
                num = self.number()
                if num == 0:
                    self.i = start
                    self.error("division by zero")
                p = p * (1.0 / num)
            elif c and (c.isalpha() or c == "(" or c.isdigit() or c == "."):
                p = p * self.factor()
            else:
                return p

    def factor(self):
        p = self.atom()
        if self.peek() == "^":
            self.i += 1
            self.peek()
            start = self.i
            while self.i < len(self.s) and self.s[self.i].isdigit():
                self.i += 1
            if start == self.i or (self.i < len(self.s) and self.s[self.i] in ".eE"):
                self.error("expected integer exponent")
            p = p ** int(self.s[start:self.i])
        return p

    def number(self):
        self.peek()
        start = self.i
        while self.i < len(self.s) and (self.s[self.i].isdigit() or self.s[self.i] in ".eE"):
            if self.s[self.i] in "eE":
                if self.i + 1 < len(self.s) and self.s[self.i + 1] in "+-":
                    self.i += 1
            self.i += 1
        try:
            return float(self.s[start:self.i])
        except ValueError:
            self.i = start
            self.error("expected number")

    def atom(self):
        c = self.peek()
        if c == "(":
            self.i += 1
            p = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.i += 1
            return p
        if c.isdigit() or c == ".":
            return Polynomial.constant(self.n, self.number())
        if c.isalpha():
            for k, name in sorted(enumerate(self.names), key=lambda t: -len(t[1])):
                if self.s.startswith(name, self.i):
                    end = self.i + len(name)
                    if end < len(self.s) and self.s[end].isdigit():
                        continue
                    self.i = end
                    return Polynomial.variable(self.n, k)
            self.error("unknown variable")
        self.error("unexpected end of input" if not c else f"unexpected {c!r}")


def variable_names(n: int) -> list[str]:
    return ["x", "y", "z"][:n] if n <= 3 else [f"x{k + 1}" for k in range(n)]


def parse_polynomial(text: str, n: int | None = None) -> Polynomial:
    """Parse literals such as ``"3/2 + x^2 - y^2"`` or ``"x1*x2 - 2 x3^3"``.

    Variables are x, y, z (n <= 3) or x1..xn.  When ``n`` is omitted it is the
    smallest dimension covering the variables used.
    """
    import re

    if n is None:
        idx = [int(k) for k in re.findall(r"x(\d+)", text)]
        if idx:
            n = max(idx)
        else:
            letters = set(re.findall(r"[a-zA-Z]", text))
            if letters - {"x", "y", "z", "e", "E"}:
                bad = sorted(letters - {"x", "y", "z", "e", "E"})[0]
                raise InputError(f"unknown variable {bad!r} in {text!r}")
            n = 3 if "z" in letters else 2 if "y" in letters else 1
    names = variable_names(n)
    if n <= 3 and re.search(r"x\d", text):
        names = [f"x{k + 1}" for k in range(n)]
    return _Parser(text, names).parse()
