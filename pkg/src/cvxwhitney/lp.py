"""Two-phase revised simplex method for small standard-form linear programs.

    minimize  c @ x   subject to   A @ x = b,  x >= 0

The problems solved here have few rows (at most a few dozen) and many
columns, so each iteration solves with the current basis matrix from the
original data rather than updating a tableau; no roundoff accumulates across
pivots.  Pivoting follows Bland's rule (smallest eligible index enters,
smallest basic index leaves on ratio ties), so the method terminates and the
result is a deterministic function of the input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LPError


@dataclass
class LPResult:
    x: np.ndarray
    y: np.ndarray  # simplex multipliers, B^T y = c_B
    basis: np.ndarray
    objective: float
    iterations: int


def _iterate(A, b, c, basis, ncols, tol, piv_tol, max_iter, it):
    while True:
        B = A[:, basis]
        xB = np.linalg.solve(B, b)
        y = np.linalg.solve(B.T, c[basis])
        d = c[:ncols] - y @ A[:, :ncols]
        d[basis[basis < ncols]] = 0.0
        cand = np.flatnonzero(d < -tol)
        if cand.size == 0:
            return it
        j = int(cand[0])
        u = np.linalg.solve(B, A[:, j])
        rows = np.flatnonzero(u > piv_tol)
        if rows.size == 0:
            raise LPError("linear program is unbounded")
        ratios = np.maximum(xB[rows], 0.0) / u[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-13 * max(1.0, best)]
        r = int(ties[np.argmin(basis[ties])])
        basis[r] = j
        it += 1
        if it > max_iter:
            raise LPError(f"simplex exceeded {max_iter} pivots")


def simplex(c, A, b, tol: float = 1e-11, max_iter: int = 500_000) -> LPResult:
    c = np.asarray(c, dtype=float)
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    m, n = A.shape
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    ascale = max(1.0, float(np.max(np.abs(A))) if A.size else 1.0)
    piv_tol = 1e-10 * ascale

    # phase 1: artificial identity basis
    Aa = np.hstack([A, np.eye(m)])
    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    basis = np.arange(n, n + m)
    it = _iterate(Aa, b, c1, basis, n + m, tol * ascale, piv_tol, max_iter, 0)
    infeas = float(c1[basis] @ np.linalg.solve(Aa[:, basis], b))
    if infeas > 1e-9 * max(1.0, float(np.max(np.abs(b))) if b.size else 1.0):
        raise LPError("linear program is infeasible")

    # pivot zero-level artificials out; a row whose artificial cannot leave is redundant
    keep = np.ones(m, dtype=bool)
    for pos in range(m):
        var = basis[pos]
        if var < n:
            continue
        e = np.zeros(m)
        e[pos] = 1.0
        alpha = np.linalg.solve(Aa[:, basis].T, e) @ A
        alpha[basis[basis < n]] = 0.0
        nz = np.flatnonzero(np.abs(alpha) > 1e-9 * ascale)
        if nz.size:
            basis[pos] = int(nz[0])
        else:
            keep[var - n] = False
    rows = np.flatnonzero(keep)
    basis = basis[basis < n]
    A2, b2 = A[rows], b[rows]

    cscale = max(1.0, float(np.max(np.abs(c))) if c.size else 1.0)
    it = _iterate(A2, b2, c, basis, n, tol * cscale, piv_tol, max_iter, it)

    B = A2[:, basis]
    x = np.zeros(n)
    x[basis] = np.maximum(np.linalg.solve(B, b2), 0.0)
    y = np.zeros(m)
    y[rows] = np.linalg.solve(B.T, c[basis])
    y[neg] *= -1
    return LPResult(x=x, y=y, basis=basis.copy(), objective=float(c @ x), iterations=it)
