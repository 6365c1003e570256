"""Compass (coordinate pattern) search used to polish lattice maximizers."""

from __future__ import annotations

import numpy as np


def compass_maximize(objective, z0, step, min_step=1e-6, max_iter=200, rel_gain=1e-12):
    """Maximize ``objective`` from ``z0`` by +-step moves along each coordinate.

    ``objective`` maps a (k, d) batch to k values, returning ``-inf`` for
    infeasible rows.  A move is accepted only if it beats the incumbent by
    ``rel_gain * (1 + |best|)``; this keeps roundoff-level differences between
    two nearly identical objectives from sending the search down different
    paths.  The step halves whenever no move is accepted; the search stops once
    every step is below ``min_step`` or after ``max_iter`` rounds.
    """
    z = np.array(z0, dtype=float)
    step = np.broadcast_to(np.asarray(step, dtype=float), z.shape).copy()
    best = float(objective(z[None, :])[0])
    moves = np.vstack([np.diag(step), -np.diag(step)])
    for _ in range(max_iter):
        if np.all(step < min_step):
            break
        cand = z + moves
        vals = np.asarray(objective(cand), dtype=float)
        k = int(np.argmax(vals))
        if vals[k] > best + rel_gain * (1.0 + abs(best)):
            z, best = cand[k], float(vals[k])
        else:
            step /= 2
            moves = np.vstack([np.diag(step), -np.diag(step)])
    return z, best
