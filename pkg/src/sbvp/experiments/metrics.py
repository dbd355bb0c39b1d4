"""Pathwise error measures and convergence-order regression."""

from __future__ import annotations

import numpy as np


def strong_error(numeric, oracle, component=0):
    """Max over the mesh of the pointwise error.

    ``component`` picks one solution component (0-based); ``None`` uses the
    max-norm over all components.
    """
    diff = np.asarray(numeric.states) - np.asarray(oracle.states)
    if component is not None:
        diff = diff[:, component]
    return float(np.max(np.abs(diff)))


def order_fit(pairs):
    """Least-squares slope of ``log2 E`` against ``log2 dtau``.

    Returns ``(q, r)`` where ``r`` is the root-mean-square deviation of the
    data from the fitted line, in log2 units.
    """
    dtau, err = np.asarray(pairs, dtype=float).T
    x, y = np.log2(dtau), np.log2(err)
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)))


def tp2_moments(t, c1=1.0, c2=1.0):
    """Exact mean and second moment of the first component of tp2."""
    t = np.asarray(t, dtype=float)
    q = t * (t - 1)
    return c1 * q / 2, (3 * c1**2 + 4 * c2**2) * q**2 / 12
