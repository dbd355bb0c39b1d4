"""Closed-form solutions of the built-in test problems for a given path.

Stochastic and time integrals are trapezoid sums on the path's own mesh,
which is the discretization the numerical solvers see as well.
"""

from __future__ import annotations

import numpy as np

from ..paths import BaseMesh, WienerPath, path_rng, standard_normals
from ..shooting import SolutionPath


def _wrap(path, states, name):
    return SolutionPath(times=path.mesh.points, states=np.asarray(states),
                        method=f"exact-{name}", realization=path.realization_index)


def _midpoints(t):
    return 0.5 * (t[:-1] + t[1:])


def _cumulative(increments):
    out = np.zeros(increments.size + 1)
    np.cumsum(increments, out=out[1:])
    return out


def exact_tp1(path):
    """``X(t) = W(t) - int_0^1 W ds``."""
    t = path.mesh.points
    W = path.values[:, 0]
    mean = np.trapezoid(W, t) / (t[-1] - t[0])
    return _wrap(path, (W - mean)[:, None], "tp1")


def exact_tp2(path, c1=1.0, c2=1.0):
    t = path.mesh.points
    W = path.values[:, 0]
    dW = path.increments[:, 0]
    m = _midpoints(t)
    S = _cumulative(m * dW)  # int_0^t s dW
    R = (S[-1] - S) - (W[-1] - W)  # int_t^1 (s - 1) dW
    x1 = c1 * t * (t - 1) / 2 + c2 * ((t - 1) * S + t * R)
    x2 = c1 * (t - 0.5) + c2 * (S + R)
    return _wrap(path, np.column_stack([x1, x2]), "tp2")


def exact_tp3(path):
    """Integrating-factor solution satisfying ``X1(0) + X2(0) = 1, X2(1) = 1``."""
    t = path.mesh.points
    W1, W2 = path.values[:, 0], path.values[:, 1]
    phi = np.exp(W2 - W1)
    integral = _cumulative(0.5 * (phi[:-1] + phi[1:]) * path.increments[:, 0])
    k = np.exp(-W2[-1])
    x1 = np.exp(W1) * ((1.0 - k) + k * integral)
    x2 = np.exp(W2 - W2[-1])
    return _wrap(path, np.column_stack([x1, x2]), "tp3")


def refine_path(path, factor, stream=1):
    """Brownian-bridge refinement keeping the original values at the old points.

    The extra randomness comes from an auxiliary stream of the same
    ``(seed, realization_index)`` pair, so refinement is deterministic.
    """
    factor = int(factor)
    if factor <= 1:
        return path
    t = path.mesh.points
    fine_t = [t[:1]]
    for a, b in zip(t[:-1], t[1:]):
        fine_t.extend([a + (b - a) * np.arange(1, factor) / factor, [b]])
    fine = BaseMesh(np.concatenate(fine_t))
    seed = 0 if path.seed is None else path.seed
    idx = 0 if path.realization_index is None else path.realization_index
    rng = path_rng(seed, idx, stream=stream)
    n, dim = t.size - 1, path.dim
    z = standard_normals(rng, (n, factor - 1, dim))
    values = np.empty((fine.n_points, dim))
    values[0] = path.values[0]
    for i in range(n):
        a, b = t[i], t[i + 1]
        w_prev, s_prev = path.values[i], a
        for j in range(1, factor):
            s = a + (b - a) * j / factor
            # bridge from (s_prev, w_prev) to (b, W(b))
            mean = w_prev + (s - s_prev) / (b - s_prev) * (path.values[i + 1] - w_prev)
            var = (s - s_prev) * (b - s) / (b - s_prev)
            w_prev = mean + np.sqrt(var) * z[i, j - 1]
            s_prev = s
            values[i * factor + j] = w_prev
        values[(i + 1) * factor] = path.values[i + 1]
    return WienerPath(fine, values, path.seed, path.realization_index)


ORACLES = {
    "tp1": lambda path, problem: exact_tp1(path),
    "tp2": lambda path, problem: exact_tp2(path, problem.params["c1"], problem.params["c2"]),
    "tp3": lambda path, problem: exact_tp3(path),
}


def oracle_for(problem, path, refine=1):
    """Exact solution on ``path.mesh``, optionally computed on a refined bridge."""
    fine = refine_path(path, refine)
    sol = ORACLES[problem.name](fine, problem)
    if fine is not path:
        sol.states = sol.states[::int(refine)]
        sol.times = path.mesh.points
    return sol
