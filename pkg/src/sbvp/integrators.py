"""Explicit one-step schemes for Stratonovich SDEs on the base mesh.

The stochastic Runge-Kutta family used here evaluates ``s`` stages

    eta_i = x + h sum_j a_ij f(eta_j) + sum_j b_ij g(eta_j) dW
    x_new = x + h sum_j alpha_j f(eta_j) + sum_j gamma_j g(eta_j) dW

where ``g(eta) dW`` is the matrix-vector product of the ``d x m`` diffusion
with the ``m`` Wiener increments over the step.  With ``m = 1`` this is the
single-noise scheme; with several noises every column shares the stages.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ShapeError, UnsupportedTableauError


@dataclass(frozen=True, eq=False)
class ButcherTableau:
    A: np.ndarray
    B: np.ndarray
    alpha: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        for name in ("A", "B", "alpha", "gamma"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        s = self.alpha.size
        if self.A.shape != (s, s) or self.B.shape != (s, s) or self.gamma.size != s:
            raise ShapeError("inconsistent tableau dimensions")

    @property
    def stages(self):
        return self.alpha.size

    @property
    def explicit(self):
        return not (np.triu(self.A).any() or np.triu(self.B).any())

    @property
    def nodes(self):
        return self.A.sum(axis=1)


def _exact(rows):
    return [[float(Fraction(v)) for v in row] for row in rows]


R3 = ButcherTableau(
    A=_exact([[0, 0, 0], ["1/2", 0, 0], [0, "3/4", 0]]),
    B=_exact([[0, 0, 0], ["1/2", 0, 0], [0, "3/4", 0]]),
    alpha=_exact([["2/9", "3/9", "4/9"]])[0],
    gamma=_exact([["2/9", "3/9", "4/9"]])[0],
)


def srk_full_step(problem, x, t, h, dW, tableau=R3):
    """One step of an explicit SRK scheme for ``problem``."""
    if not tableau.explicit:
        raise UnsupportedTableauError("only explicit (strictly lower-triangular) tableaus")
    f, g = problem.drift, problem.diffusion
    dW = np.atleast_1d(dW)
    A, B, c = tableau.A, tableau.B, tableau.nodes
    fs, gs = [], []
    for i in range(tableau.stages):
        eta = x
        for j in range(i):
            if A[i, j]:
                eta = eta + (h * A[i, j]) * fs[j]
            if B[i, j]:
                eta = eta + B[i, j] * gs[j]
        ti = t + c[i] * h
        fs.append(f(eta, ti))
        gs.append(g(eta, ti) @ dW)
    out = x
    for j in range(tableau.stages):
        out = out + (h * tableau.alpha[j]) * fs[j] + tableau.gamma[j] * gs[j]
    return out


def r3_step(f, g, x, t, h, dW):
    """Full R3 step written out; equivalent to ``srk_full_step(..., R3)``."""
    k1 = f(x, t)
    l1 = g(x, t) @ dW
    eta = x + (0.5 * h) * k1 + 0.5 * l1
    k2 = f(eta, t + 0.5 * h)
    l2 = g(eta, t + 0.5 * h) @ dW
    eta = x + (0.75 * h) * k2 + 0.75 * l2
    k3 = f(eta, t + 0.75 * h)
    l3 = g(eta, t + 0.75 * h) @ dW
    return x + (h / 9.0) * (2.0 * k1 + 3.0 * k2 + 4.0 * k3) + (2.0 * l1 + 3.0 * l2 + 4.0 * l3) / 9.0


def rk3_drift_step(drift, x, t, h):
    """Deterministic third-order component of R3."""
    k1 = drift(x, t)
    k2 = drift(x + (0.5 * h) * k1, t + 0.5 * h)
    k3 = drift(x + (0.75 * h) * k2, t + 0.75 * h)
    return x + (h / 9.0) * (2.0 * k1 + 3.0 * k2 + 4.0 * k3)


def srk_diffusion_step(diffusion, x, t, dW):
    """Stochastic component of R3; the Wiener increment plays the step size.

    Stage times are frozen at ``t`` because the step length is not known
    to this component.
    """
    dW = np.atleast_1d(dW)
    l1 = diffusion(x, t) @ dW
    l2 = diffusion(x + 0.5 * l1, t) @ dW
    l3 = diffusion(x + 0.75 * l2, t) @ dW
    return x + (2.0 * l1 + 3.0 * l2 + 4.0 * l3) / 9.0


def em_step(problem, x, t, h, dW):
    return x + h * problem.drift(x, t) + problem.diffusion(x, t) @ np.atleast_1d(dW)


METHODS = ("r3", "drift", "diffusion", "em")


def _stepper(problem, method):
    f, g = problem.drift, problem.diffusion
    if method == "r3":
        return lambda x, t, h, dw: r3_step(f, g, x, t, h, dw)
    if method == "drift":
        return lambda x, t, h, dw: rk3_drift_step(f, x, t, h)
    if method == "diffusion":
        return lambda x, t, h, dw: srk_diffusion_step(g, x, t, dw)
    if method == "em":
        return lambda x, t, h, dw: x + h * f(x, t) + g(x, t) @ dw
    raise ValueError(f"unknown stepping method {method!r}; expected one of {METHODS}")


def integrate(problem, x0, path, start, stop, method="r3"):
    """States at base-mesh points ``start..stop`` (indices), first row ``x0``.

    Steps are exactly the base-mesh increments; no sub-stepping.
    """
    step = _stepper(problem, method)
    t = path.mesh.points
    dW = path.increments
    x = np.array(x0, dtype=float)
    out = np.empty((stop - start + 1, x.size))
    out[0] = x
    for n in range(start, stop):
        x = step(x, t[n], t[n + 1] - t[n], dW[n])
        out[n - start + 1] = x
    return out


def propagate(problem, x0, path, start, stop, method="r3"):
    """Like :func:`integrate` but only the final state is returned."""
    step = _stepper(problem, method)
    t = path.mesh.points
    dW = path.increments
    x = np.array(x0, dtype=float)
    for n in range(start, stop):
        x = step(x, t[n], t[n + 1] - t[n], dW[n])
    return x
