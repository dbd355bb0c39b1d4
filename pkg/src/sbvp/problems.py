"""Stratonovich boundary value problems and their boundary conditions.

A problem couples the SDE

    dX = f(X, t) dt + g(X, t) o dW,   X in R^d, W in R^m,

with a multi-point condition ``sum_j A_j X(tau_j) = c``.  ``g`` returns a
``d x m`` matrix whose k-th column multiplies the k-th noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError, ShapeError


@dataclass(frozen=True, eq=False)
class MultiPointBC:
    switching_points: np.ndarray
    matrices: tuple
    rhs: np.ndarray

    def __post_init__(self):
        tau = np.asarray(self.switching_points, dtype=float)
        mats = tuple(np.atleast_2d(np.asarray(a, dtype=float)) for a in self.matrices)
        rhs = np.atleast_1d(np.asarray(self.rhs, dtype=float))
        if tau.size < 2:
            raise ConfigurationError("need at least two switching points")
        if np.any(np.diff(tau) <= 0):
            raise ConfigurationError("switching points must be strictly increasing")
        if len(mats) != tau.size:
            raise ShapeError(f"{len(mats)} matrices for {tau.size} switching points")
        d = rhs.size
        if any(a.shape != (d, d) for a in mats):
            raise ShapeError("every boundary matrix must be d x d")
        object.__setattr__(self, "switching_points", tau)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "rhs", rhs)

    @property
    def n_switching(self):
        return self.switching_points.size

    @property
    def d(self):
        return self.rhs.size


@dataclass(frozen=True, eq=False)
class FunctionalBC:
    """``int_0^T A'(t) X(t) dt = c`` with a d x d density ``A'(t)``."""

    integrand_matrix: Callable
    rhs: np.ndarray


@dataclass(frozen=True, eq=False)
class SbvpProblem:
    d: int
    T: float
    drift: Callable
    diffusion: Callable
    bc: MultiPointBC
    noise_dim: int = 1
    name: str = "custom"
    params: dict = field(default_factory=dict)
    #: suggested stop-loss settings, keys ``alpha``, ``beta``, ``norm``
    monitor_defaults: dict = field(default_factory=dict)

    def __post_init__(self):
        tau = self.bc.switching_points
        if self.bc.d != self.d:
            raise ShapeError("boundary condition dimension differs from d")
        if tau[0] != 0.0 or tau[-1] != self.T:
            raise ConfigurationError("switching points must start at 0 and end at T")


def boundary_residual(bc, states):
    """``sum_j A_j states[j] - c``."""
    if len(states) != bc.n_switching:
        raise ShapeError(f"expected {bc.n_switching} states, got {len(states)}")
    r = -bc.rhs.copy()
    for a, x in zip(bc.matrices, states):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (bc.d,):
            raise ShapeError("state has the wrong dimension")
        r += a @ x
    return r


def trapezoid_weights(points):
    """Composite trapezoid weights on an arbitrary ordered grid."""
    x = np.asarray(points, dtype=float)
    h = np.diff(x)
    w = np.zeros_like(x)
    w[:-1] += h / 2
    w[1:] += h / 2
    return w


def discretize_functional_bc(fbc, switching_points):
    """Turn a functional condition into a multi-point one by the trapezoid rule."""
    tau = np.asarray(switching_points, dtype=float)
    if tau.size < 2:
        raise ConfigurationError("need at least two switching points")
    w = trapezoid_weights(tau)
    mats = [wj * np.atleast_2d(fbc.integrand_matrix(t)) for wj, t in zip(w, tau)]
    return MultiPointBC(tau, mats, fbc.rhs)


def equispaced(n_switching, T=1.0):
    return np.linspace(0.0, T, int(n_switching))


# -- built-in test problems ---------------------------------------------------


def tp1(n_switching=7):
    """Scalar additive noise ``dX = 1 o dW`` with ``int_0^1 X ds = 0``."""
    zero = np.zeros(1)
    one = np.ones((1, 1))

    def drift(x, t):
        return zero

    def diffusion(x, t):
        return one

    fbc = FunctionalBC(lambda t: np.eye(1), np.zeros(1))
    bc = discretize_functional_bc(fbc, equispaced(n_switching))
    return SbvpProblem(
        1, 1.0, drift, diffusion, bc, noise_dim=1, name="tp1",
        params={"n_switching": int(n_switching)},
        monitor_defaults={"alpha": 0.0, "beta": 2.5, "norm": "linf"},
    )


TP2_A = np.array([[0.0, 1.0], [0.0, 0.0]])
TP2_H0 = np.array([[1.0, 0.0], [0.0, 0.0]])
TP2_H1 = np.array([[0.0, 0.0], [1.0, 0.0]])


def tp2(c1=1.0, c2=1.0):
    """Two-point problem for ``X1'' = c1 + c2 W'`` with ``X1(0) = X1(1) = 0``."""
    a = np.array([0.0, c1])
    b = np.array([[0.0], [c2]])

    def drift(x, t):
        return np.array([x[1], c1])

    def diffusion(x, t):
        return b

    bc = MultiPointBC([0.0, 1.0], [TP2_H0, TP2_H1], np.zeros(2))
    return SbvpProblem(
        2, 1.0, drift, diffusion, bc, noise_dim=1, name="tp2",
        params={"c1": float(c1), "c2": float(c2), "A": TP2_A, "a": a, "b": b[:, 0]},
        monitor_defaults={"alpha": 2.0, "beta": 1.5, "norm": "linf"},
    )


TP3_B1 = np.array([[1.0, 1.0], [0.0, 0.0]])
TP3_B2 = np.array([[0.0, 0.0], [0.0, 1.0]])
TP3_H0 = np.array([[1.0, 1.0], [0.0, 0.0]])
TP3_H1 = np.array([[0.0, 0.0], [0.0, 1.0]])


def tp3():
    """Drift-free bilinear system with two independent noises."""
    zero = np.zeros(2)

    def drift(x, t):
        return zero

    def diffusion(x, t):
        return np.array([[x[0] + x[1], 0.0], [0.0, x[1]]])

    bc = MultiPointBC([0.0, 1.0], [TP3_H0, TP3_H1], np.ones(2))
    return SbvpProblem(
        2, 1.0, drift, diffusion, bc, noise_dim=2, name="tp3",
        params={"B1": TP3_B1, "B2": TP3_B2},
        monitor_defaults={"alpha": 1.5, "beta": 2.0, "norm": "comp:2"},
    )


BUILTIN = {"tp1": tp1, "tp2": tp2, "tp3": tp3}


def make_problem(name, **params):
    try:
        factory = BUILTIN[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown problem {name!r}; choose from {sorted(BUILTIN)}"
        ) from None
    return factory(**params)
