"""Explicit finite differences for scalar n-th order problems with multi-point data.

The scalar equation

    X^(n) + a_{n-1}(t) X^(n-1) + ... + a_0(t) X = q(t) + sigma W'(t)

is written for ``Y = (X^(n-1), ..., X', X)`` as ``dY + A(t) Y dt = dF`` with
the companion matrix ``A`` and forcing ``F = (sigma W + int q, 0, ..., 0)``.
One forward step per base-mesh interval,

    Y^{j+1} + (h_j A(t_j) - I) Y^j = (sigma dW^j + h_j q(t_j), 0, ..., 0),

plus the ``n`` boundary rows ``sum_j alpha_ij Y_n(tau_j) = c_i`` give a
square block system for every realization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .errors import ConfigurationError, LinearAlgebraError, MeshError, QueryError
from .newton import lu_solve_checked
from .problems import trapezoid_weights
from .shooting import SolutionPath

#: switch from dense LU to a sparse solve above this many unknowns
DENSE_LIMIT = 2000


def _zero(t):
    return 0.0


@dataclass(frozen=True, eq=False)
class LinearOperatorSpec:
    order: int
    coefficients: Sequence[Callable]  # a_0 .. a_{n-1}
    alpha: np.ndarray  # (n, N_s)
    rhs: np.ndarray  # (n,)
    switching_points: np.ndarray
    forcing: Callable = _zero
    noise_scale: float = 1.0

    def __post_init__(self):
        n = int(self.order)
        alpha = np.atleast_2d(np.asarray(self.alpha, dtype=float))
        tau = np.asarray(self.switching_points, dtype=float)
        rhs = np.atleast_1d(np.asarray(self.rhs, dtype=float))
        if n < 1 or len(self.coefficients) != n:
            raise ConfigurationError("need one coefficient function per derivative order")
        if alpha.shape != (n, tau.size) or rhs.shape != (n,):
            raise ConfigurationError("boundary data must have n rows and one column per switching point")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "switching_points", tau)


@dataclass(frozen=True, eq=False)
class CompanionSystem:
    order: int
    matrix: Callable  # t -> (n, n)
    phi: list  # boundary blocks, one (n, n) matrix per switching point
    forcing_row: int = 0


@dataclass(frozen=True, eq=False)
class FdSystem:
    Lambda: np.ndarray
    w: np.ndarray
    order: int
    info: dict = field(default_factory=dict)


def to_first_order(spec):
    n = spec.order
    coeffs = spec.coefficients

    def matrix(t):
        A = np.zeros((n, n))
        A[0, :] = [coeffs[n - 1 - k](t) for k in range(n)]
        A[np.arange(1, n), np.arange(n - 1)] = -1.0
        return A

    last = np.zeros(n)
    last[-1] = 1.0
    phi = [np.outer(spec.alpha[:, j], last) for j in range(spec.switching_points.size)]
    return CompanionSystem(n, matrix, phi)


def assemble_system(spec, mesh, path):
    comp = to_first_order(spec)
    n, N = spec.order, mesh.n_points
    try:
        sw = mesh.indices_of(spec.switching_points)
    except QueryError as exc:
        raise MeshError(f"switching point not on the base mesh: {exc}") from None
    t, h = mesh.points, mesh.steps
    dW = path.increments[:, 0]
    Lam = np.zeros((N * n, N * n))
    w = np.zeros(N * n)
    eye = np.eye(n)
    for j in range(N - 1):
        r = slice(j * n, (j + 1) * n)
        Lam[r, j * n:(j + 1) * n] = h[j] * comp.matrix(t[j]) - eye
        Lam[r, (j + 1) * n:(j + 2) * n] = eye
        w[j * n + comp.forcing_row] = spec.noise_scale * dW[j] + h[j] * spec.forcing(t[j])
    rb = slice((N - 1) * n, N * n)
    for blk, m in zip(comp.phi, sw):
        Lam[rb, m * n:(m + 1) * n] += blk
    w[rb] = spec.rhs
    return FdSystem(Lam, w, n)


def solve_fd(spec, mesh, path):
    """Solve one realization; states are ``(X, X', ..., X^(n-1))`` per mesh point."""
    system = assemble_system(spec, mesh, path)
    if system.Lambda.shape[0] <= DENSE_LIMIT:
        Y = lu_solve_checked(system.Lambda, system.w)
    else:
        Y = scipy.sparse.linalg.spsolve(scipy.sparse.csc_matrix(system.Lambda), system.w)
        if not np.all(np.isfinite(Y)):
            raise LinearAlgebraError("singular finite-difference system")
    Y = Y.reshape(mesh.n_points, spec.order)
    return SolutionPath(
        times=mesh.points, states=Y[:, ::-1].copy(), method="fd",
        realization=path.realization_index,
        residual=float(np.max(np.abs(system.Lambda @ Y.ravel() - system.w))),
    )


def operator_for(problem):
    """Scalar-operator form of the built-in problems that admit one."""
    tau = problem.bc.switching_points
    if problem.name == "tp1":
        w = trapezoid_weights(tau)
        return LinearOperatorSpec(1, [_zero], w[None, :], [0.0], tau)
    if problem.name == "tp2":
        c1, c2 = problem.params["c1"], problem.params["c2"]
        return LinearOperatorSpec(
            2, [_zero, _zero], np.eye(2), [0.0, 0.0], tau,
            forcing=lambda t: c1, noise_scale=c2,
        )
    raise ConfigurationError(f"no finite-difference form for problem {problem.name!r}")
