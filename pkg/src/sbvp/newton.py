"""Damped Newton iteration with backtracking on the residual norm."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConfigurationError, LinearAlgebraError, NonConvergenceError

log = logging.getLogger(__name__)

#: pivots below this fraction of ||J|| are treated as singular
PIVOT_RTOL = 1e-14


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-10
    max_iter: int = 50
    fd_epsilon: float = 1e-7
    central: bool = False
    lambda0: float = 1.0
    reduction: float = 0.5
    lambda_min: float = 1.0 / 1024
    #: on convergence, apply one simplified correction with the last factorization
    final_correction: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ConfigurationError("tol must be positive")
        if not 0 < self.lambda_min <= 1:
            raise ConfigurationError("lambda_min must lie in (0, 1]")
        if not 0 < self.reduction < 1:
            raise ConfigurationError("reduction must lie in (0, 1)")
        if self.fd_epsilon <= 0:
            raise ConfigurationError("fd_epsilon must be positive")


@dataclass
class NewtonResult:
    x: np.ndarray
    iterations: int
    residual: float
    trace: list = field(default_factory=list)


def norm(v):
    return float(np.max(np.abs(v))) if v.size else 0.0


def lu_factor_checked(J):
    """LU factors of ``J`` with partial pivoting, rejecting tiny pivots."""
    with warnings.catch_warnings():
        # exact zero pivots are reported below as LinearAlgebraError
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(J, check_finite=True)
    scale = np.linalg.norm(J, ord=np.inf)
    pivots = np.abs(np.diag(lu))
    if scale == 0 or pivots.min() < PIVOT_RTOL * scale:
        raise LinearAlgebraError(
            f"singular Jacobian (min pivot {pivots.min():.3e}, ||J|| {scale:.3e})"
        )
    return lu, piv


def lu_solve_checked(J, rhs):
    """Solve ``J x = rhs`` by LU with partial pivoting, rejecting tiny pivots."""
    return scipy.linalg.lu_solve(lu_factor_checked(J), rhs)


def fd_jacobian_dense(F, x, fx=None, eps=1e-7, central=False):
    """Forward (or central) difference Jacobian, ``eps_k = eps (1 + |x_k|)``."""
    x = np.asarray(x, dtype=float)
    fx = F(x) if fx is None else fx
    J = np.empty((fx.size, x.size))
    for k in range(x.size):
        hk = eps * (1.0 + abs(x[k]))
        xp = x.copy()
        xp[k] += hk
        if central:
            xm = x.copy()
            xm[k] -= hk
            J[:, k] = (F(xp) - F(xm)) / (2 * hk)
        else:
            J[:, k] = (F(xp) - fx) / hk
    return J


def damped_newton(F, x0, cfg=NewtonConfig(), jacobian=None):
    """Solve ``F(x) = 0`` by ``x <- x - lam J^{-1} F(x)``.

    ``jacobian(x, fx)`` defaults to a dense finite-difference Jacobian.  The
    step length starts at ``cfg.lambda0`` and is multiplied by
    ``cfg.reduction`` while ``||F(x_new)|| > (1 - lam/2) ||F(x)||``; at
    ``cfg.lambda_min`` the step is taken regardless.
    """
    if jacobian is None:
        def jacobian(x, fx):
            return fd_jacobian_dense(F, x, fx, cfg.fd_epsilon, cfg.central)

    x = np.array(x0, dtype=float)
    fx = F(x)
    r = norm(fx)
    best, best_r = x.copy(), r
    trace = [(0, r, 0.0)]
    factors = None
    for it in range(cfg.max_iter + 1):
        if r <= cfg.tol:
            if cfg.final_correction and factors is not None:
                x_bar = x - scipy.linalg.lu_solve(factors, fx)
                f_bar = F(x_bar)
                if norm(f_bar) <= r:
                    x, r = x_bar, norm(f_bar)
            return NewtonResult(x, it, r, trace)
        if it == cfg.max_iter:
            break
        factors = lu_factor_checked(jacobian(x, fx))
        dx = scipy.linalg.lu_solve(factors, fx)
        lam = cfg.lambda0
        while True:
            x_new = x - lam * dx
            f_new = F(x_new)
            r_new = norm(f_new)
            if r_new <= (1 - lam / 2) * r or lam <= cfg.lambda_min:
                break
            lam = max(lam * cfg.reduction, cfg.lambda_min)
        x, fx, r = x_new, f_new, r_new
        trace.append((it + 1, r, lam))
        log.debug("newton it=%d |F|=%.3e lambda=%.4g", it + 1, r, lam)
        if r < best_r:
            best, best_r = x.copy(), r
    raise NonConvergenceError(
        f"no convergence in {cfg.max_iter} iterations (|F|={best_r:.3e})",
        best=best, residual=best_r, iterations=cfg.max_iter,
    )
