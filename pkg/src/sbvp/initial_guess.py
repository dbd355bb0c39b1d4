"""Coarse Euler-Maruyama trajectory at the switching points and its interpolant.

One Euler-Maruyama step is taken per switching interval, so every anchor is
a function of the first one.  Only the d-dimensional boundary equation in
the first anchor is solved; the recursion rows then hold exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InitialGuessError, LinearAlgebraError, NonConvergenceError
from .newton import NewtonConfig, damped_newton, lu_solve_checked, norm
from .problems import boundary_residual

#: a singular boundary map is accepted if the least-squares residual is below this
#: fraction of ``1 + |c|``
LSTSQ_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class ThetaTrajectory:
    switching_points: np.ndarray
    anchors: np.ndarray  # (N_s, d)
    boundary_residual: float = 0.0

    def __call__(self, t):
        return theta_at(self, t)

    def on_mesh(self, times):
        """theta at every entry of ``times``, shape ``(len(times), d)``."""
        times = np.asarray(times, dtype=float)
        return np.column_stack(
            [np.interp(times, self.switching_points, self.anchors[:, k])
             for k in range(self.anchors.shape[1])]
        )


def theta_at(theta, t):
    tau = theta.switching_points
    if not tau[0] <= t <= tau[-1]:
        raise ValueError(f"t={t!r} outside [{tau[0]}, {tau[-1]}]")
    i = int(np.searchsorted(tau, t, side="right")) - 1
    i = min(i, tau.size - 2)
    a, b = tau[i], tau[i + 1]
    if t == a:
        return theta.anchors[i].copy()
    if t == b:
        return theta.anchors[i + 1].copy()
    return ((t - a) * theta.anchors[i + 1] + (b - t) * theta.anchors[i]) / (b - a)


def em_anchors(problem, w_tau, first):
    """Forward Euler-Maruyama over the switching grid from ``first``."""
    tau = problem.bc.switching_points
    out = np.empty((tau.size, problem.d))
    x = np.asarray(first, dtype=float)
    out[0] = x
    for j in range(tau.size - 1):
        x = (x + (tau[j + 1] - tau[j]) * problem.drift(x, tau[j])
             + problem.diffusion(x, tau[j]) @ (w_tau[j + 1] - w_tau[j]))
        out[j + 1] = x
    return out


def solve_coarse_em(problem, path, cfg=NewtonConfig()):
    """Anchors satisfying the coarse recursion and the boundary condition."""
    bc = problem.bc
    w_tau = path.values[path.mesh.indices_of(bc.switching_points)]
    d = problem.d

    def phi(x):
        return boundary_residual(bc, em_anchors(problem, w_tau, x))

    # Unit secant probe: exact for affine maps, so linear problems need one solve.
    r0 = phi(np.zeros(d))
    J = np.column_stack([phi(e) - r0 for e in np.eye(d)])
    scale = 1.0 + norm(bc.rhs)
    try:
        x = -lu_solve_checked(J, r0)
    except LinearAlgebraError:
        x = -np.linalg.lstsq(J, r0, rcond=None)[0]
        res = norm(phi(x))
        if res > LSTSQ_RTOL * scale:
            raise InitialGuessError(
                f"singular boundary map, least-squares residual {res:.3e}", res
            ) from None
        return _finish(problem, w_tau, x, res)
    res = norm(phi(x))
    if res > cfg.tol:
        try:
            sol = damped_newton(phi, x, cfg)
            x, res = sol.x, sol.residual
        except (NonConvergenceError, LinearAlgebraError) as exc:
            best = getattr(exc, "residual", None)
            if best is not None and best <= LSTSQ_RTOL * scale:
                x, res = exc.best, best
            else:
                raise InitialGuessError(f"coarse system not solved: {exc}", best) from exc
    return _finish(problem, w_tau, x, res)


def _finish(problem, w_tau, first, res):
    anchors = em_anchors(problem, w_tau, first)
    anchors.flags.writeable = False
    return ThetaTrajectory(problem.bc.switching_points, anchors, res)
