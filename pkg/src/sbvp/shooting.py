"""Multiple shooting on a (possibly adaptive) mesh of shooting nodes.

Unknowns are the states at every shooting node, stacked in mesh order:
``D = d * (sum_i (N(i) - 1) + 1)``.  The residual has one matching block
per shooting subinterval,

    s_{k+1} - Phi_k(s_k),

where ``Phi_k`` integrates the full SDE on the base mesh with the Wiener
path held fixed, followed by the boundary block ``sum_j A_j s(tau_j) - c``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .adaptive_mesh import ShootingMesh, build_global_mesh, fixed_mesh
from .errors import ConfigurationError, ShapeError
from .initial_guess import solve_coarse_em
from .integrators import integrate, propagate
from .newton import NewtonConfig, damped_newton
from .problems import boundary_residual

log = logging.getLogger(__name__)

MODES = ("adaptive-msm", "fixed-msm", "simple-shooting")


@dataclass(frozen=True, eq=False)
class ShootingVector:
    values: np.ndarray
    d: int

    @classmethod
    def from_blocks(cls, blocks):
        blocks = np.atleast_2d(np.asarray(blocks, dtype=float))
        return cls(blocks.ravel().copy(), blocks.shape[1])

    @property
    def n_nodes(self):
        return self.values.size // self.d

    def block(self, k):
        return self.values[k * self.d:(k + 1) * self.d]

    def offset(self, k):
        return k * self.d

    def blocks(self):
        return self.values.reshape(self.n_nodes, self.d)


@dataclass
class SolutionPath:
    times: np.ndarray
    states: np.ndarray  # (N, d)
    method: str
    realization: int | None = None
    mesh: ShootingMesh | None = None
    iterations: int = 0
    residual: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def n_nodes(self):
        return self.mesh.n_nodes if self.mesh is not None else len(self.times)


class ShootingSystem:
    """Residual and block Jacobian of the shooting equations for one realization."""

    def __init__(self, problem, smesh, path, method="r3"):
        self.problem = problem
        self.smesh = smesh
        self.path = path
        self.method = method
        self.nodes = smesh.nodes
        self.slots = smesh.switching_slots()
        self.d = problem.d
        self.size = self.d * len(self.nodes)
        self._cache = None

    def flow(self, k, x):
        """State at node ``k + 1`` reached from ``x`` at node ``k``."""
        return propagate(self.problem, x, self.path, self.nodes[k], self.nodes[k + 1],
                         self.method)

    def _check(self, s):
        s = np.asarray(s, dtype=float)
        if s.shape != (self.size,):
            raise ShapeError(f"shooting vector has shape {s.shape}, expected ({self.size},)")
        return s

    def residual(self, s):
        s = self._check(s)
        d, K = self.d, len(self.nodes) - 1
        blocks = s.reshape(K + 1, d)
        out = np.empty(self.size)
        flows = np.empty((K, d))
        for k in range(K):
            flows[k] = self.flow(k, blocks[k])
            out[k * d:(k + 1) * d] = blocks[k + 1] - flows[k]
        self._cache = (s.copy(), flows)
        out[K * d:] = boundary_residual(self.problem.bc, blocks[self.slots])
        return out

    def jacobian(self, s, fs=None, fd_epsilon=1e-7, central=False):
        """Finite-difference Jacobian; only the -Gamma blocks are differenced.

        ``fs`` is unused; flows of the last residual call are reused when
        ``s`` matches it.
        """
        del fs
        s = self._check(s)
        d, K = self.d, len(self.nodes) - 1
        blocks = s.reshape(K + 1, d)
        J = np.zeros((self.size, self.size))
        eye = np.eye(d)
        cached = self._cache
        flows = cached[1] if cached is not None and np.array_equal(cached[0], s) else None
        for k in range(K):
            r = slice(k * d, (k + 1) * d)
            base = None if central else (
                flows[k] if flows is not None else self.flow(k, blocks[k])
            )
            for c in range(d):
                hc = fd_epsilon * (1.0 + abs(blocks[k, c]))
                xp = blocks[k].copy()
                xp[c] += hc
                if central:
                    xm = blocks[k].copy()
                    xm[c] -= hc
                    col = (self.flow(k, xp) - self.flow(k, xm)) / (2 * hc)
                else:
                    col = (self.flow(k, xp) - base) / hc
                J[r, k * d + c] = -col
            J[r, (k + 1) * d:(k + 2) * d] = eye
        for a, slot in zip(self.problem.bc.matrices, self.slots):
            J[K * d:, slot * d:(slot + 1) * d] += a
        return J

    def reconstruct(self, s):
        """Re-integrate from every converged node to fill the base mesh."""
        s = self._check(s)
        blocks = s.reshape(-1, self.d)
        states = np.empty((self.path.mesh.n_points, self.d))
        for k in range(len(self.nodes) - 1):
            a, b = self.nodes[k], self.nodes[k + 1]
            states[a:b + 1] = integrate(self.problem, blocks[k], self.path, a, b, self.method)
        states[self.nodes[-1]] = blocks[-1]
        return states


def assemble_residual(problem, smesh, path, s, method="r3"):
    s = s.values if isinstance(s, ShootingVector) else s
    return ShootingSystem(problem, smesh, path, method).residual(s)


def fd_jacobian(problem, smesh, path, s, fd_epsilon=1e-7, central=False, method="r3"):
    s = s.values if isinstance(s, ShootingVector) else s
    return ShootingSystem(problem, smesh, path, method).jacobian(
        s, fd_epsilon=fd_epsilon, central=central)


def make_mesh(problem, path, mode, theta=None, monitor=None, n_interior=0):
    if mode == "adaptive-msm":
        if monitor is None:
            raise ConfigurationError("adaptive mode needs a monitor")
        return build_global_mesh(problem, theta, path, monitor)
    if mode == "fixed-msm":
        return fixed_mesh(problem, path.mesh, n_interior)
    if mode == "simple-shooting":
        return fixed_mesh(problem, path.mesh, 0)
    raise ConfigurationError(f"unknown mode {mode!r}; expected one of {MODES}")


def solve(problem, path, mode="adaptive-msm", monitor=None, cfg=NewtonConfig(),
          n_interior=0, method="r3"):
    """Solve one realization; returns the solution on the base mesh.

    ``method`` selects the stepping scheme used inside the shooting
    intervals (``"r3"`` by default; ``"em"`` gives the classical
    Euler-Maruyama shooting baseline).
    """
    theta = solve_coarse_em(problem, path, cfg)
    smesh = make_mesh(problem, path, mode, theta, monitor, n_interior)
    system = ShootingSystem(problem, smesh, path, method)
    s0 = theta.on_mesh(path.mesh.points[system.nodes]).ravel()
    result = damped_newton(
        system.residual, s0, cfg,
        jacobian=lambda s, fs: system.jacobian(s, fs, cfg.fd_epsilon, cfg.central),
    )
    states = system.reconstruct(result.x)
    return SolutionPath(
        times=path.mesh.points, states=states, method=mode,
        realization=path.realization_index, mesh=smesh,
        iterations=result.iterations, residual=result.residual,
        info={"trace": result.trace, "theta": theta, "shooting_vector": result.x},
    )
