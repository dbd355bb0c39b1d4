"""Realization-dependent shooting points by drift/diffusion operator splitting.

From the current shooting point both split problems, the drift-only ODE and
the diffusion-only SDE, are restarted at theta and advanced on the base mesh.
The first later base point at which either split solution outgrows its
stop-loss level ``alpha |theta(s)|`` or ``beta |theta(s)|`` becomes the next
shooting point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .integrators import rk3_drift_step, srk_diffusion_step

#: relative floor applied to |theta(s)| in the stop-loss levels
THETA_FLOOR = 1e-12


def parse_norm(spec):
    """``'linf'``, ``'l2'`` or ``'comp:K'`` (1-based component) -> callable."""
    if spec in ("linf", "l-infinity", "inf"):
        return lambda v: float(np.max(np.abs(v)))
    if spec == "l2":
        return lambda v: float(np.sqrt(np.dot(v, v)))
    if isinstance(spec, str) and spec.startswith(("comp:", "component:")):
        k = int(spec.split(":", 1)[1])
        if k < 1:
            raise ConfigurationError("component index is 1-based")
        return lambda v: abs(float(v[k - 1]))
    raise ConfigurationError(f"unknown monitor norm {spec!r}")


@dataclass(frozen=True)
class MonitorSpec:
    """Stop-loss coefficients; a coefficient <= 0 switches that test off."""

    alpha: float
    beta: float
    norm: str = "linf"

    def __post_init__(self):
        if self.alpha <= 0 and self.beta <= 0:
            raise ConfigurationError("at least one of alpha, beta must be positive")
        parse_norm(self.norm)

    @classmethod
    def for_problem(cls, problem, **overrides):
        kw = dict(problem.monitor_defaults)
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kw)


@dataclass(frozen=True, eq=False)
class ShootingMesh:
    """Shooting nodes per switching interval, stored as base-mesh indices."""

    intervals: tuple  # tuple of int arrays, each from tau_i to tau_{i+1}

    @property
    def counts(self):
        """N(i), the number of points in each interval including both ends."""
        return [len(p) for p in self.intervals]

    @property
    def nodes(self):
        """All distinct shooting nodes in order."""
        out = [self.intervals[0][0]]
        for p in self.intervals:
            out.extend(p[1:])
        return np.array(out, dtype=int)

    @property
    def n_nodes(self):
        return sum(len(p) - 1 for p in self.intervals) + 1

    def switching_slots(self):
        """Position of every switching point inside :attr:`nodes`."""
        slots = [0]
        for p in self.intervals:
            slots.append(slots[-1] + len(p) - 1)
        return slots


def _switching_indices(problem, path):
    return path.mesh.indices_of(problem.bc.switching_points)


def select_shooting_points(problem, theta, path, interval_index, monitor,
                           theta_mesh=None):
    """Base-mesh indices of the shooting points in one switching interval."""
    sw = _switching_indices(problem, path)
    start, stop = int(sw[interval_index]), int(sw[interval_index + 1])
    t = path.mesh.points
    dW = path.increments
    if theta_mesh is None:
        theta_mesh = theta.on_mesh(t)
    size = parse_norm(monitor.norm)
    floor = THETA_FLOOR * (1.0 + max(size(a) for a in theta.anchors))
    use_drift, use_diff = monitor.alpha > 0, monitor.beta > 0
    f, g = problem.drift, problem.diffusion

    points = [start]
    cur = start
    while cur < stop:
        x_hat = x_til = theta_mesh[cur]
        nxt = stop
        for n in range(cur, stop - 1):
            h = t[n + 1] - t[n]
            level = max(size(theta_mesh[n + 1]), floor)
            fired = False
            if use_drift:
                x_hat = rk3_drift_step(f, x_hat, t[n], h)
                fired = size(x_hat) >= monitor.alpha * level
            if use_diff:
                x_til = srk_diffusion_step(g, x_til, t[n], dW[n])
                fired = fired or size(x_til) >= monitor.beta * level
            if fired:
                nxt = n + 1
                break
        points.append(nxt)
        cur = nxt
    return np.array(points, dtype=int)


def build_global_mesh(problem, theta, path, monitor):
    theta_mesh = theta.on_mesh(path.mesh.points)
    n_int = problem.bc.n_switching - 1
    return ShootingMesh(tuple(
        select_shooting_points(problem, theta, path, i, monitor, theta_mesh)
        for i in range(n_int)
    ))


def fixed_mesh(problem, mesh, n_interior=0):
    """``n_interior`` equispaced base-mesh nodes inside every switching interval.

    Nodes are rounded to the nearest base point; duplicates collapse, so a
    short interval may receive fewer.
    """
    if n_interior < 0:
        raise ConfigurationError("n_interior must be >= 0")
    sw = mesh.indices_of(problem.bc.switching_points)
    out = []
    for a, b in zip(sw[:-1], sw[1:]):
        idx = np.rint(np.linspace(a, b, n_interior + 2)).astype(int)
        out.append(np.unique(idx))
    return ShootingMesh(tuple(out))
