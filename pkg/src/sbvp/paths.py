"""Seeded Wiener sample paths tabulated on a fixed base mesh.

Every realization is a pure function of ``(seed, realization_index)``.
The per-realization stream is a PCG64 generator keyed by
``SeedSequence(seed, spawn_key=(realization_index,))``, so ensembles can be
generated in any order or in parallel and still agree bit for bit.
Standard normals come from the inverse normal CDF applied to open-interval
uniforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .errors import MeshError, QueryError

#: absolute tolerance used when matching a query time to a mesh point
TIME_ATOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class BaseMesh:
    """Strictly increasing grid ``0 = t_0 < ... < t_{N-1} = T``."""

    points: np.ndarray

    def __post_init__(self):
        pts = _frozen(self.points)
        if pts.ndim != 1 or pts.size < 2:
            raise MeshError("a mesh needs at least two points")
        if pts[0] != 0.0:
            raise MeshError(f"mesh must start at 0, got {pts[0]!r}")
        if np.any(np.diff(pts) <= 0):
            raise MeshError("mesh points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, n_points, T=1.0):
        return cls(np.linspace(0.0, T, int(n_points)))

    @classmethod
    def nested(cls, switching_points, n_sub):
        """Place ``n_sub`` equal steps inside every switching interval.

        Switching points are copied verbatim so they are exact mesh points.
        """
        tau = np.asarray(switching_points, dtype=float)
        n_sub = int(n_sub)
        if n_sub < 1:
            raise MeshError("need at least one step per switching interval")
        pieces = [tau[:1]]
        for a, b in zip(tau[:-1], tau[1:]):
            inner = a + (b - a) * np.arange(1, n_sub) / n_sub
            pieces.extend([inner, [b]])
        return cls(np.concatenate(pieces))

    @property
    def T(self):
        return float(self.points[-1])

    @property
    def n_points(self):
        return self.points.size

    @property
    def steps(self):
        return np.diff(self.points)

    def __len__(self):
        return self.points.size

    def index_of(self, t):
        """Index of mesh point ``t``; raises :class:`QueryError` otherwise."""
        pts = self.points
        k = int(np.searchsorted(pts, t))
        for j in (k - 1, k):
            if 0 <= j < pts.size and abs(pts[j] - t) <= TIME_ATOL:
                return j
        raise QueryError(f"t={t!r} is not a point of the base mesh")

    def indices_of(self, times):
        return np.array([self.index_of(t) for t in times], dtype=int)

    def contains(self, t):
        try:
            self.index_of(t)
        except QueryError:
            return False
        return True


def path_rng(seed, realization_index, *, stream=0):
    """Generator for one realization; ``stream`` separates auxiliary draws."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(realization_index), int(stream)))
    return np.random.Generator(np.random.PCG64(ss))


def standard_normals(rng, shape):
    """Inverse-CDF normals; uniforms are shifted into the open unit interval."""
    u = rng.random(shape) + 2.0**-54
    return ndtri(u)


@dataclass(frozen=True, eq=False)
class WienerPath:
    """A ``dim``-dimensional Brownian sample path on ``mesh``.

    ``values`` has shape ``(len(mesh), dim)`` and its first row is zero.
    """

    mesh: BaseMesh
    values: np.ndarray
    seed: int | None = None
    realization_index: int | None = None
    increments: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.shape[0] != self.mesh.n_points:
            raise MeshError("path values do not match the mesh length")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        inc = np.diff(vals, axis=0)
        inc.flags.writeable = False
        object.__setattr__(self, "increments", inc)

    @classmethod
    def from_values(cls, mesh, values):
        """Wrap externally supplied values (used for injected test paths)."""
        return cls(mesh, values)

    @property
    def dim(self):
        return self.values.shape[1]

    def value_at(self, t):
        return self.values[self.mesh.index_of(t)].copy()

    def increment(self, t_a, t_b):
        if t_b < t_a:
            raise QueryError("increment requires t_a <= t_b")
        ia, ib = self.mesh.index_of(t_a), self.mesh.index_of(t_b)
        return self.values[ib] - self.values[ia]


def generate_path(seed, realization_index, mesh, dim=1):
    """Simulate ``W`` on ``mesh`` with independent ``N(0, dt I)`` increments."""
    if not isinstance(mesh, BaseMesh):
        mesh = BaseMesh(mesh)
    dim = int(dim)
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = path_rng(seed, realization_index)
    z = standard_normals(rng, (mesh.n_points - 1, dim))
    dw = z * np.sqrt(mesh.steps)[:, None]
    values = np.zeros((mesh.n_points, dim))
    np.cumsum(dw, axis=0, out=values[1:])
    return WienerPath(mesh, values, int(seed), int(realization_index))


def value_at(path, t):
    return path.value_at(t)


def increment(path, t_a, t_b):
    return path.increment(t_a, t_b)
