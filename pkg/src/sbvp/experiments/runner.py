"""Ensemble experiments: configuration, error reports and CSV output."""

from __future__ import annotations

import csv
import dataclasses
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..adaptive_mesh import MonitorSpec
from ..errors import ConfigurationError, SbvpError
from ..fdm import operator_for, solve_fd
from ..newton import NewtonConfig
from ..paths import BaseMesh, generate_path
from ..problems import make_problem
from ..shooting import solve
from .metrics import order_fit, strong_error, tp2_moments
from .oracles import oracle_for

log = logging.getLogger(__name__)

METHODS = ("adaptive-msm", "fixed-msm", "simple-shooting", "fd")
RUN_FIELDS = ["problem", "method", "N", "Ns", "Na_mean", "M", "seed", "E_inf", "wall_s"]
SWEEP_FIELDS = ["dtau", "E_inf", "log2_dtau", "log2_E"]
MOMENT_FIELDS = ["t", "mean_numeric", "mean_exact", "second_numeric", "second_exact",
                 "mean_stderr", "second_stderr"]

#: (nominal N, N_s, N_m) rows of the functional-boundary benchmark
SWEEP_ROWS = [(32, 7, 4), (64, 10, 6), (128, 15, 8), (256, 22, 12), (512, 32, 16)]
#: wavelet-collocation errors quoted for comparison only; that method is not implemented
WAVELET_REFERENCE = {4: 0.2058, 16: 0.0997, 64: 0.0075}
#: (N, N_s) rows of the single-realization comparison
COMPARE_ROWS = [(4, 2), (16, 4), (64, 8)]
BASE_SIZES = [32, 64, 128, 256, 512]


class RealizationError(SbvpError):
    def __init__(self, index, cause):
        super().__init__(f"realization {index} failed: {cause}")
        self.index = index
        self.cause = cause


@dataclass
class ExperimentConfig:
    problem: str = "tp1"
    method: str = "adaptive-msm"
    base_n: int | None = None
    switching: int | None = None
    midpoints: int | None = None
    realizations: int = 100
    seed: int = 0
    alpha: float | None = None
    beta: float | None = None
    monitor_norm: str | None = None
    interior: int = 0
    stepper: str = "r3"
    c1: float = 1.0
    c2: float = 1.0
    tol: float = 1e-10
    max_iter: int = 50
    fd_epsilon: float = 1e-7
    central: bool = False
    oracle_refine: int = 1
    full_norm: bool = False
    jobs: int = 1
    timing: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigurationError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.realizations < 1:
            raise ConfigurationError("need at least one realization")

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)


@dataclass
class ErrorReport:
    config: ExperimentConfig
    errors: np.ndarray
    n_nodes: np.ndarray
    iterations: np.ndarray
    N: int
    Ns: int
    wall: float = float("nan")
    traces: dict = field(default_factory=dict)

    @property
    def E_inf(self):
        return float(np.mean(self.errors))

    @property
    def Na_mean(self):
        if self.config.method == "fd":
            return float("nan")
        return float(np.mean(self.n_nodes))


def build_problem(cfg):
    if cfg.problem == "tp1":
        return make_problem("tp1", n_switching=cfg.switching or 7)
    if cfg.problem in ("tp2", "tp3") and cfg.switching not in (None, 2):
        raise ConfigurationError(f"{cfg.problem} is a two-point problem (Ns = 2)")
    if cfg.problem == "tp2":
        return make_problem("tp2", c1=cfg.c1, c2=cfg.c2)
    return make_problem(cfg.problem)


def build_mesh(cfg, problem):
    """Base mesh with ``N_m`` equal steps per switching interval.

    ``N = (N_s - 1) N_m + 1`` must hold when both ``N`` and ``N_m`` are given.
    """
    ns = problem.bc.n_switching
    nm = cfg.midpoints
    if nm is None:
        n = cfg.base_n if cfg.base_n is not None else (4 * (ns - 1) + 1 if ns > 2 else 33)
        if (n - 1) % (ns - 1):
            raise ConfigurationError(f"N={n} is not (Ns-1)*Nm+1 for Ns={ns}; pass --midpoints")
        nm = (n - 1) // (ns - 1)
    elif cfg.base_n is not None and cfg.base_n != (ns - 1) * nm + 1:
        raise ConfigurationError(
            f"inconsistent mesh: N={cfg.base_n} but (Ns-1)*Nm+1={(ns - 1) * nm + 1}")
    return BaseMesh.nested(problem.bc.switching_points, nm)


def build_monitor(cfg, problem):
    if cfg.method != "adaptive-msm":
        return None
    return MonitorSpec.for_problem(problem, alpha=cfg.alpha, beta=cfg.beta,
                                   norm=cfg.monitor_norm)


def newton_config(cfg):
    return NewtonConfig(tol=cfg.tol, max_iter=cfg.max_iter, fd_epsilon=cfg.fd_epsilon,
                        central=cfg.central)


class _Setup:
    def __init__(self, cfg):
        self.cfg = cfg
        self.problem = build_problem(cfg)
        self.mesh = build_mesh(cfg, self.problem)
        self.monitor = build_monitor(cfg, self.problem)
        self.newton = newton_config(cfg)
        self.fd_spec = operator_for(self.problem) if cfg.method == "fd" else None

    def path(self, k):
        return generate_path(self.cfg.seed, k, self.mesh, self.problem.noise_dim)

    def numeric(self, path):
        cfg = self.cfg
        if cfg.method == "fd":
            return solve_fd(self.fd_spec, self.mesh, path)
        return solve(self.problem, path, cfg.method, self.monitor, self.newton,
                     n_interior=cfg.interior, method=cfg.stepper)

    def realization(self, k):
        path = self.path(k)
        try:
            sol = self.numeric(path)
        except SbvpError as exc:
            raise RealizationError(k, exc) from exc
        exact = oracle_for(self.problem, path, self.cfg.oracle_refine)
        comp = None if self.cfg.full_norm else 0
        nodes = sol.n_nodes if self.cfg.method != "fd" else self.mesh.n_points
        trace = sol.info.get("trace", [])
        return strong_error(sol, exact, comp), nodes, sol.iterations, trace


def _run_chunk(cfg, indices):
    setup = _Setup(cfg)
    return [(k, *setup.realization(k)) for k in indices]


def run(cfg):
    """Solve ``cfg.realizations`` fresh realizations and compare with the oracle."""
    setup = _Setup(cfg)
    M = cfg.realizations
    t0 = time.perf_counter()
    if cfg.jobs > 1 and M > 1:
        chunks = [list(range(j, M, cfg.jobs)) for j in range(cfg.jobs)]
        with ProcessPoolExecutor(cfg.jobs) as pool:
            parts = list(pool.map(_run_chunk, [cfg] * len(chunks), chunks))
        rows = sorted((r for part in parts for r in part), key=lambda r: r[0])
    else:
        rows = [(k, *setup.realization(k)) for k in range(M)]
    wall = time.perf_counter() - t0
    log.info("%s/%s N=%d M=%d done in %.2fs", cfg.problem, cfg.method,
             setup.mesh.n_points, M, wall)
    return ErrorReport(
        config=cfg,
        errors=np.array([r[1] for r in rows]),
        n_nodes=np.array([r[2] for r in rows]),
        iterations=np.array([r[3] for r in rows]),
        N=setup.mesh.n_points, Ns=setup.problem.bc.n_switching,
        wall=wall,
        traces={r[0]: r[4] for r in rows},
    )


def fmt(x):
    """Shortest round-trip repr, the CSV float format."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def run_row(report):
    cfg = report.config
    wall = report.wall if cfg.timing else float("nan")
    return [cfg.problem, cfg.method, report.N, report.Ns, fmt(report.Na_mean),
            cfg.realizations, cfg.seed, fmt(report.E_inf), fmt(wall)]


def write_run_csv(reports, fh):
    w = _writer(fh)
    w.writerow(RUN_FIELDS)
    for rep in reports:
        w.writerow(run_row(rep))


def write_details_csv(report, fh):
    w = _writer(fh)
    w.writerow(["realization", "E", "n_nodes", "iterations"])
    for k, (e, n, it) in enumerate(zip(report.errors, report.n_nodes, report.iterations)):
        w.writerow([k, fmt(e), int(n), int(it)])


def write_trace_csv(report, fh):
    w = _writer(fh)
    w.writerow(["realization", "iteration", "residual", "lambda"])
    for k in sorted(report.traces):
        for it, res, lam in report.traces[k]:
            w.writerow([k, it, fmt(res), fmt(lam)])


# -- sweeps -------------------------------------------------------------------


def sweep_configs(cfg):
    """One config per row of the convergence study for ``cfg.problem``."""
    if cfg.problem == "tp1":
        return [cfg.replace(base_n=None, switching=ns, midpoints=nm) for _, ns, nm in SWEEP_ROWS]
    return [cfg.replace(base_n=n, switching=None, midpoints=None) for n in BASE_SIZES]


def step_size(report):
    """Switching-point spacing when N_s > 2, otherwise the base step."""
    if report.Ns > 2:
        return 1.0 / (report.Ns - 1)
    return 1.0 / (report.N - 1)


def sweep(cfg, configs=None):
    reports = [run(c) for c in (configs or sweep_configs(cfg))]
    pairs = [(step_size(r), r.E_inf) for r in reports]
    q, r = order_fit(pairs)
    return reports, pairs, (q, r)


def write_sweep_csv(pairs, fh):
    w = _writer(fh)
    w.writerow(SWEEP_FIELDS)
    for dtau, e in pairs:
        w.writerow([fmt(dtau), fmt(e), fmt(np.log2(dtau)), fmt(np.log2(e))])


# -- weak moments ---------------------------------------------------------------


MOMENT_TIMES = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)


def moments(cfg, times=MOMENT_TIMES):
    """Pointwise first and second moments of X1 for tp2 versus closed form."""
    if cfg.problem != "tp2":
        raise ConfigurationError("weak moments are available for tp2 only")
    setup = _Setup(cfg)
    idx = setup.mesh.indices_of(times)
    M = cfg.realizations
    samples = np.empty((M, idx.size))
    for k in range(M):
        path = setup.path(k)
        try:
            sol = setup.numeric(path)
        except SbvpError as exc:
            raise RealizationError(k, exc) from exc
        samples[k] = sol.states[idx, 0]
    mean, second = samples.mean(axis=0), (samples**2).mean(axis=0)
    ddof = 1 if M > 1 else 0
    se1 = samples.std(axis=0, ddof=ddof) / np.sqrt(M)
    se2 = (samples**2).std(axis=0, ddof=ddof) / np.sqrt(M)
    ex1, ex2 = tp2_moments(np.asarray(times), cfg.c1, cfg.c2)
    return [dict(zip(MOMENT_FIELDS, row)) for row in
            zip(times, mean, ex1, second, ex2, se1, se2)]


def write_moments_csv(rows, fh):
    w = _writer(fh)
    w.writerow(MOMENT_FIELDS)
    for row in rows:
        w.writerow([fmt(row[k]) for k in MOMENT_FIELDS])


def compare(cfg):
    """Single-realization errors next to the quoted wavelet-collocation values."""
    out = []
    for n, ns in COMPARE_ROWS:
        rep = run(cfg.replace(problem="tp1", base_n=n, switching=ns, midpoints=None,
                              realizations=1))
        out.append({"N": n, "Ns": ns, "wavelet": WAVELET_REFERENCE[n], "E_inf": rep.E_inf})
    return out


def write_compare_csv(rows, fh):
    w = _writer(fh)
    w.writerow(["N", "Ns", "wavelet_collocation", "E_inf"])
    for row in rows:
        w.writerow([row["N"], row["Ns"], fmt(row["wavelet"]), fmt(row["E_inf"])])
