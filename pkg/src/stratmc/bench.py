"""Replication harness: sample variance, variance order and efficiency per sampler and size."""
import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .chain_sim import mc_run, run
from .errors import ConfigurationError
from .finance import ASIAN, EUROPEAN, asian_defaults, discounted_payoff, european_defaults, model_for
from .integration import Subgraph, estimate
from .rng import SeededStream
from .sampling import SAMPLERS, integer_root, sample

log = logging.getLogger(__name__)

INTEGRATION = "integration"
EXPERIMENTS = (EUROPEAN, ASIAN, INTEGRATION)

CELL_COLUMNS = ("experiment", "sampler", "N", "R", "mean", "variance", "cpu_seconds", "efficiency")
ORDER_COLUMNS = ("experiment", "sampler", "order", "intercept")

DESK_SCHEDULES = {
    EUROPEAN: tuple(n ** 2 for n in (16, 32, 64, 128, 256)),
    ASIAN: tuple((5 * m) ** 3 for m in range(1, 9)),
    INTEGRATION: tuple(n ** 2 for n in (16, 32, 64, 128, 256)),
}
FULL_SCHEDULES = {
    EUROPEAN: (10 ** 2,) + tuple((50 * k) ** 2 for k in range(1, 21)),
    ASIAN: tuple((5 * m) ** 3 for m in range(1, 21)),
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    schedule: tuple
    samplers: tuple = SAMPLERS
    reps: int = 100
    seed: int = 0
    params: object = None
    option: object = None
    jobs: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigurationError(f"unknown experiment {self.experiment!r}")
        if self.reps < 2:
            raise ConfigurationError("at least two replications are needed for a sample variance")
        for sampler in self.samplers:
            if sampler not in SAMPLERS:
                raise ConfigurationError(f"unknown sampler {sampler!r}")
        if self.experiment != INTEGRATION and (self.params is None or self.option is None):
            params, option = european_defaults() if self.experiment == EUROPEAN else asian_defaults()
            object.__setattr__(self, "params", self.params or params)
            object.__setattr__(self, "option", self.option or option)

    @property
    def dimension(self):
        """Dimension of the point sets: ``s + d`` for the chains, 2 for the integration test."""
        if self.experiment == EUROPEAN:
            return 2
        if self.experiment == ASIAN:
            return 3
        return 2


@dataclass
class CellResult:
    sampler: str
    N: int
    R: int
    mean: float = math.nan
    variance: float = math.nan
    cpu_seconds: float = math.nan
    efficiency: float = math.nan
    error: str | None = None


@dataclass
class ConvergenceReport:
    experiment: str
    cells: list = field(default_factory=list)
    orders: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def cell(self, sampler, N):
        for c in self.cells:
            if c.sampler == sampler and c.N == N:
                return c
        raise KeyError((sampler, N))

    def series(self, sampler, column):
        rows = [c for c in self.cells if c.sampler == sampler and c.error is None]
        return np.array([c.N for c in rows], dtype=float), np.array([getattr(c, column) for c in rows])

    @property
    def failed(self):
        return any(c.error is not None for c in self.cells)


TRIANGLE = Subgraph(2, lambda u: u[:, 0], variation=1.0)


def check_size(config, sampler, N):
    """Raise :class:`ConfigurationError` if ``N`` is not usable by ``sampler``."""
    if int(N) != N or N < 1:
        raise ConfigurationError(f"N must be a positive integer, got {N}")
    if config.experiment == INTEGRATION:
        if sampler in ("smc", "ss"):
            integer_root(N, 2)
        return
    if sampler != "mc":
        n = integer_root(N, config.dimension)
        if n < 2:
            raise ConfigurationError("chain simulation needs a base n >= 2")


def simulate_once(config, sampler, N, rep):
    """One independent estimate, drawn from the replication stream ``(seed, rep)``."""
    stream = SeededStream(config.seed, (rep,))
    if config.experiment == INTEGRATION:
        return estimate(TRIANGLE, sample(sampler, 2, stream, N=N)).value
    model = model_for(config.params, config.option)
    steps = config.params.P
    if sampler == "mc":
        e = mc_run(model, N, steps, stream)
    else:
        e = run(model, integer_root(N, config.dimension), steps, sampler, stream)
    return discounted_payoff(e, config.option, config.params)


def _replications(config, sampler, N, reps):
    out = []
    for rep in reps:
        t0 = time.thread_time()
        value = simulate_once(config, sampler, N, rep)
        out.append((value, time.thread_time() - t0))
    return out


def efficiency(variance, cpu_seconds):
    """``1 / (variance * cpu_seconds)``; NaN when either factor is not positive."""
    if not (variance > 0 and cpu_seconds > 0):
        return math.nan
    return 1.0 / (variance * cpu_seconds)


def _split(seq, parts):
    size = math.ceil(len(seq) / parts)
    return [seq[i:i + size] for i in range(0, len(seq), size)]


def replicate(config, progress=None):
    report = ConvergenceReport(config.experiment)
    kernels.warmup()
    pool = ProcessPoolExecutor(config.jobs, initializer=kernels.warmup) if config.jobs > 1 else None
    try:
        for sampler in config.samplers:
            for N in config.schedule:
                cell = CellResult(sampler, int(N), config.reps)
                report.cells.append(cell)
                try:
                    check_size(config, sampler, N)
                except ConfigurationError as exc:
                    cell.error = str(exc)
                    log.warning("%s N=%s skipped: %s", sampler, N, exc)
                    continue
                reps = list(range(config.reps))
                if pool is None:
                    results = _replications(config, sampler, N, reps)
                else:
                    chunks = _split(reps, config.jobs)
                    futures = [pool.submit(_replications, config, sampler, N, c) for c in chunks]
                    results = [r for f in futures for r in f.result()]
                values = np.array([v for v, _ in results])
                cell.mean = float(np.mean(values))
                cell.variance = float(np.var(values, ddof=1))
                cell.cpu_seconds = math.fsum(t for _, t in results)
                cell.efficiency = efficiency(cell.variance, cell.cpu_seconds)
                if progress is not None:
                    progress(cell)
    finally:
        if pool is not None:
            pool.shutdown()
    for sampler in config.samplers:
        _flag_increases(report, sampler)
        try:
            report.orders[sampler] = fit_line(*report.series(sampler, "variance"), warnings=report.warnings)
        except ValueError as exc:
            report.warnings.append(f"{sampler}: no order fitted ({exc})")
    return report


def _flag_increases(report, sampler):
    Ns, v = report.series(sampler, "variance")
    for i in range(1, len(v)):
        if v[i - 1] > 0 and v[i] > 3 * v[i - 1]:
            report.warnings.append(f"{sampler}: variance rose more than 3x from N={Ns[i - 1]:.0f} to N={Ns[i]:.0f}")


def fit_line(Ns, values, warnings=None):
    """OLS of ``log2(values)`` on ``log2(Ns)``; returns ``(-slope, intercept)``.

    Non-positive values are dropped (with a warning appended to ``warnings``).
    """
    Ns = np.asarray(Ns, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values > 0
    if not keep.all() and warnings is not None:
        warnings.append(f"excluded {int((~keep).sum())} non-positive value(s) from the fit")
    if keep.sum() < 3:
        raise ValueError("need at least three positive values")
    x = np.log2(Ns[keep])
    y = np.log2(values[keep])
    slope, intercept = np.polyfit(x, y, 1)
    return float(-slope), float(intercept)


def fit_order(report, sampler):
    return fit_line(*report.series(sampler, "variance"), warnings=report.warnings)[0]


def _fmt(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return repr(float(v)) if isinstance(v, float) else str(v)


def emit_csv(report, path):
    """Write the per-cell table to ``path`` and the fitted orders to ``orders.csv`` beside it."""
    path = Path(path)
    orders_path = path.with_name("orders.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CELL_COLUMNS)
        for c in report.cells:
            w.writerow([report.experiment, c.sampler, c.N, c.R, _fmt(c.mean), _fmt(c.variance),
                        _fmt(c.cpu_seconds), _fmt(c.efficiency)])
    with open(orders_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ORDER_COLUMNS)
        for sampler, (order, intercept) in report.orders.items():
            w.writerow([report.experiment, sampler, _fmt(order), _fmt(intercept)])
    return path, orders_path


def read_cells(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
