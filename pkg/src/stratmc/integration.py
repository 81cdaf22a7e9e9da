"""Indicator integrals over the unit hypercube, exact oracles and variance bounds."""
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import PreconditionError
from .sampling import PointSet


@dataclass(frozen=True)
class HyperInterval:
    """Axis-aligned box ``prod [lower_i, upper_i)`` inside the unit cube."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi) or not lo:
            raise PreconditionError("lower and upper must be non-empty and of equal length")
        for a, b in zip(lo, hi):
            if not 0.0 <= a <= b <= 1.0:
                raise PreconditionError(f"invalid side [{a}, {b})")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self):
        return len(self.lower)

    def contains(self, x):
        x = np.asarray(x)
        return np.all((x >= np.array(self.lower)) & (x < np.array(self.upper)), axis=1)


@dataclass(frozen=True)
class Subgraph:
    """``{u : u[axis] < f(u without axis)}``.

    ``f`` is vectorized: it receives an ``(N, s-1)`` array and returns ``N``
    values in ``[0, 1]``. ``variation`` (Hardy-Krause) and ``lipschitz`` are
    optional metadata used by the variance bounds.
    """

    dim: int
    f: Callable
    axis: int = -1
    variation: float | None = None
    lipschitz: float | None = None

    def contains(self, x):
        x = np.asarray(x)
        axis = self.axis % self.dim
        rest = np.delete(x, axis, axis=1)
        return x[:, axis] < self.f(rest)


@dataclass(frozen=True)
class Predicate:
    dim: int
    test: Callable

    def contains(self, x):
        return np.asarray(self.test(np.asarray(x)), dtype=bool)


@dataclass(frozen=True)
class EstimateResult:
    value: float
    points_used: int
    sampler: str


def estimate(domain, ps: PointSet) -> EstimateResult:
    """Fraction of the points of ``ps`` that fall inside ``domain``."""
    if domain.dim != ps.dimension:
        raise PreconditionError(f"domain has dimension {domain.dim}, point set {ps.dimension}")
    inside = domain.contains(ps.points)
    return EstimateResult(float(np.count_nonzero(inside)) / len(ps), len(ps), ps.sampler)


def interval_measure(domain: HyperInterval) -> float:
    return math.prod(b - a for a, b in zip(domain.lower, domain.upper))


def subgraph_measure_oracle(domain: Subgraph, grid: int) -> float:
    """Midpoint rule for the volume under ``f`` on a ``grid**(s-1)`` lattice."""
    if grid < 2:
        raise PreconditionError("grid resolution must be at least 2")
    k = domain.dim - 1
    if k == 0:
        return float(np.clip(domain.f(np.zeros((1, 0))), 0.0, 1.0)[0])
    mid = (np.arange(grid) + 0.5) / grid
    total = 0.0
    count = grid ** k
    # chunk the lattice so high-resolution oracles stay within memory
    chunk = max(1, 2 ** 22 // grid)
    if k == 1:
        lead = np.zeros((1, 0), dtype=np.int64)
    else:
        lead = np.indices((grid,) * (k - 1)).reshape(k - 1, -1).T
    for start in range(0, lead.shape[0], chunk):
        block = lead[start:start + chunk]
        pts = np.empty((block.shape[0] * grid, k))
        pts[:, :k - 1] = np.repeat(mid[block], grid, axis=0)
        pts[:, k - 1] = np.tile(mid, block.shape[0])
        total += math.fsum(np.clip(domain.f(pts), 0.0, 1.0))
    return total / count


def smc_variance_bound(variation, s, N):
    """Upper bound on the variance of the stratified estimator of a subgraph volume."""
    return ((s - 1) / 4.0 * variation + 0.5) * N ** (-1.0 - 1.0 / s)


def ss_variance_bound(lipschitz, s, N):
    """Upper bound on the variance of the Sudoku estimator for a Lipschitz domain."""
    k = lipschitz + 2.0
    return (k / 4.0 + 2.0 * s * k * k) * N ** (-1.0 - 1.0 / s)


def decompose_interval(lower, upper, N):
    """Split a side ``[lower, upper)`` against the grid of ``N`` cells.

    Returns ``(m, n, x_minus, x_plus)`` with ``lower = (m - x_minus - 1)/N`` and
    ``upper = (m + n + x_plus - 1)/N``: ``n`` whole cells starting at cell ``m``
    (1-based), a partial piece of ``x_minus`` cell widths before them and
    ``x_plus`` after. A side lying inside a single cell is encoded as
    ``n = 0, x_minus = length, x_plus = 0``.
    """
    a = lower * N
    b = upper * N
    first = math.ceil(a)
    last = math.floor(b)
    if last >= first:
        return first + 1, last - first, first - a, b - last
    return first, 0, b - a, 0.0


def _side_terms(lower, upper, N):
    _, n, xm, xp = decompose_interval(lower, upper, N)
    pair = n * (n + xm + xp - 1) + (n + xm) * xp + (n + xp) * xm
    length = n + xm + xp
    return pair, length


def lhs_interval_cov_exact(domain: HyperInterval, N: int) -> float:
    """Covariance of the indicators at two distinct points of a Latin hypercube of size ``N``."""
    if N < 3:
        raise PreconditionError("closed form requires N >= 3")
    pos = 1.0
    neg = 1.0
    for a, b in zip(domain.lower, domain.upper):
        pair, length = _side_terms(a, b, N)
        pos *= N * pair
        neg *= (N - 1) * length * length
    return (pos - neg) / (N * N * (N - 1)) ** domain.dim


def lhs_interval_variance_exact(domain: HyperInterval, N: int) -> float:
    lam = interval_measure(domain)
    return lam * (1.0 - lam) / N + (N - 1) / N * lhs_interval_cov_exact(domain, N)
