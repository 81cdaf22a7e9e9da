"""Point sets in the half-open unit hypercube.

Four samplers are provided:

* ``mc``  -- i.i.d. uniform points,
* ``smc`` -- one uniform point in each of the ``n**s`` subcubes of side ``1/n``,
* ``lhs`` -- Latin hypercube: one coordinate projection in each of the ``N``
  cells of width ``1/N`` on every axis,
* ``ss``  -- Sudoku sampling: both of the above at once, for ``N = n**s``.

Multi-indices are linearized lexicographically with the last index running
fastest. Membership of a coordinate ``x`` in the cell ``[k/m, (k+1)/m)`` is
decided as ``floor(x * m) == k`` in floating point; generated coordinates are
nudged by a few ulps where rounding would otherwise put them in a neighbouring
cell, so every structural guarantee holds exactly under that test.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import ConfigurationError, PreconditionError
from .rng import as_stream

SAMPLERS = ("mc", "smc", "lhs", "ss")
STRATIFIED = ("smc", "ss")
MAX_POINTS = 2 ** 31 - 1


@dataclass(frozen=True)
class PointSet:
    """``N`` points in ``[0, 1)**s`` stored as an ``(N, s)`` float array."""

    points: np.ndarray
    sampler: str
    base: int | None = None

    @property
    def dimension(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def to_csv(self, path):
        s = self.dimension
        header = ",".join(f"x{i + 1}" for i in range(s))
        np.savetxt(path, self.points, fmt="%.17g", delimiter=",", header=header, comments="")


@dataclass(frozen=True)
class SudokuBijections:
    """``s`` bijections ``{1..n}**(s-1) -> {1..n**(s-1)}``.

    ``tables[i, h]`` is the 0-based image of the 0-based lexicographic
    position ``h`` of a multi-index under the bijection of axis ``i``.
    """

    n: int
    s: int
    tables: np.ndarray

    def __call__(self, axis, multi_index):
        """1-based image of a 1-based multi-index of length ``s - 1`` under axis ``axis`` (1-based)."""
        if len(multi_index) != self.s - 1:
            raise PreconditionError(f"expected a multi-index of length {self.s - 1}")
        h = 0
        for li in multi_index:
            if not 1 <= li <= self.n:
                raise PreconditionError(f"index component {li} outside 1..{self.n}")
            h = h * self.n + (li - 1)
        return int(self.tables[axis - 1, h]) + 1


def _check_dim(s):
    if int(s) != s or s < 1:
        raise ConfigurationError(f"dimension must be a positive integer, got {s}")


def _check_count(N):
    if int(N) != N or N < 1:
        raise ConfigurationError(f"point count must be a positive integer, got {N}")
    if N > MAX_POINTS:
        raise ConfigurationError(f"point count {N} exceeds {MAX_POINTS}")


def stratified_count(s, n, minimum_base=1):
    """``n**s`` with validation."""
    _check_dim(s)
    if int(n) != n or n < minimum_base:
        raise ConfigurationError(f"base must be an integer >= {minimum_base}, got {n}")
    N = int(n) ** int(s)
    _check_count(N)
    return N


def integer_root(N, k):
    """Return ``n`` with ``n**k == N`` or raise :class:`ConfigurationError`."""
    if N < 1:
        raise ConfigurationError(f"count must be positive, got {N}")
    guess = int(round(N ** (1.0 / k)))
    for n in (guess - 1, guess, guess + 1):
        if n >= 1 and n ** k == N:
            return n
    raise ConfigurationError(f"N={N} is not a perfect {k}-th power")


@lru_cache(maxsize=64)
def _grid(s, n):
    g = np.indices((n,) * s, dtype=np.int64).reshape(s, -1).T.copy()
    g.setflags(write=False)
    return g


@lru_cache(maxsize=64)
def _hat_positions(s, n):
    """Lexicographic position of each multi-index with axis ``i`` removed, shape ``(s, n**s)``."""
    g = _grid(s, n)
    out = np.zeros((s, g.shape[0]), dtype=np.int64)
    for i in range(s):
        for j in range(s):
            if j != i:
                out[i] = out[i] * n + g[:, j]
    out.setflags(write=False)
    return out


def mc_sample(s, N, stream):
    _check_dim(s)
    _check_count(N)
    stream = as_stream(stream)
    return PointSet(stream.uniform((N, s)), "mc")


def smc_sample(s, n, stream):
    N = stratified_count(s, n)
    stream = as_stream(stream)
    grid = _grid(s, n)
    u = stream.uniform((N, s))
    x = np.empty((N, s))
    for i in range(s):
        x[:, i] = kernels.place(grid[:, i], u[:, i], n)
    return PointSet(x, "smc", n)


def lhs_sample(s, N, stream):
    _check_dim(s)
    _check_count(N)
    stream = as_stream(stream)
    perms = stream.permutations(s, N)
    u = stream.uniform((N, s))
    x = np.empty((N, s))
    for i in range(s):
        x[:, i] = kernels.place(perms[i], u[:, i], N)
    return PointSet(x, "lhs")


def random_bijection(n, s, stream):
    _check_dim(s)
    if int(n) != n or n < 1:
        raise ConfigurationError(f"base must be a positive integer, got {n}")
    size = stratified_count(s - 1, n) if s > 1 else 1
    tables = as_stream(stream).permutations(s, size)
    return SudokuBijections(int(n), int(s), tables)


def sudoku_sample(s, n, stream):
    """Sudoku point set: one point per subcube and one projection per axis cell.

    The bijections are drawn from ``stream.child(0)`` and the in-cell
    uniforms from ``stream.child(1)``. For ``s == 1`` this is a Latin
    hypercube of ``n`` points drawn from ``stream`` itself.
    """
    N = stratified_count(s, n, minimum_base=2)
    stream = as_stream(stream)
    if s == 1:
        ps = lhs_sample(1, N, stream)
        return PointSet(ps.points, "ss", n)
    bij = random_bijection(n, s, stream.child(0))
    u = stream.child(1).uniform((N, s))
    grid = _grid(s, n)
    hats = _hat_positions(s, n)
    block = N // n
    x = np.empty((N, s))
    for i in range(s):
        cell = grid[:, i] * block + bij.tables[i][hats[i]]
        x[:, i] = kernels.place(cell, u[:, i], N, grid[:, i], n)
    return PointSet(x, "ss", n)


def sample(sampler, s, stream, *, n=None, N=None):
    """Dispatch on sampler name. Stratified samplers need ``n``; the others accept either."""
    if sampler not in SAMPLERS:
        raise ConfigurationError(f"unknown sampler {sampler!r}; choose from {SAMPLERS}")
    if sampler in STRATIFIED:
        if n is None:
            if N is None:
                raise ConfigurationError(f"{sampler} needs a base n")
            n = integer_root(N, s)
        elif N is not None and n ** s != N:
            raise ConfigurationError(f"N={N} differs from n**s={n ** s}")
        return smc_sample(s, n, stream) if sampler == "smc" else sudoku_sample(s, n, stream)
    if N is None:
        if n is None:
            raise ConfigurationError(f"{sampler} needs a count N or base n")
        N = stratified_count(s, n)
    return mc_sample(s, N, stream) if sampler == "mc" else lhs_sample(s, N, stream)


# ------------------------------------------------------------ checkers ---

def _cell_indices(x, m):
    return np.floor(x * m).astype(np.int64)


def _exactly_once(idx, m):
    if idx.size and (idx.min() < 0 or idx.max() >= m):
        return False
    return bool(np.all(np.bincount(idx, minlength=m) == 1))


def subcube_occupancy_ok(ps, n):
    """True iff every subcube of side ``1/n`` holds exactly one point."""
    x = np.asarray(ps.points if isinstance(ps, PointSet) else ps)
    s = x.shape[1]
    cube = np.zeros(x.shape[0], dtype=np.int64)
    for i in range(s):
        c = _cell_indices(x[:, i], n)
        if c.min() < 0 or c.max() >= n:
            return False
        cube = cube * n + c
    return _exactly_once(cube, n ** s)


def axis_marginals_ok(ps):
    """True iff on every axis each cell of width ``1/N`` holds exactly one projection."""
    x = np.asarray(ps.points if isinstance(ps, PointSet) else ps)
    N = x.shape[0]
    return all(_exactly_once(_cell_indices(x[:, i], N), N) for i in range(x.shape[1]))


def verify_property_P(ps, n):
    """Check the joint subcube and axis-cell occupancy property of a Sudoku set."""
    x = np.asarray(ps.points if isinstance(ps, PointSet) else ps)
    if x.shape[0] != n ** x.shape[1]:
        raise PreconditionError(f"point set has {x.shape[0]} points, expected n**s = {n ** x.shape[1]}")
    return subcube_occupancy_ok(x, n) and axis_marginals_ok(x)
