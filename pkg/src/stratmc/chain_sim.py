"""Parallel simulation of ``N = n**(s+d)`` copies of a Markov chain.

Every step first relabels the ensemble by a nested sort on the successive
state coordinates and then moves each label ``l`` to
``transition(states[select(w'_l)], w''_l)`` where ``w`` is a point set of
dimension ``s + d`` from one of the samplers. Labels are positions in the
``states`` array (lexicographic, last index fastest).

Stream layout for one replication stream ``R``: the initial states come from
``R.child(0)`` and step ``p`` (0-based) from ``R.child(p + 1)``.
"""
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import kernels
from .errors import ConfigurationError
from .rng import as_stream
from .sampling import sample, stratified_count


@dataclass(frozen=True)
class MarkovModel:
    """Vectorized chain ``X_{p+1} = transition(X_p, U_{p+1}, p)``.

    ``initial(stream, N)`` returns an ``(N, state_dim)`` array and
    ``transition(states, u, p)`` maps ``(N, state_dim)`` states and
    ``(N, driver_dim)`` uniforms to the next ``(N, state_dim)`` states.
    """

    state_dim: int
    driver_dim: int
    initial: Callable
    transition: Callable


@dataclass(frozen=True)
class Ensemble:
    states: np.ndarray
    n: int | None
    s: int
    d: int
    step: int = 0

    def __len__(self):
        return self.states.shape[0]


def point_mass(value):
    value = np.atleast_1d(np.asarray(value, dtype=float))

    def initial(stream, N):
        return np.tile(value, (N, 1))

    return initial


def uniform_initial(s):
    def initial(stream, N):
        return as_stream(stream).uniform((N, s))

    return initial


def init_ensemble(model, n, stream):
    N = stratified_count(model.state_dim + model.driver_dim, n, minimum_base=2)
    states = np.asarray(model.initial(as_stream(stream), N), dtype=float).reshape(N, model.state_dim)
    return Ensemble(states, int(n), model.state_dim, model.driver_dim, 0)


def _argsort_rows(keys):
    """Stable argsort along the last axis.

    The unstable default sort is much faster; its result only differs from a
    stable one when keys tie, which is checked for explicitly.
    """
    order = np.argsort(keys, axis=-1)
    ranked = np.take_along_axis(keys, order, axis=-1)
    if np.any(ranked[..., 1:] == ranked[..., :-1]):
        order = np.argsort(keys, axis=-1, kind="stable")
    return order


def nested_order(states, n, d):
    """Permutation putting ``states`` in nested label order.

    Level ``i`` (0-based) sorts each of the ``n**i`` consecutive groups of
    size ``N / n**i`` by coordinate ``i``, ties keeping their prior order.
    """
    N, s = states.shape
    order = _argsort_rows(states[:, 0])
    for i in range(1, s):
        groups = order.reshape(n ** i, -1)
        sub = _argsort_rows(states[groups, i])
        order = np.take_along_axis(groups, sub, axis=1).ravel()
    return order


def relabel(e):
    if e.s == 1:
        # values only: identical to a stable sort
        states = np.sort(e.states[:, 0]).reshape(-1, 1)
    else:
        states = e.states[nested_order(e.states, e.n, e.d)]
    return replace(e, states=states)


def state_selector(u, n, d):
    """1-based multi-index of the state selected by the first ``s`` coordinates ``u``."""
    u = [float(v) for v in u]
    m = [1 + int(np.floor(n * v)) for v in u[:-1]]
    m.append(1 + int(np.floor(n ** (1 + d) * u[-1])))
    return tuple(m)


def selection(points, s, n, d):
    """Flat 0-based positions selected by each row of an ``(N, s + d)`` point array."""
    return kernels.select_index(points, s, n, d)


def step(e, model, sampler, stream):
    s, d, n = e.s, e.d, e.n
    N = len(e)
    if n is None or n ** (s + d) != N:
        raise ConfigurationError(f"ensemble of {N} states is not n**(s+d) for n={n}, s+d={s + d}")
    e = relabel(e)
    w = sample(sampler, s + d, as_stream(stream), n=n, N=N).points
    idx = selection(w, s, n, d)
    states = model.transition(e.states[idx], w[:, s:], e.step)
    return Ensemble(states, n, s, d, e.step + 1)


def run(model, n, steps, sampler, stream):
    stream = as_stream(stream)
    e = init_ensemble(model, n, stream.child(0))
    for p in range(steps):
        e = step(e, model, sampler, stream.child(p + 1))
    return e


def estimate_functional(e, f):
    """Mean of ``f`` over the ensemble; ``f`` maps ``(N, s)`` states to ``N`` values."""
    return float(np.mean(f(e.states)))


def mc_run(model, N, steps, stream, initial_states=None):
    """Plain Monte Carlo: ``N`` independent paths, no sorting, no stratification.

    Initial states come from ``stream.child(0)`` unless given explicitly.
    Drivers come from ``stream.child(1)``, one ``(N, d)`` block per step; path
    ``k`` always consumes row ``k`` of each block.
    """
    if int(N) != N or N < 1:
        raise ConfigurationError(f"path count must be a positive integer, got {N}")
    stream = as_stream(stream)
    s, d = model.state_dim, model.driver_dim
    if initial_states is None:
        states = np.asarray(model.initial(stream.child(0), N), dtype=float).reshape(N, s)
    else:
        states = np.asarray(initial_states, dtype=float).reshape(N, s)
    drivers = stream.child(1)
    for p in range(steps):
        states = model.transition(states, drivers.uniform((N, d)), p)
    return Ensemble(states, None, s, d, steps)
