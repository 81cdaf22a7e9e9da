"""Deterministic, splittable random streams.

A :class:`SeededStream` is identified by a master seed and a key path. Child
streams extend the key path, so ``SeededStream(7).child(3, 1)`` is the same
sequence on every machine and independent of ``SeededStream(7).child(3, 2)``.
Keys are fed to numpy's ``SeedSequence`` as its spawn key, on top of PCG64.
"""
import numpy as np

_U64 = 2 ** 64


class SeededStream:
    __slots__ = ("seed", "key", "_gen")

    def __init__(self, seed, key=()):
        seed = int(seed)
        if not 0 <= seed < _U64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        key = tuple(int(k) for k in key)
        if any(k < 0 for k in key):
            raise ValueError(f"stream keys must be non-negative, got {key}")
        self.seed = seed
        self.key = key
        self._gen = None

    def __repr__(self):
        return f"SeededStream(seed={self.seed}, key={self.key})"

    def child(self, *key):
        return SeededStream(self.seed, self.key + key)

    @property
    def generator(self):
        if self._gen is None:
            ss = np.random.SeedSequence(self.seed, spawn_key=self.key)
            self._gen = np.random.Generator(np.random.PCG64(ss))
        return self._gen

    def uniform(self, size=None):
        """Draws from [0, 1)."""
        return self.generator.random(size)

    def permutation(self, n):
        """Uniform random permutation of ``0..n-1`` (Fisher-Yates)."""
        return self.generator.permutation(n)

    def permutations(self, count, n):
        """``count`` independent uniform permutations of ``0..n-1``, one per row."""
        base = np.broadcast_to(np.arange(n), (count, n))
        return self.generator.permuted(base, axis=1)


def as_stream(stream_or_seed):
    if isinstance(stream_or_seed, SeededStream):
        return stream_or_seed
    return SeededStream(stream_or_seed)
