"""Counting membership-query and sampling oracles."""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import bits as B
from .boolfn import BooleanFunction, sample_satisfying

MQFn = Callable[[np.ndarray], np.ndarray]
SampFn = Callable[[int], "np.ndarray | None"]


class OracleHandle:
    """Batched MQ and Samp access with call accounting.

    ``mq(X)`` answers a batch and counts one call per point. ``samp(k)`` returns
    ``k`` independent samples and counts ``k`` calls, or returns None (the Empty
    signal) after counting a single call.
    """

    def __init__(self, n: int, mq: MQFn, samp: SampFn, target: BooleanFunction | None = None):
        self.n = n
        self._mq = mq
        self._samp = samp
        self.target = target
        self.mq_calls = 0
        self.samp_calls = 0

    def mq(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.uint64))
        self.mq_calls += X.shape[0]
        return np.asarray(self._mq(X), dtype=bool)

    def samp(self, k: int = 1) -> np.ndarray | None:
        if k <= 0:
            return np.zeros((0, B.n_words(self.n)), dtype=np.uint64)
        out = self._samp(k)
        if out is None:
            self.samp_calls += 1
            return None
        self.samp_calls += k
        return np.atleast_2d(out)

    def query(self, x: np.ndarray) -> int:
        return int(self.mq(np.asarray(x)[None, :])[0])

    def sample(self) -> np.ndarray | None:
        out = self.samp(1)
        return None if out is None else out[0]

    @classmethod
    def from_pointwise(cls, n: int, mq: Callable[[np.ndarray], int], samp: Callable[[], "np.ndarray | None"]):
        """Wrap single-point callables, as supplied by external code."""

        def mq_batch(X):
            return np.array([bool(mq(x)) for x in X], dtype=bool)

        def samp_batch(k):
            rows = []
            for _ in range(k):
                z = samp()
                if z is None:
                    return None
                rows.append(np.asarray(z, dtype=np.uint64))
            return np.stack(rows)

        return cls(n, mq_batch, samp_batch)


def make_oracles(f: BooleanFunction, rng: np.random.Generator) -> OracleHandle:
    """Exact MQ and uniform Samp for ``f``; ``rng`` drives the sampler."""
    return OracleHandle(f.n, f.evaluate, lambda k: sample_satisfying(f, rng, k), target=f)
