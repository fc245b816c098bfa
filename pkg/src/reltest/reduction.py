"""Standard-model testers built from relative-error testers.

The reduction estimates the density ``p`` of ``f``, collects uniform points with
``f = 1`` to stand in for the sampling oracle, and runs the relative tester at
distance ``eps / (2 p_hat)``. Only membership queries reach ``f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bits as B
from ._num import ceil_div, check_eps
from .conjtest import ConjTestParams, RejectSite, TestReport, Verdict, conj_test
from .oracle import OracleHandle

MQBatch = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class RelTesterHandle:
    """A relative-error tester and a bound ``q(eps)`` on its total oracle calls.

    The reduction's guarantee needs ``q(eps / d) <= d * q(eps)`` for ``d`` in (0, 1).
    """

    run: Callable[[OracleHandle, float, np.random.Generator], TestReport]
    query_budget: Callable[[float], float]


@dataclass(frozen=True)
class ReductionParams:
    epsilon: float
    c1: int = 3100
    c2: int = 40

    def __post_init__(self):
        check_eps(self.epsilon)
        if self.c1 < 1 or self.c2 < 1:
            raise ValueError("c1 and c2 must be positive")


class _Exhausted(Exception):
    pass


def _pool_oracle(n: int, mq: MQBatch, pool: np.ndarray) -> OracleHandle:
    """MQ passes through; Samp hands out ``pool`` rows in order, without replacement."""
    pos = 0

    def samp(k):
        nonlocal pos
        if pos + k > pool.shape[0]:
            raise _Exhausted
        out = pool[pos : pos + k]
        pos += k
        return out

    handle = OracleHandle(n, mq, samp)
    handle.consumed = lambda: pos
    return handle


def std_from_rel(
    mq: MQBatch,
    n: int,
    params: ReductionParams,
    tester: RelTesterHandle,
    rng: np.random.Generator,
    seed: int | None = None,
) -> TestReport:
    """Standard-model test of ``f`` given only batched membership queries ``mq``.

    Phase 2 draws uniform points lazily and stops as soon as the collected set ``G``
    exceeds ``q(eps / (2 p_hat))``; the points handed to the tester are the same prefix
    of ``G`` that a full draw would supply, so only the query count changes.
    """
    eps = params.epsilon
    counter = OracleHandle(n, mq, lambda k: None)

    def done(verdict, site=None, **info):
        return TestReport(verdict, site, counter.mq_calls, 0, seed, info)

    m1 = ceil_div(params.c1, eps)
    p_hat = float(counter.mq(B.random_points(rng, m1, n)).mean())
    if p_hat <= eps / 2:
        return done(Verdict.ACCEPT, phase=1, p_hat=p_hat)

    inner_eps = eps / (2 * p_hat)
    need = tester.query_budget(inner_eps)
    pool_size = math.ceil(params.c2 * tester.query_budget(eps / 2))
    target = math.floor(need) + 1
    chunks = []
    have = 0
    drawn = 0
    while have < target and drawn < pool_size:
        k = min(pool_size - drawn, max(1024, int(2 * (target - have) / p_hat)))
        X = B.random_points(rng, k, n)
        drawn += k
        hits = X[counter.mq(X)]
        chunks.append(hits)
        have += hits.shape[0]
    G = np.concatenate(chunks) if chunks else np.zeros((0, B.n_words(n)), dtype=np.uint64)
    if G.shape[0] <= need:
        return done(Verdict.ACCEPT, phase=2, p_hat=p_hat, g_size=int(G.shape[0]))

    inner = _pool_oracle(n, counter.mq, G)
    try:
        rep = tester.run(inner, inner_eps, rng)
    except _Exhausted:
        return done(Verdict.ACCEPT, phase=3, p_hat=p_hat, g_size=int(G.shape[0]), note="G exhausted")
    site = rep.reject_site if rep.reject_site is not None else None
    if rep.verdict is Verdict.REJECT and site is None:
        site = RejectSite.EXTERNAL
    return done(
        rep.verdict,
        site,
        phase=3,
        p_hat=p_hat,
        g_size=int(G.shape[0]),
        inner_eps=inner_eps,
        samples_used=inner.consumed(),
    )


def conj_budget(c1: int = 5967, c2: int = 91) -> Callable[[float], float]:
    """``q(eps) = (3 c1 + 3 c2 + 4) / eps`` bounds samp plus mq calls of one conjunction test."""
    K = 3 * c1 + 3 * c2 + 4
    return lambda eps: K / eps


def conj_tester_handle(c1: int = 5967, c2: int = 91) -> RelTesterHandle:
    def run(oracle, eps, rng):
        return conj_test(oracle, ConjTestParams(min(eps, 1.0), c1, c2), rng)

    return RelTesterHandle(run, conj_budget(c1, c2))


def std_conj_test(
    mq: MQBatch,
    n: int,
    epsilon: float,
    rng: np.random.Generator,
    *,
    params: ReductionParams | None = None,
    conj_params: tuple[int, int] = (5967, 91),
    seed: int | None = None,
) -> TestReport:
    """One-sided standard-model conjunction tester using only membership queries."""
    params = params or ReductionParams(epsilon)
    if params.epsilon != epsilon:
        params = ReductionParams(epsilon, params.c1, params.c2)
    return std_from_rel(mq, n, params, conj_tester_handle(*conj_params), rng, seed)


def std_conj_mq_constant(params: ReductionParams, c1: int = 5967, c2: int = 91) -> int:
    """``K'`` with ``mq_calls <= K' / eps`` for every run of :func:`std_conj_test`.

    Phase 1 costs ``ceil(c1r/eps)``, the Phase 2 pool ``ceil(c2r q(eps/2))``, and the
    inner test ``ceil(c1/eps') + c2`` with ``eps' >= eps/2``.
    """
    Q = 3 * c1 + 3 * c2 + 4
    return params.c1 + 2 * params.c2 * Q + 2 * c1 + c2 + 3
