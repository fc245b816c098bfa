"""Relative-error testers for anti-monotone conjunctions and for general conjunctions.

Both testers are non-adaptive and one-sided. Rounds are independent, so they are
issued in geometrically growing batches: a rejection found inside a batch halts the
run, and the oracle counters report the calls actually made (at most one batch more
than a strictly sequential run, never above the per-phase totals).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from . import bits as B
from ._num import ceil_div, check_eps
from .oracle import OracleHandle

FIRST_BATCH = 32
MAX_BATCH = 16384


class Verdict(enum.Enum):
    ACCEPT = "Accept"
    REJECT = "Reject"


class RejectSite(enum.Enum):
    PHASE1 = "Phase1"
    PHASE2 = "Phase2"
    EXTERNAL = "External"
    SMALL_SUPPORT = "SmallSupport"
    STEP2_DENSITY = "Step2Density"
    STEP2_STANDARD = "Step2Standard"
    STEP3 = "Step3"
    STEP4_SIMULATOR = "Step4Simulator"
    STEP4_CONJ = "Step4Conj"


@dataclass
class TestReport:
    __test__ = False  # keep pytest from collecting this class

    verdict: Verdict
    reject_site: RejectSite | None
    mq_calls: int
    samp_calls: int
    seed: int | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.verdict is Verdict.REJECT) != (self.reject_site is not None):
            raise ValueError("reject_site must be set exactly for rejections")

    @property
    def accepted(self) -> bool:
        return self.verdict is Verdict.ACCEPT

    def row(self) -> dict:
        return {
            "seed": self.seed,
            "verdict": self.verdict.value,
            "reject_site": self.reject_site.value if self.reject_site else "",
            "mq_calls": self.mq_calls,
            "samp_calls": self.samp_calls,
        }


@dataclass(frozen=True)
class ConjTestParams:
    epsilon: float
    c1: int = 5967
    c2: int = 91

    def __post_init__(self):
        check_eps(self.epsilon)
        if self.c1 < 1 or self.c2 < 1:
            raise ValueError("c1 and c2 must be positive")

    @property
    def phase1_rounds(self) -> int:
        return ceil_div(self.c1, self.epsilon)

    def with_epsilon(self, epsilon: float) -> "ConjTestParams":
        return ConjTestParams(epsilon, self.c1, self.c2)


def call_ceiling(params: ConjTestParams, shifted: bool = True) -> tuple[int, int]:
    """Worst-case ``(samp_calls, mq_calls)`` of one run."""
    r1 = params.phase1_rounds
    return (1 if shifted else 0) + 2 * r1 + 2 * params.c2, r1 + params.c2


def _batches(total: int) -> Iterator[int]:
    size = FIRST_BATCH
    done = 0
    while done < total:
        k = min(size, total - done)
        yield k
        done += k
        size = min(2 * size, MAX_BATCH)


def _report(oracle, verdict, site=None, seed=None, **info) -> TestReport:
    return TestReport(verdict, site, oracle.mq_calls, oracle.samp_calls, seed, info)


def _run_antimono(oracle: OracleHandle, params: ConjTestParams, rng: np.random.Generator):
    """Returns ``(verdict, site, note)``; counters live on ``oracle``."""
    for k in _batches(params.phase1_rounds):
        X = oracle.samp(k)
        if X is None:
            return Verdict.ACCEPT, None, "empty"
        Y = oracle.samp(k)
        if Y is None:
            return Verdict.ACCEPT, None, "empty"
        if not oracle.mq(X ^ Y).all():
            return Verdict.REJECT, RejectSite.PHASE1, None
    for k in _batches(params.c2):
        X = oracle.samp(k)
        if X is None:
            return Verdict.ACCEPT, None, "empty"
        keep = B.random_points(rng, k, oracle.n)  # each 1-bit survives with prob 1/2
        Yd = X & keep
        U = oracle.samp(k)
        if U is None:
            return Verdict.ACCEPT, None, "empty"
        if not oracle.mq(Yd ^ U).all():
            return Verdict.REJECT, RejectSite.PHASE2, None
    return Verdict.ACCEPT, None, None


def antimono_conj_test(
    oracle: OracleHandle, params: ConjTestParams, rng: np.random.Generator, seed: int | None = None
) -> TestReport:
    """One-sided tester for anti-monotone conjunctions under relative distance."""
    verdict, site, note = _run_antimono(oracle, params, rng)
    return _report(oracle, verdict, site, seed, **({"note": note} if note else {}))


class ShiftedOracle(OracleHandle):
    """Oracles of ``x -> f(x xor y)`` built on top of oracles for ``f``."""

    def __init__(self, base: OracleHandle, y: np.ndarray):
        def samp(k):
            out = base.samp(k)
            return None if out is None else out ^ y

        super().__init__(base.n, lambda X: base.mq(X ^ y), samp)


def conj_test(
    oracle: OracleHandle, params: ConjTestParams, rng: np.random.Generator, seed: int | None = None
) -> TestReport:
    """One-sided tester for general conjunctions: shift by one sample, then test anti-monotonicity."""
    y = oracle.samp(1)
    if y is None:
        return _report(oracle, Verdict.ACCEPT, None, seed, note="empty")
    verdict, site, note = _run_antimono(ShiftedOracle(oracle, y[0]), params, rng)
    return _report(oracle, verdict, site, seed, **({"note": note} if note else {}))


def conj_test_with_oracles(
    mq: Callable,
    samp: Callable,
    params: ConjTestParams,
    rng: np.random.Generator,
    n: int,
    *,
    batched: bool = False,
    seed: int | None = None,
) -> TestReport:
    """:func:`conj_test` over caller-supplied oracles, which may be non-uniform.

    With ``batched=False`` the callables act on single points: ``mq(x) -> bit`` and
    ``samp() -> point or None``. With ``batched=True`` they follow the
    :class:`OracleHandle` batch conventions.
    """
    if batched:
        handle = OracleHandle(n, mq, samp)
    else:
        handle = OracleHandle.from_pointwise(n, mq, samp)
    return conj_test(handle, params, rng, seed)
