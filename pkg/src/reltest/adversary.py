"""Far instances, far-from-class certificates, and non-uniform sampling oracles."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import bits as B
from .boolfn import (
    BooleanFunction,
    Conjunction,
    DecisionList,
    LazyRandomFunction,
    Literal,
    sample_satisfying,
)
from .distance import ClassKind, FunctionClass, rel_dist_to_class
from .errors import CertFail, EmptySupport, RangeViolation
from .oracle import OracleHandle

# the three-case argument needs 0.5 - 3.3 eps >= eps
CERT_EPS_MAX = Fraction(5, 43)


def dno_function(n: int, eps: float, seed: int, C: float = 1.0) -> LazyRandomFunction:
    """Random function with each point 0 independently with probability ``3 eps``.

    Warns with :class:`RangeViolation` outside ``C log2(n) / 2^n <= eps <= 0.1``.
    """
    lo = C * math.log2(max(n, 2)) / 2.0**n
    if not lo <= eps <= 0.1:
        warnings.warn(f"eps={eps} outside [{lo:.3g}, 0.1] for n={n}", RangeViolation, stacklevel=2)
    return LazyRandomFunction(n, 3 * eps, seed)


class CertMode(enum.Enum):
    EXACT = "Exact"
    STATISTICAL = "Statistical"


@dataclass(frozen=True)
class FarCertificate:
    mode: CertMode
    cls: FunctionClass
    epsilon: float
    evidence: dict = field(default_factory=dict)
    confidence: float = 1.0

    @property
    def label(self) -> str:
        return "certified-exact" if self.mode is CertMode.EXACT else "certified-statistical"

    def as_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "class": self.cls.kind.value,
            "n": self.cls.n,
            "epsilon": self.epsilon,
            "confidence": self.confidence,
            "evidence": {k: (str(v) if isinstance(v, Fraction) else v) for k, v in self.evidence.items()},
        }


def certify_by_enumeration(f: BooleanFunction, eps: float, kind: ClassKind) -> FarCertificate:
    """Certificate from the exact relative distance to the class (small ``n`` only)."""
    cls = FunctionClass(kind, f.n)
    res = rel_dist_to_class(f, cls)
    if res.value < Fraction(eps).limit_denominator(10**12):
        raise CertFail(f"rel-dist {res.value} below eps={eps}", {"rel_dist": res.value})
    return FarCertificate(CertMode.EXACT, cls, eps, {"rel_dist": res.value, "witness": repr(res.witness)})


def _hoeffding(m: int, delta: float) -> float:
    return math.sqrt(math.log(2 / delta) / (2 * m))


def certify_far_from_dl(
    f: BooleanFunction,
    eps: float,
    *,
    mode: CertMode | None = None,
    confidence: float = 0.999,
    samples: int = 100_000,
    rng: np.random.Generator | None = None,
) -> FarCertificate:
    """Check the two counting conditions that force ``rel-dist(f, DL) >= eps``.

    (1) ``|f^{-1}(0)|`` lies in ``[0.9, 1.1] * 3 eps 2^n``;
    (2) for every ``i`` and ``b``, at least ``0.9 * 3 eps 2^(n-1)`` zeros have ``x_i = b``.

    Exact mode counts over the whole cube (``n <= 20``). Statistical mode estimates every
    fraction from ``samples`` uniform points and requires the Hoeffding interval, at the
    given joint confidence, to clear each threshold.
    """
    n = f.n
    if Fraction(eps).limit_denominator(10**12) > CERT_EPS_MAX:
        raise CertFail(f"eps={eps} exceeds 5/43; the case analysis does not apply")
    if mode is None:
        mode = CertMode.EXACT if n <= 20 else CertMode.STATISTICAL
    cls = FunctionClass(ClassKind.DECISION_LISTS, n)
    target = 3 * eps

    if mode is CertMode.EXACT:
        if n > 20:
            raise CertFail("exact certification needs n <= 20")
        zeros = ~f.truth_bits()
        z = int(zeros.sum())
        ev = {"zeros": z, "window": [0.9 * target * 2**n, 1.1 * target * 2**n]}
        if not 0.9 * target * 2**n <= z <= 1.1 * target * 2**n:
            raise CertFail("zero count outside the window", ev)
        idx = np.arange(1 << n, dtype=np.uint64)
        need = 0.9 * target * 2 ** (n - 1)
        per = []
        for i in range(n):
            bit = ((idx >> np.uint64(i)) & np.uint64(1)).astype(bool)
            for b in (0, 1):
                cnt = int((zeros & (bit == bool(b))).sum())
                per.append(cnt)
                if cnt < need:
                    ev.update(per_pair_min=cnt, pair=(i, b), need=need)
                    raise CertFail(f"too few zeros with x{i + 1}={b}", ev)
        ev.update(per_pair_min=min(per), need=need)
        return FarCertificate(CertMode.EXACT, cls, eps, ev)

    rng = rng if rng is not None else np.random.default_rng(0)
    delta = (1 - confidence) / (2 * n + 1)
    t = _hoeffding(samples, delta)
    X = B.random_points(rng, samples, n)
    p = 1.0 - float(f.evaluate(X).mean())
    ev = {"samples": samples, "margin": t, "zero_fraction": p}
    if not (0.9 * target <= p - t and p + t <= 1.1 * target):
        raise CertFail("zero fraction not confidently inside the window", ev)
    worst = 1.0
    for i in range(n):
        for b in (0, 1):
            Y = B.random_points(rng, samples, n)
            w, s = i >> 6, np.uint64(1 << (i & 63))
            Y[:, w] = (Y[:, w] | s) if b else (Y[:, w] & ~s)
            q = 1.0 - float(f.evaluate(Y).mean())
            worst = min(worst, q)
            if q - t < 0.9 * target:
                ev.update(pair=(i, b), pair_fraction=q)
                raise CertFail(f"zeros with x{i + 1}={b} not confidently frequent", ev)
    ev["per_pair_min_fraction"] = worst
    return FarCertificate(CertMode.STATISTICAL, cls, eps, ev, confidence)


# ------------------------------------------------------------- faulty samplers


class FaultyKind(enum.Enum):
    SUPPORTED_BIASED = "SupportedBiased"
    MIN_MASS = "MinMass"


def _lex_min_rows(Z: np.ndarray, n: int, K: int) -> np.ndarray:
    """Row-wise lexicographic minimum (x1 most significant) within groups of ``K``."""
    bits = B.unpack_rows(Z, n)
    keys = np.packbits(bits, axis=1, bitorder="big")
    rank = np.empty(Z.shape[0], dtype=np.int64)
    rank[np.lexsort(keys.T[::-1])] = np.arange(Z.shape[0])
    pick = rank.reshape(-1, K).argmin(axis=1)
    return Z.reshape(-1, K, Z.shape[1])[np.arange(pick.size), pick]


@dataclass(frozen=True)
class FaultySamp:
    """Non-uniform sampling oracle over ``f^{-1}(1)``.

    SupportedBiased returns the lexicographically smallest of ``K`` uniform satisfiers,
    which tilts mass toward small satisfiers. MinMass returns a uniform satisfier with
    probability ``mix`` and a SupportedBiased draw otherwise, so each point keeps mass
    at least ``mix / |F|``.
    """

    base: BooleanFunction
    kind: FaultyKind
    K: int = 4
    mix: float = 0.5

    def sampler(self, rng: np.random.Generator):
        """Batched sampler ``k -> (k, W)`` points."""
        f, K = self.base, self.K
        first = sample_satisfying(f, rng, 1)
        if first is None:
            raise EmptySupport("faulty sampler over a function with no satisfying points")

        def biased(k):
            return _lex_min_rows(sample_satisfying(f, rng, k * K), f.n, K)

        def draw(k):
            if self.kind is FaultyKind.SUPPORTED_BIASED:
                return biased(k)
            out = sample_satisfying(f, rng, k)
            tilt = rng.random(k) >= self.mix
            if tilt.any():
                out[tilt] = biased(int(tilt.sum()))
            return out

        return draw

    def oracle(self, rng: np.random.Generator) -> OracleHandle:
        """Exact MQ for ``base`` paired with this sampler."""
        return OracleHandle(self.base.n, self.base.evaluate, self.sampler(rng), target=self.base)

    def exact_masses(self) -> tuple[np.ndarray, list[Fraction]]:
        """Satisfying indices in lexicographic order and their exact masses (``n <= 20``)."""
        sat = np.flatnonzero(self.base.truth_bits()).astype(np.uint64)
        N = sat.size
        if N == 0:
            raise EmptySupport("no satisfying points")
        order = B.lex_order(B.ints_to_points(sat, self.base.n), self.base.n)
        sat = sat[order]
        K = self.K
        biased = [Fraction(N - i, N) ** K - Fraction(N - i - 1, N) ** K for i in range(N)]
        if self.kind is FaultyKind.SUPPORTED_BIASED:
            return sat, biased
        mix = Fraction(self.mix).limit_denominator(10**9)
        return sat, [mix / N + (1 - mix) * b for b in biased]


def faulty_samp(spec: FaultySamp, rng: np.random.Generator):
    return spec.sampler(rng)


# ------------------------------------------------------------ random corpus


class InstanceKind(enum.Enum):
    CONJUNCTION = "conj"
    DECISION_LIST = "dl"


def random_instance(kind: InstanceKind | str, n: int, k: int, rng: np.random.Generator) -> BooleanFunction:
    """Uniform ``k``-literal conjunction, or random normalized ``k``-rule list with a pivot."""
    kind = InstanceKind(kind)
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    vars_ = [int(v) for v in rng.choice(n, size=k, replace=False)]
    if kind is InstanceKind.CONJUNCTION:
        return Conjunction(n, (Literal(v, bool(rng.integers(2))) for v in vars_))
    if k == 0:
        raise ValueError("a decision list with a pivot needs k >= 1")
    while True:
        bv = rng.integers(0, 2, size=(k, 2))
        if bv[:, 1].any():
            break
    rules = [(v, int(b), int(o)) for v, (b, o) in zip(vars_, bv)]
    return DecisionList(n, rules, int(rng.integers(2)))

