"""Trial orchestration, deterministic seeding and report aggregation."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from . import textio
from .adversary import (
    CertMode,
    FaultyKind,
    FaultySamp,
    certify_by_enumeration,
    certify_far_from_dl,
    dno_function,
    random_instance,
)
from .boolfn import BooleanFunction
from .conjtest import ConjTestParams, TestReport, conj_test
from .conjtest import call_ceiling as conj_ceiling
from .distance import ClassKind, FunctionClass, enumerate_class
from .dltest import BruteForceTester, DlTestParams, LearnerTester, Variant, default_std_tester, dl_test
from .dltest import call_ceiling as dl_ceiling
from .errors import CertFail
from .oracle import make_oracles
from .reduction import ReductionParams, std_conj_mq_constant, std_conj_test

TESTERS = ("conj", "dl", "std-conj")
ORACLES = ("uniform", "SupportedBiased", "MinMass")


def trial_seed(base_seed: int, cell: int, trial: int) -> int:
    """128-bit BLAKE2b digest of ``(base_seed, cell, trial)``."""
    h = hashlib.blake2b(digest_size=16, person=b"reltest-trial")
    for v in (base_seed, cell, trial):
        h.update(int(v).to_bytes(16, "little", signed=True))
    return int.from_bytes(h.digest(), "little")


def trial_rngs(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent ``(oracle, tester)`` streams for one trial."""
    a, b = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(a), np.random.default_rng(b)


def wilson(successes: int, trials: int) -> tuple[float, float]:
    lo, hi = proportion_confint(successes, trials, alpha=0.05, method="wilson")
    return float(lo), float(hi)


# ------------------------------------------------------------------ config


@dataclass(frozen=True)
class Instance:
    name: str
    fn: BooleanFunction
    certificate: str = ""


@dataclass
class ExperimentConfig:
    """One experiment: a tester, a corpus, an ``eps`` grid and a trial count.

    ``instances`` is a mapping with exactly one of the keys ``file`` (path),
    ``inline`` (list of function lines), ``generator`` (``kind`` conj/dl/dno with
    ``n``, ``k``, ``count``, ``seed``, optional ``eps`` and ``certify``) or
    ``enumeration`` (``class`` and ``n``). Functions may also be passed directly.
    """

    tester: str
    instances: dict | Sequence[BooleanFunction]
    eps: Sequence[float]
    trials: int = 10
    base_seed: int = 0
    overrides: dict = field(default_factory=dict)
    oracle: str = "uniform"
    detail: bool = False
    workers: int = 1
    assertions: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tester not in TESTERS:
            raise ValueError(f"tester must be one of {TESTERS}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.eps or any(not 0 < e <= 1 for e in self.eps):
            raise ValueError("eps values must lie in (0, 1]")
        if self.oracle not in ORACLES:
            raise ValueError(f"oracle must be one of {ORACLES}")
        if self.oracle != "uniform" and self.tester == "std-conj":
            raise ValueError("std-conj uses membership queries only")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        unknown = set(self.assertions) - {"accept_rate_min", "accept_rate_max", "wilson_upper_max", "wilson_lower_min"}
        if unknown:
            raise ValueError(f"unknown assertions: {sorted(unknown)}")
        if isinstance(self.instances, dict) and len(self.instances) != 1:
            raise ValueError("instances needs exactly one source key")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d["eps"] = list(d["eps"]) if isinstance(d.get("eps"), (list, tuple)) else [d["eps"]]
        return cls(**d)

    def echo(self) -> dict:
        src = self.instances if isinstance(self.instances, dict) else {"inline": [textio.dumps(f) for f in self.instances]}
        return {
            "tester": self.tester,
            "instances": src,
            "eps": list(self.eps),
            "trials": self.trials,
            "base_seed": self.base_seed,
            "overrides": self.overrides,
            "oracle": self.oracle,
            "assertions": self.assertions,
        }


def materialize(cfg: ExperimentConfig) -> list[Instance]:
    src = cfg.instances
    if not isinstance(src, dict):
        return [Instance(textio.dumps(f), f) for f in src]
    ((kind, spec),) = src.items()
    if kind == "file":
        return [Instance(textio.dumps(f), f) for f in textio.load_file(spec)]
    if kind == "inline":
        return [Instance(line, textio.loads(line)) for line in spec]
    if kind == "enumeration":
        cls = FunctionClass(ClassKind(_class_name(spec["class"])), int(spec["n"]))
        return [Instance(textio.dumps(f), f) for f in enumerate_class(cls)]
    if kind == "generator":
        return _generate(spec)
    raise ValueError(f"unknown instance source {kind!r}")


def _class_name(s: str) -> str:
    aliases = {"conj": "Conjunctions", "am": "AntiMonotoneConjunctions", "dl": "DecisionLists"}
    return aliases.get(s, s)


def _generate(spec: dict) -> list[Instance]:
    kind, n, count = spec["kind"], int(spec["n"]), int(spec.get("count", 1))
    seed = int(spec.get("seed", 0))
    if kind == "dno":
        eps = float(spec["eps"])
        out = []
        for s in range(seed, seed + count):
            f = dno_function(n, eps, s)
            label = ""
            if spec.get("certify", True):
                try:
                    label = certify_far_from_dl(f, eps).label
                except CertFail:
                    continue
            out.append(Instance(textio.dumps(f), f, label))
        return out
    rng = np.random.default_rng(seed)
    k = int(spec["k"])
    return [Instance(textio.dumps(f), f) for f in (random_instance(kind, n, k, rng) for _ in range(count))]


# ------------------------------------------------------------------ trials


@dataclass(frozen=True)
class TrialResult:
    cell: int
    trial: int
    seed: int
    verdict: str
    reject_site: str
    mq_calls: int
    samp_calls: int
    ceiling_ok: bool


def _dl_params(eps: float, overrides: dict) -> DlTestParams:
    ov = dict(overrides)
    ov.pop("std", None)
    preset = ov.pop("preset", "desk")
    if "variant" in ov:
        ov["variant"] = Variant(ov["variant"])
    return DlTestParams.desk(eps, **ov) if preset == "desk" else DlTestParams(eps, **ov)


def run_trial(tester: str, f: BooleanFunction, eps: float, seed: int, overrides: dict, oracle_kind: str) -> TestReport:
    """One seeded run; ``info["ceiling_ok"]`` records whether the call counts stayed under the ceiling."""
    orng, trng = trial_rngs(seed)
    if tester == "std-conj":
        rp = ReductionParams(eps, overrides.get("red_c1", 3100), overrides.get("red_c2", 40))
        cc = (overrides.get("c1", 5967), overrides.get("c2", 91))
        rep = std_conj_test(f.evaluate, f.n, eps, trng, params=rp, conj_params=cc, seed=seed)
        cap = std_conj_mq_constant(rp, *cc) / eps
        rep.info["ceiling_ok"] = rep.samp_calls == 0 and rep.mq_calls <= cap
        return rep
    if oracle_kind == "uniform":
        oracle = make_oracles(f, orng)
    else:
        oracle = FaultySamp(f, FaultyKind(oracle_kind)).oracle(orng)
    if tester == "conj":
        params = ConjTestParams(eps, overrides.get("c1", 5967), overrides.get("c2", 91))
        rep = conj_test(oracle, params, trng, seed)
        s_cap, q_cap = conj_ceiling(params)
    else:
        params = _dl_params(eps, overrides)
        if overrides.get("std", "exact") == "learner":
            std = LearnerTester(variant=params.variant)
            std_q = std.max_queries(eps / 100)
        else:
            std = default_std_tester(params.variant)
        rep = dl_test(oracle, params, std, trng, seed)
        if isinstance(std, BruteForceTester):
            std_q = std.max_queries(eps / 100, rep.info.get("R", 0))
        s_cap, q_cap = dl_ceiling(params, std_q)
    rep.info["ceiling_ok"] = rep.samp_calls <= s_cap and rep.mq_calls <= q_cap
    return rep


def _run_cell(args) -> list[TrialResult]:
    tester, f, eps, cell, trials, base_seed, overrides, oracle_kind = args
    out = []
    for t in range(trials):
        seed = trial_seed(base_seed, cell, t)
        rep = run_trial(tester, f, eps, seed, overrides, oracle_kind)
        out.append(
            TrialResult(
                cell,
                t,
                seed,
                rep.verdict.value,
                rep.reject_site.value if rep.reject_site else "",
                rep.mq_calls,
                rep.samp_calls,
                bool(rep.info["ceiling_ok"]),
            )
        )
    return out


# ----------------------------------------------------------------- reports


@dataclass(frozen=True)
class CellSummary:
    cell: int
    instance: str
    n: int
    eps: float
    certificate: str
    trials: int
    accepts: int
    accept_rate: float
    wilson_lo: float
    wilson_hi: float
    mean_mq: float
    max_mq: int
    mean_samp: float
    max_samp: int
    reject_sites: str
    ceiling_violations: int


@dataclass
class AggregateReport:
    config: dict
    cells: list[CellSummary]
    trials: list[TrialResult]
    failures: list[str]
    wall_seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = list(CellSummary.__dataclass_fields__)
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for c in self.cells:
            row = asdict(c)
            for k in ("accept_rate", "wilson_lo", "wilson_hi", "mean_mq", "mean_samp"):
                row[k] = f"{row[k]:.6f}"
            w.writerow(row)
        return buf.getvalue()

    def to_json(self, detail: bool = False, timing: bool = False) -> str:
        """Deterministic unless ``timing`` adds the wall-clock field."""
        doc: dict[str, Any] = {
            "config": self.config,
            "cells": [asdict(c) for c in self.cells],
            "failures": self.failures,
        }
        if detail:
            doc["trials"] = [{**asdict(t), "seed": str(t.seed)} for t in self.trials]
        if timing:
            doc["wall_seconds"] = self.wall_seconds
        return json.dumps(doc, indent=2, sort_keys=True)


def _check(cfg: ExperimentConfig, c: CellSummary) -> list[str]:
    a = cfg.assertions
    out = []
    if c.ceiling_violations:
        out.append(f"cell {c.cell}: {c.ceiling_violations} runs above the call ceiling")
    if "accept_rate_min" in a and c.accept_rate < a["accept_rate_min"]:
        out.append(f"cell {c.cell}: accept rate {c.accept_rate:.4f} < {a['accept_rate_min']}")
    if "accept_rate_max" in a and c.accept_rate > a["accept_rate_max"]:
        out.append(f"cell {c.cell}: accept rate {c.accept_rate:.4f} > {a['accept_rate_max']}")
    if "wilson_upper_max" in a and c.wilson_hi > a["wilson_upper_max"]:
        out.append(f"cell {c.cell}: Wilson upper {c.wilson_hi:.4f} > {a['wilson_upper_max']}")
    if "wilson_lower_min" in a and c.wilson_lo < a["wilson_lower_min"]:
        out.append(f"cell {c.cell}: Wilson lower {c.wilson_lo:.4f} < {a['wilson_lower_min']}")
    return out


def run_experiment(cfg: ExperimentConfig) -> AggregateReport:
    start = time.perf_counter()
    insts = materialize(cfg)
    jobs = []
    for i, inst in enumerate(insts):
        for j, eps in enumerate(cfg.eps):
            cell = i * len(cfg.eps) + j
            jobs.append((cfg.tester, inst.fn, float(eps), cell, cfg.trials, cfg.base_seed, cfg.overrides, cfg.oracle))
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            chunks = list(ex.map(_run_cell, jobs))
    else:
        chunks = [_run_cell(j) for j in jobs]
    results = sorted((r for ch in chunks for r in ch), key=lambda r: (r.cell, r.trial))

    cells = []
    failures = []
    for job, chunk in zip(jobs, chunks):
        _, f, eps, cell, trials, *_ = job
        inst = insts[cell // len(cfg.eps)]
        acc = sum(r.verdict == "Accept" for r in chunk)
        lo, hi = wilson(acc, trials)
        mq = [r.mq_calls for r in chunk]
        sp = [r.samp_calls for r in chunk]
        sites: dict[str, int] = {}
        for r in chunk:
            if r.reject_site:
                sites[r.reject_site] = sites.get(r.reject_site, 0) + 1
        s = CellSummary(
            cell,
            inst.name,
            f.n,
            eps,
            inst.certificate,
            trials,
            acc,
            acc / trials,
            lo,
            hi,
            float(np.mean(mq)),
            max(mq),
            float(np.mean(sp)),
            max(sp),
            ";".join(f"{k}:{v}" for k, v in sorted(sites.items())),
            sum(not r.ceiling_ok for r in chunk),
        )
        cells.append(s)
        failures.extend(_check(cfg, s))
    return AggregateReport(cfg.echo(), cells, results, failures, time.perf_counter() - start)


def load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        return ExperimentConfig.from_dict(json.load(fh))


def certificate_sidecar(f: BooleanFunction, eps: float, kind: str = "dl") -> dict:
    """Certificate for a generated far instance as a JSON-ready dict."""
    if f.n <= 5:
        cert = certify_by_enumeration(f, eps, ClassKind(_class_name(kind)))
    else:
        cert = certify_far_from_dl(f, eps, mode=CertMode.EXACT if f.n <= 20 else CertMode.STATISTICAL)
    d = cert.as_dict()
    d["label"] = cert.label
    return d

