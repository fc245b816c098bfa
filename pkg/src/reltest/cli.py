"""Command-line entry point: ``reltest <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import textio
from .adversary import InstanceKind, dno_function, random_instance
from .distance import ClassKind, FunctionClass, rel_dist, rel_dist_to_class, std_dist, std_dist_to_class
from .errors import CertFail
from .harness import ExperimentConfig, certificate_sidecar, run_experiment
from .lemmas import SUITES, verify_lemmas

ROW_FIELDS = ("seed", "verdict", "reject_site", "mq_calls", "samp_calls")


def _eps_list(s: str) -> list[float]:
    return [float(t) for t in s.split(",") if t.strip()]


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _add_common(p: argparse.ArgumentParser, fn_required: bool = True) -> None:
    p.add_argument("--fn", required=fn_required, help="function line or path to a file of lines")
    p.add_argument("--eps", type=_eps_list, default=None, help="comma-separated eps grid")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--out", choices=("csv", "json"), default="csv")
    p.add_argument("--detail", action="store_true", help="include per-trial rows in JSON output")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--expect-accept-min", type=float, default=None)
    p.add_argument("--expect-accept-max", type=float, default=None)
    p.add_argument("--config", help="JSON config whose keys override the flags")


def _config_from_args(args, tester: str, overrides: dict, oracle: str = "uniform") -> ExperimentConfig:
    d: dict = {
        "tester": tester,
        "oracle": oracle,
        "eps": args.eps or [0.1],
        "trials": args.trials,
        "base_seed": args.seed,
        "overrides": overrides,
        "workers": args.workers,
        "assertions": {},
    }
    if args.fn:
        d["instances"] = {"inline": [textio.dumps(f) for f in textio.parse_fn_arg(args.fn)]}
    if args.expect_accept_min is not None:
        d["assertions"]["accept_rate_min"] = args.expect_accept_min
    if args.expect_accept_max is not None:
        d["assertions"]["accept_rate_max"] = args.expect_accept_max
    cfg = _load_config(args.config)
    if "overrides" in cfg:
        d["overrides"] = {**overrides, **cfg.pop("overrides")}
    d.update(cfg)
    d["tester"] = tester
    if "instances" not in d:
        raise SystemExit("no instances: pass --fn or give 'instances' in --config")
    return ExperimentConfig.from_dict(d)


def _emit_trials(report, fmt: str) -> str:
    if fmt == "json":
        return report.to_json(detail=True) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("cell", "eps") + ROW_FIELDS)
    eps_of = {c.cell: c.eps for c in report.cells}
    for t in report.trials:
        w.writerow((t.cell, eps_of[t.cell], t.seed, t.verdict, t.reject_site, t.mq_calls, t.samp_calls))
    return buf.getvalue()


def _finish(report, fmt: str, detail: bool, trial_rows: bool) -> int:
    if trial_rows:
        sys.stdout.write(_emit_trials(report, fmt))
    elif fmt == "json":
        sys.stdout.write(report.to_json(detail=detail) + "\n")
    else:
        sys.stdout.write(report.to_csv())
    for c in report.cells:
        print(
            f"cell {c.cell} eps={c.eps}: accept {c.accepts}/{c.trials} "
            f"[{c.wilson_lo:.3f}, {c.wilson_hi:.3f}] max mq={c.max_mq} max samp={c.max_samp}",
            file=sys.stderr,
        )
    for msg in report.failures:
        print(f"ASSERTION FAILED: {msg}", file=sys.stderr)
    return 1 if report.failures else 0


def cmd_test_conj(args) -> int:
    ov = {k: v for k, v in (("c1", args.c1), ("c2", args.c2)) if v is not None}
    cfg = _config_from_args(args, "conj", ov, args.oracle)
    return _finish(run_experiment(cfg), args.out, args.detail, True)


def cmd_test_dl(args) -> int:
    ov = {"variant": args.variant, "std": args.std, "preset": args.preset}
    cfg = _config_from_args(args, "dl", ov)
    return _finish(run_experiment(cfg), args.out, args.detail, True)


def cmd_test_std_conj(args) -> int:
    cfg = _config_from_args(args, "std-conj", {})
    return _finish(run_experiment(cfg), args.out, args.detail, True)


def cmd_bench(args) -> int:
    d = _load_config(args.config)
    d.setdefault("tester", args.tester)
    d.setdefault("eps", args.eps or [0.4, 0.2, 0.1, 0.05])
    d.setdefault("trials", args.trials)
    d.setdefault("base_seed", args.seed)
    d.setdefault("workers", args.workers)
    if "instances" not in d:
        gen = {"kind": args.kind, "n": args.n, "k": args.k, "count": args.count, "seed": args.seed}
        if args.kind == "dno":
            gen["eps"] = args.gen_eps
        d["instances"] = {"generator": gen}
    report = run_experiment(ExperimentConfig.from_dict(d))
    return _finish(report, args.out, args.detail, False)


def _class(s: str) -> ClassKind:
    return {"conj": ClassKind.CONJUNCTIONS, "am": ClassKind.ANTIMONOTONE, "dl": ClassKind.DECISION_LISTS}[s]


def cmd_reldist(args) -> int:
    (f,) = textio.parse_fn_arg(args.f)
    if args.cls:
        fc = FunctionClass(_class(args.cls), f.n)
        res = (std_dist_to_class if args.standard else rel_dist_to_class)(f, fc)
        value = res.value
        extra = f" witness: {textio.dumps(res.witness)}" if res.witness is not None else ""
    else:
        if not args.g:
            raise SystemExit("reldist needs a second function or --class")
        (g,) = textio.parse_fn_arg(args.g)
        value = (std_dist if args.standard else rel_dist)(f, g)
        extra = ""
    print(f"{value} ~ {float(value):.6g}{extra}")
    return 0


def cmd_gen(args) -> int:
    rng = np.random.default_rng(args.seed)
    lines, certs = [], []
    for i in range(args.count):
        if args.kind == "dno":
            f = dno_function(args.n, args.eps, args.seed + i)
            try:
                certs.append({"function": textio.dumps(f), **certificate_sidecar(f, args.eps)})
            except CertFail as e:
                certs.append({"function": textio.dumps(f), "label": "uncertified", "reason": str(e)})
        else:
            f = random_instance(InstanceKind(args.kind), args.n, args.k, rng)
        lines.append(textio.dumps(f))
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        if certs:
            with open(args.output + ".cert.json", "w") as fh:
                json.dump(certs, fh, indent=2, sort_keys=True)
    else:
        sys.stdout.write(text)
        for c in certs:
            print("# cert " + json.dumps(c, sort_keys=True))
    return 0


def cmd_verify_lemmas(args) -> int:
    ledger = verify_lemmas(args.n_cap, suites=args.suites, seed=args.seed)
    if args.out == "json":
        print(json.dumps(ledger.as_dict(), indent=2))
    else:
        print("\n".join(ledger.lines()))
    return 0 if ledger.passed else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="reltest", description="Relative-error testers for conjunctions and decision lists")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test-conj", help="run the conjunction tester")
    _add_common(p, fn_required=False)
    p.add_argument("--c1", type=int)
    p.add_argument("--c2", type=int)
    p.add_argument("--oracle", choices=("uniform", "SupportedBiased", "MinMass"), default="uniform")
    p.set_defaults(func=cmd_test_conj)

    p = sub.add_parser("test-dl", help="run the decision-list tester")
    _add_common(p, fn_required=False)
    p.add_argument("--variant", choices=("adaptive", "nonadaptive"), default="adaptive")
    p.add_argument("--std", choices=("exact", "learner"), default="exact")
    p.add_argument("--preset", choices=("desk", "default"), default="desk")
    p.set_defaults(func=cmd_test_dl)

    p = sub.add_parser("test-std-conj", help="standard-model conjunction tester (membership queries only)")
    _add_common(p, fn_required=False)
    p.set_defaults(func=cmd_test_std_conj)

    p = sub.add_parser("bench", help="accept-rate and call-count sweep over a generated corpus")
    p.add_argument("--tester", choices=("conj", "dl", "std-conj"), default="conj")
    p.add_argument("--kind", choices=("conj", "dl", "dno"), default="conj")
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--gen-eps", type=float, default=0.05, help="eps for dno instances")
    p.add_argument("--eps", type=_eps_list, default=None)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", choices=("csv", "json"), default="csv")
    p.add_argument("--detail", action="store_true")
    p.add_argument("--config")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("reldist", help="exact relative (or standard) distance")
    p.add_argument("f")
    p.add_argument("g", nargs="?")
    p.add_argument("--class", dest="cls", choices=("conj", "am", "dl"))
    p.add_argument("--standard", action="store_true", help="normalize by 2^n instead of |f^-1(1)|")
    p.set_defaults(func=cmd_reldist)

    p = sub.add_parser("gen", help="generate instances (dno instances get a certificate sidecar)")
    p.add_argument("--kind", choices=("dno", "conj", "dl"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--output", "-o", help="write lines here and certificates to <output>.cert.json")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify-lemmas", help="exhaustive lemma verification ledger")
    p.add_argument("--n-cap", type=int, default=3)
    p.add_argument("--suites", nargs="*", choices=SUITES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_verify_lemmas)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
