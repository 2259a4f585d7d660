"""Command-line front end: ``fuzzyp {single,multi,simulate,hist}``.

Exit codes: 0 success, 1 input error, 2 numerical-domain error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import data
from .dist_core import binomial_null
from .errors import DomainError, InputError
from .mc_engine import McConfig, empirical_adjusted_p, run_multi_method
from .mtp import MtpProcedure, evaluate_decisions
from .policy import UPolicy
from .single_test import critical_pair, single_method_report

EXIT_OK, EXIT_INPUT, EXIT_DOMAIN = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _read_fixed_u(path: str) -> list[float]:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{path}: no such file")
    values = []
    for line in p.read_text(encoding="utf-8").replace(",", "\n").split():
        try:
            values.append(float(line))
        except ValueError:
            raise InputError(f"{path}: {line!r} is not a number") from None
    return values


def parse_policy(spec: str, seed: Optional[int]) -> UPolicy:
    if spec.startswith("fixed:"):
        return UPolicy.fixed(_read_fixed_u(spec[len("fixed:"):]))
    if spec == "random":
        if seed is None:
            raise InputError("--seed is required for the random u-policy")
        return UPolicy.random(seed)
    if spec in ("mid", "natural", "star"):
        return UPolicy(spec)
    raise InputError(f"unknown u-policy {spec!r}")


def build_procedure(args, hypotheses) -> MtpProcedure:
    if args.mtp == "bonferroni":
        return MtpProcedure.bonferroni()
    if args.mtp == "holm":
        return MtpProcedure.holm()
    if args.mtp == "storey":
        lam = args.alpha if args.lam is None else args.lam
        return MtpProcedure.storey(lam, monotone=args.monotone)
    variant = "mid" if args.mtp == "tarone-mid" else "natural"
    return MtpProcedure.tarone(data.minimal_p_values(hypotheses, variant), variant)


def _load(args):
    if args.format == "binomial":
        records = data.ingest_binomial_csv(args.data)
        return [r.id for r in records], data.binomial_hypotheses(records)
    inputs = data.ingest_two_sample_csv(args.data)
    return [t.id for t in inputs], data.two_sample_hypotheses(inputs)


def _config(args, need_seed: bool) -> McConfig:
    if args.seed is None and need_seed:
        raise InputError("--seed is required")
    return McConfig(args.B, 0 if args.seed is None else args.seed)


def cmd_single(args) -> int:
    dist = binomial_null(args.n)
    policy = parse_policy(args.u_policy, args.seed)
    rep = single_method_report(dist, args.x, args.alpha, policy, seed=args.seed)
    cp = critical_pair(dist, args.alpha)
    out = {
        "n": args.n,
        "x": args.x,
        "alpha": args.alpha,
        "k": int(cp.k),
        "gamma": cp.gamma,
        "phi": rep.phi,
        "p_lower": rep.fuzzy.lower,
        "p_upper": rep.fuzzy.upper,
        "step": rep.step,
        "policy": rep.policy_used,
        "u": rep.u_value,
        "p": rep.p_value,
        "decision": rep.decision,
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_multi(args) -> int:
    ids, hyps = _load(args)
    policy = parse_policy(args.u_policy, args.seed)
    procedure = build_procedure(args, hyps)
    config = _config(args, need_seed=False)
    report = run_multi_method(hyps, procedure, args.alpha, policy, config, ids=ids)
    if args.out:
        data.emit_report_csv(report.rows, args.out)
    else:
        data.write_report(report.rows, sys.stdout)
    s = report.summary
    msg = (
        f"{report.procedure} alpha={args.alpha:g} B={config.B} policy={report.policy}: "
        f"auto-reject={s['auto-reject']} auto-retain={s['auto-retain']} group3={s['group3']} "
        f"(rejected {s['group3-reject']}, expected {s['expected-group3-reject']:.3f}) R={s['R']}"
    )
    if report.m_eff is not None:
        msg += f" M'={report.m_eff}"
    if args.format == "binomial":
        truth = data.read_truth_labels(args.data)
        if truth is not None:
            met = evaluate_decisions(report.decisions, truth)
            msg += f" V={met.V} FDP={met.fdp:.3f}"
    print(msg, file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.seed is None:
        raise InputError("--seed is required for simulate")
    records, truth = data.simulate_binomial_study(args.M, args.mu, args.p_null, args.p_alt, args.n_null, args.seed)
    if args.out:
        data.write_binomial_csv(records, args.out, truth)
    else:
        import csv

        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["id", "x", "n", "truth"])
        for r, t in zip(records, truth):
            w.writerow([r.id, r.x, r.n, t])
    return EXIT_OK


def cmd_hist(args) -> int:
    ids, hyps = _load(args)
    if args.hypothesis not in ids:
        raise InputError(f"unknown hypothesis id {args.hypothesis!r}")
    procedure = build_procedure(args, hyps)
    config = _config(args, need_seed=True)
    emp = empirical_adjusted_p(ids.index(args.hypothesis), hyps, procedure, config, args.bins, alpha=args.alpha)
    if args.out:
        data.emit_histogram_csv(emp, args.out)
    else:
        data.write_histogram(emp, sys.stdout)
    print(
        f"{args.hypothesis}: fraction of q <= {args.alpha:g} is {emp.fraction_below(args.alpha):.4f} "
        f"(min {np.min(emp.samples):.6g}, max {np.max(emp.samples):.6g})",
        file=sys.stderr,
    )
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser, mc: bool = True) -> None:
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    if mc:
        p.add_argument("--data", required=True)
        p.add_argument("--format", choices=["binomial", "two-sample"], default="binomial")
        p.add_argument("--mtp", choices=["bonferroni", "holm", "storey", "tarone", "tarone-mid"], default="holm")
        p.add_argument("--lambda", dest="lam", type=float, default=None, help="Storey lambda (default: alpha)")
        p.add_argument("--monotone", action="store_true", help="monotonize Storey adjusted p-values")
        p.add_argument("--B", type=int, default=1000)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fuzzyp", description="Randomized, mid and fuzzy p-values for discrete tests.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("single", help="one binomial test of p = 1/2 against p > 1/2")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--u-policy", default="mid")
    _add_common(p, mc=False)
    p.set_defaults(func=cmd_single)

    p = sub.add_parser("multi", help="multiple test functions and adjusted p-values for a dataset")
    _add_common(p)
    p.add_argument("--u-policy", default="mid")
    p.set_defaults(func=cmd_multi)

    p = sub.add_parser("simulate", help="simulate a binomial study")
    p.add_argument("--M", type=int, default=50)
    p.add_argument("--mu", type=float, default=15.0)
    p.add_argument("--p-null", type=float, default=0.5)
    p.add_argument("--p-alt", type=float, default=0.8)
    p.add_argument("--n-null", type=int, default=25)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("hist", help="histogram of one adjusted fuzzy p-value")
    _add_common(p)
    p.add_argument("--hypothesis", required=True)
    p.add_argument("--bins", type=int, default=30)
    p.set_defaults(func=cmd_hist)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
