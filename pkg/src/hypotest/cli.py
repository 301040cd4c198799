"""Command-line front end.

Exit codes: 0 ok, 1 verification violation, 2 parse error, 3 validation
error, 4 precondition (gate) failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import config
from .bayes import Prior
from .distributions import Distribution, ThresholdChannel, validate
from .divergences import (
    chi2_spec,
    f_divergence,
    hellinger,
    hellinger_affinity,
    hellinger_spec,
    kl_spec,
    total_variation,
    tv_spec,
)
from .errors import DimensionMismatch, GateError, ValidationError
from .protocols import beta_star
from .quantize import best_threshold_channel, constructive_quantizer, hellinger_quantizer
from .sample_complexity import DEFAULT_N_MAX, NotFoundBelow, sc_bounds, sc_exact, sc_simplified
from .verify import SUITES, hardness_sweep, run_suite

EXIT_OK, EXIT_VIOLATION, EXIT_PARSE, EXIT_VALIDATION, EXIT_GATE = 0, 1, 2, 3, 4

F_SPECS = {"tv": tv_spec, "kl": kl_spec, "chi2": chi2_spec}


class ParseError(Exception):
    pass


@dataclass
class RunConfig:
    seed: int = 0
    trials: int | None = None
    tolerance: float = 1e-12
    caps: config.Caps | None = None
    permissive_delta: bool = False

    def __post_init__(self) -> None:
        if not (0 <= self.seed < 2**64):
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if self.trials is not None and self.trials < 1:
            raise ValidationError("trials must be at least 1")
        if not self.tolerance > 0:
            raise ValidationError("tolerance must be positive")


# ---------------------------------------------------------------------------
# formatting


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, ".17g")
    return s if any(c in s for c in ".en") else s + ".0"


def dumps(obj) -> str:
    """JSON with every float written to 17 significant digits."""
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    return _num(obj)


def _cell(x) -> str:
    return x if isinstance(x, str) else _num(x)


def write_csv(rows: list[dict], path: str | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(rows[0]))
    for r in rows:
        writer.writerow([_cell(v) for v in r.values()])
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


# ---------------------------------------------------------------------------
# input


def load_pair(path: str) -> tuple[Distribution, Distribution]:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: malformed JSON: {exc}") from exc
    if not isinstance(raw, dict) or "p" not in raw or "q" not in raw:
        raise ParseError(f"{path}: expected an object with 'p' and 'q'")
    labels = raw.get("labels")
    p, q = raw["p"], raw["q"]
    # each side may also be a distribution object {"labels": [..], "masses": [..]}
    for side in (p, q):
        if isinstance(side, dict) and "labels" in side:
            if labels is not None and side["labels"] != labels:
                raise ParseError(f"{path}: 'p' and 'q' disagree on labels")
            labels = side["labels"]
    p = p.get("masses") if isinstance(p, dict) else p
    q = q.get("masses") if isinstance(q, dict) else q
    if not isinstance(p, list) or not isinstance(q, list):
        raise ParseError(f"{path}: 'p' and 'q' must be mass arrays or objects with 'masses'")
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in p + q):
        raise ParseError(f"{path}: masses must be numbers")
    if labels is None:
        labels = list(range(len(p)))
    elif not isinstance(labels, list):
        raise ParseError(f"{path}: 'labels' must be an array")
    labels = [tuple(x) if isinstance(x, list) else x for x in labels]
    if not (len(labels) == len(p) == len(q)):
        raise DimensionMismatch("labels, p and q must have the same length")
    return validate(p, labels), validate(q, labels)


def parse_range(text: str, integer: bool = False) -> np.ndarray:
    """``START:STOP:COUNT`` (log-spaced), or ``START:STOP`` for integer grids."""
    parts = text.split(":")
    try:
        if integer:
            if len(parts) not in (2, 3):
                raise ValueError
            lo, hi = int(parts[0]), int(parts[1])
            step = int(parts[2]) if len(parts) == 3 else 1
            grid = np.arange(lo, hi + 1, step) if step > 0 else np.array([])
        else:
            if len(parts) != 3:
                raise ValueError
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
            if lo <= 0 or hi <= 0:
                raise ValueError
            grid = np.geomspace(lo, hi, count) if count > 0 else np.array([])
    except ValueError as exc:
        raise ParseError(f"bad range {text!r}") from exc
    if grid.size == 0:
        raise ParseError(f"range {text!r} is empty")
    return grid


# ---------------------------------------------------------------------------
# commands


def _spec(args):
    if args.f and args.f != "hellinger":
        return F_SPECS[args.f]()
    return hellinger_spec(args.lam)


def cmd_divergence(args) -> int:
    P, Q = load_pair(args.input)
    out = {
        "lambda": args.lam,
        "beta": hellinger_affinity(P, Q, args.lam),
        "h": hellinger(P, Q, args.lam),
        "tv": total_variation(P, Q),
    }
    if args.f:
        out["f"] = args.f
        out["divergence"] = f_divergence(P, Q, _spec(args))
    print(dumps(out))
    return EXIT_OK


def cmd_sample_complexity(args) -> int:
    P, Q = load_pair(args.input)
    prior = Prior(args.pi)
    b = sc_bounds(P, Q, prior, args.delta, permissive=args.permissive)
    out = {
        "lower": b.lower,
        "upper": b.upper,
        "exact": None,
        "lambda_star": b.lambda_star.value,
        "beta": b.beta_star_affinity,
    }
    if args.mode == "exact":
        e = sc_exact(P, Q, prior, args.delta, args.n_max)
        out["exact"] = None if isinstance(e, NotFoundBelow) else e
        if isinstance(e, NotFoundBelow):
            out["not_found_below"] = e.n_max
    elif args.mode == "simplified":
        out["simplified"] = sc_simplified(P, Q, prior, args.delta)
    print(dumps(out))
    return EXIT_OK


def _cells(ch: ThresholdChannel) -> list[list]:
    entries = ch.profile.entries
    return [[lab for e in entries[a:b] for lab in e.labels] for a, b in ch.cells]


def cmd_quantize(args) -> int:
    P, Q = load_pair(args.input)
    spec = _spec(args)
    if args.mode == "optimal":
        ch, value = best_threshold_channel(P, Q, args.levels, spec)
        out = {"mode": "optimal", "cells": _cells(ch), "achieved": value}
    else:
        if args.f and args.f != "hellinger":
            rep = constructive_quantizer(P, Q, spec, args.levels)
        else:
            rep = hellinger_quantizer(P, Q, args.lam, args.levels)
        out = {
            "mode": "constructive",
            "cells": _cells(rep.channel),
            "achieved": rep.achieved,
            "guarantee": rep.guarantee,
            "case_taken": rep.case_taken.value,
            "R": rep.R,
        }
    out["divergence"] = f_divergence(P, Q, spec)
    print(dumps(out))
    return EXIT_OK


def cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    fault = 100.0 if args.inject_fault else 1.0
    failed = []
    for name in names:
        res = run_suite(name, seed=args.seed, trials=args.trials, fault=fault)
        line = res.summary().rsplit(",", 1)[0]
        print(line)
        for note in res.notes:
            print(f"  {note}")
        print(f"  [{name}] {res.seconds:.1f}s", file=sys.stderr)
        if not res.ok:
            failed.append(res)
    for res in failed:
        print(dumps({"suite": res.name, "counterexample": res.counterexample}))
    print(f"{len(names) - len(failed)}/{len(names)} suites passed")
    return EXIT_VIOLATION if failed else EXIT_OK


def cmd_sweep(args) -> int:
    if args.param == "rho":
        rhos = parse_range(args.range)
        rows = hardness_sweep(rhos, args.lam, args.levels)
    elif args.param == "delta":
        if not args.input:
            raise ParseError("the delta sweep needs an input file")
        P, Q = load_pair(args.input)
        prior = Prior(args.pi)
        rows = []
        for delta in parse_range(args.range):
            b = sc_bounds(P, Q, prior, float(delta), permissive=args.permissive)
            e = sc_exact(P, Q, prior, float(delta), args.n_max)
            rows.append(
                {
                    "delta": float(delta),
                    "lambda_star": b.lambda_star.value,
                    "lower": b.lower,
                    "upper": b.upper,
                    "exact": "" if isinstance(e, NotFoundBelow) else e,
                }
            )
    else:
        if not args.input:
            raise ParseError("the D sweep needs an input file")
        P, Q = load_pair(args.input)
        spec = hellinger_spec(args.lam)
        H = hellinger(P, Q, args.lam)
        rows = []
        for D in parse_range(args.range, integer=True):
            D = int(D)
            _, best = best_threshold_channel(P, Q, D, spec)
            rep = hellinger_quantizer(P, Q, args.lam, D)
            rows.append(
                {
                    "D": D,
                    "H_lambda": H,
                    "best_threshold": best,
                    "beta_star": beta_star(P, Q, args.lam, D),
                    "constructive": rep.achieved,
                    "guarantee": rep.guarantee,
                }
            )
    write_csv(rows, args.csv)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypotest", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def lam_flag(p, default=0.5):
        p.add_argument("--lambda", dest="lam", type=float, default=default, help="Hellinger order")

    p = sub.add_parser("divergence", help="affinity, Hellinger-lambda and TV of a pair")
    p.add_argument("input")
    lam_flag(p)
    p.add_argument("--f", choices=["hellinger", "tv", "kl", "chi2"], help="also report this f-divergence")
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("sample-complexity", help="sample-complexity bounds and exact value")
    p.add_argument("input")
    p.add_argument("--pi", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--mode", choices=["bounds", "exact", "simplified"], default="bounds")
    p.add_argument("--n-max", type=int, default=DEFAULT_N_MAX)
    p.add_argument("--permissive", action="store_true", help="allow delta above pi/16 with a warning")
    p.set_defaults(func=cmd_sample_complexity)

    p = sub.add_parser("quantize", help="threshold quantizer with D outputs")
    p.add_argument("input")
    p.add_argument("--levels", type=int, required=True, help="number of outputs D")
    lam_flag(p)
    p.add_argument("--f", choices=["hellinger", "tv", "kl", "chi2"])
    p.add_argument("--mode", choices=["optimal", "constructive"], default="optimal")
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("verify", help="run the randomised property suites")
    p.add_argument("--suite", choices=["all", *SUITES], default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=None, help="override every suite's trial count")
    p.add_argument("--inject-fault", action="store_true", help="tighten all bounds 100x (harness self-test)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser(
        "sweep",
        help="CSV sweep over delta, D or rho",
        description=(
            "Columns. rho: rho,k,H_lambda,best_D<levels>,ratio (hard instances). "
            "delta: delta,lambda_star,lower,upper,exact (needs INPUT and --pi). "
            "D: D,H_lambda,best_threshold,beta_star,constructive,guarantee (needs INPUT). "
            "--range is START:STOP:COUNT (geometric) for rho and delta, START:STOP[:STEP] for D."
        ),
    )
    p.add_argument("input", nargs="?")
    p.add_argument("--param", choices=["delta", "D", "rho"], required=True)
    p.add_argument("--range", required=True)
    p.add_argument("--csv", help="output path (default stdout)")
    p.add_argument("--pi", type=float, default=0.5)
    lam_flag(p)
    p.add_argument("--levels", type=int, default=2)
    p.add_argument("--n-max", type=int, default=DEFAULT_N_MAX)
    p.add_argument("--permissive", action="store_true")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        caps = config.caps_from_env()
        config.CAPS.type_class, config.CAPS.transcript = caps.type_class, caps.transcript
        if getattr(args, "command", None) == "verify":
            RunConfig(seed=args.seed, trials=args.trials, caps=caps)
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except GateError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_GATE
    except ValidationError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
