"""Command-line interface.

Results are printed as JSON on stdout. Exit status is 0 on success, 1 on a
validation or domain error and 2 when a ``verify`` suite finds a
counterexample.
"""
from __future__ import annotations

import argparse
import functools
import csv
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import composition, group_privacy, ledger, mechanisms, reduction, subgaussian, verify
from .distributions import HeuristicDivergenceWarning
from .mechanisms import CdpBound, DpBound, GaussianMechanismSpec

EXIT_OK, EXIT_ERROR, EXIT_SUITE_FAILED = 0, 1, 2
SEED_ENV = "CDP_ACCOUNTANT_SEED"


class UsageError(ValueError):
    pass


@dataclass
class CommandResult:
    command: str
    inputs: dict
    outputs: dict
    warnings: list = field(default_factory=list)
    pretty: bool = False
    full_precision: bool = False

    def to_json(self) -> dict:
        return {"command": self.command, "inputs": self.inputs, "outputs": self.outputs,
                "warnings": self.warnings}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return float(parts[0]), float(parts[1])


def build_parser() -> argparse.ArgumentParser:
    output = _Parser(add_help=False)
    output.add_argument("--pretty", action="store_true", default=argparse.SUPPRESS,
                        help="human-readable table instead of JSON")
    output.add_argument("--full-precision", action="store_true", default=argparse.SUPPRESS,
                        help="print shortest round-trip floats instead of 9 significant digits")
    parser = _Parser(prog="cdp-accountant", parents=[output],
                     description="Concentrated differential privacy accounting.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser = functools.partial(sub.add_parser, parents=[output])

    p = sub.add_parser("calibrate", help="noise scale for a target guarantee")
    p.add_argument("--mechanism", choices=["gaussian"], default="gaussian")
    p.add_argument("--sensitivity", type=float, required=True)
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--cdp", type=_pair, metavar="MU,TAU")
    target.add_argument("--dp", type=_pair, metavar="EPS,DELTA")

    p = sub.add_parser("convert", help="pure DP epsilon to a CDP bound")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--search-extremal", action="store_true",
                   help="numerically maximize KL under the max-divergence constraint")
    p.add_argument("--support", type=int, default=3)

    p = sub.add_parser("compose", help="compose a JSON list of bounds")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--to-dp", type=float, metavar="DELTA")

    p = sub.add_parser("advanced", help="advanced composition of (eps, delta')-DP mechanisms")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--delta-prime", type=float, default=0.0)

    p = sub.add_parser("group", help="group privacy bound")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--method", choices=["recursion", "closed-form"], default="recursion")
    p.add_argument("--inflate", action="store_true", help="raise tau to sqrt(2 mu) if needed")
    p.add_argument("--compose-k", type=int,
                   help="also report group-then-compose and compose-then-group for k copies")

    p = sub.add_parser("record", help="append an entry to a ledger file")
    p.add_argument("--ledger", required=True)
    p.add_argument("--label", required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--timestamp")

    p = sub.add_parser("tail", help="probability the ledger's cumulative loss reaches a threshold")
    p.add_argument("--ledger", required=True)
    p.add_argument("--threshold", type=float, required=True)

    p = sub.add_parser("verify", help="run a randomized property suite")
    p.add_argument("--suite", choices=sorted(verify.SUITES), required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trials", type=int)

    p = sub.add_parser("simulate", help="Monte Carlo samples of the Gaussian privacy loss")
    p.add_argument("--spec", help="JSON mechanism spec file")
    p.add_argument("--sensitivity", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    return parser


def _calibrate(args):
    if args.cdp is not None:
        target = CdpBound(*args.cdp)
        sigma = mechanisms.calibrate_gaussian_for_cdp(args.sensitivity, target)
        achieved = mechanisms.gaussian_cdp(GaussianMechanismSpec(args.sensitivity, sigma))
        return {"sigma": sigma, "achieved": achieved.to_json()}, []
    bound = DpBound(*args.dp)
    return {"sigma": mechanisms.calibrate_gaussian_for_dp(args.sensitivity, bound)}, []


def _convert(args):
    out = reduction.dp_to_cdp(args.epsilon).to_json()
    if args.search_extremal:
        out["extremal_search"] = reduction.search_extremal_kl(args.epsilon, args.support)
    return out, []


def _load_bounds(path):
    with open(path) as f:
        items = json.load(f)
    if not isinstance(items, list):
        raise ValueError("compose input must be a JSON array")
    bounds, epsilons = [], []
    for item in items:
        if "epsilon" in item:
            epsilons.append(float(item["epsilon"]))
            bounds.append(reduction.dp_to_cdp(float(item["epsilon"])))
        elif "mu" in item and "tau" in item:
            bounds.append(CdpBound(float(item["mu"]), float(item["tau"])))
        else:
            raise ValueError(f"entry {item!r} needs either 'epsilon' or 'mu' and 'tau'")
    return bounds, epsilons if len(epsilons) == len(items) else None


def _compose(args):
    bounds, epsilons = _load_bounds(args.infile)
    total = composition.compose_cdp(bounds)
    out = {"count": len(bounds), "total": total.to_json()}
    if args.to_dp is not None:
        out["dp"] = ledger.to_approx_dp(total, args.to_dp).to_json()
        if epsilons and len(set(epsilons)) == 1:
            out["advanced_composition"] = composition.advanced_composition(
                len(epsilons), epsilons[0], 0.0, args.to_dp).to_json()
    return out, []


def _advanced(args):
    res = composition.advanced_composition(args.k, args.epsilon, args.delta_prime, args.delta)
    return res.to_json(), []


def _group(args):
    bound = CdpBound(args.mu, args.tau)
    res = group_privacy.group_bound(bound, args.s, args.method, args.inflate)
    out = res.to_json()
    notes = list(res.warnings)
    if args.compose_k:
        k = args.compose_k
        group_first = composition.compose_cdp([res.bound] * k)
        compose_first = group_privacy.group_bound(
            composition.compose_cdp([bound] * k), args.s, args.method, args.inflate).bound
        out["orders"] = {
            "group_then_compose": group_first.to_json(),
            "compose_then_group": compose_first.to_json(),
        }
    return out, notes


def _record(args):
    current = ledger.load(args.ledger)
    updated = current.record(args.label, CdpBound(args.mu, args.tau), args.timestamp)
    ledger.save(updated, args.ledger)
    return {"entries": len(updated.entries), "total": updated.running_total.to_json()}, []


def _tail(args):
    if not os.path.exists(args.ledger):
        raise ValueError(f"ledger file {args.ledger!r} does not exist")
    led = ledger.load(args.ledger)
    return {
        "total": led.running_total.to_json(),
        "threshold": args.threshold,
        "exceedance_probability": ledger.exceedance_probability(led, args.threshold),
    }, []


def _verify(args):
    suite = verify.SUITES[args.suite]
    report = suite(args.seed) if args.trials is None else suite(args.seed, args.trials)
    return report.to_json(), []


def _simulate(args):
    if args.spec:
        with open(args.spec) as f:
            spec = GaussianMechanismSpec.from_json(json.load(f))
    elif args.sensitivity is not None and args.sigma is not None:
        spec = GaussianMechanismSpec(args.sensitivity, args.sigma)
    else:
        raise ValueError("simulate needs --spec or both --sensitivity and --sigma")
    samples = mechanisms.sample_gaussian_loss(spec, args.n, args.seed)
    bound = mechanisms.gaussian_cdp(spec)
    out = {
        "generator": mechanisms.GENERATOR,
        "seed": args.seed,
        "n": args.n,
        "bound": bound.to_json(),
        "sample_mean": float(samples.mean()),
        "sample_std": float(samples.std()),
    }
    if bound.tau > 0:
        out["tails"] = [
            {"t": t,
             "fraction": float(np.mean(samples >= bound.mu + t * bound.tau)),
             "bound": subgaussian.tail_bound(bound.tau, t)}
            for t in (1, 2, 3)
        ]
    if args.out:
        with open(args.out, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["loss"])
            writer.writerows([repr(float(x))] for x in samples)
        out["out"] = args.out
    return out, []


HANDLERS = {
    "calibrate": _calibrate,
    "convert": _convert,
    "compose": _compose,
    "advanced": _advanced,
    "group": _group,
    "record": _record,
    "tail": _tail,
    "verify": _verify,
    "simulate": _simulate,
}


def _round(obj, digits=9):
    if isinstance(obj, float):
        return float(f"{obj:.{digits}g}") if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _round(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v, digits) for v in obj]
    return obj


def _echo(args) -> dict:
    skip = {"command", "pretty", "full_precision"}
    return {k: v for k, v in vars(args).items() if k not in skip and v is not None}


def run(argv: list[str]) -> tuple[CommandResult | None, int, str]:
    """Execute ``argv``; returns the result, the exit code and an error message."""
    if SEED_ENV in os.environ:
        return None, EXIT_ERROR, f"{SEED_ENV} is not supported; pass --seed explicitly"
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return None, EXIT_ERROR, str(exc)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", HeuristicDivergenceWarning)
            outputs, notes = HANDLERS[args.command](args)
    except (ValueError, ArithmeticError, OSError, KeyError) as exc:
        return None, EXIT_ERROR, f"{type(exc).__name__}: {exc}"
    notes = notes + [str(w.message) for w in caught]
    result = CommandResult(args.command, _echo(args), outputs, notes,
                           pretty=getattr(args, "pretty", False),
                           full_precision=getattr(args, "full_precision", False))
    code = EXIT_OK
    if args.command == "verify" and not outputs["passed"]:
        code = EXIT_SUITE_FAILED
    return result, code, ""


def _render_pretty(payload: dict, prefix: str = "") -> list[str]:
    lines = []
    for key, value in payload.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            lines.extend(_render_pretty(value, name + "."))
        else:
            lines.append(f"{name:<40} {value}")
    return lines


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    result, code, error = run(argv)
    if result is None:
        print(f"error: {error}", file=sys.stderr)
        return code
    payload = result.to_json()
    if not result.full_precision:
        payload = _round(payload)
    if result.pretty:
        print("\n".join(_render_pretty(payload)))
    else:
        print(json.dumps(payload))
    if code == EXIT_SUITE_FAILED:
        print("property suite failed; counterexamples above", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
