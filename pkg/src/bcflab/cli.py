"""Command-line front end.

Every subcommand writes one canonical document to stdout: JSON with sorted
keys and compact separators (exact fractions as ``"num/den"`` strings,
enclosures as ``["lo","hi"]`` pairs) or CSV where requested. Exit status is
0 on success, 2 for invalid input and 3 when a computation fails or exceeds
its budget. ``BCFLAB_BUDGET`` overrides the default budget.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable

from . import cf, diophantine, dimension, ifs, jarnik, transform
from .errors import BcfLabError, BudgetExceededError, ScheduleError
from .numeric import DyadicInterval, format_fraction, parse_real

BUDGET_ENV = "BCFLAB_BUDGET"
DEFAULT_BUDGET = 10**7

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FAILURE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{BUDGET_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise UsageError(f"{BUDGET_ENV} must be a positive integer, got {raw!r}")
    return value


# ---------------------------------------------------------------------------
# argument types


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {text!r}")
    return value


def rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational such as 1/10 or 1e-4, got {text!r}") from None


def int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def family_name(text: str) -> str:
    name = text.upper()
    if name not in (ifs.BCF_FAMILY, ifs.GAUSS_FAMILY):
        raise argparse.ArgumentTypeError(f"family must be bcf or gauss, got {text!r}")
    return name


# ---------------------------------------------------------------------------
# output helpers


def canonical(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def frac(x: Fraction) -> str:
    return format_fraction(Fraction(x))


def enclosure(x: DyadicInterval) -> list[str]:
    return x.to_json()


def read_stream(args) -> cf.DigitStream:
    if args.stream is not None:
        text = args.stream
    elif args.input is not None and args.input != "-":
        text = Path(args.input).read_text()
    else:
        text = sys.stdin.read()
    try:
        return cf.DigitStream.from_text(text)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read digit stream: {exc}") from None


def render_stream(stream: cf.DigitStream, fmt: str) -> str:
    return stream.to_text() if fmt == "text" else stream.to_json() + "\n"


def _add_stream_input(p):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", help="digit-stream file (text or JSON); '-' for stdin")
    src.add_argument("--stream", help="inline digit stream (text or JSON)")


# ---------------------------------------------------------------------------
# subcommands


def cmd_expand(args) -> str:
    kind = cf.BCF if args.bcf else cf.RCF
    text = args.value if args.value is not None else sys.stdin.read().strip()
    try:
        x = parse_real(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"--value: {exc}") from None
    if args.count > args.budget:
        raise BudgetExceededError(f"count {args.count} exceeds the budget {args.budget}")
    stream = cf.bcf_digits(x, args.count) if kind == cf.BCF else cf.rcf_digits(x, args.count)
    return render_stream(stream, args.format)


def cmd_convert(args) -> str:
    stream = read_stream(args)
    target = args.to.upper()
    if target == stream.kind:
        out = stream if args.count is None else stream.truncate(args.count)
    elif target == cf.BCF:
        out = transform.rcf_to_bcf(stream, args.count)
    else:
        out = transform.bcf_to_rcf(stream, args.count)
    return render_stream(out, args.format)


def cmd_convergents(args) -> str:
    stream = read_stream(args)
    table = (cf.rcf_convergents if stream.kind == cf.RCF else cf.bcf_convergents)(stream, args.count)
    rows = [(n, p, q) for n, (p, q) in enumerate(table.rows())]
    if args.format == "csv":
        lines = ["n,numerator,denominator"] + [f"{n},{p},{q}" for n, p, q in rows]
        return "\n".join(lines) + "\n"
    return canonical({"kind": stream.kind,
                      "rows": [{"n": n, "p": str(p), "q": str(q)} for n, p, q in rows]})


def cmd_mu(args) -> str:
    stream = read_stream(args)
    fn = diophantine.mu_rcf_estimate if stream.kind == cf.RCF else diophantine.mu_bcf_estimate
    return canonical(fn(stream, args.window).to_dict())


def cmd_hits(args) -> str:
    stream = read_stream(args)
    if stream.kind == cf.BCF:
        stream = transform.bcf_to_rcf(stream)
    try:
        alpha = diophantine.parse_alpha(args.alpha)
    except ValueError as exc:
        raise UsageError(f"--alpha: {exc}") from None
    report = diophantine.good_hits(stream, alpha, args.window)
    if args.format == "csv":
        return report.to_csv()
    doc = report.to_dict()
    if args.bound is not None:
        doc["noHitThreshold"] = diophantine.no_hit_threshold(args.bound, alpha)
    return canonical(doc)


def cmd_interval(args) -> str:
    family = ifs.IfsFamily(args.family, args.alphabet or tuple(sorted(set(args.word))))
    fi = ifs.fundamental_interval(family, args.word)
    lo, hi = ifs.derivative_range(family, args.word)
    doc = {
        "family": family.kind,
        "word": ",".join(map(str, fi.word)),
        "interval": str(fi),
        "diameter": frac(ifs.interval_diameter(fi)),
        "derivativeRange": [frac(lo), frac(hi)],
        "distortion": enclosure(ifs.distortion(family, args.word)),
        "matrix": [str(v) for v in ifs.word_matrix(family, args.word).as_tuple()],
        "parabolicLetters": list(family.parabolic_letters()),
    }
    if args.x is not None:
        doc["image"] = frac(ifs.apply_word(family, args.word, args.x))
    return canonical(doc)


def cmd_dim(args) -> str:
    family = ifs.IfsFamily(args.family, args.alphabet)
    parabolic = family.parabolic_letters()
    doc = {"alphabet": list(family.alphabet), "family": family.kind, "depth": args.depth,
           "domain": args.domain}
    if parabolic:
        induced = dimension.induce_parabolic(family.alphabet, args.cutoff, family.kind)
        system = induced.system
        doc["cutoff"] = args.cutoff
        doc["tailDefect"] = frac(induced.tail_defect)
        doc["generators"] = len(system.generators)
    else:
        system = dimension.HyperbolicSystem(family, tuple((i,) for i in family.alphabet))
        doc["cutoff"] = None
        doc["tailDefect"] = "0"
    bracket = dimension.dim_bounds(system, args.depth, args.tol, args.budget, args.domain)
    doc["sLo"] = frac(bracket.s_lo)
    doc["sHi"] = frac(bracket.s_hi)
    doc["sLoDecimal"] = f"{float(bracket.s_lo):.6f}"
    doc["sHiDecimal"] = f"{float(bracket.s_hi):.6f}"
    doc["tolerance"] = frac(bracket.tolerance)
    if args.pressure_at is not None:
        p_lo, p_hi = dimension.pressure_bounds(system, args.pressure_at, args.depth, args.budget,
                                               args.domain)
        doc["pressure"] = {"s": frac(args.pressure_at), "pLo": enclosure(p_lo), "pHi": enclosure(p_hi)}
    return canonical(doc)


def cmd_seed_search(args) -> str:
    res = dimension.search_seed_words(args.alphabet, args.p, args.target_count)
    return canonical({
        "p": res.p,
        "words": [",".join(map(str, w)) for w in res.words],
        "gamma": frac(res.gamma),
        "gammaEnclosure": enclosure(res.gamma_enclosure),
        "maxSupDerivative": frac(res.max_sup_derivative),
        "dimLowerBound": frac(res.dim_lower_bound),
        "closedDisjoint": res.closed_disjoint,
    })


def cmd_construct(args) -> str:
    seed = dimension.search_seed_words(args.alphabet, args.p)
    try:
        schedule = jarnik.InsertionSchedule.make(
            args.alphabet, seed.words, seed.p, seed.gamma, epsilon=args.epsilon,
            lam=args.lam, t=args.t, alpha=args.alpha)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.digits > args.budget:
        raise BudgetExceededError(f"--digits {args.digits} exceeds the budget {args.budget}")
    try:
        source = jarnik.parse_seed_pattern(args.seed_pattern, len(schedule.words))
    except ValueError as exc:
        raise UsageError(f"--seed-pattern: {exc}") from None
    built = jarnik.build_stream(source, schedule, args.digits)
    report = jarnik.verify_good(built, args.verify_k, args.budget)
    for ins in built.complete_insertions:
        if args.verify_k is None or ins.k <= args.verify_k:
            jarnik.not2_positions(built, ins.k)
    doc = json.loads(jarnik.report_json(built, report))
    doc["firstPassK"] = report.first_pass_k
    doc["reachableK"] = report.reachable_k
    doc["digits"] = len(built.digits)
    if args.holder_k is not None:
        holder = jarnik.holder_check(schedule, [jarnik.parse_seed_pattern(args.seed_pattern,
                                                                          len(schedule.words))],
                                     range(args.holder_k + 1), budget=args.budget)
        doc["holder"] = holder.to_dict()
    if args.stream_out:
        Path(args.stream_out).write_text(built.stream.to_text())
    return canonical(doc)


@dataclass(frozen=True)
class Subcommand:
    handler: Callable
    operations: tuple[str, ...]


# Module operations reachable from each subcommand.
DISPATCH: dict[str, Subcommand] = {
    "expand": Subcommand(cmd_expand, ("rcf_digits", "bcf_digits")),
    "convert": Subcommand(cmd_convert, ("rcf_to_bcf", "bcf_to_rcf")),
    "convergents": Subcommand(cmd_convergents, ("rcf_convergents", "bcf_convergents")),
    "mu": Subcommand(cmd_mu, ("mu_rcf_estimate", "mu_bcf_estimate")),
    "hits": Subcommand(cmd_hits, ("good_hits",)),
    "interval": Subcommand(cmd_interval, ("mobius_compose", "apply_word", "fundamental_interval",
                                          "derivative_range", "distortion", "interval_diameter")),
    "dim": Subcommand(cmd_dim, ("pressure_bounds", "dim_bounds", "induce_parabolic")),
    "seed-search": Subcommand(cmd_seed_search, ("search_seed_words",)),
    "construct": Subcommand(cmd_construct, ("floor_exp", "choose_alpha", "minimal_m_sequence",
                                            "build_stream", "verify_good", "holder_check",
                                            "not2_positions")),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bcflab", description="Continued-fraction and Jarnik-set toolkit.")
    parser.add_argument("--budget", type=positive_int, default=None,
                        help=f"work budget (digits / words); default from {BUDGET_ENV} or {DEFAULT_BUDGET}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("expand", help="RCF or BCF digits of a rational or quadratic surd")
    kind = p.add_mutually_exclusive_group()
    kind.add_argument("--rcf", action="store_true")
    kind.add_argument("--bcf", action="store_true")
    p.add_argument("--value", help='e.g. 13/8 or "(-1+1*sqrt(5))/2"; stdin if omitted')
    p.add_argument("--count", type=positive_int, required=True)
    p.add_argument("--format", choices=("json", "text"), default="json")

    p = sub.add_parser("convert", help="transform a digit stream between RCF and BCF")
    _add_stream_input(p)
    p.add_argument("--to", type=str.upper, choices=(cf.RCF, cf.BCF), required=True)
    p.add_argument("--count", type=positive_int)
    p.add_argument("--format", choices=("json", "text"), default="json")

    p = sub.add_parser("convergents", help="convergent table of a digit stream")
    _add_stream_input(p)
    p.add_argument("--count", type=non_negative_int)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("mu", help="irrationality-exponent evidence over a window")
    _add_stream_input(p)
    p.add_argument("--window", type=positive_int, required=True)

    p = sub.add_parser("hits", help="indices satisfying Good's inequality")
    _add_stream_input(p)
    p.add_argument("--alpha", required=True, help="exact rational >= 2, e.g. 5/2")
    p.add_argument("--window", type=positive_int, required=True)
    p.add_argument("--bound", type=positive_int, help="also report the no-hit index for quotients <= bound")
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("interval", help="fundamental interval and derivative data of a word")
    p.add_argument("--family", type=family_name, default=ifs.BCF_FAMILY)
    p.add_argument("--word", type=int_list, required=True, help="comma-separated letters, e.g. 2,2,3")
    p.add_argument("--alphabet", type=int_list)
    p.add_argument("--x", type=rational, help="also apply the word to this rational")

    p = sub.add_parser("dim", help="certified dimension bracket")
    p.add_argument("--family", type=family_name, default=ifs.BCF_FAMILY)
    p.add_argument("--alphabet", type=int_list, required=True)
    p.add_argument("--depth", type=positive_int, default=1)
    p.add_argument("--tol", type=rational, default=Fraction(1, 10**6))
    p.add_argument("--cutoff", type=non_negative_int, default=64,
                   help="acceleration cutoff when the alphabet has a parabolic letter")
    p.add_argument("--domain", choices=("unit", "hull"), default="unit")
    p.add_argument("--pressure-at", type=rational, help="also report pressure bounds at this s")

    p = sub.add_parser("seed-search", help="seed words of length p")
    p.add_argument("--alphabet", type=int_list, required=True)
    p.add_argument("--p", type=positive_int, required=True)
    p.add_argument("--target-count", type=positive_int)

    p = sub.add_parser("construct", help="build and verify a stream with inserted 2-blocks")
    p.add_argument("--alphabet", type=int_list, required=True)
    p.add_argument("--p", type=positive_int, required=True)
    p.add_argument("--epsilon", type=rational)
    p.add_argument("--lambda", dest="lam", type=rational)
    p.add_argument("--t", type=positive_int)
    p.add_argument("--alpha", type=rational)
    p.add_argument("--digits", type=positive_int, required=True)
    p.add_argument("--seed-pattern", default="0,1", help='word indices to cycle, or "random:SEED"')
    p.add_argument("--verify-k", type=non_negative_int)
    p.add_argument("--holder-k", type=non_negative_int, help="also run the diameter comparison up to k")
    p.add_argument("--stream-out", help="write the constructed digit stream (text format) here")
    return parser


@dataclass(frozen=True)
class CommandRequest:
    command: str
    args: argparse.Namespace


@dataclass(frozen=True)
class Report:
    text: str
    exit_code: int


def parse(argv) -> CommandRequest:
    args = build_parser().parse_args(list(argv))
    if args.budget is None:
        args.budget = default_budget()
    if args.command == "dim" and args.tol <= 0:
        raise UsageError("dim: --tol must be positive")
    if args.command == "construct" and args.epsilon is None and args.lam is None:
        raise UsageError("construct: give --epsilon or --lambda")
    return CommandRequest(args.command, args)


def run(request: CommandRequest) -> Report:
    try:
        return Report(DISPATCH[request.command].handler(request.args), EXIT_OK)
    except UsageError as exc:
        return Report(f"error: {exc}\n", EXIT_USAGE)
    except ScheduleError as exc:
        return Report(f"error: {exc}\n", EXIT_USAGE)
    except BcfLabError as exc:
        return Report(f"error: {type(exc).__name__}: {exc}\n", EXIT_FAILURE)
    except ValueError as exc:
        return Report(f"error: {exc}\n", EXIT_USAGE)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        request = parse(argv)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    report = run(request)
    stream = sys.stdout if report.exit_code == EXIT_OK else sys.stderr
    stream.write(report.text)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
