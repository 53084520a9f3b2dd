"""Command-line front end.

Subcommands: moment, trace, diag, lambda, gamma, cumulant, mc, table,
cache.  Inputs are exact: words use the X / X* / [poly] grammar, functions
use rational-coefficient polynomial expressions, partitions use the
"{1,3|2,4}" block format.  Monte Carlo output is the only floating point
printed.

Exit codes: 0 success, 2 usage or parse error, 3 resource guard hit,
4 a verdict or table row failed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction

from . import cache as cache_mod
from .cumulants import CumulantSpec, alpha, consistency_report
from .errors import (ContractError, ResourceLimitError, UnboundedPolytopeError,
                     UnsupportedOrderError, WordSyntaxError)
from .funcspace import ONE
from .moments import (Word, centered_product_trace, expectation,
                      trace_moment, word_power)
from .montecarlo import (centered_decay, estimate_diagonal, estimate_trace,
                         growth_check)
from .parsing import parse_function, parse_word, render_function, render_word
from .partitions import PI4, SetPartition
from .transforms import gamma as gamma_map
from .transforms import lambda_function, lambda_point

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_VERDICT = 4


def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ContractError(f"bad rational {text!r}: {exc}") from None


def _parse_g_list(text: str, expected: int | None = None):
    gs = [parse_function(part) for part in text.split(";") if part.strip()]
    if expected is not None and len(gs) != expected:
        raise ContractError(f"expected {expected} functions separated by ';', "
                            f"got {len(gs)}")
    return gs


def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload))
    else:
        print(human)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="vandermoments",
        description="Exact asymptotic *-moments of random Vandermonde "
                    "matrices, with Monte Carlo verification.")
    ap.add_argument("--json", action="store_true",
                    help="emit line-delimited JSON instead of text")
    ap.add_argument("--cache-path", default=None,
                    help="JSON-lines cache file (default: "
                         "$VANDERMOMENTS_CACHE_PATH or in-memory)")
    ap.add_argument("--no-cache", action="store_true",
                    help="do not read or write a cache file")
    ap.add_argument("--seed", type=int, default=2024,
                    help="Monte Carlo master seed")
    ap.add_argument("--trials", type=int, default=2000,
                    help="Monte Carlo trials per estimate")
    ap.add_argument("--guard-override", action="store_true",
                    help="lift combinatorial guards (long words, large "
                         "partition sums)")

    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moment", help="expectation of a word in C[0,1]")
    p.add_argument("--word", required=True)

    p = sub.add_parser("trace", help="trace of the expectation (exact)")
    p.add_argument("--word", required=True)

    p = sub.add_parser("diag", help="limit diagonal profile value at t")
    p.add_argument("--word", required=True)
    p.add_argument("--t", required=True)

    p = sub.add_parser("lambda", help="partition map of n-1 functions")
    p.add_argument("--partition", required=True, metavar="{1,3|2,4}")
    p.add_argument("--g", required=True,
                   help="n-1 function expressions separated by ';'")
    p.add_argument("--t", default=None,
                   help="evaluate at this rational instead of returning "
                        "the full function")

    p = sub.add_parser("gamma", help="block trace-product map of n functions")
    p.add_argument("--partition", required=True)
    p.add_argument("--g", required=True,
                   help="n function expressions separated by ';'")

    p = sub.add_parser("cumulant", help="alternating cumulant maps")
    p.add_argument("--order", type=int)
    p.add_argument("--pattern", type=int, choices=(1, 2), default=1)
    p.add_argument("--b", default=None,
                   help="2n-1 function expressions separated by ';' "
                        "(default: all 1)")
    p.add_argument("--consistency", type=int, default=None, metavar="NMAX",
                   help="print the closed-form vs inversion-oracle table "
                        "up to order NMAX instead")

    p = sub.add_parser("mc", help="Monte Carlo estimates at finite N")
    p.add_argument("probe", nargs="?", default="trace",
                   choices=("trace", "diag", "decay", "growth"))
    p.add_argument("--word", default=None)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--Ns", default=None,
                   help="comma-separated list of sizes (enables the "
                        "convergence figure)")
    p.add_argument("--t", default=None, help="diagonal probe position")
    p.add_argument("--eps", default=None,
                   help="star pattern for decay, e.g. 11 or 1*1**")
    p.add_argument("--p", type=int, default=None, help="power for growth")
    p.add_argument("--allowance", type=float, default=0.0,
                   help="absolute tolerance added to the 3-sigma verdict")
    p.add_argument("--batches", type=int, default=32)
    p.add_argument("--out", default=None,
                   help="directory for the delimited report and its figure")

    p = sub.add_parser("table",
                       help="recompute the reference values and PASS/FAIL")
    p.add_argument("--out", default=None,
                   help="directory for table.tsv")

    p = sub.add_parser("cache", help="cache maintenance")
    p.add_argument("action", choices=("stats", "clear"))

    return ap


# ---------------------------------------------------------------------------
# command bodies
# ---------------------------------------------------------------------------

def _cmd_moment(args) -> int:
    word = parse_word(args.word)
    result = expectation(word, override=args.guard_override)
    _emit(args, {"word": render_word(word),
                 "value": result.value.to_json_dict(),
                 "text": render_function(result.value),
                 "stats": result.derivation_stats},
          render_function(result.value))
    return EXIT_OK


def _cmd_trace(args) -> int:
    word = parse_word(args.word)
    value = trace_moment(word, override=args.guard_override)
    _emit(args, {"word": render_word(word), "trace": str(value)}, str(value))
    return EXIT_OK


def _cmd_diag(args) -> int:
    word = parse_word(args.word)
    t = _parse_fraction(args.t)
    result = expectation(word, override=args.guard_override)
    value = result.value.eval_at(t)
    _emit(args, {"word": render_word(word), "t": str(t), "value": str(value)},
          str(value))
    return EXIT_OK


def _cmd_lambda(args) -> int:
    pi = SetPartition.from_text(args.partition)
    gs = _parse_g_list(args.g, pi.n - 1)
    if args.t is not None:
        t = _parse_fraction(args.t)
        value = lambda_point(pi, gs, t)
        _emit(args, {"partition": pi.to_text(), "t": str(t),
                     "value": str(value)}, str(value))
    else:
        fn = lambda_function(pi, gs)
        _emit(args, {"partition": pi.to_text(),
                     "function": fn.to_json_dict(),
                     "text": render_function(fn)}, render_function(fn))
    return EXIT_OK


def _cmd_gamma(args) -> int:
    pi = SetPartition.from_text(args.partition)
    gs = _parse_g_list(args.g, pi.n)
    fn = gamma_map(pi, gs)
    _emit(args, {"partition": pi.to_text(), "function": fn.to_json_dict(),
                 "text": render_function(fn)}, render_function(fn))
    return EXIT_OK


def _cmd_cumulant(args) -> int:
    if args.consistency is not None:
        rows = consistency_report(args.consistency)
        ok = True
        for row in rows:
            ok &= row.equal
            payload = {"pattern": row.pattern, "case": row.description,
                       "closed_form": row.closed_form,
                       "inversion": row.inversion, "equal": row.equal}
            _emit(args, payload,
                  f"{row.pattern:10s} {row.description:34s} "
                  f"{'EQUAL' if row.equal else 'DIFFER'}")
        return EXIT_OK if ok else EXIT_VERDICT
    if args.order is None:
        raise ContractError("--order is required (or use --consistency)")
    n = args.order
    bs = (_parse_g_list(args.b, 2 * n - 1) if args.b
          else [ONE] * (2 * n - 1))
    fn = alpha(CumulantSpec.of(n, args.pattern, bs))
    _emit(args, {"order": n, "pattern": args.pattern,
                 "function": fn.to_json_dict(),
                 "text": render_function(fn)}, render_function(fn))
    return EXIT_OK


def _analytic_trace(word: Word):
    try:
        return float(trace_moment(word)), None
    except (ResourceLimitError, ContractError):
        return None, None


def _cmd_mc(args) -> int:
    from . import reporting

    out_records = []
    figure = None
    failed = False
    if args.probe == "trace":
        if not args.word:
            raise ContractError("mc trace requires --word")
        word = parse_word(args.word)
        sizes = ([int(x) for x in args.Ns.split(",")] if args.Ns
                 else [args.N or 200])
        analytic, _ = _analytic_trace(word)
        reports = []
        for N in sizes:
            rep = estimate_trace(word, N, args.trials, args.seed,
                                 analytic=analytic, allowance=args.allowance)
            reports.append(rep)
            out_records.append(rep.to_json_dict())
            failed |= rep.verdict == "FAIL"
            _emit(args, rep.to_json_dict(),
                  f"N={N} mean={rep.mean.real:.6f}{rep.mean.imag:+.2e}i "
                  f"stderr={rep.stderr:.2e}"
                  + (f" analytic={analytic:.6f} {rep.verdict}"
                     if analytic is not None else ""))
        if args.out:
            figure = ("estimates.png",
                      lambda path: reporting.estimate_figure(reports, path))
    elif args.probe == "diag":
        if not (args.word and args.t):
            raise ContractError("mc diag requires --word and --t")
        word = parse_word(args.word)
        t = _parse_fraction(args.t)
        try:
            analytic = float(expectation(word).value.eval_at(t))
        except (ResourceLimitError, ContractError):
            analytic = None
        N = args.N or 100
        rep = estimate_diagonal(word, N, t, args.trials, args.seed,
                                analytic=analytic, allowance=args.allowance)
        out_records.append(rep.to_json_dict())
        failed |= rep.verdict == "FAIL"
        _emit(args, rep.to_json_dict(),
              f"N={N} t={t} h={rep.extra['h']} mean={rep.mean.real:.6f} "
              f"stderr={rep.stderr:.2e}"
              + (f" analytic={analytic:.6f} {rep.verdict}"
                 if analytic is not None else ""))
    elif args.probe == "decay":
        if not args.eps:
            raise ContractError("mc decay requires --eps")
        sizes = [int(x) for x in (args.Ns or "25,50,100,200").split(",")]
        report = centered_decay(args.eps, sizes, args.trials, args.seed,
                                batches=args.batches)
        out_records.append(report.to_json_dict())
        for row in report.rows:
            _emit(args, {"N": row.N, "magnitude": row.magnitude,
                         "stderr": row.stderr},
                  f"N={row.N} |mean|={row.magnitude:.3e} "
                  f"stderr={row.stderr:.1e}")
        slope_txt = "n/a" if report.slope is None else f"{report.slope:.3f}"
        _emit(args, {"slope": report.slope}, f"fitted log-log slope: {slope_txt}")
        if args.out:
            figure = ("decay.png",
                      lambda path: reporting.decay_figure(report, path))
    elif args.probe == "growth":
        if args.p is None:
            raise ContractError("mc growth requires --p")
        sizes = [int(x) for x in (args.Ns or "50,100,200").split(",")]
        report = growth_check(args.p, sizes, args.trials, args.seed)
        out_records.append(report.to_json_dict())
        for row in report.rows:
            _emit(args, {"N": row.N, "ratio": row.ratio,
                         "stderr": row.stderr},
                  f"N={row.N} ratio={row.ratio:.4f} stderr={row.stderr:.1e}")
        _emit(args, {"grows": report.grows},
              "ratio grows beyond noise" if report.grows
              else "no growth beyond noise")
        analytic, _ = _analytic_trace(word_power(Word.of(["X*", "X"]), args.p))
        if args.out:
            figure = ("growth.png",
                      lambda path: reporting.growth_figure(report, path,
                                                           analytic))
        failed |= report.grows
    if args.out:
        from . import reporting as rep_mod
        os.makedirs(args.out, exist_ok=True)
        data_path = os.path.join(args.out, f"mc_{args.probe}.jsonl")
        rep_mod.write_jsonl(data_path, out_records)
        if figure is not None:
            name, render = figure
            render(os.path.join(args.out, name))
    return EXIT_VERDICT if failed else EXIT_OK


def _table_rows(override: bool):
    xsx = Word.of(["X*", "X"])
    xxs = Word.of(["X", "X*"])
    rows = []

    def add(name, computed, expected):
        t0 = time.time()
        got = computed()
        rows.append({
            "check": name,
            "computed": got,
            "expected": expected,
            "pass": got == expected,
            "seconds": round(time.time() - t0, 3),
        })

    add("E(X*X) and E(XX*)",
        lambda: render_function(expectation(xsx).value) + " ; "
                + render_function(expectation(xxs).value),
        "1 ; 1")
    add("trace (X*X)^2", lambda: str(trace_moment(word_power(xsx, 2))), "2")
    add("trace (X*X)^3", lambda: str(trace_moment(word_power(xsx, 3))), "5")
    add("trace (XX*)^4", lambda: str(trace_moment(word_power(xxs, 4))), "44/3")
    add("E((X*X)^4)",
        lambda: render_function(expectation(word_power(xsx, 4)).value),
        "29/2 + t - t^2")
    add("crossing-pair map of (1,1,1)",
        lambda: render_function(lambda_function(PI4, [ONE, ONE, ONE])),
        "1/2 + t - t^2")
    add("scalar non-R-diagonality witness",
        lambda: str(centered_product_trace(
            [(word_power(xsx, 4), Fraction(44, 3)),
             (word_power(xxs, 2), Fraction(2)),
             (word_power(xsx, 4), Fraction(44, 3)),
             (word_power(xxs, 2), Fraction(2))],
            letter_guard=24, override=True)),
        "1/270")
    return rows


def _cmd_table(args) -> int:
    rows = _table_rows(args.guard_override)
    ok = True
    for row in rows:
        ok &= row["pass"]
        _emit(args, row,
              f"[{'PASS' if row['pass'] else 'FAIL'}] {row['check']:38s} "
              f"= {row['computed']}  ({row['seconds']}s)")
    if args.out:
        from .reporting import write_tsv
        os.makedirs(args.out, exist_ok=True)
        write_tsv(os.path.join(args.out, "table.tsv"),
                  ["check", "computed", "expected", "pass", "seconds"], rows)
    if not args.json:
        print("all checks passed" if ok else "SOME CHECKS FAILED",
              file=sys.stderr)
    return EXIT_OK if ok else EXIT_VERDICT


def _cmd_cache(args) -> int:
    c = cache_mod.default_cache()
    if args.action == "stats":
        _emit(args, c.stats(), json.dumps(c.stats(), indent=2))
    else:
        c.clear()
        _emit(args, {"cleared": True}, "cache cleared")
    return EXIT_OK


_COMMANDS = {
    "moment": _cmd_moment,
    "trace": _cmd_trace,
    "diag": _cmd_diag,
    "lambda": _cmd_lambda,
    "gamma": _cmd_gamma,
    "cumulant": _cmd_cumulant,
    "mc": _cmd_mc,
    "table": _cmd_table,
    "cache": _cmd_cache,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.no_cache:
        cache_mod.set_default_cache(cache_mod.LambdaCache(None))
    elif args.cache_path:
        cache_mod.set_default_cache(cache_mod.LambdaCache(args.cache_path))
    try:
        return _COMMANDS[args.command](args)
    except (WordSyntaxError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ResourceLimitError, UnsupportedOrderError,
            UnboundedPolytopeError) as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
