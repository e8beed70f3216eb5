"""Command-line surface over the library.

Exit codes: 0 success, 1 validation error (bad arguments, malformed input),
2 internal check failure (an identity the library asserts did not hold).
Errors go to stderr with the machine-parsable prefix "error:".
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import chargroup, harness, hopf, report, signature, trees
from .elemdiff import ExpField, bseries_increment, field_from_json
from .trees import parse_forest, render_forest, render_tree

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CHECK_FAILED = 2


class CheckFailed(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage by default; the contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(_fail(f"usage: {message}"))


def _fail(message):
    print(f"error: {message}", file=sys.stderr)
    return EXIT_VALIDATION


def _check_failed(message):
    print(f"error: check failed: {message}", file=sys.stderr)
    return EXIT_CHECK_FAILED


def _load_json(path):
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _print_json(payload):
    print(json.dumps(payload, indent=2, sort_keys=False))


def _infer_d(text, explicit):
    if explicit is not None:
        return explicit
    digits = [int(tok) for tok in _tokenize_labels(text)]
    return max(digits) if digits else 1


def _tokenize_labels(text):
    out, current = [], ""
    for ch in text:
        if ch.isdigit():
            current += ch
        else:
            if current:
                out.append(current)
            current = ""
    if current:
        out.append(current)
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_trees(args):
    members = trees.enumerate_trees(args.n, args.d)
    expected = trees.count_trees(args.n, args.d)
    if len(members) != expected:
        return _check_failed(
            f"enumeration found {len(members)} trees, recurrence predicts {expected}"
        )
    for tree in members:
        print(render_tree(tree))
    print(f"count {expected}")
    return EXIT_OK


def _cmd_sigma(args):
    forest = parse_forest(args.forest, _infer_d(args.forest, args.d))
    print(trees.symmetry_factor(forest))
    return EXIT_OK


def _cmd_ck(args):
    forest = parse_forest(args.forest, _infer_d(args.forest, args.d))
    _print_json(hopf.tensor_to_json(hopf.ck_coproduct(forest)))
    return EXIT_OK


def _cmd_gl(args):
    d = max(_infer_d(args.left, args.d), _infer_d(args.right, args.d))
    left = parse_forest(args.left, d)
    right = parse_forest(args.right, d)
    _print_json(hopf.lincomb_to_json(hopf.gl_product(left, right)))
    return EXIT_OK


def _cmd_duality(args):
    failures = 0
    for degree in range(1, args.n + 1):
        for forest in trees.enumerate_forests(degree, args.d):
            outcome = hopf.verify_duality(forest, args.d)
            if not outcome.ok:
                failures += 1
                print(f"MISMATCH {render_forest(forest)}", file=sys.stderr)
        print(f"degree {degree}: {trees.count_forests(degree, args.d)} forests checked")
    if failures:
        return _check_failed(f"duality identity violated on {failures} forests")
    print("duality verified")
    return EXIT_OK


def _cmd_sig(args):
    path = signature.path_from_json(_load_json(args.path))
    lo, hi = path.domain
    s, t = (args.interval if args.interval else (lo, hi))
    sig = signature.branched_signature(path, s, t, args.N, mode=args.mode)
    _print_json(chargroup.functional_to_json(sig))
    return EXIT_OK


def _cmd_grouplike(args):
    functional = chargroup.functional_from_json(_load_json(args.sig))
    verdict = chargroup.is_grouplike(functional)
    print("true" if verdict else "false")
    return EXIT_OK


def _cmd_taylor(args):
    field = field_from_json(_load_json(args.field))
    path = signature.path_from_json(_load_json(args.path))
    lo, hi = path.domain
    s, t = (args.interval if args.interval else (lo, hi))
    y0 = tuple(_fraction(tok) for tok in args.y0.split(","))
    sig = signature.branched_signature(path, s, t, args.N)
    exact = args.mode == chargroup.EXACT and not isinstance(field, ExpField)
    if exact:
        result = bseries_increment(field, sig, y0, args.N)
        print(",".join(f"{Fraction(v).numerator}/{Fraction(v).denominator}" for v in result))
    else:
        # the exponential field has irrational steps, so exact output is off
        result = bseries_increment(field, sig, tuple(float(v) for v in y0), args.N)
        print(",".join(repr(float(v)) for v in result))
    return EXIT_OK


def _cmd_remainder(args):
    cfg = harness.config_from_json(_load_json(args.config))
    rows = harness.remainder_experiment(cfg)
    with open(args.output, "w", encoding="utf-8", newline="") as handle:
        harness.write_remainder_csv(rows, handle)
    slopes = {}
    for N in cfg.degrees:
        subset = [row for row in rows if row.N == N]
        try:
            slopes[N] = harness.order_fit(subset)
            print(f"N={N} slope {slopes[N]:.4f}")
        except harness.DegenerateDataError as exc:
            print(f"N={N} slope unavailable: {exc}")
    if args.plot:
        report.plot_remainder(rows, args.plot, slopes)
    return EXIT_OK


def _cmd_optimality(args):
    rows = harness.optimality_probe(args.nmax, args.t)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as handle:
            harness.write_optimality_csv(rows, handle)
    for row in rows:
        print(f"N={row.N} ratio {row.ratio:.6f} (lower bracket {row.lower_bracket:.6f})")
    if args.plot:
        report.plot_optimality(rows, args.plot)
    bad = [row for row in rows if not row.lower_bracket <= row.ratio <= 1.0 + 1e-12]
    if bad:
        return _check_failed(f"{len(bad)} ratios left the alternating-series bracket")
    return EXIT_OK


def _cmd_neoclassical(args):
    grid = [_fraction(tok) for tok in args.grid.split(",")] if args.grid else [
        Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(2)
    ]
    violations = 0
    for a in grid:
        for b in grid:
            for n in range(args.n + 1):
                outcome = harness.neoclassical_check(args.p, a, b, n, args.constant)
                if not outcome.holds:
                    violations += 1
                    print(
                        f"VIOLATION a={a} b={b} n={n}: lhs={outcome.lhs!r} rhs={outcome.rhs!r}",
                        file=sys.stderr,
                    )
    checked = len(grid) ** 2 * (args.n + 1)
    print(f"checked {checked} cells at p={args.p} with constant {args.constant}")
    if violations:
        return _check_failed(f"neo-classical inequality violated on {violations} cells")
    return EXIT_OK


def _cmd_freegens(args):
    table = hopf.extract_free_generators(args.maxdeg, args.d)
    predicted = hopf.free_generator_counts(args.maxdeg, args.d)
    if table.counts != predicted:
        return _check_failed("extraction and series inversion disagree")
    for degree, gens in enumerate(table.generators, start=1):
        rendered = " ".join(render_tree(t) for t in gens)
        print(f"degree {degree}: {len(gens)} generators: {rendered}")
    return EXIT_OK


def _cmd_wordbound(args):
    truncation = int(args.p)  # [p]: generator degrees up to the integer part
    counts = hopf.free_generator_counts(truncation, 1)
    outcome = hopf.word_counts(counts, args.d, args.n)
    print("T " + ",".join(str(v) for v in outcome.sequence))
    print(f"K_p {outcome.kp}")
    if not outcome.bound_ok:
        return _check_failed("word count exceeded the geometric bound")
    print("bound ok")
    return EXIT_OK


def _cmd_decay(args):
    path = signature.path_from_json(_load_json(args.path))
    outcome = signature.factorial_decay_report(path, args.N, args.levels)
    if args.output:
        import csv

        with open(args.output, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(
                ["word", "s", "t", "degree", "value", "omega", "bound_core", "fitted_scale"]
            )
            for row in outcome.rows:
                writer.writerow(
                    [
                        " ".join(row.word),
                        repr(row.s),
                        repr(row.t),
                        row.degree,
                        repr(row.value),
                        repr(row.omega),
                        repr(row.bound_core),
                        repr(row.fitted_scale),
                    ]
                )
    print(f"rows {len(outcome.rows)}")
    print(f"beta {outcome.beta!r}")
    print(f"fitted_constant {outcome.fitted_constant!r}")
    if args.plot:
        report.plot_decay(outcome, args.plot)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser assembly
# ---------------------------------------------------------------------------

def build_parser():
    parser = _Parser(prog="brpath", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trees", help="enumerate and count labeled trees of one degree")
    p.add_argument("n", type=int)
    p.add_argument("d", type=int)
    p.set_defaults(func=_cmd_trees)

    p = sub.add_parser("sigma", help="symmetry factor of a forest")
    p.add_argument("forest")
    p.add_argument("--d", type=int, default=None)
    p.set_defaults(func=_cmd_sigma)

    p = sub.add_parser("ck", help="coproduct of a forest (JSON)")
    p.add_argument("forest")
    p.add_argument("--d", type=int, default=None)
    p.set_defaults(func=_cmd_ck)

    p = sub.add_parser("gl", help="grafting product of two forests (JSON)")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--d", type=int, default=None)
    p.set_defaults(func=_cmd_gl)

    p = sub.add_parser("duality", help="verify the product/coproduct duality up to degree n")
    p.add_argument("n", type=int)
    p.add_argument("d", type=int)
    p.set_defaults(func=_cmd_duality)

    p = sub.add_parser("sig", help="branched signature of a path (JSON)")
    p.add_argument("path")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--interval", nargs=2, type=_fraction, metavar=("S", "T"))
    p.add_argument("--mode", choices=(chargroup.EXACT, chargroup.NUMERIC),
                   default=chargroup.EXACT)
    p.set_defaults(func=_cmd_sig)

    p = sub.add_parser("grouplike", help="test a stored functional for grouplikeness")
    p.add_argument("sig")
    p.set_defaults(func=_cmd_grouplike)

    p = sub.add_parser("taylor", help="tree-indexed Taylor step for a field and path")
    p.add_argument("field")
    p.add_argument("path")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--y0", required=True, help="comma-separated rational start point")
    p.add_argument("--interval", nargs=2, type=_fraction, metavar=("S", "T"))
    p.add_argument("--mode", choices=(chargroup.EXACT, chargroup.NUMERIC),
                   default=chargroup.EXACT)
    p.set_defaults(func=_cmd_taylor)

    p = sub.add_parser("remainder", help="remainder-order experiment from a config")
    p.add_argument("config")
    p.add_argument("-o", "--output", required=True, help="CSV destination")
    p.add_argument("--plot", default=None, help="also render a log-log figure")
    p.set_defaults(func=_cmd_remainder)

    p = sub.add_parser("optimality", help="sharpness probe for the exponential field")
    p.add_argument("--Nmax", dest="nmax", type=int, required=True)
    p.add_argument("--t", type=_fraction, default=Fraction(1, 20))
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--plot", default=None)
    p.set_defaults(func=_cmd_optimality)

    p = sub.add_parser("neoclassical", help="fractional binomial inequality sweep")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid", default=None, help="comma-separated rational a/b values")
    p.add_argument("--constant", choices=("p", "p_squared"), default="p")
    p.set_defaults(func=_cmd_neoclassical)

    p = sub.add_parser("freegens", help="free generators of the grafting algebra")
    p.add_argument("--maxdeg", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.set_defaults(func=_cmd_freegens)

    p = sub.add_parser("wordbound", help="word counts over the generator alphabet")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=_cmd_wordbound)

    p = sub.add_parser("decay", help="factorial-decay report over dyadic intervals")
    p.add_argument("path")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--plot", default=None)
    p.set_defaults(func=_cmd_decay)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_VALIDATION
    try:
        return args.func(args)
    except CheckFailed as exc:
        return _check_failed(str(exc))
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        return _fail(str(exc))
    except RuntimeError as exc:
        # enumeration caps, solver non-convergence, structural inconsistencies
        return _check_failed(str(exc))


if __name__ == "__main__":
    sys.exit(main())
