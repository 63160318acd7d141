"""Command-line front end: every workflow as a subcommand with JSON output.

Subcommands: seq-check, basis-eval, transform, expand-product,
expand-compose, verify, experiment.  JSON is the single source of truth
(numbers rendered as decimal strings); ``--format table`` derives a flat
human view.  Identical inputs produce bit-identical output.  Exit codes:
0 pass, 1 a check failed or a budget was exceeded, 2 usage/input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import mpmath
from mpmath import mp

from . import basis_fn, char_transform, expansion, sector, verify, weight_seq
from .errors import CarlemanError, PartitionBudgetError, PrecisionBudgetError
from .numeric import decimal_str

ENV_PRECISION = "CARLEMAN_PRECISION"
MIN_PRECISION = 30
MIN_DEPTH = 2


class UsageError(Exception):
    pass


def _default_precision() -> int:
    raw = os.environ.get(ENV_PRECISION)
    return int(raw) if raw else 50


def _parse_seq_tag(tag: str, depth: int, dps: int) -> weight_seq.WeightSequence:
    parts = tag.split(":")
    try:
        if parts[0] == "gevrey" and len(parts) == 2:
            return weight_seq.gevrey(Fraction(parts[1]), depth, dps=dps)
        if parts[0] == "power_gevrey" and len(parts) == 2:
            return weight_seq.power_gevrey(Fraction(parts[1]), depth, dps=dps)
        if parts[0] == "ones" and len(parts) == 1:
            return weight_seq.gevrey(0, depth, dps=dps)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad sequence tag {tag!r}: {exc}") from exc
    raise UsageError(f"unknown sequence tag {tag!r}")


def _sequence_from_args(args, depth: int, dps: int) -> weight_seq.WeightSequence:
    picked = [x for x in (args.gevrey, args.power_gevrey, args.custom,
                          args.seq) if x is not None]
    if len(picked) != 1:
        raise UsageError("specify exactly one of --gevrey/--power-gevrey/"
                         "--custom/--seq")
    if args.gevrey is not None:
        return weight_seq.gevrey(Fraction(args.gevrey), depth, dps=dps)
    if args.power_gevrey is not None:
        return weight_seq.power_gevrey(Fraction(args.power_gevrey), depth,
                                       dps=dps)
    if args.custom is not None:
        try:
            text = open(args.custom).read()
        except OSError as exc:
            raise UsageError(f"cannot read {args.custom}: {exc}") from exc
        try:
            if args.custom.endswith(".csv"):
                return weight_seq.from_csv(text, dps=dps)
            return weight_seq.from_json(text)
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            raise UsageError(f"malformed sequence file: {exc}") from exc
    return _parse_seq_tag(args.seq, depth, dps)


def _add_seq_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gevrey", metavar="A", help="factorial-power family")
    p.add_argument("--power-gevrey", metavar="A", help="j^(jA) family")
    p.add_argument("--custom", metavar="FILE", help="JSON/CSV sequence file")
    p.add_argument("--seq", metavar="TAG", help="tag, e.g. gevrey:1")


def _parse_grid(spec: str | None, s: sector.Sector):
    if spec is None:
        return sector.default_grid(s)
    try:
        n_r, n_theta, r_min, r_max, margin = spec.split(",")
        return sector.sample_grid(s, int(n_r), int(n_theta), r_min, r_max,
                                  margin)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad grid spec {spec!r} "
                         f"(want nr,ntheta,rmin,rmax,margin)") from exc


def _emit(args, payload: dict) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.format == "table":
        lines = []

        def walk(prefix, obj):
            if isinstance(obj, dict):
                for k in sorted(obj):
                    walk(f"{prefix}{k}.", obj[k])
            elif isinstance(obj, list):
                lines.append(f"{prefix[:-1]}\t{' '.join(map(str, obj))}")
            else:
                lines.append(f"{prefix[:-1]}\t{obj}")

        walk("", payload)
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_csv(path: str, W) -> None:
    with open(path, "w") as fh:
        fh.write("n,W_n\n")
        for n, w in enumerate(W):
            fh.write(f"{n},{decimal_str(w)}\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_seq_check(args) -> int:
    depth = args.depth
    M = _sequence_from_args(args, depth, args.precision)
    if M.depth < depth:
        raise UsageError(f"sequence provides depth {M.depth} < requested {depth}")
    lc_flag, lc_viol = weight_seq.is_log_convex(M)
    report = {
        "sequence": M.generator,
        "depth": depth,
        "lc": {"holds": lc_flag, "first_violation": lc_viol},
        "alg": weight_seq.check_alg(M, depth).to_json_dict(),
        "fdb": weight_seq.check_fdb(M, depth,
                                    budget_k=args.fdb_budget).to_json_dict(),
        "dc": weight_seq.check_dc(M, min(depth, M.depth - 1)).to_json_dict(),
        "mg": weight_seq.check_mg(M, depth).to_json_dict(),
    }
    if args.compare:
        L = _parse_seq_tag(args.compare, M.depth, args.precision)
        eq = weight_seq.equivalence_fit(M, L, depth)
        eq_rev = weight_seq.equivalence_fit(L, M, depth)
        report["equivalence"] = {
            "other": L.generator,
            "forward": eq.to_json_dict(),
            "reverse": eq_rev.to_json_dict(),
        }
    _emit(args, report)
    return 0


def cmd_basis_eval(args) -> int:
    try:
        fn = basis_fn.registry_get(args.fn)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    with mp.workdps(sector.GRID_DPS):
        p = sector.LogPoint(args.r, args.theta)
    value = fn.evaluate(p, args.precision)
    z = mp.mpc(value)
    _emit(args, {
        "fn": args.fn,
        "point": {"r": args.r, "theta": args.theta},
        "precision": args.precision,
        "value": [decimal_str(z.real, args.precision),
                  decimal_str(z.imag, args.precision)],
    })
    return 0


def cmd_transform(args) -> int:
    M = _sequence_from_args(args, args.depth, args.precision)
    try:
        fn = basis_fn.registry_get(args.fn)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    tfn = char_transform.transform_fn(M, fn, precision=args.precision)
    order = min(args.order, M.depth - 1)
    rvals = [tfn.r_truncated(j) for j in range(order)]
    payload = {
        "sequence": M.generator,
        "fn": args.fn,
        "term_count": tfn.term_count,
        "truncation_tol": decimal_str(tfn.truncation_tol),
        "r_values": [decimal_str(v) for v in rvals],
        "coefficients": [decimal_str(tfn.coefficient(j, args.precision))
                         for j in range(order)],
    }
    if args.r is not None:
        with mp.workdps(sector.GRID_DPS):
            p = sector.LogPoint(args.r, args.theta)
        z = mp.mpc(tfn.evaluate(p, args.precision))
        payload["value"] = [decimal_str(z.real, args.precision),
                            decimal_str(z.imag, args.precision)]
    _emit(args, payload)
    return 0


def _load_expansion(path: str) -> expansion.CertifiedExpansion:
    try:
        return expansion.from_json_dict(json.loads(open(path).read()))
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot load expansion {path}: {exc}") from exc


def cmd_expand_product(args) -> int:
    e1 = _load_expansion(args.file1)
    e2 = _load_expansion(args.file2)
    if args.alg_C is not None:
        C = Fraction(args.alg_C)
    else:
        C = weight_seq.check_alg(e1.seq, min(e1.order, e1.seq.depth)).A_fit
    prod = expansion.product(e1, e2, C)
    _emit(args, expansion.to_json_dict(prod))
    return 0


def cmd_expand_compose(args) -> int:
    outer = _load_expansion(args.outer)
    inner = _load_expansion(args.inner)
    if args.fdb_C is not None and args.fdb_B is not None:
        C, B = Fraction(args.fdb_C), Fraction(args.fdb_B)
    else:
        fit = weight_seq.check_fdb(outer.seq, min(outer.order, 25))
        C, B = fit.A_fit, fit.h_fit
    comp = expansion.compose(outer, inner, C, B)
    _emit(args, expansion.to_json_dict(comp))
    return 0


def cmd_verify(args) -> int:
    try:
        fn = basis_fn.registry_get(args.fn)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    M = _parse_seq_tag(args.seq, max(args.nmax + 1, MIN_DEPTH),
                       args.precision) if args.seq else \
        weight_seq.gevrey(0, max(args.nmax + 1, MIN_DEPTH))
    grid = _parse_grid(args.grid, fn.domain)
    report = verify.measure_remainders(fn, None, M, grid, args.nmax,
                                       precision=args.precision)
    payload = report.to_json_dict()
    payload["sequence"] = M.generator
    payload["grid"] = args.grid or "default"
    flags = {}
    if args.paper_bound is not None:
        bound = mp.mpf(args.paper_bound)
        flags["paper_bound_ok"] = bool(report.max_W() <= bound)
    payload["pass_flags"] = flags
    _emit(args, payload)
    if args.csv:
        _write_csv(args.csv, report.W)
    return 0 if all(flags.values()) else 1


def cmd_experiment(args) -> int:
    depth = args.depth
    M = _sequence_from_args(args, max(depth + 50, 96), args.precision)
    if args.kind == "product-necessity":
        rep = verify.product_necessity_experiment(
            M, Fraction(args.alpha), depth,
            alphaprime=Fraction(args.alphaprime) if args.alphaprime else None,
            precision=args.precision)
        _emit(args, rep.to_json_dict())
        return 0 if rep.passed else 1
    if args.kind == "compose-necessity":
        rep = verify.composition_closure_experiment(
            M, Fraction(args.alpha), depth,
            alphaprime=Fraction(args.alphaprime) if args.alphaprime else None,
            precision=args.precision)
        _emit(args, rep.to_json_dict())
        return 0 if rep.passed else 1
    if args.kind == "sector-image":
        tr = char_transform.characteristic_for(
            M, Fraction(args.alpha),
            alphaprime=Fraction(args.alphaprime) if args.alphaprime else None,
            order=min(24, M.depth - 2))
        f0 = basis_fn.constant_minus(tr.result, tr.expansion.coeffs[0])
        rep = verify.sector_image_check(
            f0, beta=Fraction(args.beta) if args.beta else None,
            r=args.r, alpha=Fraction(args.alpha),
            epsilon=Fraction(args.epsilon) if args.epsilon else None)
        _emit(args, rep.to_json_dict())
        return 0 if rep.passed else 1
    raise UsageError(f"unknown experiment {args.kind!r}")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="carleman",
        description="Weight-sequence growth checks, certified asymptotic "
                    "expansions, characteristic transforms, and remainder "
                    "verification sweeps.")
    top.add_argument("--config", metavar="FILE",
                     help="JSON file with default option values")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--precision", type=int, default=_default_precision())
        p.add_argument("--format", choices=("json", "table"), default="json")
        p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("seq-check", help="growth-condition fits for a sequence")
    common(p)
    _add_seq_options(p)
    p.add_argument("--depth", type=int, default=20)
    p.add_argument("--fdb-budget", type=int,
                   default=weight_seq.PARTITION_BUDGET_K)
    p.add_argument("--compare", metavar="TAG",
                   help="second sequence for equivalence constants")
    p.set_defaults(func=cmd_seq_check)

    p = sub.add_parser("basis-eval", help="evaluate a registered function")
    common(p)
    p.add_argument("--fn", required=True,
                   help="krs | etilde:<a> | falpha:<a>:<a'>")
    p.add_argument("--r", required=True)
    p.add_argument("--theta", default="0")
    p.set_defaults(func=cmd_basis_eval)

    p = sub.add_parser("transform", help="weighted-superposition transform")
    common(p)
    _add_seq_options(p)
    p.add_argument("--fn", required=True)
    p.add_argument("--depth", type=int, default=96)
    p.add_argument("--order", type=int, default=20)
    p.add_argument("--r", help="optional evaluation modulus")
    p.add_argument("--theta", default="0")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("expand-product", help="certified product of two "
                                              "expansion files")
    common(p)
    p.add_argument("--file1", required=True)
    p.add_argument("--file2", required=True)
    p.add_argument("--alg-C", help="explicit (alg) witness")
    p.set_defaults(func=cmd_expand_product)

    p = sub.add_parser("expand-compose", help="certified composition of two "
                                              "expansion files")
    common(p)
    p.add_argument("--outer", required=True)
    p.add_argument("--inner", required=True)
    p.add_argument("--fdb-C", help="explicit (FdB) constant")
    p.add_argument("--fdb-B", help="explicit (FdB) geometric factor")
    p.set_defaults(func=cmd_expand_compose)

    p = sub.add_parser("verify", help="remainder sweep against a sequence")
    common(p)
    p.add_argument("--fn", required=True)
    p.add_argument("--seq", help="sequence tag (default: constant ones)")
    p.add_argument("--nmax", type=int, default=20)
    p.add_argument("--grid", help="nr,ntheta,rmin,rmax,margin")
    p.add_argument("--paper-bound", help="upper bound every W_n must meet")
    p.add_argument("--csv", metavar="PATH", help="write the W_n table as CSV")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("experiment", help="necessity/geometry experiments")
    common(p)
    p.add_argument("kind", choices=("product-necessity", "compose-necessity",
                                    "sector-image"))
    _add_seq_options(p)
    p.add_argument("--alpha", required=True)
    p.add_argument("--alphaprime")
    p.add_argument("--beta")
    p.add_argument("--epsilon")
    p.add_argument("--r")
    p.add_argument("--depth", type=int, default=20)
    p.set_defaults(func=cmd_experiment)

    return top


def _apply_config(args) -> None:
    if not args.config:
        return
    try:
        overrides = json.loads(open(args.config).read())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"bad config file: {exc}") from exc
    if not isinstance(overrides, dict):
        raise UsageError("config must be a JSON object")
    for key, value in overrides.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) in (None, parser_default(attr)):
            setattr(args, attr, value)


def parser_default(attr: str):
    defaults = {"precision": _default_precision(), "format": "json",
                "depth": 20, "nmax": 20, "order": 20, "theta": "0"}
    return defaults.get(attr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        if args.precision < MIN_PRECISION:
            raise UsageError(f"precision must be >= {MIN_PRECISION}")
        if getattr(args, "depth", MIN_DEPTH) < MIN_DEPTH:
            raise UsageError(f"depth must be >= {MIN_DEPTH}")
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PartitionBudgetError, PrecisionBudgetError) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 1
    except CarlemanError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
