"""Command-line front end.

Exit codes: 0 when every checked prediction matched, 1 on a mismatch,
2 on usage errors (bad arguments, unsupported parameters, budget).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __doc__ as PACKAGE_DOC, __version__
from .channel import rank_stats_csv
from .codes import FAMILIES, FamilyParams, WeightSet, build_family
from .decoder import BudgetExceeded, scan_csv
from .experiments import (
    load_h_fixture,
    run_appendix,
    run_decode,
    run_rank,
    run_rpattern,
    run_scan,
)
from .linalg import DEFAULT_RANK_TOL, RandomSource, sample_channel

SCHEMA_VERSION = 1
EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=200)
    common.add_argument("--m", type=_int_list, default=None, help="receive antennas (comma list for rank)")
    common.add_argument("--q", type=_int_list, default=[2], help="PAM sizes, comma separated")
    common.add_argument("--out", type=Path, default=None)
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--no-timestamp", action="store_true")
    common.add_argument("--family", choices=FAMILIES, default=None)
    common.add_argument("--n", type=int, default=None)
    common.add_argument("--t", type=int, default=None)
    common.add_argument("--standard", action="store_true",
                        help="herm family: canonical Hermitian basis (any n)")
    common.add_argument("--code-file", type=Path, default=None,
                        help="weight set JSON (from export-code) instead of --family")
    common.add_argument("--h-fixture", default=None,
                        help="channel JSON path, or fgd-example / herm3-example / natarajan-example")
    common.add_argument("--snr-db", type=float, default=None)
    common.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL,
                        help="relative singular value threshold for numerical rank")

    parser = argparse.ArgumentParser(prog="stbclab", description=PACKAGE_DOC)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("rank", parents=[common], help="Monte Carlo rank of the equivalent channel")
    p = sub.add_parser("rpattern", parents=[common], help="non-zero pattern of R from plain QR")
    p.add_argument("--identity-channel", action="store_true", help="use H = I_N")
    p = sub.add_parser("appendix", parents=[common], help="kernel-dimension checks")
    p.add_argument("--allow-full", action="store_true", help="permit M >= N")
    p = sub.add_parser("decode", parents=[common], help="decoder vs brute-force equivalence")
    p.add_argument("--instances", type=int, default=None, help="defaults to --trials")
    sub.add_parser("scan", parents=[common], help="sphere decoding complexity scan")
    sub.add_parser("export-code", parents=[common], help="write a weight set as JSON")
    return parser


def _family(args):
    if args.family is None:
        raise UsageError("--family is required")
    if args.family in ("herm", "natarajan-g2") and args.n is None:
        raise UsageError(f"--n is required for {args.family}")
    if args.family == "ryggz-basis" and (args.n is None or args.t is None):
        raise UsageError("--n and --t are required for ryggz-basis")
    params = FamilyParams(args.family, n=args.n, t=args.t, standard=args.standard)
    try:
        code = build_family(params)
    except ValueError as exc:
        raise UsageError(str(exc))
    return params, code


def _code(args):
    """(family params or None, weight set)."""
    if args.code_file is not None:
        try:
            return None, WeightSet.from_json(args.code_file.read_text())
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot load weight set: {exc}")
    return _family(args)


def _single_m(args, default=None):
    if args.m is None:
        if default is None:
            raise UsageError("--m is required")
        return default
    if len(args.m) != 1:
        raise UsageError("this command takes a single --m")
    return args.m[0]


def _header(args, command):
    lines = [f"# stbclab {command} schema v{SCHEMA_VERSION}"]
    if not args.no_timestamp:
        lines.append(f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}")
    return "\n".join(lines) + "\n"


def _emit(args, command, text):
    if args.format == "csv":
        text = _header(args, command) + text
    if args.out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        args.out.write_text(text)


def _to_json(doc):
    return json.dumps(doc, indent=1, default=lambda o: o.tolist() if isinstance(o, np.ndarray) else str(o)) + "\n"


def cmd_rank(args):
    params, code = _code(args)
    if args.m is None:
        raise UsageError("--m is required")
    if args.trials < 1 or any(m < 1 for m in args.m):
        raise UsageError("--trials and --m must be positive")
    if args.rank_tol <= 0:
        raise UsageError("--rank-tol must be positive")
    report = run_rank(params, args.m, args.trials, args.seed, code=None if params else code,
                      rel_tol=args.rank_tol)
    if args.format == "json":
        doc = [{"family": s.family, "N": s.n, "T": s.t, "K": s.k, "M": s.m, "trials": s.trials,
                "predicted_rank": s.predicted, "histogram": {str(k): v for k, v in s.histogram.items()},
                "match_fraction": s.match_fraction} for s in report.stats]
        _emit(args, "rank", _to_json(doc))
    else:
        _emit(args, "rank", rank_stats_csv(report.stats))
    return report.ok


def cmd_rpattern(args):
    _, code = _code(args)
    if args.identity_channel:
        h = np.eye(code.n, dtype=complex)
    elif args.h_fixture is not None:
        try:
            h = load_h_fixture(args.h_fixture)
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot load channel fixture: {exc}")
    else:
        h = sample_channel(code.n, _single_m(args), RandomSource(args.seed))
    if h.shape[0] != code.n:
        raise UsageError(f"channel has {h.shape[0]} rows, code needs {code.n}")
    report = run_rpattern(code, h)
    pat = report.pattern
    if args.format == "json":
        _emit(args, "rpattern", _to_json({
            "code": report.name, "rows": pat.rows, "cols": pat.cols, "rank": report.rank,
            "group_ranks": report.group_ranks, "zero_trailing_rows": pat.zero_trailing_rows,
            "mask": pat.mask.astype(int)}))
    else:
        text = (f"# code {report.name}  G {pat.rows}x{pat.cols}  rank {report.rank}  "
                f"group ranks {report.group_ranks}  zero trailing rows {pat.zero_trailing_rows}\n"
                + pat.render() + "\n")
        # the grid is not CSV; the schema header still applies
        _emit(args, "rpattern", text)
    return report.ok


def cmd_appendix(args):
    if args.n is None:
        raise UsageError("--n is required")
    m = _single_m(args)
    try:
        report = run_appendix(args.n, m, args.trials, args.seed, allow_full=args.allow_full)
    except ValueError as exc:
        raise UsageError(str(exc))
    rows = [{"trial": t.index, "N": report.n, "M": report.m,
             "hermitian_nullity": t.hermitian_nullity, "left_null_dim": t.left_null_dim,
             "min_component_kernel_dim": min(t.component_kernel_dims),
             "max_component_kernel_dim": max(t.component_kernel_dims),
             "min_augmented_rank": min(t.augmented_ranks), "max_augmented_rank": max(t.augmented_ranks),
             "passed": int(t.passed)} for t in report.trials]
    if args.format == "json":
        _emit(args, "appendix", _to_json({"N": report.n, "M": report.m, "failures": report.failures,
                                          "trials": rows}))
    else:
        _emit(args, "appendix", _dicts_csv(rows))
    return report.ok


def cmd_decode(args):
    _, code = _code(args)
    m = _single_m(args)
    instances = args.instances if args.instances is not None else args.trials
    snr = 10.0 if args.snr_db is None else args.snr_db
    rows = []
    ok = True
    for q in args.q:
        try:
            rep = run_decode(code, m, q, instances, args.seed, snr_db=snr)
        except BudgetExceeded as exc:
            raise UsageError(str(exc))
        ok &= rep.ok
        rows.append({"code": rep.code, "M": m, "q": q, "instances": instances, "snr_db": snr,
                     "mismatches": rep.mismatches,
                     "outer_candidates": ";".join(str(v) for v in sorted(rep.outer_candidates)),
                     "group_outer_candidates": ";".join("+".join(map(str, g)) for g in sorted(rep.group_outer_candidates)),
                     "avg_nodes_joint": f"{rep.avg_nodes_joint:.3f}",
                     "avg_nodes_multigroup": "" if rep.avg_nodes_multigroup is None else f"{rep.avg_nodes_multigroup:.3f}",
                     "symbol_errors_ml": rep.errors_vs_truth, "seed": args.seed})
    if args.format == "json":
        _emit(args, "decode", _to_json(rows))
    else:
        _emit(args, "decode", _dicts_csv(rows))
    return ok


def cmd_scan(args):
    params, code = _code(args)
    m = _single_m(args)
    snr = 20.0 if args.snr_db is None else args.snr_db
    report = run_scan(params, m, args.q, args.trials, args.seed, snr_db=snr,
                      code=None if params else code)
    extra = [{"group_exponents": ";".join(map(str, r.group_exponents)),
              "table_exponent": "" if report.table_exponent is None else report.table_exponent}
             for r in report.rows]
    if args.format == "json":
        doc = {"rows": [dict(zip(["code", "N", "T", "K", "M", "q", "K_prime", "exponent",
                                  "outer_candidates", "avg_nodes", "trials", "seed"], r.csv_row()), **e)
                        for r, e in zip(report.rows, extra)],
               "problems": report.problems}
        _emit(args, "scan", _to_json(doc))
    else:
        _emit(args, "scan", scan_csv(report.rows, extra))
    for p in report.problems:
        print(f"mismatch: {p}", file=sys.stderr)
    return report.ok


def cmd_export_code(args):
    _, code = _family(args)
    text = code.to_json() + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
    return True


def _dicts_csv(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


COMMANDS = {
    "rank": cmd_rank,
    "rpattern": cmd_rpattern,
    "appendix": cmd_appendix,
    "decode": cmd_decode,
    "scan": cmd_scan,
    "export-code": cmd_export_code,
}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        ok = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"stbclab {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK if ok else EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
