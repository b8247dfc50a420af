"""Command-line batch interface.

Exit codes: 0 success, 1 validation failure, 2 infeasibility report in
extended mode, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import sys

from netoff.clearing import clear
from netoff.fileio import (
    analyze_text,
    emit_extended_report,
    emit_report,
    ingest_liquidity,
    ingest_obligations,
)
from netoff.liquidity import (
    build_extended_matrix,
    check_balanced_feasibility,
    optimize_extended,
)
from netoff.model import (
    InternalInvariantError,
    ValidationError,
    build_liability_matrix,
    net_positions,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INFEASIBLE = 2
EXIT_INTERNAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netoff",
        description="Clear obligation networks by multilateral set-off.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_clear = sub.add_parser("clear", help="run trade-credit clearing on an obligations file")
    p_clear.add_argument("obligations")
    p_clear.add_argument("--out", default="out", help="output directory (default: out)")
    p_clear.add_argument("--graph", action="store_true", help="also write a DOT graph export")

    p_ext = sub.add_parser(
        "clear-extended",
        help="clear with account holdings and overdraft facilities",
    )
    p_ext.add_argument("obligations")
    p_ext.add_argument("liquidity")
    p_ext.add_argument("--out", default="out", help="output directory (default: out)")

    p_analyze = sub.add_parser("analyze", help="print net positions and cash-need diagnostics")
    p_analyze.add_argument("obligations")

    p_validate = sub.add_parser("validate", help="check an obligations file and report problems")
    p_validate.add_argument("obligations")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InternalInvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def _dispatch(args) -> int:
    if args.command == "validate":
        network, currency = ingest_obligations(args.obligations)
        suffix = f" [{currency}]" if currency else ""
        print(
            f"ok: {network.firm_count} firms, {len(network.obligations)} obligations, "
            f"total weight {network.total_weight()}{suffix}"
        )
        return EXIT_OK

    if args.command == "analyze":
        network, currency = ingest_obligations(args.obligations)
        sys.stdout.write(analyze_text(network, currency))
        return EXIT_OK

    if args.command == "clear":
        network, currency = ingest_obligations(args.obligations)
        result = clear(network)
        written = emit_report(result, network, args.out, graph=args.graph, currency=currency)
        print(
            f"cleared {result.cleared_weight} of {result.original_weight} "
            f"across {len(result.cycles)} cycles; residual {result.residual.matrix.total()}"
        )
        for path in written:
            print(f"wrote {path}")
        return EXIT_OK

    if args.command == "clear-extended":
        network, currency = ingest_obligations(args.obligations)
        sources = ingest_liquidity(args.liquidity, network)
        matrix = build_liability_matrix(network)
        report = check_balanced_feasibility(net_positions(matrix), sources)
        result = optimize_extended(build_extended_matrix(matrix, sources))
        written = emit_extended_report(result, report, network, args.out, currency=currency)
        print(
            f"discharged {result.discharged_weight} of {matrix.total()} "
            f"using {int(result.account_debits.sum())} from accounts and "
            f"{int(result.overdraft_draws.sum())} of overdraft"
        )
        for path in written:
            print(f"wrote {path}")
        if not report.feasible:
            print("liquidity is insufficient for full clearing", file=sys.stderr)
            return EXIT_INFEASIBLE
        return EXIT_OK

    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
