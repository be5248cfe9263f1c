from argparse import Namespace
import logging

from spicereg.commands.common import execute
from spicereg.errors import NumericalError
from spicereg.services.verify_service import run_bound_suite

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("verify", help="Check the divergence bounds against the best-subset oracle")
    parser.add_argument("--seeds", type=int, default=100, help="Number of random instances")
    parser.add_argument("--seed", type=int, default=0, help="First instance seed")
    parser.add_argument("--n", type=int, default=40, help="Rows per instance")
    parser.add_argument("--p", type=int, default=8, help="Columns per instance (at most 16)")
    parser.add_argument("--k", type=int, default=2, help="Oracle sparsity (at most 3)")
    parser.add_argument("--inflation-trials", type=int, default=10000,
                        help="Trials of the Gaussian inflation check (0 skips it)")
    parser.add_argument("--min-premises", type=int, default=0,
                        help="Draw extra instances until each bound has this many with its premise satisfied")
    parser.add_argument("--all-checks", action="store_true",
                        help="Include the report of every individual check, not only the failures")
    parser.set_defaults(handler=handle)


def run_verify(args: Namespace) -> int:
    report = run_bound_suite(
        range(args.seed, args.seed + args.seeds),
        n=args.n,
        p=args.p,
        k=args.k,
        inflation_trials=args.inflation_trials or None,
        min_premises=args.min_premises,
        keep_reports=args.all_checks,
    )
    print(report.model_dump_json(indent=2, exclude=None if args.all_checks else {"reports"}))
    inflation_ok = report.inflation is None or report.inflation.passed
    if not (report.passed and inflation_ok):
        raise NumericalError(
            f"bound checks failed: {report.lasso_violations} LASSO and {report.spice_violations} SPICE violations"
        )
    return 0


def handle(args: Namespace) -> int:
    return execute(run_verify, args)
