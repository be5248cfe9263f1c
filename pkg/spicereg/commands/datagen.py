from argparse import Namespace
import logging
import sys

from spicereg.commands.common import execute, parse_int_list
from spicereg.models import SparseStudentTConfig
from spicereg.services.datagen_service import SparseStudentTGenerator, write_csv

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("datagen", help="Sample the sparse Student-t generator to CSV")
    parser.add_argument("--rows", type=int, required=True, help="Number of rows")
    parser.add_argument("--d", type=int, default=None, help="Input dimension (default 100)")
    parser.add_argument("--support", default=None, help="Comma-separated 1-based active inputs")
    parser.add_argument("--rank", type=int, default=None, help="Input covariance rank (default d/2)")
    parser.add_argument("--nu", type=float, default=None, help="Student-t degrees of freedom (> 2)")
    parser.add_argument("--tail-fraction", type=float, default=None,
                        help="Share of input variance outside the rank-r part (default 0.1)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--replication", type=int, default=0, help="Independent data stream index")
    parser.add_argument("--no-header", action="store_true")
    parser.add_argument("--out", default=None, help="Output CSV (stdout when omitted)")
    parser.set_defaults(handler=handle)


def run_datagen(args: Namespace) -> int:
    values = {
        "d": args.d,
        "support": parse_int_list(args.support, "support") if args.support else None,
        "rank": args.rank,
        "nu": args.nu,
        "tail_fraction": args.tail_fraction,
        "seed": args.seed,
    }
    config = SparseStudentTConfig(**{key: value for key, value in values.items() if value is not None})
    X, y = SparseStudentTGenerator(config).sample(args.rows, args.replication)
    write_csv(X, y, args.out or sys.stdout, header=not args.no_header)
    return 0


def handle(args: Namespace) -> int:
    return execute(run_datagen, args)
