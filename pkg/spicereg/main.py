import argparse
import logging
import sys
from typing import List, Optional

from spicereg.commands import COMMANDS
from spicereg.config import get_settings

logger = logging.getLogger(__name__)


class CliParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with status 1"""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> CliParser:
    settings = get_settings()
    parser = CliParser(
        prog=settings.APP_NAME,
        description="Online sparse regression with the SPICE predictor, conformal intervals and oracle checks",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.VERSION}")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging and tracebacks")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
    for register in COMMANDS:
        register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    # Configure logging
    settings = get_settings()
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else settings.LOG_LEVEL,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    logger.debug(f"{settings.APP_NAME} {settings.VERSION}: {args.command}")
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
