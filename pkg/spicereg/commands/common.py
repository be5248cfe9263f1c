"""
Argument helpers shared by the subcommands, and the error-to-exit-code wrapper.
"""

from argparse import ArgumentParser, Namespace
from typing import Callable, List, Optional
import logging

from pydantic import ValidationError

from spicereg.errors import DataError, SpiceRegError
from spicereg.models import FeatureKind, FeatureMapConfig, MeanKind, PredictorName, ResidualUpdate, SpiceConfig

logger = logging.getLogger(__name__)

Handler = Callable[[Namespace], int]


def parse_float_list(text: Optional[str], d: int, name: str) -> Optional[List[float]]:
    """Comma-separated floats; a single value is broadcast to all d dimensions"""
    if text is None:
        return None
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise DataError(f"--{name}: {e}") from e
    if len(values) == 1:
        return values * d
    if len(values) != d:
        raise DataError(f"--{name} needs 1 or {d} values, got {len(values)}")
    return values


def parse_int_list(text: str, name: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise DataError(f"--{name}: {e}") from e


def add_feature_arguments(parser: ArgumentParser) -> None:
    group = parser.add_argument_group("feature map")
    group.add_argument("--features", choices=[k.value for k in FeatureKind], default=FeatureKind.LINEAR.value,
                       help="Penalized regressor family psi(x)")
    group.add_argument("--mean", choices=[k.value for k in MeanKind], default=MeanKind.CONSTANT.value,
                       help="Unpenalized mean block u(x)")
    group.add_argument("--m", type=int, default=None, help="Basis functions per dimension (Laplace maps)")
    group.add_argument("--half-widths", default=None,
                       help="Box half-widths L_1..L_d, comma-separated; one value is broadcast")
    group.add_argument("--centers", default=None,
                       help="Box centers c_1..c_d, comma-separated; one value is broadcast (default 0)")


def add_solver_arguments(parser: ArgumentParser) -> None:
    group = parser.add_argument_group("solver")
    group.add_argument("--cycles", type=int, default=None, help="Coordinate cycles L per sample")
    group.add_argument("--residual-update", choices=[m.value for m in ResidualUpdate], default=None,
                       help="Residual summary maintenance per sample")
    group.add_argument("--refresh-every", type=int, default=None,
                       help="Exact residual refresh period in incremental mode")
    group.add_argument("--inflation-c", type=float, default=None,
                       help="Enable Gaussian weight inflation c * sqrt(2 ln p + delta)")


def add_predictor_argument(parser: ArgumentParser) -> None:
    parser.add_argument("--predictor", choices=[p.value for p in PredictorName], default=PredictorName.SPICE.value,
                        help="Point predictor")


def feature_config_from_args(args: Namespace, d: int) -> FeatureMapConfig:
    return FeatureMapConfig(
        kind=FeatureKind(args.features),
        mean_kind=MeanKind(args.mean),
        d=d,
        m=args.m,
        half_widths=parse_float_list(args.half_widths, d, "half-widths"),
        centers=parse_float_list(args.centers, d, "centers"),
    )


def spice_config_from_args(args: Namespace) -> SpiceConfig:
    values = {
        "cycles": args.cycles,
        "residual_update": args.residual_update,
        "refresh_every": args.refresh_every,
        "inflation_c": args.inflation_c,
    }
    return SpiceConfig(**{key: value for key, value in values.items() if value is not None})


def execute(handler: Handler, args: Namespace) -> int:
    """
    Run a subcommand handler and translate failures into exit codes.

    Returns:
        0 on success, 1 for invalid configuration, otherwise the error's exit code
    """
    try:
        return handler(args) or 0
    except ValidationError as e:
        logger.error(f"{args.command}: invalid configuration: {e}")
        return 1
    except SpiceRegError as e:
        logger.error(f"{args.command} failed: {e}", exc_info=getattr(args, "verbose", False))
        return e.exit_code
    except Exception as e:
        logger.error(f"{args.command} failed unexpectedly: {e}", exc_info=True)
        return 1
