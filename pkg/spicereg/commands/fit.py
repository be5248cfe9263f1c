"""
fit: stream a CSV through the online SPICE predictor and save the model.
"""

from argparse import Namespace
from typing import Optional
import logging

from spicereg.commands.common import add_feature_arguments, add_solver_arguments, execute, feature_config_from_args, spice_config_from_args
from spicereg.errors import DataError
from spicereg.services.feature_service import FeatureMap
from spicereg.services.io_service import iter_samples, load_model, save_model
from spicereg.services.spice_service import SpiceModel

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("fit", help="Fit (or continue fitting) a SPICE model on a CSV stream")
    parser.add_argument("input", help="CSV of d input columns followed by the target")
    parser.add_argument("--out", required=True, help="Path of the model JSON to write")
    parser.add_argument("--model", default=None, help="Existing model to continue from; feature flags are ignored")
    parser.add_argument("--converge", action="store_true",
                        help="After streaming, cycle until the weights stop changing")
    add_feature_arguments(parser)
    add_solver_arguments(parser)
    parser.set_defaults(handler=handle)


def run_fit(args: Namespace) -> int:
    model: Optional[SpiceModel] = load_model(args.model) if args.model else None
    d = model.feature_map.d if model is not None else None
    rows_before = model.n if model is not None else 0

    for X_block, y_block in iter_samples(args.input, d):
        if model is None:
            model = SpiceModel(FeatureMap(feature_config_from_args(args, X_block.shape[1])),
                               spice_config_from_args(args))
            logger.info(f"Fitting {model}")
        model.stream(X_block, y_block)

    if model is None or model.n == rows_before:
        raise DataError("no rows")
    if args.converge:
        model.fit_to_convergence()

    save_model(model, args.out)
    print(f"n={model.n} nonzero={model.nonzero_count()} objective={model.objective():.10g}")
    return 0


def handle(args: Namespace) -> int:
    return execute(run_fit, args)
