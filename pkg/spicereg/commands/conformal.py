"""
conformal: split-conformal intervals around a SPICE, ridge or LASSO fit.
"""

from argparse import Namespace
import json
import logging
import sys

import pandas as pd

from spicereg.commands.common import (
    add_feature_arguments,
    add_predictor_argument,
    add_solver_arguments,
    execute,
    feature_config_from_args,
    spice_config_from_args,
)
from spicereg.config import get_settings
from spicereg.models import CvConfig, PredictorName
from spicereg.services.conformal_service import SplitConformalRegressor, make_point_predictor
from spicereg.services.feature_service import FeatureMap
from spicereg.services.io_service import read_dataset, read_inputs, write_frame

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("conformal", help="Split-conformal prediction intervals")
    parser.add_argument("input", help="Training CSV of d input columns followed by the target")
    parser.add_argument("--query", default=None,
                        help="Rows to produce intervals for (default: the input rows); targets optional")
    parser.add_argument("--kappa-cov", type=float, default=None, help="Target coverage in (0, 1)")
    parser.add_argument("--seed", type=int, default=0, help="Split and CV seed")
    parser.add_argument("--out", default=None, help="Output CSV (stdout when omitted)")
    add_predictor_argument(parser)
    add_feature_arguments(parser)
    add_solver_arguments(parser)
    parser.set_defaults(handler=handle)


def run_conformal(args: Namespace) -> int:
    kappa_cov = args.kappa_cov if args.kappa_cov is not None else get_settings().DEFAULT_KAPPA_COV
    X, y = read_dataset(args.input)
    feature_map = FeatureMap(feature_config_from_args(args, X.shape[1]))
    predictor = make_point_predictor(PredictorName(args.predictor), feature_map,
                                     spice_config_from_args(args), CvConfig(seed=args.seed))
    regressor = SplitConformalRegressor(predictor, kappa_cov, seed=args.seed).fit(X, y)

    if args.query:
        X_query, y_query = read_inputs(args.query, X.shape[1])
    else:
        X_query, y_query = X, y
    y_hat, lower, upper = regressor.predict_intervals(X_query)
    write_frame(pd.DataFrame({"y_hat": y_hat, "lower": lower, "upper": upper}), args.out)

    if y_query is not None:
        summary = regressor.coverage(X_query, y_query)
        # Keep stdout a clean CSV when it carries the intervals.
        stream = sys.stdout if args.out else sys.stderr
        print(json.dumps(summary.model_dump()), file=stream)
    return 0


def handle(args: Namespace) -> int:
    return execute(run_conformal, args)
