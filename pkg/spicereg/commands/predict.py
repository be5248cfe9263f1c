from argparse import Namespace
import logging

import pandas as pd

from spicereg.commands.common import execute
from spicereg.services.io_service import load_model, read_inputs, write_frame

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("predict", help="Predict with a saved SPICE model")
    parser.add_argument("input", help="CSV of d input columns, optionally followed by the target")
    parser.add_argument("--model", required=True, help="Model JSON written by fit")
    parser.add_argument("--out", default=None, help="Output CSV (stdout when omitted)")
    parser.set_defaults(handler=handle)


def run_predict(args: Namespace) -> int:
    model = load_model(args.model)
    X, y = read_inputs(args.input, model.feature_map.d)
    y_hat = model.predict_batch(X)

    frame = pd.DataFrame({"y_hat": y_hat})
    if y is not None:
        frame["y"] = y
        frame["residual"] = y - y_hat
    logger.info(f"Predicted {len(frame)} rows with {model}")
    write_frame(frame, args.out)
    return 0


def handle(args: Namespace) -> int:
    return execute(run_predict, args)
