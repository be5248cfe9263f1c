from .fit import register as register_fit
from .predict import register as register_predict
from .conformal import register as register_conformal
from .experiment import register as register_experiment
from .verify import register as register_verify
from .datagen import register as register_datagen

# Registration order is the order subcommands appear in --help
COMMANDS = [
    register_fit,
    register_predict,
    register_conformal,
    register_experiment,
    register_verify,
    register_datagen,
]

__all__ = [
    "COMMANDS",
    "register_fit",
    "register_predict",
    "register_conformal",
    "register_experiment",
    "register_verify",
    "register_datagen",
]
