"""
Exception hierarchy.

Each error carries the process exit code the CLI reports for it.
"""


class SpiceRegError(Exception):
    """Base class for all spicereg failures"""
    exit_code = 1


class DataError(SpiceRegError, ValueError):
    """Malformed, empty or inconsistent input data"""
    exit_code = 2


class NumericalError(SpiceRegError, ArithmeticError):
    """Singular systems and non-finite solver state"""
    exit_code = 3


class NotFittedError(DataError):
    """Operation needs at least one ingested sample"""


class UnboundedIntervalError(DataError):
    """Calibrator has too few residuals for the requested coverage"""


class OracleGuardError(DataError):
    """Brute-force oracle called outside its combinatorial guard"""
