"""
spicereg: online sparse regression with the SPICE predictor,
split-conformal intervals and verification oracles.
"""

__version__ = "1.0.0"
