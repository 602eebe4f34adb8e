"""Exact simulation of one-dimensional SDEs with a local-time term at zero.

The library simulates dX = dW + bbar(X) dt + beta dL0(X) without any
discretization error, by rejection sampling built on closed-form laws of
the skew Brownian motion with drift.  An Euler baseline and a statistical
verification harness are included.
"""

__version__ = "0.1.0"

from .errors import AccuracyError, EnvelopeError, RejectionBudgetError

__all__ = ["AccuracyError", "EnvelopeError", "RejectionBudgetError", "__version__"]
