"""Error types shared across the library.

Exactness forbids silent fallbacks: exhausted rejection budgets and envelope
violations abort loudly instead of degrading to an approximate sample.
"""


class RejectionBudgetError(RuntimeError):
    """A rejection sampler exhausted its attempt budget."""

    def __init__(self, message, attempts=None, index=None):
        super().__init__(message)
        self.attempts = attempts
        self.index = index


class EnvelopeError(RuntimeError):
    """A dominating constant was violated (ratio > 1); the envelope is unsound."""

    def __init__(self, message, ratio=None):
        super().__init__(message)
        self.ratio = ratio


class AccuracyError(RuntimeError):
    """Quadrature failed to reach the requested tolerance within budget."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
