"""Exception hierarchy for payoff_control."""


class PayoffControlError(Exception):
    """Base class for all errors raised by this package."""


class InvalidPayoffs(PayoffControlError, ValueError):
    """Stage payoffs violate the prisoner's dilemma ordering T > R > P > S."""


class InvalidStrategy(PayoffControlError, ValueError):
    """A memory-one strategy has a component outside [0, 1] or the wrong shape."""


class InvalidObjective(PayoffControlError, ValueError):
    """A control objective has parameters outside its admissible range."""


class InfeasibleRegion(PayoffControlError):
    """The requested payoff region misses one of the hull's boundary segments."""

    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class EmptyInterval(PayoffControlError, ValueError):
    """A componentwise bound interval is empty for the requested p2."""


class SingularChain(PayoffControlError, ArithmeticError):
    """The Markov chain has no unique stationary distribution even after perturbation."""
