"""scikit-learn style wrappers and input validation.

The estimators follow the usual conventions: hyperparameters are stored
verbatim by ``__init__``, ``fit`` returns ``self`` and sets trailing
underscore attributes, and ``get_params``/``set_params``/``clone`` work.
Opponent strategies play the role of samples, one row of four cooperation
probabilities each.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from .exceptions import InfeasibleRegion, InvalidStrategy
from .game import MemoryOneStrategy, PayoffParams, batch_payoffs
from .learner import LearnerConfig, run_learning_match
from .synthesis import ControlSpec, classify_control, synthesize
from .verification import verify_spec

__all__ = [
    "check_payoffs",
    "check_strategy",
    "check_opponents",
    "check_spec",
    "MemoryOneController",
    "PayoffControlSynthesizer",
    "RLearner",
]


def check_payoffs(payoffs) -> PayoffParams:
    """Accept PayoffParams, a dict with R, T, S, P, or an ``(R, T, S, P)`` sequence."""
    if payoffs is None:
        return PayoffParams()
    if isinstance(payoffs, PayoffParams):
        return payoffs
    if isinstance(payoffs, dict):
        return PayoffParams.from_dict(payoffs)
    vals = np.asarray(payoffs, dtype=float).ravel()
    if vals.shape != (4,):
        raise ValueError(f"payoffs need 4 values (R, T, S, P), got {vals.size}")
    return PayoffParams(*vals)


def check_strategy(p, name: str = "p") -> np.ndarray:
    """Validate a single memory-one vector; returns a float array of shape (4,)."""
    if isinstance(p, MemoryOneStrategy):
        return np.asarray(p.probs)
    try:
        arr = check_array(np.asarray(p, dtype=float).reshape(1, -1), ensure_2d=True)[0]
    except ValueError as exc:
        raise InvalidStrategy(f"{name}: {exc}") from None
    if arr.shape != (4,):
        raise InvalidStrategy(f"{name} needs 4 probabilities, got {arr.size}")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise InvalidStrategy(f"{name} entries must lie in [0, 1], got {arr.tolist()}")
    return arr


def check_opponents(Q) -> np.ndarray:
    """Validate a batch of opponent strategies; returns shape (n, 4).

    A single flat vector of four probabilities is treated as one row.
    """
    if np.ndim(Q) == 1:
        Q = np.asarray(Q, dtype=float).reshape(1, -1)
    try:
        Q = check_array(Q, dtype=float)
    except ValueError as exc:
        raise InvalidStrategy(str(exc)) from None
    if Q.shape[1] != 4:
        raise InvalidStrategy(f"opponent rows need 4 probabilities, got {Q.shape[1]}")
    if Q.min() < 0.0 or Q.max() > 1.0:
        raise InvalidStrategy("opponent probabilities must lie in [0, 1]")
    return Q


def check_spec(spec) -> ControlSpec:
    if isinstance(spec, ControlSpec):
        return spec
    if isinstance(spec, str):
        return ControlSpec.from_json(spec)
    if isinstance(spec, dict):
        return ControlSpec.from_dict(spec)
    raise TypeError(f"cannot build a control spec from {type(spec).__name__}")


class MemoryOneController(TransformerMixin, BaseEstimator):
    """A fixed controller ``p`` seen as a map from opponents to payoff pairs.

    ``predict(Q)`` gives the long-run ``(sX, sY)`` against each row of ``Q``;
    ``transform(Q)`` gives the stationary outcome distributions.
    """

    def __init__(self, p=(1.0, 0.0, 1.0, 0.0), payoffs=(2.0, 3.0, -1.0, 0.0)):
        self.p = p
        self.payoffs = payoffs

    def fit(self, X=None, y=None):
        self.strategy_ = MemoryOneStrategy(tuple(check_strategy(self.p)))
        self.params_ = check_payoffs(self.payoffs)
        return self

    def predict(self, X):
        check_is_fitted(self, "strategy_")
        return batch_payoffs(self.strategy_, check_opponents(X), self.params_)

    def transform(self, X):
        check_is_fitted(self, "strategy_")
        return batch_payoffs(self.strategy_, check_opponents(X), self.params_, return_v=True)[1]


class PayoffControlSynthesizer(TransformerMixin, BaseEstimator):
    """Synthesize a controller for ``spec`` and expose it as an estimator.

    Parameters
    ----------
    spec : ControlSpec, dict or JSON string
    payoffs : (R, T, S, P), dict or PayoffParams
    verify : bool
        Run the sampling and corner checks after solving.
    n_verify, random_state : int
        Cloud size and seed for the verification step.

    Attributes
    ----------
    strategy_ : MemoryOneStrategy
    coef_ : ndarray of shape (4,)
    result_ : SynthesisResult
    system_ : LinearInequalitySystem
    control_class_ : ControlClass or None
    verification_ : VerificationReport or None
    """

    def __init__(self, spec=None, payoffs=(2.0, 3.0, -1.0, 0.0), verify=True, n_verify=5000,
                 random_state=0):
        self.spec = spec
        self.payoffs = payoffs
        self.verify = verify
        self.n_verify = n_verify
        self.random_state = random_state

    def fit(self, X=None, y=None):
        if self.spec is None:
            raise ValueError("spec must be set before fitting")
        spec = check_spec(self.spec)
        params = check_payoffs(self.payoffs)
        result = synthesize(spec, params)
        if not result.feasible:
            raise InfeasibleRegion(result.message, verdict=result.verdict)
        self.spec_ = spec
        self.params_ = params
        self.result_ = result
        self.system_ = result.system
        self.strategy_ = result.witness
        self.coef_ = np.asarray(result.witness.probs)
        self.control_class_ = classify_control(spec, params)
        self.verification_ = (
            verify_spec(self.strategy_, spec, self.n_verify, self.random_state, params)
            if self.verify else None
        )
        return self

    def predict(self, X):
        """Long-run payoff pairs ``(sX, sY)`` of the controller against each row of X."""
        check_is_fitted(self, "strategy_")
        return batch_payoffs(self.strategy_, check_opponents(X), self.params_)

    def transform(self, X):
        """Objective slacks, one column per objective (non-negative means satisfied)."""
        pay = self.predict(X)
        return np.column_stack([o.slack(pay[:, 0], pay[:, 1]) for o in self.spec_.objectives])

    def score(self, X, y=None):
        """Fraction of opponents for which every objective holds to 1e-9."""
        return float(np.mean(np.all(self.transform(X) >= -1e-9, axis=1)))


class RLearner(BaseEstimator):
    """R-learning opponent fitted by playing one match against a controller.

    ``fit(p)`` plays ``stages`` rounds against the memory-one vector ``p``.
    ``predict(states)`` returns the greedy action (0 = C, 1 = D) for outcome
    indices 0..3 (4 is the pre-game state).
    """

    def __init__(self, alpha=0.1, beta=0.01, epsilon=0.2, epsilon_decay=0.9999,
                 epsilon_floor=0.001, stages=100_000, random_state=0,
                 payoffs=(2.0, 3.0, -1.0, 0.0)):
        self.alpha = alpha
        self.beta = beta
        self.epsilon = epsilon
        self.epsilon_decay = epsilon_decay
        self.epsilon_floor = epsilon_floor
        self.stages = stages
        self.random_state = random_state
        self.payoffs = payoffs

    def fit(self, X, y=None):
        p = check_strategy(X, "controller")
        config = LearnerConfig(self.alpha, self.beta, self.epsilon, self.epsilon_decay,
                               self.epsilon_floor)
        self.trace_ = run_learning_match(p, config, int(self.stages), self.random_state,
                                         check_payoffs(self.payoffs))
        self.Q_ = self.trace_.Q
        self.policy_ = self.trace_.policy
        self.r_star_ = float(self.trace_.r_star[-1])
        self.tail_averages_ = self.trace_.tail_averages(min(10_000, int(self.stages)))
        return self

    def predict(self, X):
        check_is_fitted(self, "policy_")
        idx = np.asarray(X, dtype=int).ravel()
        if idx.size and (idx.min() < 0 or idx.max() > 4):
            raise ValueError("states must be outcome indices in 0..4")
        return self.policy_[idx]
