"""Tabular average-reward (R-learning) opponent.

The learner sits in Y's seat.  Its state is the previous canonical outcome
(or a distinguished pre-game state) and it learns

    Q(w, a) <- (1 - alpha) Q(w, a) + alpha [(r - r*) + max_a' Q(w', a')]

where ``r*`` tracks the average reward of the greedy policy.  It moves only
on stages where the greedy action was played, by

    r* <- r* + beta [r - r* + max_a' Q(w', a') - max_a Q(w, a)]

The relative-value correction keeps ``r*`` from being dragged below the
greedy gain by the penalties that follow exploratory moves; without it the
whole Q table drifts upward for as long as exploration lasts.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .game import DEFAULT_PAYOFFS, PayoffParams, _as_strategy

__all__ = [
    "COOPERATE",
    "DEFECT",
    "INITIAL_STATE",
    "LearnerConfig",
    "LearnerState",
    "LearningTrace",
    "choose_action",
    "update",
    "run_learning_match",
]

COOPERATE, DEFECT = 0, 1
INITIAL_STATE = 4


@dataclass(frozen=True)
class LearnerConfig:
    alpha: float = 0.1
    beta: float = 0.01
    epsilon: float = 0.2
    epsilon_decay: float = 0.9999
    epsilon_floor: float = 0.001

    def __post_init__(self):
        if not (0 < self.alpha <= 1 and 0 < self.beta <= 1):
            raise ValueError("alpha and beta must lie in (0, 1]")
        if not (0 <= self.epsilon_floor <= self.epsilon <= 1):
            raise ValueError("need 0 <= epsilon_floor <= epsilon <= 1")
        if not 0 < self.epsilon_decay <= 1:
            raise ValueError("epsilon_decay must lie in (0, 1]")

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "epsilon": self.epsilon,
            "epsilon_decay": self.epsilon_decay,
            "epsilon_floor": self.epsilon_floor,
        }


@dataclass
class LearnerState:
    """Q table over 4 outcomes plus the pre-game state, and the reward estimate."""

    Q: np.ndarray = field(default_factory=lambda: np.zeros((5, 2)))
    r_star: float = 0.0
    alpha: float = 0.1
    beta: float = 0.01
    epsilon: float = 0.2

    @classmethod
    def from_config(cls, config: LearnerConfig) -> "LearnerState":
        return cls(np.zeros((5, 2)), 0.0, config.alpha, config.beta, config.epsilon)

    def greedy(self, w: int) -> int:
        q = self.Q[w]
        return DEFECT if q[DEFECT] > q[COOPERATE] else COOPERATE

    def policy(self) -> np.ndarray:
        """Greedy action per state (0 = C, 1 = D); index 4 is the pre-game state."""
        return np.array([self.greedy(w) for w in range(5)])


def choose_action(state: LearnerState, w: int, rng) -> int:
    """Epsilon-greedy action; ties go to cooperation."""
    if state.epsilon > 0 and rng.random() < state.epsilon:
        return int(rng.random() < 0.5)
    return state.greedy(w)


def update(state: LearnerState, w: int, a: int, r: float, w_next: int,
           greedy: bool = True) -> LearnerState:
    """One R-learning step, in place; also returns the state."""
    Q = state.Q
    dv = Q[w_next].max() - Q[w].max()
    Q[w, a] = (1 - state.alpha) * Q[w, a] + state.alpha * (r - state.r_star + Q[w_next].max())
    if greedy:
        state.r_star += state.beta * (r - state.r_star + dv)
    return state


@dataclass
class LearningTrace:
    outcomes: np.ndarray
    epsilon: np.ndarray
    r_star: np.ndarray
    policy: np.ndarray
    Q: np.ndarray
    params: PayoffParams = DEFAULT_PAYOFFS
    #: Largest |Q| entry seen at any stage of the run.
    q_abs_max: float = 0.0

    @property
    def x_payoffs(self):
        return self.params.sx[self.outcomes]

    @property
    def y_payoffs(self):
        return self.params.sy[self.outcomes]

    @property
    def x_avg(self):
        return np.cumsum(self.x_payoffs) / np.arange(1, len(self.outcomes) + 1)

    @property
    def y_avg(self):
        return np.cumsum(self.y_payoffs) / np.arange(1, len(self.outcomes) + 1)

    def tail_averages(self, window: int = 10_000):
        """Mean payoffs (sX, sY) over the last ``window`` stages."""
        return float(self.x_payoffs[-window:].mean()), float(self.y_payoffs[-window:].mean())

    def to_csv(self, fh=None, every: int = 1):
        own = fh is None
        fh = io.StringIO() if own else fh
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["format_version", "stage", "x_avg", "y_avg", "epsilon", "r_star"])
        xa, ya = self.x_avg, self.y_avg
        n = len(self.outcomes)
        for i in range(0, n, every):
            w.writerow([1, i + 1, repr(float(xa[i])), repr(float(ya[i])),
                        repr(float(self.epsilon[i])), repr(float(self.r_star[i]))])
        if (n - 1) % every:
            i = n - 1
            w.writerow([1, i + 1, repr(float(xa[i])), repr(float(ya[i])),
                        repr(float(self.epsilon[i])), repr(float(self.r_star[i]))])
        return fh.getvalue() if own else None


def run_learning_match(p, config: LearnerConfig = LearnerConfig(), stages: int = 100_000,
                       seed=0, params: PayoffParams = DEFAULT_PAYOFFS,
                       state: LearnerState | None = None) -> LearningTrace:
    """X plays memory-one ``p`` (cooperating first) against a learning Y."""
    if stages < 1:
        raise ValueError("stages must be >= 1")
    p = _as_strategy(p, "X").tolist()
    sy = params.sy.tolist()
    rng = np.random.default_rng(seed)
    state = LearnerState.from_config(config) if state is None else state
    ux = rng.random(stages)
    out = np.empty(stages, dtype=np.int8)
    eps_tr = np.empty(stages)
    rstar_tr = np.empty(stages)
    w = INITIAL_STATE
    qmax = float(np.abs(state.Q).max())
    for t in range(stages):
        greedy = state.greedy(w)
        a = choose_action(state, w, rng)
        x_coop = ux[t] < (1.0 if w == INITIAL_STATE else p[w])
        w_next = 2 * (not x_coop) + a
        update(state, w, a, sy[w_next], w_next, greedy=(a == greedy))
        qmax = max(qmax, abs(state.Q[w, a]))
        out[t] = w_next
        eps_tr[t] = state.epsilon
        rstar_tr[t] = state.r_star
        state.epsilon = max(state.epsilon * config.epsilon_decay, config.epsilon_floor)
        w = w_next
    return LearningTrace(out, eps_tr, rstar_tr, state.policy(), state.Q.copy(), params,
                         float(qmax))
