"""Stage game, memory-one Markov chain and match simulation.

Outcomes are always indexed in the canonical order ``(CC, CD, DC, DD)`` where
the first letter is X's action.  A memory-one strategy stores its cooperation
probabilities from its *own* point of view, so the vector of player Y is
indexed ``(CC, DC, CD, DD)`` in canonical terms.  The one place that
reconciles the two conventions is :func:`build_transition_matrix`.
"""
from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import InvalidPayoffs, InvalidStrategy, SingularChain

__all__ = [
    "Outcome",
    "PayoffParams",
    "DEFAULT_PAYOFFS",
    "MemoryOneStrategy",
    "StationaryDistribution",
    "PayoffPair",
    "MatchTrace",
    "Y_PERMUTATION",
    "PERTURBATION",
    "build_transition_matrix",
    "stationary_distribution",
    "stationary_for",
    "expected_payoffs",
    "long_run_payoffs",
    "batch_payoffs",
    "akin_residual",
    "play_match",
]

#: Y's strategy index for each canonical outcome.
Y_PERMUTATION = (0, 2, 1, 3)

#: Interior perturbation applied to strategies whose chain is not regular.
PERTURBATION = 1e-6

# Condition number above which a direct stationary solve is treated as singular.
_SINGULAR_COND = 1e12


class Outcome(enum.IntEnum):
    CC = 0
    CD = 1
    DC = 2
    DD = 3

    @classmethod
    def from_actions(cls, x_cooperates: bool, y_cooperates: bool) -> "Outcome":
        return cls(2 * (not x_cooperates) + (not y_cooperates))

    @property
    def x_cooperated(self) -> bool:
        return self in (Outcome.CC, Outcome.CD)

    @property
    def y_cooperated(self) -> bool:
        return self in (Outcome.CC, Outcome.DC)

    def swapped(self) -> "Outcome":
        """The same outcome seen from the other player's side."""
        return Outcome(Y_PERMUTATION[self])


@dataclass(frozen=True)
class PayoffParams:
    """Prisoner's dilemma stage payoffs.

    Parameters
    ----------
    R, T, S, P : float
        Reward, temptation, sucker and punishment payoffs with ``T > R > P > S``.
    """

    R: float = 2.0
    T: float = 3.0
    S: float = -1.0
    P: float = 0.0

    def __post_init__(self):
        vals = (self.R, self.T, self.S, self.P)
        if not all(np.isfinite(vals)):
            raise InvalidPayoffs(f"payoffs must be finite, got {vals}")
        if not (self.T > self.R > self.P > self.S):
            raise InvalidPayoffs(
                f"need T > R > P > S, got R={self.R}, T={self.T}, S={self.S}, P={self.P}"
            )

    @property
    def sx(self) -> np.ndarray:
        """X's payoff over (CC, CD, DC, DD)."""
        return np.array([self.R, self.S, self.T, self.P], dtype=float)

    @property
    def sy(self) -> np.ndarray:
        """Y's payoff over (CC, CD, DC, DD)."""
        return np.array([self.R, self.T, self.S, self.P], dtype=float)

    @property
    def hull_vertices(self) -> np.ndarray:
        """Vertices (R,R), (T,S), (P,P), (S,T) of the feasible payoff hull, in order."""
        return np.array(
            [[self.R, self.R], [self.T, self.S], [self.P, self.P], [self.S, self.T]],
            dtype=float,
        )

    def scaled(self, factor: float, shift: float = 0.0) -> "PayoffParams":
        return PayoffParams(
            R=factor * self.R + shift,
            T=factor * self.T + shift,
            S=factor * self.S + shift,
            P=factor * self.P + shift,
        )

    def to_dict(self) -> dict:
        return {"R": self.R, "T": self.T, "S": self.S, "P": self.P}

    @classmethod
    def from_dict(cls, d) -> "PayoffParams":
        return cls(**{k: float(d[k]) for k in ("R", "T", "S", "P")})


DEFAULT_PAYOFFS = PayoffParams()


@dataclass(frozen=True)
class MemoryOneStrategy:
    """Four cooperation probabilities conditioned on the previous outcome.

    ``perspective="X"`` means the entries follow (CC, CD, DC, DD) with X's
    action first; ``perspective="Y"`` means (CC, DC, CD, DD), i.e. the owner's
    action is still listed first.  ``initial`` is the probability of
    cooperating on the first stage.
    """

    probs: tuple
    perspective: str = "X"
    initial: float = 1.0

    def __post_init__(self):
        arr = np.asarray(self.probs, dtype=float)
        if arr.shape != (4,):
            raise InvalidStrategy(f"expected 4 probabilities, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
            raise InvalidStrategy(f"probabilities must lie in [0, 1], got {arr.tolist()}")
        if self.perspective not in ("X", "Y"):
            raise InvalidStrategy(f"perspective must be 'X' or 'Y', got {self.perspective!r}")
        if not 0.0 <= self.initial <= 1.0:
            raise InvalidStrategy(f"initial cooperation probability {self.initial} not in [0, 1]")
        object.__setattr__(self, "probs", tuple(float(x) for x in arr))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.probs, dtype=dtype or float)

    def __iter__(self):
        return iter(self.probs)

    def __len__(self):
        return 4

    def __getitem__(self, i):
        return self.probs[i]

    def as_perspective(self, perspective: str) -> "MemoryOneStrategy":
        """Re-express in the other player's seat (swaps entries 2 and 3)."""
        if perspective == self.perspective:
            return self
        p = self.probs
        return MemoryOneStrategy((p[0], p[2], p[1], p[3]), perspective, self.initial)

    def perturbed(self, eps: float = PERTURBATION) -> "MemoryOneStrategy":
        arr = (1.0 - 2.0 * eps) * np.asarray(self.probs) + eps
        return MemoryOneStrategy(tuple(arr), self.perspective, self.initial)

    @property
    def is_deterministic(self) -> bool:
        return all(x in (0.0, 1.0) for x in self.probs)


def _as_strategy(s, role: str) -> np.ndarray:
    """Coerce ``s`` into the own-perspective vector for ``role`` ('X' or 'Y')."""
    if isinstance(s, MemoryOneStrategy):
        return np.asarray(s.as_perspective(role).probs)
    return np.asarray(MemoryOneStrategy(tuple(np.asarray(s, dtype=float).ravel()), role).probs)


def build_transition_matrix(p, q) -> np.ndarray:
    """Markov transition matrix between consecutive stage outcomes.

    ``p`` is X's strategy and ``q`` is Y's.  Plain sequences are read in the
    owner's perspective; tagged
    :class:`MemoryOneStrategy` objects are converted as needed.
    """
    p = _as_strategy(p, "X")
    q = _as_strategy(q, "Y")[list(Y_PERMUTATION)]
    M = np.empty((4, 4))
    M[:, 0] = p * q
    M[:, 1] = p * (1.0 - q)
    M[:, 2] = (1.0 - p) * q
    M[:, 3] = (1.0 - p) * (1.0 - q)
    return M


def _factor_matrix(M: np.ndarray):
    """Recover (p, q) from a product-form transition matrix, or None."""
    p = M[:, 0] + M[:, 1]
    qc = M[:, 0] + M[:, 2]
    rebuilt = build_transition_matrix(np.clip(p, 0, 1), np.clip(qc[list(Y_PERMUTATION)], 0, 1))
    if np.max(np.abs(rebuilt - M)) > 1e-12:
        return None
    return np.clip(p, 0, 1), np.clip(qc[list(Y_PERMUTATION)], 0, 1)


@dataclass(frozen=True)
class StationaryDistribution:
    """Long-run outcome frequencies of a chain.

    ``regular`` is False when the chain had to be perturbed by ``epsilon``
    before solving; ``matrix`` is the matrix that was actually solved.
    """

    v: np.ndarray
    regular: bool = True
    epsilon: float = 0.0
    matrix: np.ndarray = field(default=None, repr=False, compare=False)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.v, dtype=dtype or float)

    def residual(self) -> float:
        """Infinity norm of ``vM - v`` for the solved matrix."""
        return float(np.max(np.abs(self.v @ self.matrix - self.v)))


def _solve_stationary(M: np.ndarray):
    A = M.T - np.eye(4)
    A[-1, :] = 1.0
    if np.linalg.cond(A) > _SINGULAR_COND:
        return None
    b = np.array([0.0, 0.0, 0.0, 1.0])
    v = np.linalg.solve(A, b)
    # one refinement step keeps the residual at roundoff level near reducible chains
    v = v + np.linalg.solve(A, b - A @ v)
    v = np.clip(v, 0.0, None)
    return v / v.sum()


def stationary_distribution(M, eps: float = PERTURBATION) -> StationaryDistribution:
    """Unique stationary distribution of a row-stochastic 4x4 matrix.

    Chains without a unique stationary distribution are handled by replacing
    every strategy component ``u`` with ``(1 - 2 eps) u + eps`` and solving the
    rebuilt chain; the result is flagged ``regular=False``.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got {M.shape}")
    if np.any(M < -1e-12) or np.max(np.abs(M.sum(axis=1) - 1.0)) > 1e-12:
        raise ValueError("transition matrix is not row-stochastic")
    v = _solve_stationary(M)
    if v is not None:
        return StationaryDistribution(v, True, 0.0, M)
    factors = _factor_matrix(M)
    if factors is not None:
        p, q = factors
        Mp = build_transition_matrix((1 - 2 * eps) * p + eps, (1 - 2 * eps) * q + eps)
    else:
        Mp = (1.0 - 4 * eps) * M + eps
    v = _solve_stationary(Mp)
    if v is None:
        raise SingularChain("perturbed chain is still singular")
    return StationaryDistribution(v, False, eps, Mp)


def stationary_for(p, q, eps: float = PERTURBATION) -> StationaryDistribution:
    return stationary_distribution(build_transition_matrix(p, q), eps)


class PayoffPair(NamedTuple):
    sx: float
    sy: float


def expected_payoffs(v, params: PayoffParams = DEFAULT_PAYOFFS) -> PayoffPair:
    v = np.asarray(v, dtype=float)
    return PayoffPair(float(v @ params.sx), float(v @ params.sy))


def long_run_payoffs(p, q, params: PayoffParams = DEFAULT_PAYOFFS) -> PayoffPair:
    """Limit-of-means payoffs of X playing ``p`` against Y playing ``q``."""
    return expected_payoffs(stationary_for(p, q), params)


def akin_residual(p, q) -> float:
    """``(p - (1, 1, 0, 0)) . v``; vanishes for every regular pair."""
    v = stationary_for(p, q).v
    pt = _as_strategy(p, "X") - np.array([1.0, 1.0, 0.0, 0.0])
    return float(pt @ v)


def batch_payoffs(p, Q, params: PayoffParams = DEFAULT_PAYOFFS, return_v: bool = False):
    """Long-run payoff pairs of one X strategy against many Y strategies.

    Parameters
    ----------
    p : array-like of shape (4,)
    Q : array-like of shape (n, 4)
        Opponent strategies in Y's own perspective.

    Returns
    -------
    ndarray of shape (n, 2) with columns (sX, sY); also the (n, 4) stationary
    distributions when ``return_v`` is set.
    """
    p = _as_strategy(p, "X")
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    qc = Q[:, list(Y_PERMUTATION)]
    n = len(Q)
    M = np.empty((n, 4, 4))
    M[:, :, 0] = p * qc
    M[:, :, 1] = p * (1 - qc)
    M[:, :, 2] = (1 - p) * qc
    M[:, :, 3] = (1 - p) * (1 - qc)
    A = np.transpose(M, (0, 2, 1)) - np.eye(4)
    A[:, -1, :] = 1.0
    b = np.zeros((n, 4, 1))
    b[:, -1, 0] = 1.0
    V = np.empty((n, 4))
    cond = np.linalg.cond(A)
    ok = cond < _SINGULAR_COND
    if ok.any():
        Ao, bo = A[ok], b[ok]
        x = np.linalg.solve(Ao, bo)
        x = x + np.linalg.solve(Ao, bo - Ao @ x)
        V[ok] = x[:, :, 0]
    for i in np.flatnonzero(~ok):
        V[i] = stationary_distribution(M[i]).v
    V = np.clip(V, 0.0, None)
    V /= V.sum(axis=1, keepdims=True)
    pay = np.column_stack([V @ params.sx, V @ params.sy])
    return (pay, V) if return_v else pay


@dataclass
class MatchTrace:
    """Realized outcome sequence of one match and its running statistics."""

    outcomes: np.ndarray
    params: PayoffParams = DEFAULT_PAYOFFS

    @property
    def stages(self) -> int:
        return len(self.outcomes)

    @property
    def x_payoffs(self) -> np.ndarray:
        return self.params.sx[self.outcomes]

    @property
    def y_payoffs(self) -> np.ndarray:
        return self.params.sy[self.outcomes]

    def _running(self, values):
        return np.cumsum(values) / np.arange(1, len(values) + 1)

    @property
    def x_avg(self) -> np.ndarray:
        return self._running(self.x_payoffs)

    @property
    def y_avg(self) -> np.ndarray:
        return self._running(self.y_payoffs)

    @property
    def x_coop_freq(self) -> np.ndarray:
        return self._running(self.outcomes <= Outcome.CD)

    @property
    def y_coop_freq(self) -> np.ndarray:
        return self._running((self.outcomes == Outcome.CC) | (self.outcomes == Outcome.DC))

    @property
    def totals(self) -> PayoffPair:
        return PayoffPair(float(self.x_payoffs.sum()), float(self.y_payoffs.sum()))

    @property
    def averages(self) -> PayoffPair:
        return PayoffPair(float(self.x_payoffs.mean()), float(self.y_payoffs.mean()))

    def to_csv(self, fh=None) -> str | None:
        """Write ``format_version,stage,outcome,x_avg,y_avg,x_coop_freq,y_coop_freq`` rows."""
        own = fh is None
        fh = io.StringIO() if own else fh
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["format_version", "stage", "outcome", "x_avg", "y_avg", "x_coop_freq", "y_coop_freq"])
        names = [o.name for o in Outcome]
        cols = (self.x_avg, self.y_avg, self.x_coop_freq, self.y_coop_freq)
        for i, o in enumerate(self.outcomes):
            w.writerow([1, i + 1, names[o]] + [repr(float(c[i])) for c in cols])
        return fh.getvalue() if own else None


def _simulate_memory_one(p, q, p0, q0, stages, rng) -> np.ndarray:
    qc = q[list(Y_PERMUTATION)]
    u = rng.random((stages, 2))
    out = np.empty(stages, dtype=np.int8)
    px, py = p.tolist(), qc.tolist()
    cx, cy = p0, q0
    for t in range(stages):
        ux, uy = u[t]
        s = 2 * (ux >= cx) + (uy >= cy)
        out[t] = s
        cx, cy = px[s], py[s]
    return out


def _initial(s) -> float:
    return s.initial if isinstance(s, MemoryOneStrategy) else 1.0


def play_match(p, q, stages: int, seed=None, params: PayoffParams = DEFAULT_PAYOFFS) -> MatchTrace:
    """Simulate ``stages`` rounds between X and Y with a seeded generator.

    ``p`` and ``q`` may be memory-one vectors (owner's perspective,
    cooperating on stage 1 unless tagged otherwise) or any player object from
    :mod:`payoff_control.strategies`.
    """
    if stages < 1:
        raise ValueError("stages must be >= 1")
    from .strategies import MemoryOnePlayer, Player, simulate_batch

    rng = np.random.default_rng(seed)
    if not isinstance(p, Player) and not isinstance(q, Player):
        out = _simulate_memory_one(
            _as_strategy(p, "X"), _as_strategy(q, "Y"), _initial(p), _initial(q), stages, rng
        )
        return MatchTrace(out, params)
    px = p if isinstance(p, Player) else MemoryOnePlayer("X", _as_strategy(p, "X"), _initial(p))
    qy = q if isinstance(q, Player) else MemoryOnePlayer("Y", _as_strategy(q, "Y"), _initial(q))
    x, y = simulate_batch(px, qy, stages, 1, rng)
    return MatchTrace((2 * (~x[:, 0]) + (~y[:, 0])).astype(np.int8), params)
