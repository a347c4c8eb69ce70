"""Tournament players and the strategy catalog.

Every player is a stateless rule mapping the match history to a cooperation
decision.  Rules are vectorized over a batch of independent matches so a
whole set of tournament repetitions advances in lock-step: ``own`` and
``opp`` are boolean arrays of shape ``(stages, n)`` (True = cooperate) whose
first ``t`` rows are filled, and ``u`` holds one uniform draw per match.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .game import MemoryOneStrategy

__all__ = [
    "Player",
    "MemoryOnePlayer",
    "TitForTwoTats",
    "HardTitForTwoTats",
    "HardTitForTat",
    "HardMajority",
    "Prober",
    "Prober2",
    "Prober3",
    "HardProber",
    "Calculator",
    "StrategyDescriptor",
    "CLASSIC_JOSS",
    "catalog",
    "get_strategy",
    "simulate_batch",
]


class Player:
    name = "player"

    def move(self, t, own, opp, u):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


def _tft(t, opp, n):
    if t == 0:
        return np.ones(n, dtype=bool)
    return opp[t - 1].copy()


class MemoryOnePlayer(Player):
    """Plays four cooperation probabilities indexed by (own, opponent) last moves."""

    def __init__(self, name, probs, initial=1.0):
        self.name = name
        if isinstance(probs, MemoryOneStrategy):
            initial = probs.initial
            probs = probs.probs
        self.strategy = MemoryOneStrategy(tuple(float(x) for x in probs), "X", float(initial))
        self.probs = np.asarray(self.strategy.probs)
        self.initial = float(initial)

    def move(self, t, own, opp, u):
        if t == 0:
            return u < self.initial
        state = 2 * (~own[t - 1]) + (~opp[t - 1])
        return u < self.probs[state]


class TitForTwoTats(Player):
    """Defects only after two consecutive opponent defections."""

    name = "TF2T"

    def move(self, t, own, opp, u):
        if t < 2:
            return np.ones(u.shape, dtype=bool)
        return opp[t - 1] | opp[t - 2]


class HardTitForTwoTats(Player):
    """Defects if the opponent defected twice in a row anywhere in the last three moves."""

    name = "HARD_TF2T"

    def move(self, t, own, opp, u):
        c = np.ones(u.shape, dtype=bool)
        if t >= 2:
            c &= opp[t - 1] | opp[t - 2]
        if t >= 3:
            c &= opp[t - 2] | opp[t - 3]
        return c


class HardTitForTat(Player):
    """Defects if the opponent defected in any of the last three moves."""

    name = "HARD_TFT"

    def move(self, t, own, opp, u):
        if t == 0:
            return np.ones(u.shape, dtype=bool)
        return opp[max(0, t - 3):t].all(axis=0)


class HardMajority(Player):
    """Defects first, then defects whenever opponent defections >= cooperations."""

    name = "HARD_MAJO"

    def move(self, t, own, opp, u):
        if t == 0:
            return np.zeros(u.shape, dtype=bool)
        coops = opp[:t].sum(axis=0)
        return coops > t - coops


class _ProbeBase(Player):
    opening: tuple = ()

    def _trigger(self, opp):
        raise NotImplementedError

    def move(self, t, own, opp, u):
        if t < len(self.opening):
            return np.full(u.shape, self.opening[t], dtype=bool)
        verdict = self._trigger(opp)  # +1 defect forever, -1 cooperate forever, 0 TFT
        c = opp[t - 1].copy()
        c[verdict == 1] = False
        c[verdict == -1] = True
        return c


class Prober(_ProbeBase):
    """D, C, C; defects forever if the opponent cooperated on moves 2 and 3, else TFT."""

    name = "PROBE"
    opening = (False, True, True)

    def _trigger(self, opp):
        return np.where(opp[1] & opp[2], 1, 0)


class Prober2(_ProbeBase):
    """D, C, C; cooperates forever if the opponent answered D then C, else TFT."""

    name = "PROBE2"
    opening = (False, True, True)

    def _trigger(self, opp):
        return np.where(~opp[1] & opp[2], -1, 0)


class Prober3(_ProbeBase):
    """D, C; defects forever if the opponent cooperated on move 2, else TFT."""

    name = "PROBE3"
    opening = (False, True)

    def _trigger(self, opp):
        return np.where(opp[1], 1, 0)


class HardProber(_ProbeBase):
    """D, D, C, C; defects forever if the opponent cooperated on moves 2 and 3, else TFT."""

    name = "HARD_PROBE"
    opening = (False, False, True, True)

    def _trigger(self, opp):
        return np.where(opp[1] & opp[2], 1, 0)


def _has_cycle(history, max_period=12):
    """Column-wise: is the history a repetition of one of its prefixes?"""
    h = np.asarray(history)
    length = h.shape[0]
    found = np.zeros(h.shape[1], dtype=bool)
    for k in range(1, min(length // 2, max_period) + 1):
        found |= (h == h[np.arange(length) % k]).all(axis=0)
    return found


class Calculator(Player):
    """Joss for 20 moves, then ALLD if the opponent's play was periodic, else TFT.

    Joss cooperates with probability 0.9 after an opponent cooperation and
    copies the opponent otherwise.
    """

    name = "CALCULATOR"
    probe_length = 20

    def move(self, t, own, opp, u):
        if t == 0:
            return np.ones(u.shape, dtype=bool)
        if t < self.probe_length:
            return opp[t - 1] & (u < 0.9)
        periodic = _has_cycle(opp[: self.probe_length])
        return opp[t - 1] & ~periodic


def simulate_batch(x: Player, y: Player, stages: int, n: int, rng, noise: float = 0.0):
    """Play ``n`` independent matches of ``stages`` rounds in lock-step.

    With ``noise > 0`` each intended move is flipped independently with that
    probability (the extra draws are only made when noise is on, so
    noiseless runs are unaffected).  Returns boolean move arrays
    ``(x_moves, y_moves)`` of shape (stages, n).
    """
    if not 0.0 <= noise <= 1.0:
        raise ValueError(f"noise must lie in [0, 1], got {noise}")
    u = rng.random((stages, 2, n))
    flip = rng.random((stages, 2, n)) < noise if noise > 0 else None
    xm = np.zeros((stages, n), dtype=bool)
    ym = np.zeros((stages, n), dtype=bool)
    for t in range(stages):
        a = x.move(t, xm, ym, u[t, 0])
        b = y.move(t, ym, xm, u[t, 1])
        if flip is not None:
            a = a ^ flip[t, 0]
            b = b ^ flip[t, 1]
        xm[t] = a
        ym[t] = b
    return xm, ym


@dataclass(frozen=True)
class StrategyDescriptor:
    """Catalog entry: a named player plus where its definition comes from."""

    name: str
    kind: str  # "memory-one" | "finite-state"
    player: Player
    source: str
    p: tuple | None = None
    p_label: str = ""

    @property
    def first_move(self) -> str:
        if self.kind == "memory-one":
            init = self.player.initial
            return "C" if init == 1.0 else "D" if init == 0.0 else f"C w.p. {init:g}"
        return "D" if isinstance(self.player, (HardMajority, _ProbeBase)) else "C"


_TABLE = "tournament table"
_LIT = "standard finite-state definition"

# name, p as printed, first-move cooperation probability
_MEMORY_ONE = [
    ("ALTRUIST_G", ("1", "2/15", "1", "1/3"), 1.0),
    ("GENEROUS-2", ("1", "2/7", "1", "2/7"), 1.0),
    ("ALTRUIST_TFT", ("1", "0.182", "1", "0"), 1.0),
    ("GTFT", ("1", "2/3", "1", "2/3"), 1.0),
    ("TFT", ("1", "0", "1", "0"), 1.0),
    ("SELFISH_TFT", ("1", "0.1", "0.75", "0"), 1.0),
    ("WSLS", ("1", "0", "0", "1"), 1.0),
    ("ALLC", ("1", "1", "1", "1"), 1.0),
    ("GRIM", ("1", "0", "0", "0"), 1.0),
    ("RANDOM", ("1/2", "1/2", "1/2", "1/2"), 0.5),
    ("HARD_JOSS", ("0.9", "0", "1", "0"), 1.0),
    ("SELFISH_G", ("5/7", "0", "13/15", "0"), 1.0),
    ("ALLD", ("0", "0", "0", "0"), 0.0),
    ("EXTORT-2", ("6/7", "1/2", "5/14", "0"), 1.0),
]

_FINITE_STATE = [
    TitForTwoTats,
    HardTitForTwoTats,
    HardProber,
    Prober,
    Prober2,
    Prober3,
    HardTitForTat,
    HardMajority,
    Calculator,
]


#: The usual Joss vector: TFT that defects 10% of the time after a cooperation.
CLASSIC_JOSS = ("0.9", "0", "0.9", "0")


def catalog(joss: str = "table"):
    """The 23 tournament strategies: 14 memory-one rows plus 9 finite-state rules.

    ``joss="classic"`` swaps the tabulated HARD_JOSS vector for
    :data:`CLASSIC_JOSS`.
    """
    if joss not in ("table", "classic"):
        raise ValueError("joss must be 'table' or 'classic'")
    out = []
    for name, p_txt, init in _MEMORY_ONE:
        if name == "HARD_JOSS" and joss == "classic":
            p_txt = CLASSIC_JOSS
        p = tuple(float(Fraction(x)) for x in p_txt)
        out.append(
            StrategyDescriptor(
                name=name,
                kind="memory-one",
                player=MemoryOnePlayer(name, p, init),
                source=_TABLE,
                p=p,
                p_label="(" + ", ".join(p_txt) + ")",
            )
        )
    for cls in _FINITE_STATE:
        out.append(StrategyDescriptor(cls.name, "finite-state", cls(), _LIT))
    return out


def get_strategy(name: str, joss: str = "table") -> StrategyDescriptor:
    for d in catalog(joss):
        if d.name == name:
            return d
    raise KeyError(f"unknown strategy {name!r}")
