"""Round-robin tournament over the strategy catalog.

Every strategy meets every other one, and itself, once per repetition.  All
repetitions of one pairing are simulated together, with a generator seeded
from ``(master_seed, pair_index)``, so results do not depend on the order in
which pairings are processed or on how they are spread over workers.
"""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .game import DEFAULT_PAYOFFS, PayoffParams
from .strategies import StrategyDescriptor, catalog, simulate_batch

__all__ = ["MatchResult", "TournamentReport", "run_tournament", "run_pairing", "rank_table"]


@dataclass
class MatchResult:
    """Totals of one pairing over all repetitions (arrays of length ``repetitions``)."""

    x_name: str
    y_name: str
    stages: int
    x_totals: np.ndarray
    y_totals: np.ndarray

    @property
    def x_avg(self) -> np.ndarray:
        return self.x_totals / self.stages

    @property
    def y_avg(self) -> np.ndarray:
        return self.y_totals / self.stages

    @property
    def x_wins(self) -> np.ndarray:
        return self.x_totals > self.y_totals

    @property
    def y_wins(self) -> np.ndarray:
        return self.y_totals > self.x_totals


def run_pairing(x: StrategyDescriptor, y: StrategyDescriptor, stages: int, repetitions: int,
                seed, params: PayoffParams = DEFAULT_PAYOFFS, noise: float = 0.0) -> MatchResult:
    rng = np.random.default_rng(seed)
    xm, ym = simulate_batch(x.player, y.player, stages, repetitions, rng, noise)
    outcome = 2 * (~xm) + (~ym)
    return MatchResult(
        x.name,
        y.name,
        stages,
        params.sx[outcome].sum(axis=0),
        params.sy[outcome].sum(axis=0),
    )


@dataclass
class TournamentReport:
    names: list
    scores: np.ndarray
    wins: np.ndarray
    payoff_matrix: np.ndarray
    stages: int
    repetitions: int
    master_seed: int
    descriptors: list

    def order(self):
        return sorted(range(len(self.names)), key=lambda i: (-round(self.scores[i], 12), self.names[i]))

    def ranking(self):
        """Rows ``(rank, name, p_label, score, wins)`` sorted by score."""
        return [
            (k + 1, self.names[i], self.descriptors[i].p_label, float(self.scores[i]),
             float(self.wins[i]))
            for k, i in enumerate(self.order())
        ]

    def score_of(self, name) -> float:
        return float(self.scores[self.names.index(name)])

    def rank_of(self, name) -> int:
        return [r[1] for r in self.ranking()].index(name) + 1

    def to_dict(self):
        return {
            "format_version": 1,
            "stages": self.stages,
            "repetitions": self.repetitions,
            "master_seed": self.master_seed,
            "ranking": [
                {"rank": r, "name": n, "p": p or None, "score": s, "wins": w}
                for r, n, p, s, w in self.ranking()
            ],
            "payoff_matrix": {
                "names": self.names,
                "values": self.payoff_matrix.tolist(),
            },
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    def to_csv(self, fh=None):
        own = fh is None
        fh = io.StringIO() if own else fh
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["format_version", "rank", "name", "p", "score", "wins"])
        for r, n, p, s, wins in self.ranking():
            w.writerow([1, r, n, p, repr(s), repr(wins)])
        return fh.getvalue() if own else None


def run_tournament(strategies=None, stages: int = 200, repetitions: int = 1000, master_seed=0,
                   params: PayoffParams = DEFAULT_PAYOFFS, workers: int = 1,
                   self_play: bool = True, noise: float = 0.0) -> TournamentReport:
    """Full round robin, by default including self-play.

    A strategy's score is its per-stage payoff averaged over all pairings
    (self-play counted once, as the mean of both seats) and repetitions.
    With ``self_play=False`` the self-pairing is neither played nor averaged.
    Its wins are the number of other strategies it strictly out-scored in a
    repetition, averaged over repetitions.  ``noise`` flips each intended
    move with that probability.
    """
    strategies = catalog() if strategies is None else list(strategies)
    if len(strategies) < 2:
        raise ValueError("a tournament needs at least two strategies")
    n = len(strategies)
    pairs = [(i, j) for i in range(n) for j in range(i, n) if self_play or i != j]
    seeds = [np.random.SeedSequence([int(master_seed), k]) for k in range(len(pairs))]

    def play(k):
        i, j = pairs[k]
        return run_pairing(strategies[i], strategies[j], stages, repetitions, seeds[k], params,
                           noise)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(play, range(len(pairs))))
    else:
        results = [play(k) for k in range(len(pairs))]

    payoff = np.zeros((n, n))  # mean per-stage payoff of row vs column
    win_counts = np.zeros((n, repetitions))
    for (i, j), res in zip(pairs, results):
        if i == j:
            payoff[i, i] = 0.5 * (res.x_avg.mean() + res.y_avg.mean())
            continue
        payoff[i, j] = res.x_avg.mean()
        payoff[j, i] = res.y_avg.mean()
        win_counts[i] += res.x_wins
        win_counts[j] += res.y_wins
    if self_play:
        scores = payoff.mean(axis=1)
    else:
        scores = (payoff.sum(axis=1) - np.diag(payoff)) / (n - 1)
    return TournamentReport(
        names=[s.name for s in strategies],
        scores=scores,
        wins=win_counts.mean(axis=1),
        payoff_matrix=payoff,
        stages=stages,
        repetitions=repetitions,
        master_seed=int(master_seed),
        descriptors=strategies,
    )


def rank_table(report: TournamentReport) -> str:
    """Plain-text ranking: name, p (memory-one rows), score, wins."""
    rows = report.ranking()
    width = max(len("Name"), *(len(r[1]) for r in rows))
    pw = max(len("p"), *(len(r[2]) for r in rows))
    lines = [f"{'Name':<{width}}  {'p':<{pw}}  {'Score':>5}  {'Wins':>4}"]
    lines.append("-" * len(lines[0]))
    for _, name, p, score, wins in rows:
        lines.append(f"{name:<{width}}  {p:<{pw}}  {score:5.2f}  {wins:4.0f}")
    return "\n".join(lines) + "\n"
