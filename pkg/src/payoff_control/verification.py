"""Independent evidence that a controller strategy realizes a ControlSpec.

Two sources of evidence are combined: a cloud of analytic payoff pairs
against uniformly random opponents, and the 16 deterministic opponents at
the corners of the strategy hypercube.  Each payoff is a ratio of functions
that are linear in every single opponent coordinate, so it is monotone along
each coordinate and its extremes over the cube sit at corners.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .game import DEFAULT_PAYOFFS, PERTURBATION, PayoffParams, _as_strategy, batch_payoffs
from .synthesis import ControlSpec, RelationObjective

__all__ = [
    "PayoffCloud",
    "CornerReport",
    "VerificationReport",
    "CLOUD_TOL",
    "CORNER_TOL",
    "BLOCK",
    "sample_opponents",
    "sample_payoff_cloud",
    "corner_extrema",
    "verify_spec",
]

CLOUD_TOL = 1e-9
CORNER_TOL = 1e-4
#: Opponents are drawn in blocks of this size, each from its own seeded generator.
BLOCK = 1024

CORNERS = np.array(list(itertools.product((0.0, 1.0), repeat=4)))


def sample_opponents(n: int, seed, corner_biased: bool = False) -> np.ndarray:
    """``n`` opponent strategies, identical however the blocks are scheduled."""
    if n < 1:
        raise ValueError("n must be >= 1")
    blocks = []
    for c in range(-(-n // BLOCK)):
        rng = np.random.default_rng([int(seed), c])
        m = min(BLOCK, n - c * BLOCK)
        if corner_biased:
            blocks.append(rng.beta(0.25, 0.25, size=(m, 4)))
        else:
            blocks.append(rng.random((m, 4)))
    return np.vstack(blocks)


@dataclass
class PayoffCloud:
    p: np.ndarray
    Q: np.ndarray
    payoffs: np.ndarray
    seed: int

    @property
    def n(self) -> int:
        return len(self.Q)

    @property
    def sx(self) -> np.ndarray:
        return self.payoffs[:, 0]

    @property
    def sy(self) -> np.ndarray:
        return self.payoffs[:, 1]

    def to_csv(self, fh=None):
        own = fh is None
        fh = io.StringIO() if own else fh
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["format_version", "q1", "q2", "q3", "q4", "sx", "sy"])
        for q, s in zip(self.Q, self.payoffs):
            w.writerow([1] + [repr(float(x)) for x in (*q, *s)])
        return fh.getvalue() if own else None

    @classmethod
    def from_csv(cls, text, p=None, seed=-1) -> "PayoffCloud":
        rows = list(csv.DictReader(io.StringIO(text)))
        Q = np.array([[float(r[f"q{i}"]) for i in range(1, 5)] for r in rows])
        pay = np.array([[float(r["sx"]), float(r["sy"])] for r in rows])
        return cls(None if p is None else np.asarray(p, float), Q, pay, seed)


def sample_payoff_cloud(p, n: int = 5000, seed=0, params: PayoffParams = DEFAULT_PAYOFFS,
                        corner_biased: bool = False) -> PayoffCloud:
    """Analytic payoff pairs of ``p`` against ``n`` random memory-one opponents."""
    Q = sample_opponents(n, seed, corner_biased)
    return PayoffCloud(_as_strategy(p, "X"), Q, batch_payoffs(p, Q, params), int(seed))


def _functional(objective, sx, sy):
    if isinstance(objective, RelationObjective):
        return sy - sx / objective.chi
    return sy


@dataclass
class CornerReport:
    """Payoffs against the 16 perturbed deterministic opponents."""

    corners: np.ndarray
    payoffs: np.ndarray
    values: np.ndarray
    label: str

    @property
    def max(self) -> float:
        return float(self.values.max())

    @property
    def min(self) -> float:
        return float(self.values.min())

    @property
    def argmax(self) -> np.ndarray:
        return self.corners[int(np.argmax(self.values))]

    @property
    def argmin(self) -> np.ndarray:
        return self.corners[int(np.argmin(self.values))]

    @property
    def sy_max(self) -> float:
        return float(self.payoffs[:, 1].max())

    @property
    def sy_min(self) -> float:
        return float(self.payoffs[:, 1].min())

    def to_dict(self):
        return {
            "functional": self.label,
            "max": self.max,
            "min": self.min,
            "argmax": self.argmax.tolist(),
            "argmin": self.argmin.tolist(),
            "corners": [
                {"q": c.tolist(), "sx": float(s[0]), "sy": float(s[1])}
                for c, s in zip(self.corners, self.payoffs)
            ],
        }


def corner_extrema(p, params: PayoffParams = DEFAULT_PAYOFFS, objective=None,
                   eps: float = PERTURBATION) -> CornerReport:
    """Extremes of the objective functional over the 16 corner opponents.

    The functional is ``sY`` for caps (and when ``objective`` is None) and
    ``sY - sX / chi`` for relation lines.
    """
    Q = (1.0 - 2.0 * eps) * CORNERS + eps
    pay = batch_payoffs(p, Q, params)
    vals = _functional(objective, pay[:, 0], pay[:, 1])
    label = "sY" if not isinstance(objective, RelationObjective) else f"sY - sX/{objective.chi:g}"
    return CornerReport(CORNERS.copy(), pay, vals, label)


@dataclass
class Violation:
    objective: int
    source: str
    q: list
    slack: float

    def to_dict(self):
        return {"objective": self.objective, "source": self.source, "q": self.q, "slack": self.slack}


@dataclass
class VerificationReport:
    spec: ControlSpec
    strategy: tuple
    n: int
    seed: int
    cloud_summary: dict
    cloud_slack: list
    corner_slack: list
    corners: list
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s >= -CLOUD_TOL for s in self.cloud_slack) and all(
            s >= -CORNER_TOL for s in self.corner_slack
        )

    def to_dict(self):
        return {
            "format_version": 1,
            "passed": self.passed,
            "strategy": list(self.strategy),
            "spec": self.spec.to_dict(),
            "samples": self.n,
            "seed": self.seed,
            "cloud": self.cloud_summary,
            "objectives": [
                {
                    "objective": o.to_dict(),
                    "cloud_slack": cs,
                    "corner_slack": ks,
                    "corners": c.to_dict(),
                }
                for o, cs, ks, c in zip(self.spec.objectives, self.cloud_slack,
                                        self.corner_slack, self.corners)
            ],
            "violations": [v.to_dict() for v in self.violations],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def verify_spec(p, spec: ControlSpec, n: int = 5000, seed=0,
                params: PayoffParams = DEFAULT_PAYOFFS) -> VerificationReport:
    """Check ``p`` against every objective of ``spec`` on the cloud and the corners.

    Passes when no cloud sample violates an objective by more than 1e-9 and
    no perturbed corner by more than 1e-4.
    """
    p = _as_strategy(p, "X")
    cloud = sample_payoff_cloud(p, n, seed, params)
    cloud_slack, corner_slack, reports, violations = [], [], [], []
    for k, obj in enumerate(spec.objectives):
        s = obj.slack(cloud.sx, cloud.sy)
        cloud_slack.append(float(s.min()))
        for i in np.flatnonzero(s < -CLOUD_TOL):
            violations.append(Violation(k, "cloud", cloud.Q[i].tolist(), float(s[i])))
        rep = corner_extrema(p, params, obj)
        reports.append(rep)
        cs = obj.slack(rep.payoffs[:, 0], rep.payoffs[:, 1])
        corner_slack.append(float(cs.min()))
        for i in np.flatnonzero(cs < -CORNER_TOL):
            violations.append(Violation(k, "corner", rep.corners[i].tolist(), float(cs[i])))
    summary = {
        "sx_min": float(cloud.sx.min()),
        "sx_max": float(cloud.sx.max()),
        "sy_min": float(cloud.sy.min()),
        "sy_max": float(cloud.sy.max()),
    }
    if spec.cooperation_enforcing:
        summary["p1"] = float(p[0])
    return VerificationReport(
        spec, tuple(float(x) for x in p), n, int(seed), summary, cloud_slack, corner_slack,
        reports, violations,
    )
