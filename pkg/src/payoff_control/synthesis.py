"""Payoff-control objectives and their reduction to linear conditions on ``p``.

A control objective is a half-plane in the (sX, sY) payoff plane.  Writing it
as ``c . v >= 0`` for a vector ``c`` over the four outcomes, multiplying by
``1 - p2`` and eliminating ``v2`` with ``(p - (1,1,0,0)) . v = 0`` leaves

    [c2 (p1 - 1) + c1 (1 - p2)] v1 + [c2 p3 + c3 (1 - p2)] v3
        + [c2 p4 + c4 (1 - p2)] v4 >= 0.

Because v >= 0 for every opponent, requiring the three brackets to be
non-negative is a sufficient condition, and each bracket is affine in ``p``.
The caps (``sY <= W``, ``sY >= U``) and lines (``sY <= sX / chi + kappa`` and
the reverse) are all instances, so one system handles any conjunction.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from .exceptions import EmptyInterval, InfeasibleRegion, InvalidObjective
from .game import DEFAULT_PAYOFFS, MemoryOneStrategy, PayoffParams
from .geometry import clip_segment, point_on

__all__ = [
    "BoundObjective",
    "RelationObjective",
    "ControlSpec",
    "RowTag",
    "LinearInequalitySystem",
    "SynthesisResult",
    "RegionVerdict",
    "ControlClass",
    "Verdict",
    "P2_MARGIN",
    "alpha_coefficients",
    "beta_coefficients",
    "gamma_coefficients",
    "reduced_coefficients",
    "build_inequality_system",
    "solve_feasible_strategy",
    "coordinate_range",
    "UPPER_CAP",
    "LOWER_CAP",
    "UPPER_LINE",
    "LOWER_LINE",
    "synthesize",
    "bound_region",
    "feasibility_of_region",
    "classify_control",
    "control_labels",
    "make_cooperation_enforcing",
    "objective_from_dict",
]

#: Strictness margin for ``p2 < 1``.
P2_MARGIN = 1e-6

_TOL = 1e-9

UPPER_CAP, LOWER_CAP = "upper_cap", "lower_cap"
UPPER_LINE, LOWER_LINE = "upper_line", "lower_line"


# --------------------------------------------------------------------------
# Objectives


@dataclass(frozen=True)
class BoundObjective:
    """``sY <= level`` (``kind="upper_cap"``) or ``sY >= level`` (``"lower_cap"``)."""

    kind: str
    level: float

    def __post_init__(self):
        if self.kind not in (UPPER_CAP, LOWER_CAP):
            raise InvalidObjective(f"unknown cap kind {self.kind!r}")
        if not np.isfinite(self.level):
            raise InvalidObjective(f"cap level must be finite, got {self.level}")
        object.__setattr__(self, "level", float(self.level))

    @property
    def sign(self) -> float:
        return -1.0 if self.kind == UPPER_CAP else 1.0

    def halfplane(self, params=None):
        """``(a, b)`` with the objective equal to ``a . (sX, sY) + b >= 0``."""
        s = self.sign
        return np.array([0.0, s]), -s * self.level

    def outcome_vector(self, params: PayoffParams) -> np.ndarray:
        """``c`` over outcomes such that the objective reads ``c . v >= 0``."""
        return self.sign * (params.sy - self.level)

    def slack(self, sx, sy, params=None):
        a, b = self.halfplane()
        return a[0] * np.asarray(sx) + a[1] * np.asarray(sy) + b

    def validate(self, params: PayoffParams):
        W = self.level
        if self.kind == UPPER_CAP and not (params.P <= W < params.T):
            raise InvalidObjective(f"upper cap W={W} outside [P, T) = [{params.P}, {params.T})")
        if self.kind == LOWER_CAP and not (params.P <= W <= params.R and W < params.T):
            raise InvalidObjective(f"lower cap U={W} outside [P, R] = [{params.P}, {params.R}]")

    def describe(self) -> str:
        op = "<=" if self.kind == UPPER_CAP else ">="
        return f"sY {op} {self.level:g}"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "level": self.level}


@dataclass(frozen=True)
class RelationObjective:
    """``sY <= sX / chi + kappa`` (``"upper_line"``) or ``>=`` (``"lower_line"``)."""

    direction: str
    chi: float
    kappa: float

    def __post_init__(self):
        if self.direction not in (UPPER_LINE, LOWER_LINE):
            raise InvalidObjective(f"unknown line direction {self.direction!r}")
        if not (np.isfinite(self.chi) and np.isfinite(self.kappa)):
            raise InvalidObjective("chi and kappa must be finite")
        if self.chi < 1.0:
            raise InvalidObjective(f"chi must be >= 1, got {self.chi}")
        object.__setattr__(self, "chi", float(self.chi))
        object.__setattr__(self, "kappa", float(self.kappa))

    @classmethod
    def anchored(cls, direction, chi, anchor):
        """Line through ``(anchor, anchor)``, i.e. ``sX - anchor = chi (sY - anchor)``."""
        return cls(direction, chi, (1.0 - 1.0 / chi) * anchor)

    @property
    def kind(self) -> str:
        return self.direction

    @property
    def sign(self) -> float:
        return 1.0 if self.direction == UPPER_LINE else -1.0

    def halfplane(self, params=None):
        s = self.sign
        return s * np.array([1.0 / self.chi, -1.0]), s * self.kappa

    def outcome_vector(self, params: PayoffParams) -> np.ndarray:
        c = params.sx - self.chi * params.sy + self.chi * self.kappa
        return self.sign * c

    def slack(self, sx, sy, params=None):
        a, b = self.halfplane()
        return a[0] * np.asarray(sx) + a[1] * np.asarray(sy) + b

    def kappa_range(self, params: PayoffParams):
        f = 1.0 - 1.0 / self.chi
        return f * params.P, f * params.R

    def validate(self, params: PayoffParams):
        lo, hi = self.kappa_range(params)
        tol = _TOL * (params.T - params.S)
        if not (lo - tol <= self.kappa <= hi + tol):
            raise InvalidObjective(
                f"kappa={self.kappa} outside [(1-1/chi)P, (1-1/chi)R] = [{lo:g}, {hi:g}]"
            )

    def describe(self) -> str:
        op = "<=" if self.direction == UPPER_LINE else ">="
        return f"sY {op} sX/{self.chi:g} + {self.kappa:g}"

    def to_dict(self) -> dict:
        return {"kind": self.direction, "chi": self.chi, "kappa": self.kappa}


def objective_from_dict(d):
    try:
        kind = d["kind"]
        if kind in (UPPER_CAP, LOWER_CAP):
            return BoundObjective(kind, float(d["level"]))
        if kind in (UPPER_LINE, LOWER_LINE):
            return RelationObjective(kind, float(d["chi"]), float(d["kappa"]))
    except KeyError as exc:
        raise InvalidObjective(f"objective {d!r} is missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidObjective):
            raise
        raise InvalidObjective(f"objective {d!r}: {exc}") from None
    raise InvalidObjective(f"unknown objective kind {kind!r}")


@dataclass(frozen=True)
class ControlSpec:
    """A conjunction of payoff-region objectives plus enforcement flags.

    ``cooperation_enforcing`` pins ``p1 = 1`` and requires an upper line
    through (R, R).  ``fixed_p2`` pins the controller's forgiveness after
    being exploited.
    """

    objectives: tuple
    cooperation_enforcing: bool = False
    fixed_p2: float | None = None

    def __post_init__(self):
        objs = tuple(self.objectives)
        object.__setattr__(self, "objectives", objs)
        if not objs:
            raise InvalidObjective("a control spec needs at least one objective")
        for o in objs:
            if not isinstance(o, (BoundObjective, RelationObjective)):
                raise InvalidObjective(f"not an objective: {o!r}")
        uppers = [o for o in objs if getattr(o, "kind", None) == UPPER_CAP]
        lowers = [o for o in objs if getattr(o, "kind", None) == LOWER_CAP]
        if len(uppers) > 1 or len(lowers) > 1:
            raise InvalidObjective("at most one upper cap and one lower cap")
        if uppers and lowers and lowers[0].level > uppers[0].level:
            raise InvalidObjective(
                f"lower cap {lowers[0].level} exceeds upper cap {uppers[0].level}"
            )
        if self.fixed_p2 is not None and not (0.0 <= self.fixed_p2 < 1.0):
            raise InvalidObjective(f"fixed p2 must lie in [0, 1), got {self.fixed_p2}")

    @property
    def caps(self):
        return [o for o in self.objectives if isinstance(o, BoundObjective)]

    @property
    def lines(self):
        return [o for o in self.objectives if isinstance(o, RelationObjective)]

    def halfplanes(self, params=DEFAULT_PAYOFFS):
        return [o.halfplane(params) for o in self.objectives]

    def validate(self, params: PayoffParams):
        for o in self.objectives:
            o.validate(params)
        if self.cooperation_enforcing:
            R = params.R
            tol = _TOL * (params.T - params.S)
            if not any(
                o.direction == UPPER_LINE and abs(o.kappa - (1 - 1 / o.chi) * R) <= tol
                for o in self.lines
            ):
                raise InvalidObjective(
                    "cooperation enforcement needs an upper line with kappa = (1 - 1/chi) R"
                )

    def to_dict(self) -> dict:
        d = {
            "objectives": [o.to_dict() for o in self.objectives],
            "cooperation_enforcing": self.cooperation_enforcing,
        }
        if self.fixed_p2 is not None:
            d["fixed_p2"] = self.fixed_p2
        return d

    @classmethod
    def from_dict(cls, d) -> "ControlSpec":
        if not isinstance(d, dict) or "objectives" not in d:
            raise InvalidObjective("control spec needs an 'objectives' list")
        objs = [objective_from_dict(o) for o in d["objectives"]]
        fixed = d.get("fixed_p2")
        return cls(
            tuple(objs),
            cooperation_enforcing=bool(d.get("cooperation_enforcing", False)),
            fixed_p2=None if fixed is None else float(fixed),
        )

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text) -> "ControlSpec":
        return cls.from_dict(json.loads(text))


def make_cooperation_enforcing(chi: float, params: PayoffParams = DEFAULT_PAYOFFS) -> ControlSpec:
    """``sY <= sX / chi + (1 - 1/chi) R`` together with ``p1 = 1``."""
    line = RelationObjective.anchored(UPPER_LINE, chi, params.R)
    return ControlSpec((line,), cooperation_enforcing=True)


# --------------------------------------------------------------------------
# Coefficients


def alpha_coefficients(p, W, params: PayoffParams = DEFAULT_PAYOFFS):
    """Coefficients of (v1, v3, v4) whose non-positivity caps ``sY <= W``."""
    p1, p2, p3, p4 = (float(x) for x in p)
    R, T, S, P = params.R, params.T, params.S, params.P
    return (
        (R - W) * (1 - p2) + (W - T) * (1 - p1),
        (T - W) * p3 + (S - W) * (1 - p2),
        (T - W) * p4 + (P - W) * (1 - p2),
    )


def beta_coefficients(p, U, params: PayoffParams = DEFAULT_PAYOFFS):
    """Coefficients of (v1, v3, v4) whose non-negativity guarantees ``sY >= U``."""
    p1, p2, p3, p4 = (float(x) for x in p)
    R, T, S, P = params.R, params.T, params.S, params.P
    return (
        (R - U) * (1 - p2) + (U - T) * (1 - p1),
        (T - U) * p3 + (S - U) * (1 - p2),
        (T - U) * p4 + (P - U) * (1 - p2),
    )


def gamma_coefficients(p, chi, kappa, params: PayoffParams = DEFAULT_PAYOFFS):
    """Coefficients for ``sY <= sX / chi + kappa`` (all >= 0) or ``>=`` (all <= 0)."""
    p1, p2, p3, p4 = (float(x) for x in p)
    R, T, S, P = params.R, params.T, params.S, params.P
    mu = S - chi * T + chi * kappa
    return (
        mu * (-1 + p1) + ((1 - chi) * R + chi * kappa) * (1 - p2),
        mu * p3 + (T - chi * S + chi * kappa) * (1 - p2),
        mu * p4 + ((1 - chi) * P + chi * kappa) * (1 - p2),
    )


def reduced_coefficients(c):
    """Affine form of the three reduced coefficients of an outcome vector ``c``.

    Returns ``(A, b)`` with shape (3, 4) and (3,) so that the coefficients of
    (v1, v3, v4) at strategy ``p`` are ``A @ p + b``.
    """
    c1, c2, c3, c4 = (float(x) for x in c)
    A = np.array(
        [
            [c2, -c1, 0.0, 0.0],
            [0.0, -c3, c2, 0.0],
            [0.0, -c4, 0.0, c2],
        ]
    )
    b = np.array([c1 - c2, c3, c4])
    return A, b


# --------------------------------------------------------------------------
# Inequality system


@dataclass(frozen=True)
class RowTag:
    """Where a row came from: objective index and coefficient index (1, 3 or 4)."""

    objective: int
    coefficient: int
    family: str
    label: str

    def to_dict(self):
        return {
            "objective": self.objective,
            "coefficient": self.coefficient,
            "family": self.family,
            "label": self.label,
        }


_FAMILY = {UPPER_CAP: "alpha", LOWER_CAP: "beta", UPPER_LINE: "gamma", LOWER_LINE: "gamma"}


@dataclass
class LinearInequalitySystem:
    """Rows ``A @ p + b >= 0`` over the box ``lower <= p <= upper``.

    Equalities (cooperation enforcement, a pinned p2) are encoded as equal
    lower and upper bounds.
    """

    A: np.ndarray
    b: np.ndarray
    tags: list
    lower: np.ndarray
    upper: np.ndarray
    spec: ControlSpec | None = None
    params: PayoffParams = DEFAULT_PAYOFFS

    def __len__(self):
        return len(self.b)

    def evaluate(self, p) -> np.ndarray:
        return self.A @ np.asarray(p, dtype=float) + self.b

    def box_rows(self):
        """Box constraints in row form, with their tags."""
        A, b, tags = [], [], []
        for i in range(4):
            e = np.zeros(4)
            e[i] = 1.0
            A.append(e)
            b.append(-self.lower[i])
            tags.append(RowTag(-1, i + 1, "box", f"p{i + 1} >= {self.lower[i]:g}"))
            A.append(-e)
            b.append(self.upper[i])
            tags.append(RowTag(-1, i + 1, "box", f"p{i + 1} <= {self.upper[i]:g}"))
        return np.array(A), np.array(b), tags

    def all_rows(self):
        Ab, bb, tb = self.box_rows()
        return np.vstack([self.A, Ab]), np.concatenate([self.b, bb]), list(self.tags) + tb

    def satisfied_by(self, p, tol=_TOL) -> bool:
        A, b, _ = self.all_rows()
        return bool(np.all(A @ np.asarray(p, dtype=float) + b >= -tol))

    def with_fixed(self, index: int, value: float) -> "LinearInequalitySystem":
        lo, hi = self.lower.copy(), self.upper.copy()
        lo[index] = hi[index] = value
        return LinearInequalitySystem(self.A, self.b, self.tags, lo, hi, self.spec, self.params)

    def to_dict(self):
        return {
            "rows": [
                {"a": a.tolist(), "b": float(b), **t.to_dict()}
                for a, b, t in zip(self.A, self.b, self.tags)
            ],
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
        }


def build_inequality_system(spec: ControlSpec, params: PayoffParams = DEFAULT_PAYOFFS,
                            check_region: bool = True) -> LinearInequalitySystem:
    """Translate every objective into three affine rows in ``p``.

    Raises
    ------
    InfeasibleRegion
        The objective region misses a boundary segment of the payoff hull.
    InvalidObjective
        A cap level or line intercept is outside its admissible range.
    """
    if check_region:
        verdict = feasibility_of_region(spec, params)
        if not verdict.feasible:
            raise InfeasibleRegion(verdict.message, verdict)
    spec.validate(params)

    rows_A, rows_b, tags = [], [], []
    for k, obj in enumerate(spec.objectives):
        A, b = reduced_coefficients(obj.outcome_vector(params))
        fam = _FAMILY[obj.kind]
        for j, idx in enumerate((1, 3, 4)):
            rows_A.append(A[j])
            rows_b.append(b[j])
            tags.append(RowTag(k, idx, fam, f"{fam}{idx} of [{obj.describe()}]"))
    lower = np.zeros(4)
    upper = np.ones(4)
    upper[1] = 1.0 - P2_MARGIN
    if spec.cooperation_enforcing:
        lower[0] = 1.0
    if spec.fixed_p2 is not None:
        lower[1] = upper[1] = spec.fixed_p2
    return LinearInequalitySystem(
        np.array(rows_A), np.array(rows_b), tags, lower, upper, spec, params
    )


# --------------------------------------------------------------------------
# Solver


class Verdict(str, enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE_REGION = "infeasible_region"
    INFEASIBLE_SYSTEM = "infeasible_system"


@dataclass
class SynthesisResult:
    """Outcome of solving an inequality system for a controller strategy.

    ``radius`` is the slack of the Chebyshev center; zero means the feasible
    set has empty interior and the witness is the center of its relative
    interior instead.
    """

    verdict: Verdict
    witness: MemoryOneStrategy | None = None
    radius: float = float("nan")
    tight: list = field(default_factory=list)
    infeasible_subset: list = field(default_factory=list)
    system: LinearInequalitySystem | None = None
    message: str = ""

    @property
    def feasible(self) -> bool:
        return self.verdict == Verdict.FEASIBLE

    @property
    def degenerate(self) -> bool:
        return self.feasible and self.radius <= _TOL

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "verdict": self.verdict.value,
            "witness": None if self.witness is None else list(self.witness.probs),
            "radius": None if not np.isfinite(self.radius) else self.radius,
            "tight": [t.to_dict() for t in self.tight],
            "infeasible_subset": [t.to_dict() for t in self.infeasible_subset],
            "message": self.message,
            "system": None if self.system is None else self.system.to_dict(),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _free_mask(system):
    return system.upper - system.lower > 0


def _chebyshev(A, b, lower, upper):
    """Maximize r subject to rows >= r * ||row||, within the box.

    Box faces count as rows for free coordinates.  Returns (p, r) or None
    when the LP fails outright.
    """
    free = upper - lower > 0
    Ab, bb = [A], [b]
    for i in np.flatnonzero(free):
        e = np.zeros(4)
        e[i] = 1.0
        Ab += [e[None], -e[None]]
        bb += [np.array([-lower[i]]), np.array([upper[i]])]
    A_all = np.vstack(Ab)
    b_all = np.concatenate(bb)
    norms = np.linalg.norm(A_all[:, free], axis=1)
    # rows that do not involve any free coordinate are constant
    const = norms <= 1e-15
    if np.any(b_all[const] + A_all[const] @ lower < -_TOL):
        return None, -np.inf
    A_ub = np.hstack([-A_all[~const], norms[~const, None]])
    b_ub = b_all[~const]
    bounds = [(lower[i], upper[i]) for i in range(4)] + [(None, 1.0)]
    res = linprog(
        c=np.r_[np.zeros(4), -1.0], A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs"
    )
    if res.status != 0:
        return None, -np.inf
    return res.x[:4], float(res.x[4])


def _feasible_rows(A, b, lower, upper) -> bool:
    _, r = _chebyshev(A, b, lower, upper)
    return r >= -_TOL


def _max_slack(A, b, lower, upper, row):
    res = linprog(
        c=-row[0], A_ub=-A, b_ub=b + _TOL * 0.01, bounds=list(zip(lower, upper)), method="highs"
    )
    if res.status != 0:
        return -np.inf
    return float(row[0] @ res.x + row[1])


def _relative_center(A, b, lower, upper, p0):
    """Chebyshev center inside the affine hull of the feasible set.

    Rows whose maximum slack over the feasible set is zero are implicit
    equalities; the remaining rows are centered within their common
    affine subspace.
    """
    A_all = np.vstack([A, np.eye(4), -np.eye(4)])
    b_all = np.concatenate([b, -lower, upper])
    implicit = np.array(
        [_max_slack(A, b, lower, upper, (A_all[i], b_all[i])) <= _TOL for i in range(len(b_all))]
    )
    E = A_all[implicit]
    N = null_space(E) if len(E) else np.eye(4)
    if N.shape[1] == 0:
        return p0
    An = A_all[~implicit] @ N
    bn = A_all[~implicit] @ p0 + b_all[~implicit]
    norms = np.linalg.norm(An, axis=1)
    keep = norms > 1e-12
    k = N.shape[1]
    res = linprog(
        c=np.r_[np.zeros(k), -1.0],
        A_ub=np.hstack([-An[keep], norms[keep, None]]),
        b_ub=bn[keep],
        bounds=[(None, None)] * k + [(None, 1.0)],
        method="highs",
    )
    if res.status != 0 or res.x[-1] < 0:
        return p0
    return p0 + N @ res.x[:k]


def _irreducible_subset(system):
    """Deletion filter over the objective rows (box rows are always kept)."""
    keep = list(range(len(system)))
    for i in list(keep):
        trial = [j for j in keep if j != i]
        if not _feasible_rows(system.A[trial], system.b[trial], system.lower, system.upper):
            keep = trial
    return keep


def solve_feasible_strategy(system: LinearInequalitySystem) -> SynthesisResult:
    """Decide feasibility and return a robust interior witness.

    The witness is the Chebyshev center of the feasible polytope in the free
    coordinates.  When the polytope has empty interior (equalizer-type
    specs) the witness is the Chebyshev center of its relative interior.
    """
    p, r = _chebyshev(system.A, system.b, system.lower, system.upper)
    if p is None or r < -_TOL:
        subset = _irreducible_subset(system)
        tags = [system.tags[i] for i in subset]
        return SynthesisResult(
            Verdict.INFEASIBLE_SYSTEM,
            radius=r if np.isfinite(r) else float("nan"),
            infeasible_subset=tags,
            system=system,
            message="sufficient conditions have no solution; conflicting rows: "
            + "; ".join(t.label for t in tags),
        )
    if r <= _TOL:
        p = _relative_center(system.A, system.b, system.lower, system.upper, p)
        r = 0.0
    p = np.clip(p, system.lower, system.upper)
    A, b, tags = system.all_rows()
    slack = A @ p + b
    tight = [t for t, s in zip(tags, slack) if abs(s) <= 1e-7]
    witness = MemoryOneStrategy(tuple(p))
    return SynthesisResult(Verdict.FEASIBLE, witness, r, tight, [], system, "feasible")


def coordinate_range(system: LinearInequalitySystem, index: int):
    """Min and max of ``p[index]`` over the feasible set, or None if empty."""
    out = []
    for sgn in (1.0, -1.0):
        c = np.zeros(4)
        c[index] = sgn
        res = linprog(
            c=c, A_ub=-system.A, b_ub=system.b, bounds=list(zip(system.lower, system.upper)),
            method="highs",
        )
        if res.status != 0:
            return None
        out.append(float(res.x[index]))
    return out[0], out[1]


def synthesize(spec: ControlSpec, params: PayoffParams = DEFAULT_PAYOFFS) -> SynthesisResult:
    """Region check, system construction and solve, with distinct failure verdicts."""
    region = feasibility_of_region(spec, params)
    if not region.feasible:
        return SynthesisResult(Verdict.INFEASIBLE_REGION, message=region.message)
    system = build_inequality_system(spec, params, check_region=False)
    return solve_feasible_strategy(system)


# --------------------------------------------------------------------------
# Closed-form intervals for caps


def bound_region(kind: str, level: float, p2: float, params: PayoffParams = DEFAULT_PAYOFFS):
    """Intervals for (p1, p3, p4) that satisfy a single cap at fixed ``p2``.

    Returns a dict ``{"p1": (lo, hi), "p3": (lo, hi), "p4": (lo, hi)}``.
    """
    if not 0.0 <= p2 < 1.0:
        raise EmptyInterval(f"p2 must lie in [0, 1), got {p2}")
    BoundObjective(kind, level).validate(params)
    R, T, S, P = params.R, params.T, params.S, params.P
    L, d = level, 1.0 - p2
    if kind == UPPER_CAP:
        out = {
            "p1": (0.0, min(1.0 - (R - L) / (T - L) * d, 1.0)),
            "p3": (0.0, min((L - S) / (T - L) * d, 1.0)),
            "p4": (0.0, min((L - P) / (T - L) * d, 1.0)),
        }
    else:
        out = {
            "p1": (max(0.0, 1.0 - (R - L) / (T - L) * d), 1.0),
            "p3": (max(0.0, (L - S) / (T - L) * d), 1.0),
            "p4": (max(0.0, (L - P) / (T - L) * d), 1.0),
        }
    for name, (lo, hi) in out.items():
        if lo > hi:
            raise EmptyInterval(f"{name} interval [{lo:g}, {hi:g}] is empty at p2={p2:g}")
    return out


# --------------------------------------------------------------------------
# Region feasibility


@dataclass
class RegionVerdict:
    feasible: bool
    left: np.ndarray | None
    right: np.ndarray | None
    message: str = ""

    def to_dict(self):
        return {
            "feasible": self.feasible,
            "left": None if self.left is None else self.left.tolist(),
            "right": None if self.right is None else self.right.tolist(),
            "message": self.message,
        }


def feasibility_of_region(spec, params: PayoffParams = DEFAULT_PAYOFFS) -> RegionVerdict:
    """Check the region meets both hull boundaries (P,P)-(S,T) and (R,R)-(T,S).

    The left segment holds every payoff pair against unconditional
    defection, the right one every pair against unconditional cooperation.
    Witnesses are the first surviving points walking from (P,P) and (R,R).
    """
    objectives = spec.objectives if isinstance(spec, ControlSpec) else tuple(spec)
    planes = [o.halfplane(params) for o in objectives]
    R, T, S, P = params.R, params.T, params.S, params.P
    tol = 1e-12 * (T - S)
    left = clip_segment((P, P), (S, T), planes, tol)
    right = clip_segment((R, R), (T, S), planes, tol)
    missed = []
    if left is None:
        missed.append("left boundary segment (P,P)-(S,T)")
    if right is None:
        missed.append("right boundary segment (R,R)-(T,S)")
    return RegionVerdict(
        not missed,
        None if left is None else point_on((P, P), (S, T), left[0]),
        None if right is None else point_on((R, R), (T, S), right[0]),
        "feasible" if not missed else "region misses " + " and ".join(missed),
    )


# --------------------------------------------------------------------------
# Taxonomy


class ControlClass(str, enum.Enum):
    SELFISH = "selfish"
    ALTRUIST = "altruist"
    CONTINGENT = "contingent"
    EQUALIZER = "equalizer"
    COOPERATION_ENFORCING = "cooperation_enforcing"
    TFT_LIKE = "tft_like"


def control_labels(spec: ControlSpec, params: PayoffParams = DEFAULT_PAYOFFS) -> set:
    """Every taxonomy label whose defining pattern appears in ``spec``."""
    tol = _TOL * (params.T - params.S)
    eq = lambda a, b: abs(a - b) <= tol  # noqa: E731
    lines = spec.lines
    labels = set()
    for o in lines:
        lo, hi = o.kappa_range(params)
        if o.direction == UPPER_LINE and eq(o.kappa, lo):
            labels.add(ControlClass.SELFISH)
        if o.direction == LOWER_LINE and eq(o.kappa, hi):
            labels.add(ControlClass.ALTRUIST)
    if lines and all(
        o.kappa_range(params)[0] + tol < o.kappa < o.kappa_range(params)[1] - tol for o in lines
    ):
        labels.add(ControlClass.CONTINGENT)
    caps = {o.kind: o.level for o in spec.caps}
    if len(caps) == 2 and eq(caps[UPPER_CAP], caps[LOWER_CAP]):
        labels.add(ControlClass.EQUALIZER)
    ups = [o for o in lines if o.direction == UPPER_LINE]
    downs = [o for o in lines if o.direction == LOWER_LINE]
    for u in ups:
        for d in downs:
            if eq(u.chi, d.chi) and eq(u.kappa, d.kappa):
                labels.add(ControlClass.EQUALIZER)
                if eq(u.chi, 1.0) and eq(u.kappa, 0.0):
                    labels.add(ControlClass.TFT_LIKE)
    if spec.cooperation_enforcing and any(eq(u.kappa, u.kappa_range(params)[1]) for u in ups):
        labels.add(ControlClass.COOPERATION_ENFORCING)
    return labels


_PRIORITY = (
    ControlClass.COOPERATION_ENFORCING,
    ControlClass.TFT_LIKE,
    ControlClass.EQUALIZER,
    ControlClass.SELFISH,
    ControlClass.ALTRUIST,
    ControlClass.CONTINGENT,
)


def classify_control(spec: ControlSpec, params: PayoffParams = DEFAULT_PAYOFFS):
    """Most specific taxonomy class of ``spec``, or None for plain caps."""
    labels = control_labels(spec, params)
    for c in _PRIORITY:
        if c in labels:
            return c
    return None
