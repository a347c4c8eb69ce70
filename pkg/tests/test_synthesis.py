import json
from fractions import Fraction

import numpy as np
import pytest

from payoff_control import (
    BoundObjective,
    ControlClass,
    ControlSpec,
    RelationObjective,
    Verdict,
    alpha_coefficients,
    beta_coefficients,
    bound_region,
    build_inequality_system,
    classify_control,
    coordinate_range,
    corner_extrema,
    feasibility_of_region,
    gamma_coefficients,
    make_cooperation_enforcing,
    solve_feasible_strategy,
    synthesize,
    verify_spec,
)
from payoff_control.exceptions import EmptyInterval, InfeasibleRegion, InvalidObjective
from payoff_control.synthesis import (
    LOWER_CAP,
    LOWER_LINE,
    P2_MARGIN,
    UPPER_CAP,
    UPPER_LINE,
    objective_from_dict,
)

from oracles import cap_outcome_vector, coefficient_oracle, line_outcome_vector

SELFISH_G = (5 / 7, 0, 13 / 15, 0)
ALTRUIST_G = (1, 2 / 15, 1, 1 / 3)


def caps(W=None, U=None):
    objs = []
    if W is not None:
        objs.append(BoundObjective(UPPER_CAP, W))
    if U is not None:
        objs.append(BoundObjective(LOWER_CAP, U))
    return ControlSpec(tuple(objs))


def selfish_g_spec():
    return ControlSpec((
        RelationObjective(LOWER_LINE, 2.0, 0.0),
        RelationObjective(UPPER_LINE, 4 / 3, 0.0),
    ))


def altruist_g_spec():
    return ControlSpec((
        RelationObjective(UPPER_LINE, 2.0, 1.0),
        RelationObjective(LOWER_LINE, 4 / 3, 0.5),
    ))


class TestObjectives:
    def test_chi_below_one_rejected(self):
        with pytest.raises(InvalidObjective):
            RelationObjective(UPPER_LINE, 0.5, 0.0)

    @pytest.mark.parametrize("kind, level", [(UPPER_CAP, -0.1), (UPPER_CAP, 3.0), (LOWER_CAP, 2.5)])
    def test_cap_ranges(self, kind, level):
        with pytest.raises(InvalidObjective):
            BoundObjective(kind, level).validate(_params())

    def test_kappa_range(self):
        with pytest.raises(InvalidObjective):
            RelationObjective(UPPER_LINE, 2.0, 1.5).validate(_params())

    def test_unknown_kind(self):
        with pytest.raises(InvalidObjective):
            objective_from_dict({"kind": "sideways", "level": 1})
        with pytest.raises(InvalidObjective, match="level"):
            objective_from_dict({"kind": "upper_cap"})

    def test_spec_invariants(self):
        with pytest.raises(InvalidObjective):
            ControlSpec(())
        with pytest.raises(InvalidObjective):
            caps(W=0.5, U=1.0)
        with pytest.raises(InvalidObjective):
            ControlSpec((BoundObjective(UPPER_CAP, 1), BoundObjective(UPPER_CAP, 2)))

    def test_spec_json_round_trip(self):
        spec = ControlSpec(
            (BoundObjective(UPPER_CAP, 1.5), RelationObjective(LOWER_LINE, 2.0, 1.0)),
            cooperation_enforcing=False, fixed_p2=0.25,
        )
        assert ControlSpec.from_json(spec.to_json()) == spec

    def test_cooperation_enforcing_needs_line_through_rr(self):
        spec = ControlSpec((RelationObjective(UPPER_LINE, 2.0, 0.5),), cooperation_enforcing=True)
        with pytest.raises(InvalidObjective):
            spec.validate(_params())


def _params():
    from payoff_control import DEFAULT_PAYOFFS

    return DEFAULT_PAYOFFS


class TestCoefficients:
    def test_alpha_caps_2_0(self):
        a = alpha_coefficients((1, 0.51, 1, 0), 2)
        assert a == pytest.approx((0, -0.47, -0.98))

    def test_alpha_trivial(self):
        assert alpha_coefficients((1, 1, 0, 0), 1.0) == pytest.approx((0, 0, 0))
        assert alpha_coefficients((0, 0, 0, 0), 0) == pytest.approx((-1, -1, 0))

    def test_beta_examples(self):
        assert beta_coefficients((1, 0.51, 1, 0), 0) == pytest.approx((0.98, 2.51, 0))
        assert beta_coefficients((0.5, 0, 1, 0.5), 1) == pytest.approx((0, 0, 0), abs=1e-15)
        assert beta_coefficients((1, 1, 1, 1), 0.7) == pytest.approx((0, 2.3, 2.3))

    @pytest.mark.parametrize(
        "p, chi, kappa, expected",
        [
            (SELFISH_G, 2, 0, (0, -16 / 15, 0)),
            (SELFISH_G, 4 / 3, 0, (16 / 21, 0, 0)),
            (ALTRUIST_G, 2, 1, (0, 16 / 15, 1 / 15)),
        ],
    )
    def test_gamma_examples(self, p, chi, kappa, expected):
        assert gamma_coefficients(p, chi, kappa) == pytest.approx(expected, abs=1e-14)

    def test_gamma_against_exact_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            p = [Fraction(int(x), 97) for x in rng.integers(1, 96, 4)]
            chi = Fraction(int(rng.integers(10, 30)), 10)
            kappa = (1 - 1 / chi) * Fraction(int(rng.integers(0, 21)), 10)
            exact = coefficient_oracle(p, line_outcome_vector(chi, kappa, 1))
            got = gamma_coefficients([float(x) for x in p], float(chi), float(kappa))
            assert np.allclose(got, [float(x) for x in exact], atol=1e-12)

    def test_alpha_beta_against_exact_oracle(self):
        p = [Fraction(3, 4), Fraction(1, 5), Fraction(2, 3), Fraction(1, 9)]
        pf = [float(x) for x in p]
        # upper cap rows are -alpha; lower cap rows are +beta
        a = coefficient_oracle(p, cap_outcome_vector(Fraction(3, 2), -1))
        b = coefficient_oracle(p, cap_outcome_vector(Fraction(1, 2), 1))
        assert np.allclose(alpha_coefficients(pf, 1.5), [-float(x) for x in a], atol=1e-12)
        assert np.allclose(beta_coefficients(pf, 0.5), [float(x) for x in b], atol=1e-12)


class TestSystem:
    def test_caps_2_0_rows(self):
        system = build_inequality_system(caps(2, 0))
        assert system.A.shape == (6, 4)
        assert system.satisfied_by((1, 0.51, 1, 0))
        assert system.upper[1] == 1 - P2_MARGIN

    def test_equalizer_all_tight(self):
        system = build_inequality_system(caps(1, 1))
        vals = system.evaluate((0.5, 0, 1, 0.5))
        assert np.allclose(vals, 0, atol=1e-12)

    def test_tft_like_family(self):
        spec = ControlSpec((RelationObjective(UPPER_LINE, 1, 0), RelationObjective(LOWER_LINE, 1, 0)))
        system = build_inequality_system(spec)
        for p2 in (0.0, 0.3, 0.9):
            assert system.satisfied_by((1, p2, 1 - p2, 0), tol=1e-12)

    def test_selfish_g_satisfies_rows(self):
        assert build_inequality_system(selfish_g_spec()).satisfied_by(SELFISH_G, tol=1e-12)
        assert build_inequality_system(altruist_g_spec()).satisfied_by(ALTRUIST_G, tol=1e-12)

    def test_region_checked_before_ranges(self):
        with pytest.raises(InfeasibleRegion) as info:
            build_inequality_system(caps(W=-0.5))
        assert "left boundary segment" in str(info.value)

    def test_invalid_range_after_region(self):
        with pytest.raises(InvalidObjective):
            # W = T passes the region check (whole hull) but is out of range
            build_inequality_system(caps(W=3.0))

    def test_cooperation_enforcing_pins_p1(self):
        system = build_inequality_system(make_cooperation_enforcing(1.5))
        assert system.lower[0] == 1.0

    def test_fixed_p2(self):
        spec = ControlSpec((BoundObjective(UPPER_CAP, 2),), fixed_p2=0.4)
        system = build_inequality_system(spec)
        assert system.lower[1] == system.upper[1] == 0.4
        res = solve_feasible_strategy(system)
        assert res.witness.probs[1] == pytest.approx(0.4)

    def test_to_dict_is_json(self):
        json.dumps(build_inequality_system(caps(2, 0)).to_dict())


class TestSolver:
    def test_caps_2_0(self):
        res = synthesize(caps(2, 0))
        assert res.feasible and res.radius > 0
        assert res.system.satisfied_by(res.witness.probs, tol=1e-9)

    def test_equalizer_relative_interior(self):
        res = synthesize(caps(1, 1))
        assert res.feasible and res.degenerate
        assert res.system.satisfied_by(res.witness.probs, tol=1e-9)
        rep = verify_spec(res.witness, caps(1, 1))
        assert rep.passed
        assert abs(rep.cloud_summary["sy_max"] - 1) < 1e-9

    def test_below_p_is_region_infeasible(self):
        res = synthesize(caps(W=-1.0))
        assert res.verdict == Verdict.INFEASIBLE_REGION

    def test_system_infeasible_reports_subset(self):
        # geometrically feasible, but the sufficient conditions conflict
        spec = ControlSpec((
            BoundObjective(UPPER_CAP, 0.8),
            RelationObjective(LOWER_LINE, 3.0, 0.0),
        ))
        assert feasibility_of_region(spec).feasible
        res = synthesize(spec)
        assert res.verdict == Verdict.INFEASIBLE_SYSTEM
        assert res.infeasible_subset
        # removing any row of the reported subset restores feasibility
        system = res.system
        idx = [system.tags.index(t) for t in res.infeasible_subset]
        from payoff_control.synthesis import _feasible_rows

        assert not _feasible_rows(system.A[idx], system.b[idx], system.lower, system.upper)
        for drop in idx:
            keep = [i for i in idx if i != drop]
            assert _feasible_rows(system.A[keep], system.b[keep], system.lower, system.upper)

    def test_selfish_g(self):
        res = synthesize(selfish_g_spec())
        assert res.feasible
        assert verify_spec(res.witness, selfish_g_spec()).passed

    def test_cooperation_enforcing_witness(self):
        res = synthesize(make_cooperation_enforcing(1.5))
        assert res.feasible and res.witness.probs[0] == 1.0
        rep = corner_extrema(res.witness)
        best = rep.payoffs[np.argmax(rep.payoffs[:, 1])]
        assert best == pytest.approx([2, 2], abs=1e-4)
        assert rep.corners[np.argmax(rep.payoffs[:, 1])].tolist() == [1, 1, 1, 1]

    def test_result_json(self):
        d = json.loads(synthesize(caps(2, 0)).to_json())
        assert d["format_version"] == 1 and d["verdict"] == "feasible"
        assert len(d["witness"]) == 4


class TestBoundRegion:
    def test_upper_caps_2_0(self):
        r = bound_region(UPPER_CAP, 2, 0.51)
        assert r["p1"] == (0, 1) and r["p3"] == (0, 1)
        assert r["p4"] == pytest.approx((0, 0.98))

    def test_lower(self):
        r = bound_region(LOWER_CAP, 0, 0.51)
        assert r["p1"] == pytest.approx((1 - 2 / 3 * 0.49, 1))
        assert r["p3"] == pytest.approx((0.49 / 3, 1))
        assert r["p4"] == (0, 1)

    def test_upper_at_r(self):
        r = bound_region(UPPER_CAP, 2, 0.0)
        assert r == {"p1": (0, 1), "p3": (0, 1), "p4": (0, 1)}

    def test_empty(self):
        with pytest.raises(EmptyInterval):
            bound_region(LOWER_CAP, 2, 0.0)
        with pytest.raises(EmptyInterval):
            bound_region(UPPER_CAP, 1, 1.0)

    @pytest.mark.parametrize("kind, level", [(UPPER_CAP, 1.5), (UPPER_CAP, 0.4), (LOWER_CAP, 0.5),
                                             (LOWER_CAP, 1.2)])
    def test_consistent_with_solver(self, kind, level):
        for p2 in np.arange(0, 1, 0.05):
            spec = ControlSpec((BoundObjective(kind, level),), fixed_p2=float(p2))
            system = build_inequality_system(spec)
            try:
                box = bound_region(kind, level, float(p2))
            except EmptyInterval:
                assert coordinate_range(system, 0) is None
                continue
            for i, key in ((0, "p1"), (2, "p3"), (3, "p4")):
                lo, hi = coordinate_range(system, i)
                assert (lo, hi) == pytest.approx(box[key], abs=1e-9)


class TestRegion:
    def test_upper_line_through_rr(self):
        v = feasibility_of_region(ControlSpec((RelationObjective(UPPER_LINE, 2, 1),)))
        assert v.feasible
        assert v.right.tolist() == pytest.approx([2, 2])

    def test_cap_below_p(self):
        v = feasibility_of_region(caps(W=-0.5))
        assert not v.feasible and v.message.startswith("region misses left boundary segment")

    def test_cap_at_t(self):
        assert feasibility_of_region(caps(W=3.0)).feasible


class TestClassify:
    def test_selfish(self):
        assert classify_control(ControlSpec((RelationObjective(UPPER_LINE, 1.5, 0),))) \
            == ControlClass.SELFISH

    def test_altruist(self):
        assert classify_control(ControlSpec((RelationObjective(LOWER_LINE, 2, 1),))) \
            == ControlClass.ALTRUIST

    def test_tft_like(self):
        spec = ControlSpec((RelationObjective(UPPER_LINE, 1, 0), RelationObjective(LOWER_LINE, 1, 0)))
        assert classify_control(spec) == ControlClass.TFT_LIKE

    def test_contingent(self):
        assert classify_control(ControlSpec((RelationObjective(UPPER_LINE, 2, 0.5),))) \
            == ControlClass.CONTINGENT

    def test_equalizer(self):
        assert classify_control(caps(1, 1)) == ControlClass.EQUALIZER

    def test_cooperation_enforcing(self):
        assert classify_control(make_cooperation_enforcing(1.5)) \
            == ControlClass.COOPERATION_ENFORCING

    def test_plain_caps(self):
        assert classify_control(caps(2, 0)) is None

    def test_make_cooperation_enforcing_line(self):
        spec = make_cooperation_enforcing(1.5)
        line = spec.lines[0]
        assert line.kappa == pytest.approx(2 / 3) and 1 / line.chi == pytest.approx(2 / 3)
        assert make_cooperation_enforcing(1.0).lines[0].kappa == 0.0
