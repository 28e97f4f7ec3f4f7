"""The five evaluators: frozen oracles, exact agreement, and provenance."""
from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phantomvote.domain import ABSTAIN, AlternativeDomain, ExtremeProfile, Profile
from phantomvote.errors import (
    EmptyElectorateError,
    InfeasibleSizeError,
    ProfileError,
)
from phantomvote.phantoms import (
    ConstantPhantom,
    CurvePhantom,
    DictatorPhantom,
    LinearCurve,
    OrderStatisticPhantom,
    StepCurve,
    TablePhantom,
    UniformOptimalCurve,
)
from phantomvote.representations import (
    BallotProvenance,
    CROSS_CHECK_EXP_LIMIT,
    PhantomProvenance,
    as_rule,
    cross_check,
    eval_curve,
    eval_issues,
    eval_maxmin,
    eval_median,
    eval_phantom_direct,
    evaluate,
)

from helpers import brute_force_outcome, random_monotone_table

DOM = AlternativeDomain(0.0, 1.0)
ALL_EVALUATORS = [eval_phantom_direct, eval_maxmin, eval_median, eval_curve, eval_issues]


# ---------------------------------------------------------------------------
# frozen oracles, worked by hand
# ---------------------------------------------------------------------------


def test_evenly_spaced_phantoms_two_voters():
    # ballots (0.2, 0.8) plus phantoms (0, 1/2, 1): the median is 1/2
    alpha = CurvePhantom(LinearCurve(DOM))
    for ev in ALL_EVALUATORS:
        assert ev(alpha, [0.2, 0.8]).value == 0.5


def test_evenly_spaced_phantoms_three_voters():
    # ballots (0.2, 0.8, 0.0) plus phantoms (0, 1/3, 2/3, 1): median is 1/3
    alpha = CurvePhantom(LinearCurve(DOM))
    for ev in ALL_EVALUATORS:
        assert ev(alpha, [0.2, 0.8, 0.0]).value == pytest.approx(1 / 3, abs=0)


def test_majority_step_curve_is_the_ballot_median():
    # extremes below and above the half share: the rule is the plain median
    alpha = CurvePhantom(StepCurve(DOM, 0.5, 0.0, 1.0, at_threshold=0.5))
    assert eval_curve(alpha, [0.2, 0.8, 0.6]).value == 0.6
    assert eval_curve(alpha, [0.2, 0.3, 0.1]).value == 0.2
    assert eval_curve(alpha, [0.9, 0.8, 0.7]).value == 0.8
    # even electorate: the at-threshold phantom 1/2 breaks the tie
    assert eval_curve(alpha, [0.1, 0.9]).value == 0.5
    assert eval_curve(alpha, [0.8, 0.9]).value == 0.8


def test_constant_phantoms_give_the_constant_rule():
    flat = CurvePhantom(StepCurve(DOM, 0.5, 0.5, 0.5))
    imposed = ConstantPhantom(DOM, 0.5)
    for ballots in ([0.9], [0.9, 0.8, 0.7], [0.0, 0.1], [0.5]):
        for ev in ALL_EVALUATORS:
            assert ev(flat, ballots).value == 0.5
            assert ev(flat, ballots).value == ev(imposed, ballots).value


def test_order_statistic_selects_kth_highest():
    ballots = [0.3, 0.9, 0.1, 0.5]
    ranked = sorted(ballots, reverse=True)
    for k in range(1, 5):
        alpha = OrderStatisticPhantom(DOM, k)
        for ev in ALL_EVALUATORS:
            assert ev(alpha, ballots).value == ranked[k - 1]


def test_max_rule_two_voters():
    alpha = OrderStatisticPhantom(DOM, 1)
    rep = cross_check(alpha, [0.1, 0.4])
    assert rep.agreement
    assert rep.value == 0.4


def test_dictator_and_constant():
    d = DictatorPhantom(DOM, 1)
    for ev in ALL_EVALUATORS:
        assert ev(d, [0.3, 0.9, 0.1]).value == 0.9
    c = ConstantPhantom(DOM, 0.5)
    for ev in ALL_EVALUATORS:
        assert ev(c, [0.0, 0.1, 1.0]).value == 0.5


def test_weighted_curve_rule():
    # weights (2, 1), ballots (1, 0): the high voter carries share 2/3
    alpha = CurvePhantom(LinearCurve(DOM), weights=(2.0, 1.0))
    rep = cross_check(alpha, [1.0, 0.0])
    assert rep.agreement
    assert rep.value == pytest.approx(2 / 3, abs=0)


def test_single_voter_is_projection():
    alpha = CurvePhantom(UniformOptimalCurve(DOM, 3.0))
    for r in (0.0, 0.37, 1.0):
        rep = cross_check(alpha, [r])
        assert rep.agreement
        assert rep.value == pytest.approx(r)


# ---------------------------------------------------------------------------
# provenance
# ---------------------------------------------------------------------------


def test_ballot_provenance_points_to_voter():
    alpha = CurvePhantom(LinearCurve(DOM))
    p = Profile(voter_ids=("ann", "bob", "cal"), ballots=(0.2, 0.5, 0.9))
    out = eval_curve(alpha, p)
    assert out.value == 0.5
    assert isinstance(out.provenance, BallotProvenance)
    assert out.provenance.voter == 1
    assert out.provenance.voter_id == "bob"


def test_phantom_provenance_carries_marks():
    alpha = CurvePhantom(LinearCurve(DOM))
    out = eval_median(alpha, [0.2, 0.8])
    assert out.value == 0.5
    assert isinstance(out.provenance, PhantomProvenance)
    assert out.provenance.top_count == 1
    assert out.provenance.marks.to_string() == "BT"


def test_provenance_with_abstentions_keeps_positions():
    alpha = CurvePhantom(LinearCurve(DOM), empty_value=0.5)
    p = Profile.of(0.2, ABSTAIN, 0.7)
    out = eval_curve(alpha, p)
    assert out.value == 0.5
    marks = out.provenance.marks.to_string()
    assert marks[1] == "A"
    assert len(marks) == 3


def test_ballot_provenance_prefers_lowest_position_on_ties():
    alpha = CurvePhantom(LinearCurve(DOM))
    out = eval_median(alpha, [0.5, 0.5, 0.5])
    assert isinstance(out.provenance, BallotProvenance)
    assert out.provenance.voter == 0


# ---------------------------------------------------------------------------
# empty electorates, abstentions, input validation
# ---------------------------------------------------------------------------


def test_empty_electorate_uses_configured_value():
    alpha = CurvePhantom(LinearCurve(DOM), empty_value=0.25)
    p = Profile.of(ABSTAIN, ABSTAIN)
    for ev in ALL_EVALUATORS:
        out = ev(alpha, p)
        assert out.value == 0.25
    with pytest.raises(EmptyElectorateError):
        eval_curve(CurvePhantom(LinearCurve(DOM)), Profile.of(ABSTAIN))


def test_abstentions_rejected_for_non_anonymous_kinds():
    p = Profile.of(0.2, ABSTAIN)
    with pytest.raises(ProfileError):
        eval_curve(DictatorPhantom(DOM, 0), p)
    tab = TablePhantom(DOM, {ExtremeProfile.from_mask(m, 2): m / 3 for m in range(4)})
    with pytest.raises(ProfileError):
        eval_curve(tab, p)


def test_abstention_drops_voter_from_the_count():
    alpha = CurvePhantom(LinearCurve(DOM), empty_value=0.5)
    with_abstain = eval_curve(alpha, Profile.of(0.2, ABSTAIN, 0.7)).value
    two_voters = eval_curve(alpha, [0.2, 0.7]).value
    assert with_abstain == two_voters


def test_out_of_domain_ballot_rejected():
    alpha = CurvePhantom(LinearCurve(DOM))
    with pytest.raises(ProfileError):
        eval_curve(alpha, [0.5, 1.2])
    with pytest.raises(ProfileError):
        eval_curve(alpha, [[0.1], [0.2]])
    with pytest.raises(ProfileError):
        eval_curve(alpha, [0.1, ABSTAIN])  # raw sequences cannot abstain


def test_table_size_mismatch_rejected():
    tab = TablePhantom(DOM, {ExtremeProfile.from_mask(m, 2): m / 3 for m in range(4)})
    with pytest.raises(ProfileError):
        eval_median(tab, [0.1, 0.2, 0.3])


def test_exponential_guard():
    alpha = CurvePhantom(LinearCurve(DOM))
    big = [0.5] * 21
    with pytest.raises(InfeasibleSizeError):
        eval_phantom_direct(alpha, big)
    with pytest.raises(InfeasibleSizeError):
        eval_issues(alpha, big)
    # the polynomial evaluators take it in stride
    assert eval_median(alpha, big).value == 0.5
    assert eval_curve(alpha, big).value == 0.5


# ---------------------------------------------------------------------------
# exact cross-evaluator agreement
# ---------------------------------------------------------------------------


def test_exhaustive_agreement_on_grid_random_tables():
    rng = np.random.default_rng(11)
    grid = [0.0, 0.25, 0.5, 0.75, 1.0]
    for _ in range(6):
        alpha = random_monotone_table(DOM, 3, rng)
        for ballots in itertools.product(grid, repeat=3):
            rep = cross_check(alpha, list(ballots))
            assert rep.agreement, (alpha.describe(), ballots, rep.values)


def test_agreement_matches_brute_force_oracle():
    rng = np.random.default_rng(12)
    for _ in range(25):
        n = int(rng.integers(1, 5))
        alpha = random_monotone_table(DOM, n, rng)
        ballots = rng.uniform(0, 1, n).tolist()
        rep = cross_check(alpha, ballots)
        assert rep.agreement
        assert rep.value == pytest.approx(brute_force_outcome(alpha, ballots), abs=0)


@given(st.integers(1, 5), st.data())
@settings(max_examples=60, deadline=None)
def test_agreement_property_random_rules(n, data):
    seed = data.draw(st.integers(0, 2**31))
    rng = np.random.default_rng(seed)
    kind = data.draw(st.sampled_from(["table", "linear", "step", "order", "weighted"]))
    if kind == "table":
        alpha = random_monotone_table(DOM, n, rng)
    elif kind == "linear":
        alpha = CurvePhantom(LinearCurve(DOM))
    elif kind == "step":
        alpha = CurvePhantom(StepCurve(DOM, float(rng.uniform(0, 1)), 0.0, 1.0))
    elif kind == "order":
        alpha = OrderStatisticPhantom(DOM, int(rng.integers(1, n + 1)))
    else:
        w = rng.uniform(0.1, 3.0, n)
        alpha = CurvePhantom(UniformOptimalCurve(DOM, 2.5), weights=w)
    ballots = data.draw(st.lists(
        st.sampled_from([0.0, 0.25, 0.5, 0.5, 0.75, 1.0,
                         float(rng.uniform(0, 1))]),
        min_size=n, max_size=n))
    rep = cross_check(alpha, ballots)
    assert rep.agreement, (kind, ballots, rep.values)


def test_cross_check_skips_exponential_above_limit():
    alpha = CurvePhantom(LinearCurve(DOM))
    ballots = [0.5] * (CROSS_CHECK_EXP_LIMIT + 1)
    rep = cross_check(alpha, ballots)
    assert set(rep.skipped) == {"direct", "maxmin", "issues"}
    assert set(rep.values) == {"median", "curve"}
    assert rep.agreement
    # timings are measured per evaluator and can be omitted from reports
    assert set(rep.timings_ns) == {"median", "curve"}
    assert "timings_ns" not in rep.to_dict(include_timings=False)


def test_evaluate_dispatch_and_default():
    alpha = CurvePhantom(LinearCurve(DOM))
    assert evaluate(alpha, [0.2, 0.8]).value == 0.5
    assert evaluate(alpha, [0.2, 0.8], representation="median").value == 0.5
    with pytest.raises(ValueError):
        evaluate(alpha, [0.2, 0.8], representation="nope")
    rule = as_rule(alpha)
    assert rule([0.2, 0.8]) == 0.5


# ---------------------------------------------------------------------------
# scale: the curve evaluator on a large electorate
# ---------------------------------------------------------------------------


def test_curve_evaluator_large_electorate():
    rng = np.random.default_rng(3)
    ballots = rng.uniform(0, 1, 200_001)
    alpha = CurvePhantom(LinearCurve(DOM))
    out = eval_curve(alpha, ballots)
    med = eval_median(alpha, ballots)
    assert out.value == med.value
    # with this many uniform ballots the outcome hugs the center
    assert abs(out.value - 0.5) < 0.01
