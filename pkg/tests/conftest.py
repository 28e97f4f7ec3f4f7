"""Shared fixtures: the unit domain and a corpus of named rules.

The corpus deliberately mixes rules that satisfy the audited axioms with
rules that violate specific ones, so audit tests can assert both verdicts.
"""
from __future__ import annotations

import numpy as np
import pytest

from phantomvote.domain import AlternativeDomain
from phantomvote.phantoms import (
    ConstantPhantom,
    CurvePhantom,
    DictatorPhantom,
    LinearCurve,
    OrderStatisticPhantom,
    PiecewiseCurve,
    StepCurve,
    TablePhantom,
    UniformOptimalCurve,
    VariableElectorateRule,
    curve_from_phantoms,
)

from helpers import random_monotone_table


@pytest.fixture(scope="session")
def dom01() -> AlternativeDomain:
    return AlternativeDomain(0.0, 1.0)


@pytest.fixture(scope="session")
def linear_median(dom01):
    # evenly spaced phantoms k/n; the prototypical continuous responsive rule
    return CurvePhantom(LinearCurve(dom01), empty_value=0.5)


@pytest.fixture(scope="session")
def l1_step(dom01):
    # all phantoms at 1/2: the absolute-loss optimal rule for even priors
    return CurvePhantom(StepCurve(dom01, 0.5, 0.0, 1.0, at_threshold=0.5),
                        empty_value=0.5)


@pytest.fixture(scope="session")
def step_60(dom01):
    return CurvePhantom(StepCurve(dom01, 0.6, 0.0, 1.0))


@pytest.fixture(scope="session")
def order_stat_2(dom01):
    return OrderStatisticPhantom(dom01, 2)


@pytest.fixture(scope="session")
def dictator_0(dom01):
    return DictatorPhantom(dom01, 0)


@pytest.fixture(scope="session")
def constant_half(dom01):
    return ConstantPhantom(dom01, 0.5)


@pytest.fixture(scope="session")
def piecewise_second_highest(dom01):
    # phantom chain (0, 0, 1, 1) for three voters: the second-highest ballot
    return CurvePhantom(curve_from_phantoms([0.0, 0.0, 1.0, 1.0], dom01))


@pytest.fixture(scope="session")
def optimal_q3(dom01):
    return CurvePhantom(UniformOptimalCurve(dom01, 3.0), empty_value=0.5)


@pytest.fixture(scope="session")
def random_table_3(dom01):
    rng = np.random.default_rng(20240817)
    return random_monotone_table(dom01, 3, rng)


@pytest.fixture(scope="session")
def mean_rule():
    # manipulable benchmark rule, not expressible by any phantom function
    def rule(ballots) -> float:
        arr = np.asarray(ballots, dtype=float)
        return float(arr.mean())

    return rule


@pytest.fixture(scope="session")
def size_dependent_rule(dom01):
    """Variable-electorate rule that switches curves by parity of the size.

    Merging two electorates that got the same outcome can then change it,
    which is exactly the consistency failure the audit must find.
    """
    gentle = LinearCurve(dom01)

    def square_share(ts):
        return np.asarray(ts, dtype=float) ** 2

    class _Square(LinearCurve):
        def batch(self, ts):
            return square_share(ts)

    harsh = _Square(dom01)

    def rule(ballots) -> float:
        from phantomvote.representations import eval_curve

        curve = gentle if len(ballots) % 2 else harsh
        return eval_curve(CurvePhantom(curve, empty_value=0.5), ballots).value

    return rule


@pytest.fixture(scope="session")
def participation_failing_variable(dom01):
    # empty-electorate value 0.2 sits below the curve floor 0.4, so joining
    # an empty election can drag the outcome away from the newcomer's peak
    curve = StepCurve(dom01, 0.5, 0.4, 1.0, at_threshold=0.7)
    return VariableElectorateRule(curve=curve, empty_value=0.2)


@pytest.fixture(scope="session")
def healthy_variable(dom01):
    return VariableElectorateRule(curve=LinearCurve(dom01), empty_value=0.5)
