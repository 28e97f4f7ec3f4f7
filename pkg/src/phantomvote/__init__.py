"""Strategy-proof voting rules on an interval.

A voting rule here maps real-valued ballots in a closed interval to one
outcome in that interval.  The package provides the anonymous strategy-proof
family in five interchangeable forms (phantom ballots, maxmin over sets,
median with phantom voters, grading curves, and coordinate-wise issue votes),
batteries of axiom audits that return machine-checkable witnesses on failure,
and welfare tooling: exact one-profile optima, Monte-Carlo ex-ante
comparison, and synthesis of the welfare-optimal rule for a ballot prior.
"""

from .axioms import (FAIL, FIXED_AXIOMS, PASS_EXHAUSTIVE, PASS_SAMPLED,
                     VARIABLE_AXIOMS, AuditReport, AxiomResult, Witness,
                     audit_fixed, audit_variable, replay_witness, sp_distance)
from .domain import (ABSTAIN, AlternativeDomain, ExtremeProfile, Mark,
                     Profile, Weights, to_extremes, top_k_profile)
from .errors import (BallotFileError, BlackBoxRuleError, ConfigError,
                     DiscontinuousCurveError, DomainError,
                     EmptyElectorateError, InfeasibleSizeError,
                     MalformedPhantomError, NonInvertibleTransformError,
                     PhantomVoteError, ProfileError, QuadratureError,
                     TableLookupError)
from .phantoms import (ConstantPhantom, CurvePhantom, DictatorPhantom,
                       GradingCurve, LinearCurve, OrderStatisticPhantom,
                       PhantomFunction, PiecewiseCurve, StepCurve,
                       TablePhantom, TabulatedCurve, UniformOptimalCurve,
                       VariableElectorateRule, curve_from_phantoms,
                       phantoms_from_curve, weighted_share)
from .representations import (EXPONENTIAL_REPRESENTATIONS, BallotProvenance,
                              CrossCheckReport, PhantomProvenance,
                              RuleOutcome, as_rule, cross_check, eval_curve,
                              eval_issues, eval_maxmin, eval_median,
                              eval_phantom_direct, evaluate)
from .welfare import (Prior, WelfareEstimate, adaptive_simpson, big_g,
                      ex_post_welfare, l1_optimal_outcome, lq_optimal_outcome,
                      minimax_optimal_phantoms, monte_carlo_ex_ante,
                      optimal_curve, profile_stream, uniform_optimal_curve)

__version__ = "0.1.0"

__all__ = [
    "ABSTAIN",
    "AlternativeDomain",
    "AuditReport",
    "AxiomResult",
    "BallotFileError",
    "BallotProvenance",
    "BlackBoxRuleError",
    "ConfigError",
    "ConstantPhantom",
    "CrossCheckReport",
    "CurvePhantom",
    "DictatorPhantom",
    "DiscontinuousCurveError",
    "DomainError",
    "EmptyElectorateError",
    "EXPONENTIAL_REPRESENTATIONS",
    "ExtremeProfile",
    "FAIL",
    "FIXED_AXIOMS",
    "GradingCurve",
    "InfeasibleSizeError",
    "LinearCurve",
    "MalformedPhantomError",
    "Mark",
    "NonInvertibleTransformError",
    "OrderStatisticPhantom",
    "PASS_EXHAUSTIVE",
    "PASS_SAMPLED",
    "PhantomFunction",
    "PhantomProvenance",
    "PhantomVoteError",
    "PiecewiseCurve",
    "Prior",
    "Profile",
    "ProfileError",
    "QuadratureError",
    "RuleOutcome",
    "StepCurve",
    "TableLookupError",
    "TablePhantom",
    "TabulatedCurve",
    "UniformOptimalCurve",
    "VARIABLE_AXIOMS",
    "VariableElectorateRule",
    "WelfareEstimate",
    "Weights",
    "Witness",
    "adaptive_simpson",
    "as_rule",
    "audit_fixed",
    "audit_variable",
    "big_g",
    "cross_check",
    "curve_from_phantoms",
    "eval_curve",
    "eval_issues",
    "eval_maxmin",
    "eval_median",
    "eval_phantom_direct",
    "evaluate",
    "ex_post_welfare",
    "l1_optimal_outcome",
    "lq_optimal_outcome",
    "minimax_optimal_phantoms",
    "monte_carlo_ex_ante",
    "optimal_curve",
    "phantoms_from_curve",
    "profile_stream",
    "replay_witness",
    "sp_distance",
    "to_extremes",
    "top_k_profile",
    "uniform_optimal_curve",
    "weighted_share",
]
