"""Five equivalent ways to evaluate a strategy-proof rule from its phantom function.

Every evaluator takes the same inputs (a phantom function and a profile) and
must return exactly the same outcome value:

* ``eval_phantom_direct`` -- case analysis over all extreme profiles,
  O(2^n (n + f)).
* ``eval_maxmin`` -- max over extreme profiles of min(phantom, supports),
  O(2^n (n + f)).
* ``eval_median`` -- median of the n ballots and n+1 phantom ballots,
  O(n (log n + f)).
* ``eval_curve`` -- largest cutoff the collapsed electorate still supports,
  by binary search over sorted ballots, O((n + f) log n); the only evaluator
  that accepts abstentions and empty electorates.
* ``eval_issues`` -- per-candidate winning-coalition certificates,
  O(2^n n + n f).

``cross_check`` runs all applicable evaluators and reports any disagreement;
comparisons are exact, never within a tolerance.
"""
from __future__ import annotations

import time
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .domain import ABSTAIN, AlternativeDomain, ExtremeProfile, Mark, Profile
from .errors import (
    EmptyElectorateError,
    InfeasibleSizeError,
    MalformedPhantomError,
    ProfileError,
)
from .phantoms import (
    ConstantPhantom,
    CurvePhantom,
    DictatorPhantom,
    OrderStatisticPhantom,
    PhantomFunction,
    TablePhantom,
    phantoms_from_curve,
)

EXPONENTIAL_LIMIT = 20      # hard guard for the 2^n evaluators
CROSS_CHECK_EXP_LIMIT = 14  # above this cross_check skips the exponential ones
_MARKS_LIMIT = 64           # largest electorate for which provenance carries marks


# ---------------------------------------------------------------------------
# Outcomes and provenance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BallotProvenance:
    """The outcome equals this voter's ballot."""

    voter: int
    voter_id: object = None

    def to_dict(self) -> dict:
        vid = self.voter_id if self.voter_id is not None else self.voter
        return {"kind": "ballot", "voter": self.voter, "voter_id": vid}


@dataclass(frozen=True)
class PhantomProvenance:
    """The outcome equals the phantom value at this extreme profile."""

    top_count: int | None = None
    marks: ExtremeProfile | None = None

    def to_dict(self) -> dict:
        return {"kind": "phantom", "top_count": self.top_count,
                "marks": None if self.marks is None else self.marks.to_string()}


@dataclass(frozen=True)
class RuleOutcome:
    value: float
    provenance: BallotProvenance | PhantomProvenance

    def to_dict(self) -> dict:
        return {"value": self.value, "provenance": self.provenance.to_dict()}


# ---------------------------------------------------------------------------
# Input normalization and compiled phantom access
# ---------------------------------------------------------------------------


@dataclass
class _Ctx:
    values: np.ndarray           # active ballots, original relative order
    positions: list | None       # original positions of active voters, None if identity
    ids: tuple | None
    total_n: int

    @property
    def n(self) -> int:
        return int(self.values.size)

    def original_position(self, active_index: int) -> int:
        return active_index if self.positions is None else self.positions[active_index]

    def voter_id_at(self, original_position: int):
        return None if self.ids is None else self.ids[original_position]


def _prepare(alpha: PhantomFunction, profile) -> _Ctx:
    if isinstance(profile, Profile):
        ids = profile.voter_ids
        total_n = len(profile)
        if profile.has_abstentions:
            if not alpha.allows_abstention():
                raise ProfileError(
                    f"{alpha.kind} phantom functions do not accept abstentions")
            positions = profile.active_positions()
            values = np.asarray(profile.active_values(), dtype=float)
        else:
            positions = None
            values = np.asarray(profile.ballots, dtype=float)
    else:
        try:
            values = np.asarray(profile, dtype=float)
        except (TypeError, ValueError):
            raise ProfileError(
                "raw ballot sequences must contain only numbers; use Profile for abstentions")
        if values.ndim != 1:
            raise ProfileError("ballots must form a one-dimensional sequence")
        ids = None
        positions = None
        total_n = int(values.size)
    if values.size:
        if not np.all(np.isfinite(values)):
            raise ProfileError("ballots must be finite (no NaN or infinities)")
        lo, hi = alpha.domain.mu_minus, alpha.domain.mu_plus
        if float(values.min()) < lo or float(values.max()) > hi:
            bad = int(np.argmax((values < lo) | (values > hi)))
            raise ProfileError(f"ballot {values[bad]} outside [{lo}, {hi}]")
    fixed = alpha.fixed_size()
    if fixed is not None:
        expect = total_n if isinstance(alpha, CurvePhantom) else int(values.size)
        if fixed != expect:
            raise ProfileError(
                f"{alpha.kind} phantom is pinned to {fixed} voters, profile has {expect}")
    return _Ctx(values=values, positions=positions, ids=ids, total_n=total_n)


@lru_cache(maxsize=32)
def _popcounts(n: int) -> np.ndarray:
    size = 1 << n
    pc = np.zeros(size, dtype=np.int64)
    for b in range(n):
        pc.reshape(-1, 2, 1 << b)[:, 1, :] += 1
    return pc


class _Compiled:
    """Uniform accessor for phantom values over the active electorate.

    ``by_count`` is set for anonymous phantom kinds (value depends only on
    the number of TOP marks); ``of_mask``/``mask_values`` serve the general
    case.  All paths that can be reached with the same inputs perform the
    same float operations, so the evaluators agree bit for bit.
    """

    def __init__(self, alpha: PhantomFunction, ctx: _Ctx):
        self.alpha = alpha
        self.n = ctx.n
        n = self.n
        dom = alpha.domain
        self.by_count: np.ndarray | None = None
        self._masked: np.ndarray | None = None
        self._dict_voter: int | None = None
        self._w: list | None = None
        self._wtotal: float | None = None
        if isinstance(alpha, TablePhantom):
            self._masked = alpha.mask_array()
        elif isinstance(alpha, ConstantPhantom):
            self.by_count = np.full(n + 1, alpha.constant, dtype=float)
        elif isinstance(alpha, OrderStatisticPhantom):
            if n > 0 and alpha.k > n:
                raise ProfileError(
                    f"order statistic k={alpha.k} exceeds electorate size {n}")
            self.by_count = np.where(np.arange(n + 1) >= alpha.k, dom.mu_plus, dom.mu_minus)
        elif isinstance(alpha, DictatorPhantom):
            if n > 0 and alpha.voter >= n:
                raise ProfileError(
                    f"dictator position {alpha.voter} outside electorate of size {n}")
            self._dict_voter = alpha.voter
        elif isinstance(alpha, CurvePhantom):
            if alpha.weights is None:
                if n > 0:
                    self.by_count = np.asarray(phantoms_from_curve(alpha.curve, n))
            elif n > 0:
                src = ctx.positions if ctx.positions is not None else range(n)
                self._w = [alpha.weights[p] for p in src]
                total = 0.0
                for w in self._w:   # ascending-position fold, the canonical order
                    total += w
                if not total > 0:
                    raise EmptyElectorateError("active voters carry no weight")
                self._wtotal = total

    def empty_outcome(self) -> float:
        a = self.alpha
        if isinstance(a, ConstantPhantom):
            return a.constant
        if isinstance(a, CurvePhantom):
            if a.empty_value is not None:
                return a.empty_value
            raise EmptyElectorateError(
                "curve phantom has no empty-electorate value configured")
        raise EmptyElectorateError(f"{a.kind} phantom cannot score an empty electorate")

    def of_count(self, k: int) -> float:
        return float(self.by_count[k])

    def of_mask(self, mask: int) -> float:
        if self._masked is not None:
            return float(self._masked[mask])
        if self.by_count is not None:
            return float(self.by_count[mask.bit_count()])
        if self._dict_voter is not None:
            dom = self.alpha.domain
            return dom.mu_plus if (mask >> self._dict_voter) & 1 else dom.mu_minus
        if self._w is not None:
            top = 0.0
            for b in range(self.n):
                if (mask >> b) & 1:
                    top += self._w[b]
            share = top / self._wtotal
            curve = self.alpha.curve
            return float(curve.batch(np.asarray([share], dtype=float))[0])
        return self.alpha.value(ExtremeProfile.from_mask(mask, self.n))

    def mask_values(self) -> np.ndarray:
        n = self.n
        if self._masked is None:
            if self.by_count is not None:
                self._masked = self.by_count[_popcounts(n)]
            elif self._dict_voter is not None:
                dom = self.alpha.domain
                bits = (np.arange(1 << n, dtype=np.int64) >> self._dict_voter) & 1
                self._masked = np.where(bits == 1, dom.mu_plus, dom.mu_minus)
            elif self._w is not None:
                top = np.zeros(1 << n, dtype=float)
                for b in range(n):   # same ascending accumulation as of_mask
                    top.reshape(-1, 2, 1 << b)[:, 1, :] += self._w[b]
                shares = top / self._wtotal
                self._masked = np.asarray(self.alpha.curve.batch(shares), dtype=float)
            else:
                vals = np.empty(1 << n, dtype=float)
                for mask in range(1 << n):
                    vals[mask] = self.alpha.value(ExtremeProfile.from_mask(mask, n))
                self._masked = vals
        return self._masked


def _guard_exponential(n: int, name: str) -> None:
    if n > EXPONENTIAL_LIMIT:
        raise InfeasibleSizeError(
            f"{name} enumerates 2^n extreme profiles; n={n} exceeds the "
            f"guard of {EXPONENTIAL_LIMIT}")


def _marks_for(ctx: _Ctx, mask: int) -> ExtremeProfile | None:
    if ctx.total_n > _MARKS_LIMIT:
        return None
    n = ctx.n
    if ctx.positions is None:
        return ExtremeProfile.from_mask(mask, n)
    marks = [Mark.ABSTAIN] * ctx.total_n
    for j in range(n):
        marks[ctx.positions[j]] = Mark.TOP if (mask >> j) & 1 else Mark.BOTTOM
    return ExtremeProfile(tuple(marks))


def _ballot_provenance(ctx: _Ctx, active_index: int) -> BallotProvenance:
    pos = ctx.original_position(active_index)
    return BallotProvenance(voter=pos, voter_id=ctx.voter_id_at(pos))


def _empty_outcome(comp: _Compiled, ctx: _Ctx) -> RuleOutcome:
    v = comp.empty_outcome()
    return RuleOutcome(v, PhantomProvenance(top_count=0, marks=_marks_for(ctx, 0)))


def _ranked_masks(values: np.ndarray) -> list[int]:
    """Prefix TOP-set bitmasks: entry c is the mask of the c largest ballots.

    Ballot ties are broken toward lower positions, but entry c is consulted
    only for value thresholds where all tied ballots are included, so the
    masks used are always value-determined.
    """
    n = int(values.size)
    order = sorted(range(n), key=lambda j: (-values[j], j))
    masks = [0] * (n + 1)
    m = 0
    for t, j in enumerate(order):
        m |= 1 << j
        masks[t + 1] = m
    return masks


# ---------------------------------------------------------------------------
# Evaluators
# ---------------------------------------------------------------------------


def eval_phantom_direct(alpha: PhantomFunction, profile) -> RuleOutcome:
    """Case analysis over extreme profiles, the defining characterization.

    First pass: find an extreme profile X whose TOP set is exactly the set of
    ballots at or above the phantom value there; the outcome is that phantom
    value.  Second pass: find a voter whose ballot is bracketed by the
    phantom values just above and at their ballot; the outcome is their
    ballot.  If neither case matches the phantom function is not weakly
    increasing.
    """
    ctx = _prepare(alpha, profile)
    comp = _Compiled(alpha, ctx)
    n = ctx.n
    if n == 0:
        return _empty_outcome(comp, ctx)
    _guard_exponential(n, "eval_phantom_direct")
    values = ctx.values
    vals = comp.mask_values()
    asc = np.sort(values)
    masks = _ranked_masks(values)
    counts = n - np.searchsorted(asc, vals, side="left")
    hits = np.nonzero(np.asarray(masks, dtype=np.int64)[counts]
                      == np.arange(1 << n, dtype=np.int64))[0]
    if hits.size:
        mask = int(hits[0])
        a = float(vals[mask])
        return RuleOutcome(a, PhantomProvenance(top_count=mask.bit_count(),
                                                marks=_marks_for(ctx, mask)))
    vlist = values.tolist()
    for i in range(n):
        ri = vlist[i]
        above = 0
        at_or_above = 0
        for j in range(n):
            if vlist[j] > ri:
                above |= 1 << j
                at_or_above |= 1 << j
            elif vlist[j] == ri:
                at_or_above |= 1 << j
        if comp.of_mask(above) <= ri <= comp.of_mask(at_or_above):
            return RuleOutcome(ri, _ballot_provenance(ctx, i))
    raise MalformedPhantomError(
        "no characterization case matched; the phantom function is not weakly increasing")


def eval_maxmin(alpha: PhantomFunction, profile) -> RuleOutcome:
    """Best supported compromise: max over X of min(alpha(X), lowest TOP ballot)."""
    ctx = _prepare(alpha, profile)
    comp = _Compiled(alpha, ctx)
    n = ctx.n
    if n == 0:
        return _empty_outcome(comp, ctx)
    _guard_exponential(n, "eval_maxmin")
    values = ctx.values
    vals = comp.mask_values()
    minr = np.full(1 << n, np.inf)
    for b in range(n):
        view = minr.reshape(-1, 2, 1 << b)
        view[:, 1, :] = np.minimum(view[:, 1, :], values[b])
    score = np.minimum(vals, minr)
    best = int(np.argmax(score))
    v = float(score[best])
    eq = np.nonzero(values == v)[0]
    if eq.size:
        return RuleOutcome(v, _ballot_provenance(ctx, int(eq[0])))
    return RuleOutcome(v, PhantomProvenance(top_count=best.bit_count(),
                                            marks=_marks_for(ctx, best)))


def eval_median(alpha: PhantomFunction, profile) -> RuleOutcome:
    """Median of the n ballots and the n+1 phantom values along the ranked chain.

    Chain entry k is the phantom value at the extreme profile whose TOP set
    holds the k largest ballots; ties at the boundary are broken toward lower
    positions, which provably never changes the median.
    """
    ctx = _prepare(alpha, profile)
    comp = _Compiled(alpha, ctx)
    n = ctx.n
    if n == 0:
        return _empty_outcome(comp, ctx)
    values = ctx.values
    if comp.by_count is not None:
        chain = comp.by_count
        pool = np.concatenate([values, chain])
        med = float(np.partition(pool, n)[n])
    else:
        masks = _ranked_masks(values)
        chain = np.asarray([comp.of_mask(m) for m in masks])
        pool = np.concatenate([values, chain])
        med = float(np.partition(pool, n)[n])
    eq = np.nonzero(values == med)[0]
    if eq.size:
        return RuleOutcome(med, _ballot_provenance(ctx, int(eq[0])))
    k = int(np.nonzero(chain == med)[0][0])
    marks = None
    if ctx.total_n <= _MARKS_LIMIT:
        if comp.by_count is not None:
            masks = _ranked_masks(values)
        marks = _marks_for(ctx, masks[k])
    return RuleOutcome(med, PhantomProvenance(top_count=k, marks=marks))


def eval_curve(alpha: PhantomFunction, profile) -> RuleOutcome:
    """Largest cutoff whose collapsed electorate still carries it.

    The outcome is sup{y : alpha(collapse(profile, y)) >= y}.  The collapsed
    phantom value is a non-increasing step function of y that changes only at
    ballot values, so the sup is attained at a ballot or at a phantom value
    and is found exactly by binary search over the sorted distinct ballots.
    Abstentions and empty electorates are supported for phantom kinds that
    accept them.
    """
    ctx = _prepare(alpha, profile)
    comp = _Compiled(alpha, ctx)
    n = ctx.n
    if n == 0:
        return _empty_outcome(comp, ctx)
    values = ctx.values
    uniq = np.unique(values)              # ascending distinct ballot values
    m = int(uniq.size)
    asc = np.sort(values)
    # counts[t] = number of ballots >= the t-th largest distinct value
    masks = None
    if comp.by_count is None:
        masks = _ranked_masks(values)

    def count_ge(v: float) -> int:
        return n - int(np.searchsorted(asc, v, side="left"))

    cache: dict = {}

    def alpha_at(t: int) -> float:
        # phantom value when the TOP set is everyone at or above the t-th
        # largest distinct ballot (t = 0: nobody)
        got = cache.get(t)
        if got is None:
            c = 0 if t == 0 else count_ge(float(uniq[m - t]))
            got = comp.of_count(c) if comp.by_count is not None else comp.of_mask(masks[c])
            cache[t] = (got, c)
            return got
        return got[0]

    def top_count_at(t: int) -> int:
        return cache[t][1]

    def phantom_outcome(t: int, value: float) -> RuleOutcome:
        c = top_count_at(t)
        if masks is not None:
            mask = masks[c]
        elif ctx.total_n <= _MARKS_LIMIT:
            mask = _ranked_masks(values)[c]
        else:
            mask = None
        marks = None if mask is None else _marks_for(ctx, mask)
        return RuleOutcome(value, PhantomProvenance(top_count=c, marks=marks))

    def ballot_outcome(value: float) -> RuleOutcome:
        idx = int(np.nonzero(values == value)[0][0])
        return RuleOutcome(value, _ballot_provenance(ctx, idx))

    v_top = float(uniq[-1])
    a0 = alpha_at(0)
    if a0 > v_top:
        return phantom_outcome(0, a0)
    # find the smallest t >= 1 with alpha_at(t) >= t-th largest distinct value;
    # the predicate is monotone in t (alpha rises while the threshold falls)
    lo, hi = 1, m
    if alpha_at(m) < float(uniq[0]):
        return phantom_outcome(m, alpha_at(m))
    while lo < hi:
        mid = (lo + hi) // 2
        if alpha_at(mid) >= float(uniq[m - mid]):
            hi = mid
        else:
            lo = mid + 1
    t_hat = lo
    v_hat = float(uniq[m - t_hat])
    if t_hat == 1:
        return ballot_outcome(v_hat)
    a_prev = alpha_at(t_hat - 1)
    if a_prev > v_hat:
        return phantom_outcome(t_hat - 1, a_prev)
    return ballot_outcome(v_hat)


def eval_issues(alpha: PhantomFunction, profile) -> RuleOutcome:
    """Per-candidate winning-coalition certificates.

    A value wins exactly when the voters at or above it contain a coalition
    whose all-TOP extreme profile scores at least the value, and the voters
    at or below it contain the mirror-image coalition.  Coalition existence
    is decided from two full subset-lattice sweeps over all 2^n extreme
    profiles.
    """
    ctx = _prepare(alpha, profile)
    comp = _Compiled(alpha, ctx)
    n = ctx.n
    if n == 0:
        return _empty_outcome(comp, ctx)
    _guard_exponential(n, "eval_issues")
    values = ctx.values
    vals = comp.mask_values()
    best_within = vals.copy()     # max phantom value over subsets of each mask
    worst_above = vals.copy()     # min phantom value over supersets of each mask
    for b in range(n):
        vw = best_within.reshape(-1, 2, 1 << b)
        vw[:, 1, :] = np.maximum(vw[:, 1, :], vw[:, 0, :])
        wa = worst_above.reshape(-1, 2, 1 << b)
        wa[:, 0, :] = np.minimum(wa[:, 0, :], wa[:, 1, :])
    masks = _ranked_masks(values)
    asc_list = np.sort(values).tolist()
    vlist = values.tolist()
    chain = [float(vals[m]) for m in masks]
    candidates = sorted(set(vlist) | set(chain))
    for a in candidates:
        c_sup = n - bisect_left(asc_list, a)
        c_strict = n - bisect_right(asc_list, a)
        supporters = masks[c_sup]
        demanders = masks[c_strict]
        if float(best_within[supporters]) >= a and float(worst_above[demanders]) <= a:
            if a in vlist:
                return RuleOutcome(a, _ballot_provenance(ctx, vlist.index(a)))
            return RuleOutcome(a, PhantomProvenance(top_count=c_sup,
                                                    marks=_marks_for(ctx, supporters)))
    raise MalformedPhantomError(
        "no candidate carried both coalitions; the phantom function is not weakly increasing")


_EVALUATORS = {
    "direct": eval_phantom_direct,
    "maxmin": eval_maxmin,
    "median": eval_median,
    "curve": eval_curve,
    "issues": eval_issues,
}

EXPONENTIAL_REPRESENTATIONS = ("direct", "maxmin", "issues")


def evaluate(alpha: PhantomFunction, profile, representation: str = "curve") -> RuleOutcome:
    """Evaluate a rule; the curve evaluator is the production default."""
    try:
        fn = _EVALUATORS[representation]
    except KeyError:
        raise ValueError(f"unknown representation {representation!r}; "
                         f"choose from {sorted(_EVALUATORS)}")
    return fn(alpha, profile)


def as_rule(alpha: PhantomFunction):
    """Plain ballots -> outcome callable, evaluated through the curve form."""

    def rule(ballots) -> float:
        return eval_curve(alpha, ballots).value

    return rule


@dataclass
class CrossCheckReport:
    n: int
    values: dict
    provenances: dict
    timings_ns: dict
    skipped: dict
    disagreements: list = field(default_factory=list)

    @property
    def agreement(self) -> bool:
        return not self.disagreements

    @property
    def value(self) -> float:
        return next(iter(self.values.values()))

    def to_dict(self, include_timings: bool = True) -> dict:
        d = {
            "n": self.n,
            "values": dict(self.values),
            "provenances": {k: p.to_dict() for k, p in self.provenances.items()},
            "skipped": dict(self.skipped),
            "agreement": self.agreement,
            "disagreements": [
                {"first": a, "second": b, "first_value": va, "second_value": vb}
                for a, b, va, vb in self.disagreements
            ],
        }
        if include_timings:
            d["timings_ns"] = dict(self.timings_ns)
        return d


def cross_check(alpha: PhantomFunction, profile,
                representations: Sequence[str] | None = None,
                exponential_limit: int = CROSS_CHECK_EXP_LIMIT) -> CrossCheckReport:
    """Run every applicable evaluator and compare outcomes exactly.

    Exponential evaluators are skipped (and recorded as such) above
    ``exponential_limit`` active voters.  Any pairwise difference in outcome
    values is a disagreement; values must match exactly.
    """
    names = list(representations) if representations else list(_EVALUATORS)
    ctx = _prepare(alpha, profile)
    n = ctx.n
    values: dict = {}
    provenances: dict = {}
    timings: dict = {}
    skipped: dict = {}
    for name in names:
        if name not in _EVALUATORS:
            raise ValueError(f"unknown representation {name!r}")
        if name in EXPONENTIAL_REPRESENTATIONS and n > exponential_limit:
            skipped[name] = f"n={n} exceeds exponential cross-check limit {exponential_limit}"
            continue
        t0 = time.perf_counter_ns()
        out = _EVALUATORS[name](alpha, profile)
        timings[name] = time.perf_counter_ns() - t0
        values[name] = out.value
        provenances[name] = out.provenance
    report = CrossCheckReport(n=n, values=values, provenances=provenances,
                              timings_ns=timings, skipped=skipped)
    done = list(values)
    for i, a in enumerate(done):
        for b in done[i + 1:]:
            if values[a] != values[b]:
                report.disagreements.append((a, b, values[a], values[b]))
    return report
