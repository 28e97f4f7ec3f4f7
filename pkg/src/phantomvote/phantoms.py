"""Phantom functions and grading curves.

A phantom function assigns an alternative to every extreme profile, weakly
increasing in the componentwise order.  It is the complete description of a
strategy-proof rule: the rule's evaluators in :mod:`.representations` consume
these objects.  Anonymous rules compress to a grading curve, a monotone map
from the share of TOP marks in [0, 1] to an alternative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .domain import AlternativeDomain, ExtremeProfile, Mark, Profile
from .errors import (
    DiscontinuousCurveError,
    DomainError,
    EmptyElectorateError,
    InfeasibleSizeError,
    MalformedPhantomError,
    ProfileError,
    TableLookupError,
)

MONOTONE_TABLE_LIMIT = 12  # exhaustive covering-pair validation guard


# ---------------------------------------------------------------------------
# Grading curves
# ---------------------------------------------------------------------------


class GradingCurve:
    """Monotone map from a TOP-share in [0, 1] to an alternative.

    Subclasses implement :meth:`batch`; scalar evaluation is routed through
    it so that every consumer sees bit-identical arithmetic.
    """

    kind: str = "abstract"

    def __init__(self, domain: AlternativeDomain):
        self.domain = domain

    def batch(self, ts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, t: float) -> float:
        if not 0.0 <= t <= 1.0:
            raise DomainError(f"curve argument must lie in [0, 1], got {t}")
        return float(self.batch(np.asarray([t], dtype=float))[0])

    def is_continuous(self) -> bool:
        return True

    def range_contains(self, x: float) -> bool:
        """Whether x is attained by the curve (exact range membership)."""
        raise NotImplementedError

    def describe(self) -> dict:
        """JSON-friendly description used by the CLI serializer."""
        raise NotImplementedError


class LinearCurve(GradingCurve):
    """Affine curve from mu_minus at share 0 to mu_plus at share 1."""

    kind = "linear"

    def batch(self, ts: np.ndarray) -> np.ndarray:
        return self.domain.mu_minus + np.asarray(ts, dtype=float) * self.domain.span

    def range_contains(self, x: float) -> bool:
        return self.domain.contains(x)

    def describe(self) -> dict:
        return {"kind": "linear"}


class StepCurve(GradingCurve):
    """Two-level curve jumping at a threshold share, with an explicit value there."""

    kind = "step"

    def __init__(self, domain: AlternativeDomain, threshold: float, low: float,
                 high: float, at_threshold: float | None = None):
        super().__init__(domain)
        if not 0.0 <= threshold <= 1.0:
            raise DomainError(f"step threshold must lie in [0, 1], got {threshold}")
        if at_threshold is None:
            at_threshold = domain.midpoint
        for name, v in (("low", low), ("at_threshold", at_threshold), ("high", high)):
            if not domain.contains(v):
                raise DomainError(f"step {name} value {v} outside the domain")
        if not low <= at_threshold <= high:
            raise DomainError("step curve requires low <= at_threshold <= high")
        self.threshold = float(threshold)
        self.low = float(low)
        self.high = float(high)
        self.at_threshold = float(at_threshold)

    def batch(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        return np.where(ts > self.threshold, self.high,
                        np.where(ts < self.threshold, self.low, self.at_threshold))

    def is_continuous(self) -> bool:
        return self.low == self.at_threshold == self.high

    def range_contains(self, x: float) -> bool:
        values = {self.high}
        if self.threshold > 0.0:
            values.add(self.low)
        if 0.0 <= self.threshold <= 1.0:
            values.add(self.at_threshold)
        if self.threshold == 0.0:
            values.discard(self.low)
        return x in values

    def describe(self) -> dict:
        return {"kind": "step", "threshold": self.threshold, "low": self.low,
                "high": self.high, "at_threshold": self.at_threshold}


class PiecewiseCurve(GradingCurve):
    """Right-continuous step curve through explicit knots.

    ``knots`` is a sequence of (share, value) pairs; shares must start at 0,
    strictly increase, and values must be weakly increasing within the
    domain.  For share t the value is the one at the largest knot <= t.
    Values at shares between knots are a free completion of the monotone
    data; right-continuity is this implementation's documented choice.
    """

    kind = "piecewise"

    def __init__(self, domain: AlternativeDomain, knots: Sequence[tuple]):
        super().__init__(domain)
        if not knots:
            raise DomainError("piecewise curve needs at least one knot")
        shares = [float(t) for t, _ in knots]
        values = [float(v) for _, v in knots]
        if shares[0] != 0.0:
            raise DomainError("piecewise knots must start at share 0")
        for a, b in zip(shares, shares[1:]):
            if not a < b:
                raise DomainError("piecewise knot shares must strictly increase")
        if shares[-1] > 1.0:
            raise DomainError("piecewise knot shares must lie in [0, 1]")
        for v in values:
            if not domain.contains(v):
                raise DomainError(f"piecewise value {v} outside the domain")
        for a, b in zip(values, values[1:]):
            if not a <= b:
                raise DomainError("piecewise values must be weakly increasing")
        self._shares = np.asarray(shares, dtype=float)
        self._values = np.asarray(values, dtype=float)

    @property
    def knots(self) -> list[tuple]:
        return [(float(t), float(v)) for t, v in zip(self._shares, self._values)]

    def batch(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        idx = np.searchsorted(self._shares, ts, side="right") - 1
        return self._values[np.clip(idx, 0, len(self._values) - 1)]

    def max_jump(self) -> float:
        if len(self._values) < 2:
            return 0.0
        return float(np.max(np.diff(self._values)))

    def is_continuous(self) -> bool:
        return self.max_jump() == 0.0

    def range_contains(self, x: float) -> bool:
        return bool(np.any(self._values == x))

    def describe(self) -> dict:
        return {"kind": "piecewise", "knots": [[t, v] for t, v in self.knots]}


class UniformOptimalCurve(GradingCurve):
    """Closed-form curve minimizing expected q-power loss under a uniform prior.

    g(t) = m + (M - m) / (1 + (1/t - 1)^(1/(q-1))), with g(0) = m and
    g(1) = M by continuous extension.  For q = 2 this is the linear curve.
    """

    kind = "uniform_optimal"

    def __init__(self, domain: AlternativeDomain, q: float):
        super().__init__(domain)
        q = float(q)
        if not q > 1.0:
            raise DomainError(f"uniform-optimal curve requires q > 1, got {q}")
        self.q = q

    def batch(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        e = 1.0 / (self.q - 1.0)
        with np.errstate(divide="ignore"):
            u = 1.0 / ts - 1.0
        if e != 1.0:
            u = u ** e
        out = self.domain.mu_minus + self.domain.span / (1.0 + u)
        out = np.where(ts == 0.0, self.domain.mu_minus, out)
        out = np.where(ts == 1.0, self.domain.mu_plus, out)
        return out

    def range_contains(self, x: float) -> bool:
        return self.domain.contains(x)

    def describe(self) -> dict:
        return {"kind": "uniform_optimal", "q": self.q}


class TabulatedCurve(GradingCurve):
    """Monotone curve tabulated as (share, value) samples.

    When built by the welfare synthesizer it keeps a handle to the underlying
    transform and refines every evaluation by bisection between the
    bracketing samples (to ``xtol``).  A detached instance (for example one
    deserialized from JSON) falls back to linear interpolation of the table.
    """

    kind = "numeric"

    def __init__(self, domain: AlternativeDomain, shares: Sequence[float],
                 values: Sequence[float], transform: Callable[[float], float] | None = None,
                 xtol: float = 1e-9):
        super().__init__(domain)
        ys = np.asarray(shares, dtype=float)
        xs = np.asarray(values, dtype=float)
        if ys.ndim != 1 or ys.shape != xs.shape or len(ys) < 2:
            raise DomainError("tabulated curve needs matching share/value vectors, length >= 2")
        if ys[0] != 0.0 or ys[-1] != 1.0:
            raise DomainError("tabulated shares must run from 0 to 1")
        if np.any(np.diff(ys) < 0) or np.any(np.diff(xs) < 0):
            raise DomainError("tabulated curve must be weakly increasing")
        if xs[0] < domain.mu_minus or xs[-1] > domain.mu_plus:
            raise DomainError("tabulated values leave the domain")
        self._shares = ys
        self._values = xs
        self._transform = transform
        self._xtol = float(xtol)

    @property
    def table(self) -> tuple[np.ndarray, np.ndarray]:
        return self._shares.copy(), self._values.copy()

    def detach(self) -> "TabulatedCurve":
        return TabulatedCurve(self.domain, self._shares, self._values, None, self._xtol)

    def _refined(self, t: float) -> float:
        if t <= 0.0:
            return float(self._values[0])
        if t >= 1.0:
            return float(self._values[-1])
        j = int(np.searchsorted(self._shares, t, side="left"))
        if self._shares[j] == t:
            return float(self._values[j])
        lo, hi = float(self._values[j - 1]), float(self._values[j])
        g = self._transform
        while hi - lo > self._xtol:
            mid = 0.5 * (lo + hi)
            if g(mid) < t:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def batch(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        if self._transform is not None:
            return np.asarray([self._refined(float(t)) for t in ts], dtype=float)
        return np.interp(ts, self._shares, self._values)

    def max_jump(self) -> float:
        return float(np.max(np.diff(self._values))) if len(self._values) > 1 else 0.0

    def is_continuous(self) -> bool:
        # a live transform-backed curve is continuous by construction
        return self._transform is not None or self.max_jump() <= 1e-9

    def range_contains(self, x: float) -> bool:
        return float(self._values[0]) <= x <= float(self._values[-1])

    def describe(self) -> dict:
        return {"kind": "numeric", "shares": [float(v) for v in self._shares],
                "values": [float(v) for v in self._values]}


# ---------------------------------------------------------------------------
# Phantom functions
# ---------------------------------------------------------------------------


class PhantomFunction:
    """Map from extreme profiles to alternatives; weakly increasing when valid."""

    kind: str = "abstract"

    def __init__(self, domain: AlternativeDomain):
        self.domain = domain

    def value(self, marks: ExtremeProfile) -> float:
        raise NotImplementedError

    def fixed_size(self) -> int | None:
        """Electorate size this phantom is pinned to, or None if size-free."""
        return None

    def allows_abstention(self) -> bool:
        return False

    def describe(self) -> dict:
        raise NotImplementedError


def _require_no_abstain(marks: ExtremeProfile, kind: str) -> None:
    if marks.active_count != len(marks):
        raise ProfileError(f"{kind} phantom functions do not accept ABSTAIN marks")


class TablePhantom(PhantomFunction):
    """Explicit table over all extreme profiles of a fixed electorate size."""

    kind = "table"

    def __init__(self, domain: AlternativeDomain, entries: Mapping[ExtremeProfile, float]):
        super().__init__(domain)
        if not entries:
            raise MalformedPhantomError("phantom table is empty")
        sizes = {len(x) for x in entries}
        if len(sizes) != 1:
            raise MalformedPhantomError("phantom table mixes electorate sizes")
        self.n = sizes.pop()
        table = {}
        for x, v in entries.items():
            v = float(v)
            if not domain.contains(v):
                raise MalformedPhantomError(
                    f"table value {v} at {x.to_string()} outside the domain")
            table[x] = v
        self.entries = table
        self._mask_array: np.ndarray | None = None

    def value(self, marks: ExtremeProfile) -> float:
        try:
            return self.entries[marks]
        except KeyError:
            raise TableLookupError(f"no table entry for extreme profile {marks.to_string()}")

    def fixed_size(self) -> int | None:
        return self.n

    def mask_array(self) -> np.ndarray:
        """Values indexed by TOP-set bitmask; built once and cached."""
        if self._mask_array is None:
            size = 1 << self.n
            vals = np.empty(size, dtype=float)
            for mask in range(size):
                vals[mask] = self.value(ExtremeProfile.from_mask(mask, self.n))
            self._mask_array = vals
        return self._mask_array

    def describe(self) -> dict:
        return {"kind": "table",
                "entries": [{"marks": x.to_string(), "value": v}
                            for x, v in sorted(self.entries.items(),
                                               key=lambda kv: kv[0].to_mask())]}


def weighted_share(marks: ExtremeProfile, weights: Sequence[float] | None) -> float:
    """Share of TOP weight among active voters, folding weights in voter order.

    The fold order is part of the contract: every evaluator computes shares
    through this function (or its vectorized equivalent with identical
    per-mask accumulation order), so cross-representation comparisons are
    exact.
    """
    if weights is None:
        active = marks.active_count
        if active == 0:
            raise EmptyElectorateError("share of an empty electorate is undefined")
        return marks.top_count / active
    top = 0.0
    total = 0.0
    for i, m in enumerate(marks.marks):
        if m is Mark.ABSTAIN:
            continue
        w = weights[i]
        total += w
        if m is Mark.TOP:
            top += w
    if not total > 0:
        raise EmptyElectorateError("active voters carry no weight")
    return top / total


class CurvePhantom(PhantomFunction):
    """Anonymous (optionally weighted) phantom function driven by a grading curve.

    The value at an extreme profile is the curve applied to the TOP share
    among active voters.  ``empty_value`` supplies the outcome when every
    voter abstains; without it an empty electorate is an error.  Real-valued
    weights require a continuous curve, so discontinuous tabulated or
    piecewise curves are rejected when weights are attached.
    """

    kind = "curve"

    def __init__(self, curve: GradingCurve, weights: Sequence[float] | None = None,
                 empty_value: float | None = None):
        super().__init__(curve.domain)
        self.curve = curve
        self.weights = None if weights is None else tuple(float(w) for w in weights)
        if self.weights is not None:
            if any(w < 0 or not math.isfinite(w) for w in self.weights):
                raise ProfileError("weights must be finite and nonnegative")
            if isinstance(curve, (PiecewiseCurve, TabulatedCurve)) and not curve.is_continuous():
                raise DiscontinuousCurveError(
                    f"weighted curve phantom needs a continuous curve; "
                    f"max jump {curve.max_jump():.3g}")
        if empty_value is not None:
            empty_value = float(empty_value)
            if not curve.domain.contains(empty_value):
                raise DomainError(f"empty-electorate value {empty_value} outside the domain")
        self.empty_value = empty_value

    def value(self, marks: ExtremeProfile) -> float:
        if marks.active_count == 0:
            if self.empty_value is None:
                raise EmptyElectorateError(
                    "curve phantom has no empty-electorate value configured")
            return self.empty_value
        if self.weights is not None and len(self.weights) != len(marks):
            raise ProfileError("weights length does not match electorate size")
        return float(self.curve.batch(
            np.asarray([weighted_share(marks, self.weights)], dtype=float))[0])

    def allows_abstention(self) -> bool:
        return True

    def fixed_size(self) -> int | None:
        return None if self.weights is None else len(self.weights)

    def describe(self) -> dict:
        d = {"kind": "curve", "curve": self.curve.describe()}
        if self.weights is not None:
            d["weights"] = list(self.weights)
        if self.empty_value is not None:
            d["empty_electorate_value"] = self.empty_value
        return d


class ConstantPhantom(PhantomFunction):
    """Imposed rule: every extreme profile maps to the same alternative."""

    kind = "constant"

    def __init__(self, domain: AlternativeDomain, value: float):
        super().__init__(domain)
        value = float(value)
        if not domain.contains(value):
            raise DomainError(f"constant value {value} outside the domain")
        self.constant = value

    def value(self, marks: ExtremeProfile) -> float:
        return self.constant

    def allows_abstention(self) -> bool:
        return True

    def describe(self) -> dict:
        return {"kind": "constant", "value": self.constant}


class DictatorPhantom(PhantomFunction):
    """The rule that copies one voter's ballot: TOP mark maps to mu_plus."""

    kind = "dictator"

    def __init__(self, domain: AlternativeDomain, voter: int):
        super().__init__(domain)
        if voter < 0:
            raise ProfileError("dictator voter position must be >= 0")
        self.voter = int(voter)

    def value(self, marks: ExtremeProfile) -> float:
        _require_no_abstain(marks, self.kind)
        if self.voter >= len(marks):
            raise ProfileError(
                f"dictator position {self.voter} outside electorate of size {len(marks)}")
        return self.domain.mu_plus if marks.marks[self.voter] is Mark.TOP else self.domain.mu_minus

    def describe(self) -> dict:
        return {"kind": "dictator", "voter_index": self.voter}


class OrderStatisticPhantom(PhantomFunction):
    """Two-valued phantom selecting the k-th largest ballot (k = 1 is the max).

    The induced rule returns the k-th highest peak; the phantom maps an
    extreme profile to mu_plus exactly when at least k voters are TOP.
    """

    kind = "order_statistic"

    def __init__(self, domain: AlternativeDomain, k: int):
        super().__init__(domain)
        if not isinstance(k, int) or k < 1:
            raise ProfileError(f"order statistic index must be a positive integer, got {k}")
        self.k = k

    def value(self, marks: ExtremeProfile) -> float:
        _require_no_abstain(marks, self.kind)
        if self.k > len(marks):
            raise ProfileError(
                f"order statistic k={self.k} exceeds electorate size {len(marks)}")
        return self.domain.mu_plus if marks.top_count >= self.k else self.domain.mu_minus

    def describe(self) -> dict:
        return {"kind": "order_statistic", "k": self.k}


def phantom_value(alpha: PhantomFunction, marks: ExtremeProfile) -> float:
    """Evaluate a phantom function at an extreme profile."""
    return alpha.value(marks)


# ---------------------------------------------------------------------------
# Conversions and validation
# ---------------------------------------------------------------------------


def phantoms_from_curve(curve: GradingCurve, n: int) -> list[float]:
    """The n+1 anonymous phantom values g(k/n) for k = 0..n."""
    if n < 1:
        raise ProfileError("need at least one voter")
    return [float(v) for v in curve.batch(np.arange(n + 1, dtype=float) / n)]


def curve_from_phantoms(values: Sequence[float], domain: AlternativeDomain) -> PiecewiseCurve:
    """Step curve through anonymous phantom values at shares k/n.

    Completion between the knots is the documented right-continuous step;
    any monotone completion induces the same rule on electorates of size n.
    """
    values = [float(v) for v in values]
    if len(values) < 2:
        raise ProfileError("need at least two phantom values (n >= 1)")
    n = len(values) - 1
    for a, b in zip(values, values[1:]):
        if not a <= b:
            raise MalformedPhantomError("phantom values must be weakly increasing")
    knots = [(k / n, values[k]) for k in range(n + 1)]
    return PiecewiseCurve(domain, knots)


def check_monotone(alpha: PhantomFunction) -> tuple[bool, tuple | None]:
    """Verify weak monotonicity; returns (ok, witness).

    Tables are checked exhaustively over all covering pairs (one BOTTOM
    flipped to TOP), guarded to n <= 12.  A failing witness is the
    lexicographically first pair (by bitmask, then flipped position).
    Curve-backed phantoms are validated through a dense share scan; constant,
    dictator, and order-statistic phantoms are monotone by construction.
    """
    if isinstance(alpha, TablePhantom):
        if alpha.n > MONOTONE_TABLE_LIMIT:
            raise InfeasibleSizeError(
                f"exhaustive monotonicity check capped at n={MONOTONE_TABLE_LIMIT}, "
                f"table has n={alpha.n}")
        vals = alpha.mask_array()
        for mask in range(1 << alpha.n):
            for i in range(alpha.n):
                if mask & (1 << i):
                    continue
                flipped = mask | (1 << i)
                if vals[mask] > vals[flipped]:
                    return False, (ExtremeProfile.from_mask(mask, alpha.n),
                                   ExtremeProfile.from_mask(flipped, alpha.n))
        return True, None
    if isinstance(alpha, CurvePhantom):
        ts = np.linspace(0.0, 1.0, 1025)
        vals = alpha.curve.batch(ts)
        if np.any(np.diff(vals) < 0):
            j = int(np.argmax(np.diff(vals) < 0))
            return False, (float(ts[j]), float(ts[j + 1]))
        return True, None
    return True, None


# ---------------------------------------------------------------------------
# Variable electorates
# ---------------------------------------------------------------------------


@dataclass
class VariableElectorateRule:
    """A size-independent anonymous rule: one curve for every electorate size.

    ``empty_value`` is the outcome when nobody votes.  The rule satisfies
    voluntary-participation exactly when the phantom values stay weakly
    increasing across the empty boundary, which for a curve means
    g(0) <= empty_value <= g(1); ``participation_ok`` reports the stricter
    range-membership form (empty_value is actually attained by the curve),
    the form under which joining never repels the outcome past one's peak.
    """

    curve: GradingCurve
    empty_value: float

    def __post_init__(self):
        self.empty_value = float(self.empty_value)
        if not self.curve.domain.contains(self.empty_value):
            raise DomainError("empty-electorate value outside the domain")

    def phantom(self, weights: Sequence[float] | None = None) -> CurvePhantom:
        return CurvePhantom(self.curve, weights=weights, empty_value=self.empty_value)

    @property
    def participation_ok(self) -> bool:
        return self.curve.range_contains(self.empty_value)

    def __call__(self, ballots) -> float:
        from .representations import eval_curve  # local import to avoid a cycle

        if not isinstance(ballots, Profile):
            ballots = tuple(ballots)
        return eval_curve(self.phantom(), ballots).value

    def describe(self) -> dict:
        return {"kind": "variable", "curve": self.curve.describe(),
                "empty_electorate_value": self.empty_value}
