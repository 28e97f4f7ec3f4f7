"""Welfare measurement and welfare-optimal rule synthesis.

The loss of an outcome against a ballot profile is the (optionally weighted)
sum of q-th powers of distances; welfare is its negation.  Three synthesis
routes produce the rules that optimize it among the strategy-proof ones:

* ``uniform_optimal_curve`` -- the closed-form curve for a uniform ballot
  distribution.
* ``optimal_curve`` -- the numeric curve for an arbitrary ballot density,
  built by inverting a strictly increasing transform of the distribution.
* ``minimax_optimal_phantoms`` -- the phantom function minimizing the worst
  case over all profiles, for arbitrary voter weights.

``monte_carlo_ex_ante`` estimates the expected loss of any rule by sampling
profiles from a prior with a counter-keyed generator, so sample i draws the
same profile no matter how the run is sharded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .domain import AlternativeDomain, Profile, Weights
from .errors import (
    DomainError,
    EmptyElectorateError,
    InfeasibleSizeError,
    NonInvertibleTransformError,
    ProfileError,
    QuadratureError,
)
from .phantoms import (
    CurvePhantom,
    PhantomFunction,
    TabulatedCurve,
    UniformOptimalCurve,
)

OPTIMAL_CURVE_SCAN = 1025
DENSITY_SCAN = 4097
QUADRATURE_TOL = 1e-8
MAX_QUADRATURE_INTERVALS = 1 << 20
BISECTION_XTOL = 1e-12


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


def _vector_values(f: Callable, xs: np.ndarray) -> np.ndarray:
    """Evaluate a scalar-or-vector function on an array of points."""
    with np.errstate(all="ignore"):
        try:
            out = np.asarray(f(xs), dtype=float)
        except Exception:
            out = np.asarray([float(f(float(x))) for x in xs], dtype=float)
        else:
            if out.shape != xs.shape:
                if out.ndim == 0:
                    out = np.full(xs.shape, float(out))
                else:
                    out = np.asarray([float(f(float(x))) for x in xs], dtype=float)
    if not np.all(np.isfinite(out)):
        raise QuadratureError("integrand produced a non-finite value")
    return out


def adaptive_simpson(f: Callable, lo: float, hi: float,
                     tol: float = QUADRATURE_TOL,
                     max_intervals: int = MAX_QUADRATURE_INTERVALS,
                     initial_panels: int = 64) -> float:
    """Integrate f over [lo, hi] to absolute tolerance ``tol``.

    Standard adaptive Simpson rule with Richardson extrapolation; the
    worklist of unconverged subintervals advances as whole arrays, so the
    integrand always receives vectors.  The per-interval error budget is
    proportional to the interval's length, which bounds the total error by
    ``tol``.  The range starts pre-split into ``initial_panels`` panels so a
    narrow interior feature cannot slip between the first probe points;
    features narrower than the resulting probe spacing are the caller's
    responsibility, as is boundedness of the integrand.
    """
    lo = float(lo)
    hi = float(hi)
    if hi == lo:
        return 0.0
    if hi < lo:
        return -adaptive_simpson(f, hi, lo, tol, max_intervals, initial_panels)
    panels = max(1, min(int(initial_panels), max_intervals))
    nodes = np.linspace(lo, hi, 2 * panels + 1)
    fnodes = _vector_values(f, nodes)
    a = nodes[0:-1:2]
    b = nodes[2::2]
    fa = fnodes[0:-1:2]
    fm = fnodes[1::2]
    fb = fnodes[2::2]
    total = 0.0
    leaves = panels
    while a.size:
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = _vector_values(f, lm)
        frm = _vector_values(f, rm)
        h = b - a
        s1 = h / 6.0 * (fa + 4.0 * fm + fb)
        s2 = h / 12.0 * (fa + 4.0 * flm + 2.0 * fm + 4.0 * frm + fb)
        err = np.abs(s2 - s1) / 15.0
        done = err <= tol * h / (hi - lo)
        total += float(np.sum(s2[done] + (s2[done] - s1[done]) / 15.0))
        keep = ~done
        leaves += int(np.count_nonzero(keep))
        if leaves > max_intervals:
            raise QuadratureError(
                f"quadrature did not converge within {max_intervals} subintervals")
        a = np.concatenate([a[keep], m[keep]])
        b = np.concatenate([m[keep], b[keep]])
        new_fa = np.concatenate([fa[keep], fm[keep]])
        new_fb = np.concatenate([fm[keep], fb[keep]])
        fm = np.concatenate([flm[keep], frm[keep]])
        fa, fb = new_fa, new_fb
    return total


# ---------------------------------------------------------------------------
# priors
# ---------------------------------------------------------------------------


class Prior:
    """Ballot distribution on an interval: uniform, or a custom density.

    Custom densities must be bounded, nonnegative, and integrate to one over
    the support; this is validated on construction (nonnegativity and the
    rejection-sampling bound come from a dense scan, so a spike entirely
    between scan points is the caller's responsibility).
    """

    def __init__(self, low: float, high: float, density: Callable | None = None):
        low = float(low)
        high = float(high)
        if not (math.isfinite(low) and math.isfinite(high) and low < high):
            raise DomainError(f"prior support needs low < high, got [{low}, {high}]")
        self.low = low
        self.high = high
        self.density = density
        self._bound = None
        if density is not None:
            xs = np.linspace(low, high, DENSITY_SCAN)
            vals = _vector_values(density, xs)
            if np.any(vals < -1e-12):
                j = int(np.argmin(vals))
                raise DomainError(
                    f"density is negative at x={xs[j]:.6g}: {vals[j]:.6g}")
            mass = adaptive_simpson(density, low, high)
            if abs(mass - 1.0) > 1e-6:
                raise DomainError(f"density mass is {mass:.9f}, expected 1")
            self._bound = float(vals.max()) * 1.1 + 1e-12

    @classmethod
    def uniform(cls, low: float = 0.0, high: float = 1.0) -> "Prior":
        return cls(low, high)

    @classmethod
    def custom(cls, low: float, high: float, density: Callable) -> "Prior":
        return cls(low, high, density)

    @property
    def kind(self) -> str:
        return "uniform" if self.density is None else "custom"

    @property
    def span(self) -> float:
        return self.high - self.low

    def pdf(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if self.density is None:
            return np.full(xs.shape, 1.0 / self.span)
        return _vector_values(self.density, xs)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.density is None:
            return rng.uniform(self.low, self.high, size)
        out = np.empty(size)
        filled = 0
        rounds = 0
        while filled < size:
            rounds += 1
            if rounds > 10_000:
                raise QuadratureError("rejection sampling failed to accept; "
                                      "is the density bounded on its support?")
            chunk = max(64, 2 * (size - filled))
            draw = rng.uniform(self.low, self.high, chunk)
            keep = draw[rng.uniform(0.0, self._bound, chunk) <= self.pdf(draw)]
            take = min(len(keep), size - filled)
            out[filled:filled + take] = keep[:take]
            filled += take
        return out

    def describe(self) -> dict:
        return {"kind": self.kind, "low": self.low, "high": self.high}


# ---------------------------------------------------------------------------
# ex-post welfare and pointwise optima
# ---------------------------------------------------------------------------


def _active_values_and_weights(profile, weights) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(profile, Profile):
        positions = profile.active_positions()
        values = np.asarray(profile.active_values(), dtype=float)
        total = len(profile)
    else:
        values = np.asarray(list(profile), dtype=float)
        positions = list(range(len(values)))
        total = len(values)
    if weights is None:
        w = np.ones(len(values))
    else:
        if not isinstance(weights, Weights):
            weights = Weights(tuple(weights))
        if len(weights) != total:
            raise ProfileError(f"{len(weights)} weights for {total} voters")
        w = np.asarray(weights.subset(positions).values, dtype=float)
    return values, w


def ex_post_welfare(outcome: float, profile, q: float,
                    weights: Weights | None = None) -> float:
    """Welfare of an outcome: -sum_i w_i |outcome - r_i|^q (-max for q=inf)."""
    if not q >= 1.0:
        raise ValueError(f"welfare norm needs q >= 1, got {q}")
    values, w = _active_values_and_weights(profile, weights)
    if len(values) == 0:
        raise EmptyElectorateError("welfare of an empty electorate is undefined")
    gaps = np.abs(float(outcome) - values)
    if math.isinf(q):
        return -float(np.max(gaps[w > 0])) if np.any(w > 0) else 0.0
    return -float(np.sum(w * gaps ** q))


def l1_optimal_outcome(profile, alpha_even: float) -> float:
    """Outcome with the largest total-absolute-distance welfare.

    The median of the ballots for an odd count; with an even count every
    point between the two central ballots ties, and the fixed ``alpha_even``
    joins the pool to select one of them.
    """
    values = sorted(_active_values_and_weights(profile, None)[0].tolist())
    if not values:
        raise EmptyElectorateError("no ballots to optimize over")
    if len(values) % 2 == 1:
        return values[len(values) // 2]
    pool = sorted(values + [float(alpha_even)])
    return pool[len(pool) // 2]


def lq_optimal_outcome(profile, q: float, weights: Weights | None = None) -> float:
    """The unique minimizer of sum_i w_i |x - r_i|^q over the ballot hull.

    The objective is strictly convex for q > 1, so bisection on its
    derivative converges; q = inf returns the midrange.
    """
    values, w = _active_values_and_weights(profile, weights)
    if len(values) == 0:
        raise EmptyElectorateError("no ballots to optimize over")
    lo = float(values.min())
    hi = float(values.max())
    if math.isinf(q):
        return 0.5 * (lo + hi)
    if not q > 1.0:
        raise ValueError(f"pointwise optimum needs q > 1, got {q}")
    if lo == hi:
        return lo
    e = q - 1.0

    def slope(x: float) -> float:
        d = x - values
        return float(np.sum(w * np.sign(d) * np.abs(d) ** e))

    while hi - lo > BISECTION_XTOL:
        mid = 0.5 * (lo + hi)
        if slope(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# optimal curve synthesis
# ---------------------------------------------------------------------------


def big_g(prior: Prior, q: float, x: float, tol: float = QUADRATURE_TOL) -> float:
    """Strictly increasing transform of the prior whose inverse is the
    welfare-optimal grading curve.

    The value balances the mean q-1 power distance to the ballots above x
    against the one below: shares above this value push the rule's outcome
    past x exactly when doing so helps expected welfare.  Endpoints extend
    continuously to 0 at the low end and 1 at the high end.
    """
    q = float(q)
    if not q > 1.0:
        raise ValueError(f"transform needs q > 1, got {q}")
    m, M = prior.low, prior.high
    x = float(x)
    if not m <= x <= M:
        raise DomainError(f"transform argument {x} outside [{m}, {M}]")
    if x == m:
        return 0.0
    if x == M:
        return 1.0
    e = q - 1.0
    top_num = adaptive_simpson(lambda t: (np.asarray(t) - x) ** e * prior.pdf(t), x, M, tol)
    top_den = adaptive_simpson(prior.pdf, x, M, tol)
    bot_num = adaptive_simpson(lambda t: (x - np.asarray(t)) ** e * prior.pdf(t), m, x, tol)
    bot_den = adaptive_simpson(prior.pdf, m, x, tol)
    if top_den <= 0.0 or top_num <= 0.0:
        return 1.0
    if bot_den <= 0.0 or bot_num <= 0.0:
        return 0.0
    above = top_num / top_den
    below = bot_num / bot_den
    return 1.0 / (1.0 + above / below)


def uniform_optimal_curve(low: float, high: float, q: float) -> UniformOptimalCurve:
    """Closed-form welfare-optimal curve for uniformly distributed ballots."""
    return UniformOptimalCurve(AlternativeDomain(float(low), float(high)), q)


def optimal_curve(prior: Prior, q: float,
                  scan_points: int = OPTIMAL_CURVE_SCAN,
                  xtol: float = 1e-9,
                  tol: float = QUADRATURE_TOL) -> TabulatedCurve:
    """Welfare-optimal grading curve for an arbitrary ballot prior.

    Tabulates the transform on a uniform scan, verifies strict monotonicity,
    and returns its inverse as a tabulated curve that refines each lookup by
    live bisection of the transform down to ``xtol``.
    """
    if scan_points < 3:
        raise DomainError("curve synthesis needs at least 3 scan points")
    m, M = prior.low, prior.high
    xs = np.linspace(m, M, scan_points)
    gs = np.empty(scan_points)
    gs[0] = 0.0
    gs[-1] = 1.0

    def not_increasing(j: int):
        return NonInvertibleTransformError(
            "the welfare transform is not strictly increasing for this prior, "
            "so no grading curve inverts it",
            witness={"x_low": float(xs[j]), "x_high": float(xs[j + 1]),
                     "transform_low": float(gs[j]), "transform_high": float(gs[j + 1])})

    for j in range(1, scan_points - 1):
        gs[j] = big_g(prior, q, float(xs[j]), tol)
        if gs[j] <= gs[j - 1]:
            raise not_increasing(j - 1)
    if gs[-1] <= gs[-2]:
        raise not_increasing(scan_points - 2)
    domain = AlternativeDomain(m, M)
    return TabulatedCurve(domain, shares=gs, values=xs,
                          transform=lambda v: big_g(prior, q, v, tol), xtol=xtol)


def minimax_optimal_phantoms(weights: Weights | Sequence[float] | None, q: float,
                             low: float = 0.0, high: float = 1.0) -> CurvePhantom:
    """Phantom function minimizing the worst-case weighted loss over profiles.

    The optimum is the uniform-prior curve applied to the weighted TOP
    fraction; with no weights it is the anonymous uniform-optimal rule.
    """
    curve = UniformOptimalCurve(AlternativeDomain(float(low), float(high)), q)
    if weights is None:
        return CurvePhantom(curve)
    if not isinstance(weights, Weights):
        weights = Weights(tuple(weights))
    return CurvePhantom(curve, weights=weights.values)


# ---------------------------------------------------------------------------
# Monte-Carlo estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WelfareEstimate:
    """Sample mean of the per-profile loss, with its standard error."""

    mean: float
    std_error: float
    samples: int
    seed: int
    norm_q: float

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std_error": self.std_error,
                "samples": self.samples, "seed": self.seed, "norm_q": self.norm_q}


_KEY_MASK = (1 << 64) - 1


def profile_stream(prior: Prior, n: int, seed: int, index: int) -> np.ndarray:
    """Profile number ``index`` of the seeded stream.

    Each index keys its own counter-based generator, so any sharding of the
    indices reproduces the serial stream sample for sample.
    """
    key = np.array([seed & _KEY_MASK, index & _KEY_MASK], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    return prior.sample(rng, n)


def monte_carlo_ex_ante(rule, prior: Prior, q: float, n: int, samples: int,
                        seed: int = 0, weights: Weights | None = None) -> WelfareEstimate:
    """Estimate a rule's expected loss sum_i w_i |r_i - rule(r)|^q under the prior."""
    if samples < 2:
        raise InfeasibleSizeError(f"standard error needs at least 2 samples, got {samples}")
    if n < 1:
        raise InfeasibleSizeError("profiles need at least one voter")
    if not q >= 1.0:
        raise ValueError(f"welfare norm needs q >= 1, got {q}")
    if isinstance(rule, PhantomFunction):
        from .representations import as_rule

        rule = as_rule(rule)
    losses = np.empty(samples)
    for i in range(samples):
        r = profile_stream(prior, n, seed, i)
        outcome = float(rule(r.tolist()))
        losses[i] = -ex_post_welfare(outcome, r, q, weights)
    return WelfareEstimate(mean=float(losses.mean()),
                           std_error=float(losses.std(ddof=1) / math.sqrt(samples)),
                           samples=samples, seed=int(seed), norm_q=float(q))
