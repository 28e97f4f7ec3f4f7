"""Brute-force and randomized axiom auditors with self-certifying witnesses.

Rules are treated as black boxes (any callable from a ballot sequence to a
real).  Each axiom is verified exhaustively over a uniform grid when the
check count fits the evaluation budget, and by seeded random sampling
otherwise.  Every FAIL carries a witness with enough data to replay the
violation through the rule; witnesses are replayed and asserted before the
report is returned.

Fixed-electorate axioms (``audit_fixed``):

* ``sp`` -- no unilateral deviation moves the outcome toward the deviator's
  peak: the honest outcome sits weakly between the deviation outcome and the
  peak.
* ``weak_responsiveness`` -- raising one ballot never lowers the outcome.
* ``lipschitz`` -- outcomes move at most the total ballot movement (1-Lipschitz
  in the L1 norm); unilateral grid steps are exhaustive for grid pairs by the
  triangle inequality, and random off-grid pairs corroborate.
* ``sovereignty`` -- every grid alternative is attained at its unanimity
  profile.
* ``pareto`` -- the outcome stays within the ballot hull.
* ``strict_responsiveness`` -- strictly raising every ballot strictly raises
  the outcome.
* ``ordinality`` -- the rule commutes with strictly increasing surjections of
  the alternative interval (sampled piecewise-linear maps).
* ``dummy`` -- no voter is ignored: for each voter some deviation moves some
  outcome.
* ``anonymity`` -- permuting ballots never changes the outcome.

Variable-electorate axioms (``audit_variable``): ``participation``,
``consistency``, ``homogeneity``, ``proportionality``, ``sovereignty``, and
``continuity_new_members``.
"""
from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .domain import AlternativeDomain
from .errors import InfeasibleSizeError
from .phantoms import (
    ConstantPhantom,
    CurvePhantom,
    DictatorPhantom,
    OrderStatisticPhantom,
    PhantomFunction,
    TablePhantom,
    VariableElectorateRule,
    phantoms_from_curve,
)

PASS_EXHAUSTIVE = "PASS_EXHAUSTIVE"
PASS_SAMPLED = "PASS_SAMPLED"
FAIL = "FAIL"

FIXED_AXIOMS = ("sp", "weak_responsiveness", "lipschitz", "sovereignty", "pareto",
                "strict_responsiveness", "ordinality", "dummy", "anonymity")
VARIABLE_AXIOMS = ("participation", "consistency", "homogeneity", "proportionality",
                   "sovereignty", "continuity_new_members")

ORDINALITY_MAPS = 200


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    """Counterexample with everything needed to replay it through the rule."""

    axiom: str
    data: dict

    def to_dict(self) -> dict:
        return {"axiom": self.axiom, **self.data}


@dataclass(frozen=True)
class AxiomResult:
    axiom: str
    status: str
    checks: int
    witness: Witness | None = None
    note: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.status == FAIL

    def to_dict(self) -> dict:
        d = {"status": self.status, "checks": self.checks}
        if self.witness is not None:
            d["witness"] = self.witness.to_dict()
        if self.note:
            d["note"] = self.note
        if self.extra:
            d["extra"] = _plain(self.extra)
        return d


@dataclass(frozen=True)
class AuditReport:
    rule_description: dict
    grid: list[float]
    scope: dict
    results: dict

    @property
    def passed(self) -> bool:
        return not any(r.failed for r in self.results.values())

    @property
    def failures(self) -> list[str]:
        return [name for name, r in self.results.items() if r.failed]

    def to_dict(self) -> dict:
        return {
            "rule": _plain(self.rule_description),
            "grid": {"points": len(self.grid), "low": self.grid[0], "high": self.grid[-1]},
            "scope": dict(self.scope),
            "axioms": {name: r.to_dict() for name, r in self.results.items()},
            "passed": self.passed,
        }


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Witness):
        return obj.to_dict()
    return obj


class _Memo:
    """Memoized access to a black-box rule, counting distinct evaluations."""

    def __init__(self, rule: Callable):
        self.rule = rule
        self.cache: dict = {}
        self.calls = 0

    def __call__(self, profile: tuple) -> float:
        v = self.cache.get(profile)
        if v is None:
            v = float(self.rule(list(profile)))
            self.cache[profile] = v
            self.calls += 1
        return v


def _resolve_grid(domain: AlternativeDomain, grid_steps: int | None) -> list[float]:
    if grid_steps is not None:
        domain = dataclasses.replace(domain, grid_steps=grid_steps)
    return domain.grid()


def _describe_rule(rule, phantom) -> dict:
    target = phantom if phantom is not None else rule
    describe = getattr(target, "describe", None)
    if callable(describe):
        return describe()
    name = getattr(target, "__name__", None) or type(target).__name__
    return {"kind": "black-box", "name": name}


def _away_from_peak(out_true: float, out_other: float, peak: float, tol: float) -> bool:
    """out_other >= out_true >= peak or out_other <= out_true <= peak, with slack."""
    up = out_other >= out_true - tol and out_true >= peak - tol
    down = out_other <= out_true + tol and out_true <= peak + tol
    return up or down


# ---------------------------------------------------------------------------
# witness replay (self-certification)
# ---------------------------------------------------------------------------


def replay_witness(rule: Callable, witness: Witness, tol: float = 1e-9) -> bool:
    """Re-run the rule on a witness and confirm the violation is genuine."""
    d = witness.data
    ax = witness.axiom

    def f(profile) -> float:
        return float(rule(list(profile)))

    if ax == "sp":
        r = list(d["profile"])
        s = list(r)
        s[d["voter"]] = d["deviation"]
        return not _away_from_peak(f(r), f(s), r[d["voter"]], tol)
    if ax == "participation":
        r = list(d["profile"])
        s = r[:d["voter"]] + r[d["voter"] + 1:]
        return not _away_from_peak(f(r), f(s), r[d["voter"]], tol)
    if ax == "weak_responsiveness":
        r = list(d["profile"])
        s = list(r)
        s[d["voter"]] = d["raised_to"]
        return s[d["voter"]] > r[d["voter"]] and f(s) < f(r) - tol
    if ax == "lipschitz":
        r, s = d["profile"], d["other"]
        budget = sum(abs(a - b) for a, b in zip(r, s))
        return abs(f(r) - f(s)) > budget + tol
    if ax == "sovereignty":
        return abs(f(d["profile"]) - d["value"]) > tol
    if ax == "pareto":
        r = d["profile"]
        out = f(r)
        return out < min(r) - tol or out > max(r) + tol
    if ax == "strict_responsiveness":
        r, s = d["profile"], d["higher_profile"]
        return all(a < b for a, b in zip(r, s)) and f(s) <= f(r) + tol
    if ax == "ordinality":
        xp = np.asarray(d["map_breaks"])
        fp = np.asarray(d["map_values"])
        r = np.asarray(d["profile"])
        lhs = f(np.interp(r, xp, fp).tolist())
        rhs = float(np.interp(f(r), xp, fp))
        return abs(lhs - rhs) > tol
    if ax == "dummy":
        i = d["voter"]
        grid = d["grid"]
        n = d["n"]
        for r in itertools.product(grid, repeat=n):
            base = f(r)
            for v in grid:
                if v != r[i]:
                    s = list(r)
                    s[i] = v
                    if abs(f(s) - base) > tol:
                        return False
        return True
    if ax == "anonymity":
        r = d["profile"]
        s = [r[j] for j in d["permutation"]]
        return abs(f(r) - f(s)) > tol
    if ax == "consistency":
        left, right = d["left"], d["right"]
        if f(left) != f(right):
            return False
        return abs(f(list(left) + list(right)) - f(left)) > tol
    if ax == "homogeneity":
        r = d["profile"]
        return abs(f(list(r) * d["k"]) - f(r)) > tol
    if ax == "proportionality":
        return abs(f(d["profile"]) - d["expected"]) > tol
    if ax == "continuity_new_members":
        if "max_jump" in d:
            return d["max_jump"] > 0
        base, joiners = list(d["base"]), list(d["joiners"])
        target = f(base)
        cap, ref = d["replication_cap"], d["reference_replication"]
        e_cap = abs(f(base * cap + joiners) - target)
        e_ref = abs(f(base * ref + joiners) - target)
        return e_cap > d["tolerance"] and e_cap > 0.5 * e_ref
    raise ValueError(f"unknown witness axiom {ax!r}")


def _certify(rule: Callable, result: AxiomResult, tol: float) -> AxiomResult:
    if result.failed:
        assert result.witness is not None, f"{result.axiom}: FAIL without witness"
        assert replay_witness(rule, result.witness, tol), (
            f"{result.axiom}: witness did not replay to a violation: {result.witness}")
    return result


# ---------------------------------------------------------------------------
# fixed-electorate audits
# ---------------------------------------------------------------------------


def _iter_profiles(grid: list[float], n: int):
    return itertools.product(grid, repeat=n)


def _sample_profile(rng: np.random.Generator, grid: list[float], n: int) -> tuple:
    return tuple(grid[int(j)] for j in rng.integers(0, len(grid), n))


def _audit_sp(memo, grid, n, budget, samples, rng, tol) -> AxiomResult:
    g1 = len(grid)
    exhaustive = g1 ** n * n * (g1 - 1) <= budget
    first = None
    best_gain = 0.0
    best_gain_witness = None
    violations = 0
    checks = 0

    def consider(r: tuple, i: int, dev: float):
        nonlocal first, best_gain, best_gain_witness, violations, checks
        checks += 1
        out = memo(r)
        s = list(r)
        s[i] = dev
        out_dev = memo(tuple(s))
        peak = r[i]
        if not _away_from_peak(out, out_dev, peak, tol):
            violations += 1
            w = Witness("sp", {"profile": list(r), "voter": i, "deviation": dev,
                               "truthful_outcome": out, "deviating_outcome": out_dev})
            if first is None:
                first = w
            gain = abs(out - peak) - abs(out_dev - peak)
            if gain > best_gain:
                best_gain = gain
                best_gain_witness = w

    if exhaustive:
        for r in _iter_profiles(grid, n):
            for i in range(n):
                for dev in grid:
                    if dev != r[i]:
                        consider(r, i, dev)
        status = FAIL if first else PASS_EXHAUSTIVE
    else:
        for _ in range(samples):
            r = _sample_profile(rng, grid, n)
            i = int(rng.integers(0, n))
            dev = grid[int(rng.integers(0, len(grid)))]
            if dev != r[i]:
                consider(r, i, dev)
        status = FAIL if first else PASS_SAMPLED
    extra = {"violations": violations, "max_gain": best_gain}
    if best_gain_witness is not None:
        extra["max_gain_witness"] = best_gain_witness
    return AxiomResult("sp", status, checks, witness=first, extra=extra)


def _audit_weak_responsiveness(memo, grid, n, budget, samples, rng, tol) -> AxiomResult:
    g1 = len(grid)
    exhaustive = g1 ** n * n <= budget
    checks = 0
    first = None
    index = {v: k for k, v in enumerate(grid)}

    def consider(r: tuple, i: int) -> bool:
        # bump voter i one grid step up; transitivity covers larger raises
        nonlocal checks, first
        k = index[r[i]]
        if k + 1 >= g1:
            return True
        checks += 1
        s = list(r)
        s[i] = grid[k + 1]
        if memo(tuple(s)) < memo(r) - tol:
            first = Witness("weak_responsiveness", {
                "profile": list(r), "voter": i, "raised_to": grid[k + 1],
                "outcome": memo(r), "raised_outcome": memo(tuple(s))})
            return False
        return True

    if exhaustive:
        done = False
        for r in _iter_profiles(grid, n):
            for i in range(n):
                if not consider(r, i):
                    done = True
                    break
            if done:
                break
        status = FAIL if first else PASS_EXHAUSTIVE
    else:
        for _ in range(samples):
            r = _sample_profile(rng, grid, n)
            if not consider(r, int(rng.integers(0, n))):
                break
        status = FAIL if first else PASS_SAMPLED
    return AxiomResult("weak_responsiveness", status, checks, witness=first)


def _audit_lipschitz(memo, domain, grid, n, budget, samples, rng, tol) -> AxiomResult:
    g1 = len(grid)
    exhaustive = g1 ** n * n * (g1 - 1) <= budget
    checks = 0
    first = None

    def consider_pair(r: tuple, s: tuple) -> bool:
        nonlocal checks, first
        checks += 1
        moved = sum(abs(a - b) for a, b in zip(r, s))
        if abs(memo(r) - memo(s)) > moved + tol:
            first = Witness("lipschitz", {
                "profile": list(r), "other": list(s),
                "outcome": memo(r), "other_outcome": memo(s)})
            return False
        return True

    ok = True
    if exhaustive:
        # unilateral grid deviations; grid pairs follow by the triangle inequality
        for r in _iter_profiles(grid, n):
            for i in range(n):
                for dev in grid:
                    if dev != r[i]:
                        s = list(r)
                        s[i] = dev
                        if not consider_pair(r, tuple(s)):
                            ok = False
                            break
                if not ok:
                    break
            if not ok:
                break
    pair_samples = min(samples, 2000)
    if ok:
        lo, hi = domain.mu_minus, domain.mu_plus
        for _ in range(pair_samples):
            r = tuple(float(v) for v in rng.uniform(lo, hi, n))
            s = tuple(float(v) for v in rng.uniform(lo, hi, n))
            if not consider_pair(r, s):
                break
    if first is not None:
        status = FAIL
    else:
        status = PASS_EXHAUSTIVE if exhaustive else PASS_SAMPLED
    note = "unilateral grid steps are exhaustive for grid pairs; off-grid pairs sampled"
    return AxiomResult("lipschitz", status, checks, witness=first, note=note,
                       extra={"sampled_pairs": pair_samples})


def _audit_sovereignty(memo, grid, n, tol) -> AxiomResult:
    checks = 0
    first = None
    for a in grid:
        checks += 1
        r = (a,) * n
        out = memo(r)
        if abs(out - a) > tol:
            first = Witness("sovereignty", {"value": a, "profile": list(r), "outcome": out})
            break
    status = FAIL if first else PASS_EXHAUSTIVE
    note = "unanimity scan over the grid"
    return AxiomResult("sovereignty", status, checks, witness=first, note=note)


def _audit_pareto(memo, grid, n, budget, samples, rng, tol) -> AxiomResult:
    g1 = len(grid)
    exhaustive = g1 ** n <= budget
    checks = 0
    first = None

    def consider(r: tuple) -> bool:
        nonlocal checks, first
        checks += 1
        out = memo(r)
        if out < min(r) - tol or out > max(r) + tol:
            first = Witness("pareto", {"profile": list(r), "outcome": out,
                                       "low": min(r), "high": max(r)})
            return False
        return True

    if exhaustive:
        for r in _iter_profiles(grid, n):
            if not consider(r):
                break
        status = FAIL if first else PASS_EXHAUSTIVE
    else:
        for _ in range(samples):
            if not consider(_sample_profile(rng, grid, n)):
                break
        status = FAIL if first else PASS_SAMPLED
    return AxiomResult("pareto", status, checks, witness=first)


def _audit_strict_responsiveness(memo, grid, n, budget, samples, rng, tol) -> AxiomResult:
    g1 = len(grid)
    value_pairs = [(a, b) for ai, a in enumerate(grid) for b in grid[ai + 1:]]
    exhaustive = len(value_pairs) ** n <= budget
    checks = 0
    first = None

    def consider(pairs) -> bool:
        nonlocal checks, first
        checks += 1
        r = tuple(p[0] for p in pairs)
        s = tuple(p[1] for p in pairs)
        if memo(s) <= memo(r) + tol:
            first = Witness("strict_responsiveness", {
                "profile": list(r), "higher_profile": list(s),
                "outcome": memo(r), "higher_outcome": memo(s)})
            return False
        return True

    if exhaustive:
        for pairs in itertools.product(value_pairs, repeat=n):
            if not consider(pairs):
                break
        status = FAIL if first else PASS_EXHAUSTIVE
    else:
        for _ in range(samples):
            idx = rng.integers(0, len(value_pairs), n)
            if not consider([value_pairs[int(j)] for j in idx]):
                break
        status = FAIL if first else PASS_SAMPLED
    return AxiomResult("strict_responsiveness", status, checks, witness=first)


def _sample_increasing_map(rng: np.random.Generator, domain: AlternativeDomain,
                           interior_breaks: int = 3) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = domain.mu_minus, domain.mu_plus
    while True:
        xs = np.sort(rng.uniform(lo, hi, interior_breaks))
        ys = np.sort(rng.uniform(lo, hi, interior_breaks))
        if np.all(np.diff(xs) > 0) and np.all(np.diff(ys) > 0):
            break
    xp = np.concatenate([[lo], xs, [hi]])
    fp = np.concatenate([[lo], ys, [hi]])
    return xp, fp


def _audit_ordinality(memo, domain, grid, n, samples, rng, tol, phantom) -> AxiomResult:
    # commuting with every strictly increasing surjection cannot be exhausted,
    # so this audit is always a sampled approximation
    g1 = len(grid)
    per_map = max(1, min(g1 ** n, samples // ORDINALITY_MAPS))
    all_profiles = g1 ** n <= per_map
    checks = 0
    first = None
    for _ in range(ORDINALITY_MAPS):
        xp, fp = _sample_increasing_map(rng, domain)
        if all_profiles:
            profiles = _iter_profiles(grid, n)
        else:
            profiles = (_sample_profile(rng, grid, n) for _ in range(per_map))
        for r in profiles:
            checks += 1
            arr = np.asarray(r, dtype=float)
            mapped = tuple(float(v) for v in np.interp(arr, xp, fp))
            lhs = memo(mapped)
            rhs = float(np.interp(memo(r), xp, fp))
            if abs(lhs - rhs) > tol:
                first = Witness("ordinality", {
                    "profile": list(r), "mapped_profile": list(mapped),
                    "map_breaks": [float(v) for v in xp],
                    "map_values": [float(v) for v in fp],
                    "outcome": memo(r), "mapped_outcome": lhs,
                    "expected": rhs})
                break
        if first is not None:
            break
    extra = {}
    two_valued = _phantom_range_two_valued(phantom, domain, n)
    if two_valued is not None:
        extra["phantom_range_two_valued"] = two_valued
    status = FAIL if first else PASS_SAMPLED
    note = "sampled piecewise-linear strictly increasing surjections; never exhaustive"
    return AxiomResult("ordinality", status, checks, witness=first, note=note, extra=extra)


def _phantom_range_two_valued(phantom, domain, n: int) -> bool | None:
    """Whether every phantom value sits at an endpoint (exact, when knowable)."""
    if phantom is None:
        return None
    ends = {domain.mu_minus, domain.mu_plus}
    if isinstance(phantom, TablePhantom):
        return all(float(v) in ends for v in phantom.mask_array())
    if isinstance(phantom, (OrderStatisticPhantom, DictatorPhantom)):
        return True
    if isinstance(phantom, ConstantPhantom):
        return False
    if isinstance(phantom, CurvePhantom) and phantom.weights is None:
        return all(v in ends for v in phantoms_from_curve(phantom.curve, n))
    return None


def _audit_dummy(memo, grid, n, budget, samples, rng, tol) -> AxiomResult:
    g1 = len(grid)
    exhaustive = g1 ** n * n * (g1 - 1) <= budget
    checks = 0
    dummies = []
    if exhaustive:
        for i in range(n):
            moved = False
            for r in _iter_profiles(grid, n):
                base = memo(r)
                for dev in grid:
                    if dev == r[i]:
                        continue
                    checks += 1
                    s = list(r)
                    s[i] = dev
                    if abs(memo(tuple(s)) - base) > tol:
                        moved = True
                        break
                if moved:
                    break
            if not moved:
                dummies.append(i)
        status = FAIL if dummies else PASS_EXHAUSTIVE
    else:
        for i in range(n):
            moved = False
            for _ in range(max(1, samples // n)):
                r = _sample_profile(rng, grid, n)
                dev = grid[int(rng.integers(0, g1))]
                if dev == r[i]:
                    continue
                checks += 1
                s = list(r)
                s[i] = dev
                if abs(memo(tuple(s)) - memo(r)) > tol:
                    moved = True
                    break
            if not moved:
                dummies.append(i)
        status = FAIL if dummies else PASS_SAMPLED
    witness = None
    if dummies:
        witness = Witness("dummy", {"voter": dummies[0], "grid": list(grid), "n": n})
    note = "fails when some voter's ballot never affects the outcome"
    return AxiomResult("dummy", status, checks, witness=witness, note=note,
                       extra={"dummy_voters": dummies})


def _audit_anonymity(memo, grid, n, budget, samples, rng, tol) -> AxiomResult:
    g1 = len(grid)
    exhaustive = n <= 6 and g1 ** n * math.factorial(n) <= budget
    checks = 0
    first = None

    def consider(r: tuple, perm: tuple) -> bool:
        nonlocal checks, first
        checks += 1
        s = tuple(r[j] for j in perm)
        if abs(memo(r) - memo(s)) > tol:
            first = Witness("anonymity", {
                "profile": list(r), "permutation": list(perm),
                "outcome": memo(r), "permuted_outcome": memo(s)})
            return False
        return True

    if exhaustive:
        perms = list(itertools.permutations(range(n)))
        done = False
        for r in _iter_profiles(grid, n):
            for perm in perms:
                if not consider(r, perm):
                    done = True
                    break
            if done:
                break
        status = FAIL if first else PASS_EXHAUSTIVE
    else:
        for _ in range(samples):
            r = _sample_profile(rng, grid, n)
            perm = tuple(int(j) for j in rng.permutation(n))
            if not consider(r, perm):
                break
        status = FAIL if first else PASS_SAMPLED
    return AxiomResult("anonymity", status, checks, witness=first)


def audit_fixed(rule, domain: AlternativeDomain, n: int,
                axioms: Sequence[str] | None = None,
                grid_steps: int | None = None,
                max_evaluations: int = 10_000_000,
                samples: int = 20_000,
                seed: int = 0,
                tol: float = 1e-9,
                phantom: PhantomFunction | None = None) -> AuditReport:
    """Audit a fixed-electorate rule over a uniform grid of ballot values.

    ``rule`` may be a phantom function (evaluated through the curve form) or
    any callable from a ballot list to a real.  Each axiom runs exhaustively
    when its check count fits ``max_evaluations``, otherwise with ``samples``
    seeded random checks.  FAIL witnesses are replayed before returning.
    """
    if isinstance(rule, PhantomFunction):
        phantom = rule if phantom is None else phantom
        from .representations import as_rule

        rule_fn = as_rule(rule)
    else:
        rule_fn = rule
    if n < 1:
        raise InfeasibleSizeError("fixed-electorate audits need at least one voter")
    grid = _resolve_grid(domain, grid_steps)
    names = list(axioms) if axioms is not None else list(FIXED_AXIOMS)
    for name in names:
        if name not in FIXED_AXIOMS:
            raise ValueError(f"unknown fixed-electorate axiom {name!r}; "
                             f"choose from {FIXED_AXIOMS}")
    memo = _Memo(rule_fn)
    rng = np.random.default_rng(seed)
    results: dict[str, AxiomResult] = {}
    for name in names:
        if name == "sp":
            res = _audit_sp(memo, grid, n, max_evaluations, samples, rng, tol)
        elif name == "weak_responsiveness":
            res = _audit_weak_responsiveness(memo, grid, n, max_evaluations, samples, rng, tol)
        elif name == "lipschitz":
            res = _audit_lipschitz(memo, domain, grid, n, max_evaluations,
                                   samples, rng, tol)
        elif name == "sovereignty":
            res = _audit_sovereignty(memo, grid, n, tol)
        elif name == "pareto":
            res = _audit_pareto(memo, grid, n, max_evaluations, samples, rng, tol)
        elif name == "strict_responsiveness":
            res = _audit_strict_responsiveness(memo, grid, n, max_evaluations,
                                               samples, rng, tol)
        elif name == "ordinality":
            res = _audit_ordinality(memo, domain, grid, n, samples, rng, tol, phantom)
        elif name == "dummy":
            res = _audit_dummy(memo, grid, n, max_evaluations, samples, rng, tol)
        else:
            res = _audit_anonymity(memo, grid, n, max_evaluations, samples, rng, tol)
        results[name] = _certify(rule_fn, res, tol)
    return AuditReport(rule_description=_describe_rule(rule, phantom),
                       grid=grid, scope={"electorate": n}, results=results)


def sp_distance(rule, domain: AlternativeDomain, n: int,
                grid_steps: int | None = None,
                max_evaluations: int = 10_000_000) -> float:
    """Largest peak-distance improvement any unilateral deviation can gain.

    Zero for rules that never let a deviation pull the outcome closer to the
    deviator's peak; exhaustive over the grid.
    """
    if isinstance(rule, PhantomFunction):
        from .representations import as_rule

        rule = as_rule(rule)
    grid = _resolve_grid(domain, grid_steps)
    g1 = len(grid)
    total = g1 ** n * n * (g1 - 1)
    if total > max_evaluations:
        raise InfeasibleSizeError(
            f"{total} deviation checks exceed the budget of {max_evaluations}")
    memo = _Memo(rule)
    best = 0.0
    for r in _iter_profiles(grid, n):
        out = memo(r)
        for i in range(n):
            peak = r[i]
            honest = abs(out - peak)
            if honest == 0.0:
                continue
            for dev in grid:
                if dev == r[i]:
                    continue
                s = list(r)
                s[i] = dev
                gain = honest - abs(memo(tuple(s)) - peak)
                if gain > best:
                    best = gain
    return best


# ---------------------------------------------------------------------------
# variable-electorate audits
# ---------------------------------------------------------------------------


def _variable_callable(rule) -> Callable:
    if isinstance(rule, VariableElectorateRule):
        return rule
    return rule


def _profiles_for_sizes(grid: list[float], sizes: Sequence[int]):
    for n in sizes:
        for r in itertools.product(grid, repeat=n):
            yield r


def _audit_participation(memo, grid, sizes, budget, samples, rng, tol) -> AxiomResult:
    total = sum(len(grid) ** n * n for n in sizes)
    exhaustive = total <= budget
    checks = 0
    first = None
    note = None
    skipped_empty = 0

    def consider(r: tuple, i: int) -> bool:
        nonlocal checks, first, skipped_empty
        reduced = r[:i] + r[i + 1:]
        if not reduced:
            # rules without an empty-electorate outcome cannot be audited here
            try:
                out_without = memo(reduced)
            except Exception:
                skipped_empty += 1
                return True
            if out_without != out_without:
                skipped_empty += 1
                return True
        else:
            out_without = memo(reduced)
        checks += 1
        out_with = memo(r)
        if not _away_from_peak(out_with, out_without, r[i], tol):
            first = Witness("participation", {
                "profile": list(r), "voter": i,
                "outcome_present": out_with, "outcome_absent": out_without})
            return False
        return True

    if exhaustive:
        done = False
        for n in sizes:
            for r in itertools.product(grid, repeat=n):
                for i in range(n):
                    if not consider(r, i):
                        done = True
                        break
                if done:
                    break
            if done:
                break
        status = FAIL if first else PASS_EXHAUSTIVE
    else:
        size_list = list(sizes)
        for _ in range(samples):
            n = size_list[int(rng.integers(0, len(size_list)))]
            r = _sample_profile(rng, grid, n)
            if not consider(r, int(rng.integers(0, n))):
                break
        status = FAIL if first else PASS_SAMPLED
    if skipped_empty:
        note = f"{skipped_empty} removal checks skipped: no empty-electorate outcome"
    return AxiomResult("participation", status, checks, witness=first, note=note)


def _audit_consistency(memo, grid, sizes, budget, samples, rng, tol) -> AxiomResult:
    by_size = {n: list(itertools.product(grid, repeat=n)) for n in sizes}
    total_profiles = sum(len(v) for v in by_size.values())
    exhaustive = total_profiles ** 2 <= min(budget, 200_000)
    checks = 0
    first = None

    def consider(r: tuple, s: tuple) -> bool:
        nonlocal checks, first
        checks += 1
        if memo(r) != memo(s):   # only clear-cut agreements trigger the premise
            return True
        merged = memo(r + s)
        if abs(merged - memo(r)) > tol:
            first = Witness("consistency", {
                "left": list(r), "right": list(s),
                "separate_outcome": memo(r), "merged_outcome": merged})
            return False
        return True

    if exhaustive:
        done = False
        for a in sizes:
            for b in sizes:
                for r in by_size[a]:
                    for s in by_size[b]:
                        if not consider(r, s):
                            done = True
                            break
                    if done:
                        break
                if done:
                    break
            if done:
                break
        status = FAIL if first else PASS_EXHAUSTIVE
    else:
        size_list = list(sizes)
        for _ in range(samples):
            a = size_list[int(rng.integers(0, len(size_list)))]
            b = size_list[int(rng.integers(0, len(size_list)))]
            if not consider(_sample_profile(rng, grid, a), _sample_profile(rng, grid, b)):
                break
        status = FAIL if first else PASS_SAMPLED
    note = "disjoint electorates with exactly equal outcomes must merge to the same outcome"
    return AxiomResult("consistency", status, checks, witness=first, note=note)


def _audit_homogeneity(memo, grid, sizes, budget, samples, rng, tol,
                       max_replication: int = 4) -> AxiomResult:
    total = sum(len(grid) ** n for n in sizes) * (max_replication - 1)
    exhaustive = total <= budget
    checks = 0
    first = None

    def consider(r: tuple) -> bool:
        nonlocal checks, first
        base = memo(r)
        for k in range(2, max_replication + 1):
            checks += 1
            rep = memo(r * k)
            if abs(rep - base) > tol:
                first = Witness("homogeneity", {
                    "profile": list(r), "k": k,
                    "outcome": base, "replicated_outcome": rep})
                return False
        return True

    if exhaustive:
        for r in _profiles_for_sizes(grid, sizes):
            if not consider(r):
                break
        status = FAIL if first else PASS_EXHAUSTIVE
    else:
        size_list = list(sizes)
        for _ in range(max(1, samples // (max_replication - 1))):
            n = size_list[int(rng.integers(0, len(size_list)))]
            if not consider(_sample_profile(rng, grid, n)):
                break
        status = FAIL if first else PASS_SAMPLED
    note = f"ballot lists replicated up to {max_replication} times"
    return AxiomResult("homogeneity", status, checks, witness=first, note=note)


def _audit_proportionality(memo, domain, sizes, tol) -> AxiomResult:
    lo, span = domain.mu_minus, domain.span
    checks = 0
    first = None
    for n in sizes:
        for mask in range(1 << n):
            checks += 1
            r = tuple(domain.mu_plus if (mask >> j) & 1 else lo for j in range(n))
            expected = lo + span * (mask.bit_count() / n)
            out = memo(r)
            if abs(out - expected) > tol:
                first = Witness("proportionality", {
                    "profile": list(r), "expected": expected, "outcome": out})
                break
        if first is not None:
            break
    status = FAIL if first else PASS_EXHAUSTIVE
    note = "every all-extremes profile must map to its high-ballot share"
    return AxiomResult("proportionality", status, checks, witness=first, note=note)


def _audit_sovereignty_variable(memo, grid, sizes, tol) -> AxiomResult:
    checks = 0
    first = None
    for n in sizes:
        for a in grid:
            checks += 1
            r = (a,) * n
            out = memo(r)
            if abs(out - a) > tol:
                first = Witness("sovereignty", {"value": a, "profile": list(r),
                                                "outcome": out})
                break
        if first is not None:
            break
    status = FAIL if first else PASS_EXHAUSTIVE
    note = "unanimity scan over the grid at every electorate size"
    return AxiomResult("sovereignty", status, checks, witness=first, note=note)


def _audit_continuity_new_members(memo, rule, domain, grid, sizes, samples, rng,
                                  tol, replication_cap, convergence_tol) -> AxiomResult:
    """Replicating one electorate must overwhelm any fixed set of joiners.

    The error against the base outcome is tracked along a geometric ladder of
    replication factors; failure means the error neither fell below the
    tolerance nor kept shrinking.  For rules with a known grading curve the
    curve's continuity is also checked exactly.
    """
    cap = replication_cap
    ref = max(1, cap // 8)
    checks = 0
    first = None
    max_size = max(sizes)
    lo, hi = domain.mu_minus, domain.mu_plus

    bases = []
    for q in range(1, max_size + 1):
        for mask in range(1 << q):
            bases.append(tuple(hi if (mask >> j) & 1 else lo for j in range(q)))
    joiners = [(lo,), (hi,), (lo, hi)]
    pair_budget = max(0, min(samples, 200) - len(bases) * len(joiners))
    sampled_pairs = []
    for _ in range(pair_budget):
        n = int(rng.integers(1, max_size + 1))
        sampled_pairs.append((_sample_profile(rng, grid, n),
                              _sample_profile(rng, grid, int(rng.integers(1, max_size + 1)))))

    def consider(base: tuple, extra: tuple) -> bool:
        nonlocal checks, first
        checks += 1
        target = memo(base)
        e_ref = abs(memo(base * ref + extra) - target)
        e_cap = abs(memo(base * cap + extra) - target)
        if e_cap > convergence_tol and e_cap > 0.5 * e_ref:
            first = Witness("continuity_new_members", {
                "base": list(base), "joiners": list(extra),
                "base_outcome": target,
                "replication_cap": cap, "reference_replication": ref,
                "error_at_reference": e_ref, "error_at_cap": e_cap,
                "tolerance": convergence_tol})
            return False
        return True

    done = False
    for base in bases:
        for extra in joiners:
            if not consider(base, extra):
                done = True
                break
        if done:
            break
    if not done:
        for base, extra in sampled_pairs:
            if not consider(base, extra):
                break

    extra_info: dict = {"replication_cap": cap, "convergence_tol": convergence_tol}
    if isinstance(rule, VariableElectorateRule):
        continuous = rule.curve.is_continuous()
        extra_info["curve_continuous"] = continuous
        if first is None and not continuous:
            jump = float(rule.curve.max_jump()) if hasattr(rule.curve, "max_jump") else 1.0
            first = Witness("continuity_new_members", {"max_jump": jump})
    status = FAIL if first is not None else PASS_SAMPLED
    note = "finite replication cannot prove the limit; never exhaustive"
    return AxiomResult("continuity_new_members", status, checks, witness=first,
                       note=note, extra=extra_info)


def audit_variable(rule, domain: AlternativeDomain,
                   sizes: Sequence[int] = (1, 2, 3),
                   axioms: Sequence[str] | None = None,
                   grid_steps: int | None = None,
                   max_evaluations: int = 10_000_000,
                   samples: int = 5_000,
                   seed: int = 0,
                   tol: float = 1e-9,
                   replication_cap: int = 64,
                   convergence_tol: float = 1e-6) -> AuditReport:
    """Audit a variable-electorate rule across the given electorate sizes.

    ``rule`` is a size-polymorphic callable (ballot list of any length to a
    real); rules with a declared grading curve additionally get their curve
    checked exactly where the theory reduces an axiom to a curve property.
    """
    sizes = sorted(set(int(n) for n in sizes))
    if not sizes or sizes[0] < 1:
        raise InfeasibleSizeError("electorate sizes must be positive")
    grid = _resolve_grid(domain, grid_steps)
    names = list(axioms) if axioms is not None else list(VARIABLE_AXIOMS)
    for name in names:
        if name not in VARIABLE_AXIOMS:
            raise ValueError(f"unknown variable-electorate axiom {name!r}; "
                             f"choose from {VARIABLE_AXIOMS}")
    fn = _variable_callable(rule)
    memo = _Memo(fn)
    rng = np.random.default_rng(seed)
    results: dict[str, AxiomResult] = {}
    for name in names:
        if name == "participation":
            res = _audit_participation(memo, grid, sizes, max_evaluations, samples, rng, tol)
        elif name == "consistency":
            res = _audit_consistency(memo, grid, sizes, max_evaluations, samples, rng, tol)
        elif name == "homogeneity":
            res = _audit_homogeneity(memo, grid, sizes, max_evaluations, samples, rng, tol)
        elif name == "proportionality":
            res = _audit_proportionality(memo, domain, sizes, tol)
        elif name == "sovereignty":
            res = _audit_sovereignty_variable(memo, grid, sizes, tol)
        else:
            res = _audit_continuity_new_members(memo, rule, domain, grid, sizes,
                                                samples, rng, tol,
                                                replication_cap, convergence_tol)
        results[name] = _certify(fn, res, tol)
    return AuditReport(rule_description=_describe_rule(rule, None),
                       grid=grid, scope={"electorate_sizes": sizes}, results=results)
