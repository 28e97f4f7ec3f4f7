"""Shared builders for the test suite."""
from __future__ import annotations

import numpy as np

from phantomvote.domain import AlternativeDomain, ExtremeProfile
from phantomvote.phantoms import TablePhantom


def random_monotone_table(domain: AlternativeDomain, n: int, rng: np.random.Generator,
                          grid: list[float] | None = None) -> TablePhantom:
    """Sample a weakly increasing phantom table over {BOTTOM, TOP}^n.

    Masks are filled in popcount-ascending order; each value is drawn at or
    above the max over the masks reachable by clearing one bit, which makes
    the whole table weakly increasing along the subset order.
    """
    size = 1 << n
    vals = np.empty(size)
    order = sorted(range(size), key=lambda m: (bin(m).count("1"), m))
    for m in order:
        lo = domain.mu_minus
        mm = m
        while mm:
            bit = mm & -mm
            lo = max(lo, float(vals[m ^ bit]))
            mm ^= bit
        if grid is None:
            vals[m] = rng.uniform(lo, domain.mu_plus)
        else:
            options = [g for g in grid if g >= lo]
            vals[m] = options[int(rng.integers(0, len(options)))]
    entries = {ExtremeProfile.from_mask(m, n): float(vals[m]) for m in range(size)}
    return TablePhantom(domain, entries)


def brute_force_outcome(alpha, ballots: list[float]) -> float:
    """Independent oracle: scan the whole outcome set for the rule's value.

    The rule equals max over extreme profiles X of min(alpha(X), lowest TOP
    ballot), computed here with plain Python over explicit mark tuples so it
    shares no code with the library evaluators.
    """
    n = len(ballots)
    best = -float("inf")
    for mask in range(1 << n):
        marks = ExtremeProfile.from_mask(mask, n)
        a = alpha.value(marks)
        support = min((ballots[j] for j in range(n) if (mask >> j) & 1),
                      default=float("inf"))
        best = max(best, min(a, support))
    return best
