"""Core value types: the alternative interval, ballot profiles, extreme profiles, weights.

Alternatives live on a closed real interval.  A ballot is a voter's peak on
that interval, or an explicit abstention.  An extreme profile records, for
each voter, only which end of the interval they (weakly) lean toward at some
cutoff; these are the inputs a phantom function is defined on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence

from .errors import DomainError, ProfileError


class Mark(IntEnum):
    """Per-voter entry of an extreme profile.

    The integer order BOTTOM < ABSTAIN < TOP matches the componentwise order
    used for monotonicity of phantom functions over variable electorates.
    """

    BOTTOM = 0
    ABSTAIN = 1
    TOP = 2

    def __repr__(self) -> str:  # keep reprs short in witnesses
        return self.name


_MARK_CHARS = {Mark.BOTTOM: "B", Mark.ABSTAIN: "A", Mark.TOP: "T"}
_CHAR_MARKS = {v: k for k, v in _MARK_CHARS.items()}


class _AbstainType:
    """Singleton marker for an abstaining voter's ballot."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ABSTAIN"


ABSTAIN = _AbstainType()


@dataclass(frozen=True)
class AlternativeDomain:
    """Closed interval of alternatives, optionally with a uniform audit grid."""

    mu_minus: float
    mu_plus: float
    grid_steps: int | None = None

    def __post_init__(self):
        lo, hi = float(self.mu_minus), float(self.mu_plus)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DomainError("domain endpoints must be finite")
        if not lo < hi:
            raise DomainError(f"domain requires mu_minus < mu_plus, got [{lo}, {hi}]")
        object.__setattr__(self, "mu_minus", lo)
        object.__setattr__(self, "mu_plus", hi)
        if self.grid_steps is not None and (not isinstance(self.grid_steps, int) or self.grid_steps < 1):
            raise DomainError("grid_steps must be a positive integer")

    @property
    def span(self) -> float:
        return self.mu_plus - self.mu_minus

    @property
    def midpoint(self) -> float:
        return (self.mu_minus + self.mu_plus) / 2.0

    def contains(self, x: float) -> bool:
        return self.mu_minus <= x <= self.mu_plus

    def grid(self) -> list[float]:
        """Uniform grid including both endpoints; requires grid_steps."""
        if self.grid_steps is None:
            raise DomainError("domain has no grid resolution configured")
        k = self.grid_steps
        # (j * span) / k keeps endpoint values exact and ties reproducible
        return [self.mu_minus + (j * self.span) / k for j in range(k + 1)]


def _check_ballot(value, index) -> object:
    if value is ABSTAIN:
        return ABSTAIN
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ProfileError(f"ballot for voter at position {index} is not a number: {value!r}")
    if math.isnan(v):
        raise ProfileError(f"ballot for voter at position {index} is NaN")
    if math.isinf(v):
        raise ProfileError(f"ballot for voter at position {index} is infinite")
    return v


@dataclass(frozen=True)
class Profile:
    """Ballots of a named electorate, in a fixed voter order.

    ``ballots[i]`` is a finite float or the ABSTAIN sentinel.  Voter ids are
    opaque and must be distinct; positional profiles use integer ids.
    """

    voter_ids: tuple
    ballots: tuple

    def __post_init__(self):
        if len(self.voter_ids) != len(self.ballots):
            raise ProfileError("voter_ids and ballots must have equal length")
        if len(set(self.voter_ids)) != len(self.voter_ids):
            raise ProfileError("duplicate voter ids in profile")
        object.__setattr__(
            self, "ballots", tuple(_check_ballot(b, i) for i, b in enumerate(self.ballots))
        )

    @classmethod
    def of(cls, *ballots) -> "Profile":
        """Positional profile with voter ids 0..n-1."""
        return cls(tuple(range(len(ballots))), tuple(ballots))

    @classmethod
    def from_entries(cls, entries: Iterable[tuple]) -> "Profile":
        ids, ballots = [], []
        for vid, b in entries:
            ids.append(vid)
            ballots.append(b)
        return cls(tuple(ids), tuple(ballots))

    def __len__(self) -> int:
        return len(self.ballots)

    @property
    def has_abstentions(self) -> bool:
        return any(b is ABSTAIN for b in self.ballots)

    def active_positions(self) -> list[int]:
        return [i for i, b in enumerate(self.ballots) if b is not ABSTAIN]

    def active_values(self) -> list[float]:
        return [b for b in self.ballots if b is not ABSTAIN]

    @property
    def active_count(self) -> int:
        return len(self.active_values())

    def with_ballot(self, position: int, value) -> "Profile":
        ballots = list(self.ballots)
        ballots[position] = value
        return Profile(self.voter_ids, tuple(ballots))

    def check_in_domain(self, domain: AlternativeDomain) -> None:
        for i, b in enumerate(self.ballots):
            if b is not ABSTAIN and not domain.contains(b):
                raise ProfileError(
                    f"ballot {b} of voter {self.voter_ids[i]!r} outside "
                    f"[{domain.mu_minus}, {domain.mu_plus}]"
                )


@dataclass(frozen=True)
class ExtremeProfile:
    """A profile of interval endpoints: one BOTTOM/TOP/ABSTAIN mark per voter."""

    marks: tuple

    def __post_init__(self):
        object.__setattr__(self, "marks", tuple(Mark(m) for m in self.marks))

    @classmethod
    def from_string(cls, s: str) -> "ExtremeProfile":
        """Parse marks from a compact string like "TBA"."""
        try:
            return cls(tuple(_CHAR_MARKS[c] for c in s))
        except KeyError as exc:
            raise ProfileError(f"invalid mark character {exc.args[0]!r}; use B, T, or A")

    @classmethod
    def from_mask(cls, mask: int, n: int) -> "ExtremeProfile":
        """Abstention-free profile from a bitmask (bit i set means voter i is TOP)."""
        return cls(tuple(Mark.TOP if (mask >> i) & 1 else Mark.BOTTOM for i in range(n)))

    def to_string(self) -> str:
        return "".join(_MARK_CHARS[m] for m in self.marks)

    def to_mask(self) -> int:
        if any(m is Mark.ABSTAIN for m in self.marks):
            raise ProfileError("extreme profile with abstentions has no bitmask form")
        mask = 0
        for i, m in enumerate(self.marks):
            if m is Mark.TOP:
                mask |= 1 << i
        return mask

    def __len__(self) -> int:
        return len(self.marks)

    @property
    def top_count(self) -> int:
        return sum(1 for m in self.marks if m is Mark.TOP)

    @property
    def active_count(self) -> int:
        return sum(1 for m in self.marks if m is not Mark.ABSTAIN)

    def top_positions(self) -> list[int]:
        return [i for i, m in enumerate(self.marks) if m is Mark.TOP]

    def le(self, other: "ExtremeProfile") -> bool:
        """Pointwise order with BOTTOM < ABSTAIN < TOP; partial over profiles."""
        if len(self.marks) != len(other.marks):
            raise ProfileError("cannot compare extreme profiles of different sizes")
        return all(a <= b for a, b in zip(self.marks, other.marks))


def to_extremes(profile, cutoff: float) -> ExtremeProfile:
    """Collapse ballots at a cutoff: strictly below goes BOTTOM, at-or-above goes TOP.

    The asymmetry (strict below, weak above) is semantic; it determines which
    side a voter whose peak equals the cutoff supports.  Abstentions pass
    through unchanged.  ``cutoff`` may be any real, including values outside
    the domain.
    """
    ballots = profile.ballots if isinstance(profile, Profile) else profile
    marks = []
    for b in ballots:
        if b is ABSTAIN:
            marks.append(Mark.ABSTAIN)
        elif b < cutoff:
            marks.append(Mark.BOTTOM)
        else:
            marks.append(Mark.TOP)
    return ExtremeProfile(tuple(marks))


def top_k_profile(profile, k: int, *, tie_break: str = "lowest-index") -> ExtremeProfile:
    """Extreme profile whose TOP set is the k voters with the largest ballots.

    Ties at the boundary are broken by voter position: "lowest-index" (the
    default) prefers earlier voters, "highest-index" later ones.  The choice
    provably never affects a rule's outcome; both orders are exposed so tests
    can confirm that.  k = 0 yields the all-BOTTOM profile.  Abstentions are
    not allowed here: this construction is for fixed electorates.
    """
    ballots = profile.ballots if isinstance(profile, Profile) else tuple(profile)
    if any(b is ABSTAIN for b in ballots):
        raise ProfileError("top-k extreme profiles are defined for abstention-free profiles")
    n = len(ballots)
    if not 0 <= k <= n:
        raise ProfileError(f"k must be in 0..{n}, got {k}")
    if tie_break == "lowest-index":
        order = sorted(range(n), key=lambda j: (-ballots[j], j))
    elif tie_break == "highest-index":
        order = sorted(range(n), key=lambda j: (-ballots[j], -j))
    else:
        raise ValueError(f"unknown tie_break {tie_break!r}")
    chosen = set(order[:k])
    return ExtremeProfile(tuple(Mark.TOP if i in chosen else Mark.BOTTOM for i in range(n)))


@dataclass(frozen=True)
class Weights:
    """Nonnegative per-voter weights, aligned with a profile's voter order."""

    values: tuple

    def __post_init__(self):
        vals = []
        for i, w in enumerate(self.values):
            w = float(w)
            if not math.isfinite(w) or w < 0:
                raise ProfileError(f"weight at position {i} must be finite and >= 0, got {w}")
            vals.append(w)
        if not vals or not sum(vals) > 0:
            raise ProfileError("weights must have positive total")
        object.__setattr__(self, "values", tuple(vals))

    @classmethod
    def equal(cls, n: int) -> "Weights":
        return cls((1.0,) * n)

    def __len__(self) -> int:
        return len(self.values)

    def subset(self, positions: Sequence[int]) -> "Weights":
        return Weights(tuple(self.values[i] for i in positions))
