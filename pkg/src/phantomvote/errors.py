"""Exception types shared across the package."""


class PhantomVoteError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PhantomVoteError):
    """Invalid alternative domain (bounds, grid resolution)."""


class ProfileError(PhantomVoteError):
    """Malformed ballot profile: duplicate ids, NaN ballots, out-of-range values."""


class TableLookupError(PhantomVoteError):
    """A tabulated phantom function has no entry for the requested extreme profile."""


class MalformedPhantomError(PhantomVoteError):
    """A phantom function violated its contract (e.g. not weakly increasing)."""


class EmptyElectorateError(PhantomVoteError):
    """Evaluation of an empty electorate without a configured empty-electorate value."""


class InfeasibleSizeError(PhantomVoteError):
    """Requested operation exceeds its guarded problem-size bound."""


class DiscontinuousCurveError(PhantomVoteError):
    """Real-valued weights require a continuous grading curve."""


class QuadratureError(PhantomVoteError):
    """Adaptive quadrature failed to converge within its subdivision budget."""


class NonInvertibleTransformError(PhantomVoteError):
    """The prior's welfare transform is not strictly increasing, so no curve inverts it."""

    def __init__(self, message: str, witness: tuple | None = None):
        super().__init__(message)
        self.witness = witness


class ConfigError(PhantomVoteError):
    """Rule configuration file is malformed or has unknown fields."""


class BallotFileError(PhantomVoteError):
    """Ballot CSV is malformed; carries the offending row number when known."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class BlackBoxRuleError(PhantomVoteError):
    """An external black-box rule process failed, timed out, or wrote garbage."""
