"""Exception types shared across the pipeline."""


class TrendVoteError(Exception):
    """Base class for all package errors."""


class ContractViolation(TrendVoteError):
    """An operation was called outside its documented precondition."""


class EmptySliceError(TrendVoteError):
    """A (domain, year) slice was queried before any work was ingested for it."""


class DefinednessError(TrendVoteError):
    """A value required by a formula is undefined (e.g. zero-norm vector)."""


class DegenerateBandwidthError(TrendVoteError):
    """The sampled distance distribution collapsed to a single point."""


class TransportError(TrendVoteError):
    """A model call failed at the transport layer; retryable."""


class ProtocolError(TrendVoteError):
    """A model response envelope could not be parsed."""


class PanelGenerationError(TrendVoteError):
    """The chair agent failed to produce a valid panel after retries."""

    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = violations or []


class EnsembleFailure(TrendVoteError):
    """Every model ballot in a cross-model vote was dropped."""


class EmptyTallyError(TrendVoteError):
    """A tally was requested for a session with no accepted ballots."""


class DependencyError(TrendVoteError):
    """A pipeline stage is missing an upstream artifact."""

    def __init__(self, message: str, required_stage: str):
        super().__init__(message)
        self.required_stage = required_stage


class UndefinedDistributionError(TrendVoteError):
    """A vote distribution was requested for a voter kind that cast no votes."""
