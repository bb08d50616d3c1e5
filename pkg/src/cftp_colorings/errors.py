"""Exception types shared across the package."""


class GraphParseError(ValueError):
    """Malformed edge-list input; message names the offending line."""


class GenerationFailedError(RuntimeError):
    """Random graph generation exhausted its restart budget."""


class CouplingRegimeError(RuntimeError):
    """A coupling's parameter regime is violated (caller may fall back or abort)."""


class EngineError(RuntimeError):
    """Internal inconsistency in the sampler (indicates a bug, not bad input)."""


class NoCoalescenceError(RuntimeError):
    """No block coalesced within the configured block budget."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats


class EnumerationBudgetError(RuntimeError):
    """Exact enumeration refused because the search space is too large."""
