"""Exception hierarchy shared by the library and the CLI."""


class HeckeError(Exception):
    """Base class; ``code`` is the machine-readable error string."""

    code = "error"


class DomainError(HeckeError, ValueError):
    """Input violates a mathematical precondition."""

    code = "domain_error"


class ScopeError(HeckeError):
    """Input is outside the inert part (or otherwise outside what is implemented)."""

    code = "scope_error"


class HypothesisError(DomainError):
    """A named hypothesis of a construction is violated."""

    code = "hypothesis_violated"

    def __init__(self, hypothesis, message=None):
        self.hypothesis = hypothesis
        super().__init__(message or f"hypothesis violated: {hypothesis}")


class SearchExhausted(DomainError):
    code = "search_exhausted"


class EnumerationOverflow(HeckeError):
    """Raised when an enumeration exceeds its configured candidate cap."""

    code = "enumeration_overflow"


class ConsistencyError(HeckeError, AssertionError):
    """An internal identity that must hold exactly failed (signals a bug)."""

    code = "consistency_failure"
