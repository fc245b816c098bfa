"""Exception and warning types shared across the package."""


class ReltestError(Exception):
    """Base class for library errors."""


class DimensionMismatch(ReltestError, ValueError):
    pass


class Unsupported(ReltestError, TypeError):
    """Operation needs an exactly countable representation."""


class SamplerStall(ReltestError, RuntimeError):
    """Rejection sampling exhausted its draw cap."""


class CapExceeded(ReltestError, ValueError):
    """Exhaustive computation requested above its size cap."""


class EmptyBase(ReltestError, ZeroDivisionError):
    """Relative distance requested from a function with no satisfying points."""


class NoPivot(ReltestError, ValueError):
    """Decision list has no rule with output 1."""


class CertFail(ReltestError):
    """A far-from-class certificate condition did not hold."""

    def __init__(self, message: str, evidence: dict | None = None):
        super().__init__(message)
        self.evidence = evidence or {}


class LearnFail(ReltestError):
    """Greedy decision-list learner found no consistent rule."""


class EmptySupport(ReltestError, ValueError):
    """Faulty sampler built over a function with no satisfying points."""


class RangeViolation(UserWarning):
    """Parameter outside the range where a construction is analysed."""
