"""Exception taxonomy shared across the package."""


class FpplabError(Exception):
    """Base class for all package-specific errors."""


class DomainError(FpplabError, ValueError):
    """An argument violates an operation's precondition (out-of-box vertex,
    empty source set, parameter outside its admissible range)."""


class CapacityError(FpplabError, RuntimeError):
    """A requested box or enumeration exceeds what the implementation can
    index or afford (vertex count past the index range, brute force on a
    box that is too large)."""


class EstimationError(FpplabError, RuntimeError):
    """A Monte Carlo estimate could not be formed, e.g. every replica was
    discarded by the truncation check."""


class ValidationError(FpplabError, ValueError):
    """An experiment spec failed static validation; carries the issue list."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(f"{f}: {m}" for f, m in self.issues))
