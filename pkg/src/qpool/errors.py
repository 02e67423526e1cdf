"""Exception types shared across the package."""


class QpoolError(Exception):
    """Base class for all errors raised by this package."""


class ContractViolation(QpoolError):
    """An input failed a documented precondition or type invariant."""


class NotHermitianError(ContractViolation):
    """Matrix is not Hermitian within tolerance."""


class NotPSDError(ContractViolation):
    """Matrix has an eigenvalue below the allowed negative tolerance."""


class RankConditionError(ContractViolation):
    """Shared-system rank does not match the product of party dimensions."""


class OrthogonalityError(ContractViolation):
    """Mixture components that must have disjoint supports overlap."""


class SupportContainmentError(ContractViolation):
    """An operator's support sticks out of the reference state's support."""


class FormatError(ContractViolation):
    """A scenario or report file does not match the documented format."""


class ZeroProbabilityError(QpoolError):
    """Conditioning on an outcome of (numerically) zero probability."""


class EmptyPoolError(QpoolError):
    """The pooled operator has vanishing trace; no state can be formed."""


class NumericError(QpoolError):
    """An iterative numeric routine failed to converge or retries ran out."""
