"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class MembershipError(DomainError):
    """Voiculescu parameters fail the convergence/positivity test for a given q."""


class ResourceLimitError(ValueError):
    """A dense computation would exceed its configured size bound."""


class DegeneratePartitionError(ValueError):
    """The block partition of an interval is degenerate (a block size is zero)."""
