"""Exception hierarchy shared by all modules.

Two families matter to callers (and to the CLI exit codes): ``InputError``
for malformed or contract-violating input, and ``DomainError`` for inputs
that are well formed but have no answer at the requested precision.
"""


class ThurstonError(Exception):
    """Base class for every error raised by this package."""


class InputError(ThurstonError, ValueError):
    """Malformed input or a violated precondition."""


class ContractViolation(InputError):
    """An operation was called on an object of the wrong kind."""


class DomainError(ThurstonError):
    """Well-formed input outside the domain where an answer exists."""


class NoSuchPoint(DomainError):
    """Trace data does not describe a point of Teichmüller space."""


class AmbiguousAtDepth(DomainError):
    """Slope enumeration at this depth cannot decide the question."""

    def __init__(self, message, depth=None):
        super().__init__(message)
        self.depth = depth


class FluxImbalance(DomainError):
    """Incoming and outgoing weight differ on an orientable stump component."""

    def __init__(self, component, in_sum, out_sum):
        super().__init__(
            f"flux imbalance on component {component}: in={in_sum} out={out_sum}"
        )
        self.component = component
        self.in_sum = in_sum
        self.out_sum = out_sum

    def payload(self):
        return {
            "error": "FluxImbalance",
            "component": self.component,
            "in_sum": str(self.in_sum),
            "out_sum": str(self.out_sum),
        }


class NoPath(DomainError):
    """No smooth train path exists between the requested half-branches."""

    def __init__(self, component, message="no train path"):
        super().__init__(f"{message} (component {component})")
        self.component = component


class NonAdditiveChain(DomainError):
    """A chain of points is not additive for the Thurston distance."""


class NotStabilized(DomainError):
    """A supremum estimate has not stabilized under depth refinement."""
