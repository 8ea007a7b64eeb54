"""Exception types shared across the package."""


class PathPartitionError(Exception):
    """Base class for every error raised by this package."""


class PreconditionNotMet(PathPartitionError):
    """A quantitative hypothesis of a routine does not hold for the input."""


class InvariantViolation(PathPartitionError):
    """A structural invariant failed after construction."""


class ConstructionFailed(PathPartitionError):
    """A constructive step could not be completed.

    ``step`` names the step and ``detail`` carries the counter values or the
    inequality that failed.
    """

    def __init__(self, step: str, detail: str = ""):
        self.step = step
        self.detail = detail
        super().__init__(f"{step}: {detail}" if detail else step)


class BudgetExhausted(PathPartitionError):
    """A search hit its node limit before reaching a verdict."""

    def __init__(self, nodes: int):
        self.nodes = nodes
        super().__init__(f"node budget exhausted after {nodes} nodes")


class NoDisjointFamily(PathPartitionError):
    """No family of vertex-disjoint paths exists; ``cut`` blocks it."""

    def __init__(self, cut: int, flow: int, needed: int):
        self.cut = cut
        self.flow = flow
        self.needed = needed
        super().__init__(f"only {flow} of {needed} disjoint paths exist")


class ParityMismatch(PreconditionNotMet):
    pass


class LengthOutOfBand(PreconditionNotMet):
    pass


class Graph6Error(PathPartitionError, ValueError):
    pass
