"""Exception types shared across the package."""


class MedEmbedError(Exception):
    """Base class for errors raised by this package."""


class BudgetExceededError(MedEmbedError):
    """A generator would allocate more vertices than the configured budget."""


class SpaceFormatError(MedEmbedError):
    """A space file is malformed or internally inconsistent."""


class SideComputationError(MedEmbedError):
    """Removing a hyperplane edge class did not split the graph into two
    sides, or the computed classes overlap. Signals non-median input."""


class CubeSpanError(MedEmbedError):
    """A set of edges expected to span a cube does not close up."""


class NonTerminationError(MedEmbedError):
    """A cube-path walk took more steps than the graph distance allows."""


class KeyCollisionError(MedEmbedError):
    """Two embedding factors produced coordinates on the same basis key."""
