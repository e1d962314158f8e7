"""Exception hierarchy for the generator."""


class GraphPriorError(Exception):
    """Base class for all generator errors."""


class ConfigError(GraphPriorError):
    """Malformed or invalid prior configuration."""


class GenerationError(GraphPriorError):
    """Structure generation cannot proceed (e.g. fewer than 2 nodes)."""


class SizeMismatchError(GraphPriorError):
    """Level combination called with inconsistent node counts."""


class ArcOverflowError(GraphPriorError):
    """Expected edge volume exceeds what the arc index type can hold."""


class NumericOverflowError(GraphPriorError):
    """An SCM activation left the representable range; caller should resample."""


class DegenerateTargetError(GraphPriorError):
    """Raw target has too few distinct values to derive the task."""


class InsufficientNeuronsError(GraphPriorError):
    """SCM too small to designate the requested feature/target neurons."""


class AttributeGenerationError(GraphPriorError):
    """Attribute pipeline failed after exhausting its retry budget."""


class SaturationError(GraphPriorError):
    """Negative sampling could not find enough non-edges within budget."""


class ConvergenceError(GraphPriorError):
    """Iterative eigensolver missed the residual tolerance.

    Carries the best residual achieved so the caller can report it.
    """

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (achieved residual {residual:.3e})")
        self.residual = residual


class ContainerError(GraphPriorError):
    """Base class for dataset container read/write failures."""


class BadMagicError(ContainerError):
    pass


class UnsupportedVersionError(ContainerError):
    pass


class CorruptSectionError(ContainerError):
    """A container section is truncated or inconsistent.

    ``section`` names the region, ``offset`` is the byte position where the
    problem was detected.
    """

    def __init__(self, section: str, offset: int, message: str = ""):
        detail = f": {message}" if message else ""
        super().__init__(f"corrupt section '{section}' at byte {offset}{detail}")
        self.section = section
        self.offset = offset


class InvariantViolationError(ContainerError):
    """Container decoded structurally but violates a dataset invariant."""
