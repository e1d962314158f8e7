"""Exception hierarchy for the reference model package."""


class RefModelError(Exception):
    """Base class for all errors raised by this package."""


class ContainerFormatError(RefModelError):
    """A .gpfn file is malformed or uses an unsupported format."""


class DataError(RefModelError):
    """A dataset is readable but unusable by this harness
    (wrong task kind, too many classes, node cap exceeded)."""


class ShapeError(RefModelError):
    """Model inputs are mutually inconsistent."""
