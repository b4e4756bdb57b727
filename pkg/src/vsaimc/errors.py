"""Exception hierarchy shared by every module."""


class VSAError(Exception):
    """Base class for all errors raised by vsaimc."""


class InvalidDimensionError(VSAError, ValueError):
    pass


class ShapeError(VSAError, ValueError):
    """Operands disagree in dimension or representation."""


class EmptyBundleError(VSAError, ValueError):
    pass


class InvalidProbabilityError(VSAError, ValueError):
    pass


class UndefinedSimilarityError(VSAError, ValueError):
    pass


class InvalidInputError(VSAError, ValueError):
    """Non-finite or otherwise unusable input values."""


class MissingItemError(VSAError, KeyError):
    """Symbol, node, modality or sensor not present in a codebook/registry."""

    def __str__(self):
        return str(self.args[0]) if self.args else "missing item"


class DegenerateClassError(VSAError, ValueError):
    pass


class InvalidHyperparameterError(VSAError, ValueError):
    pass


class ModelStateError(VSAError, RuntimeError):
    pass


class InvalidKError(VSAError, ValueError):
    pass


class InvalidMemoryError(VSAError, ValueError):
    pass


class InvalidGraphError(VSAError, ValueError):
    pass


class MappingError(VSAError, ValueError):
    pass


class IncompleteTableError(VSAError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "incomplete table"


class InvalidDescriptorError(VSAError, ValueError):
    pass


class UnsupportedNodeError(VSAError, ValueError):
    pass


class FormatError(VSAError, ValueError):
    """Malformed serialized container or input file."""
