"""Exception hierarchy.

Every domain failure raises a subclass of :class:`OrdspaceError`; the CLI
maps those to exit code 1.  ``code`` is a short stable identifier that ends
up in JSON error reports.
"""


class OrdspaceError(Exception):
    code = "error"


class PolynomialError(OrdspaceError):
    code = "polynomial"


class ParseError(OrdspaceError):
    code = "parse"

    def __init__(self, message, position=None, text=None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class NotSquareFree(PolynomialError):
    code = "not_square_free"


class SharedRootError(PolynomialError):
    code = "shared_root"


class InvalidSpace(OrdspaceError):
    code = "invalid_space"


class CapExceeded(OrdspaceError):
    """An exponential enumeration would exceed its configured cap."""

    code = "cap_exceeded"

    def __init__(self, message, kind="generic"):
        self.kind = kind
        super().__init__(message)


class RefinementNeeded(OrdspaceError):
    """A cut window is too coarse for the polynomial being evaluated."""

    code = "refinement_needed"


class NoRealRoots(OrdspaceError):
    code = "no_real_roots"


class ConstructionError(OrdspaceError):
    """Internal consistency check of a quotient construction failed."""

    code = "construction"


class NoMatchingPoint(OrdspaceError):
    code = "no_matching_point"


class DecompositionError(OrdspaceError):
    code = "decomposition"


class MonotonicityViolation(OrdspaceError):
    code = "monotonicity"
