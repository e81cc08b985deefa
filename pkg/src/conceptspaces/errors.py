"""Exception types shared across the package."""


class ConceptSpaceError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ConceptSpaceError, ValueError):
    """A structural invariant or parameter constraint is violated."""


class UnknownNameError(ConceptSpaceError, KeyError):
    """A named entity (concept, domain, dimension) does not exist."""

    def __str__(self) -> str:
        # KeyError would repr() the message; keep it readable.
        return self.args[0] if self.args else ""


class KbFormatError(ConceptSpaceError, ValueError):
    """A knowledge base file cannot be parsed or fails schema validation."""


class LatticeSizeError(ConceptSpaceError):
    """A requested evaluation lattice exceeds the configured cell cap."""


class UnrelatedConceptsError(ConceptSpaceError):
    """The height of intersection fell below the numeric floor.

    Raised when two concepts are so far apart that their combination would
    carry a peak membership smaller than the configured floor, i.e. they are
    effectively unrelated in the current space.
    """
