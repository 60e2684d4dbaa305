"""Exception hierarchy shared by every patchnet module."""

from __future__ import annotations


class PatchnetError(Exception):
    """Base class for all errors raised by this package."""


class IdentifierError(PatchnetError):
    """An identifier is unknown, duplicated, or syntactically invalid."""


class SemanticsError(PatchnetError):
    """An operation violated net semantics (e.g. firing a disabled transition)."""


class NonQuiescentError(PatchnetError):
    """Firing bound exhausted with transitions still enabled.

    Carries the partial marking and the number of firings performed.
    """

    def __init__(self, message: str, marking: dict, firings: int):
        super().__init__(message)
        self.marking = marking
        self.firings = firings


class ParseError(PatchnetError):
    """Lexical or syntactic error in an input file.

    ``line``/``column`` locate the offense where known; ``offset`` is a byte
    offset for formats without a line structure (JSON).
    """

    def __init__(self, message: str, line: int | None = None,
                 column: int | None = None, offset: int | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        elif offset is not None:
            loc = f" (offset {offset})"
        super().__init__(message + loc)
        self.line = line
        self.column = column
        self.offset = offset


class FormatError(PatchnetError):
    """Input is well-formed but violates the format contract."""


class ShapeError(FormatError):
    """A matrix input is not square or its row/column labels disagree."""


class AsymmetryError(FormatError):
    """An adjacency matrix entry breaks the required symmetry."""


class SchemaError(FormatError):
    """An XML element is missing a required attribute."""


class EmptyGridError(PatchnetError):
    """Grid construction kept zero cells."""


class NoCrossingError(PatchnetError):
    """Spanning probability never crosses 0.5 within the probability grid."""


class MergeError(PatchnetError):
    """Result merging failed (missing manifest or trace file)."""
