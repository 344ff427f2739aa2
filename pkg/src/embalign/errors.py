"""Exception and warning types shared across the package."""

from __future__ import annotations


class EmbAlignError(Exception):
    """Base class for all errors raised by this package."""


class EmptyInputError(EmbAlignError):
    """An operation received a matrix with zero rows."""


class NonFiniteInputError(EmbAlignError):
    """Input contains NaN or infinite entries."""


class DimensionMismatchError(EmbAlignError):
    """Vector dimension differs from what the model or operation expects."""


class ShapeMismatchError(EmbAlignError):
    """Two matrices that must agree in shape do not."""


class LengthMismatchError(EmbAlignError):
    """Paired inputs have different row counts."""


class DegenerateRowError(EmbAlignError):
    """Rows collapse to (near-)zero after centering and cannot be normalized.

    ``rows`` holds the offending row indices so callers may drop them.
    """

    def __init__(self, rows, message: str | None = None):
        self.rows = list(rows)
        if message is None:
            message = f"{len(self.rows)} row(s) have near-zero norm after centering: {self.rows[:10]}"
        super().__init__(message)


class TooFewPointsError(EmbAlignError):
    """Requested more clusters than available (distinct) points."""


class ZeroCentroidError(EmbAlignError):
    """A centroid has near-zero norm, so cosine similarity is undefined."""


class ZeroAnchorError(EmbAlignError):
    """An anchor vector has near-zero norm, so cosine similarity is undefined."""


class TooManyNeighborsError(EmbAlignError):
    """Requested more nearest neighbors than there are candidate rows."""


class TooFewPairsError(EmbAlignError):
    """Not enough matched pairs to fit a transformation."""


class SynthSpecError(EmbAlignError):
    """Invalid synthetic-data specification."""


class FileFormatError(EmbAlignError):
    """Base class for persistence-format violations."""


class BadMagicError(FileFormatError):
    """File does not start with the expected magic bytes."""


class TruncatedPayloadError(FileFormatError):
    """File ends before the declared payload is complete."""


class NonRectangularCsvError(FileFormatError):
    """CSV rows have inconsistent widths."""


class NonFiniteValueError(FileFormatError):
    """A stored value is NaN or infinite."""


class ChecksumMismatchError(FileFormatError):
    """Stored checksum does not match the file contents."""


class VersionUnsupportedError(FileFormatError):
    """File was written by an unknown (newer) format version."""


class RankDeficiencyWarning(UserWarning):
    """The pair matrix is rank deficient; the fitted map is not unique."""
