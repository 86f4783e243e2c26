"""Exception types shared across the toolkit."""


class PafkitError(Exception):
    """Base class for all toolkit errors."""


class InvalidConfig(PafkitError):
    """A configuration object or file violates its invariants."""


# --- dataset ingestion ---------------------------------------------------

class HeaderMismatch(PafkitError):
    """CSV header names or order differ from the schema."""


class RaggedRow(PafkitError):
    """A CSV row has the wrong number of cells."""

    def __init__(self, line_number: int, expected: int, got: int):
        self.line_number = line_number
        self.expected = expected
        self.got = got
        super().__init__(
            f"line {line_number}: expected {expected} cells, got {got}"
        )


class ParseError(PafkitError):
    """A non-missing cell failed to parse under its column kind."""

    def __init__(self, line_number: int, column: str, raw: str, reason: str):
        self.line_number = line_number
        self.column = column
        super().__init__(
            f"line {line_number}, column {column!r}: cannot parse {raw!r} ({reason})"
        )


class SchemaMismatch(PafkitError):
    """Data does not match the schema it is being used with."""


class UnknownColumn(PafkitError):
    """A referenced column name does not exist in the schema."""


class MissingDepartmentColumn(PafkitError):
    """The dataset has no column of kind 'department'."""


class EmptyDataset(PafkitError):
    """An operation that needs rows received none."""


# --- model fitting -------------------------------------------------------

class EmptyInput(PafkitError):
    """A fit/score call received an empty matrix."""


class DimensionMismatch(PafkitError):
    """Matrix/vector shapes are incompatible."""


class SingleClass(PafkitError):
    """Both classes are required but only one is present."""


class ModelFormatError(PafkitError):
    """A persisted model file has an unknown or invalid format."""


# --- resampling ----------------------------------------------------------

class TooFewMinority(PafkitError):
    """SMOTE needs at least two minority samples."""


class InvalidRatio(PafkitError):
    """The requested class ratio cannot be met by the resampler."""


# --- ensembles / evaluation ----------------------------------------------

class EmptyModelList(PafkitError):
    """An ensemble operation received no member models."""


class TooFewRows(PafkitError):
    """Not enough rows for the requested fold structure."""


class LengthMismatch(PafkitError):
    """Paired vectors have different lengths."""


class EmptyGrid(PafkitError):
    """A threshold or hyperparameter grid is empty."""


class TooFewPerClass(PafkitError):
    """A class has fewer samples than the requested fold count."""


class AllModelsFailed(PafkitError):
    """Every configured model of an experiment failed; the manifest holds
    the per-model failure records."""


class DataQualityWarning(UserWarning):
    """Non-fatal data issue (negative ages, unknown departments, segment
    overlap); recorded in run manifests rather than aborting."""
