"""Schema-typed tabular records for intake-derivation corpora.

A corpus is a list of derivation cases. Each case carries a typology code
describing the household composition, a binary acceptance label, and a row
of schema-typed cells. Cells are plain Python values: ``str`` for
categories, ``float`` for numbers, ``datetime.date`` for dates, and
``None`` for the explicit missing marker.
"""

import csv
import datetime as dt
import json
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DataQualityWarning,
    HeaderMismatch,
    InvalidConfig,
    ParseError,
    RaggedRow,
)

Cell = "str | float | dt.date | None"

COLUMN_KINDS = frozenset(
    {"categorical", "numeric", "date", "binary", "label", "typology", "department"}
)
APPLICABILITIES = frozenset({"child", "pregnant", "common"})

VALID_TYPOLOGY_CODES = frozenset({1, 2, 3, 4, 5, 99})
NO_DATA_TYPOLOGY = 99
# Segment membership by typology code. Codes 4 and 5 describe households
# with both a pregnant woman and children, so those cases belong to both
# segments; code 99 ("no data") belongs to neither.
BD1_TYPOLOGIES = frozenset({2, 3, 4, 5})
BD2_TYPOLOGIES = frozenset({1, 4, 5})


@dataclass(frozen=True)
class DerivationTypology:
    """Household-composition code attached to every derivation case."""

    code: int

    def __post_init__(self):
        if self.code not in VALID_TYPOLOGY_CODES:
            raise InvalidConfig(f"unknown typology code {self.code}")

    @property
    def in_bd1(self) -> bool:
        return self.code in BD1_TYPOLOGIES

    @property
    def in_bd2(self) -> bool:
        return self.code in BD2_TYPOLOGIES


@dataclass
class ColumnSpec:
    """Declaration of one column: its kind, segment applicability, and the
    raw strings that mean "missing" in source files."""

    name: str
    kind: str
    applicability: str = "common"
    allowed_categories: list[str] | None = None
    missing_codes: list[str] = field(default_factory=lambda: [""])
    positive_value: str = "1"  # label columns only: raw value mapped to 1

    def __post_init__(self):
        if self.kind not in COLUMN_KINDS:
            raise InvalidConfig(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.applicability not in APPLICABILITIES:
            raise InvalidConfig(
                f"column {self.name!r}: unknown applicability {self.applicability!r}"
            )
        if self.allowed_categories is not None and self.kind != "categorical":
            raise InvalidConfig(
                f"column {self.name!r}: allowed_categories is only valid for "
                f"categorical columns"
            )
        if self.allowed_categories is not None and not self.allowed_categories:
            raise InvalidConfig(f"column {self.name!r}: allowed_categories is empty")

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "kind": self.kind,
            "applicability": self.applicability,
            "missing_codes": list(self.missing_codes),
        }
        if self.allowed_categories is not None:
            d["allowed_categories"] = list(self.allowed_categories)
        if self.kind == "label":
            d["positive_value"] = self.positive_value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ColumnSpec":
        try:
            return cls(
                name=d["name"],
                kind=d["kind"],
                applicability=d.get("applicability", "common"),
                allowed_categories=d.get("allowed_categories"),
                missing_codes=list(d.get("missing_codes", [""])),
                positive_value=d.get("positive_value", "1"),
            )
        except KeyError as exc:
            raise InvalidConfig(f"column spec missing field {exc}") from exc


@dataclass
class Schema:
    """Ordered column declarations; exactly one label and one typology."""

    columns: list[ColumnSpec]

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise InvalidConfig(f"duplicate column names: {dupes}")
        for kind in ("label", "typology"):
            n = sum(1 for c in self.columns if c.kind == kind)
            if n != 1:
                raise InvalidConfig(f"schema needs exactly one {kind} column, has {n}")

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def label_column(self) -> ColumnSpec:
        return next(c for c in self.columns if c.kind == "label")

    @property
    def typology_column(self) -> ColumnSpec:
        return next(c for c in self.columns if c.kind == "typology")

    def index(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise KeyError(name)

    def column(self, name: str) -> ColumnSpec:
        return self.columns[self.index(name)]

    def to_dict(self) -> dict:
        return {"columns": [c.to_dict() for c in self.columns]}

    @classmethod
    def from_dict(cls, d: dict) -> "Schema":
        cols = d.get("columns")
        if not isinstance(cols, list) or not cols:
            raise InvalidConfig("schema document needs a non-empty 'columns' list")
        return cls([ColumnSpec.from_dict(c) for c in cols])

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, ensure_ascii=False)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Schema":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class Dataset:
    """A corpus: schema, cell rows, acceptance labels, typology codes."""

    schema: Schema
    rows: list[list]
    labels: np.ndarray
    typologies: np.ndarray

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int8)
        self.typologies = np.asarray(self.typologies, dtype=np.int64)
        n = len(self.rows)
        if len(self.labels) != n or len(self.typologies) != n:
            raise InvalidConfig(
                f"rows/labels/typologies lengths differ: "
                f"{n}/{len(self.labels)}/{len(self.typologies)}"
            )

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def validate(self) -> None:
        """Full cell-level check: row widths, kind compatibility, label and
        typology vectors consistent with their columns."""
        width = len(self.schema.columns)
        if not np.isin(self.labels, (0, 1)).all():
            raise InvalidConfig("labels must be 0/1")
        if not np.isin(self.typologies, sorted(VALID_TYPOLOGY_CODES)).all():
            raise InvalidConfig("typology codes outside the valid set")
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise InvalidConfig(f"row {i} has {len(row)} cells, schema has {width}")
            for spec, cell in zip(self.schema.columns, row):
                _check_cell(spec, cell, i)

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            schema=self.schema,
            rows=[self.rows[i] for i in idx],
            labels=self.labels[idx],
            typologies=self.typologies[idx],
        )

    def with_column(self, spec: ColumnSpec, cells: list) -> "Dataset":
        """Return a copy with one appended column."""
        if len(cells) != self.n_rows:
            raise InvalidConfig("appended column length differs from row count")
        schema = Schema(self.schema.columns + [spec])
        rows = [row + [cell] for row, cell in zip(self.rows, cells)]
        return Dataset(schema, rows, self.labels.copy(), self.typologies.copy())

    def column_cells(self, name: str) -> list:
        j = self.schema.index(name)
        return [row[j] for row in self.rows]

    def equals(self, other: "Dataset") -> bool:
        return (
            self.schema == other.schema
            and self.rows == other.rows
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.typologies, other.typologies)
        )


def _check_cell(spec: ColumnSpec, cell, row_index: int) -> None:
    if cell is None:
        if spec.kind in ("label", "typology"):
            raise InvalidConfig(f"row {row_index}: {spec.kind} cell is missing")
        return
    kind = spec.kind
    if kind in ("categorical", "department"):
        ok = isinstance(cell, str)
    elif kind == "date":
        ok = isinstance(cell, dt.date)
    elif kind in ("binary", "label"):
        ok = isinstance(cell, float) and cell in (0.0, 1.0)
    elif kind == "typology":
        ok = isinstance(cell, float) and int(cell) in VALID_TYPOLOGY_CODES
    else:  # numeric
        ok = isinstance(cell, float) and math.isfinite(cell)
    if not ok:
        raise InvalidConfig(
            f"row {row_index}, column {spec.name!r}: cell {cell!r} is not a valid "
            f"{kind} value"
        )


def _parse_cell(raw: str, spec: ColumnSpec, line_number: int):
    kind = spec.kind
    if kind == "typology":
        if raw in spec.missing_codes:
            return float(NO_DATA_TYPOLOGY)
        try:
            code = int(raw)
        except ValueError:
            raise ParseError(line_number, spec.name, raw, "not an integer typology")
        if code not in VALID_TYPOLOGY_CODES:
            raise ParseError(line_number, spec.name, raw, "unknown typology code")
        return float(code)
    if kind == "label":
        if raw in spec.missing_codes:
            raise ParseError(line_number, spec.name, raw, "label is mandatory")
        return 1.0 if raw == spec.positive_value else 0.0
    if raw in spec.missing_codes:
        return None
    if kind in ("categorical", "department"):
        if spec.allowed_categories is not None and raw not in spec.allowed_categories:
            raise ParseError(line_number, spec.name, raw, "category not in allowed list")
        return raw
    if kind == "binary":
        if raw not in ("0", "1"):
            raise ParseError(line_number, spec.name, raw, "binary cells must be 0 or 1")
        return float(raw)
    if kind == "numeric":
        try:
            value = float(raw)
        except ValueError:
            raise ParseError(line_number, spec.name, raw, "not a number")
        if not math.isfinite(value):
            raise ParseError(line_number, spec.name, raw, "non-finite number")
        return value
    # date
    try:
        return dt.date.fromisoformat(raw)
    except ValueError:
        raise ParseError(line_number, spec.name, raw, "not an ISO date (YYYY-MM-DD)")


def load_csv(path, schema: Schema) -> Dataset:
    """Read a UTF-8, comma-delimited, RFC-4180 CSV into a Dataset.

    The first line must repeat the schema's column names in order. Any raw
    string listed in a column's missing codes becomes the missing marker.
    Rows that cannot be parsed abort the load; silent drops would corrupt
    count reconciliation downstream.
    """
    specs = schema.columns
    label_idx = schema.index(schema.label_column.name)
    typ_idx = schema.index(schema.typology_column.name)
    rows: list[list] = []
    labels: list[int] = []
    typologies: list[int] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise HeaderMismatch(f"{path}: file is empty")
        if header != schema.names:
            raise HeaderMismatch(
                f"{path}: header {header!r} does not match schema columns "
                f"{schema.names!r}"
            )
        for line_number, raw_row in enumerate(reader, start=2):
            if len(raw_row) != len(specs):
                raise RaggedRow(line_number, len(specs), len(raw_row))
            row = [
                _parse_cell(raw, spec, line_number)
                for raw, spec in zip(raw_row, specs)
            ]
            rows.append(row)
            labels.append(int(row[label_idx]))
            typologies.append(int(row[typ_idx]))
    ds = Dataset(schema, rows, np.array(labels), np.array(typologies))
    ds.validate()
    return ds


def _format_cell(cell, spec: ColumnSpec) -> str:
    if cell is None:
        return spec.missing_codes[0] if spec.missing_codes else ""
    if isinstance(cell, dt.date):
        return cell.isoformat()
    if isinstance(cell, str):
        return cell
    if spec.kind in ("label", "binary", "typology"):
        return str(int(cell))
    return repr(float(cell))


def save_csv(ds: Dataset, path) -> None:
    """Write a Dataset back to CSV; ``load_csv`` of the result reproduces
    the dataset exactly."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ds.schema.names)
        for row in ds.rows:
            writer.writerow(
                [_format_cell(c, s) for c, s in zip(row, ds.schema.columns)]
            )


def segment(ds: Dataset) -> tuple[Dataset, Dataset]:
    """Split a corpus into the children segment (BD1, typologies 2-5) and
    the pregnant-women segment (BD2, typologies 1, 4, 5).

    Cases with typology 4 or 5 involve both a pregnant woman and children
    and are duplicated into both segments; a warning flags the overlap so
    per-segment totals can be reconciled. Typology 99 ("no data") cases
    are excluded from both.
    """
    typ = ds.typologies
    bd1_mask = np.isin(typ, sorted(BD1_TYPOLOGIES))
    bd2_mask = np.isin(typ, sorted(BD2_TYPOLOGIES))
    overlap = int((bd1_mask & bd2_mask).sum())
    if overlap:
        warnings.warn(
            f"segment overlap: {overlap} rows with typology 4 or 5 appear in both "
            f"BD1 and BD2; segment totals exceed the corpus total and cannot be "
            f"reconciled against disjoint per-segment case counts",
            DataQualityWarning,
            stacklevel=2,
        )
    return ds.subset(np.flatnonzero(bd1_mask)), ds.subset(np.flatnonzero(bd2_mask))


def drop_inapplicable(ds: Dataset, segment_kind: str) -> Dataset:
    """Remove columns that do not apply to a segment ('child' or
    'pregnant'); 'common' columns always stay."""
    if segment_kind not in ("child", "pregnant"):
        raise InvalidConfig(f"segment must be 'child' or 'pregnant', got {segment_kind!r}")
    keep = [
        i
        for i, c in enumerate(ds.schema.columns)
        if c.applicability in ("common", segment_kind)
    ]
    schema = Schema([ds.schema.columns[i] for i in keep])
    rows = [[row[i] for i in keep] for row in ds.rows]
    return Dataset(schema, rows, ds.labels.copy(), ds.typologies.copy())


def summarize(ds: Dataset) -> dict[int, int]:
    """Count cases per typology code; counts always sum to the row count."""
    counts = Counter(int(t) for t in ds.typologies)
    return {code: counts[code] for code in sorted(counts)}
