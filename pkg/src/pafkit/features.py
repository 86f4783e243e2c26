"""Feature engineering: one-hot encoding, scaling, imputation, age
derivation, births-per-department join, stratified splitting, and a
schema-faithful synthetic corpus generator.

All encoder statistics come from the training split only; transforming any
dataset with a fitted encoder never consults the data being transformed.
"""

import datetime as dt
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dataset import ColumnSpec, Dataset, Schema, VALID_TYPOLOGY_CODES
from .errors import (
    DataQualityWarning,
    EmptyDataset,
    HeaderMismatch,
    InvalidConfig,
    MissingDepartmentColumn,
    ParseError,
    SchemaMismatch,
    SingleClass,
    UnknownColumn,
)
from .seeding import derive_seed

# Column name appended by join_births; the encoder scales it min-max to
# [0,1] instead of z-scoring it.
BIRTHS_COLUMN = "births_dept"
AGE_COLUMN = "age_days"
OTHER_SLOT = "__other__"

DEPARTMENTS = (
    "Artigas",
    "Canelones",
    "Cerro Largo",
    "Colonia",
    "Durazno",
    "Flores",
    "Florida",
    "Lavalleja",
    "Maldonado",
    "Montevideo",
    "Paysandú",
    "Río Negro",
    "Rivera",
    "Rocha",
    "Salto",
    "San José",
    "Soriano",
    "Tacuarembó",
    "Treinta y Tres",
)


@dataclass
class FeatureMatrix:
    """Dense, fully finite feature matrix with column names."""

    values: np.ndarray
    column_names: list[str]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise InvalidConfig("feature matrix must be 2-dimensional")
        if self.values.shape[1] != len(self.column_names):
            raise InvalidConfig(
                f"matrix has {self.values.shape[1]} columns but "
                f"{len(self.column_names)} names"
            )
        if not np.isfinite(self.values).all():
            raise InvalidConfig("feature matrix contains non-finite values")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def save_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(self.column_names) + "\n")
            for row in self.values:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


@dataclass
class EncoderModel:
    """Per-column encoding state learned from a training split."""

    columns: list[tuple[str, str]]  # fitted (name, kind) pairs, in order
    categories: dict[str, list[str]] = field(default_factory=dict)
    numeric_stats: dict[str, tuple[float, float, float]] = field(default_factory=dict)
    births_range: dict[str, tuple[float, float]] = field(default_factory=dict)
    dropped_dates: list[str] = field(default_factory=list)

    def feature_names(self) -> list[str]:
        names: list[str] = []
        for name, kind in self.columns:
            if kind in ("label", "typology", "date"):
                continue
            if kind in ("categorical", "department"):
                names.extend(f"{name}={c}" for c in self.categories[name])
                names.append(f"{name}={OTHER_SLOT}")
            else:
                names.append(name)
        return names


def fit_encoder(train: Dataset) -> EncoderModel:
    """Learn category lists and scaling statistics from a training split.

    Categories are the distinct non-missing values, in lexicographic order,
    plus an extra slot shared by missing and unseen values. Numeric columns
    get mean, standard deviation, and median over the non-missing values
    (an all-missing column gets 0/0/0). The births column gets min and max
    for later [0,1] scaling.
    """
    if train.n_rows == 0:
        raise EmptyDataset("cannot fit an encoder on an empty training split")
    enc = EncoderModel(columns=[(c.name, c.kind) for c in train.schema.columns])
    for j, col in enumerate(train.schema.columns):
        kind = col.kind
        if kind in ("label", "typology"):
            continue
        if kind == "date":
            enc.dropped_dates.append(col.name)
            continue
        cells = [row[j] for row in train.rows]
        if kind in ("categorical", "department"):
            enc.categories[col.name] = sorted({c for c in cells if c is not None})
            continue
        values = np.array([c for c in cells if c is not None], dtype=np.float64)
        if col.name == BIRTHS_COLUMN:
            if values.size == 0:
                enc.births_range[col.name] = (0.0, 0.0)
            else:
                enc.births_range[col.name] = (float(values.min()), float(values.max()))
        elif values.size == 0:
            enc.numeric_stats[col.name] = (0.0, 0.0, 0.0)
        else:
            enc.numeric_stats[col.name] = (
                float(values.mean()),
                float(values.std()),
                float(np.median(values)),
            )
    return enc


def transform(enc: EncoderModel, ds: Dataset) -> FeatureMatrix:
    """Encode a dataset with a fitted encoder.

    Categorical cells one-hot over the learned categories; unseen or
    missing values light the extra slot. Numeric cells are median-imputed
    then z-scored (a zero-deviation column maps to all zeros). The births
    column is min-max scaled to [0,1] and clamped. Date columns are
    dropped with a data-quality warning. Label and typology columns never
    become features.
    """
    if [(c.name, c.kind) for c in ds.schema.columns] != enc.columns:
        raise SchemaMismatch(
            "dataset columns do not match the schema the encoder was fitted on"
        )
    if enc.dropped_dates:
        warnings.warn(
            f"date columns {enc.dropped_dates} are not encodable and were dropped; "
            f"derive age features from them before encoding to keep the signal",
            DataQualityWarning,
            stacklevel=2,
        )
    n = ds.n_rows
    blocks: list[np.ndarray] = []
    for j, (name, kind) in enumerate(enc.columns):
        if kind in ("label", "typology", "date"):
            continue
        cells = [row[j] for row in ds.rows]
        if kind in ("categorical", "department"):
            cats = enc.categories[name]
            index = {c: i for i, c in enumerate(cats)}
            other = len(cats)
            block = np.zeros((n, len(cats) + 1))
            for i, cell in enumerate(cells):
                block[i, index.get(cell, other)] = 1.0
            blocks.append(block)
        elif name == BIRTHS_COLUMN:
            lo, hi = enc.births_range[name]
            span = hi - lo
            col = np.zeros(n)
            if span > 0:
                for i, cell in enumerate(cells):
                    if cell is not None:
                        col[i] = min(1.0, max(0.0, (cell - lo) / span))
            blocks.append(col[:, None])
        else:
            mean, sd, median = enc.numeric_stats[name]
            col = np.array([median if c is None else c for c in cells])
            col = (col - mean) / sd if sd > 0 else np.zeros(n)
            blocks.append(col[:, None])
    values = np.hstack(blocks) if blocks else np.zeros((n, 0))
    return FeatureMatrix(values, enc.feature_names())


def derive_age(ds: Dataset, birth_col: str, derivation_col: str) -> Dataset:
    """Append an ``age_days`` numeric column = derivation date − birth date
    in whole days. Either date missing → age missing; a negative age is a
    recording error, so it becomes missing and raises a data-quality
    warning instead of aborting."""
    for name in (birth_col, derivation_col):
        if name not in ds.schema.names:
            raise UnknownColumn(f"no column named {name!r}")
        if ds.schema.column(name).kind != "date":
            raise InvalidConfig(f"column {name!r} must have kind 'date'")
    bi = ds.schema.index(birth_col)
    di = ds.schema.index(derivation_col)
    ages: list = []
    negatives = 0
    for row in ds.rows:
        birth, deriv = row[bi], row[di]
        if birth is None or deriv is None:
            ages.append(None)
            continue
        days = (deriv - birth).days
        if days < 0:
            negatives += 1
            ages.append(None)
        else:
            ages.append(float(days))
    if negatives:
        warnings.warn(
            f"{negatives} rows have {birth_col!r} after {derivation_col!r}; "
            f"their {AGE_COLUMN} is treated as missing",
            DataQualityWarning,
            stacklevel=2,
        )
    return ds.with_column(ColumnSpec(AGE_COLUMN, "numeric"), ages)


def join_births(ds: Dataset, births: dict[str, float]) -> Dataset:
    """Append a ``births_dept`` numeric column with the birth count of each
    row's department. Departments absent from the table map to missing
    (with a data-quality warning); scaling to [0,1] happens in transform."""
    dept_cols = [c for c in ds.schema.columns if c.kind == "department"]
    if not dept_cols:
        raise MissingDepartmentColumn("dataset has no column of kind 'department'")
    j = ds.schema.index(dept_cols[0].name)
    cells: list = []
    unknown: set[str] = set()
    for row in ds.rows:
        dept = row[j]
        if dept is None:
            cells.append(None)
        elif dept in births:
            cells.append(float(births[dept]))
        else:
            unknown.add(dept)
            cells.append(None)
    if unknown:
        warnings.warn(
            f"departments not in the births table: {sorted(unknown)}; "
            f"their {BIRTHS_COLUMN} is treated as missing",
            DataQualityWarning,
            stacklevel=2,
        )
    return ds.with_column(ColumnSpec(BIRTHS_COLUMN, "numeric"), cells)


def load_births_csv(path) -> dict[str, float]:
    """Read the 2-column ``department,births`` auxiliary table."""
    births: dict[str, float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "department,births":
        raise HeaderMismatch(f"{path}: expected header 'department,births'")
    for line_number, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(line_number, "births", line, "expected 2 cells")
        dept, raw = parts
        if dept in births:
            raise ParseError(line_number, "department", dept, "duplicate department")
        try:
            count = float(raw)
        except ValueError:
            raise ParseError(line_number, "births", raw, "not a number")
        if not math.isfinite(count) or count < 0:
            raise ParseError(line_number, "births", raw, "birth counts must be >= 0")
        births[dept] = count
    return births


@dataclass
class SplitIndices:
    train: np.ndarray
    test: np.ndarray


def stratified_split(labels, test_fraction: float, seed: int) -> SplitIndices:
    """Pick a test set uniformly at random within each class.

    Per class, round(n_class × test_fraction) rows go to test, rounding to
    the nearest integer with ties toward test. Deterministic per seed.
    """
    y = np.asarray(labels)
    if not 0.0 < test_fraction < 1.0:
        raise InvalidConfig(f"test_fraction must be in (0,1), got {test_fraction}")
    classes = np.unique(y)
    if len(classes) < 2:
        raise SingleClass("stratified split needs both classes present")
    rng = np.random.default_rng(seed)
    test_parts: list[np.ndarray] = []
    train_parts: list[np.ndarray] = []
    for cls in classes:
        idx = np.flatnonzero(y == cls)
        n_test = int(math.floor(len(idx) * test_fraction + 0.5))
        perm = rng.permutation(idx)
        test_parts.append(perm[:n_test])
        train_parts.append(perm[n_test:])
    return SplitIndices(
        train=np.sort(np.concatenate(train_parts)),
        test=np.sort(np.concatenate(test_parts)),
    )


DEFAULT_TYPOLOGY_WEIGHTS = {1: 0.30, 2: 0.40, 3: 0.08, 4: 0.05, 5: 0.12, 99: 0.05}


@dataclass
class SynthConfig:
    """Recipe for a synthetic derivation corpus.

    ``class_separation`` is the mean shift between classes on every numeric
    feature (and the tilt strength of categorical frequencies); 0 produces
    a corpus with no label signal at all.
    """

    n_rows: int
    positive_rate: float = 0.35
    typology_weights: dict[int, float] | None = None
    n_categorical: int = 4
    n_numeric: int = 6
    class_separation: float = 1.0
    missing_rate: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.typology_weights is None:
            self.typology_weights = dict(DEFAULT_TYPOLOGY_WEIGHTS)
        else:
            try:
                # JSON object keys arrive as strings; normalize to codes
                self.typology_weights = {
                    int(k): float(v) for k, v in self.typology_weights.items()
                }
            except (TypeError, ValueError) as exc:
                raise InvalidConfig(f"typology_weights keys must be codes: {exc}")
        if self.n_rows < 1:
            raise InvalidConfig("n_rows must be positive")
        if not 0.0 < self.positive_rate < 1.0:
            raise InvalidConfig("positive_rate must be in (0,1)")
        if self.n_categorical < 0 or self.n_numeric < 0:
            raise InvalidConfig("feature counts must be >= 0")
        if self.class_separation < 0:
            raise InvalidConfig("class_separation must be >= 0")
        if not 0.0 <= self.missing_rate < 1.0:
            raise InvalidConfig("missing_rate must be in [0,1)")
        bad = set(self.typology_weights) - VALID_TYPOLOGY_CODES
        if bad:
            raise InvalidConfig(f"unknown typology codes in weights: {sorted(bad)}")
        weights = list(self.typology_weights.values())
        if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-9:
            raise InvalidConfig("typology_weights must be >= 0 and sum to 1")


N_CATEGORY_LEVELS = 5
_EPOCH = dt.date(2018, 1, 1)
_HORIZON_DAYS = 2556  # derivation dates span 2018-2024
_MAX_AGE_DAYS = 1460  # ages up to four years at derivation


def synthetic_schema(cfg: SynthConfig) -> Schema:
    cols = [
        ColumnSpec("typology", "typology"),
        ColumnSpec("accepted", "label", positive_value="1"),
        ColumnSpec("department", "department"),
        ColumnSpec("birth_date", "date"),
        ColumnSpec("derivation_date", "date"),
    ]
    cols.extend(
        ColumnSpec(f"cat_{j:02d}", "categorical") for j in range(cfg.n_categorical)
    )
    cols.extend(ColumnSpec(f"num_{j:02d}", "numeric") for j in range(cfg.n_numeric))
    return Schema(cols)


def generate_synthetic(cfg: SynthConfig) -> Dataset:
    """Draw a corpus matching the derivation-case schema.

    Labels are Bernoulli(positive_rate); typologies follow the configured
    weights; numeric features are class-conditional normals with unit
    variance and a mean gap of class_separation; categorical features tilt
    their category frequencies by class. Departments and dates carry no
    label signal. Each feature cell is independently knocked out to
    missing with probability missing_rate. Pure function of the config:
    repeat calls produce identical datasets.
    """
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_rows
    labels = (rng.random(n) < cfg.positive_rate).astype(np.int8)

    codes = sorted(cfg.typology_weights)
    weights = np.array([cfg.typology_weights[c] for c in codes])
    typologies = rng.choice(codes, size=n, p=weights / weights.sum())

    departments = rng.choice(DEPARTMENTS, size=n)
    deriv_offsets = rng.integers(0, _HORIZON_DAYS, size=n)
    age_offsets = rng.integers(0, _MAX_AGE_DAYS, size=n)

    cat_values = np.empty((n, cfg.n_categorical), dtype=object)
    for j in range(cfg.n_categorical):
        tilt = rng.normal(size=N_CATEGORY_LEVELS)
        logits = 0.5 * cfg.class_separation * tilt
        p_pos = np.exp(logits) / np.exp(logits).sum()
        p_neg = np.exp(-logits) / np.exp(-logits).sum()
        draws = rng.random(n)
        cum_pos = np.cumsum(p_pos)
        cum_neg = np.cumsum(p_neg)
        idx_pos = np.searchsorted(cum_pos, draws, side="right")
        idx_neg = np.searchsorted(cum_neg, draws, side="right")
        idx = np.where(labels == 1, idx_pos, idx_neg).clip(0, N_CATEGORY_LEVELS - 1)
        cat_values[:, j] = np.array([f"c{i}" for i in range(N_CATEGORY_LEVELS)])[idx]

    num_values = rng.normal(size=(n, cfg.n_numeric))
    num_values += labels[:, None] * cfg.class_separation

    n_feature_cols = 3 + cfg.n_categorical + cfg.n_numeric  # dept, 2 dates, cat, num
    missing = rng.random((n, n_feature_cols)) < cfg.missing_rate

    rows: list[list] = []
    for i in range(n):
        deriv = _EPOCH + dt.timedelta(days=int(deriv_offsets[i]))
        birth = deriv - dt.timedelta(days=int(age_offsets[i]))
        row: list = [
            float(typologies[i]),
            float(labels[i]),
            None if missing[i, 0] else str(departments[i]),
            None if missing[i, 1] else birth,
            None if missing[i, 2] else deriv,
        ]
        for j in range(cfg.n_categorical):
            row.append(None if missing[i, 3 + j] else str(cat_values[i, j]))
        for j in range(cfg.n_numeric):
            cell = missing[i, 3 + cfg.n_categorical + j]
            row.append(None if cell else float(num_values[i, j]))
        rows.append(row)

    ds = Dataset(synthetic_schema(cfg), rows, labels, typologies.astype(np.int64))
    ds.validate()
    return ds


def generate_births(seed: int) -> dict[str, float]:
    """Draw a plausible births-per-department auxiliary table."""
    rng = np.random.default_rng(derive_seed(seed, "births"))
    return {dept: float(rng.integers(300, 60000)) for dept in DEPARTMENTS}
