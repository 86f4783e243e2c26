import datetime as dt
import warnings

import numpy as np
import pytest

from pafkit.dataset import ColumnSpec, Dataset, Schema, load_csv, save_csv
from pafkit.errors import (
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
from pafkit.features import (
    BIRTHS_COLUMN,
    SynthConfig,
    derive_age,
    fit_encoder,
    generate_births,
    generate_synthetic,
    join_births,
    load_births_csv,
    stratified_split,
    transform,
)


def base_columns() -> list[ColumnSpec]:
    return [ColumnSpec("typ", "typology"), ColumnSpec("accepted", "label")]


def make_ds(extra_cols: list[ColumnSpec], feature_rows: list[list]) -> Dataset:
    schema = Schema(base_columns() + extra_cols)
    rows = [[1.0, 1.0] + r for r in feature_rows]
    n = len(rows)
    return Dataset(schema, rows, np.ones(n, dtype=np.int8), np.ones(n, dtype=np.int64))


def test_encoder_learns_sorted_categories_plus_other_slot() -> None:
    ds = make_ds([ColumnSpec("c", "categorical")], [["B"], ["A"], ["B"], [None]])
    enc = fit_encoder(ds)
    assert enc.categories["c"] == ["A", "B"]
    assert enc.feature_names() == ["c=A", "c=B", "c=__other__"]


def test_encoder_numeric_stats() -> None:
    ds = make_ds([ColumnSpec("x", "numeric")], [[1.0], [3.0], [None]])
    enc = fit_encoder(ds)
    mean, sd, median = enc.numeric_stats["x"]
    assert mean == pytest.approx(2.0)
    assert sd == pytest.approx(1.0)
    assert median == pytest.approx(2.0)


def test_encoder_all_missing_numeric_gets_zero_stats() -> None:
    ds = make_ds([ColumnSpec("x", "numeric")], [[None], [None]])
    enc = fit_encoder(ds)
    assert enc.numeric_stats["x"] == (0.0, 0.0, 0.0)
    fm = transform(enc, ds)
    assert fm.values.tolist() == [[0.0], [0.0]]


def test_encoder_requires_rows() -> None:
    schema = Schema(base_columns())
    empty = Dataset(schema, [], np.zeros(0), np.zeros(0))
    with pytest.raises(EmptyDataset):
        fit_encoder(empty)


def test_one_hot_encoding_and_other_slot() -> None:
    train = make_ds([ColumnSpec("c", "categorical")], [["A"], ["B"]])
    enc = fit_encoder(train)
    test = make_ds([ColumnSpec("c", "categorical")], [["B"], ["Z"], [None]])
    fm = transform(enc, test)
    assert fm.column_names == ["c=A", "c=B", "c=__other__"]
    assert fm.values.tolist() == [[0, 1, 0], [0, 0, 1], [0, 0, 1]]


def test_zscore_and_median_imputation() -> None:
    train = make_ds([ColumnSpec("x", "numeric")], [[1.0], [3.0]])
    enc = fit_encoder(train)
    fm = transform(enc, make_ds([ColumnSpec("x", "numeric")], [[3.0], [None]]))
    assert fm.values[0, 0] == pytest.approx(1.0)  # (3-2)/1
    assert fm.values[1, 0] == pytest.approx(0.0)  # imputed with median 2.0


def test_constant_numeric_column_maps_to_zero() -> None:
    train = make_ds([ColumnSpec("x", "numeric")], [[5.0], [5.0]])
    enc = fit_encoder(train)
    fm = transform(enc, make_ds([ColumnSpec("x", "numeric")], [[5.0], [9.0]]))
    assert fm.values.tolist() == [[0.0], [0.0]]


def test_transform_uses_train_statistics_only() -> None:
    train = make_ds([ColumnSpec("x", "numeric")], [[0.0], [2.0]])
    enc = fit_encoder(train)
    sentinel = make_ds([ColumnSpec("x", "numeric")], [[1000.0]])
    fm = transform(enc, sentinel)
    assert fm.values[0, 0] == pytest.approx((1000.0 - 1.0) / 1.0)


def test_births_column_min_max_scaled_and_clamped() -> None:
    col = ColumnSpec(BIRTHS_COLUMN, "numeric")
    train = make_ds([col], [[1200.0], [15000.0]])
    enc = fit_encoder(train)
    assert enc.births_range[BIRTHS_COLUMN] == (1200.0, 15000.0)
    fm = transform(
        enc, make_ds([col], [[1200.0], [15000.0], [8100.0], [20000.0], [0.0], [None]])
    )
    got = fm.values[:, 0]
    assert got[0] == pytest.approx(0.0)
    assert got[1] == pytest.approx(1.0)
    assert got[2] == pytest.approx(0.5)
    assert got[3] == pytest.approx(1.0)  # clamped above
    assert got[4] == pytest.approx(0.0)  # clamped below
    assert got[5] == pytest.approx(0.0)  # missing


def test_binary_columns_take_the_numeric_path() -> None:
    train = make_ds([ColumnSpec("b", "binary")], [[0.0], [1.0], [1.0], [None]])
    enc = fit_encoder(train)
    mean, sd, median = enc.numeric_stats["b"]
    assert mean == pytest.approx(2.0 / 3.0)
    fm = transform(enc, make_ds([ColumnSpec("b", "binary")], [[1.0], [None]]))
    assert fm.values[0, 0] == pytest.approx((1.0 - mean) / sd)
    assert fm.values[1, 0] == pytest.approx((median - mean) / sd)


def test_date_columns_dropped_with_warning() -> None:
    cols = [ColumnSpec("d", "date"), ColumnSpec("x", "numeric")]
    train = make_ds(cols, [[dt.date(2020, 1, 1), 1.0], [dt.date(2021, 1, 1), 2.0]])
    enc = fit_encoder(train)
    with pytest.warns(DataQualityWarning, match="date columns"):
        fm = transform(enc, train)
    assert fm.column_names == ["x"]


def test_transform_rejects_other_schemas() -> None:
    enc = fit_encoder(make_ds([ColumnSpec("x", "numeric")], [[1.0]]))
    other = make_ds([ColumnSpec("y", "numeric")], [[1.0]])
    with pytest.raises(SchemaMismatch):
        transform(enc, other)


def test_one_hot_blocks_sum_to_one_everywhere() -> None:
    cfg = SynthConfig(n_rows=400, n_categorical=3, n_numeric=2, missing_rate=0.2, seed=11)
    ds = generate_synthetic(cfg)
    enc = fit_encoder(ds)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DataQualityWarning)
        fm = transform(enc, ds)
    assert np.isfinite(fm.values).all()
    for col in ("department", "cat_00", "cat_01", "cat_02"):
        block = [i for i, n in enumerate(fm.column_names) if n.startswith(col + "=")]
        sums = fm.values[:, block].sum(axis=1)
        assert np.all(sums == 1.0)


def test_feature_matrix_rejects_non_finite() -> None:
    from pafkit.features import FeatureMatrix

    with pytest.raises(InvalidConfig):
        FeatureMatrix(np.array([[np.inf]]), ["x"])
    with pytest.raises(InvalidConfig):
        FeatureMatrix(np.array([[1.0, 2.0]]), ["x"])


def test_feature_matrix_csv_export(tmp_path) -> None:
    from pafkit.features import FeatureMatrix

    fm = FeatureMatrix(np.array([[1.0, 0.25], [2.0, -1.5]]), ["a", "b"])
    path = tmp_path / "fm.csv"
    fm.save_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "a,b"
    assert lines[1] == "1.0,0.25"


def date_ds(rows: list[list]) -> Dataset:
    cols = [ColumnSpec("born", "date"), ColumnSpec("derived", "date")]
    return make_ds(cols, rows)


def test_derive_age_in_whole_days() -> None:
    ds = date_ds([[dt.date(2020, 1, 1), dt.date(2020, 1, 31)]])
    out = derive_age(ds, "born", "derived")
    assert out.schema.names[-1] == "age_days"
    assert out.rows[0][-1] == 30.0


def test_derive_age_missing_dates_give_missing_age() -> None:
    ds = date_ds([[None, dt.date(2020, 1, 31)], [dt.date(2020, 1, 1), None]])
    out = derive_age(ds, "born", "derived")
    assert out.rows[0][-1] is None
    assert out.rows[1][-1] is None


def test_derive_age_negative_becomes_missing_with_warning() -> None:
    ds = date_ds([[dt.date(2021, 1, 1), dt.date(2020, 1, 1)]])
    with pytest.warns(DataQualityWarning, match="after"):
        out = derive_age(ds, "born", "derived")
    assert out.rows[0][-1] is None


def test_derive_age_unknown_column() -> None:
    ds = date_ds([[dt.date(2020, 1, 1), dt.date(2020, 1, 31)]])
    with pytest.raises(UnknownColumn):
        derive_age(ds, "nacimiento", "derived")
    with pytest.raises(InvalidConfig):
        derive_age(ds, "typ", "derived")


def test_join_births_lookup_and_unknowns() -> None:
    ds = make_ds(
        [ColumnSpec("dept", "department")],
        [["Montevideo"], ["Artigas"], ["Atlantida"], [None]],
    )
    table = {"Montevideo": 15000.0, "Artigas": 1200.0}
    with pytest.warns(DataQualityWarning, match="Atlantida"):
        out = join_births(ds, table)
    assert out.schema.names[-1] == BIRTHS_COLUMN
    assert [r[-1] for r in out.rows] == [15000.0, 1200.0, None, None]


def test_join_births_needs_department_column() -> None:
    ds = make_ds([ColumnSpec("x", "numeric")], [[1.0]])
    with pytest.raises(MissingDepartmentColumn):
        join_births(ds, {"Salto": 1.0})


def test_births_end_to_end_scaling() -> None:
    ds = make_ds(
        [ColumnSpec("dept", "department")], [["Montevideo"], ["Artigas"], ["Salto"]]
    )
    table = {"Montevideo": 15000.0, "Artigas": 1200.0, "Salto": 8100.0}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DataQualityWarning)
        joined = join_births(ds, table)
    enc = fit_encoder(joined)
    fm = transform(enc, joined)
    j = fm.column_names.index(BIRTHS_COLUMN)
    assert fm.values[:, j].tolist() == [1.0, 0.0, 0.5]


def test_load_births_csv(tmp_path) -> None:
    path = tmp_path / "births.csv"
    path.write_text("department,births\nMontevideo,15000\nArtigas,1200\n")
    assert load_births_csv(path) == {"Montevideo": 15000.0, "Artigas": 1200.0}
    path.write_text("dept,births\nMontevideo,15000\n")
    with pytest.raises(HeaderMismatch):
        load_births_csv(path)
    path.write_text("department,births\nMontevideo,quince\n")
    with pytest.raises(ParseError):
        load_births_csv(path)
    path.write_text("department,births\nSalto,10\nSalto,20\n")
    with pytest.raises(ParseError):
        load_births_csv(path)
    path.write_text("department,births\nSalto,-4\n")
    with pytest.raises(ParseError):
        load_births_csv(path)


def test_stratified_split_counts() -> None:
    labels = np.array([1] * 30 + [0] * 70)
    split = stratified_split(labels, 0.2, seed=3)
    assert len(split.test) == 20
    assert labels[split.test].sum() == 6
    assert labels[split.train].sum() == 24


def test_stratified_split_ties_round_toward_test() -> None:
    labels = np.array([1] * 5 + [0] * 5)
    split = stratified_split(labels, 0.5, seed=0)
    # 2.5 per class rounds to 3
    assert labels[split.test].sum() == 3
    assert len(split.test) == 6


def test_stratified_split_partition_and_determinism() -> None:
    rng = np.random.default_rng(0)
    for trial in range(20):
        n = int(rng.integers(10, 200))
        labels = rng.integers(0, 2, size=n)
        if labels.sum() in (0, n):
            labels[0] = 1 - labels[0]
        seed = int(rng.integers(0, 2**32))
        a = stratified_split(labels, 0.25, seed)
        b = stratified_split(labels, 0.25, seed)
        assert np.array_equal(a.train, b.train) and np.array_equal(a.test, b.test)
        merged = np.sort(np.concatenate([a.train, a.test]))
        assert np.array_equal(merged, np.arange(n))
        if len(a.test):
            overall = labels.mean()
            test_frac = labels[a.test].mean()
            assert abs(test_frac - overall) <= 1.0 / len(a.test) + 1e-12


def test_stratified_split_single_class() -> None:
    with pytest.raises(SingleClass):
        stratified_split(np.zeros(10), 0.2, seed=0)
    with pytest.raises(InvalidConfig):
        stratified_split(np.array([0, 1]), 1.5, seed=0)


def test_synthetic_shape_and_positive_rate() -> None:
    cfg = SynthConfig(n_rows=1000, positive_rate=0.25, seed=7)
    ds = generate_synthetic(cfg)
    assert ds.n_rows == 1000
    # binomial 99% interval around 250 at n=1000, p=0.25
    assert 215 <= ds.labels.sum() <= 285


def test_synthetic_is_deterministic() -> None:
    cfg = SynthConfig(n_rows=200, seed=42)
    assert generate_synthetic(cfg).equals(generate_synthetic(cfg))
    other = generate_synthetic(SynthConfig(n_rows=200, seed=43))
    assert not generate_synthetic(cfg).equals(other)


def test_synthetic_round_trips_through_csv(tmp_path) -> None:
    cfg = SynthConfig(n_rows=150, missing_rate=0.15, seed=5)
    ds = generate_synthetic(cfg)
    path = tmp_path / "synth.csv"
    save_csv(ds, path)
    assert load_csv(path, ds.schema).equals(ds)


def test_synthetic_missing_rate_roughly_holds() -> None:
    cfg = SynthConfig(n_rows=2000, missing_rate=0.2, seed=9)
    ds = generate_synthetic(cfg)
    feature_cols = range(2, len(ds.schema.columns))
    cells = [row[j] for row in ds.rows for j in feature_cols]
    frac = sum(c is None for c in cells) / len(cells)
    assert frac == pytest.approx(0.2, abs=0.02)


def test_synthetic_config_validation() -> None:
    with pytest.raises(InvalidConfig):
        SynthConfig(n_rows=0)
    with pytest.raises(InvalidConfig):
        SynthConfig(n_rows=10, positive_rate=1.5)
    with pytest.raises(InvalidConfig):
        SynthConfig(n_rows=10, typology_weights={1: 0.5, 2: 0.4})
    with pytest.raises(InvalidConfig):
        SynthConfig(n_rows=10, typology_weights={7: 1.0})
    with pytest.raises(InvalidConfig):
        SynthConfig(n_rows=10, class_separation=-1.0)
    with pytest.raises(InvalidConfig):
        SynthConfig(n_rows=10, missing_rate=1.0)


def test_synthetic_typology_mix_follows_weights() -> None:
    weights = {1: 0.5, 2: 0.5}
    ds = generate_synthetic(SynthConfig(n_rows=4000, typology_weights=weights, seed=1))
    from pafkit.dataset import summarize

    counts = summarize(ds)
    assert set(counts) == {1, 2}
    assert counts[1] == pytest.approx(2000, abs=150)


def test_synth_config_accepts_json_style_weight_keys() -> None:
    cfg = SynthConfig(n_rows=10, typology_weights={"1": 0.5, "99": 0.5})
    assert cfg.typology_weights == {1: 0.5, 99: 0.5}
    with pytest.raises(InvalidConfig):
        SynthConfig(n_rows=10, typology_weights={"plainly not a code": 1.0})


def test_generate_births_covers_departments_deterministically() -> None:
    a = generate_births(3)
    b = generate_births(3)
    assert a == b
    assert len(a) == 19
    assert all(v >= 0 for v in a.values())
