import json

import pytest

from pafkit.cli import main
from pafkit.dataset import Schema, load_csv
from pafkit.errors import SchemaMismatch
from pafkit.evaluation import (
    MetricsRow,
    read_metrics_csv,
    read_roc_csv,
    write_metrics_csv,
    write_scores_csv,
)
from pafkit.report import TABLE_HEADERS, merge_report, segment_of_path


def write_config(path, doc) -> str:
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def experiment_doc(out_dir: str, models=None) -> dict:
    return {
        "seed": 3,
        "segment": "bd2",
        "out": out_dir,
        "data": {"synth": {"n_rows": 700, "class_separation": 2.0, "seed": 4}},
        "thresholds": {"grid": [0.3, 0.5, 0.7]},
        "models": models
        or [
            {"name": "logreg", "kind": "logreg", "config": {"epochs": 120}},
            {"name": "tree", "kind": "tree", "config": {"max_depth": 4}},
        ],
    }


# --- synth ------------------------------------------------------------------


def test_synth_writes_loadable_corpus(tmp_path, capsys) -> None:
    cfg = write_config(tmp_path / "synth.json", {"synth": {"n_rows": 300, "seed": 5}})
    assert main(["synth", "--config", cfg, "--out", str(tmp_path / "corpus")]) == 0
    out = capsys.readouterr().out
    assert "typology counts" in out
    schema = Schema.load(tmp_path / "corpus" / "schema.json")
    ds = load_csv(tmp_path / "corpus" / "data.csv", schema)
    assert ds.n_rows == 300


def test_synth_determinism_and_seed_override(tmp_path) -> None:
    cfg = write_config(tmp_path / "synth.json", {"synth": {"n_rows": 200, "seed": 5}})
    main(["synth", "--config", cfg, "--out", str(tmp_path / "a")])
    main(["synth", "--config", cfg, "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "data.csv").read_bytes() == (tmp_path / "b" / "data.csv").read_bytes()
    main(["synth", "--config", cfg, "--out", str(tmp_path / "c"), "--seed", "9"])
    assert (tmp_path / "a" / "data.csv").read_bytes() != (tmp_path / "c" / "data.csv").read_bytes()


# --- experiment ---------------------------------------------------------------


def test_experiment_six_model_matrix_best_rows(tmp_path, capsys) -> None:
    models = [
        {"name": "logreg", "kind": "logreg", "config": {"epochs": 80}},
        {"name": "tree", "kind": "tree", "config": {"max_depth": 3}},
        {"name": "forest", "kind": "forest", "config": {"n_trees": 3}},
        {"name": "gbt", "kind": "gbt", "config": {"n_rounds": 5}},
        {"name": "adaboost", "kind": "adaboost", "config": {"n_estimators": 5}},
        {
            "name": "voting",
            "kind": "voting",
            "config": {"members": [{"kind": "logreg"}, {"kind": "tree", "config": {"max_depth": 3}}]},
        },
    ]
    doc = experiment_doc(str(tmp_path / "run"), models=models)
    doc["segment"] = "bd1"
    cfg = write_config(tmp_path / "exp.json", doc)
    assert main(["experiment", "--config", cfg]) == 0
    rows = read_metrics_csv(tmp_path / "run" / "metrics_bd1.csv")
    # per model: one row per grid threshold plus a trailing "best" row
    assert len(rows) == 6 * (3 + 1)
    by_model = {}
    for row in rows:
        by_model.setdefault(row.algorithm, []).append(row)
    assert set(by_model) == {m["name"] for m in models}
    best_rows = [block[-1] for block in by_model.values()]
    assert len(best_rows) == 6
    out = capsys.readouterr().out
    assert "Algoritmo" in out and "Precisión" in out


def test_experiment_rerun_identical_metrics_bytes(tmp_path) -> None:
    cfg_a = write_config(tmp_path / "a.json", experiment_doc(str(tmp_path / "a")))
    cfg_b = write_config(tmp_path / "b.json", experiment_doc(str(tmp_path / "b")))
    assert main(["experiment", "--config", cfg_a]) == 0
    assert main(["experiment", "--config", cfg_b]) == 0
    assert (tmp_path / "a" / "metrics_bd2.csv").read_bytes() == (
        tmp_path / "b" / "metrics_bd2.csv"
    ).read_bytes()


def test_experiment_exit_codes(tmp_path, capsys) -> None:
    missing = str(tmp_path / "missing.json")
    assert main(["experiment", "--config", missing]) == 2

    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert main(["experiment", "--config", str(bad)]) == 2

    no_seed = experiment_doc(str(tmp_path / "r1"))
    del no_seed["seed"]
    assert main(["experiment", "--config", write_config(tmp_path / "c1.json", no_seed)]) == 2

    missing_data = experiment_doc(str(tmp_path / "r2"))
    missing_data["data"] = {"csv": "nope.csv", "schema": "nope.json"}
    assert main(["experiment", "--config", write_config(tmp_path / "c2.json", missing_data)]) == 3

    doomed = experiment_doc(
        str(tmp_path / "r3"),
        models=[{"name": "doomed", "kind": "rusboost", "config": {"target_ratio": 1e-6}}],
    )
    assert main(["experiment", "--config", write_config(tmp_path / "c3.json", doomed)]) == 4
    err = capsys.readouterr().err
    assert "model failure" in err


def test_experiment_seed_flag_overrides(tmp_path) -> None:
    doc = experiment_doc(str(tmp_path / "a"))
    cfg = write_config(tmp_path / "exp.json", doc)
    main(["experiment", "--config", cfg])
    main(["experiment", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "99"])
    assert (tmp_path / "a" / "metrics_bd2.csv").read_bytes() != (
        tmp_path / "b" / "metrics_bd2.csv"
    ).read_bytes()


# --- report -------------------------------------------------------------------


def sample_rows(algorithm: str) -> list[MetricsRow]:
    return [
        MetricsRow(algorithm, "SMOTE", 0.3, 0.7, 0.9, 0.7875, 0.8),
        MetricsRow(algorithm, "SMOTE", 0.5, 0.8, 0.7, 0.7467, 0.82),
    ]


def test_report_single_file(tmp_path, capsys) -> None:
    path = tmp_path / "metrics_bd1.csv"
    write_metrics_csv(sample_rows("gbt"), path)
    assert main(["report", str(path)]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0] == "Segmento: bd1"
    assert lines[1].split() == list(TABLE_HEADERS)
    assert out.count("gbt") == 2


def test_report_merges_and_orders_segments(tmp_path) -> None:
    write_metrics_csv(sample_rows("zeta"), tmp_path / "metrics_bd2.csv")
    write_metrics_csv(sample_rows("alpha"), tmp_path / "metrics_bd1.csv")
    text = merge_report([str(tmp_path / "metrics_bd2.csv"), str(tmp_path / "metrics_bd1.csv")])
    assert text.index("Segmento: bd1") < text.index("Segmento: bd2")
    assert text.index("alpha") < text.index("zeta")


def test_report_markdown_and_out_file(tmp_path, capsys) -> None:
    path = tmp_path / "metrics_bd2.csv"
    write_metrics_csv(sample_rows("mlp"), path)
    target = tmp_path / "table.md"
    assert main(["report", str(path), "--markdown", "--out", str(target)]) == 0
    text = target.read_text(encoding="utf-8")
    assert text.splitlines()[0] == "### bd2"
    assert "| " + " | ".join(TABLE_HEADERS) + " |" in text


def test_report_rejects_malformed_header(tmp_path) -> None:
    bad = tmp_path / "metrics_bd1.csv"
    bad.write_text("algorithm,threshold\nx,0.5\n", encoding="utf-8")
    with pytest.raises(SchemaMismatch):
        merge_report([str(bad)])
    assert main(["report", str(bad)]) == 3


def test_segment_of_path_parsing() -> None:
    assert segment_of_path("runs/metrics_bd1.csv") == "bd1"
    assert segment_of_path("metrics_bd2.csv") == "bd2"
    assert segment_of_path("odd_name.csv") == "odd_name"


# --- sweep and roc ---------------------------------------------------------------


def scores_file(tmp_path) -> str:
    path = tmp_path / "scores_model.csv"
    write_scores_csv([1, 0, 1, 0, 1, 0], [0.9, 0.2, 0.8, 0.6, 0.55, 0.1], path)
    return str(path)


def test_sweep_prints_best_and_writes_csv(tmp_path, capsys) -> None:
    path = scores_file(tmp_path)
    assert main(["sweep", path, "--grid", "0.3,0.5,0.7", "--out", str(tmp_path / "swp")]) == 0
    out = capsys.readouterr().out
    assert "best threshold" in out
    rows = read_metrics_csv(tmp_path / "swp" / "sweep.csv")
    assert len(rows) == 4  # 3 thresholds + best
    assert rows[-1].threshold in (0.3, 0.5, 0.7)


def test_sweep_objective_flag(tmp_path, capsys) -> None:
    # the top-scored row is a negative, so no threshold reaches precision 0.9
    path = tmp_path / "hard.csv"
    write_scores_csv([0, 1, 1], [0.95, 0.9, 0.8], path)
    code = main(
        [
            "sweep",
            str(path),
            "--grid",
            "0.3,0.7",
            "--objective",
            "max_recall_with_precision_floor",
            "--precision-floor",
            "0.9",
        ]
    )
    assert code == 0
    assert "floor not met" in capsys.readouterr().out


def test_sweep_error_codes(tmp_path) -> None:
    assert main(["sweep", str(tmp_path / "missing.csv")]) == 3
    path = scores_file(tmp_path)
    assert main(["sweep", path, "--grid", "abc"]) == 2


def test_roc_outputs_and_svg(tmp_path, capsys) -> None:
    path = scores_file(tmp_path)
    assert main(["roc", path, "--svg", "--out", str(tmp_path / "r1")]) == 0
    out = capsys.readouterr().out
    assert "AUC=" in out
    curve = read_roc_csv(tmp_path / "r1" / "roc_scores_model.csv")
    assert curve.points[0] == (0.0, 0.0, float("inf"))
    svg = (tmp_path / "r1" / "roc_scores_model.svg").read_bytes()
    assert b"<svg" in svg
    main(["roc", path, "--svg", "--out", str(tmp_path / "r2")])
    assert svg == (tmp_path / "r2" / "roc_scores_model.svg").read_bytes()


def test_cli_requires_subcommand() -> None:
    with pytest.raises(SystemExit):
        main([])
