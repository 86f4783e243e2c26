"""Command-line entry points.

Subcommands::

    pafkit synth --config recipe.json [--out DIR] [--seed N]
    pafkit experiment --config experiment.json [--out DIR] [--seed N]
    pafkit report METRICS_CSV [...] [--markdown] [--out FILE]
    pafkit sweep SCORES_CSV [--grid 0.3,0.5,0.7] [--objective ...] [--out DIR]
    pafkit roc SCORES_CSV [--svg] [--out DIR]

Exit codes: 0 success, 2 config error, 3 data error, 4 all models failed.
"""

import argparse
import json
import sys
from pathlib import Path

from . import report as report_mod
from .errors import (
    AllModelsFailed,
    InvalidConfig,
    PafkitError,
)
from .evaluation import (
    OBJECTIVES,
    auc,
    read_scores_csv,
    roc_curve,
    sweep_thresholds,
    write_metrics_csv,
    write_roc_csv,
)
from .experiment import (
    DEFAULT_THRESHOLD_GRID,
    ExperimentConfig,
    run_experiment,
    run_synth,
)


def _load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{path} is not valid JSON: {exc}") from exc


def cmd_synth(args) -> int:
    doc = _load_config(args.config)
    out_dir = args.out or doc.get("out", ".")
    written = run_synth(doc, out_dir, seed_override=args.seed)
    counts = written.pop("typology_counts")
    for label, path in written.items():
        print(f"{label}: {path}")
    print("typology counts: " + ", ".join(f"{k}={v}" for k, v in counts.items()))
    return 0


def cmd_experiment(args) -> int:
    doc = _load_config(args.config)
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.out is not None:
        doc["out"] = args.out
    cfg = ExperimentConfig.from_dict(doc, base_dir=Path(args.config).parent)
    manifest = run_experiment(cfg)
    for name, result in manifest.results.items():
        print(
            f"{name}: AUC={result['auc']:.4f} best_threshold={result['best_threshold']:.2f} "
            f"best_F1={result['best_f1']:.4f}"
        )
    for failure in manifest.failures:
        print(
            f"FAILED {failure['model']} at {failure['step']}: {failure['error']}",
            file=sys.stderr,
        )
    table_path = Path(cfg.out_dir) / manifest.outputs.get("table", "")
    if manifest.outputs.get("table") and table_path.exists():
        print()
        print(table_path.read_text(encoding="utf-8"), end="")
    print(f"\nmanifest: {Path(cfg.out_dir) / 'manifest.json'}")
    return 0


def cmd_report(args) -> int:
    text = report_mod.merge_report(args.metrics, markdown=args.markdown)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def _parse_grid(raw: str) -> list[float]:
    try:
        return [float(part) for part in raw.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise InvalidConfig(f"bad threshold grid {raw!r}: {exc}") from exc


def cmd_sweep(args) -> int:
    y, scores = read_scores_csv(args.scores)
    grid = _parse_grid(args.grid) if args.grid else list(DEFAULT_THRESHOLD_GRID)
    result = sweep_thresholds(
        y,
        scores,
        grid,
        objective=args.objective,
        precision_floor=args.precision_floor,
        algorithm=args.algorithm,
        adjustments=args.adjustments,
    )
    best = next(r for r in result.rows if r.threshold == result.best_threshold)
    print(
        f"best threshold {best.threshold:.2f}: precision={best.precision:.4f} "
        f"recall={best.recall:.4f} f1={best.f1:.4f} accuracy={best.accuracy:.4f}"
        + ("" if result.floor_met else "  (precision floor not met)")
    )
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "sweep.csv"
        write_metrics_csv(result.rows + [best], path)
        print(f"wrote {path}")
    return 0


def cmd_roc(args) -> int:
    y, scores = read_scores_csv(args.scores)
    curve = roc_curve(y, scores)
    print(f"AUC={auc(curve):.6f} over {len(curve.points)} ROC points")
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.scores).stem
    csv_path = out / f"roc_{stem}.csv"
    write_roc_csv(curve, csv_path)
    print(f"wrote {csv_path}")
    if args.svg:
        svg_path = out / f"roc_{stem}.svg"
        report_mod.save_roc_figure([(stem, curve)], svg_path)
        print(f"wrote {svg_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pafkit",
        description="Tabular binary-classification experiments for program-intake data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate a synthetic corpus (CSV + schema + births)")
    synth.add_argument("--config", required=True, help="JSON file with a 'synth' recipe")
    synth.add_argument("--out", help="output directory (overrides the config)")
    synth.add_argument("--seed", type=int, help="override the recipe seed")
    synth.set_defaults(func=cmd_synth)

    experiment = sub.add_parser("experiment", help="run a configured model matrix end to end")
    experiment.add_argument("--config", required=True, help="experiment JSON document")
    experiment.add_argument("--out", help="output directory (overrides the config)")
    experiment.add_argument("--seed", type=int, help="override the master seed")
    experiment.set_defaults(func=cmd_experiment)

    report = sub.add_parser("report", help="merge metrics CSVs into one table")
    report.add_argument("metrics", nargs="+", help="metrics CSV files")
    report.add_argument("--markdown", action="store_true", help="emit a markdown table")
    report.add_argument("--out", help="write the table to this file instead of stdout")
    report.set_defaults(func=cmd_report)

    sweep = sub.add_parser("sweep", help="threshold sweep over a scores CSV")
    sweep.add_argument("scores", help="CSV with header 'label,score'")
    sweep.add_argument("--grid", help="comma-separated thresholds (default 0.05..0.95)")
    sweep.add_argument("--objective", choices=OBJECTIVES, default="max_f1")
    sweep.add_argument("--precision-floor", type=float, dest="precision_floor")
    sweep.add_argument("--algorithm", default="", help="label for the output rows")
    sweep.add_argument("--adjustments", default="", help="label for the output rows")
    sweep.add_argument("--out", help="directory for sweep.csv (prints only when omitted)")
    sweep.set_defaults(func=cmd_sweep)

    roc = sub.add_parser("roc", help="ROC curve and AUC from a scores CSV")
    roc.add_argument("scores", help="CSV with header 'label,score'")
    roc.add_argument("--svg", action="store_true", help="also render an SVG figure")
    roc.add_argument("--out", help="output directory (default .)")
    roc.set_defaults(func=cmd_roc)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidConfig as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except AllModelsFailed as exc:
        print(f"model failure: {exc}", file=sys.stderr)
        return 4
    except (PafkitError, OSError) as exc:
        print(f"data error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
