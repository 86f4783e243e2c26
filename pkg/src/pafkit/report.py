"""Rendering of results: Spanish-header tables and ROC figures.

The table renderers never recompute metrics; they format rows that were
already written by the experiment harness.
"""

import re

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .errors import SchemaMismatch
from .evaluation import MetricsRow, RocCurve, auc, read_metrics_csv

TABLE_HEADERS = ("Algoritmo", "Ajustes", "Umbral", "Precisión", "Recall", "F1-score", "Accuracy")

_METRICS_FILE = re.compile(r"metrics_(?P<segment>[A-Za-z0-9_\-]+)\.csv$")


def segment_of_path(path) -> str:
    """Segment label for a metrics file: ``metrics_<segment>.csv`` maps to
    ``<segment>``; anything else falls back to the file stem."""
    name = str(path).replace("\\", "/").rsplit("/", 1)[-1]
    match = _METRICS_FILE.fullmatch(name)
    if match:
        return match.group("segment")
    return name.rsplit(".", 1)[0]


def load_report_rows(paths) -> list[tuple[str, MetricsRow]]:
    """Merge metrics CSVs into (segment, row) pairs with a stable ordering
    by (segment, algorithm); rows of one algorithm keep their file order."""
    tagged: list[tuple[str, MetricsRow]] = []
    for path in paths:
        segment = segment_of_path(path)
        for row in read_metrics_csv(path):
            tagged.append((segment, row))
    return sorted(tagged, key=lambda pair: (pair[0], pair[1].algorithm))


def _cells(row: MetricsRow) -> list[str]:
    return [
        row.algorithm,
        row.adjustments,
        f"{row.threshold:.2f}",
        f"{row.precision:.4f}",
        f"{row.recall:.4f}",
        f"{row.f1:.4f}",
        f"{row.accuracy:.4f}",
    ]


def _render_text(groups: list[tuple[str, list[MetricsRow]]]) -> str:
    lines: list[str] = []
    for segment, rows in groups:
        table = [list(TABLE_HEADERS)] + [_cells(r) for r in rows]
        widths = [max(len(line[i]) for line in table) for i in range(len(TABLE_HEADERS))]
        lines.append(f"Segmento: {segment}")
        for k, line in enumerate(table):
            padded = [
                cell.ljust(widths[i]) if i < 2 else cell.rjust(widths[i])
                for i, cell in enumerate(line)
            ]
            lines.append("  ".join(padded).rstrip())
            if k == 0:
                lines.append("  ".join("-" * w for w in widths))
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def _render_markdown(groups: list[tuple[str, list[MetricsRow]]]) -> str:
    lines: list[str] = []
    for segment, rows in groups:
        lines.append(f"### {segment}")
        lines.append("")
        lines.append("| " + " | ".join(TABLE_HEADERS) + " |")
        lines.append("|" + "|".join("---" for _ in TABLE_HEADERS) + "|")
        for row in rows:
            lines.append("| " + " | ".join(_cells(row)) + " |")
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def render_table(groups: list[tuple[str, list[MetricsRow]]], markdown: bool = False) -> str:
    """Format (segment, rows) groups as a table whose columns are exactly
    Algoritmo, Ajustes, Umbral, Precisión, Recall, F1-score, Accuracy."""
    return _render_markdown(groups) if markdown else _render_text(groups)


def merge_report(paths, markdown: bool = False) -> str:
    """Render one table per segment from already-written metrics CSVs."""
    tagged = load_report_rows(paths)
    groups: list[tuple[str, list[MetricsRow]]] = []
    for segment, row in tagged:
        if not groups or groups[-1][0] != segment:
            groups.append((segment, []))
        groups[-1][1].append(row)
    return render_table(groups, markdown=markdown)


def save_roc_figure(curves: list[tuple[str, RocCurve]], path, title: str = "Curvas ROC") -> None:
    """Plot ROC polylines (one per labelled curve) to a PNG or SVG file.

    Output bytes are deterministic: volatile metadata (creation date,
    toolkit version) is stripped and SVG element ids use a fixed salt.
    """
    if not curves:
        raise SchemaMismatch("no ROC curves to plot")
    fmt = str(path).rsplit(".", 1)[-1].lower()
    with plt.rc_context({"svg.hashsalt": "pafkit"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.8))
        try:
            for label, curve in curves:
                fpr = [p[0] for p in curve.points]
                tpr = [p[1] for p in curve.points]
                ax.plot(fpr, tpr, label=f"{label} (AUC={auc(curve):.3f})")
            ax.plot([0, 1], [0, 1], linestyle="--", color="grey", linewidth=1)
            ax.set_xlabel("FPR")
            ax.set_ylabel("TPR")
            ax.set_title(title)
            ax.legend(loc="lower right", fontsize=8)
            metadata = {"Date": None} if fmt == "svg" else {"Software": None}
            fig.savefig(path, metadata=metadata)
        finally:
            plt.close(fig)
