"""Render sweep CSVs into publication-style figures plus markdown tables.

The input is the fixed-schema CSV written by the ``drjadce sweep`` command:
one row per (sweep value, trial, algorithm).  Each figure preset aggregates a
metric per (algorithm, sweep value) by averaging over trials and draws one
line per algorithm.  The same aggregated numbers go into a markdown sidecar,
which makes reports diffable in CI without image comparison.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

REQUIRED_COLUMNS = [
    "experiment", "sweep_param", "sweep_value", "trial", "seed", "algo",
    "N", "M", "L", "K_true", "eps", "p_dbm", "rank_true", "rank_est",
    "aer", "missed", "false_alarms", "nmse_db", "f_final", "grad_norm",
    "outer_iters", "runtime_ms", "status",
]

ALGO_LABELS = {
    "dr_jadce": "DR-JADCE",
    "l21": "group-sparse LS",
    "somp": "SOMP",
    "oracle_mmse": "oracle MMSE",
    "rank_cm": "covariance criterion",
}

ALGO_STYLES = {
    "dr_jadce": dict(marker="o", color="tab:red"),
    "l21": dict(marker="s", color="tab:blue"),
    "somp": dict(marker="^", color="tab:green"),
    "oracle_mmse": dict(marker="d", color="tab:gray"),
    "rank_cm": dict(marker="o", color="tab:red"),
}

# kind -> (metric column or derived name, y label, log-scale y)
FIGURE_KINDS = {
    "fig3_rank": ("rank_success", "exact rank recovery rate", False),
    "fig5_aer_vs_L": ("aer", "activity error rate", True),
    "fig6_aer_vs_M": ("aer", "activity error rate", True),
    "fig7_aer_vs_p": ("aer", "activity error rate", True),
    "fig8_aer_vs_N": ("aer", "activity error rate", True),
    "fig9_nmse_vs_L": ("nmse_db", "NMSE (dB)", False),
    "nmse_vs_eps": ("nmse_db", "NMSE (dB)", False),
}

X_LABELS = {
    "pilot_len": "pilot length L",
    "n_antennas": "antennas M",
    "power_dbm": "pilot transmit power (dBm)",
    "activity_prob": "activity probability",
    "n_devices": "total devices N",
    "rank_override": "rank override",
}


class SchemaError(ValueError):
    """The CSV does not carry the expected sweep schema."""


class EmptyDataError(ValueError):
    """The CSV has no data rows to aggregate."""


@dataclass
class FigureSpec:
    csv_path: str
    figure_kind: str
    output_path: str
    group_by: str = "algo"
    x_column: str = "sweep_value"
    y_column: str = ""              # derived from the kind when empty
    aggregation: str = "mean"

    def __post_init__(self):
        if self.figure_kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.figure_kind!r}")
        if not self.y_column:
            self.y_column = FIGURE_KINDS[self.figure_kind][0]


def load_rows(csv_path: str) -> list[dict]:
    """Read the sweep CSV, checking the schema columns are present."""
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in REQUIRED_COLUMNS:
            if col not in header:
                raise SchemaError(f"missing column {col!r} in {csv_path}")
        rows = list(reader)
    if not rows:
        raise EmptyDataError(f"no data rows in {csv_path}")
    return rows


def _metric_value(row: dict, y_column: str):
    if y_column == "rank_success":
        if row["rank_est"] == "" or row["rank_true"] == "":
            return None
        return 1.0 if float(row["rank_est"]) == float(row["rank_true"]) else 0.0
    raw = row.get(y_column, "")
    if raw == "":
        return None
    return float(raw)


def aggregate(rows: list[dict], spec: FigureSpec) -> dict[str, list[tuple[float, float]]]:
    """Mean metric per (group, x); skips rows without the metric value."""
    buckets: dict[str, dict[float, list[float]]] = {}
    for row in rows:
        val = _metric_value(row, spec.y_column)
        if val is None or math.isnan(val):
            continue
        group = row[spec.group_by]
        x = float(row[spec.x_column])
        buckets.setdefault(group, {}).setdefault(x, []).append(val)
    series = {}
    for group, by_x in buckets.items():
        pts = sorted((x, sum(vals) / len(vals)) for x, vals in by_x.items())
        series[group] = pts
    if not series:
        raise EmptyDataError("no usable metric values after filtering")
    return series


def _markdown_table(series: dict, spec: FigureSpec) -> str:
    groups = sorted(series)
    xs = sorted({x for pts in series.values() for x, _ in pts})
    lookup = {g: dict(pts) for g, pts in series.items()}
    lines = [
        f"# {spec.figure_kind}",
        "",
        f"mean `{spec.y_column}` per (`{spec.group_by}`, `{spec.x_column}`),"
        f" source `{os.path.basename(spec.csv_path)}`",
        "",
        "| " + spec.x_column + " | " + " | ".join(groups) + " |",
        "|" + "---|" * (len(groups) + 1),
    ]
    for x in xs:
        cells = []
        for g in groups:
            v = lookup[g].get(x)
            cells.append(format(v, ".10g") if v is not None else "")
        lines.append("| " + format(x, ".10g") + " | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def render(spec: FigureSpec) -> dict[str, str]:
    """Write PNG, SVG and markdown for one figure; returns the file paths.

    Nothing is written when the CSV is empty or misses schema columns.
    """
    rows = load_rows(spec.csv_path)
    series = aggregate(rows, spec)
    _, y_label, log_y = FIGURE_KINDS[spec.figure_kind]
    sweep_param = rows[0]["sweep_param"]

    os.makedirs(spec.output_path, exist_ok=True)
    base = os.path.join(spec.output_path, spec.figure_kind)

    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for group in sorted(series):
        pts = series[group]
        style = ALGO_STYLES.get(group, dict(marker="x"))
        ax.plot([x for x, _ in pts], [y for _, y in pts],
                label=ALGO_LABELS.get(group, group), markersize=4.5, **style)
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel(X_LABELS.get(sweep_param, sweep_param))
    ax.set_ylabel(y_label)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    paths = {}
    for ext in ("png", "svg"):
        paths[ext] = f"{base}.{ext}"
        fig.savefig(paths[ext], dpi=150)
    plt.close(fig)

    paths["md"] = f"{base}.md"
    with open(paths["md"], "w") as fh:
        fh.write(_markdown_table(series, spec))
    return paths
