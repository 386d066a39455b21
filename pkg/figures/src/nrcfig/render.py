"""Pure CSV-to-figure rendering. No simulation logic lives here."""

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .specs import FigureSpec

_MARKERS = ("o", "s", "^", "v", "D", "x", "*", "P", "<", ">")


def read_series(spec: FigureSpec) -> dict:
    """Parse the CSV into {(series key, metric): (x array, y array)}.

    Series are keyed by the spec's grouping columns (scheme, precoder).
    Blank metric cells (a metric the scheme does not report) are skipped;
    a metric column missing from the header is a hard error.
    """
    with open(spec.csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in (spec.x_column, *spec.metrics, *spec.series_columns):
            if col not in header:
                raise ValueError(
                    f"CSV {spec.csv_path!r} is missing required column "
                    f"{col!r}")
        rows = list(reader)
    if not rows:
        raise ValueError(f"CSV {spec.csv_path!r} contains no data rows")

    series = {}
    for row in rows:
        key = tuple(row[c] for c in spec.series_columns)
        x = float(row[spec.x_column])
        for metric in spec.metrics:
            cell = row[metric]
            if cell == "":
                continue
            series.setdefault((key, metric), []).append((x, float(cell)))
    if not series:
        raise ValueError(
            f"CSV {spec.csv_path!r} has no values for metrics {spec.metrics}")
    return {k: sorted(v) for k, v in sorted(series.items())}


def _line_label(key, metric, spec):
    label = " ".join(part for part in key if part)
    if len(spec.metrics) > 1:
        suffix = {"mse_B": "BS", "mse_A": "UE"}.get(metric, metric)
        label = f"{label} ({suffix})" if label else suffix
    return label


def build_figure(spec: FigureSpec):
    """Assemble the matplotlib Figure for a spec without writing a file."""
    series = read_series(spec)
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    for i, ((key, metric), pts) in enumerate(series.items()):
        xs, ys = zip(*pts)
        ax.plot(xs, ys, marker=_MARKERS[i % len(_MARKERS)],
                label=_line_label(key, metric, spec))
    if spec.log_y:
        ax.set_yscale("log")
    ax.set_xlabel(spec.x_label)
    ax.set_ylabel(spec.y_label)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> str:
    """Render the figure to spec.out_path and return that path.

    Output is a pure, deterministic function of the input CSV: identical
    CSVs produce byte-identical images. On any input error no file is
    written.
    """
    fig = build_figure(spec)
    try:
        fmt = os.path.splitext(spec.out_path)[1].lstrip(".") or "png"
        tmp = spec.out_path + ".tmp"
        fig.savefig(tmp, format=fmt, dpi=150,
                    metadata={"Software": "nrcfig"})
        os.replace(tmp, spec.out_path)
    finally:
        plt.close(fig)
    return spec.out_path
