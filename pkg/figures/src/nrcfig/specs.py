"""Figure presets: axis mappings onto the simulation harness CSV schema.

Each preset names the sweep parameter plotted on x, the metric columns
plotted on y, and the axis scales. Rows are grouped into series by their
(scheme, precoder) columns; a preset with several metric columns emits one
line per (series, metric) pair.
"""

from dataclasses import dataclass, field

# Fixed column order emitted by the simulation harness CSV writer.
CSV_COLUMNS = ("scheme", "precoder", "param_name", "param_value",
               "spectral_efficiency", "mse_B", "mse_A", "mean_log_term",
               "trials", "ci_halfwidth")

METRIC_LABELS = {
    "spectral_efficiency": "sum spectral efficiency (bits/s/Hz)",
    "mse_B": "BS-side normalized MSE",
    "mse_A": "UE-side normalized MSE",
}


@dataclass(frozen=True)
class FigureSpec:
    """Declarative mapping from one harness CSV to one rendered figure."""

    preset: str
    csv_path: str
    out_path: str
    x_label: str
    metrics: tuple = ("spectral_efficiency",)
    y_label: str = "sum spectral efficiency (bits/s/Hz)"
    log_y: bool = False
    title: str = ""
    x_column: str = "param_value"
    series_columns: tuple = ("scheme", "precoder")


_PRESET_AXES = {
    "fig2": dict(x_label="downlink SNR (dB)",
                 title="Spectral efficiency vs downlink SNR"),
    "fig5": dict(x_label="coupling-mismatch variance (dB)",
                 metrics=("mse_B",), y_label="normalized MSE", log_y=True,
                 title="Estimation MSE vs coupling-mismatch variance"),
    "fig6": dict(x_label="estimation iteration",
                 metrics=("mse_B", "mse_A"), y_label="normalized MSE",
                 log_y=True, title="Estimation MSE vs iteration count"),
    "fig7": dict(x_label="number of UEs",
                 title="Spectral efficiency vs number of UEs"),
    "fig8": dict(x_label="coupling-mismatch variance (dB)",
                 title="Spectral efficiency vs coupling-mismatch variance"),
    "fig9": dict(x_label="downlink SNR (dB)",
                 title="Spectral efficiency vs downlink SNR with baselines"),
}

PRESET_NAMES = tuple(sorted(_PRESET_AXES))


def make_spec(preset: str, csv_path: str, out_path: str) -> FigureSpec:
    """Build the FigureSpec for a named preset."""
    try:
        axes = _PRESET_AXES[preset]
    except KeyError:
        raise ValueError(
            f"unknown preset {preset!r}; expected one of {PRESET_NAMES}")
    return FigureSpec(preset=preset, csv_path=csv_path, out_path=out_path,
                      **axes)
