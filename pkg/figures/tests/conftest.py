"""Shared fixtures: synthetic harness-schema CSV files for each preset."""

import csv
import math

import pytest

from nrcfig.specs import CSV_COLUMNS

_SCHEME_TRIPLE = ("reciprocal-ideal", "nrc-blind", "nrc-aware-perfect")
_BASELINE_TRIPLE = ("nrc-aware-proposed", "argos", "neighbor-ls")
_PRECODERS = ("MRT", "ZF")


def _row(scheme, precoder, param, value, se=math.nan, mse_b=math.nan,
         mse_a=math.nan, mlt=math.nan):
    def fmt(x):
        return "" if isinstance(x, float) and math.isnan(x) else repr(x)
    return [scheme, precoder, param, repr(float(value)), fmt(se), fmt(mse_b),
            fmt(mse_a), fmt(mlt), "4", "0.1"]


def _preset_rows(preset):
    rows = []
    if preset == "fig2":
        for s in _SCHEME_TRIPLE:
            for p in _PRECODERS:
                for v in (-10.0, 0.0, 10.0, 20.0):
                    rows.append(_row(s, p, "rho_d", v, se=50.0 + v, mlt=2.0))
    elif preset == "fig5":
        for d in ("proposed-D0", "proposed-D1", "proposed-Dsqrt2"):
            for v in range(-30, -9, 2):
                rows.append(_row(d, "ZF", "sigma_M2_db", v,
                                 mse_b=10.0 ** (v / 10.0), mse_a=1e-3))
    elif preset == "fig6":
        for it in range(1, 9):
            rows.append(_row("proposed-D1", "ZF", "iters", it,
                             mse_b=1e-2 / it, mse_a=1e-3 / it))
    elif preset == "fig7":
        for s in _BASELINE_TRIPLE:
            for p in _PRECODERS:
                for k in range(10, 71, 10):
                    mse_a = 1e-3 if s == "nrc-aware-proposed" else math.nan
                    rows.append(_row(s, p, "K", k, se=2.0 * k,
                                     mse_b=1e-3, mse_a=mse_a))
    elif preset in ("fig8", "fig9"):
        param = "sigma_M2_db" if preset == "fig8" else "rho_d"
        values = range(-30, -9, 2) if preset == "fig8" \
            else (-10, -5, 0, 5, 10, 15, 20)
        for s in _BASELINE_TRIPLE:
            for p in _PRECODERS:
                for v in values:
                    rows.append(_row(s, p, param, v, se=100.0 + v))
    else:
        raise ValueError(preset)
    return rows


@pytest.fixture
def preset_csv(tmp_path):
    """Factory writing a synthetic harness CSV for a preset; returns path."""

    def make(preset, drop_column=None, empty=False):
        path = tmp_path / f"{preset}.csv"
        columns = [c for c in CSV_COLUMNS if c != drop_column]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            if not empty:
                for row in _preset_rows(preset):
                    keep = [x for c, x in zip(CSV_COLUMNS, row)
                            if c != drop_column]
                    writer.writerow(keep)
        return str(path)

    return make
