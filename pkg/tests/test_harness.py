"""Scenario orchestration, metrics, presets, CSV emission, and the CLI."""

import json
import math

import numpy as np
import pytest

from nrcsim import cli
from nrcsim.harness import (CSV_COLUMNS, PRESETS, ConfigError, MetricsRecord,
                            ScenarioConfig, normalized_mse, records_to_csv,
                            records_to_json, run_scenario, run_sweep,
                            spectral_efficiency)


def small_config(**over):
    base = dict(N=9, K=2, tau_u=2, tau_d=2, T=30, C_sc=2, iters=2,
                trials=2, blocks_per_trial=2, alpha_mc=50, seed=123,
                scheme="nrc-aware-proposed", precoder="ZF")
    base.update(over)
    return ScenarioConfig(**base)


# --- metrics -------------------------------------------------------------

def test_normalized_mse_examples():
    b = np.eye(2, dtype=complex)
    assert normalized_mse(b, b, "BS") == 0.0
    assert normalized_mse(b, np.zeros((2, 2)), "BS") == pytest.approx(1.0)
    perturbed = b.copy()
    perturbed[0, 0] += 0.1
    assert normalized_mse(b, perturbed, "BS") == pytest.approx(0.005)


def test_normalized_mse_ue_side_compares_diagonals():
    a_true = np.diag([1.0 + 0j, 2.0])
    a_est = np.diag([1.0 + 0j, 2.0]) + np.array([[0, 5.0], [5.0, 0]])
    assert normalized_mse(a_true, a_est, "UE") == 0.0


def test_normalized_mse_errors():
    with pytest.raises(ValueError):
        normalized_mse(np.zeros((2, 2)), np.eye(2), "BS")
    with pytest.raises(ValueError):
        normalized_mse(np.eye(2), np.eye(3), "BS")
    with pytest.raises(ValueError):
        normalized_mse(np.eye(2), np.eye(2), "bs-side")


def test_spectral_efficiency_arithmetic():
    cfg = ScenarioConfig(scheme="nrc-aware-proposed", tau_u=20, tau_d=0)
    assert spectral_efficiency(cfg, 4.0) == pytest.approx(20 * 0.92 * 4)
    cfg2 = ScenarioConfig(scheme="argos", tau_u=20, tau_d=20)
    assert spectral_efficiency(cfg2, 4.0) == pytest.approx(20 * 0.84 * 4)
    assert spectral_efficiency(cfg, 0.0) == 0.0


def test_spectral_efficiency_rejects_overlong_pilots():
    cfg = small_config(scheme="argos")
    cfg.tau_d = 28  # mutate past validation: overhead now equals T
    with pytest.raises(ValueError):
        spectral_efficiency(cfg, 1.0)


# --- configuration -------------------------------------------------------

def test_config_rejects_unknown_scheme_and_precoder():
    with pytest.raises(ConfigError):
        small_config(scheme="genie")
    with pytest.raises(ConfigError):
        small_config(precoder="zf")


def test_config_rejects_bad_budgets():
    with pytest.raises(ConfigError):
        small_config(tau_u=1)           # tau_u < K
    with pytest.raises(ConfigError):
        small_config(T=4, scheme="argos")  # coherence interval too short
    with pytest.raises(ConfigError):
        small_config(K=12)              # K > N
    with pytest.raises(ConfigError):
        small_config(iters=0)


def test_config_in_band_pilot_budget_only_when_charged():
    # out-of-band calibration (default) permits T < 2N + K
    cfg = small_config(T=19)   # 2N + K = 20 for this geometry
    assert cfg.T == 19
    with pytest.raises(ConfigError):
        small_config(T=19, charge_nrc_overhead=True)


def test_config_from_dict_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict({"N": 9, "bogus_knob": 1})


def test_baselines_pay_downlink_pilot_overhead():
    assert small_config(scheme="argos").effective_tau_d == 2
    assert small_config(scheme="nrc-aware-proposed").effective_tau_d == 0
    assert small_config(scheme="reciprocal-ideal").effective_tau_d == 0


# --- scenario runs -------------------------------------------------------

def test_run_scenario_bookkeeping_identity():
    rec = run_scenario(small_config(scheme="reciprocal-ideal"))
    cfg = small_config(scheme="reciprocal-ideal")
    expected = cfg.K * (1 - cfg.tau_u / cfg.T) * rec.mean_log_term
    assert rec.spectral_efficiency == pytest.approx(expected, abs=1e-12)
    assert rec.trials == 2
    assert math.isnan(rec.mse_B)


def test_run_scenario_deterministic_and_parallel_equal():
    cfg = small_config()
    serial = run_scenario(cfg, workers=1)
    again = run_scenario(cfg, workers=1)
    parallel = run_scenario(cfg, workers=2)
    assert serial == again
    assert serial == parallel


def test_run_scenario_proposed_reports_both_mses():
    rec = run_scenario(small_config())
    assert rec.mse_B > 0
    assert rec.mse_A > 0


def test_run_scenario_perfect_scheme_zero_mse():
    rec = run_scenario(small_config(scheme="nrc-aware-perfect"))
    assert rec.mse_B == 0.0
    assert rec.mse_A == 0.0


def test_run_scenario_baseline_scheme():
    rec = run_scenario(small_config(scheme="argos"))
    assert rec.mse_B > 0
    assert math.isnan(rec.mse_A)


def test_run_sweep_k_adjusts_pilot_budgets():
    cfg = small_config()
    recs = run_sweep(cfg, "K", [2, 3], skip_link=True)
    assert [r.param_value for r in recs] == [2.0, 3.0]
    assert all(r.param_name == "K" for r in recs)


def test_run_sweep_rejects_empty_values_and_unknown_param():
    cfg = small_config()
    with pytest.raises(ConfigError):
        run_sweep(cfg, "rho_d", [])
    with pytest.raises(ConfigError):
        run_sweep(cfg, "carrier", [1.0])


def test_run_sweep_series_labels_override_scheme_column():
    cfg = small_config()
    recs = run_sweep(cfg, "D", [0.0], skip_link=True,
                     series=[{"D": 0.0, "label": "proposed-D0"}])
    assert recs[0].scheme == "proposed-D0"


# --- serialization -------------------------------------------------------

def _fake_records():
    return [MetricsRecord(scheme="argos", precoder="ZF", param_name="rho_d",
                          param_value=10.0, spectral_efficiency=50.0,
                          mse_B=1e-3, mse_A=math.nan, mean_log_term=3.0,
                          trials=4, ci_halfwidth=0.1)]


def test_csv_columns_and_nan_blanks():
    text = records_to_csv(_fake_records())
    lines = text.strip().split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    fields = lines[1].split(",")
    assert fields[0] == "argos"
    assert fields[CSV_COLUMNS.index("mse_A")] == ""


def test_csv_byte_identical_on_repeat_runs():
    cfg = small_config()
    a = records_to_csv(run_sweep(cfg, "D", [0.0, 1.0], skip_link=True))
    b = records_to_csv(run_sweep(cfg, "D", [0.0, 1.0], skip_link=True))
    assert a == b


def test_json_round_trips_nan_as_null():
    rows = json.loads(records_to_json(_fake_records()))
    assert rows[0]["mse_A"] is None
    assert rows[0]["spectral_efficiency"] == 50.0


def test_all_figure_presets_registered():
    assert set(PRESETS) == {"fig2", "fig5", "fig6", "fig7", "fig8", "fig9"}


# --- CLI -----------------------------------------------------------------

def _write_config(tmp_path, **over):
    data = dict(N=9, K=2, tau_u=2, tau_d=2, T=30, C_sc=2, iters=2,
                trials=2, blocks_per_trial=2, alpha_mc=50, seed=123,
                scheme="nrc-aware-proposed", precoder="ZF")
    data.update(over)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_cli_simulate_writes_csv(tmp_path):
    out = tmp_path / "out.csv"
    code = cli.main(["simulate", "--config", _write_config(tmp_path),
                     "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 2


def test_cli_simulate_json_format(tmp_path):
    out = tmp_path / "out.json"
    code = cli.main(["simulate", "--config", _write_config(tmp_path),
                     "--format", "json", "--out", str(out)])
    assert code == 0
    rows = json.loads(out.read_text())
    assert rows[0]["scheme"] == "nrc-aware-proposed"


def test_cli_sweep_param(tmp_path):
    out = tmp_path / "sweep.csv"
    code = cli.main(["sweep", "--config", _write_config(tmp_path),
                     "--param", "D", "--values", "0,1", "--out", str(out)])
    assert code == 0
    assert len(out.read_text().strip().split("\n")) == 3


def test_cli_seed_override_changes_results(tmp_path):
    cfgp = _write_config(tmp_path)
    outs = []
    for seed in ("1", "2"):
        out = tmp_path / f"o{seed}.csv"
        assert cli.main(["simulate", "--config", cfgp, "--seed", seed,
                         "--out", str(out)]) == 0
        outs.append(out.read_text())
    assert outs[0] != outs[1]


def test_cli_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"scheme": "genie"}))
    assert cli.main(["simulate", "--config", str(bad)]) == cli.EXIT_CONFIG


def test_cli_invalid_json_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["simulate", "--config", str(bad)]) == cli.EXIT_CONFIG


def test_cli_missing_file_exit_code(tmp_path):
    missing = str(tmp_path / "nope.json")
    assert cli.main(["simulate", "--config", missing]) == cli.EXIT_CONFIG


def test_cli_sweep_param_requires_values(tmp_path):
    assert cli.main(["sweep", "--config", _write_config(tmp_path),
                     "--param", "D"]) == cli.EXIT_CONFIG


def test_cli_numerical_failure_exit_code(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise np.linalg.LinAlgError("synthetic singular system")
    monkeypatch.setattr(cli, "run_scenario", boom)
    assert cli.main(["simulate", "--config",
                     _write_config(tmp_path)]) == cli.EXIT_NUMERICAL
