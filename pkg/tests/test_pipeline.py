import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reaugment.errors import ConfigError, StageError, UndefinedMetricError
from reaugment.forecaster import EvalReport
from reaugment.pipeline import (
    RunConfig,
    RunManifest,
    ablation_anchor_fraction,
    ablation_rl,
    f_metric,
    promotion,
    read_metrics_csv,
    report,
    run_pipeline,
)
from smallcfg import small_config


def _r(mae, mse):
    return EvalReport(mae, mse, 1)


def test_f_metric_etth1():
    fm = f_metric(_r(0.434, 0.411), _r(0.422, 0.403), _r(0.405, 0.387))
    assert 100 * fm.f_mse == pytest.approx(33.3, abs=0.5)
    assert 100 * fm.f_mae == pytest.approx(41.4, abs=0.5)


def test_f_metric_endpoints():
    few, std = _r(0.5, 0.4), _r(0.3, 0.2)
    assert f_metric(few, few, std).f_mae == 0.0
    assert f_metric(few, std, std).f_mse == pytest.approx(1.0)
    assert f_metric(few, _r(0.6, 0.5), std).f_mae < 0


def test_f_metric_undefined():
    with pytest.raises(UndefinedMetricError):
        f_metric(_r(0.5, 0.4), _r(0.4, 0.3), _r(0.5, 0.2))


pos = st.floats(0.01, 10)


@settings(max_examples=200, deadline=None)
@given(pos, pos, pos, st.floats(0.01, 100))
def test_f_metric_invariant_to_common_scale(few, aug, std, c):
    if abs(few - std) < 1e-3:
        return
    a = f_metric(_r(few, few), _r(aug, aug), _r(std, std)).f_mae
    b = f_metric(_r(c * few, c * few), _r(c * aug, c * aug), _r(c * std, c * std)).f_mae
    assert a == pytest.approx(b, rel=1e-9, abs=1e-9)


def test_promotion():
    assert promotion(0.228, 0.224) == pytest.approx(0.0175, abs=1e-4)


def test_k1_rejected_before_work(tmp_path):
    with pytest.raises(ConfigError):
        run_pipeline(small_config(K=1), tmp_path / "run")
    assert not (tmp_path / "run").exists()


def test_unknown_config_key(tmp_path):
    (tmp_path / "c.yaml").write_text("alpha: 0.01\nnot_a_key: 3\n")
    with pytest.raises(ConfigError, match="not_a_key"):
        RunConfig.from_file(tmp_path / "c.yaml")


def test_yaml_config(tmp_path):
    (tmp_path / "c.yaml").write_text("alpha: 0.01\neta: 0.5\npartition: [10, 5, 5]\nsynthetic: {kind: linear_trend}\n")
    cfg = RunConfig.from_file(tmp_path / "c.yaml")
    assert (cfg.alpha, cfg.eta, cfg.partition) == (0.01, 0.5, (10, 5, 5))


def test_reference_defaults():
    cfg = RunConfig()
    assert (cfg.alpha, cfg.beta, cfg.eta, cfg.batch_size) == (1e-3, 0.1, 0.01, 32)
    assert (cfg.K, cfg.mask_rate, cfg.anchor_fraction, cfg.lookback, cfg.horizon) == (4, 0.3, 0.5, 96, 96)


def test_end_to_end_smoke(tmp_path):
    cfg = small_config(arms=["original", "reaugment", "reaugment_no_rl", "gaussian", "convolve", "standard"])
    m = run_pipeline(cfg, tmp_path)
    assert m.status == "complete"
    for name in ("manifest.json", "metrics.csv", "rank.csv", "reward_trace.csv", "zoo.npz", "policy.npz",
                 "policy_stage_a.npz", "corpus.npz", "corpus.provenance.jsonl", "dataset.npz"):
        assert (tmp_path / name).exists(), name
    assert set(m.metrics) == set(cfg.arms)
    assert set(m.f_metric) == {"reaugment", "reaugment_no_rl", "gaussian", "convolve"}
    assert read_metrics_csv(tmp_path / "metrics.csv") == m.metrics
    saved = json.loads((tmp_path / "manifest.json").read_text())
    assert saved["status"] == "complete" and saved["hashes"]["corpus"] == m.hashes["corpus"]
    assert m.metrics["reaugment"]["n_windows"] == m.metrics["original"]["n_windows"]


def test_rerun_is_identical(tmp_path):
    a = run_pipeline(small_config(), tmp_path / "a")
    b = run_pipeline(small_config(), tmp_path / "b")
    assert (tmp_path / "a/metrics.csv").read_bytes() == (tmp_path / "b/metrics.csv").read_bytes()
    assert a.hashes == b.hashes


def test_stage_failure_names_stage_and_persists_manifest(tmp_path):
    cfg = small_config(partition=(600, 200, 300), lookback=200, horizon=200)
    with pytest.raises(StageError, match="ingest"):
        run_pipeline(cfg, tmp_path)
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert m["status"] == "failed" and m["events"][-1]["stage"] == "ingest"


def test_report_layout_and_json_round_trip():
    m = RunManifest({}, status="complete",
                    metrics={"original": {"mae": 0.228, "mse": 0.103, "n_windows": 3},
                             "reaugment": {"mae": 0.224, "mse": 0.097, "n_windows": 3}})
    text, csv_text, js = report(m)
    rows = [line for line in text.splitlines() if line.startswith(("original", "reaugment"))]
    assert len(rows) == 2
    assert "1.75%" in rows[1] and "5.83%" in rows[1]
    assert len(csv_text.strip().splitlines()) == 3
    assert json.loads(js)["metrics"] == m.metrics


def test_partial_report_warns():
    text, _, _ = report(RunManifest({}, status="failed"))
    assert text.startswith("WARNING")


def test_rl_ablation_isolates_prior(tmp_path):
    table = ablation_rl(small_config(), tmp_path)
    assert table["changed_stacks"] == ["prior"]
    n_rl = sum(1 for _ in (tmp_path / "corpus.provenance.jsonl").open())
    n_off = sum(1 for _ in (tmp_path / "corpus_no_rl.provenance.jsonl").open())
    assert n_rl == n_off


def test_anchor_sweep_shares_zoo(tmp_path):
    table = ablation_anchor_fraction(small_config(reinforce_steps=2, vmae_epochs=2), [0.5, 1.0], tmp_path)
    assert table[1.0]["multiplier"] == 2
    assert len({row["zoo_hash"] for row in table.values()}) == 1
    assert (tmp_path / "ablation_anchor.csv").exists()
