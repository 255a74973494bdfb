import math

import numpy as np
import pytest

import preictal


def test_filter_design_meets_targets():
    taps = preictal.design_bandpass(256.0)
    assert taps.shape == (1691,)
    assert np.allclose(taps, taps[::-1])
    assert preictal.magnitude_response(256.0, 0.0) < 1e-3
    assert abs(preictal.magnitude_response(256.0, 10.0) - 1.0) <= 0.05
    assert 20 * math.log10(preictal.magnitude_response(256.0, 60.0)) <= -40.0


def test_preprocess_keeps_shape_and_removes_common_mode():
    rng = np.random.default_rng(0)
    data = rng.normal(size=(4, 256 * 20)) + 50.0
    car = preictal.common_average_reference(data)
    assert np.abs(car.mean(axis=0)).max() < 1e-9
    out = preictal.preprocess(data, 256.0)
    assert out.shape == data.shape
    with pytest.raises(ValueError):
        preictal.common_average_reference(data[:1])


def test_alpha_features():
    t = np.arange(1280) / 256.0
    seg = np.vstack([np.sin(2 * np.pi * 10 * t), np.cos(2 * np.pi * 10 * t)])
    f = preictal.extract_features(seg).reshape(2, 5)
    assert (f[:, 2:3] >= np.delete(f, 2, axis=1) + 2).all()


def test_fit_and_ciopr_from_prediction_series():
    t = np.arange(7200, 0, -1) * 5.0 / 60.0
    series = {}
    for d in (60, 45, 30, 15):
        series[d] = (t, 0.02 + 0.96 / (1 + np.exp(-0.4 * (d - t))))
    bt, by = preictal.smooth(*series[45])
    assert len(bt) == 75 and bt[0] > bt[-1]
    fit = preictal.fit_4pl(*series[45])
    assert fit["converged"] and fit["rho"] > 0.99
    group = preictal.evaluate_group(series)
    assert not group["excluded"]
    ciopr = {r["definition_min"]: r["ciopr"] for r in group["reports"]}
    assert ciopr[60] == 1.0
    assert ciopr[60] > ciopr[45] > ciopr[30] > ciopr[15]


def test_noiseless_logistic_recovery():
    x = 4.0 + 8.0 * np.arange(75)
    y = 1.0 / (1 + np.exp(-0.1 * (x - 300.0)))
    fit = preictal.fit_logistic4(x, y)
    assert abs(fit["b"] - 0.1) < 1e-6 and abs(fit["c"] - 300.0) < 1e-6


def test_ciopr_algebra_and_opp():
    assert preictal.ciopc(60.0, 120.0) == pytest.approx(120.0)
    assert preictal.ciopr_normalize([120, 90, 60, 30]) == [1.0, 0.75, 0.5, 0.25]
    assert preictal.select_opp({60: 0.99, 45: 1.0, 30: 0.8, 15: 0.7}) == (45, "CIOPR")
    assert preictal.select_opp({}, {60: 0.7, 45: 0.8, 30: 0.9, 15: 0.85}) == (30, "F1")


def test_metrics_and_stats():
    rng = np.random.default_rng(1)
    labels = (rng.random(120) < 0.5).astype(int)
    scores = rng.normal(size=120) + labels
    pos, neg = scores[labels == 1], scores[labels == 0]
    pairs = (pos[:, None] > neg[None, :]).mean() + 0.5 * (pos[:, None] == neg[None, :]).mean()
    assert preictal.auc(scores, labels.tolist()) == pytest.approx(pairs, abs=1e-12)
    m = preictal.confusion_metrics(np.array([0.9, 0.8, 0.2, 0.1]), [1, 0, 0, 1])
    assert (m["tp"], m["fp"], m["tn"], m["fn"]) == (1, 1, 1, 1)
    r = preictal.friedman([[10, 20, 30, 40], [12, 11, 35, 30], [9, 25, 20, 41]])
    assert r["statistic"] == pytest.approx(5.8, abs=1e-9)
    assert len(r["pairs"]) == 6


def test_prediction_import(tmp_path):
    p = tmp_path / "pred.csv"
    p.write_text("t_onset_min,y\n0.5,0.3\n2.0,0.1\n1.0,0.2\n")
    t, y = preictal.read_predictions(str(p))
    assert list(t) == [2.0, 1.0, 0.5]
    p.write_text("t_onset_min,y\n1.0,1.2\n")
    with pytest.raises(ValueError, match="row 2"):
        preictal.read_predictions(str(p))
    with pytest.raises(OSError):
        preictal.read_predictions(str(tmp_path / "missing.csv"))


def test_cli_exit_codes(tmp_path):
    assert preictal.run_cli(["frobnicate"]) == 1
    assert preictal.run_cli(["--out", str(tmp_path), "report"]) == 0
    assert (tmp_path / "report" / "summary.csv").exists()
    assert preictal.run_cli(["--config", str(tmp_path / "none.json"), "report"]) == 2
