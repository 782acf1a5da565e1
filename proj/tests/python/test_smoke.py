import math
import os
import subprocess

import numpy as np
import pytest

import amcontrast as amc


def test_scene_and_ambiguity():
    cloud = amc.generate_scene("two-plane", n=400, noise=0.0, seed=1)
    assert len(cloud) == 400
    assert cloud.positions.shape == (400, 3)
    a = np.asarray(amc.ambiguity(cloud.positions, cloud.labels, k=24))
    assert a.shape == (400,)
    assert ((a >= 0) & (a <= 1)).all()
    assert 0 < (a > 0).sum() < 400


def test_fixtures():
    assert amc.inverse_sigmoid(1.5, 0.25, 0.04) == pytest.approx(0.487503, abs=1e-6)
    assert amc.margin_contrastive_loss([1.0, 0.9], [0.1], 0.0, 0.5) == pytest.approx(0.08698, abs=1e-4)
    assert amc.margin_contrastive_loss([1.0, 0.9], [0.1], 0.5, 0.5) == pytest.approx(0.22077, abs=1e-4)
    assert amc.preset("s3dis") == (-1.0, 0.5, False)
    assert amc.margins([0.0, 0.5, 1.0]) == [0.5, 0.0, -0.5]
    assert amc.regime(0.0) == "zero"
    assert amc.ablation_presets() == ["const0", "const05", "pos_a", "one_minus_a", "s3dis", "clamped"]


def test_knn_anchor_first():
    pts = np.array([[1.0, 0, 0], [0, 1, 0], [2, 1, 0]])
    assert amc.knn(pts, 0, 3) == [(0, 0.0), (1, 2.0), (2, 2.0)]
    assert amc.fps(np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]), 2) == [0, 3]


def test_layer_loss_gradient():
    rng = np.random.default_rng(0)
    pos = rng.random((40, 3))
    labels = list(rng.integers(0, 2, 40))
    feats = rng.normal(size=(40, 5))
    m = list(rng.uniform(-0.5, 0.5, 40))
    loss, grad = amc.layer_loss(feats, pos, labels, m, k=6, tau=0.5)
    assert grad.shape == feats.shape
    h = 1e-6
    bumped = feats.copy()
    bumped[3, 2] += h
    lo = feats.copy()
    lo[3, 2] -= h
    fd = (amc.layer_loss(bumped, pos, labels, m, k=6, tau=0.5)[0]
          - amc.layer_loss(lo, pos, labels, m, k=6, tau=0.5)[0]) / (2 * h)
    assert grad[3, 2] == pytest.approx(fd, rel=1e-5, abs=1e-9)


def test_train_evaluate_roundtrip(tmp_path):
    cloud = amc.generate_scene("two-plane", n=512, noise=0.02, seed=3)
    model, log = amc.train(cloud, {"train.epochs": "30", "train.seed": "1"})
    assert len(log) == 30
    assert log[-1]["l_joint"] < log[0]["l_joint"]
    metrics = amc.evaluate(model, cloud)
    assert metrics["oa"] > 0.9
    path = tmp_path / "model.bin"
    model.save(path)
    again = amc.Model.load(path)
    assert again.predict(cloud) == model.predict(cloud)
    with pytest.raises(amc.ConfigError):
        amc.train(cloud, {"train.bogus": "1"})


def test_cloud_io(tmp_path):
    cloud = amc.generate_scene("checkerboard", n=100, seed=2)
    cloud.save(tmp_path / "c.pts")
    assert amc.PointCloud.load(tmp_path / "c.pts") == cloud
    with pytest.raises(amc.DataError):
        amc.PointCloud(np.zeros((2, 3)), [0, 5], 2)


def test_cli_in_process_and_binary(tmp_path):
    out = str(tmp_path / "s.pts")
    code, stdout, _ = amc.run_cli(["synth", "--n", "64", "-o", out])
    assert code == 0 and stdout.strip() == "n=64 C=2"
    exe = os.environ.get("AMC_CLI")
    if exe:
        res = subprocess.run([exe, "ambiguity", out, "--k", "8", "-o", str(tmp_path / "a.csv")],
                             capture_output=True, text=True)
        assert res.returncode == 0
        assert (tmp_path / "a.csv").read_text().startswith("index,a,m,regime\n")
    assert math.isnan(amc.compute_metrics([0, 1], [0, 1], 2)["boundary_band_acc"])
