import csv

import numpy as np
import pytest

from scienet import context, dataio, perturb, synthetic
from scienet.cli import main
from scienet.network import SnnModel

FAST = ["--set", "lif.v_threshold=60", "--set", "inhibition.dv_inh=60", "--set", "mlp.hidden=16"]


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    return synthetic.write_dataset(tmp_path_factory.mktemp("cifar"), train=250, test=40, seed=0)


@pytest.fixture(scope="module")
def snn(data, tmp_path_factory):
    out = tmp_path_factory.mktemp("snn") / "snn.bin"
    rc = main(["learn", "--data", str(data), "--out", str(out), "--neurons", "16",
               "--limit", "200", "--epochs", "1", "--log", str(out) + ".csv", *FAST])
    assert rc == 0
    return out


def _rows(path):
    lines = [ln for ln in open(path) if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def test_learn_smoke(snn):
    model = dataio.load_snn_model(snn)
    assert model.g.shape == (16, 3072) and model.in_bounds()
    assert model.meta["seed"] == 0 and len(model.meta["config_hash"]) == 16
    log_rows = _rows(str(snn) + ".csv")
    assert len(log_rows) == 1 and float(log_rows[0]["mean_spikes_per_presentation"]) > 0
    assert open(str(snn) + ".csv").readline().startswith("# scienet config_hash=")


def test_learn_zero_epochs_is_initial_model(data, tmp_path):
    out = tmp_path / "m.bin"
    assert main(["learn", "--data", str(data), "--out", str(out), "--neurons", "5",
                 "--epochs", "0", "--limit", "10", "--seed", "3"]) == 0
    got = dataio.load_snn_model(out)
    init = SnnModel.initialize(5, 3072, seed=3)
    assert np.array_equal(got.g, init.g)


def test_extract(snn, data, tmp_path):
    out = tmp_path / "t"
    assert main(["extract", "--model", str(snn), "--data", str(data), "--out-dir", str(out),
                 "--limit", "12", "--w", "0.4", "--k", "3", "--workers", "2"]) == 0
    rows = _rows(out / "manifest.csv")
    assert len(rows) == 12
    model = dataio.load_snn_model(snn)
    images = dataio.load_cifar10(data, "test")
    arr, header = dataio.load_tensor(out / rows[5]["file"], expect_tag="template")
    single = context.extract_template(model, images.images[5], 0.4, 3)
    assert np.allclose(arr, single.values, atol=1e-7)
    assert header["source_neurons"] == single.source_neurons.tolist()
    assert header["image_id"] == 5 and header["seed"] == 0

    ident = tmp_path / "w0"
    main(["extract", "--model", str(snn), "--data", str(data), "--out-dir", str(ident),
          "--limit", "2", "--w", "0"])
    arr0, _ = dataio.load_tensor(ident / "template_000000.tensor")
    assert np.allclose(arr0, context.minmax(images.images[0]), atol=1e-7)


def test_perturb(data, tmp_path):
    src = data / "test_batch.bin"
    out = tmp_path / "noisy.bin"
    assert main(["perturb", "--kind", "awgn", "--snr", "20", "--seed", "5", str(src), str(out)]) == 0
    clean = dataio.load_cifar10(src)
    noisy = dataio.load_cifar10(out)
    expect = perturb.PerturbationSpec("awgn", 20.0).apply_batch(clean.images, 5, ids=clean.ids)
    assert np.allclose(noisy.images, np.rint(expect * 255) / 255)
    assert np.array_equal(noisy.labels, clean.labels)
    assert '"seed": 5' in (tmp_path / "noisy.bin.json").read_text()
    par = tmp_path / "par.bin"
    main(["perturb", "--kind", "rain", "--rain", "heavy", "--workers", "3", str(src), str(par)])
    seq = tmp_path / "seq.bin"
    main(["perturb", "--kind", "rain", "--rain", "heavy", str(src), str(seq)])
    assert par.read_bytes() == seq.read_bytes()


def test_distance_clean_is_zero(snn, data, tmp_path):
    out = tmp_path / "d.csv"
    assert main(["distance", "--model", str(snn), "--data", str(data), "--limit", "10",
                 "--snr", "inf", "10", "--out", str(out)]) == 0
    rows = _rows(out)
    assert len(rows) == 20
    assert all(float(r["distance"]) == 0.0 for r in rows if r["snr_db"] == "inf")
    summary = _rows(tmp_path / "d_summary.csv")
    assert [r["snr_db"] for r in summary] == ["inf", "10"]


def test_train_and_evaluate_pipeline(snn, data, tmp_path):
    clf = tmp_path / "clf.bin"
    assert main(["train-clf", "--data", str(data), "--snn", str(snn), "--out", str(clf),
                 "--epochs", "3", "--log", str(tmp_path / "clf.csv"), *FAST]) == 0
    assert len(_rows(tmp_path / "clf.csv")) == 3
    res = []
    for name in ("a.csv", "b.csv"):
        assert main(["evaluate", "--clf", str(clf), "--snn", str(snn), "--data", str(data),
                     "--snr", "30", "20", "10", "--out", str(tmp_path / name)]) == 0
        res.append((tmp_path / name).read_bytes())
    assert res[0] == res[1]
    rows = _rows(tmp_path / "a.csv")
    assert [r["condition"] for r in rows] == ["clean", "awgn", "awgn", "awgn", "rain", "rain"]
    assert all(0.0 <= float(r["accuracy"]) <= 1.0 for r in rows)

    tdir = tmp_path / "tmpl"
    main(["extract", "--model", str(snn), "--data", str(data), "--split", "train",
          "--out-dir", str(tdir), "--limit", "30"])
    assert main(["train-clf", "--templates", str(tdir), "--out", str(tmp_path / "c2.bin"),
                 "--epochs", "1", *FAST]) == 0


def test_exit_codes(data, tmp_path, snn):
    assert main(["nonsense"]) == 1
    assert main(["learn", "--data", str(data)]) == 1  # missing --out
    assert main(["learn", "--data", str(data), "--out", str(tmp_path / "x"), "--set", "lif.dt=-1"]) == 1
    assert main(["learn", "--data", str(tmp_path / "none"), "--out", str(tmp_path / "x")]) == 2
    bad = tmp_path / "trunc.bin"
    bad.write_bytes(b"\x01" * 100)
    assert main(["perturb", "--kind", "none", str(bad), str(tmp_path / "o.bin")]) == 2
    assert main(["perturb", "--kind", "awgn", str(data / "test_batch.bin"), str(tmp_path / "o.bin")]) == 1
    assert main(["evaluate", "--clf", str(snn), "--data", str(data)]) == 2  # wrong model tag
