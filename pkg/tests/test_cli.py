import json

import numpy as np
import pytest

from uwoc import dataset as ds
from uwoc import linksim
from uwoc.cli import main
from uwoc.seeding import make_rng

TINY_SWEEP = {
    "sweep": {"speeds_mps": [0.1], "distance_start_m": 5.0,
              "distance_stop_m": 15.0, "distance_step_m": 5.0,
              "repeats": 1, "configs": [5, 6]},
    "simulation": {"frames_per_point": 4},
}


@pytest.fixture
def tiny_config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(TINY_SWEEP))
    return str(path)


def _tiny_dataset_csv(tmp_path):
    rng = make_rng(99)
    labels6 = np.array([1, 3, 5] * 20)
    samples = [ds.MLSample(
        features=np.abs(rng.standard_normal(128) + 0.4 * l),
        label6=int(l), distance_m=float(1 + i % 60), speed_m_s=0.1,
        repeat=0) for i, l in enumerate(labels6)]
    path = tmp_path / "dataset.csv"
    ds.save(samples, path)
    return str(path)


class TestSweepCommand:
    def test_runs_and_writes_outputs(self, tiny_config, tmp_path):
        out = tmp_path / "sweep.csv"
        rc = main(["sweep", "--config", tiny_config, "--out", str(out)])
        assert rc == 0
        rows = linksim.read_sweep_csv(out)
        assert len(rows) == 3 * 2
        summary = json.loads((tmp_path / "sweep.csv.summary.json").read_text())
        assert summary["coverage_m"]["config_5"]["0.1"] == 15.0

    def test_idempotent_bytes(self, tiny_config, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["sweep", "--config", tiny_config, "--out", str(out1)]) == 0
        assert main(["sweep", "--config", tiny_config, "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_parallelism_matches_serial(self, tiny_config, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["sweep", "--config", tiny_config, "--out", str(out1)])
        main(["sweep", "--config", tiny_config, "--out", str(out2),
              "--parallelism", "2"])
        assert out1.read_bytes() == out2.read_bytes()

    def test_schema_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"sweep": {"no_such_key": 1}}))
        rc = main(["sweep", "--config", str(bad),
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "schema"
        assert err["pointer"] == "/sweep/no_such_key"

    def test_invalid_json_exit_code(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        rc = main(["sweep", "--config", str(bad),
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 2

    def test_seed_env_override(self, tiny_config, tmp_path, monkeypatch):
        out = tmp_path / "s.csv"
        monkeypatch.setenv("UWOC_SEED", "777")
        main(["sweep", "--config", tiny_config, "--out", str(out)])
        summary = json.loads((tmp_path / "s.csv.summary.json").read_text())
        assert summary["seed"] == 777


class TestDatasetCommand:
    def test_generates_expected_rows(self, tiny_config, tmp_path):
        out = tmp_path / "ds.csv"
        rc = main(["dataset", "--config", tiny_config, "--out", str(out)])
        assert rc == 0
        samples = ds.load(out)
        assert len(samples) == 3        # 1 speed x 3 distances x 1 repeat
        assert all(s.features.shape == (128,) for s in samples)


class TestTrainCommand:
    def test_metrics_json_schema(self, tmp_path):
        data = _tiny_dataset_csv(tmp_path)
        out = tmp_path / "metrics.json"
        rc = main(["train", "--dataset", data, "--task", "three_class",
                   "--classifier", "tree", "--folds", "4",
                   "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        for key in ("accuracy", "precision", "recall", "specificity", "f1",
                    "per_fold", "confusion", "kind", "n_epochs"):
            assert key in doc
        assert len(doc["per_fold"]["accuracy"]) == 4

    def test_missing_dataset_exit_code(self, tmp_path):
        rc = main(["train", "--dataset", str(tmp_path / "none.csv"),
                   "--task", "six_class", "--classifier", "tree",
                   "--out", str(tmp_path / "m.json")])
        assert rc == 3


class TestSwitchOptCommand:
    def test_emits_result_json(self, tmp_path):
        data = _tiny_dataset_csv(tmp_path)
        out = tmp_path / "switchopt.json"
        rc = main(["switchopt", "--dataset", data, "--task", "three_class",
                   "--grid-hidden", "8", "--grid-epochs", "2,3",
                   "--beta", "2", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["u_opt"] in ("lstm", "bilstm", "gru")
        assert doc["metrics"] is not None
        assert len(doc["trace"]) >= 3


class TestReportCommand:
    def test_throughput_rows_match_closed_form(self, tiny_config, tmp_path):
        sweep_csv = tmp_path / "sweep.csv"
        main(["sweep", "--config", tiny_config, "--out", str(sweep_csv)])
        rc = main(["report", "--sweep", str(sweep_csv),
                   "--out-dir", str(tmp_path / "rep")])
        assert rc == 0
        lines = (tmp_path / "rep" / "throughput_vs_distance.csv").read_text().splitlines()
        assert lines[0] == "config,speed_mps,distance_m,fer,throughput_bps"
        ofdm = __import__("uwoc.phy", fromlist=["OfdmParams"]).OfdmParams()
        for line in lines[1:]:
            cfg_idx, _, _, fer, thr = line.split(",")
            if float(fer) == 0.0:
                expected = linksim.throughput(
                    linksim.config_by_index(int(cfg_idx)), ofdm, 0.0)
                assert float(thr) == pytest.approx(expected, rel=1e-12)

    def test_accuracy_report(self, tmp_path):
        data = _tiny_dataset_csv(tmp_path)
        m1 = tmp_path / "m1.json"
        main(["train", "--dataset", data, "--task", "three_class",
              "--classifier", "tree", "--out", str(m1)])
        rc = main(["report", "--metrics", str(m1),
                   "--out-dir", str(tmp_path / "rep2")])
        assert rc == 0
        lines = (tmp_path / "rep2" / "accuracy_vs_epochs.csv").read_text().splitlines()
        assert lines[0] == "classifier,epochs,hidden,accuracy"
        assert len(lines) == 2

    def test_no_inputs_is_schema_error(self, tmp_path):
        assert main(["report", "--out-dir", str(tmp_path / "rep3")]) == 2
