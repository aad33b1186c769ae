import numpy as np
import pytest

from uwoc import dataset as ds
from uwoc import linksim, phy
from uwoc.errors import ContractError, ParseError

OFDM = phy.OfdmParams()


def capture_from_bins(bins):
    """Build a one-symbol capture whose post-DFT bins equal ``bins``."""
    return phy.FrameWaveform(samples=phy.symbol_from_bins(bins, OFDM),
                             first_data_symbol=0)


class TestExtractFeatures:
    def test_all_zero_capture(self):
        cap = phy.FrameWaveform(samples=np.zeros((4, 34), dtype=complex),
                                first_data_symbol=0)
        feats = ds.extract_features(cap, OFDM)
        assert feats.shape == (128,)
        assert np.all(feats == 0.0)

    def test_single_active_pair_hits_mirrored_bins(self):
        pairs = np.zeros(15, dtype=complex)
        pairs[2] = 1.0                        # bin 3 and mirror bin 29
        bins = np.tile(phy.hermitian_load(pairs, OFDM), (4, 1))
        feats = ds.extract_features(capture_from_bins(bins), OFDM)
        per_det = feats.reshape(4, 32)
        for det in range(4):
            hot = np.flatnonzero(per_det[det] > 1e-10)
            assert sorted(hot.tolist()) == [3, 29]

    def test_global_phase_invariance(self):
        rng = np.random.Generator(np.random.PCG64(1))
        bins = rng.standard_normal((4, 32)) + 1j * rng.standard_normal((4, 32))
        a = ds.extract_features(capture_from_bins(bins), OFDM)
        b = ds.extract_features(capture_from_bins(bins * np.exp(0.7j)), OFDM)
        assert np.allclose(a, b, atol=1e-12)

    def test_too_few_detectors_rejected(self):
        cap = phy.FrameWaveform(samples=np.zeros((3, 34), dtype=complex),
                                first_data_symbol=0)
        with pytest.raises(ContractError):
            ds.extract_features(cap, OFDM)


class TestProjectLabels:
    def test_reference_class(self):
        # NF=16, NT=8, rate 1/2 turbo is six-class label 5
        assert ds.project_labels([5], "binary_freq")[0] == 1
        assert ds.project_labels([5], "binary_time")[0] == 1
        assert ds.project_labels([5], "binary_rate")[0] == 0
        assert ds.project_labels([5], "three_class")[0] == 3

    def test_six_class_identity(self):
        labels = np.array([1, 2, 3, 4, 5, 6])
        assert np.array_equal(ds.project_labels(labels, "six_class"), labels)

    def test_binary_freq_partition_sizes(self):
        labels = np.arange(1, 7)
        projected = ds.project_labels(labels, "binary_freq")
        assert np.sum(projected == 0) == 2
        assert np.sum(projected == 1) == 4

    def test_unknown_task_rejected(self):
        with pytest.raises(ContractError):
            ds.project_labels([1], "nine_class")

    def test_label_range_enforced(self):
        with pytest.raises(ContractError):
            ds.project_labels([0], "six_class")


class TestKfold:
    def test_sizes_960_into_5(self):
        folds = ds.kfold_split(960, 5, seed=1)
        assert [len(f) for f in folds] == [192] * 5

    def test_union_is_everything(self):
        folds = ds.kfold_split(97, 5, seed=2)
        merged = np.sort(np.concatenate(folds))
        assert np.array_equal(merged, np.arange(97))
        assert max(len(f) for f in folds) - min(len(f) for f in folds) <= 1

    def test_stratified_sizes_stay_balanced(self):
        labels = np.repeat(np.arange(4), [11, 7, 5, 3])
        folds = ds.kfold_split(26, 5, seed=3, labels=labels)
        sizes = [len(f) for f in folds]
        assert max(sizes) - min(sizes) <= 1
        merged = np.sort(np.concatenate(folds))
        assert np.array_equal(merged, np.arange(26))

    def test_deterministic(self):
        a = ds.kfold_split(50, 5, seed=4)
        b = ds.kfold_split(50, 5, seed=4)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

    def test_too_few_samples_rejected(self):
        with pytest.raises(ContractError):
            ds.kfold_split(3, 5, seed=5)


def _fake_samples(n, rng):
    return [ds.MLSample(features=np.abs(rng.standard_normal(128)),
                        label6=int(rng.integers(1, 7)),
                        distance_m=float(rng.integers(1, 61)),
                        speed_m_s=0.1, repeat=int(rng.integers(0, 4)))
            for _ in range(n)]


class TestCsvRoundTrip:
    def test_bit_faithful_roundtrip(self, tmp_path):
        rng = np.random.Generator(np.random.PCG64(6))
        samples = _fake_samples(25, rng)
        path = tmp_path / "ds.csv"
        ds.save(samples, path)
        back = ds.load(path)
        assert len(back) == len(samples)
        for a, b in zip(samples, back):
            assert np.array_equal(a.features, b.features)
            assert (a.label6, a.distance_m, a.speed_m_s, a.repeat) == \
                (b.label6, b.distance_m, b.speed_m_s, b.repeat)

    def test_save_is_deterministic(self, tmp_path):
        rng = np.random.Generator(np.random.PCG64(7))
        samples = _fake_samples(10, rng)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        ds.save(samples, p1)
        ds.save(samples, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_header_mismatch_names_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        good = ds.CSV_HEADER.split(",")
        good[2] = "dist"
        path.write_text(",".join(good) + "\n")
        with pytest.raises(ParseError, match="distance_m"):
            ds.load(path)

    def test_empty_file_is_an_error(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ParseError):
            ds.load(path)

    def test_header_only_is_an_error(self, tmp_path):
        path = tmp_path / "empty2.csv"
        path.write_text(ds.CSV_HEADER + "\n")
        with pytest.raises(ParseError):
            ds.load(path)


@pytest.mark.slow
class TestGenerate:
    PLAN = ds.DatasetPlan(speeds_m_s=(0.1, 0.5), distances_m=(5.0, 27.0, 50.0),
                          repeats=2)
    OPTS = linksim.SimOptions(frames_per_point=8)

    def test_tiny_plan_counts_and_contents(self, tmp_path):
        samples, rows = ds.generate(self.PLAN, seed=11, options=self.OPTS)
        assert len(samples) == self.PLAN.n_samples == 12
        assert len(rows) == 12 * 6
        for s in samples:
            assert s.features.shape == (128,)
            assert np.all(s.features >= 0.0)
            assert np.all(np.isfinite(s.features))
            assert 1 <= s.label6 <= 6

    def test_regeneration_is_byte_identical(self, tmp_path):
        samples_a, _ = ds.generate(self.PLAN, seed=11, options=self.OPTS)
        samples_b, _ = ds.generate(self.PLAN, seed=11, options=self.OPTS)
        pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
        ds.save(samples_a, pa)
        ds.save(samples_b, pb)
        assert pa.read_bytes() == pb.read_bytes()

    def test_labels_follow_link_quality(self):
        samples, _ = ds.generate(self.PLAN, seed=11, options=self.OPTS)
        near = [s.label6 for s in samples if s.distance_m == 5.0]
        assert set(near) == {1}        # short range: raw-rate config wins
