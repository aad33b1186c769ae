import numpy as np
import pytest

from uwoc import dataset as ds
from uwoc.mlcore import (ClassifierSpec, confusion_matrix, evaluate,
                         grad_check, init_rnn, metrics_from_confusion,
                         rnn_forward, rnn_predict, train_adaboost, train_rnn,
                         train_svm, train_tree)
from uwoc.mlcore import classic, rnn as rnn_mod
from uwoc.errors import ContractError
from uwoc.seeding import make_rng


class TestRnnForward:
    def test_zero_weights_give_uniform_scores(self):
        model = init_rnn("lstm", 8, 5, seed=1)
        for key in model.params:
            model.params[key][:] = 0.0
        x = make_rng(2).standard_normal((3, 32, 4))
        probs = rnn_forward(model, x)
        assert np.allclose(probs, 0.2, atol=1e-12)

    def test_softmax_normalization(self):
        model = init_rnn("gru", 12, 4, seed=3)
        x = make_rng(4).standard_normal((6, 32, 4))
        probs = rnn_forward(model, x)
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-12)

    def test_logit_shift_invariance(self):
        model = init_rnn("lstm", 8, 3, seed=5)
        x = make_rng(6).standard_normal((4, 32, 4))
        base = rnn_forward(model, x)
        model.params["by"] += 7.5          # constant shift of every logit
        shifted = rnn_forward(model, x)
        assert np.allclose(base, shifted, atol=1e-12)

    def test_bilstm_direction_swap_symmetry(self):
        nh = 6
        model = init_rnn("bilstm", nh, 3, seed=7)
        swapped = init_rnn("bilstm", nh, 3, seed=7)
        for a, b in (("_f", "_b"), ("_b", "_f")):
            for p in ("Wx", "Wh", "b"):
                swapped.params[p + a] = model.params[p + b].copy()
        swapped.params["Wy"] = np.concatenate(
            [model.params["Wy"][nh:], model.params["Wy"][:nh]], axis=0)
        x = make_rng(8).standard_normal((5, 32, 4))
        assert np.allclose(rnn_forward(model, x),
                           rnn_forward(swapped, x[:, ::-1, :]), atol=1e-12)

    def test_sequence_reshape_is_detector_major(self):
        feats = np.arange(128, dtype=float)[None, :]
        seq = rnn_mod.sequences_from_features(feats)
        assert seq.shape == (1, 32, 4)
        assert seq[0, 0].tolist() == [0.0, 32.0, 64.0, 96.0]
        assert seq[0, 31].tolist() == [31.0, 63.0, 95.0, 127.0]


class TestGradients:
    @pytest.mark.parametrize("kind", ["lstm", "bilstm", "gru"])
    @pytest.mark.parametrize("n_hidden", [8, 16])
    def test_bptt_matches_finite_differences(self, kind, n_hidden):
        rng = make_rng(9)
        x = rng.standard_normal((4, 32, 4))
        y = np.array([0, 1, 2, 1])
        model = init_rnn(kind, n_hidden, 3, seed=10)
        assert grad_check(model, x, y, n_checks=200) < 1e-4


class TestTrainRnn:
    def test_tiny_set_memorization(self):
        rng = make_rng(11)
        feats = rng.standard_normal((10, 128))
        labels = np.array([0, 1] * 5)
        model = train_rnn(feats, labels, "lstm", 32, 200, seed=12)
        assert np.mean(rnn_predict(model, feats) == labels) == 1.0

    def test_loss_descends_on_separable_data(self):
        # full-batch steps keep the trace clean of shuffle noise
        rng = make_rng(13)
        labels = np.repeat([0, 1], 20)
        feats = rng.standard_normal((40, 128)) + 3.0 * labels[:, None]
        model = train_rnn(feats, labels, "gru", 16, 50, seed=14,
                          batch_size=40)
        trace = np.array(model.loss_trace)
        assert trace.size == 50
        violations = np.sum(trace[1:] > trace[:-1])
        assert violations <= 0.05 * (trace.size - 1)

    def test_deterministic_retraining(self):
        rng = make_rng(15)
        feats = rng.standard_normal((20, 128))
        labels = np.tile([0, 1], 10)
        a = train_rnn(feats, labels, "bilstm", 8, 3, seed=16)
        b = train_rnn(feats, labels, "bilstm", 8, 3, seed=16)
        for key in a.params:
            assert np.array_equal(a.params[key], b.params[key])
        assert a.loss_trace == b.loss_trace

    def test_single_class_rejected(self):
        feats = np.zeros((6, 128))
        with pytest.raises(ContractError):
            train_rnn(feats, np.ones(6), "lstm", 8, 1)


class TestClassicClassifiers:
    def test_tree_fits_separable_points(self):
        x = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([0, 0, 1, 1])
        model = train_tree(x, y)
        assert np.array_equal(classic.tree_predict(model, x), y)

    def test_adaboost_single_round_is_best_stump(self):
        rng = make_rng(17)
        x = rng.standard_normal((60, 4))
        y = (x[:, 2] > 0.1).astype(int)
        boosted = train_adaboost(x, y, n_rounds=1)
        assert len(boosted.stumps) == 1
        stump, _ = classic._best_stump(
            x, y, np.full(60, 1.0 / 60), 2)
        assert boosted.stumps[0] == stump

    def test_svm_cannot_solve_xor(self):
        x = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([0, 1, 1, 0])
        model = train_svm(x, y)
        assert np.mean(classic.svm_predict(model, x) == y) <= 0.75

    def test_single_class_rejected(self):
        with pytest.raises(ContractError):
            train_tree(np.zeros((4, 2)), np.zeros(4))
        with pytest.raises(ContractError):
            train_adaboost(np.zeros((4, 2)), np.zeros(4))
        with pytest.raises(ContractError):
            train_svm(np.zeros((4, 2)), np.zeros(4))


class TestMetrics:
    def test_hand_computed_binary_confusion(self):
        # TP=3, FP=1, FN=1, TN=5
        cm = np.array([[5, 1], [1, 3]])
        m = metrics_from_confusion(cm)
        assert m["accuracy"] == pytest.approx(0.8)
        assert m["precision"] == pytest.approx(0.75)
        assert m["recall"] == pytest.approx(0.75)
        assert m["specificity"] == pytest.approx(5.0 / 6.0, abs=1e-4)
        assert m["f1"] == pytest.approx(0.75)

    def test_binary_accuracy_identity(self):
        rng = make_rng(18)
        y_true = rng.integers(0, 2, 200)
        y_pred = rng.integers(0, 2, 200)
        cm = confusion_matrix(y_true, y_pred, [0, 1])
        m = metrics_from_confusion(cm)
        assert m["accuracy"] == (cm[0, 0] + cm[1, 1]) / cm.sum()

    def test_f1_is_harmonic_mean(self):
        cm = np.array([[50, 3, 2], [4, 60, 1], [2, 5, 40]])
        m = metrics_from_confusion(cm)
        expected = 2 * m["precision"] * m["recall"] / (m["precision"] + m["recall"])
        assert m["f1"] == pytest.approx(expected, rel=1e-12)

    def test_perfect_predictor_scores_ones(self):
        rng = make_rng(19)
        labels6 = np.array([1, 2, 3, 4, 5, 6] * 10)
        feats = np.zeros((60, 128))
        feats[:, 0] = labels6           # label printed into feature zero
        feats[:, 1:] = rng.standard_normal((60, 127)) * 0.01
        samples = [ds.MLSample(features=f, label6=int(l), distance_m=1.0,
                               speed_m_s=0.1, repeat=0)
                   for f, l in zip(feats, labels6)]
        report = evaluate(ClassifierSpec(kind="tree"), samples, "six_class",
                          k=5, seed=20)
        for name in ("accuracy", "precision", "recall", "specificity", "f1"):
            assert getattr(report, name) == 1.0

    def test_evaluate_deterministic(self):
        rng = make_rng(21)
        samples = [ds.MLSample(features=np.abs(rng.standard_normal(128)),
                               label6=int(rng.integers(1, 7)),
                               distance_m=1.0, speed_m_s=0.1, repeat=0)
                   for _ in range(40)]
        spec = ClassifierSpec(kind="gru", n_hidden=8, n_epochs=2)
        a = evaluate(spec, samples, "three_class", k=4, seed=22)
        b = evaluate(spec, samples, "three_class", k=4, seed=22)
        assert a.accuracy == b.accuracy
        assert np.array_equal(a.confusion, b.confusion)
        assert a.per_fold == b.per_fold

    def test_report_json_schema(self):
        cm = np.array([[5, 1], [1, 3]])
        m = metrics_from_confusion(cm)
        from uwoc.mlcore.metrics import MetricsReport
        report = MetricsReport(per_fold={"accuracy": [0.8]},
                               confusion=cm, classes=np.array([0, 1]), **m)
        import json
        doc = json.loads(report.to_json(kind="tree"))
        assert set(doc) >= {"accuracy", "precision", "recall", "specificity",
                            "f1", "per_fold", "confusion", "classes", "kind"}
        assert doc["confusion"] == [5, 1, 1, 3]
