import math
import random
import warnings

import numpy as np
import pytest

from geocorpus.active_learn import (
    CLASSES,
    DegenerateDataError,
    LabeledSample,
    LinearModel,
    RequestError,
    curve_to_csv,
    load_labels,
    macro_precision,
    predict,
    run_curve,
    select_hierarchical,
    select_random,
    select_uncertainty,
    split_train_test,
    train_ovr,
)

NONREL, POS, NEG = CLASSES


def blob_samples(rng, n_per_class, spread=0.25, dim=2):
    """Three well-separated Gaussian blobs, one per class."""
    centers = {NONREL: (0.0, 0.0), POS: (6.0, 6.0), NEG: (-6.0, 6.0)}
    samples = []
    i = 0
    for label, (cx, cy) in centers.items():
        for _ in range(n_per_class):
            vec = np.array([
                rng.gauss(cx, spread), rng.gauss(cy, spread),
                *(rng.gauss(0, spread) for _ in range(dim - 2)),
            ])
            samples.append(LabeledSample(f"t{i:04d}", vec, label))
            i += 1
    return samples


def perceptron_separates(samples, label, epochs=200):
    """Exact check that ``label`` is linearly separable from the rest."""
    w = np.zeros(len(samples[0].vector) + 1)
    data = [
        (np.append(s.vector, 1.0), 1.0 if s.label == label else -1.0)
        for s in samples
    ]
    for _ in range(epochs):
        mistakes = 0
        for x, y in data:
            if y * (w @ x) <= 0:
                w += y * x
                mistakes += 1
        if mistakes == 0:
            return True
    return False


class TestTraining:
    def test_separable_blobs_high_accuracy(self):
        rng = random.Random(1)
        samples = blob_samples(rng, 100)
        # the oracle first proves the construction is separable
        for label in CLASSES:
            assert perceptron_separates(samples, label)
        model = train_ovr(samples, seed=5)
        correct = sum(1 for s in samples if predict(model, s.vector)[0] == s.label)
        assert correct / len(samples) >= 0.99

    def test_deterministic_per_seed(self):
        rng = random.Random(2)
        samples = blob_samples(rng, 30)
        m1 = train_ovr(samples, seed=9)
        m2 = train_ovr(samples, seed=9)
        m3 = train_ovr(samples, seed=10)
        assert np.array_equal(m1.weights, m2.weights)
        assert np.array_equal(m1.bias, m2.bias)
        assert not np.array_equal(m1.weights, m3.weights)

    def test_single_class_is_degenerate(self):
        samples = [LabeledSample("a", np.ones(3), POS), LabeledSample("b", np.zeros(3), POS)]
        with pytest.raises(DegenerateDataError):
            train_ovr(samples)

    def test_all_zero_vectors_predict_bias_dominant_class(self):
        samples = (
            [LabeledSample(f"a{i}", np.zeros(4), POS) for i in range(30)]
            + [LabeledSample(f"b{i}", np.zeros(4), NEG) for i in range(10)]
        )
        model = train_ovr(samples, seed=3)
        labels = {predict(model, np.zeros(4))[0] for _ in range(5)}
        assert labels == {POS}  # majority class dominates the bias


class TestPredict:
    def test_hand_computed_two_class(self):
        model = LinearModel(
            classes=(NEG, POS),
            weights=np.array([[1.0, 0.0], [0.0, 1.0]]),
            bias=np.array([0.0, -0.5]),
            epochs=0, learning_rate=0.0, regularization=0.0, seed=0,
        )
        # decisions at x=(2, 1): NEG -> 2.0, POS -> 0.5
        label, confidence = predict(model, np.array([2.0, 1.0]))
        assert label == NEG
        expected = math.exp(2.0) / (math.exp(2.0) + math.exp(0.5))
        assert confidence == pytest.approx(expected, abs=1e-12)

    def test_argmax_stable_under_constant_shift(self):
        model = LinearModel(
            classes=CLASSES,
            weights=np.zeros((3, 2)),
            bias=np.array([0.1, 0.9, 0.3]),
            epochs=0, learning_rate=0.0, regularization=0.0, seed=0,
        )
        shifted = LinearModel(
            classes=CLASSES,
            weights=model.weights,
            bias=model.bias + 100.0,
            epochs=0, learning_rate=0.0, regularization=0.0, seed=0,
        )
        x = np.zeros(2)
        assert predict(model, x)[0] == predict(shifted, x)[0]
        assert predict(model, x)[1] == pytest.approx(predict(shifted, x)[1], abs=1e-12)

    def test_confidence_in_unit_interval(self):
        rng = np.random.default_rng(7)
        model = LinearModel(
            classes=CLASSES, weights=rng.standard_normal((3, 5)),
            bias=rng.standard_normal(3),
            epochs=0, learning_rate=0.0, regularization=0.0, seed=0,
        )
        for _ in range(100):
            _, confidence = predict(model, rng.standard_normal(5))
            assert 0.0 < confidence <= 1.0


class TestSelection:
    def test_random_deterministic_and_uniform(self):
        ids = [f"t{i}" for i in range(50)]
        a = select_random(ids, 10, seed=4)
        b = select_random(list(reversed(ids)), 10, seed=4)  # order-independent
        assert a == b
        assert len(set(a)) == 10
        assert select_random(ids, 50, seed=1) != ids  # sampled, not sliced
        assert sorted(select_random(ids, 50, seed=1)) == sorted(ids)
        with pytest.raises(RequestError):
            select_random(ids, 51, seed=0)

    def test_uncertainty_exact_k_lowest(self):
        rng = random.Random(6)
        model = train_ovr(blob_samples(rng, 40), seed=2)
        pool = {f"p{i}": np.array([rng.uniform(-8, 8), rng.uniform(-2, 8)]) for i in range(1000)}
        k = 25
        picked = select_uncertainty(pool, model, k)
        confidences = {tid: predict(model, v)[1] for tid, v in pool.items()}
        expected = [tid for _, tid in sorted((c, tid) for tid, c in confidences.items())[:k]]
        assert picked == expected
        shuffled = dict(sorted(pool.items(), key=lambda kv: rng.random()))
        assert select_uncertainty(shuffled, model, k) == picked

    def test_uncertainty_boundary_point_first(self):
        rng = random.Random(8)
        samples = blob_samples(rng, 40)
        model = train_ovr(samples, seed=2)
        # a point with identical decision values for the top-2 classes sits on
        # the boundary; build it by bisecting between two blob centers
        lo, hi = np.array([6.0, 6.0]), np.array([-6.0, 6.0])
        for _ in range(80):
            mid = (lo + hi) / 2
            scores = model.weights @ mid + model.bias
            if scores[list(model.classes).index(POS)] > scores[list(model.classes).index(NEG)]:
                lo = mid
            else:
                hi = mid
        pool = {f"far{i}": blob_samples(random.Random(i), 1)[0].vector for i in range(20)}
        pool["boundary"] = mid
        assert select_uncertainty(pool, model, 1) == ["boundary"]

    def test_hierarchical_forced_single_unlabeled_cluster(self):
        rng = random.Random(12)
        samples = blob_samples(rng, 3)  # 9 points -> 3 clusters
        pool = {s.tweet_id: s.vector for s in samples}
        known = {s.tweet_id: s.label for s in samples if s.label != POS}
        picked = select_hierarchical(pool, known, 3, seed=1)
        pos_ids = {s.tweet_id for s in samples if s.label == POS}
        assert set(picked) == pos_ids

    def test_hierarchical_first_picks_spread_over_blobs(self):
        rng = random.Random(14)
        samples = blob_samples(rng, 3)  # 9 points, sqrt -> 3 clusters
        pool = {s.tweet_id: s.vector for s in samples}
        picked = select_hierarchical(pool, {}, 3, seed=3)
        blobs = {s.tweet_id: s.label for s in samples}
        assert len({blobs[tid] for tid in picked}) == 3

    def test_hierarchical_deterministic_and_bounded(self):
        rng = random.Random(15)
        samples = blob_samples(rng, 20)
        pool = {s.tweet_id: s.vector for s in samples}
        known = {s.tweet_id: s.label for s in samples[:10]}
        a = select_hierarchical(pool, known, 12, seed=6)
        b = select_hierarchical(pool, known, 12, seed=6)
        assert a == b
        assert len(a) == len(set(a)) == 12
        assert not set(a) & set(known)
        with pytest.raises(RequestError):
            select_hierarchical(pool, known, len(pool) - len(known) + 1, seed=0)


class TestCurve:
    def test_row_count_and_budget_bookkeeping(self):
        rng = random.Random(16)
        train = blob_samples(rng, 20)
        test = blob_samples(rng, 10)
        curve = run_curve(train, test, "random", batch_size=8, budget=30, seed=1)
        assert len(curve) == math.ceil(30 / 8)
        assert curve[-1].n_labeled == 30
        assert all(0.0 <= p.macro_precision <= 1.0 for p in curve)

    def test_budget_clipped_with_warning(self):
        rng = random.Random(17)
        train = blob_samples(rng, 4)
        test = blob_samples(rng, 4)
        with pytest.warns(UserWarning, match="clipping"):
            curve = run_curve(train, test, "random", batch_size=5, budget=999, seed=1)
        assert curve[-1].n_labeled == len(train)

    def test_exhausted_budget_equals_full_pool_training(self):
        rng = random.Random(18)
        train = blob_samples(rng, 15)
        test = blob_samples(rng, 8)
        seed = 23
        for strategy in ("random", "uncertainty", "hierarchical"):
            curve = run_curve(train, test, strategy, batch_size=9, budget=len(train), seed=seed)
            model = train_ovr(sorted(train, key=lambda s: s.tweet_id), seed=seed)
            y_true = [s.label for s in test]
            y_pred = [predict(model, s.vector)[0] for s in test]
            expected_macro, _ = macro_precision(y_true, y_pred)
            assert curve[-1].macro_precision == expected_macro

    def test_final_precision_high_on_separable_fixture(self):
        rng = random.Random(19)
        train = blob_samples(rng, 30)
        test = blob_samples(rng, 15)
        for strategy in ("random", "uncertainty", "hierarchical"):
            curve = run_curve(train, test, strategy, batch_size=15, budget=90, seed=2)
            assert curve[-1].macro_precision >= 0.95, strategy

    def test_strategies_deterministic_per_seed(self):
        rng = random.Random(20)
        train = blob_samples(rng, 12)
        test = blob_samples(rng, 6)
        for strategy in ("random", "uncertainty", "hierarchical"):
            c1 = run_curve(train, test, strategy, batch_size=6, budget=24, seed=5)
            c2 = run_curve(train, test, strategy, batch_size=6, budget=24, seed=5)
            assert c1 == c2

    def test_unknown_strategy_rejected(self):
        with pytest.raises(RequestError):
            run_curve([], [], "magic", batch_size=1, budget=1)


class TestMetricsAndFiles:
    def test_macro_precision_absent_class_warns_and_zeroes(self):
        y_true = [POS, POS, NEG]
        y_pred = [POS, POS, POS]
        with pytest.warns(UserWarning):
            macro, per_class = macro_precision(y_true, y_pred)
        assert per_class[POS] == pytest.approx(2 / 3)
        assert per_class[NEG] == 0.0
        assert per_class[NONREL] == 0.0
        assert macro == pytest.approx((2 / 3) / 3)

    def test_curve_csv_header(self):
        rng = random.Random(21)
        train = blob_samples(rng, 5)
        test = blob_samples(rng, 5)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            curve = run_curve(train, test, "random", batch_size=15, budget=15, seed=1)
        lines = curve_to_csv(curve).strip().split("\r\n")
        assert lines[0] == "n_labeled,macro_precision,p_nonrel,p_pos,p_neg"
        assert lines[1].startswith("15,")

    def test_load_labels(self, tmp_path):
        path = tmp_path / "labels.csv"
        path.write_text(
            "tweet_id,label\n"
            f"1,{NONREL}\n"
            f"2,{POS}\n"
            f"3,{NEG}\n"
        )
        assert load_labels(path) == {"1": NONREL, "2": POS, "3": NEG}
        bad = tmp_path / "bad.csv"
        bad.write_text("1,SomethingElse\n")
        with pytest.raises(ValueError):
            load_labels(bad)

    def test_split_sizes_mirror_reference_layout(self):
        samples = [LabeledSample(f"t{i:03d}", np.zeros(2), CLASSES[i % 3]) for i in range(421)]
        train, test = split_train_test(samples, seed=1)
        assert (len(train), len(test)) == (316, 105)
        assert {s.tweet_id for s in train}.isdisjoint({s.tweet_id for s in test})
        train2, test2 = split_train_test(samples, seed=1)
        assert [s.tweet_id for s in train2] == [s.tweet_id for s in train]
