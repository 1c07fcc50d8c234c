import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tisvm.kernels import KernelSpec, Linear, Polynomial, gram_matrix, kernel_block
from tisvm.svm import (HARD_MARGIN_C, SingleClassError, augment_dataset, binary_models,
                       decision_from_kernel, decision_function, full_alpha, geometric_margin,
                       kkt_violation, load_model, model_summary, predict, predict_multiclass,
                       sign_labels, solve_dual_smo, train_binary, train_multiclass, vote)
from tisvm.transforms import identity_group, translation_group

TOY_X = np.array([[[1.0, 2.0]], [[5.0, 2.0]]])
TOY_Y = np.array([1, -1])
RAW = KernelSpec(Linear(normalized=False))


def toy_model():
    return train_binary(TOY_X, TOY_Y, RAW, C=None, tol=1e-12)


class TestSmo:
    def test_two_point_analytic(self):
        m = toy_model()
        np.testing.assert_allclose(full_alpha(m), [0.125, 0.125], atol=1e-6)
        assert m.bias == pytest.approx(1.5, abs=1e-6)
        assert m.C == HARD_MARGIN_C

    def test_two_point_predictions(self):
        m = toy_model()
        label, score = predict(m, np.array([[0.0, 2.0]]))
        assert label == 1 and score == pytest.approx(1.5, abs=1e-6)
        assert predict(m, np.array([[3.0, 7.0]]))[1] == pytest.approx(0.0, abs=1e-6)

    def test_support_vector_on_margin(self):
        m = toy_model()
        scores = decision_function(m, TOY_X)
        np.testing.assert_allclose(np.abs(scores), 1.0, atol=1e-6)

    def test_augmented_toy(self):
        X, y = augment_dataset(TOY_X, TOY_Y, translation_group())
        m = train_binary(X, y, RAW, C=None, tol=1e-12)
        assert decision_function(m, np.array([[[3.0, 3.0]]]))[0] == pytest.approx(-0.5, abs=1e-6)
        assert geometric_margin(m) == pytest.approx(math.sqrt(2), rel=1e-6)

    def test_duplicate_distance_margin(self):
        d = 3.0
        X = np.array([[[0.0, 0.0]], [[d, 0.0]]])
        m = train_binary(X, [1, -1], RAW, C=None, tol=1e-12)
        assert 2 * geometric_margin(m) == pytest.approx(d, rel=1e-6)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 31), st.sampled_from([0.1, 1.0, 10.0]))
    def test_kkt_and_box_constraints(self, seed, C):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(24, 3, 3))
        y = np.where(X[:, 0, 0] + 0.3 * rng.normal(size=24) > 0, 1, -1)
        if len(set(y)) < 2:
            y[0] = -y[0]
        gram = gram_matrix(X, KernelSpec(Polynomial(None, 2)))
        m = solve_dual_smo(gram, y, C=C, tol=1e-6)
        a = full_alpha(m)
        assert np.all(a >= 0) and np.all(a <= C + 1e-12)
        assert abs(a @ y) < 1e-9
        assert kkt_violation(a, gram.entries, y, C) <= 1e-6
        assert m.kkt_violation <= 1e-6

    def test_matches_reference_qp(self, rng):
        # compare the dual objective against scipy's SLSQP on a small problem
        from scipy.optimize import minimize

        X = rng.normal(size=(12, 2, 2))
        y = np.where(rng.random(12) > 0.5, 1.0, -1.0)
        y[:2] = [1, -1]
        K = gram_matrix(X, KernelSpec(Polynomial(0.5, 2))).entries
        C = 2.0
        Q = (y[:, None] * y[None, :]) * K
        obj = lambda a: 0.5 * a @ Q @ a - a.sum()
        ref = minimize(obj, np.zeros(12), jac=lambda a: Q @ a - 1, bounds=[(0, C)] * 12,
                       constraints={"type": "eq", "fun": lambda a: a @ y, "jac": lambda a: y},
                       method="SLSQP", options={"ftol": 1e-14, "maxiter": 1000})
        m = solve_dual_smo(K, y, C=C, tol=1e-8)
        assert obj(full_alpha(m)) == pytest.approx(ref.fun, rel=1e-6, abs=1e-8)

    def test_single_class(self):
        with pytest.raises(SingleClassError):
            solve_dual_smo(np.eye(3), [1, 1, 1])

    def test_bad_labels(self):
        with pytest.raises(ValueError):
            solve_dual_smo(np.eye(2), [0, 1])
        with pytest.raises(ValueError):
            solve_dual_smo(np.eye(2), [1, -1, 1])

    def test_indefinite_flag(self):
        m = solve_dual_smo(np.array([[1.0, 2.0], [2.0, 1.0]]), [1, -1], C=1.0)
        assert m.indefinite

    def test_dimension_mismatch_at_prediction(self):
        with pytest.raises(ValueError):
            decision_function(toy_model(), np.zeros((1, 1, 3)))

    def test_decision_from_kernel(self, rng):
        m = toy_model()
        X = rng.normal(size=(5, 1, 2))
        K = kernel_block(RAW, TOY_X, X)
        np.testing.assert_allclose(decision_from_kernel(m, K), decision_function(m, X), rtol=1e-12)

    def test_sign_ties_positive(self):
        np.testing.assert_array_equal(sign_labels([0.0, -1e-300, 2.0]), [1, -1, 1])


class TestAugmentation:
    def test_identity_unchanged(self, rng):
        X = rng.normal(size=(4, 3, 3))
        out, y = augment_dataset(X, [0, 1, 0, 1], identity_group())
        np.testing.assert_array_equal(out, X)

    def test_toy_adds_swap(self):
        out, y = augment_dataset(TOY_X[:1], [1], translation_group())
        np.testing.assert_array_equal(out[:, 0], [[1.0, 2.0], [2.0, 1.0]])

    def test_count(self, rng):
        out, y = augment_dataset(rng.normal(size=(10, 4, 4)), np.arange(10), translation_group())
        assert out.shape == (160, 4, 4)
        np.testing.assert_array_equal(y, np.repeat(np.arange(10), 16))

    def test_equivalent_to_average_kernel(self, rng):
        X = rng.random((8, 3, 4))
        y = np.array([1, -1] * 4)
        g = translation_group()
        C = 0.5
        aug_x, aug_y = augment_dataset(X, y, g)
        aug = train_binary(aug_x, aug_y, KernelSpec(Linear()), C=C, tol=1e-10)
        avg = train_binary(X, y, KernelSpec(Linear(), "average", g), C=C * g.size((3, 4)), tol=1e-10)
        T = rng.random((20, 3, 4))
        np.testing.assert_allclose(decision_function(avg, T), decision_function(aug, T), atol=1e-6)


def clusters(rng, per=10):
    centers = np.array([[0.0, 0.0], [6.0, 0.0], [0.0, 6.0]])
    X = np.concatenate([c + rng.normal(scale=0.5, size=(per, 2)) for c in centers])
    return X[:, None, :], np.repeat([3, 5, 7], per)


class TestMulticlass:
    def test_separable_clusters(self, rng):
        X, y = clusters(rng)
        m = train_multiclass(X, y, KernelSpec(Linear(False)), C=10.0)
        assert m.classes == (3, 5, 7)
        assert len(m.models) == 3
        np.testing.assert_array_equal(predict_multiclass(m, X), y)

    def test_two_classes_match_binary(self, rng):
        X, y = clusters(rng)
        keep = y != 7
        X, y = X[keep], y[keep]
        spec = KernelSpec(Polynomial(0.5, 2))
        m = train_multiclass(X, y, spec, C=1.0)
        b = train_binary(X, np.where(y == 3, 1, -1), spec, C=1.0)
        T = rng.normal(scale=4, size=(30, 1, 2))
        expected = np.where(decision_function(b, T) >= 0, 3, 5)
        np.testing.assert_array_equal(predict_multiclass(m, T), expected)

    def test_vote_tie_breaks(self):
        classes = (0, 1, 2)
        pairs = [(0, 1), (0, 2), (1, 2)]
        # cyclic 1-1-1 vote: summed scores decide
        scores = np.array([[1.0], [-2.0], [0.5]])
        assert vote(classes, pairs, scores)[0] == 2
        # full tie in votes and sums: smallest class
        scores = np.array([[1.0], [-1.0], [1.0]])
        assert vote(classes, pairs, scores)[0] == 0

    def test_precomputed_gram(self, rng):
        X, y = clusters(rng)
        spec = KernelSpec(Linear(False))
        a = train_multiclass(X, y, spec, gram=gram_matrix(X, spec).entries)
        b = train_multiclass(X, y, spec)
        for p in a.models:
            np.testing.assert_array_equal(a.models[p].alpha, b.models[p].alpha)

    def test_workers_identical(self, rng):
        X, y = clusters(rng)
        spec = KernelSpec(Polynomial(0.2, 3))
        a = train_multiclass(X, y, spec, workers=1)
        b = train_multiclass(X, y, spec, workers=3)
        for ma, mb in zip(binary_models(a), binary_models(b)):
            assert ma.alpha.tobytes() == mb.alpha.tobytes() and ma.bias == mb.bias


class TestModelIo:
    def test_binary_round_trip(self, tmp_path):
        m = toy_model()
        from tisvm.svm import save_model

        save_model(tmp_path / "m.bin", m)
        back = load_model(tmp_path / "m.bin")
        assert back.bias == m.bias
        np.testing.assert_array_equal(back.alpha, m.alpha)
        assert back.spec == m.spec
        assert "bias: 1.5" in model_summary(back)

    def test_multiclass_round_trip(self, tmp_path, rng):
        from tisvm.svm import save_model

        X, y = clusters(rng)
        spec = KernelSpec(Polynomial(0.2, 2), "best", translation_group())
        m = train_multiclass(X, y, spec)
        save_model(tmp_path / "mc.bin", m)
        back = load_model(tmp_path / "mc.bin")
        T = rng.normal(scale=3, size=(15, 1, 2))
        np.testing.assert_array_equal(predict_multiclass(back, T), predict_multiclass(m, T))
        assert "one-vs-one" in model_summary(back)

    def test_bad_magic(self, tmp_path):
        (tmp_path / "x.bin").write_bytes(b"NOTAMODEL")
        with pytest.raises(ValueError):
            load_model(tmp_path / "x.bin")
