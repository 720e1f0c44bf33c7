"""Tests for the softmax classifiers."""

from __future__ import annotations

import numpy as np
import pytest

from src.learning import (
    MLP,
    Dataset,
    LogisticRegression,
    build_model,
    evaluate_accuracy,
    gradient,
    synth_blobs,
)
from src.utils.exceptions import DimensionMismatchError, ValidationError


def _finite_difference(model, params, batch, step=1e-5):
    grad = np.zeros_like(params)
    for idx in range(params.size):
        bump = np.zeros_like(params)
        bump[idx] = step
        grad[idx] = (model.loss(params + bump, batch) - model.loss(params - bump, batch)) / (2 * step)
    return grad


def _random_instance(seed, kind):
    rng = np.random.default_rng(seed)
    input_dim = int(rng.integers(1, 5))
    classes = int(rng.integers(2, 5))
    size = int(rng.integers(1, 6))
    model = build_model(kind, input_dim, classes, hidden=6)
    params = rng.normal(0.0, 0.8, size=model.num_params)
    batch = Dataset(
        rng.normal(size=(size, input_dim)), rng.integers(0, classes, size=size), classes
    )
    return model, params, batch


class TestModelShapes:
    """Tests for parameter layout."""

    def test_logistic_param_count(self):
        assert LogisticRegression(784, 10).num_params == 784 * 10 + 10

    def test_mlp_default_hidden(self):
        model = MLP(784, 10)
        assert model.hidden == 100
        assert model.num_params == 784 * 100 + 100 + 100 * 10 + 10

    def test_unpack_views(self):
        model = LogisticRegression(3, 2)
        parts = model.unpack(np.arange(8, dtype=float))
        assert parts["W"].shape == (2, 3)
        assert parts["b"].tolist() == [6.0, 7.0]

    def test_init_bounds(self):
        model = MLP(16, 3, hidden=4)
        params = model.init_params(np.random.default_rng(0))
        parts = model.unpack(params)
        assert np.all(np.abs(parts["W1"]) <= 1 / 4)
        assert np.all(np.abs(parts["W2"]) <= 1 / 2)

    def test_init_is_seeded(self):
        model = LogisticRegression(4, 3)
        a = model.init_params(np.random.default_rng(5))
        b = model.init_params(np.random.default_rng(5))
        assert np.array_equal(a, b)

    def test_build_model_unknown(self):
        with pytest.raises(ValidationError, match="Unknown model kind"):
            build_model("cnn", 4, 2)

    def test_invalid_dims(self):
        with pytest.raises(ValidationError):
            MLP(4, 2, hidden=0)
        with pytest.raises(ValidationError):
            LogisticRegression(0, 2)


class TestGradient:
    """Tests for analytical gradients."""

    def test_symmetric_batch_has_zero_gradient(self):
        """Test that zero params on classes symmetric about the origin give zero gradient."""
        model = LogisticRegression(2, 2)
        batch = Dataset(
            np.array([[1.0, 2.0], [-1.0, -2.0], [3.0, 1.0], [-3.0, -1.0]]),
            np.array([0, 0, 1, 1]),
            2,
        )
        g = gradient(model, np.zeros(model.num_params), batch)
        np.testing.assert_allclose(g, 0.0, atol=1e-12)

    def test_duplicated_batch(self):
        model = LogisticRegression(3, 2)
        params = np.random.default_rng(1).normal(size=model.num_params)
        single = Dataset(np.array([[0.5, -1.0, 2.0]]), np.array([1]), 2)
        double = Dataset(np.repeat(single.features, 2, axis=0), np.array([1, 1]), 2)
        np.testing.assert_allclose(
            gradient(model, params, double), gradient(model, params, single), rtol=1e-12
        )

    @pytest.mark.parametrize("kind", ["logistic", "mlp"])
    @pytest.mark.parametrize("seed", range(20))
    def test_matches_finite_differences(self, kind, seed):
        model, params, batch = _random_instance(seed, kind)
        analytical = gradient(model, params, batch)
        assert analytical.shape == (model.num_params,)
        np.testing.assert_allclose(
            analytical, _finite_difference(model, params, batch), rtol=1e-4, atol=1e-7
        )

    def test_empty_batch(self):
        model = LogisticRegression(2, 2)
        empty = Dataset(np.zeros((0, 2)), np.zeros(0, dtype=np.int64), 2)
        with pytest.raises(ValidationError, match="empty"):
            gradient(model, np.zeros(model.num_params), empty)

    def test_feature_width_mismatch(self):
        model = LogisticRegression(3, 2)
        batch = Dataset(np.zeros((1, 2)), np.array([0]), 2)
        with pytest.raises(DimensionMismatchError) as e:
            gradient(model, np.zeros(model.num_params), batch)
        assert e.value.details == {"expected": 3, "actual": 2}

    def test_params_length_mismatch(self):
        model = LogisticRegression(2, 2)
        batch = Dataset(np.zeros((1, 2)), np.array([0]), 2)
        with pytest.raises(DimensionMismatchError):
            gradient(model, np.zeros(5), batch)

    def test_label_outside_model_classes(self):
        model = LogisticRegression(2, 2)
        batch = Dataset(np.zeros((1, 2)), np.array([2]), 3)
        with pytest.raises(DimensionMismatchError, match="Label 2"):
            gradient(model, np.zeros(model.num_params), batch)


class TestEvaluateAccuracy:
    """Tests for evaluate_accuracy."""

    def test_memorized_sample(self):
        model = LogisticRegression(2, 2)
        params = np.array([0.0, 0.0, 0.0, 0.0, 0.0, 5.0])
        testset = Dataset(np.array([[0.3, -0.7]]), np.array([1]), 2)
        assert evaluate_accuracy(model, params, testset) == 1.0

    def test_random_params_near_chance(self):
        """Test that random parameters score about 1/k on balanced classes."""
        testset = synth_blobs(100, 3, 2, 0.3, seed=0)
        model = LogisticRegression(2, 3)
        scores = [
            evaluate_accuracy(model, model.init_params(np.random.default_rng(s)), testset)
            for s in range(300)
        ]
        assert np.mean(scores) == pytest.approx(1 / 3, abs=0.06)
        assert all(0.0 <= s <= 1.0 for s in scores)

    def test_empty_testset(self):
        model = LogisticRegression(2, 2)
        empty = Dataset(np.zeros((0, 2)), np.zeros(0, dtype=np.int64), 2)
        with pytest.raises(ValidationError):
            evaluate_accuracy(model, np.zeros(model.num_params), empty)

    def test_model_mismatch(self):
        testset = synth_blobs(5, 2, 2, 0.1, seed=0)
        with pytest.raises(DimensionMismatchError):
            evaluate_accuracy(LogisticRegression(2, 2), np.zeros(3), testset)
        with pytest.raises(DimensionMismatchError):
            evaluate_accuracy(LogisticRegression(4, 2), np.zeros(10), testset)
