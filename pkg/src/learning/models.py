"""Softmax classifiers over flat parameter vectors."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np
from numpy.typing import NDArray

from ..utils.exceptions import DimensionMismatchError, ValidationError
from .data import Dataset

ModelParams = NDArray[np.float64]
Shape = tuple[int, ...]

DEFAULT_HIDDEN = 100


def softmax(logits: NDArray[np.float64]) -> NDArray[np.float64]:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


class Model(ABC):
    """A classifier whose parameters live in one flat vector.

    Subclasses declare their layers in ``layers`` as (name, shape, fan_in);
    the flat vector is the concatenation of the layers in that order.
    """

    kind: str = ""

    def __init__(self, input_dim: int, num_classes: int):
        if input_dim < 1 or num_classes < 1:
            raise ValidationError(
                "input_dim and num_classes must be positive",
                field_name="dims",
                field_value=(input_dim, num_classes),
            )
        self.input_dim = input_dim
        self.num_classes = num_classes

    @property
    @abstractmethod
    def layers(self) -> list[tuple[str, Shape, int]]:
        """Layer name, shape and fan-in, in flat-vector order."""

    @property
    def num_params(self) -> int:
        return sum(math.prod(shape) for _, shape, _ in self.layers)

    def unpack(self, params: ModelParams) -> dict[str, NDArray[np.float64]]:
        """Split a flat vector into named layer views."""
        self._check_params(params)
        out: dict[str, NDArray[np.float64]] = {}
        offset = 0
        for name, shape, _ in self.layers:
            size = math.prod(shape)
            out[name] = params[offset : offset + size].reshape(shape)
            offset += size
        return out

    def init_params(self, rng: np.random.Generator) -> ModelParams:
        """Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer."""
        parts = []
        for _, shape, fan_in in self.layers:
            bound = 1.0 / math.sqrt(fan_in)
            parts.append(rng.uniform(-bound, bound, size=math.prod(shape)))
        return np.concatenate(parts)

    @abstractmethod
    def logits(self, params: ModelParams, features: NDArray[np.float64]) -> NDArray[np.float64]:
        """Class scores for each row of ``features``."""

    @abstractmethod
    def _backward(
        self,
        params: ModelParams,
        features: NDArray[np.float64],
        dlogits: NDArray[np.float64],
    ) -> ModelParams:
        """Flat gradient given the gradient of the loss w.r.t. the logits."""

    def loss(self, params: ModelParams, batch: Dataset) -> float:
        """Mean softmax cross-entropy over the batch."""
        self._check_batch(params, batch)
        z = self.logits(params, batch.features)
        z = z - z.max(axis=1, keepdims=True)
        log_probs = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
        return float(-log_probs[np.arange(len(batch)), batch.labels].mean())

    def gradient(self, params: ModelParams, batch: Dataset) -> ModelParams:
        """Gradient of ``loss``; length ``num_params``."""
        self._check_batch(params, batch)
        probs = softmax(self.logits(params, batch.features))
        probs[np.arange(len(batch)), batch.labels] -= 1.0
        return self._backward(params, batch.features, probs / len(batch))

    def predict(self, params: ModelParams, features: NDArray[np.float64]) -> NDArray[np.int64]:
        return np.argmax(self.logits(params, features), axis=1)

    def _check_params(self, params: ModelParams) -> None:
        if params.ndim != 1 or params.size != self.num_params:
            raise DimensionMismatchError(
                f"{self.kind} expects {self.num_params} parameters, got {params.shape}",
                expected=self.num_params,
                actual=int(params.size),
            )

    def _check_batch(self, params: ModelParams, batch: Dataset) -> None:
        self._check_params(params)
        if len(batch) == 0:
            raise ValidationError("Batch must not be empty", field_name="batch")
        if batch.input_dim != self.input_dim:
            raise DimensionMismatchError(
                f"{self.kind} expects {self.input_dim} input features, "
                f"got {batch.input_dim}",
                expected=self.input_dim,
                actual=batch.input_dim,
            )
        if batch.labels.max() >= self.num_classes:
            raise DimensionMismatchError(
                f"Label {int(batch.labels.max())} outside {self.num_classes} classes",
                expected=self.num_classes,
                actual=int(batch.labels.max()) + 1,
            )


class LogisticRegression(Model):
    """Multinomial logistic regression: logits = X W^T + b."""

    kind = "logistic"

    @property
    def layers(self) -> list[tuple[str, Shape, int]]:
        return [
            ("W", (self.num_classes, self.input_dim), self.input_dim),
            ("b", (self.num_classes,), self.input_dim),
        ]

    def logits(self, params: ModelParams, features: NDArray[np.float64]) -> NDArray[np.float64]:
        p = self.unpack(params)
        return features @ p["W"].T + p["b"]

    def _backward(
        self,
        params: ModelParams,
        features: NDArray[np.float64],
        dlogits: NDArray[np.float64],
    ) -> ModelParams:
        return np.concatenate([(dlogits.T @ features).ravel(), dlogits.sum(axis=0)])


class MLP(Model):
    """One hidden ReLU layer followed by a softmax output layer."""

    kind = "mlp"

    def __init__(self, input_dim: int, num_classes: int, hidden: int = DEFAULT_HIDDEN):
        super().__init__(input_dim, num_classes)
        if hidden < 1:
            raise ValidationError("hidden must be positive", field_name="hidden", field_value=hidden)
        self.hidden = hidden

    @property
    def layers(self) -> list[tuple[str, Shape, int]]:
        return [
            ("W1", (self.hidden, self.input_dim), self.input_dim),
            ("b1", (self.hidden,), self.input_dim),
            ("W2", (self.num_classes, self.hidden), self.hidden),
            ("b2", (self.num_classes,), self.hidden),
        ]

    def _forward(
        self, params: ModelParams, features: NDArray[np.float64]
    ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        p = self.unpack(params)
        pre = features @ p["W1"].T + p["b1"]
        hidden = np.maximum(pre, 0.0)
        return pre, hidden @ p["W2"].T + p["b2"]

    def logits(self, params: ModelParams, features: NDArray[np.float64]) -> NDArray[np.float64]:
        return self._forward(params, features)[1]

    def _backward(
        self,
        params: ModelParams,
        features: NDArray[np.float64],
        dlogits: NDArray[np.float64],
    ) -> ModelParams:
        p = self.unpack(params)
        pre, _ = self._forward(params, features)
        hidden = np.maximum(pre, 0.0)
        d_pre = (dlogits @ p["W2"]) * (pre > 0)
        return np.concatenate(
            [
                (d_pre.T @ features).ravel(),
                d_pre.sum(axis=0),
                (dlogits.T @ hidden).ravel(),
                dlogits.sum(axis=0),
            ]
        )


def build_model(
    kind: str, input_dim: int, num_classes: int, hidden: int = DEFAULT_HIDDEN
) -> Model:
    """Construct a model by kind name (``logistic`` or ``mlp``)."""
    if kind == "logistic":
        return LogisticRegression(input_dim, num_classes)
    if kind == "mlp":
        return MLP(input_dim, num_classes, hidden)
    raise ValidationError(f"Unknown model kind {kind!r}", field_name="model", field_value=kind)


def gradient(model: Model, params: ModelParams, batch: Dataset) -> ModelParams:
    """Mean cross-entropy gradient of ``model`` at ``params`` over ``batch``."""
    return model.gradient(params, batch)


def evaluate_accuracy(model: Model, params: ModelParams, testset: Dataset) -> float:
    """Fraction of test samples whose argmax prediction is correct."""
    if len(testset) == 0:
        raise ValidationError("Test set must not be empty", field_name="testset")
    if testset.input_dim != model.input_dim:
        raise DimensionMismatchError(
            "Test set feature width does not match the model",
            expected=model.input_dim,
            actual=testset.input_dim,
        )
    predictions = model.predict(params, testset.features)
    return float(np.mean(predictions == testset.labels))
