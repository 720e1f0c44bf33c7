"""Datasets: IDX loading, synthetic blobs, IID sharding and minibatches."""

from __future__ import annotations

import csv
import logging
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from ..utils.exceptions import DatasetError, ValidationError

logger = logging.getLogger(__name__)

IDX_IMAGES_MAGIC = 2051
IDX_LABELS_MAGIC = 2049
MNIST_CLASSES = 10


@dataclass(frozen=True)
class Dataset:
    """Row-aligned features and integer labels."""

    features: NDArray[np.float64]
    labels: NDArray[np.int64]
    num_classes: int

    def __post_init__(self) -> None:
        if self.features.ndim != 2:
            raise DatasetError(f"features must be 2-D, got shape {self.features.shape}")
        if self.labels.ndim != 1 or len(self.labels) != len(self.features):
            raise DatasetError(
                f"{len(self.features)} feature rows but labels have shape {self.labels.shape}"
            )
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise DatasetError(f"labels must lie in [0, {self.num_classes})")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def input_dim(self) -> int:
        return int(self.features.shape[1])

    def subset(self, indices: NDArray[np.int64]) -> Dataset:
        return Dataset(self.features[indices], self.labels[indices], self.num_classes)


def _read_idx(path: Path, magic: int, dims: int) -> tuple[bytes, tuple[int, ...]]:
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise DatasetError(f"Cannot read IDX file: {e}", path=str(path)) from e

    header_size = 4 * (1 + dims)
    if len(raw) < header_size:
        raise DatasetError("IDX header truncated", path=str(path))
    header = struct.unpack(f">{1 + dims}I", raw[:header_size])
    if header[0] != magic:
        raise DatasetError(
            f"Bad IDX magic {header[0]}, expected {magic}", path=str(path)
        )
    shape = tuple(int(v) for v in header[1:])
    payload = raw[header_size:]
    if len(payload) < math.prod(shape):
        raise DatasetError(
            f"IDX payload truncated: {len(payload)} bytes for shape {shape}",
            path=str(path),
        )
    return payload[: math.prod(shape)], shape


def load_idx(
    images_path: str | Path,
    labels_path: str | Path,
    num_classes: int = MNIST_CLASSES,
) -> Dataset:
    """Load an IDX image/label pair; pixels are scaled to [0, 1].

    Raises:
        DatasetError: On bad magic numbers, truncated files or a count mismatch
    """
    images_path, labels_path = Path(images_path), Path(labels_path)
    image_bytes, (count, rows, cols) = _read_idx(images_path, IDX_IMAGES_MAGIC, 3)
    label_bytes, (label_count,) = _read_idx(labels_path, IDX_LABELS_MAGIC, 1)
    if count != label_count:
        raise DatasetError(
            f"{count} images but {label_count} labels", path=str(labels_path)
        )

    features = np.frombuffer(image_bytes, dtype=np.uint8).reshape(count, rows * cols)
    labels = np.frombuffer(label_bytes, dtype=np.uint8).astype(np.int64)
    logger.info(f"Loaded {count} IDX samples of {rows}x{cols} from {images_path.name}")
    return Dataset(features.astype(np.float64) / 255.0, labels, num_classes)


def write_idx(dataset: Dataset, images_path: str | Path, labels_path: str | Path) -> None:
    """Write a dataset of square 8-bit images back to IDX files."""
    side = math.isqrt(dataset.input_dim)
    if side * side != dataset.input_dim:
        raise DatasetError(f"Feature width {dataset.input_dim} is not a square image")
    pixels = np.clip(np.rint(dataset.features * 255.0), 0, 255).astype(np.uint8)
    Path(images_path).write_bytes(
        struct.pack(">4I", IDX_IMAGES_MAGIC, len(dataset), side, side) + pixels.tobytes()
    )
    Path(labels_path).write_bytes(
        struct.pack(">2I", IDX_LABELS_MAGIC, len(dataset))
        + dataset.labels.astype(np.uint8).tobytes()
    )


def _class_centers(classes: int, input_dim: int, scale: float) -> NDArray[np.float64]:
    centers = np.zeros((classes, input_dim))
    for c in range(classes):
        if input_dim == 1:
            centers[c, 0] = scale if c % 2 == 0 else -scale
        else:
            angle = 2 * math.pi * c / classes
            centers[c, 0] = scale * math.cos(angle)
            centers[c, 1] = scale * math.sin(angle)
    return centers


def synth_blobs(
    n_per_class: int,
    classes: int,
    input_dim: int,
    spread: float,
    seed: int,
    scale: float = 1.0,
) -> Dataset:
    """Isotropic Gaussian blobs around centers evenly spaced on a circle.

    Centers depend only on ``classes``, ``input_dim`` and ``scale``, so a
    train and a test draw with different seeds share the same classes. For
    two classes in two dimensions the centers are (1, 0) and (-1, 0).
    """
    if n_per_class < 1 or classes < 1 or input_dim < 1:
        raise ValidationError(
            "n_per_class, classes and input_dim must be positive",
            field_name="synthetic",
            field_value=(n_per_class, classes, input_dim),
        )
    if spread < 0:
        raise ValidationError("spread must be non-negative", field_name="spread", field_value=spread)

    rng = np.random.default_rng(seed)
    centers = _class_centers(classes, input_dim, scale)
    labels = np.repeat(np.arange(classes, dtype=np.int64), n_per_class)
    features = centers[labels] + spread * rng.standard_normal((len(labels), input_dim))
    order = rng.permutation(len(labels))
    return Dataset(features[order], labels[order], classes)


def partition_iid(dataset: Dataset, n_agents: int, seed: int) -> list[Dataset]:
    """Shuffle and split into ``n_agents`` near-equal disjoint shards."""
    if n_agents < 1:
        raise ValidationError("n_agents must be positive", field_name="n_agents", field_value=n_agents)
    if len(dataset) < n_agents:
        raise DatasetError(f"{len(dataset)} samples cannot be split across {n_agents} agents")
    order = np.random.default_rng(seed).permutation(len(dataset))
    return [dataset.subset(part) for part in np.array_split(order, n_agents)]


def draw_batch(shard: Dataset, batch_size: int, rng: np.random.Generator) -> Dataset:
    """Uniform minibatch without replacement; capped at the shard size."""
    if batch_size < 1:
        raise ValidationError(
            "batch_size must be positive", field_name="batch_size", field_value=batch_size
        )
    size = min(batch_size, len(shard))
    return shard.subset(rng.choice(len(shard), size=size, replace=False))


def write_csv(dataset: Dataset, path: str | Path) -> Path:
    """Write ``x0,x1,...,label`` rows with a header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow([f"x{i}" for i in range(dataset.input_dim)] + ["label"])
        for label, row in zip(dataset.labels, dataset.features):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])
    return path
