"""Tests for dataset loading, synthesis and sharding."""

from __future__ import annotations

import struct

import numpy as np
import pandas as pd
import pytest

from src.learning import Dataset, draw_batch, load_idx, partition_iid, synth_blobs, write_csv, write_idx
from src.learning.data import IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC
from src.utils.exceptions import DatasetError, ValidationError


@pytest.fixture
def tiny_images():
    """Ten 2x2 images whose pixels survive the 8-bit round trip."""
    rng = np.random.default_rng(0)
    pixels = rng.integers(0, 256, size=(10, 4))
    return Dataset(pixels / 255.0, rng.integers(0, 10, size=10), 10)


@pytest.fixture
def idx_files(tmp_path, tiny_images):
    images, labels = tmp_path / "images.idx", tmp_path / "labels.idx"
    write_idx(tiny_images, images, labels)
    return images, labels


class TestDataset:
    """Tests for Dataset validation."""

    def test_row_mismatch(self):
        with pytest.raises(DatasetError):
            Dataset(np.zeros((3, 2)), np.zeros(2, dtype=np.int64), 2)

    def test_label_out_of_range(self):
        with pytest.raises(DatasetError, match="labels must lie"):
            Dataset(np.zeros((2, 2)), np.array([0, 2]), 2)

    def test_features_must_be_matrix(self):
        with pytest.raises(DatasetError):
            Dataset(np.zeros(3), np.zeros(3, dtype=np.int64), 2)

    def test_subset(self):
        d = synth_blobs(5, 2, 3, 0.1, seed=0)
        sub = d.subset(np.array([0, 4]))
        assert len(sub) == 2
        assert sub.input_dim == 3
        assert np.array_equal(sub.features[1], d.features[4])


class TestIdx:
    """Tests for the IDX reader and writer."""

    def test_round_trip(self, idx_files, tiny_images):
        loaded = load_idx(*idx_files)
        assert len(loaded) == 10
        assert loaded.input_dim == 4
        np.testing.assert_array_equal(loaded.labels, tiny_images.labels)
        np.testing.assert_allclose(loaded.features, tiny_images.features, atol=1e-12)
        assert loaded.features.min() >= 0.0 and loaded.features.max() <= 1.0

    def test_header_layout(self, idx_files):
        images, labels = idx_files
        assert struct.unpack(">4I", images.read_bytes()[:16]) == (IDX_IMAGES_MAGIC, 10, 2, 2)
        assert struct.unpack(">2I", labels.read_bytes()[:8]) == (IDX_LABELS_MAGIC, 10)

    def test_bad_label_magic(self, idx_files):
        images, labels = idx_files
        raw = labels.read_bytes()
        labels.write_bytes(struct.pack(">I", IDX_IMAGES_MAGIC) + raw[4:])
        with pytest.raises(DatasetError, match="Bad IDX magic") as e:
            load_idx(images, labels)
        assert e.value.details["path"] == str(labels)

    def test_truncated_payload(self, idx_files):
        images, labels = idx_files
        images.write_bytes(images.read_bytes()[:-3])
        with pytest.raises(DatasetError, match="truncated"):
            load_idx(images, labels)

    def test_truncated_header(self, idx_files):
        images, labels = idx_files
        labels.write_bytes(b"\x00\x00")
        with pytest.raises(DatasetError, match="header truncated"):
            load_idx(images, labels)

    def test_count_mismatch(self, idx_files):
        images, labels = idx_files
        raw = labels.read_bytes()
        labels.write_bytes(struct.pack(">2I", IDX_LABELS_MAGIC, 9) + raw[8:17])
        with pytest.raises(DatasetError, match="10 images but 9 labels"):
            load_idx(images, labels)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError, match="Cannot read"):
            load_idx(tmp_path / "nope", tmp_path / "nada")

    def test_non_square_write(self, tmp_path):
        d = Dataset(np.zeros((1, 3)), np.array([0]), 2)
        with pytest.raises(DatasetError, match="not a square"):
            write_idx(d, tmp_path / "i", tmp_path / "l")


class TestSynthBlobs:
    """Tests for synthetic Gaussian blobs."""

    def test_linearly_separable(self):
        """Test separability of tight blobs with a least-squares separator."""
        d = synth_blobs(100, 2, 2, 0.1, seed=3)
        assert len(d) == 200
        assert np.bincount(d.labels).tolist() == [100, 100]
        design = np.hstack([d.features, np.ones((len(d), 1))])
        target = np.where(d.labels == 0, 1.0, -1.0)
        w, *_ = np.linalg.lstsq(design, target, rcond=None)
        margins = target * (design @ w)
        assert margins.min() > 0

    def test_deterministic(self):
        a = synth_blobs(20, 3, 4, 0.5, seed=8)
        b = synth_blobs(20, 3, 4, 0.5, seed=8)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.labels, b.labels)

    def test_seed_changes_samples(self):
        a = synth_blobs(20, 2, 2, 0.5, seed=1)
        b = synth_blobs(20, 2, 2, 0.5, seed=2)
        assert not np.array_equal(a.features, b.features)

    def test_single_class(self):
        d = synth_blobs(7, 1, 2, 0.5, seed=0)
        assert d.labels.tolist() == [0] * 7

    def test_one_dimensional(self):
        d = synth_blobs(50, 2, 1, 0.05, seed=0)
        assert d.input_dim == 1
        assert np.all((d.features[:, 0] > 0) == (d.labels == 0))

    @pytest.mark.parametrize(
        "args", [(0, 2, 2, 0.1), (5, 0, 2, 0.1), (5, 2, 0, 0.1), (5, 2, 2, -0.1)]
    )
    def test_invalid(self, args):
        with pytest.raises(ValidationError):
            synth_blobs(*args, seed=0)


class TestPartition:
    """Tests for IID sharding."""

    def test_equal_shards(self):
        shards = partition_iid(synth_blobs(30000, 2, 2, 0.5, seed=0), 30, seed=1)
        assert [len(s) for s in shards] == [2000] * 30

    def test_union_is_original(self):
        d = synth_blobs(25, 3, 2, 0.5, seed=4)
        shards = partition_iid(d, 7, seed=2)
        assert sum(len(s) for s in shards) == len(d)
        assert max(len(s) for s in shards) - min(len(s) for s in shards) <= 1
        rows = {tuple(r) for s in shards for r in s.features}
        assert rows == {tuple(r) for r in d.features}
        combined = np.concatenate([s.labels for s in shards])
        assert np.bincount(combined).tolist() == np.bincount(d.labels).tolist()

    def test_singleton_shards(self):
        d = synth_blobs(3, 2, 2, 0.5, seed=0)
        assert [len(s) for s in partition_iid(d, 6, seed=0)] == [1] * 6

    def test_too_many_agents(self):
        with pytest.raises(DatasetError):
            partition_iid(synth_blobs(2, 2, 2, 0.5, seed=0), 5, seed=0)

    def test_deterministic(self):
        d = synth_blobs(10, 2, 2, 0.5, seed=0)
        a = partition_iid(d, 3, seed=9)
        b = partition_iid(d, 3, seed=9)
        assert all(np.array_equal(x.labels, y.labels) for x, y in zip(a, b))


class TestDrawBatch:
    """Tests for minibatch sampling."""

    def test_batch_without_replacement(self):
        shard = synth_blobs(10, 2, 2, 0.5, seed=0)
        batch = draw_batch(shard, 5, np.random.default_rng(0))
        assert len(batch) == 5
        assert len({tuple(r) for r in batch.features}) == 5

    def test_capped_at_shard_size(self):
        shard = synth_blobs(2, 2, 2, 0.5, seed=0)
        assert len(draw_batch(shard, 50, np.random.default_rng(0))) == 4

    def test_invalid_size(self):
        with pytest.raises(ValidationError):
            draw_batch(synth_blobs(2, 2, 2, 0.5, seed=0), 0, np.random.default_rng(0))


def test_write_csv_label_last(tmp_path):
    """Test the CSV dump: header row and the label in the last column."""
    d = synth_blobs(3, 2, 2, 0.5, seed=0)
    path = write_csv(d, tmp_path / "out" / "blobs.csv")
    frame = pd.read_csv(path, float_precision="round_trip")
    assert list(frame.columns) == ["x0", "x1", "label"]
    assert frame["label"].tolist() == d.labels.tolist()
    np.testing.assert_array_equal(frame[["x0", "x1"]].to_numpy(), d.features)
