import numpy as np
import pytest

from poisonlab.data import (
    DataFormatError,
    Dataset,
    SplitSpec,
    filter_and_split,
    load_cifar10_binary,
    load_mnist_idx,
    make_gaussian_2d,
)
from poisonlab.models import accuracy, train

from conftest import write_cifar_batch, write_idx_pair


class TestDataset:
    def test_rejects_out_of_box_features(self):
        with pytest.raises(ValueError, match="inside"):
            Dataset([[2.0]], [0], [0.0], [1.0])

    def test_rejects_label_length_mismatch(self):
        with pytest.raises(ValueError, match="labels length"):
            Dataset([[0.5], [0.5]], [0], [0.0], [1.0])

    def test_features_are_immutable(self):
        ds = Dataset([[0.5, 0.5]], [0], [0.0, 0.0], [1.0, 1.0])
        with pytest.raises(ValueError):
            ds.features[0, 0] = 0.1

    def test_signed_labels_maps_max_class_to_plus_one(self):
        ds = Dataset([[0.1], [0.9]], [0, 1], [0.0], [1.0])
        assert ds.signed_labels().tolist() == [-1.0, 1.0]

    def test_csv_export_header_and_rows(self, tmp_path):
        ds = Dataset([[0.25, 0.75]], [3], [0.0, 0.0], [1.0, 1.0])
        path = tmp_path / "out.csv"
        ds.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "label,f0,f1"
        assert lines[1] == "3,0.25,0.75"


class TestMnistLoader:
    def test_valid_pair(self, tmp_path):
        images = np.zeros((2, 28, 28), dtype=np.uint8)
        images[0, 0, 0] = 255
        img, lab = write_idx_pair(tmp_path, images, [7, 1])
        ds = load_mnist_idx(img, lab)
        assert ds.n == 2 and ds.d == 784
        assert ds.features[0, 0] == 1.0  # byte 255 -> 1.0
        assert ds.features.min() >= 0.0 and ds.features.max() <= 1.0
        assert ds.labels.tolist() == [7, 1]

    def test_wrong_magic(self, tmp_path):
        img, lab = write_idx_pair(tmp_path, np.zeros((1, 28, 28)), [0])
        payload = bytearray(lab.read_bytes())
        payload[3] = 0x03  # labels file carrying the images magic
        lab.write_bytes(bytes(payload))
        with pytest.raises(DataFormatError, match="wrong magic"):
            load_mnist_idx(img, lab)

    def test_count_mismatch(self, tmp_path):
        img, _ = write_idx_pair(tmp_path, np.zeros((2, 28, 28)), [0, 1])
        other = tmp_path / "other"
        other.mkdir()
        _, lab = write_idx_pair(other, np.zeros((1, 28, 28)), [0])
        with pytest.raises(DataFormatError, match="does not match"):
            load_mnist_idx(img, lab)

    def test_truncated_pixels(self, tmp_path):
        img, lab = write_idx_pair(tmp_path, np.zeros((1, 28, 28)), [0])
        payload = img.read_bytes()
        img.write_bytes(payload[:-5])
        with pytest.raises(DataFormatError, match="truncated"):
            load_mnist_idx(img, lab)

    def test_byte_deterministic(self, tmp_path):
        rng = np.random.default_rng(0)
        images = rng.integers(0, 256, size=(3, 28, 28))
        img, lab = write_idx_pair(tmp_path, images, [1, 2, 3])
        a = load_mnist_idx(img, lab)
        b = load_mnist_idx(img, lab)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.labels, b.labels)


class TestCifarLoader:
    def test_valid_single_record(self, tmp_path):
        pixels = np.zeros((1, 3072), dtype=np.uint8)
        path = write_cifar_batch(tmp_path, [6], pixels)
        ds = load_cifar10_binary([path])
        assert ds.n == 1 and ds.d == 3072
        assert ds.labels[0] == 6
        assert ds.features[0, 0] == 0.0

    def test_truncated_record(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(bytes(3074))
        with pytest.raises(DataFormatError, match="truncated"):
            load_cifar10_binary([path])

    def test_label_out_of_range(self, tmp_path):
        path = write_cifar_batch(tmp_path, [10], np.zeros((1, 3072)))
        with pytest.raises(DataFormatError, match="label byte"):
            load_cifar10_binary([path])


class TestMakeGaussian2d:
    def test_deterministic(self):
        a = make_gaussian_2d(10, (0, 0), (5, 5), 0.5, seed=1)
        b = make_gaussian_2d(10, (0, 0), (5, 5), 0.5, seed=1)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.labels, b.labels)

    def test_single_point_per_class(self):
        ds = make_gaussian_2d(1, (0, 0), (5, 5), 0.5, seed=0)
        assert ds.n == 2

    def test_rejects_zero_count(self):
        with pytest.raises(ValueError):
            make_gaussian_2d(0, (0, 0), (5, 5), 0.5, seed=0)

    def test_separable_classes_train_accurately(self):
        train_ds = make_gaussian_2d(100, (0, 0), (5, 5), 0.5, seed=2)
        held_out = make_gaussian_2d(100, (0, 0), (5, 5), 0.5, seed=3)
        model, _ = train(train_ds, "hinge", 1.0)
        assert accuracy(model, held_out) > 0.99

    def test_bounds_cover_samples_with_margin(self):
        ds = make_gaussian_2d(50, (0, 0), (5, 5), 0.5, seed=4)
        assert (ds.features >= ds.lower_bound).all()
        assert (ds.features <= ds.upper_bound).all()
        assert np.allclose(ds.features.min(axis=0) - ds.lower_bound, 1.5)
        assert np.allclose(ds.upper_bound - ds.features.max(axis=0), 1.5)


class TestFilterAndSplit:
    def _source(self):
        rng = np.random.default_rng(5)
        X = rng.uniform(size=(500, 3))
        y = rng.integers(0, 5, size=500)
        return Dataset(X, y, np.zeros(3), np.ones(3))

    def test_sizes_and_disjointness(self):
        source = self._source()
        spec = SplitSpec(40, 60, 80, (4, 0), seed=9)
        tr, va, te = filter_and_split(source, spec)
        assert (tr.n, va.n, te.n) == (40, 60, 80)
        # splits must come from disjoint source rows
        rows = {tuple(r) for ds in (tr, va, te) for r in ds.features}
        assert len(rows) == 180

    def test_labels_remapped_in_spec_order(self):
        source = self._source()
        tr, _, _ = filter_and_split(source, SplitSpec(40, 60, 80, (4, 0), seed=9))
        assert set(tr.labels.tolist()) <= {0, 1}
        assert tr.class_map == {4: 0, 0: 1}

    def test_same_seed_identical(self):
        source = self._source()
        spec = SplitSpec(40, 60, 80, (4, 0), seed=9)
        a = filter_and_split(source, spec)
        b = filter_and_split(source, spec)
        for left, right in zip(a, b):
            assert np.array_equal(left.features, right.features)
            assert np.array_equal(left.labels, right.labels)

    def test_insufficient_samples(self):
        source = self._source()
        with pytest.raises(ValueError, match="insufficient"):
            filter_and_split(source, SplitSpec(400, 400, 400, (4, 0), seed=9))
