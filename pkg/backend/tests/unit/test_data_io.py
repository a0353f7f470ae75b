"""
Unit tests for synthetic data, the IDX reader and MNIST splits
"""
import itertools

import numpy as np
import pytest

from backend.services.common.errors import DataError, IdxParseError
from backend.services.data import (
    SUBSET_SIZES,
    expected_files,
    gen_linear_regression,
    gen_sparse_logit,
    load_idx,
    load_mnist,
    normalize_and_split,
    one_hot,
    sparse_logit_score,
)
from backend.services.tensor.core import RngStream


class TestLinearRegression:
    """Test the Gaussian regression generator"""

    def test_shapes(self, rng):
        dataset, weights = gen_linear_regression(rng=rng)
        assert dataset.inputs.shape == (400, 100)
        assert weights.shape == (100, 10)
        assert dataset.targets.shape == (400, 10)

    def test_noiseless_targets(self, rng):
        dataset, weights = gen_linear_regression(50, 4, 3, rng=rng)
        assert np.allclose(dataset.targets, dataset.inputs @ weights, rtol=0, atol=1e-12)

    def test_least_squares_recovers_weight(self, rng):
        dataset, weights = gen_linear_regression(30, 1, 1, rng=rng)
        solution, *_ = np.linalg.lstsq(dataset.inputs, dataset.targets, rcond=None)
        assert solution[0, 0] == pytest.approx(weights[0, 0], abs=1e-8)

    def test_same_seed_same_data(self):
        a, _ = gen_linear_regression(10, 3, 2, rng=RngStream(5))
        b, _ = gen_linear_regression(10, 3, 2, rng=RngStream(5))
        assert np.array_equal(a.inputs, b.inputs) and np.array_equal(a.targets, b.targets)


class TestSparseLogit:
    """Test the sparse logistic problem"""

    def test_corners(self):
        zeros = np.zeros((1, 20))
        ones = np.zeros((1, 20))
        ones[0, :3] = 1.0
        assert sparse_logit_score(zeros)[0] == pytest.approx(-4.8)
        assert sparse_logit_score(ones)[0] == pytest.approx(5.2)

    def test_score_never_zero(self):
        corners = np.array(list(itertools.product([0.0, 1.0], repeat=3)))
        scores = sparse_logit_score(np.hstack([corners, np.zeros((8, 17))]))
        assert np.all(np.abs(scores) > 0.5)
        assert sorted(np.round(scores, 6).tolist()) == [-4.8, -2.8, -0.8, -0.8, 1.2, 1.2, 3.2, 5.2]

    def test_labels_follow_score(self, rng):
        splits = gen_sparse_logit(rng=rng)
        train = splits.train
        assert train.inputs.shape == (400, 20) and splits.test.n == 3000
        assert set(np.unique(train.inputs)) <= {0.0, 1.0}
        assert np.array_equal(train.targets[:, 0], (sparse_logit_score(train.inputs) > 0).astype(float))

    def test_class_balance(self, rng):
        corners = np.array(list(itertools.product([0.0, 1.0], repeat=3)))
        p_exact = np.mean(sparse_logit_score(np.hstack([corners, np.zeros((8, 17))])) > 0)
        splits = gen_sparse_logit(n_train=20000, n_test=0, rng=rng)
        freq = splits.train.targets.mean()
        assert abs(freq - p_exact) < 4 * np.sqrt(p_exact * (1 - p_exact) / 20000)

    def test_validation_split(self, rng):
        splits = gen_sparse_logit(n_train=40, n_test=30, rng=rng, n_val=20)
        assert splits.val.n == 20 and splits.val.split == "val"


class TestIdxLoader:
    """Test the IDX binary reader"""

    def test_two_image_fixture(self, write_idx):
        images = np.array([[[0, 1], [2, 3]], [[255, 128], [64, 7]]])
        path = write_idx("images-idx3-ubyte", images)
        matrix = load_idx(path)
        assert matrix.shape == (2, 4)
        assert np.array_equal(matrix, [[0, 1, 2, 3], [255, 128, 64, 7]])

    def test_labels(self, write_idx):
        matrix = load_idx(write_idx("labels-idx1-ubyte", np.array([3, 1, 4])))
        assert matrix.shape == (3, 1)
        assert matrix[:, 0].tolist() == [3.0, 1.0, 4.0]

    def test_gzip(self, write_idx):
        matrix = load_idx(write_idx("labels-idx1-ubyte.gz", np.array([9, 8]), compress=True))
        assert matrix[:, 0].tolist() == [9.0, 8.0]

    def test_values_in_byte_range(self, write_idx):
        data = np.random.default_rng(0).integers(0, 256, (5, 3, 3))
        matrix = load_idx(write_idx("x-idx3-ubyte", data))
        assert matrix.min() >= 0 and matrix.max() <= 255

    def test_truncated_by_one_byte(self, write_idx):
        path = write_idx("images-idx3-ubyte", np.ones((2, 2, 2)))
        path.write_bytes(path.read_bytes()[:-1])
        with pytest.raises(IdxParseError) as exc:
            load_idx(path)
        assert exc.value.offset == 4 + 12 + 7

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad"
        path.write_bytes(b"\x12\x34\x08\x01\x00\x00\x00\x01\x05")
        with pytest.raises(IdxParseError) as exc:
            load_idx(path)
        assert exc.value.offset == 0

    def test_unknown_type(self, tmp_path):
        path = tmp_path / "bad"
        path.write_bytes(b"\x00\x00\x07\x01\x00\x00\x00\x01\x05")
        with pytest.raises(IdxParseError) as exc:
            load_idx(path)
        assert exc.value.offset == 2

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "short"
        path.write_bytes(b"\x00\x00\x08\x03\x00\x00")
        with pytest.raises(IdxParseError):
            load_idx(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_idx(tmp_path / "absent")


class TestSplits:
    """Test normalization and subset splits"""

    def test_pixel_scaling_and_one_hot(self, rng):
        images = np.array([[0.0, 255.0]] * 12)
        labels = np.arange(12) % 10
        splits = normalize_and_split(images, labels, 5, rng, train_pool=10)
        assert splits.train.inputs.min() == 0.0 and splits.train.inputs.max() == 1.0
        assert np.allclose(splits.train.targets.sum(axis=1), 1.0)
        assert splits.val.n == 2

    def test_subset_drawn_from_pool_without_replacement(self, rng):
        images = np.arange(30, dtype=float).reshape(-1, 1)
        splits = normalize_and_split(images, np.zeros(30), 15, rng, train_pool=20)
        rows = (splits.train.inputs[:, 0] * 255).round().astype(int)
        assert len(set(rows)) == 15
        assert rows.max() < 20
        val_rows = set((splits.val.inputs[:, 0] * 255).round().astype(int))
        assert val_rows == set(range(20, 30))
        assert not val_rows & set(rows)

    def test_train_n_too_large(self, rng):
        with pytest.raises(DataError):
            normalize_and_split(np.zeros((30, 2)), np.zeros(30), 21, rng, train_pool=20)

    def test_bad_labels(self):
        with pytest.raises(DataError):
            one_hot(np.array([0, 10]))

    def test_subset_sizes(self):
        assert SUBSET_SIZES == (3000, 5000, 8000, 20000, 50000)

    def test_expected_files(self):
        files = expected_files("fashion_mnist")
        assert files["train_images"] == "fashion_mnist/train-images-idx3-ubyte"
        assert len(files) == 4

    def test_load_mnist_layout(self, fake_mnist, rng):
        data_dir = fake_mnist()
        splits = load_mnist(data_dir, 30, rng, train_pool=50)
        assert (splits.train.n, splits.val.n, splits.test.n) == (30, 10, 20)
        assert splits.train.inputs.shape[1] == 784
        assert splits.test.targets.shape == (20, 10)

    def test_load_mnist_missing(self, tmp_path, rng):
        with pytest.raises(DataError):
            load_mnist(tmp_path, 10, rng)
