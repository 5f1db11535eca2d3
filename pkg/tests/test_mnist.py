import struct

import numpy as np
import pytest

from optosnn.mnist import (
    IdxFormatError,
    MnistDataset,
    load_idx_images,
    load_idx_labels,
    load_mnist,
)


def write_idx_images(path, images):
    """Independent fixture writer: big-endian header + raw bytes."""
    images = np.asarray(images, dtype=np.uint8)
    n, rows, cols = images.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", 0x00000803, n, rows, cols))
        fh.write(images.tobytes())


def write_idx_labels(path, labels):
    labels = np.asarray(labels, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", 0x00000801, len(labels)))
        fh.write(labels.tobytes())


@pytest.fixture
def small_files(tmp_path):
    rng = np.random.default_rng(0)
    images = rng.integers(0, 256, size=(3, 4, 5), dtype=np.uint8)
    labels = np.array([7, 0, 9], dtype=np.uint8)
    img_path = tmp_path / "images.idx"
    lbl_path = tmp_path / "labels.idx"
    write_idx_images(img_path, images)
    write_idx_labels(lbl_path, labels)
    return img_path, lbl_path, images, labels


def test_parses_known_pixel_bytes(small_files):
    img_path, _, images, _ = small_files
    got = load_idx_images(img_path)
    np.testing.assert_array_equal(got, images)


def test_parses_labels(small_files):
    _, lbl_path, _, labels = small_files
    np.testing.assert_array_equal(load_idx_labels(lbl_path), labels)


def test_load_mnist_pairs(small_files):
    img_path, lbl_path, images, labels = small_files
    ds = load_mnist(img_path, lbl_path, split="toy")
    assert len(ds) == 3
    assert ds.split == "toy"
    norm = ds.normalized()
    assert norm.shape == (3, 20)
    assert norm.max() <= 1.0 and norm.min() >= 0.0
    np.testing.assert_allclose(norm[0], images[0].ravel() / 255.0)


def test_bad_magic_rejected(tmp_path, small_files):
    img_path, _, images, _ = small_files
    bad = tmp_path / "bad.idx"
    raw = bytearray(open(img_path, "rb").read())
    raw[3] = 0x02  # magic 0x00000802
    bad.write_bytes(bytes(raw))
    with pytest.raises(IdxFormatError, match="bad magic"):
        load_idx_images(bad)


def test_truncated_file_reports_offset(tmp_path, small_files):
    img_path, _, _, _ = small_files
    raw = open(img_path, "rb").read()
    trunc = tmp_path / "trunc.idx"
    trunc.write_bytes(raw[:30])
    with pytest.raises(IdxFormatError, match="truncated at byte 30"):
        load_idx_images(trunc)


def test_count_mismatch_reported(tmp_path, small_files):
    img_path, _, _, _ = small_files
    lbl2 = tmp_path / "short-labels.idx"
    write_idx_labels(lbl2, [1, 2])
    with pytest.raises(IdxFormatError, match="count mismatch"):
        load_mnist(img_path, lbl2)


def test_label_file_magic_checked(small_files):
    img_path, lbl_path, _, _ = small_files
    with pytest.raises(IdxFormatError, match="bad magic"):
        load_idx_labels(img_path)


def test_dataset_subset():
    ds = MnistDataset(images=np.zeros((10, 2, 2), dtype=np.uint8),
                      labels=np.arange(10, dtype=np.uint8))
    sub = ds.subset(3, offset=2)
    assert len(sub) == 3
    assert sub.labels.tolist() == [2, 3, 4]
