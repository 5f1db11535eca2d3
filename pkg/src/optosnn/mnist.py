"""IDX-format MNIST loading.

Big-endian IDX files: magic (0x00000803 for image tensors, 0x00000801 for
label vectors), dimension sizes as u32, then raw bytes. Parse errors carry
the byte offset where the problem was found.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

__all__ = ["MnistDataset", "IdxFormatError", "load_idx_images", "load_idx_labels",
           "load_mnist", "find_mnist_dir"]

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    """Raised when an IDX file is malformed."""


@dataclass
class MnistDataset:
    """Byte-valued image grids with labels; one record per sample."""

    images: np.ndarray  # (n, rows, cols) uint8
    labels: np.ndarray  # (n,) uint8
    split: str = ""

    def __post_init__(self) -> None:
        if len(self.images) != len(self.labels):
            raise ValueError(
                f"image count {len(self.images)} != label count {len(self.labels)}"
            )

    def __len__(self) -> int:
        return len(self.images)

    def normalized(self) -> np.ndarray:
        """Pixels flattened per sample and scaled to [0, 1]."""
        n = len(self.images)
        return self.images.reshape(n, -1).astype(float) / 255.0

    def subset(self, n: int, offset: int = 0) -> "MnistDataset":
        return MnistDataset(
            images=self.images[offset:offset + n],
            labels=self.labels[offset:offset + n],
            split=self.split,
        )


def _read_u32(buf: bytes, offset: int, path: str) -> int:
    if offset + 4 > len(buf):
        raise IdxFormatError(
            f"{path}: truncated at byte {offset}, expected 4-byte integer"
        )
    return struct.unpack_from(">I", buf, offset)[0]


def load_idx_images(path) -> np.ndarray:
    """Parse an IDX image tensor file into (n, rows, cols) uint8."""
    path = str(path)
    with open(path, "rb") as fh:
        buf = fh.read()
    magic = _read_u32(buf, 0, path)
    if magic != IMAGE_MAGIC:
        raise IdxFormatError(
            f"{path}: bad magic 0x{magic:08x} at byte 0, expected 0x{IMAGE_MAGIC:08x}"
        )
    n = _read_u32(buf, 4, path)
    rows = _read_u32(buf, 8, path)
    cols = _read_u32(buf, 12, path)
    need = 16 + n * rows * cols
    if len(buf) < need:
        raise IdxFormatError(
            f"{path}: truncated at byte {len(buf)}, expected {need} bytes "
            f"for {n} images of {rows}x{cols}"
        )
    data = np.frombuffer(buf, dtype=np.uint8, count=n * rows * cols, offset=16)
    return data.reshape(n, rows, cols)


def load_idx_labels(path) -> np.ndarray:
    """Parse an IDX label vector file into (n,) uint8."""
    path = str(path)
    with open(path, "rb") as fh:
        buf = fh.read()
    magic = _read_u32(buf, 0, path)
    if magic != LABEL_MAGIC:
        raise IdxFormatError(
            f"{path}: bad magic 0x{magic:08x} at byte 0, expected 0x{LABEL_MAGIC:08x}"
        )
    n = _read_u32(buf, 4, path)
    if len(buf) < 8 + n:
        raise IdxFormatError(
            f"{path}: truncated at byte {len(buf)}, expected {8 + n} bytes for {n} labels"
        )
    return np.frombuffer(buf, dtype=np.uint8, count=n, offset=8)


def load_mnist(images_path, labels_path, split: str = "") -> MnistDataset:
    """Load paired image/label IDX files into one dataset."""
    images = load_idx_images(images_path)
    labels = load_idx_labels(labels_path)
    if len(images) != len(labels):
        raise IdxFormatError(
            f"count mismatch: {images_path} has {len(images)} images but "
            f"{labels_path} has {len(labels)} labels"
        )
    return MnistDataset(images=images, labels=labels, split=split)


_STANDARD_NAMES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


def find_mnist_dir(explicit: str | None = None) -> str | None:
    """Locate a directory holding the four standard uncompressed IDX files.

    Checks, in order: the explicit argument, $OPTOSNN_MNIST_DIR, ./data/mnist.
    """
    candidates = [explicit, os.environ.get("OPTOSNN_MNIST_DIR"),
                  os.path.join("data", "mnist")]
    for cand in candidates:
        if not cand:
            continue
        names = [n for pair in _STANDARD_NAMES.values() for n in pair]
        if all(os.path.exists(os.path.join(cand, n)) for n in names):
            return cand
    return None


def load_standard_split(mnist_dir, split: str) -> MnistDataset:
    """Load 'train' or 'test' from a directory of standard-named files."""
    try:
        img_name, lbl_name = _STANDARD_NAMES[split]
    except KeyError:
        raise ValueError(f"split must be 'train' or 'test', got {split!r}") from None
    return load_mnist(
        os.path.join(mnist_dir, img_name),
        os.path.join(mnist_dir, lbl_name),
        split=split,
    )
