import os
import struct

import numpy as np
import pytest

from poisonlab.harness.presets import DATA_DIR_ENV, missing_files


def write_idx_pair(tmp_path, images, labels):
    """Write a valid MNIST-style IDX image/label file pair, return paths."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    n, rows, cols = images.shape
    img_path = tmp_path / "images-idx3-ubyte"
    lab_path = tmp_path / "labels-idx1-ubyte"
    with open(img_path, "wb") as fh:
        fh.write(struct.pack(">iiii", 0x00000803, n, rows, cols))
        fh.write(images.tobytes())
    with open(lab_path, "wb") as fh:
        fh.write(struct.pack(">ii", 0x00000801, labels.shape[0]))
        fh.write(labels.tobytes())
    return img_path, lab_path


def write_cifar_batch(tmp_path, labels, pixels, name="data_batch_1.bin"):
    """Write one CIFAR-10 binary batch from (n,) labels and (n, 3072) pixels."""
    labels = np.asarray(labels, dtype=np.uint8)
    pixels = np.asarray(pixels, dtype=np.uint8)
    path = tmp_path / name
    with open(path, "wb") as fh:
        for lab, row in zip(labels, pixels):
            fh.write(bytes([lab]) + row.tobytes())
    return path


def image_data_available() -> bool:
    root = os.environ.get(DATA_DIR_ENV)
    if root is None:
        return False
    from pathlib import Path

    return not missing_files(Path(root))


requires_image_data = pytest.mark.skipif(
    not image_data_available(),
    reason=f"raw MNIST/CIFAR files not found (set {DATA_DIR_ENV} to a populated root)",
)
