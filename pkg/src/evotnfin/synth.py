"""Synthetic datasets: Gaussian feature blobs and texture images."""

from pathlib import Path

import numpy as np
from PIL import Image
from sklearn.datasets import make_blobs

from .glcm import FEATURE_NAMES, write_feature_csv

TEXTURE_FAMILIES = ("constant", "stripes", "noise")


def blob_features(n_samples=600, n_classes=3, separation=2.0, cluster_std=1.0, random_state=0):
    """Gaussian blobs in the six-feature space.

    Class means are drawn uniformly from ``[-separation, separation]^6``, so
    ``separation`` relative to ``cluster_std`` controls how much the classes
    overlap.  Returns ``(X, y)`` with integer labels ``0..n_classes-1`` and
    balanced class sizes.
    """
    rng = np.random.default_rng(random_state)
    centers = rng.uniform(-separation, separation, size=(n_classes, len(FEATURE_NAMES)))
    X, y = make_blobs(
        n_samples=[n_samples // n_classes + (i < n_samples % n_classes) for i in range(n_classes)],
        centers=centers,
        cluster_std=cluster_std,
        random_state=int(rng.integers(2**31 - 1)),
    )
    return X, y


def texture_image(family, size=32, random_state=None):
    """One 8-bit grayscale texture from ``TEXTURE_FAMILIES``."""
    rng = np.random.default_rng(random_state)
    if family == "constant":
        level = int(rng.integers(0, 256))
        return np.full((size, size), level, dtype=np.uint8)
    if family == "stripes":
        period = int(rng.integers(2, 6))
        lo, hi = sorted(rng.integers(0, 256, size=2))
        cols = np.where((np.arange(size) // period) % 2 == 0, lo, hi)
        return np.tile(cols, (size, 1)).astype(np.uint8)
    if family == "noise":
        return rng.integers(0, 256, size=(size, size)).astype(np.uint8)
    raise ValueError(f"unknown texture family {family!r}")


def write_texture_dataset(root, per_class=10, size=32, random_state=0):
    """Write ``<root>/<family>/img_NNN.png`` for every texture family.

    Returns the list of written paths.
    """
    root = Path(root)
    rng = np.random.default_rng(random_state)
    paths = []
    for family in TEXTURE_FAMILIES:
        (root / family).mkdir(parents=True, exist_ok=True)
        for i in range(per_class):
            img = texture_image(family, size, int(rng.integers(2**31 - 1)))
            path = root / family / f"img_{i:03d}.png"
            Image.fromarray(img, mode="L").save(path)
            paths.append(path)
    return paths


def write_blob_csv(path, n_samples=600, separation=2.0, cluster_std=1.0, random_state=0):
    """Write a blob dataset in the feature-CSV format with labels c0, c1, c2."""
    X, y = blob_features(n_samples, 3, separation, cluster_std, random_state)
    write_feature_csv(path, X, [f"c{k}" for k in y])
    return path
