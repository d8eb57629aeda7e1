"""Gray-level co-occurrence texture features.

Images are converted to grayscale by averaging channels, resized
bilinearly, and quantized to a small number of gray levels.  A single-offset
symmetric normalized GLCM then yields contrast, correlation, energy and
homogeneity; mean and standard deviation come from the gray-level
histogram.
"""

from __future__ import annotations

import csv
import math
from dataclasses import astuple, dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import DegenerateImageError, InputFormatError

FEATURE_NAMES = ("contrast", "correlation", "energy", "homogeneity", "mean", "std")
CSV_HEADER = FEATURE_NAMES + ("label",)
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


@dataclass(frozen=True)
class GrayImage:
    pixels: np.ndarray
    levels: int = 8

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2:
            raise InputFormatError("gray image must be 2-D")
        if px.size and (px.min() < 0 or px.max() >= self.levels):
            raise InputFormatError(f"pixel levels must lie in [0, {self.levels - 1}]")
        object.__setattr__(self, "pixels", px.astype(np.int64))

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]

    def histogram(self):
        counts = np.bincount(self.pixels.ravel(), minlength=self.levels).astype(float)
        return counts / counts.sum()


@dataclass(frozen=True)
class GlcmMatrix:
    entries: np.ndarray
    offset: tuple = (0, 1)

    @property
    def levels(self):
        return self.entries.shape[0]


@dataclass(frozen=True)
class FeatureVector:
    contrast: float
    correlation: float
    energy: float
    homogeneity: float
    mean: float
    std: float

    def as_array(self):
        return np.array(astuple(self))


def quantize(gray, levels=8):
    """Map 8-bit gray values to ``floor(g * levels / 256)``, clamped to the top level."""
    q = np.floor(np.asarray(gray, dtype=float) * levels / 256.0).astype(np.int64)
    return np.clip(q, 0, levels - 1)


def _load(raw):
    if isinstance(raw, (str, Path)):
        try:
            with Image.open(raw) as im:
                im.load()
                return np.asarray(im.convert("RGB") if im.mode not in ("L", "RGB") else im)
        except (OSError, UnidentifiedImageError) as exc:
            raise InputFormatError(f"cannot decode image {raw}: {exc}") from exc
    return np.asarray(raw)


def preprocess(raw, side=224, levels=8):
    """Decode, gray-convert, resize and quantize an image.

    ``raw`` is a path or an 8-bit array of shape (H, W) or (H, W, C).  Pass
    ``side=None`` to keep the original size.
    """
    arr = _load(raw)
    if arr.ndim == 3:
        gray = arr[..., :3].astype(float).mean(axis=2)
    elif arr.ndim == 2:
        gray = arr.astype(float)
    else:
        raise InputFormatError(f"unsupported image array shape {arr.shape}")
    if side is not None and gray.shape != (side, side):
        gray = np.asarray(
            Image.fromarray(gray.astype(np.float32), mode="F").resize(
                (side, side), Image.Resampling.BILINEAR
            ),
            dtype=float,
        )
    return GrayImage(quantize(gray, levels), levels)


def compute_glcm(img, offset=(0, 1)):
    """Symmetric co-occurrence probabilities for pixel pairs at ``offset`` = (dy, dx)."""
    px = img.pixels
    dy, dx = offset
    H, W = px.shape
    a = px[max(0, -dy) : H - max(0, dy), max(0, -dx) : W - max(0, dx)]
    b = px[max(0, dy) : H + min(0, dy), max(0, dx) : W + min(0, dx)]
    if a.size == 0:
        raise DegenerateImageError(f"no pixel pairs at offset {offset} in a {H}x{W} image")
    L = img.levels
    counts = np.bincount((a * L + b).ravel(), minlength=L * L).reshape(L, L).astype(float)
    counts = counts + counts.T
    return GlcmMatrix(counts / counts.sum(), tuple(offset))


def extract_features(glcm, img):
    p = glcm.entries
    L = glcm.levels
    i, j = np.indices((L, L), dtype=float)
    d2 = (i - j) ** 2
    mu = float(np.sum(i * p))
    var = float(np.sum((i - mu) ** 2 * p))
    if var == 0.0:
        correlation = 1.0
    else:
        correlation = float(np.sum(p * (i - mu) * (j - mu)) / var)
    h = img.histogram()
    levels = np.arange(h.size, dtype=float)
    mean = float(np.sum(levels * h))
    return FeatureVector(
        contrast=float(np.sum(d2 * p)),
        correlation=correlation,
        energy=float(np.sum(p * p)),
        homogeneity=float(np.sum(p / (1.0 + d2))),
        mean=mean,
        std=math.sqrt(float(np.sum((levels - mean) ** 2 * h))),
    )


def image_features(raw, side=224, levels=8, offset=(0, 1)):
    img = preprocess(raw, side, levels)
    return extract_features(compute_glcm(img, offset), img)


def list_image_dataset(root):
    """``(path, class_name)`` pairs from a ``<root>/<class>/*.png|jpg|jpeg`` tree."""
    root = Path(root)
    if not root.is_dir():
        raise InputFormatError(f"image directory {root} does not exist")
    items = []
    for class_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for path in sorted(class_dir.iterdir()):
            if path.suffix.lower() in IMAGE_SUFFIXES:
                items.append((path, class_dir.name))
    return items


def featurize_dataset(items, side=224, levels=8, offset=(0, 1)):
    """Features for labeled images.

    Returns ``(X, labels, (feature_min, feature_max))``.  Every failing image
    is collected and reported together.
    """
    rows, labels, failures = [], [], []
    for path, label in items:
        try:
            rows.append(image_features(path, side, levels, offset).as_array())
            labels.append(label)
        except (InputFormatError, DegenerateImageError) as exc:
            failures.append(f"{path}: {exc}")
    if failures:
        raise InputFormatError(
            f"{len(failures)} image(s) failed feature extraction:\n" + "\n".join(failures)
        )
    if not rows:
        return np.empty((0, len(FEATURE_NAMES))), [], (np.empty(0), np.empty(0))
    X = np.array(rows)
    return X, labels, (X.min(axis=0), X.max(axis=0))


class GlcmFeatureExtractor(TransformerMixin, BaseEstimator):
    """Transformer from images (paths or 8-bit arrays) to the six texture features."""

    def __init__(self, side=224, levels=8, offset=(0, 1)):
        self.side = side
        self.levels = levels
        self.offset = offset

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return np.array(
            [image_features(x, self.side, self.levels, tuple(self.offset)).as_array() for x in X]
        ).reshape(-1, len(FEATURE_NAMES))

    def get_feature_names_out(self, input_features=None):
        return np.array(FEATURE_NAMES, dtype=object)


def write_feature_csv(path, X, labels):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row, label in zip(np.asarray(X, dtype=float), labels):
            w.writerow([f"{v:.10g}" for v in row] + [label])


def read_feature_csv(path):
    """Parse a feature CSV into ``(X, labels)``."""
    path = Path(path)
    if not path.is_file():
        raise InputFormatError(f"feature file {path} does not exist")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise InputFormatError(
                f"{path}: header must be {','.join(CSV_HEADER)}, got {header}"
            )
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise InputFormatError(
                    f"{path}: row {lineno} has {len(row)} fields, expected {len(CSV_HEADER)}"
                )
            try:
                values = [float(v) for v in row[:-1]]
            except ValueError as exc:
                raise InputFormatError(f"{path}: row {lineno}: {exc}") from exc
            if not all(math.isfinite(v) for v in values):
                raise InputFormatError(f"{path}: row {lineno} has non-finite values")
            rows.append(values)
            labels.append(row[-1])
    return np.array(rows).reshape(-1, len(FEATURE_NAMES)), labels
