"""Dataset ingestion and generation.

Covers IDX file parsing (the MNIST/Fashion-MNIST container format), an IDX
fixture writer, two deterministic synthetic generators (Gaussian blobs for
fast property tests and rendered digit glyphs for image-scale runs), seeded
epoch batching, and label encoding.
"""

import gzip
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    DataConsistencyError,
    DataFormatError,
    DataIOError,
    InvalidArgumentError,
)

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
GZIP_PREFIX = b"\x1f\x8b"


@dataclass
class Dataset:
    """Immutable-by-convention sample container.

    ``inputs`` is (N, C, H, W) for images (pixels in [0, 1]) or (N, d) for
    flat feature vectors; ``labels`` holds class indices below ``num_classes``.
    """

    inputs: np.ndarray
    labels: np.ndarray
    num_classes: int
    split: str = "train"

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.ndim != 1 or self.inputs.shape[0] != self.labels.shape[0]:
            raise DataConsistencyError(
                f"{self.inputs.shape[0]} inputs vs {self.labels.shape[0]} labels"
            )
        if self.num_classes < 2:
            raise InvalidArgumentError("num_classes must be >= 2")
        if len(self) and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise DataConsistencyError("labels outside [0, num_classes)")

    def __len__(self) -> int:
        return self.inputs.shape[0]

    def take(self, n: int) -> "Dataset":
        """First-n deterministic subset (reproducible desk-scale runs)."""
        return Dataset(self.inputs[:n], self.labels[:n], self.num_classes, self.split)


# -- IDX files ----------------------------------------------------------------


def _open_maybe_gzip(path):
    with open(path, "rb") as probe:
        prefix = probe.read(2)
    if prefix == GZIP_PREFIX:
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_exact(f, n: int, path) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise DataIOError(f"{path}: truncated, wanted {n} bytes, got {len(data)}")
    return data


def _read_u32(f, path) -> int:
    return struct.unpack(">I", _read_exact(f, 4, path))[0]


def load_idx(images_path, labels_path, limit: int | None = None, split: str = "train") -> Dataset:
    """Parse an IDX image/label file pair into a Dataset.

    Headers are big-endian: a magic word (0x00000803 for rank-3 image files,
    0x00000801 for rank-1 label files), the extents, then an unsigned-byte
    payload. Pixels are scaled by 1/255 into [0, 1]. Gzip-compressed files
    are detected by their two-byte prefix and decompressed transparently.
    """
    with _open_maybe_gzip(images_path) as f:
        magic = _read_u32(f, images_path)
        if magic != IDX_IMAGES_MAGIC:
            raise DataFormatError(
                f"{images_path}: bad image magic 0x{magic:08x}, expected 0x{IDX_IMAGES_MAGIC:08x}"
            )
        n, h, w = (_read_u32(f, images_path) for _ in range(3))
        raw = _read_exact(f, n * h * w, images_path)
        images = np.frombuffer(raw, dtype=np.uint8).reshape(n, 1, h, w)

    with _open_maybe_gzip(labels_path) as f:
        magic = _read_u32(f, labels_path)
        if magic != IDX_LABELS_MAGIC:
            raise DataFormatError(
                f"{labels_path}: bad label magic 0x{magic:08x}, expected 0x{IDX_LABELS_MAGIC:08x}"
            )
        n_labels = _read_u32(f, labels_path)
        labels = np.frombuffer(_read_exact(f, n_labels, labels_path), dtype=np.uint8)

    if n_labels != n:
        raise DataConsistencyError(f"{n} images but {n_labels} labels")

    if limit is not None:
        images = images[:limit]
        labels = labels[:limit]
    return Dataset(images.astype(np.float64) / 255.0, labels.astype(np.int64), 10, split)


def write_idx(dataset: Dataset, images_path, labels_path) -> None:
    """Write a pixel Dataset as an IDX file pair (fixture/export helper).

    Pixels are quantized to unsigned bytes with round(x * 255); re-reading a
    dataset that originated from IDX files reproduces it bitwise.
    """
    x = dataset.inputs
    if x.ndim != 4 or x.shape[1] != 1:
        raise InvalidArgumentError(f"expected (N, 1, H, W) pixel inputs, got shape {x.shape}")
    if x.min() < 0 or x.max() > 1:
        raise InvalidArgumentError("pixel inputs must lie in [0, 1]")
    n, _, h, w = x.shape
    with open(images_path, "wb") as f:
        f.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, n, h, w))
        f.write(np.rint(x * 255.0).astype(np.uint8).tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", IDX_LABELS_MAGIC, n))
        f.write(dataset.labels.astype(np.uint8).tobytes())


# -- synthetic data -----------------------------------------------------------


def synth_blobs(num_classes: int, dim: int, per_class: int, spread: float, seed: int,
                split: str = "train") -> Dataset:
    """Gaussian clusters with unit-separated means along the first axis.

    Class k is drawn around mean (k, 0, ..., 0) with standard deviation
    ``spread``. Samples are interleaved by class so any prefix is balanced.
    """
    if num_classes < 2 or dim < 1:
        raise InvalidArgumentError("need num_classes >= 2 and dim >= 1")
    rng = np.random.default_rng(seed)
    x = rng.normal(0.0, spread, size=(per_class, num_classes, dim))
    x[:, :, 0] += np.arange(num_classes)
    labels = np.tile(np.arange(num_classes), per_class)
    return Dataset(x.reshape(per_class * num_classes, dim), labels, num_classes, split)


# 5x7 digit glyphs; rows are strings of 0/1.
_GLYPHS = {
    0: ("01110", "10001", "10011", "10101", "11001", "10001", "01110"),
    1: ("00100", "01100", "00100", "00100", "00100", "00100", "01110"),
    2: ("01110", "10001", "00001", "00010", "00100", "01000", "11111"),
    3: ("11111", "00010", "00100", "00010", "00001", "10001", "01110"),
    4: ("00010", "00110", "01010", "10010", "11111", "00010", "00010"),
    5: ("11111", "10000", "11110", "00001", "00001", "10001", "01110"),
    6: ("00110", "01000", "10000", "11110", "10001", "10001", "01110"),
    7: ("11111", "00001", "00010", "00100", "01000", "01000", "01000"),
    8: ("01110", "10001", "10001", "01110", "10001", "10001", "01110"),
    9: ("01110", "10001", "10001", "01111", "00001", "00010", "01100"),
}


def _glyph_array(digit: int, scale: int = 3) -> np.ndarray:
    rows = _GLYPHS[digit]
    g = np.array([[int(ch) for ch in row] for row in rows], dtype=np.float64)
    return np.kron(g, np.ones((scale, scale)))  # 21 x 15


def _box_blur(imgs: np.ndarray) -> np.ndarray:
    """3x3 mean blur over (N, H, W), zero-padded borders."""
    p = np.pad(imgs, ((0, 0), (1, 1), (1, 1)))
    out = np.zeros_like(imgs)
    for di in range(3):
        for dj in range(3):
            out += p[:, di : di + imgs.shape[1], dj : dj + imgs.shape[2]]
    return out / 9.0


def synth_digits(
    n: int,
    seed: int,
    noise: float = 0.18,
    hard_fraction: float = 0.0,
    hard_noise: float = 0.75,
    label_noise: float = 0.0,
    split: str = "train",
) -> Dataset:
    """Render a 28x28 ten-class digit dataset from jittered bitmap glyphs.

    Each sample gets a random shift, slant, stroke intensity, blur, and
    additive Gaussian pixel noise. ``hard_fraction`` marks a random subset
    that additionally receives heavy noise, an occluding bar, and low
    contrast (correctly labeled but difficult); ``label_noise`` reassigns a
    random subset to a uniformly random wrong label. Deterministic per seed.
    """
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 10, size=n)
    glyphs = np.stack([_glyph_array(d) for d in range(10)])  # (10, 21, 15)
    gh, gw = glyphs.shape[1:]

    imgs = np.zeros((n, 28, 28), dtype=np.float64)
    dy = rng.integers(-3, 4, size=n)
    dx = rng.integers(-4, 5, size=n)
    slant = rng.uniform(-0.18, 0.18, size=n)
    intensity = rng.uniform(0.65, 1.0, size=n)

    base_y, base_x = (28 - gh) // 2, (28 - gw) // 2
    row_centers = np.arange(gh) - gh / 2.0
    for i in range(n):
        glyph = glyphs[labels[i]] * intensity[i]
        canvas = np.zeros((28, 28))
        y0 = base_y + dy[i]
        shifts = np.rint(slant[i] * row_centers).astype(int)
        for r in range(gh):
            x0 = base_x + dx[i] + shifts[r]
            x0 = min(max(x0, 0), 28 - gw)
            canvas[y0 + r, x0 : x0 + gw] = glyph[r]
        imgs[i] = canvas

    imgs = _box_blur(imgs)
    imgs += rng.normal(0.0, noise, size=imgs.shape)

    if hard_fraction > 0:
        n_hard = int(round(hard_fraction * n))
        hard_idx = rng.choice(n, size=n_hard, replace=False)
        if n_hard:
            imgs[hard_idx] *= 0.45  # low contrast
            imgs[hard_idx] += rng.normal(0.0, hard_noise, size=(n_hard, 28, 28))
            bar_rows = rng.integers(4, 22, size=n_hard)
            bar_vals = rng.uniform(0.4, 1.0, size=n_hard)
            for j, idx in enumerate(hard_idx):
                imgs[idx, bar_rows[j] : bar_rows[j] + 3, 4:24] = bar_vals[j]

    if label_noise > 0:
        n_flip = int(round(label_noise * n))
        flip_idx = rng.choice(n, size=n_flip, replace=False)
        labels[flip_idx] = (labels[flip_idx] + rng.integers(1, 10, size=n_flip)) % 10

    imgs = np.clip(imgs, 0.0, 1.0)
    return Dataset(imgs[:, None, :, :], labels, 10, split)


# -- batching and encoding ----------------------------------------------------


def batches(dataset: Dataset, batch_size: int, seed: int, epoch: int) -> list[np.ndarray]:
    """Index batches for one epoch: a seeded permutation of all N samples.

    The permutation is a pure function of (seed, epoch); the last batch may
    be short. Callers slice dataset.inputs/labels with the returned arrays.
    """
    if batch_size < 1:
        raise InvalidArgumentError("batch_size must be >= 1")
    n = len(dataset)
    perm = np.random.default_rng([seed, epoch]).permutation(n)
    return [perm[i : i + batch_size] for i in range(0, n, batch_size)]


def one_hot(label: int, num_classes: int) -> np.ndarray:
    if not 0 <= label < num_classes:
        raise InvalidArgumentError(f"label {label} outside [0, {num_classes})")
    e = np.zeros(num_classes, dtype=np.float64)
    e[label] = 1.0
    return e


def one_hot_batch(labels: np.ndarray, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if len(labels) and (labels.min() < 0 or labels.max() >= num_classes):
        raise InvalidArgumentError("labels outside [0, num_classes)")
    out = np.zeros((labels.shape[0], num_classes), dtype=np.float64)
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out
