"""Deterministic synthetic image set: oriented bars and crosses with noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..nncore import save_checkpoint

IMAGE_SIZE = 16
NUM_CLASSES = 4
NOISE_SIGMA = 0.25


@dataclass(frozen=True)
class SyntheticDataset:
    """Single-channel 16x16 images in 4 oriented-pattern classes."""

    train_x: np.ndarray
    train_y: np.ndarray
    val_x: np.ndarray
    val_y: np.ndarray
    seed: int


def _draw(rng, label: int) -> np.ndarray:
    """One noisy image of the given class; consumes a fixed-structure rng stream."""
    img = np.zeros((IMAGE_SIZE, IMAGE_SIZE))
    hi = IMAGE_SIZE - 3
    if label == 0:
        r = int(rng.integers(2, hi))
        img[r:r + 2, 2:IMAGE_SIZE - 2] = 1.0
    elif label == 1:
        c = int(rng.integers(2, hi))
        img[2:IMAGE_SIZE - 2, c:c + 2] = 1.0
    elif label == 2:
        off = int(rng.integers(-4, 5))
        for i in range(IMAGE_SIZE):
            j = i + off
            if 0 <= j < IMAGE_SIZE:
                img[i, j] = 1.0
            if 0 <= j + 1 < IMAGE_SIZE:
                img[i, j + 1] = 1.0
    else:
        r = int(rng.integers(2, hi))
        c = int(rng.integers(2, hi))
        img[r:r + 2, 2:IMAGE_SIZE - 2] = 1.0
        img[2:IMAGE_SIZE - 2, c:c + 2] = 1.0
    img += rng.normal(0.0, NOISE_SIGMA, size=(IMAGE_SIZE, IMAGE_SIZE))
    return img


def _make_split(rng, size: int) -> tuple[np.ndarray, np.ndarray]:
    labels = np.repeat(np.arange(NUM_CLASSES), size // NUM_CLASSES)
    labels = labels[rng.permutation(size)]
    images = np.stack([_draw(rng, int(y)) for y in labels])
    return images[:, None, :, :], labels


def generate_dataset(seed: int, train_size: int = 2000, val_size: int = 500) -> SyntheticDataset:
    """Build an exactly class-balanced train/validation split, bit-identical per seed."""
    for name, size in (("train_size", train_size), ("val_size", val_size)):
        if size <= 0 or size % NUM_CLASSES:
            raise ConfigError(f"{name} must be a positive multiple of {NUM_CLASSES}, got {size}")
    rng = np.random.Generator(np.random.PCG64(seed))
    train_x, train_y = _make_split(rng, train_size)
    val_x, val_y = _make_split(rng, val_size)
    return SyntheticDataset(train_x, train_y, val_x, val_y, seed)


def export_dataset(stem: str, dataset: SyntheticDataset):
    """Dump the dataset as a manifest plus raw little-endian float blob."""
    save_checkpoint(stem, {
        "train_x": dataset.train_x,
        "train_y": dataset.train_y.astype(np.float64),
        "val_x": dataset.val_x,
        "val_y": dataset.val_y.astype(np.float64),
        "seed": np.array([float(dataset.seed)]),
    })
