"""Procedural 10-class, 32x32x3 image set in CIFAR-10 layout.

A stand-in for CIFAR-10 where the real batches are unavailable.  Each
class is a shape (disk, ring, square, ...) drawn with random colours,
position, scale and background, so class identity lives in global
structure rather than colour.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .dataio import ImageSet, write_cifar10

SIDE = 32
CLASS_NAMES = (
    "disk", "ring", "square", "hbars", "vbars",
    "triangle", "plus", "diagonal", "twoblobs", "cross",
)


def _shape_mask(label, rng, side=SIDE):
    ys, xs = np.mgrid[0:side, 0:side] + 0.5
    cx, cy = side / 2 + rng.uniform(-4, 4, size=2)
    s = rng.uniform(0.75, 1.25)
    u, v = (xs - cx) / s, (ys - cy) / s
    r = np.hypot(u, v)
    soft = lambda d: np.clip(0.5 - d, 0.0, 1.0)  # ~1 px anti-aliased edge
    if label == 0:
        return soft(r - 9.0)
    if label == 1:
        return soft(np.abs(r - 8.0) - 2.0)
    if label == 2:
        return soft(np.maximum(np.abs(u), np.abs(v)) - 8.0)
    if label == 3:
        bars = np.abs(((v + 12) % 8) - 4) - 1.6
        return soft(np.maximum(bars, np.abs(u) - 11.0)) * (np.abs(v) < 12)
    if label == 4:
        bars = np.abs(((u + 12) % 8) - 4) - 1.6
        return soft(np.maximum(bars, np.abs(v) - 11.0)) * (np.abs(u) < 12)
    if label == 5:
        # upward triangle: inside three half-planes
        d = np.maximum.reduce([
            v - 8.0,
            (-0.866 * u - 0.5 * v) - 5.0,
            (0.866 * u - 0.5 * v) - 5.0,
        ])
        return soft(d * 1.4)
    if label == 6:
        arm = np.minimum(np.maximum(np.abs(u) - 2.5, np.abs(v) - 10.0),
                         np.maximum(np.abs(v) - 2.5, np.abs(u) - 10.0))
        return soft(arm)
    if label == 7:
        stripes = np.abs(((u + v + 40) % 9) - 4.5) - 1.8
        return soft(np.maximum(stripes, r - 12.0))
    if label == 8:
        r1 = np.hypot(u - 6.5, v - 4.0)
        r2 = np.hypot(u + 6.5, v + 4.0)
        return soft(np.minimum(r1, r2) - 5.0)
    d1 = np.abs(u - v) / 1.414 - 2.0
    d2 = np.abs(u + v) / 1.414 - 2.0
    return soft(np.maximum(np.minimum(d1, d2), r - 11.0))


def _luma(c):
    return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]


def render(label: int, rng) -> np.ndarray:
    """One channel-major 3072-vector in [0, 1]."""
    bg_a = rng.uniform(0, 1, 3)
    bg_b = np.clip(bg_a + rng.uniform(-0.25, 0.25, 3), 0, 1)
    while True:
        fg = rng.uniform(0, 1, 3)
        if abs(_luma(fg) - _luma((bg_a + bg_b) / 2)) > 0.3:
            break
    ys, xs = np.mgrid[0:SIDE, 0:SIDE] / (SIDE - 1)
    theta = rng.uniform(0, 2 * np.pi)
    ramp = np.cos(theta) * (xs - 0.5) + np.sin(theta) * (ys - 0.5) + 0.5
    bg = bg_a[:, None, None] * (1 - ramp) + bg_b[:, None, None] * ramp
    # low-frequency clutter
    coarse = rng.normal(0, 0.06, (3, 4, 4))
    bg = bg + np.kron(coarse, np.ones((8, 8)))
    mask = _shape_mask(label, rng)
    img = bg * (1 - mask) + fg[:, None, None] * mask
    img = img + rng.normal(0, 0.02, img.shape)
    return np.clip(img, 0, 1).reshape(-1)


def make_dataset(count: int, seed: int = 0) -> ImageSet:
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xDA7A]))
    labels = np.arange(count) % 10
    rng.shuffle(labels)
    images = np.stack([render(int(c), rng) for c in labels]) if count else np.zeros((0, 3 * SIDE * SIDE))
    # quantize to 8 bits so the in-memory set equals what the binary files hold
    images = np.rint(images * 255.0) / 255.0
    return ImageSet(images, labels)


def write_dataset(root, train: int = 10000, test: int = 2000, seed: int = 0) -> Path:
    """Write ``data_batch_1..5.bin`` and ``test_batch.bin`` under ``root``."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    tr = make_dataset(train, seed)
    te = make_dataset(test, seed + 1)
    for i, chunk in enumerate(np.array_split(np.arange(train), 5), start=1):
        write_cifar10(root / f"data_batch_{i}.bin", tr.images[chunk], tr.labels[chunk])
    write_cifar10(root / "test_batch.bin", te.images, te.labels)
    (root / "batches.meta.txt").write_text("\n".join(CLASS_NAMES) + "\n")
    return root
