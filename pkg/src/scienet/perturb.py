"""Inference-time input perturbations: AWGN at a target SNR and synthetic rain."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InputDomainError, ParameterError, StructuralError

CLEAN = math.inf


def _rng(seed):
    if isinstance(seed, (tuple, list)):
        return np.random.default_rng(np.random.SeedSequence([int(s) for s in seed]))
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def signal_power(image) -> float:
    x = np.asarray(image, dtype=np.float64)
    return float(np.mean(x * x))


def awgn_noise(image, snr_db: float, seed=0) -> np.ndarray:
    """Gaussian noise field whose power sits exactly ``snr_db`` below the image's.

    The raw draw is rescaled to the target power, so the pre-clip SNR of
    ``image + noise`` is the requested one up to rounding.
    """
    x = np.asarray(image, dtype=np.float64)
    if x.size == 0:
        raise InputDomainError("empty image")
    if math.isinf(snr_db) and snr_db > 0:
        return np.zeros_like(x)
    if not math.isfinite(snr_db):
        raise ParameterError(f"snr_db must be finite or +inf, got {snr_db}")
    p_signal = signal_power(x)
    if p_signal == 0.0:
        raise InputDomainError("all-zero image: SNR is undefined")
    p_noise = p_signal / 10.0 ** (snr_db / 10.0)
    z = _rng(seed).standard_normal(x.shape)
    return z * math.sqrt(p_noise / np.mean(z * z))


def add_awgn(image, snr_db: float, seed=0, clip: bool = True) -> np.ndarray:
    x = np.asarray(image, dtype=np.float64)
    noisy = x + awgn_noise(x, snr_db, seed)
    return np.clip(noisy, 0.0, 1.0) if clip else noisy


def measure_snr(clean, perturbed) -> float:
    """``10 log10(sum clean^2 / sum (perturbed - clean)^2)``; +inf when identical."""
    c = np.asarray(clean, dtype=np.float64)
    p = np.asarray(perturbed, dtype=np.float64)
    if c.shape != p.shape:
        raise StructuralError(f"shape mismatch {c.shape} vs {p.shape}")
    noise = np.sum((p - c) ** 2)
    if noise == 0.0:
        return math.inf
    return 10.0 * math.log10(np.sum(c * c) / noise)


@dataclass(frozen=True)
class RainPreset:
    count: tuple = (20, 40)
    length: tuple = (4.0, 8.0)  # px
    angle: tuple = (70.0, 110.0)  # degrees from horizontal
    jitter: float = 5.0  # per-streak angle jitter, degrees
    brightness: tuple = (0.8, 1.0)
    alpha: tuple = (0.4, 0.8)

    def __post_init__(self):
        if self.count[0] < 0 or self.count[1] < self.count[0]:
            raise ParameterError("streak count range must be non-negative and ordered")
        if not (0.0 <= self.alpha[0] <= self.alpha[1] <= 1.0):
            raise ParameterError("alpha range must lie in [0, 1]")
        if not (0.0 <= self.brightness[0] <= self.brightness[1] <= 1.0):
            raise ParameterError("brightness range must lie in [0, 1]")
        if self.length[0] < 0 or self.length[1] < self.length[0]:
            raise ParameterError("length range must be non-negative and ordered")


RAIN_PRESETS = {
    "light": RainPreset(count=(20, 40), length=(4.0, 8.0)),
    "heavy": RainPreset(count=(80, 150), length=(6.0, 12.0)),
}


def rain_preset(name: str, **overrides) -> RainPreset:
    try:
        base = RAIN_PRESETS[name]
    except KeyError:
        raise ParameterError(f"unknown rain preset {name!r}; choose from {sorted(RAIN_PRESETS)}") from None
    overrides = {k: (tuple(v) if isinstance(v, list) else v) for k, v in overrides.items()}
    try:
        return replace(base, **overrides) if overrides else base
    except TypeError as exc:
        raise ParameterError(f"bad rain override: {exc}") from None


def _segment_coverage(x0, y0, x1, y1, side):
    """Anti-aliased coverage in [0, 1]: 1 - distance from pixel centre to segment."""
    ys, xs = np.mgrid[0:side, 0:side]
    px, py = xs + 0.5, ys + 0.5
    dx, dy = x1 - x0, y1 - y0
    seg2 = dx * dx + dy * dy
    if seg2 == 0.0:
        t = np.zeros_like(px)
    else:
        t = np.clip(((px - x0) * dx + (py - y0) * dy) / seg2, 0.0, 1.0)
    dist = np.hypot(px - (x0 + t * dx), py - (y0 + t * dy))
    return np.clip(1.0 - dist, 0.0, 1.0)


def rain_mask(preset: RainPreset, seed=0, side: int = 32):
    """Streak layers as a list of ``(coverage(H, W), alpha, brightness)``."""
    rng = _rng(seed)
    lo, hi = preset.count
    count = int(rng.integers(lo, hi + 1))
    base = rng.uniform(*preset.angle)
    layers = []
    for _ in range(count):
        theta = math.radians(base + rng.uniform(-preset.jitter, preset.jitter))
        length = rng.uniform(*preset.length)
        cx, cy = rng.uniform(0, side, size=2)
        hx = 0.5 * length * math.cos(theta)
        hy = 0.5 * length * math.sin(theta)
        cov = _segment_coverage(cx - hx, cy - hy, cx + hx, cy + hy, side)
        layers.append((cov, rng.uniform(*preset.alpha), rng.uniform(*preset.brightness)))
    return layers


def synthesize_rain(image, preset: RainPreset | str = "light", seed=0, side: int = 32) -> np.ndarray:
    """Alpha-blend bright streaks over a channel-major image vector.

    Each streak updates ``pixel <- (1 - a) pixel + a * brightness`` with
    ``a = alpha * coverage``; pixels no streak touches are returned unchanged.
    """
    if isinstance(preset, str):
        preset = rain_preset(preset)
    x = np.asarray(image, dtype=np.float64)
    channels = x.size // (side * side)
    if channels * side * side != x.size:
        raise StructuralError(f"image of {x.size} values is not {side}x{side}xC")
    planes = x.reshape(channels, side, side).copy()
    for cov, alpha, bright in rain_mask(preset, seed, side):
        touched = cov > 0.0
        a = alpha * cov[touched]
        for ch in range(channels):
            plane = planes[ch]
            plane[touched] = (1.0 - a) * plane[touched] + a * bright
    return np.clip(planes.reshape(x.shape), 0.0, 1.0)


@dataclass(frozen=True)
class PerturbationSpec:
    kind: str = "awgn"  # "awgn" | "rain" | "none"
    snr_db: float = CLEAN
    rain: str = "light"
    rain_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("awgn", "rain", "none"):
            raise ParameterError(f"unknown perturbation kind {self.kind!r}")
        if self.kind == "awgn" and (math.isnan(self.snr_db) or self.snr_db == -math.inf):
            raise ParameterError("awgn needs a finite snr_db (or +inf for clean)")
        if self.kind == "rain":
            rain_preset(self.rain, **self.rain_overrides)

    @property
    def label(self) -> str:
        if self.kind == "awgn":
            return "clean" if math.isinf(self.snr_db) else f"awgn_{self.snr_db:g}dB"
        if self.kind == "rain":
            return f"rain_{self.rain}"
        return "clean"

    def apply(self, image, seed=0) -> np.ndarray:
        if self.kind == "awgn":
            return add_awgn(image, self.snr_db, seed)
        if self.kind == "rain":
            return synthesize_rain(image, rain_preset(self.rain, **self.rain_overrides), seed)
        return np.array(image, dtype=np.float64, copy=True)

    def apply_batch(self, images, seed=0, ids=None) -> np.ndarray:
        """Image ``i`` is perturbed with seed ``(seed, ids[i])`` (``ids`` defaults to rows),
        so a result never depends on how images are batched."""
        images = np.asarray(images, dtype=np.float64)
        ids = np.arange(len(images)) if ids is None else np.asarray(ids)
        out = np.empty_like(images)
        for i, x in enumerate(images):
            out[i] = self.apply(x, (int(seed), int(ids[i])))
        return out
