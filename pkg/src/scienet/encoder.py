"""Image-to-spike-train encoding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ENCODING_MODES, EncoderConfig
from .errors import InputDomainError, ParameterError


@dataclass(frozen=True)
class SpikeRaster:
    """Input spikes of one presentation in CSR form.

    Spikes at step ``s`` are ``inputs[step_ptr[s]:step_ptr[s + 1]]``, sorted
    ascending; a train fires at most once per step.
    """

    step_ptr: np.ndarray  # int64, n_steps + 1
    inputs: np.ndarray  # int32
    n_steps: int
    n_inputs: int

    def active(self, step: int) -> np.ndarray:
        return self.inputs[self.step_ptr[step] : self.step_ptr[step + 1]]

    def counts(self) -> np.ndarray:
        return np.bincount(self.inputs, minlength=self.n_inputs)

    def dense(self) -> np.ndarray:
        out = np.zeros((self.n_steps, self.n_inputs), dtype=bool)
        steps = np.repeat(np.arange(self.n_steps), np.diff(self.step_ptr))
        out[steps, self.inputs] = True
        return out


@dataclass(frozen=True)
class SpikeTrainSet:
    frequencies: np.ndarray  # Hz
    encoding_mode: str
    f_min: float
    f_max: float
    seed: int | tuple

    @property
    def n(self) -> int:
        return self.frequencies.size

    def raster(self, duration: float, dt: float) -> SpikeRaster:
        n_steps = steps_for(duration, dt)
        rng = np.random.default_rng(_seed_seq(self.seed))
        f = self.frequencies
        if self.encoding_mode == "poisson":
            counts = rng.poisson(f * duration * 1e-3)
            owner = np.repeat(np.arange(self.n, dtype=np.int64), counts)
            times = rng.uniform(0.0, duration, size=owner.size)
        else:
            silent = f <= 0
            period = 1e3 / np.where(silent, 1.0, f)  # ms
            phase = rng.uniform(0.0, 1.0, size=self.n) * period
            counts = np.maximum(np.ceil((duration - phase) / period), 0).astype(np.int64)
            counts[silent] = 0
            owner = np.repeat(np.arange(self.n, dtype=np.int64), counts)
            starts = np.cumsum(counts) - counts
            k = np.arange(owner.size) - np.repeat(starts, counts)
            times = phase[owner] + k * period[owner]
        steps = np.minimum((times / dt).astype(np.int64), n_steps - 1)
        keys = np.unique(steps * self.n + owner)
        step_of = keys // self.n
        inputs = (keys % self.n).astype(np.int32)
        step_ptr = np.searchsorted(step_of, np.arange(n_steps + 1), side="left").astype(np.int64)
        return SpikeRaster(step_ptr, inputs, n_steps, self.n)


def _seed_seq(seed) -> np.random.SeedSequence:
    if isinstance(seed, (tuple, list)):
        return np.random.SeedSequence([int(s) for s in seed])
    return np.random.SeedSequence(int(seed))


def steps_for(duration: float, dt: float) -> int:
    if duration <= 0:
        raise ParameterError("duration must be positive")
    n = round(duration / dt)
    if n < 1 or abs(n * dt - duration) > 1e-9 * max(1.0, duration):
        raise ParameterError(f"duration {duration} ms is not a multiple of dt={dt} ms")
    return int(n)


def intensity_to_frequency(image, f_min: float, f_max: float) -> np.ndarray:
    """Linear, decreasing map: intensity 0 -> f_max, intensity 1 -> f_min."""
    x = np.asarray(image, dtype=np.float64).ravel()
    if x.size == 0 or not np.all(np.isfinite(x)) or x.min() < 0.0 or x.max() > 1.0:
        raise InputDomainError("image intensities must be finite and within [0, 1]")
    if not f_min < f_max:
        raise ParameterError("f_min must be below f_max")
    return f_min + (1.0 - x) * (f_max - f_min)


def encode_image(image, config: EncoderConfig | None = None, seed=0) -> SpikeTrainSet:
    config = config or EncoderConfig()
    if config.mode not in ENCODING_MODES:
        raise ParameterError(f"unknown encoding mode {config.mode!r}")
    freqs = intensity_to_frequency(image, config.f_min, config.f_max)
    return SpikeTrainSet(freqs, config.mode, config.f_min, config.f_max, seed)
