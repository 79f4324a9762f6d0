"""Three-level SNN: spike-train input, fully connected LIF layer, lateral inhibition."""

from __future__ import annotations

from dataclasses import dataclass, field

import math

import numpy as np

from . import _rng, backend
from .config import EncoderConfig, HomeostasisParams, InhibitionParams, LifParams, StdpParams
from .encoder import SpikeTrainSet, encode_image, steps_for
from .errors import ParameterError, StructuralError
from .plasticity import PlasticityTables


@dataclass
class SnnModel:
    """Learned state plus hyperparameters.

    ``g`` is the d x n float32 conductance matrix (row j = neuron j's
    context); ``theta`` holds the per-neuron adaptive threshold offsets.
    """

    g: np.ndarray
    lif: LifParams = field(default_factory=LifParams)
    inhibition: InhibitionParams = field(default_factory=InhibitionParams)
    stdp: StdpParams = field(default_factory=StdpParams)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    meta: dict = field(default_factory=dict)
    homeostasis: HomeostasisParams = field(default_factory=HomeostasisParams)
    theta: np.ndarray | None = None

    def __post_init__(self):
        g = np.ascontiguousarray(self.g, dtype=np.float32)
        if g.ndim != 2 or g.shape[0] < 1 or g.shape[1] < 1:
            raise StructuralError(f"conductance matrix must be 2-D and non-empty, got {g.shape}")
        self.g = g
        theta = np.zeros(g.shape[0]) if self.theta is None else np.array(self.theta, dtype=np.float64)
        if theta.shape != (g.shape[0],):
            raise StructuralError("theta must hold one offset per neuron")
        self.theta = theta

    @property
    def d(self) -> int:
        return self.g.shape[0]

    @property
    def n(self) -> int:
        return self.g.shape[1]

    @classmethod
    def initialize(cls, d, n, seed=0, lif=None, inhibition=None, stdp=None, encoder=None,
                   init_low=0.4, init_high=0.6, meta=None, homeostasis=None):
        """Uniform random conductances in the middle band of ``[g_min, g_max]``."""
        stdp = stdp or StdpParams()
        span = stdp.g_max - stdp.g_min
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x5EED]))
        g = rng.uniform(stdp.g_min + init_low * span, stdp.g_min + init_high * span, size=(d, n))
        return cls(
            g.astype(np.float32),
            lif or LifParams(),
            inhibition or InhibitionParams(),
            stdp,
            encoder or EncoderConfig(),
            dict(meta or {}),
            homeostasis or HomeostasisParams(),
        )

    def copy(self) -> "SnnModel":
        return SnnModel(self.g.copy(), self.lif, self.inhibition, self.stdp, self.encoder,
                        dict(self.meta), self.homeostasis, self.theta.copy())

    def in_bounds(self) -> bool:
        return bool(
            self.g.min() >= np.float32(self.stdp.g_min) and self.g.max() <= np.float32(self.stdp.g_max)
        )


@dataclass
class KernelArgs:
    a: float
    b: float
    c: float
    v_reset: float
    v_threshold: float
    dt: float
    dv_inh: float
    inh_steps: int
    stdp: StdpParams
    tables: PlasticityTables
    theta: np.ndarray
    theta_plus: float


@dataclass
class PresentationTrace:
    spike_steps: np.ndarray
    spike_neurons: np.ndarray
    counts: np.ndarray
    dt: float
    n_steps: int
    n_ltp: int = 0
    n_ltd: int = 0
    v: np.ndarray | None = None  # (n_steps, d) potentials after each step, if recorded

    @property
    def spike_times(self) -> np.ndarray:
        return self.spike_steps * self.dt

    def times_of(self, neuron: int) -> np.ndarray:
        return self.spike_steps[self.spike_neurons == neuron] * self.dt

    def inhibition_onsets(self) -> np.ndarray:
        """Steps at which inhibition was broadcast (every spike when d > 1)."""
        if self.counts.size < 2:
            return self.spike_steps[:0]
        return self.spike_steps

    def same_as(self, other: "PresentationTrace") -> bool:
        return (
            np.array_equal(self.spike_steps, other.spike_steps)
            and np.array_equal(self.spike_neurons, other.spike_neurons)
            and self.n_ltp == other.n_ltp
            and self.n_ltd == other.n_ltd
        )


def synaptic_current(spikes_active, g_row) -> float:
    """Sum of conductances over inputs pulsing this step (unit pulses)."""
    mask = np.asarray(spikes_active, dtype=bool).ravel()
    g_row = np.asarray(g_row).ravel()
    if mask.shape != g_row.shape:
        raise StructuralError(f"mask has {mask.size} entries, conductance row has {g_row.size}")
    active = g_row[mask]
    if active.size == 0:
        return 0.0
    return float(np.cumsum(active, dtype=np.float64)[-1])


def _seed_parts(seed) -> tuple:
    if isinstance(seed, (tuple, list)):
        return tuple(int(s) for s in seed)
    return (int(seed),)


def kernel_args(model: SnnModel, freqs) -> KernelArgs:
    lif = model.lif
    inh_steps = int(round(model.inhibition.t_inh / lif.dt))
    return KernelArgs(
        lif.a, lif.b, lif.c, lif.v_reset, lif.v_threshold, lif.dt,
        model.inhibition.dv_inh, inh_steps, model.stdp,
        PlasticityTables.build(freqs, model.stdp, lif.dt),
        model.theta, model.homeostasis.theta_plus,
    )


def run_presentation(model: SnnModel, spikes, duration=None, learning=False, seed=0,
                     backend_name=None, record_v=False) -> PresentationTrace:
    """Show one input to the network for ``duration`` ms (encoder default if None).

    ``spikes`` is an image vector in [0, 1] or an already encoded
    ``SpikeTrainSet``.  Potentials and inhibition timers start fresh; the
    learned threshold offsets ``model.theta`` carry over.  With ``learning``
    the conductances (and offsets) are updated in place.
    """
    parts = _seed_parts(seed)
    if not isinstance(spikes, SpikeTrainSet):
        image = np.asarray(spikes, dtype=np.float64).ravel()
        if image.size != model.n:
            raise StructuralError(f"image has {image.size} values, model expects {model.n}")
        spikes = encode_image(image, model.encoder, seed=parts)
    if spikes.n != model.n:
        raise StructuralError(f"spike set has {spikes.n} trains, model expects {model.n}")
    duration = model.encoder.duration if duration is None else duration
    if duration <= 0:
        raise ParameterError("duration must be positive")
    raster = spikes.raster(duration, model.lif.dt)
    k = kernel_args(model, spikes.frequencies)
    key = _rng.presentation_key(*parts)
    v_rec = np.zeros((raster.n_steps, model.d)) if record_v else None
    kern = backend.get(backend_name)
    steps, neurons, n_ltp, n_ltd = kern.run(model.g, raster, k, key, bool(learning), v_rec)
    if learning and model.homeostasis.theta_plus > 0:
        model.theta *= math.exp(-duration / model.homeostasis.tau_theta)
    counts = np.bincount(neurons, minlength=model.d).astype(np.int64)
    return PresentationTrace(steps, neurons, counts, model.lif.dt, raster.n_steps, n_ltp, n_ltd, v_rec)


__all__ = [
    "SnnModel",
    "PresentationTrace",
    "run_presentation",
    "synaptic_current",
    "steps_for",
]
