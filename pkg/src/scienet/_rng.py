"""Counter-based uniforms for the plasticity draws.

Each Bernoulli draw is keyed by (presentation key, step, neuron, synapse,
kind), so the compiled kernel and the numpy fallback see the same stream
regardless of evaluation order.  The compiled kernel re-implements
``splitmix64`` bit for bit.
"""

import numpy as np

KIND_LTP = 0
KIND_LTD_SILENT = 1
KIND_LTD_PRE = 2

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _M64
    z = x
    z = ((z ^ (z >> 30)) * _MIX1) & _M64
    z = ((z ^ (z >> 27)) * _MIX2) & _M64
    return z ^ (z >> 31)


def splitmix64_array(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64) + np.uint64(_GOLDEN)
    z = x
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def presentation_key(seed: int, *parts: int) -> int:
    """Fold a seed and any number of counters (epoch, image index) into one key."""
    k = splitmix64(int(seed) & _M64)
    for p in parts:
        k = splitmix64(k ^ (int(p) & _M64))
    return k


def draw_key(key: int, step: int, neuron: int, kind: int) -> int:
    k = splitmix64(key ^ (int(step) & _M64))
    k = splitmix64(k ^ (int(neuron) & _M64))
    return splitmix64(k ^ int(kind))


def uniforms(key: int, step: int, neuron: int, kind: int, synapses: np.ndarray) -> np.ndarray:
    """Open-interval (0, 1) uniforms, one per synapse index."""
    base = np.uint64(draw_key(key, step, neuron, kind))
    z = splitmix64_array(np.asarray(synapses, dtype=np.uint64) ^ base)
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * (1.0 / 9007199254740992.0)


def uniform(key: int, step: int, neuron: int, kind: int, synapse: int) -> float:
    z = splitmix64(draw_key(key, step, neuron, kind) ^ int(synapse))
    return ((z >> 11) + 0.5) * (1.0 / 9007199254740992.0)
