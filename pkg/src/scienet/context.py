"""Template pre-processor: score, select top-k, combine, blend, rescale.

Learned conductances are high where training images were dark (dark
pixels fire faster), so the combined context is flipped back to image
polarity (``1 - normalized sum``) before it is blended with the input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputDomainError, ParameterError, StructuralError


@dataclass(frozen=True)
class ContextTemplate:
    values: np.ndarray  # (n,) in [0, 1]
    source_neurons: np.ndarray  # (k,) distinct neuron ids
    score_vector: np.ndarray  # (d,)


def _image(model, image) -> np.ndarray:
    x = np.asarray(image, dtype=np.float64).ravel()
    if x.size != model.n:
        raise StructuralError(f"image has {x.size} values, model expects {model.n}")
    if not np.all(np.isfinite(x)) or x.min() < 0.0 or x.max() > 1.0:
        raise InputDomainError("image intensities must lie in [0, 1]")
    return x


def score(model, image) -> np.ndarray:
    """Raw-intensity match of the image against every neuron: ``g @ x``."""
    return model.g.astype(np.float64) @ _image(model, image)


def score_batch(model, images) -> np.ndarray:
    x = np.asarray(images, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.n:
        raise StructuralError(f"expected images of shape (m, {model.n})")
    return x @ model.g.astype(np.float64).T


def top_k_select(scores, k: int) -> np.ndarray:
    """Indices of the ``k`` largest scores, ties to the lower index, best first."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    k = int(k)
    if not 1 <= k <= scores.size:
        raise ParameterError(f"k={k} outside [1, {scores.size}]")
    order = np.argsort(-scores, kind="stable")
    return order[:k]


def minmax(v) -> np.ndarray:
    """Rescale to [0, 1]; a constant vector maps to all 0.5."""
    v = np.asarray(v, dtype=np.float64)
    lo, hi = v.min(), v.max()
    if hi <= lo:
        return np.full(v.shape, 0.5)
    return (v - lo) / (hi - lo)


def combine_contexts(model, indices) -> np.ndarray:
    """Element-wise sum of the selected conductance rows, min-max normalized."""
    idx = np.asarray(indices, dtype=np.int64).ravel()
    if idx.size == 0 or idx.min() < 0 or idx.max() >= model.d:
        raise ParameterError(f"neuron indices must lie in [0, {model.d})")
    total = np.zeros(model.n)
    for j in idx:
        total += model.g[j]
    return minmax(total)


def extract_template(model, image, w: float = 0.1, k: int = 5) -> ContextTemplate:
    if not 0.0 <= w <= 1.0:
        raise ParameterError("blend weight w must lie in [0, 1]")
    x = _image(model, image)
    scores = model.g.astype(np.float64) @ x
    chosen = top_k_select(scores, k)
    context = 1.0 - combine_contexts(model, chosen)
    blended = (1.0 - w) * x + w * context
    return ContextTemplate(minmax(blended), chosen, scores)


def extract_batch(model, images, w: float = 0.1, k: int = 5) -> np.ndarray:
    """Templates for many images; row i equals ``extract_template(images[i]).values``."""
    images = np.asarray(images, dtype=np.float64).reshape(-1, model.n)
    out = np.empty_like(images)
    for i, x in enumerate(images):
        out[i] = extract_template(model, x, w, k).values
    return out


def context_vector(model, image, k: int = 5) -> np.ndarray:
    """The normalized combined context selected for ``image``."""
    return combine_contexts(model, top_k_select(score(model, image), k))


def context_distance(model, image_a, image_b, k: int = 5) -> float:
    """Euclidean distance between the contexts selected for two images."""
    ca = context_vector(model, image_a, k)
    cb = context_vector(model, image_b, k)
    return float(np.sqrt(np.sum((ca - cb) ** 2)))
