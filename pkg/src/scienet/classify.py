"""One-hidden-layer MLP classifier trained with momentum SGD on templates or raw images.

Training never sees perturbed data: ``train_classifier`` has no way to
accept a perturbation, and ``evaluate`` only applies one at inference.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import dataio
from .config import MlpConfig
from .errors import FormatError, NumericError, StructuralError


@dataclass
class MlpModel:
    w1: np.ndarray  # (n, hidden)
    b1: np.ndarray
    w2: np.ndarray  # (hidden, classes)
    b2: np.ndarray
    config: MlpConfig = field(default_factory=MlpConfig)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("w1", "b1", "w2", "b2"):
            setattr(self, name, np.ascontiguousarray(getattr(self, name), dtype=np.float32))
        n, h = self.w1.shape
        if self.b1.shape != (h,) or self.w2.shape[0] != h or self.b2.shape != (self.w2.shape[1],):
            raise StructuralError("inconsistent MLP parameter shapes")

    @property
    def n_inputs(self) -> int:
        return self.w1.shape[0]

    @property
    def n_classes(self) -> int:
        return self.w2.shape[1]

    @property
    def layer_sizes(self):
        return [self.w1.shape[0], self.w1.shape[1], self.w2.shape[1]]

    @classmethod
    def initialize(cls, n_inputs, n_classes, config: MlpConfig | None = None, seed=0):
        """He-normal first layer, Glorot-scaled output layer, zero biases."""
        config = config or MlpConfig()
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xC1A55]))
        h = config.hidden
        w1 = rng.standard_normal((n_inputs, h)) * np.sqrt(2.0 / n_inputs)
        w2 = rng.standard_normal((h, n_classes)) * np.sqrt(1.0 / h)
        return cls(w1, np.zeros(h), w2, np.zeros(n_classes), config)

    def params(self):
        return [self.w1, self.b1, self.w2, self.b2]

    def copy(self) -> "MlpModel":
        return MlpModel(*(p.copy() for p in self.params()), self.config, dict(self.meta))

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.params())


def _check_inputs(model: MlpModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float32)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != model.n_inputs:
        raise StructuralError(f"expected inputs of width {model.n_inputs}, got shape {x.shape}")
    return x


def softmax(logits) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _forward(model, x):
    h_pre = x @ model.w1 + model.b1
    h = np.maximum(h_pre, 0.0)
    return h_pre, h, h @ model.w2 + model.b2


def predict(model: MlpModel, x) -> np.ndarray:
    """Class probabilities, one row per input."""
    x = _check_inputs(model, x)
    _, _, logits = _forward(model, x)
    return softmax(logits.astype(np.float64))


def loss_and_grads(model: MlpModel, x, y):
    """Mean cross-entropy and its gradients (w1, b1, w2, b2), in float64."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    w1, b1, w2, b2 = (p.astype(np.float64) for p in model.params())
    h_pre = x @ w1 + b1
    h = np.maximum(h_pre, 0.0)
    logits = h @ w2 + b2
    probs = softmax(logits)
    m = x.shape[0]
    loss = -np.mean(np.log(probs[np.arange(m), y] + 1e-300))
    dlogits = probs
    dlogits[np.arange(m), y] -= 1.0
    dlogits /= m
    gw2 = h.T @ dlogits
    gb2 = dlogits.sum(axis=0)
    dh = (dlogits @ w2.T) * (h_pre > 0)
    gw1 = x.T @ dh
    gb1 = dh.sum(axis=0)
    return float(loss), [gw1, gb1, gw2, gb2]


def _grads32(model, x, y):
    """float32 training-path gradients (same algebra as ``loss_and_grads``)."""
    h_pre, h, logits = _forward(model, x)
    probs = softmax(logits)
    m = x.shape[0]
    loss = -float(np.mean(np.log(probs[np.arange(m), y].astype(np.float64) + 1e-30)))
    dlogits = probs
    dlogits[np.arange(m), y] -= 1.0
    dlogits /= m
    gw2 = h.T @ dlogits
    gb2 = dlogits.sum(axis=0)
    dh = (dlogits @ model.w2.T) * (h_pre > 0)
    gw1 = x.T @ dh
    gb1 = dh.sum(axis=0)
    return loss, [gw1, gb1, gw2, gb2]


@dataclass
class EpochLog:
    epoch: int
    lr: float
    train_loss: float
    train_accuracy: float
    val_loss: float | None
    val_accuracy: float | None


def accuracy(model, x, y) -> float:
    if len(y) == 0:
        return float("nan")
    return float(np.mean(predict(model, x).argmax(axis=1) == np.asarray(y)))


def _mean_loss(model, x, y) -> float:
    p = predict(model, x)
    return float(-np.mean(np.log(p[np.arange(len(y)), y] + 1e-300)))


def train_classifier(x, y, config: MlpConfig | None = None, seed=0, n_classes: int = 10,
                     x_val=None, y_val=None):
    """Mini-batch momentum SGD on cross-entropy; returns ``(model, epoch_logs)``.

    The learning rate is multiplied by ``lr_decay`` every ``lr_step`` epochs.
    Deterministic for a fixed ``seed``.
    """
    config = config or MlpConfig()
    x = np.asarray(x, dtype=np.float32)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise StructuralError("x must be (m, n) and y must have m labels")
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        raise StructuralError(f"labels must lie in [0, {n_classes})")
    has_val = x_val is not None and len(x_val) > 0
    if has_val:
        x_val = np.asarray(x_val, dtype=np.float32)
        y_val = np.asarray(y_val, dtype=np.int64)
    model = MlpModel.initialize(x.shape[1], n_classes, config, seed)
    velocity = [np.zeros_like(p) for p in model.params()]
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x5CD]))
    logs = []
    m = x.shape[0]
    for epoch in range(config.epochs):
        lr = config.learning_rate * config.lr_decay ** (epoch // config.lr_step)
        order = rng.permutation(m)
        total = 0.0
        for start in range(0, m, config.batch_size):
            batch = order[start : start + config.batch_size]
            loss, grads = _grads32(model, x[batch], y[batch])
            total += loss * batch.size
            for p, v, gr in zip(model.params(), velocity, grads):
                v *= config.momentum
                v -= lr * gr
                p += v
        if not model.all_finite():
            raise NumericError(f"non-finite MLP parameters after epoch {epoch + 1}")
        logs.append(
            EpochLog(
                epoch=epoch + 1,
                lr=lr,
                train_loss=total / max(m, 1),
                train_accuracy=accuracy(model, x, y),
                val_loss=_mean_loss(model, x_val, y_val) if has_val else None,
                val_accuracy=accuracy(model, x_val, y_val) if has_val else None,
            )
        )
    model.meta = {"seed": int(seed), "n_train": int(m)}
    return model, logs


def training_log_csv(logs) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epoch", "lr", "train_loss", "train_accuracy", "val_loss", "val_accuracy"])
    for r in logs:
        w.writerow([
            r.epoch, f"{r.lr:.6g}", f"{r.train_loss:.6f}", f"{r.train_accuracy:.6f}",
            "" if r.val_loss is None else f"{r.val_loss:.6f}",
            "" if r.val_accuracy is None else f"{r.val_accuracy:.6f}",
        ])
    return buf.getvalue()


@dataclass
class EvalResult:
    condition: str
    accuracy: float
    per_class: np.ndarray
    predictions: np.ndarray
    labels: np.ndarray

    def recount(self) -> float:
        return float(np.sum(self.predictions == self.labels)) / len(self.labels)


@dataclass(frozen=True)
class Preprocessor:
    """Template extraction settings for ``evaluate``; ``None`` means raw images."""

    model: object
    w: float = 0.1
    k: int = 5

    def __call__(self, images):
        from .context import extract_batch

        return extract_batch(self.model, images, self.w, self.k)


def evaluate(model: MlpModel, images, labels, perturbation=None, preprocessor=None, seed=0,
             ids=None, n_classes: int | None = None) -> EvalResult:
    """Perturb (optional), pre-process (optional), predict, and score top-1 accuracy."""
    images = np.asarray(images, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if images.ndim != 2 or labels.shape != (images.shape[0],):
        raise StructuralError("images must be (m, n) with m labels")
    x = images
    condition = "clean"
    if perturbation is not None:
        x = perturbation.apply_batch(x, seed, ids=ids)
        condition = perturbation.label
    if preprocessor is not None:
        x = preprocessor(x)
    preds = predict(model, x).argmax(axis=1) if len(x) else np.zeros(0, dtype=np.int64)
    n_classes = n_classes or model.n_classes
    per_class = np.full(n_classes, np.nan)
    for c in range(n_classes):
        sel = labels == c
        if sel.any():
            per_class[c] = np.mean(preds[sel] == c)
    acc = float(np.mean(preds == labels)) if len(labels) else float("nan")
    return EvalResult(condition, acc, per_class, preds, labels)


def mlp_model_bytes(model: MlpModel) -> bytes:
    flat = np.concatenate([p.ravel() for p in model.params()])
    meta = {
        "layer_sizes": model.layer_sizes,
        "shapes": [list(p.shape) for p in model.params()],
        "config": asdict(model.config),
        "meta": model.meta,
    }
    return dataio.tensor_bytes(flat, "mlp_model", meta)


def save_mlp(path, model: MlpModel) -> None:
    Path(path).write_bytes(mlp_model_bytes(model))


def load_mlp(path) -> MlpModel:
    flat, h = dataio.load_tensor(path, expect_tag="mlp_model")
    try:
        shapes = [tuple(s) for s in h["shapes"]]
        sizes = [int(np.prod(s)) for s in shapes]
        if flat.ndim != 1 or sum(sizes) != flat.size or len(shapes) != 4:
            raise ValueError("payload does not match declared shapes")
        parts = np.split(flat, np.cumsum(sizes)[:-1])
        params = [p.reshape(s) for p, s in zip(parts, shapes)]
        model = MlpModel(*params, MlpConfig(**h["config"]), dict(h.get("meta", {})))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad MLP model file: {exc}", offset=8) from exc
    if not model.all_finite():
        raise FormatError("MLP parameters are not finite", offset=8)
    return model
