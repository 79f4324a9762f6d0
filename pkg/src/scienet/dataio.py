"""Dataset ingestion and on-disk formats.

TensorFile layout (all integers little-endian)::

    b"SCNT"                       4-byte magic
    uint32 header_length
    header_length bytes           UTF-8 JSON, keys sorted
    payload                       float32 little-endian, C order

The header always carries ``format_version``, ``dims``, ``dtype``,
``endianness`` and ``tag``; anything else is free-form metadata.  Model
files use the same container with tags ``snn_model`` and ``mlp_model``.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import EncoderConfig, HomeostasisParams, InhibitionParams, LifParams, StdpParams
from .errors import FormatError, StructuralError

MAGIC = b"SCNT"
FORMAT_VERSION = 1
CIFAR_PIXELS = 3072
CIFAR_RECORD = 1 + CIFAR_PIXELS
CIFAR_TRAIN_FILES = [f"data_batch_{i}.bin" for i in range(1, 6)]
CIFAR_TEST_FILES = ["test_batch.bin"]
CIFAR_CLASSES = (
    "airplane", "automobile", "bird", "cat", "deer",
    "dog", "frog", "horse", "ship", "truck",
)


@dataclass(frozen=True)
class LabeledImage:
    pixels: np.ndarray  # (3072,) channel-major, in [0, 1]
    label: int
    id: int


class ImageSet:
    """Images held as one (m, n) float64 array with parallel labels and ids."""

    def __init__(self, images, labels, ids=None):
        images = np.asarray(images, dtype=np.float64)
        if images.ndim != 2:
            raise StructuralError("images must be a 2-D array (m, n)")
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (images.shape[0],):
            raise StructuralError("labels must have one entry per image")
        ids = np.arange(images.shape[0]) if ids is None else np.asarray(ids, dtype=np.int64)
        self.images = images
        self.labels = labels
        self.ids = ids

    def __len__(self):
        return self.images.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice) or isinstance(i, np.ndarray):
            return ImageSet(self.images[i], self.labels[i], self.ids[i])
        return LabeledImage(self.images[i], int(self.labels[i]), int(self.ids[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def head(self, m: int) -> "ImageSet":
        return self if not m or m >= len(self) else self[:m]


def parse_cifar10_bytes(raw: bytes, id_offset: int = 0, byte_offset: int = 0) -> ImageSet:
    if len(raw) % CIFAR_RECORD:
        whole = len(raw) // CIFAR_RECORD
        raise FormatError(
            f"truncated CIFAR-10 batch: {len(raw)} bytes is not a multiple of {CIFAR_RECORD}",
            offset=byte_offset + whole * CIFAR_RECORD,
        )
    recs = np.frombuffer(raw, dtype=np.uint8).reshape(-1, CIFAR_RECORD)
    labels = recs[:, 0].astype(np.int64)
    bad = np.flatnonzero(labels > 9)
    if bad.size:
        raise FormatError(f"label byte {labels[bad[0]]} out of range", offset=byte_offset + int(bad[0]) * CIFAR_RECORD)
    images = recs[:, 1:].astype(np.float64) / 255.0
    ids = np.arange(len(labels), dtype=np.int64) + id_offset
    return ImageSet(images, labels, ids)


def load_cifar10(path, split: str = "train") -> ImageSet:
    """Read CIFAR-10 binary batches from a directory (or a single ``.bin`` file)."""
    path = Path(path)
    if path.is_file():
        files = [path]
    else:
        if split not in ("train", "test"):
            raise StructuralError(f"split must be 'train' or 'test', got {split!r}")
        names = CIFAR_TRAIN_FILES if split == "train" else CIFAR_TEST_FILES
        sub = path / "cifar-10-batches-bin"
        root = sub if sub.is_dir() else path
        files = [root / nm for nm in names if (root / nm).exists()]
        if not files:
            raise FileNotFoundError(f"no CIFAR-10 {split} batches under {path}")
    parts = []
    count = 0
    for f in files:
        part = parse_cifar10_bytes(f.read_bytes(), id_offset=count)
        count += len(part)
        parts.append(part)
    return ImageSet(
        np.concatenate([p.images for p in parts]),
        np.concatenate([p.labels for p in parts]),
        np.concatenate([p.ids for p in parts]),
    )


def write_cifar10(path, images, labels) -> None:
    """Write images (values in [0, 1]) as CIFAR-10 binary records."""
    px = np.clip(np.rint(np.asarray(images, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)
    labels = np.asarray(labels, dtype=np.uint8).reshape(-1, 1)
    if px.ndim != 2 or px.shape[1] != CIFAR_PIXELS or labels.shape[0] != px.shape[0]:
        raise StructuralError("expected (m, 3072) images and m labels")
    Path(path).write_bytes(np.hstack([labels, px]).tobytes())


# -- TensorFile -----------------------------------------------------------

def _encode_header(header: dict) -> bytes:
    return json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")


def tensor_bytes(array, tag: str, meta: dict | None = None) -> bytes:
    arr = np.ascontiguousarray(array, dtype="<f4")
    header = dict(meta or {})
    header.update(
        format_version=FORMAT_VERSION,
        dims=list(arr.shape),
        dtype="float32",
        endianness="little",
        tag=tag,
    )
    hb = _encode_header(header)
    return MAGIC + struct.pack("<I", len(hb)) + hb + arr.tobytes()


def save_tensor(path, array, tag: str = "tensor", meta: dict | None = None) -> None:
    Path(path).write_bytes(tensor_bytes(array, tag, meta))


def parse_tensor(raw: bytes, expect_tag: str | None = None):
    if len(raw) < 8 or raw[:4] != MAGIC:
        raise FormatError("not a tensor file (bad magic)", offset=0)
    (hlen,) = struct.unpack("<I", raw[4:8])
    if 8 + hlen > len(raw):
        raise FormatError("header extends past end of file", offset=4)
    try:
        header = json.loads(raw[8 : 8 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"header is not valid JSON: {exc}", offset=8) from exc
    for key in ("dims", "dtype", "endianness", "tag", "format_version"):
        if key not in header:
            raise FormatError(f"header lacks {key!r}", offset=8)
    if header["dtype"] != "float32" or header["endianness"] != "little":
        raise FormatError(f"unsupported dtype {header['dtype']}/{header['endianness']}", offset=8)
    if header["format_version"] != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {header['format_version']}", offset=8)
    if expect_tag is not None and header["tag"] != expect_tag:
        raise FormatError(f"expected a {expect_tag!r} file, got {header['tag']!r}", offset=8)
    dims = header["dims"]
    if not isinstance(dims, list) or any((not isinstance(x, int)) or x < 0 for x in dims):
        raise FormatError(f"bad dims {dims!r}", offset=8)
    expected = int(np.prod(dims, dtype=np.int64)) * 4
    payload = raw[8 + hlen :]
    if len(payload) != expected:
        raise FormatError(
            f"payload is {len(payload)} bytes, dims {dims} need {expected}", offset=8 + hlen
        )
    arr = np.frombuffer(payload, dtype="<f4").reshape(dims).astype(np.float32)
    return arr, header


def load_tensor(path, expect_tag: str | None = None):
    """Return ``(array, header)``; the header is validated before the payload is read."""
    return parse_tensor(Path(path).read_bytes(), expect_tag)


# -- SnnModel -------------------------------------------------------------

def _section(obj) -> dict:
    from dataclasses import asdict

    return asdict(obj)


def snn_model_bytes(model) -> bytes:
    meta = {
        "d": model.d,
        "n": model.n,
        "g_min": model.stdp.g_min,
        "g_max": model.stdp.g_max,
        "lif": _section(model.lif),
        "inhibition": _section(model.inhibition),
        "stdp": _section(model.stdp),
        "encoder": _section(model.encoder),
        "homeostasis": _section(model.homeostasis),
        "theta": [float(t) for t in model.theta],
        "meta": model.meta,
    }
    return tensor_bytes(model.g, "snn_model", meta)


def save_snn_model(path, model) -> None:
    Path(path).write_bytes(snn_model_bytes(model))


def load_snn_model(path):
    from .network import SnnModel

    g, h = load_tensor(path, expect_tag="snn_model")
    if g.ndim != 2 or list(g.shape) != [h.get("d"), h.get("n")]:
        raise FormatError(f"dims {list(g.shape)} disagree with d={h.get('d')}, n={h.get('n')}", offset=8)
    try:
        model = SnnModel(
            g,
            LifParams(**h["lif"]),
            InhibitionParams(**h["inhibition"]),
            StdpParams(**h["stdp"]),
            EncoderConfig(**h["encoder"]),
            dict(h.get("meta", {})),
            HomeostasisParams(**h["homeostasis"]),
            np.asarray(h["theta"], dtype=np.float64),
        )
    except (KeyError, TypeError, ValueError, StructuralError) as exc:
        raise FormatError(f"bad model hyperparameters: {exc}", offset=8) from exc
    if not model.in_bounds():
        raise FormatError("conductances outside [g_min, g_max]", offset=8)
    return model


# -- images ---------------------------------------------------------------

def to_hwc(pixels, side: int = 32) -> np.ndarray:
    """Channel-major flat vector -> (H, W, C) view copy."""
    px = np.asarray(pixels).reshape(3, side, side)
    return np.transpose(px, (1, 2, 0))


def from_hwc(img) -> np.ndarray:
    return np.transpose(np.asarray(img), (2, 0, 1)).reshape(-1)


def ppm_bytes(pixels, side: int = 32) -> bytes:
    hwc = np.clip(np.rint(to_hwc(pixels, side) * 255.0), 0, 255).astype(np.uint8)
    return f"P6\n{side} {side}\n255\n".encode("ascii") + hwc.tobytes()


def save_ppm(path, pixels, side: int = 32) -> None:
    Path(path).write_bytes(ppm_bytes(pixels, side))
