"""On-disk formats: raw float32 tensor files, 8-bit PNG export, checkpoints.

Tensor files hold raw little-endian 32-bit floats in row-major order next to
a JSON sidecar header carrying dtype, shape, a sha256 content checksum, and
format-specific metadata (labels and class names for fused stores). The raw
layout is trivially loadable by any external deep-learning stack. All JSON is
written with sorted keys so identical content is identical bytes.

PNGs are 8-bit previews only; analysis fidelity lives in the tensor files.
Quantization maps each image kind's declared value range linearly onto
0-255, rounding half away from zero.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .classifier import SoftmaxModel
from .encoders import FusedImage, GrayImage

TENSOR_SUFFIX = ".f32"
TENSOR_FORMAT = "tensor/v1"
MANIFEST_FORMAT = "manifest/v1"
CHECKPOINT_FORMAT = "checkpoint/v1"


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


def header_path(path) -> Path:
    """JSON sidecar location for a tensor file."""
    return Path(path).with_suffix(".json")


def checksum_bytes(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def save_tensor(path, array: np.ndarray, meta: dict | None = None) -> str:
    """Write an array as raw '<f4' bytes plus a JSON header; returns checksum."""
    path = Path(path)
    if path.suffix != TENSOR_SUFFIX:
        raise ValueError(f"tensor files use the {TENSOR_SUFFIX} suffix, got {path.name}")
    raw = np.ascontiguousarray(array, dtype="<f4").tobytes()
    digest = checksum_bytes(raw)
    path.write_bytes(raw)
    header = {
        "format": TENSOR_FORMAT,
        "dtype": "float32",
        "shape": list(np.shape(array)),
        "checksum": digest,
    }
    if meta:
        overlap = set(meta) & set(header)
        if overlap:
            raise ValueError(f"meta keys {sorted(overlap)} collide with header fields")
        header.update(meta)
    write_json(header_path(path), header)
    return digest


def load_tensor(path) -> tuple[np.ndarray, dict]:
    """Read a tensor file back, verifying checksum and element count."""
    path = Path(path)
    header = read_json(header_path(path))
    if header.get("format") != TENSOR_FORMAT or header.get("dtype") != "float32":
        raise ValueError(f"{path}: not a float32 tensor file")
    raw = path.read_bytes()
    if checksum_bytes(raw) != header["checksum"]:
        raise ValueError(f"{path}: checksum mismatch, file corrupt or modified")
    shape = tuple(header["shape"])
    array = np.frombuffer(raw, dtype="<f4")
    if array.size != int(np.prod(shape, dtype=np.int64)):
        raise ValueError(f"{path}: payload holds {array.size} values, "
                         f"header shape {shape} disagrees")
    return array.reshape(shape).copy(), header


@dataclass
class FusedStore:
    """A fused-image tensor store read back into memory."""

    tensor: np.ndarray  # (n, 3, side, side) float32
    labels: np.ndarray  # (n,) int64
    class_names: dict[int, str]
    checksum: str

    @property
    def feature_side(self) -> int:
        return self.tensor.shape[2]

    def features(self) -> np.ndarray:
        """Flattened float64 rows for the classifier."""
        return self.tensor.reshape(self.tensor.shape[0], -1).astype(np.float64)


def save_fused_store(path, tensor: np.ndarray, labels: np.ndarray,
                     class_names: dict[int, str]) -> str:
    tensor = np.asarray(tensor)
    if tensor.ndim != 4 or tensor.shape[1] != 3:
        raise ValueError(f"fused store expects shape (n, 3, S, S), got {tensor.shape}")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (tensor.shape[0],):
        raise ValueError(f"{tensor.shape[0]} tensor rows but {labels.size} labels")
    meta = {
        "labels": labels.tolist(),
        "class_names": {str(cid): name for cid, name in sorted(class_names.items())},
    }
    return save_tensor(path, tensor, meta)


def load_fused_store(path) -> FusedStore:
    tensor, header = load_tensor(path)
    if tensor.ndim != 4 or tensor.shape[1] != 3:
        raise ValueError(f"{path}: not a fused store, shape is {tensor.shape}")
    labels = np.asarray(header["labels"], dtype=np.int64)
    class_names = {int(cid): name for cid, name in header["class_names"].items()}
    return FusedStore(tensor, labels, class_names, header["checksum"])


def quantize(pixels: np.ndarray, value_range: tuple[float, float]) -> np.ndarray:
    """Map pixels linearly from their declared range onto uint8 codes 0-255.

    Rounds half away from zero, so the midpoint of a symmetric range lands
    on 128.
    """
    lo, hi = value_range
    scaled = (np.asarray(pixels, dtype=np.float64) - lo) / (hi - lo) * 255.0
    return np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)


def write_gray_png(path, image: GrayImage) -> None:
    Image.fromarray(quantize(image.pixels, image.value_range), mode="L").save(path)


def write_fused_png(path, fused: FusedImage) -> None:
    """Export a fused image as RGB, one quantized encoder channel per color."""
    from .encoders import VALUE_RANGES

    planes = [quantize(fused.channels[i], VALUE_RANGES[kind])
              for i, kind in enumerate(fused.channel_order)]
    Image.fromarray(np.stack(planes, axis=-1), mode="RGB").save(path)


def save_checkpoint(prefix, model: SoftmaxModel, config: dict,
                    history: dict | None = None, seed: int | None = None) -> None:
    """Persist a model as weight/bias tensor files plus a metadata sidecar."""
    prefix = Path(prefix)
    weights_name = prefix.name + ".weights" + TENSOR_SUFFIX
    bias_name = prefix.name + ".bias" + TENSOR_SUFFIX
    save_tensor(prefix.with_name(weights_name), model.weights)
    save_tensor(prefix.with_name(bias_name), model.bias)
    sidecar = {
        "format": CHECKPOINT_FORMAT,
        "n_classes": model.n_classes,
        "n_features": model.n_features,
        "feature_side": model.feature_side,
        "class_names": {str(cid): name for cid, name in
                        sorted((model.class_names or {}).items())},
        "config": config,
        "seed": seed,
        "weights": weights_name,
        "bias": bias_name,
        "history": history or {},
    }
    write_json(prefix.with_suffix(".json"), sidecar)


def load_checkpoint(prefix) -> tuple[SoftmaxModel, dict]:
    """Load a checkpoint; returns (model, sidecar metadata)."""
    prefix = Path(prefix)
    sidecar = read_json(prefix.with_suffix(".json"))
    if sidecar.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{prefix}: not a checkpoint sidecar")
    weights, _ = load_tensor(prefix.with_name(sidecar["weights"]))
    bias, _ = load_tensor(prefix.with_name(sidecar["bias"]))
    if weights.shape != (sidecar["n_classes"], sidecar["n_features"]):
        raise ValueError(f"{prefix}: weight shape {weights.shape} disagrees with sidecar")
    class_names = {int(cid): name for cid, name in sidecar["class_names"].items()}
    model = SoftmaxModel(weights.astype(np.float64), bias.astype(np.float64),
                         sidecar["feature_side"], class_names or None)
    return model, sidecar
