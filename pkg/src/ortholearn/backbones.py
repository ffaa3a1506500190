"""Embedding backends: pretrained CNN feature extractors and the fallback.

A backend maps one prepared image (input_size, input_size, 3) float32 to a
fixed-length feature vector. Real models are consumed as frozen ONNX files;
when no model file (or no onnxruntime) is available the deterministic
fallback descriptor keeps the whole pipeline runnable.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BackendError

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)

FALLBACK_FEATURE_LENGTH = 240  # (64 downsample + 16 histogram) x 3 channels


@dataclass(frozen=True)
class BackboneSpec:
    """Static properties of a feature extractor."""

    name: str
    input_size: int
    feature_length: int
    mean: tuple[float, float, float] = (0.0, 0.0, 0.0)
    std: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if self.input_size <= 0:
            raise ValueError("input_size must be positive")
        if self.feature_length <= 0:
            raise ValueError("feature_length must be positive")


MOBILENET_SPEC = BackboneSpec("mobilenet_v2", input_size=224, feature_length=1280,
                              mean=IMAGENET_MEAN, std=IMAGENET_STD)
DENSENET_SPEC = BackboneSpec("densenet40", input_size=64, feature_length=132,
                             mean=IMAGENET_MEAN, std=IMAGENET_STD)


def fallback_descriptor(image: np.ndarray) -> np.ndarray:
    """Deterministic hand-rolled image descriptor.

    Per channel: an 8x8 area-averaged downsample (64 floats) followed by a
    16-bin intensity histogram over [0, 1] (fractions of the pixel count);
    the concatenation over channels is L2-normalized.
    """
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    blocks = []
    for c in range(arr.shape[2]):
        channel = arr[:, :, c]
        down = _area_average(channel, 8)
        counts, _ = np.histogram(np.clip(channel, 0.0, 1.0), bins=16, range=(0.0, 1.0))
        hist = counts / channel.size
        blocks.append(np.concatenate([down.ravel(), hist]))
    vec = np.concatenate(blocks)
    norm = np.linalg.norm(vec)
    return vec / norm if norm > 0 else vec


def _area_average(channel: np.ndarray, size: int) -> np.ndarray:
    h, w = channel.shape
    if h == size and w == size:
        return channel
    if h % size == 0 and w % size == 0:
        return channel.reshape(size, h // size, size, w // size).mean(axis=(1, 3))
    from PIL import Image

    img = Image.fromarray(channel.astype(np.float32), mode="F")
    return np.asarray(img.resize((size, size), Image.BOX), dtype=np.float64)


class FallbackBackend:
    """Backend wrapper around :func:`fallback_descriptor`."""

    def __init__(self, input_size: int = 32, name: str = "fallback"):
        self.spec = BackboneSpec(name=name, input_size=input_size,
                                 feature_length=FALLBACK_FEATURE_LENGTH)

    def embed(self, image: np.ndarray) -> np.ndarray:
        return fallback_descriptor(image)


class OnnxBackend:
    """Frozen pretrained model loaded through onnxruntime.

    The model must map one NCHW float32 image to a (1, feature_length)
    output (the pooled feature of the network).
    """

    def __init__(self, model_path, spec: BackboneSpec):
        try:
            import onnxruntime
        except ImportError as exc:
            raise BackendError(f"onnxruntime is not installed: {exc}")
        path = Path(model_path)
        if not path.is_file():
            raise BackendError(f"model file not found: {path}")
        self.spec = spec
        self._session = onnxruntime.InferenceSession(
            str(path), providers=["CPUExecutionProvider"])
        self._input_name = self._session.get_inputs()[0].name

    def embed(self, image: np.ndarray) -> np.ndarray:
        batch = np.transpose(np.asarray(image, dtype=np.float32), (2, 0, 1))[None]
        try:
            (output,) = self._session.run(None, {self._input_name: batch})
        except Exception as exc:
            raise BackendError(f"inference failed: {exc}")
        vec = np.asarray(output, dtype=np.float64).reshape(-1)
        if vec.shape[0] != self.spec.feature_length:
            raise BackendError(
                f"model returned {vec.shape[0]} features, "
                f"spec says {self.spec.feature_length}")
        if not np.isfinite(vec).all():
            raise BackendError("model returned non-finite features")
        return vec


@dataclass
class BackendConfig:
    """Declarative backend choice, resolvable to a live backend."""

    kind: str = "fallback"            # "fallback" | "onnx"
    model_path: str | None = None
    name: str = "fallback"
    input_size: int | None = None
    feature_length: int | None = None
    mean: tuple[float, float, float] = (0.0, 0.0, 0.0)
    std: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def resolve(self):
        """Build the backend, degrading to the fallback with a warning."""
        if self.kind == "fallback":
            return FallbackBackend(input_size=self.input_size or 32)
        if self.kind != "onnx":
            raise ValueError(f"unknown backend kind {self.kind!r}")
        spec = BackboneSpec(
            name=self.name,
            input_size=self.input_size or MOBILENET_SPEC.input_size,
            feature_length=self.feature_length or MOBILENET_SPEC.feature_length,
            mean=tuple(self.mean),
            std=tuple(self.std),
        )
        try:
            return OnnxBackend(self.model_path, spec)
        except BackendError as exc:
            warnings.warn(
                f"backend {self.name!r} unavailable ({exc}); "
                "falling back to the built-in image descriptor",
                RuntimeWarning, stacklevel=2)
            return FallbackBackend()
