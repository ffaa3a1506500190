"""Feature extraction: shape/color embeddings and their weighted fusion."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import colorspaces
from .backbones import BackboneSpec
from .clouds import ObjectCloud
from .config import PipelineConfig
from .entropy import EntropyReport, select_max_entropy
from .errors import BackendError, InvalidFeature, OrthoLearnError
from .frames import construct_lrf, transform_to_lrf
from .projection import (ColorImage, DepthImage, VIEW_IDS, ViewTriplet,
                         render_views)


@dataclass(frozen=True)
class FeatureLayout:
    """Block structure of a fused feature vector."""

    shape_length: int
    color_length: int
    spaces: tuple[str, ...]
    color_weight: float

    @property
    def total_length(self) -> int:
        return self.shape_length + self.color_length


@dataclass(eq=False)
class FeatureVector:
    values: np.ndarray
    layout: FeatureLayout

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if self.values.shape[0] != self.layout.total_length:
            raise InvalidFeature(
                f"vector length {self.values.shape[0]} does not match layout "
                f"{self.layout.shape_length}+{self.layout.color_length}")

    @property
    def shape_block(self) -> np.ndarray:
        return self.values[:self.layout.shape_length]

    @property
    def color_block(self) -> np.ndarray:
        return self.values[self.layout.shape_length:]


def area_resize(image: np.ndarray, size: int) -> np.ndarray:
    """Area-averaged (box filter) resize of an (H, W[, C]) float image."""
    from PIL import Image

    arr = np.asarray(image, dtype=np.float64)
    if arr.shape[:2] == (size, size):
        return arr
    if arr.ndim == 2:
        img = Image.fromarray(arr.astype(np.float32), mode="F")
        return np.asarray(img.resize((size, size), Image.BOX), dtype=np.float64)
    channels = [area_resize(arr[:, :, c], size) for c in range(arr.shape[2])]
    return np.stack(channels, axis=-1)


def prepare_image(image01: np.ndarray, spec: BackboneSpec) -> np.ndarray:
    """Resize to the backbone's input size and apply mean/std normalization."""
    arr = area_resize(image01, spec.input_size)
    mean = np.asarray(spec.mean, dtype=np.float64)
    std = np.asarray(spec.std, dtype=np.float64)
    return ((arr - mean) / std).astype(np.float32)


def _rescale_to_unit(pixels: np.ndarray, ranges) -> np.ndarray:
    out = np.empty_like(pixels, dtype=np.float64)
    for c, (lo, hi) in enumerate(ranges):
        out[..., c] = (pixels[..., c] - lo) / (hi - lo)
    return out


def _embed(backend, prepared: np.ndarray, view_id: str) -> np.ndarray:
    try:
        vec = np.asarray(backend.embed(prepared), dtype=np.float64).reshape(-1)
    except BackendError:
        raise
    except Exception as exc:
        raise BackendError(f"backend {backend.spec.name!r} failed: {exc}",
                           view_id=view_id)
    if vec.shape[0] != backend.spec.feature_length:
        raise BackendError(
            f"backend returned {vec.shape[0]} values, expected "
            f"{backend.spec.feature_length}", view_id=view_id)
    if not np.isfinite(vec).all():
        raise BackendError("backend returned non-finite values", view_id=view_id)
    return vec


def embed_shape(depth_views: Mapping[str, DepthImage], backend) -> np.ndarray:
    """Embed the three depth views and merge by element-wise maximum."""
    vectors = []
    for view_id in VIEW_IDS:
        depth = depth_views[view_id].pixels.astype(np.float64)
        rgbified = np.repeat(depth[:, :, None], 3, axis=2)
        vectors.append(_embed(backend, prepare_image(rgbified, backend.spec), view_id))
    return np.maximum.reduce(vectors)


def embed_color(view: ColorImage, spaces: Sequence[str], backend) -> np.ndarray:
    """Convert the view into each colorspace, embed, and concatenate."""
    spaces = tuple(spaces)
    if not spaces:
        raise ValueError("spaces must be non-empty")
    if len(set(spaces)) != len(spaces):
        raise ValueError(f"duplicate colorspaces in {spaces}")
    blocks = []
    for space in spaces:
        converted = colorspaces.convert(view, space)
        unit = _rescale_to_unit(converted.pixels, converted.ranges)
        blocks.append(_embed(backend, prepare_image(unit, backend.spec), view.view_id))
    return np.concatenate(blocks)


def fuse(f_s: np.ndarray, f_c: np.ndarray, color_weight: float,
         spaces: tuple[str, ...] = ()) -> FeatureVector:
    """Weighted shape/color fusion: concat((1 - w) * f_s, w * f_c)."""
    if not 0.0 <= color_weight <= 1.0:
        raise ValueError(f"color weight must be in [0, 1], got {color_weight}")
    f_s = np.asarray(f_s, dtype=np.float64).reshape(-1)
    f_c = np.asarray(f_c, dtype=np.float64).reshape(-1)
    if f_s.size == 0 and f_c.size == 0:
        raise InvalidFeature("both feature blocks are empty")
    values = np.concatenate([(1.0 - color_weight) * f_s, color_weight * f_c])
    if not np.isfinite(values).all():
        raise InvalidFeature("fused vector contains non-finite values")
    layout = FeatureLayout(shape_length=f_s.size, color_length=f_c.size,
                           spaces=tuple(spaces), color_weight=color_weight)
    return FeatureVector(values=values, layout=layout)


@dataclass
class RepresentationDetail:
    """Intermediate pipeline products, kept for UIs and diagnostics."""

    triplet: ViewTriplet
    selected_view: str
    entropy: EntropyReport
    feature: FeatureVector


class ObjectRepresentation:
    """Reusable cloud -> feature pipeline with resolved backends."""

    def __init__(self, config: PipelineConfig | None = None,
                 shape_backend=None, color_backend=None):
        self.config = config or PipelineConfig()
        if shape_backend is None or color_backend is None:
            built_shape, built_color = self.config.build_backends()
            shape_backend = shape_backend or built_shape
            color_backend = color_backend or built_color
        self.shape_backend = shape_backend
        self.color_backend = color_backend

    @property
    def feature_length(self) -> int:
        return (self.shape_backend.spec.feature_length
                + len(self.config.spaces) * self.color_backend.spec.feature_length)

    def describe(self, cloud: ObjectCloud) -> RepresentationDetail:
        cfg = self.config
        with _stage("reference_frame"):
            lrf = construct_lrf(cloud)
            local = transform_to_lrf(cloud, lrf)
        with _stage("projection"):
            triplet = render_views(local, resolution=cfg.resolution,
                                   splat_radius=cfg.splat_radius, margin=cfg.margin)
        with _stage("view_selection"):
            selected, report = select_max_entropy(triplet.color)
        with _stage("embedding"):
            f_s = embed_shape(triplet.depth, self.shape_backend)
            f_c = embed_color(triplet.color[selected], cfg.spaces, self.color_backend)
            feature = fuse(f_s, f_c, cfg.color_weight, spaces=cfg.spaces)
        return RepresentationDetail(triplet=triplet, selected_view=selected,
                                    entropy=report, feature=feature)

    def __call__(self, cloud: ObjectCloud) -> FeatureVector:
        return self.describe(cloud).feature


class _stage:
    """Tag escaping pipeline errors with the stage they came from."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, OrthoLearnError):
            exc.stage = getattr(exc, "stage", self.name)
        return False


def represent_object(cloud: ObjectCloud, config: PipelineConfig | None = None,
                     *, pipeline: ObjectRepresentation | None = None) -> FeatureVector:
    """Full pipeline: LRF, render, entropy selection, embedding, fusion.

    Pure function of (cloud, config); pass a prebuilt ``pipeline`` to avoid
    re-resolving backends per call.
    """
    if pipeline is None:
        pipeline = ObjectRepresentation(config)
    return pipeline(cloud)
