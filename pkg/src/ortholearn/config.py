"""Pipeline configuration: defaults, JSON file loading and backend wiring."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .backbones import BackendConfig
from .colorspaces import normalize_space

DEFAULT_SPACES = ("RGB", "HSV", "YCbCr", "YUV")
DEFAULT_COLOR_WEIGHT = 0.8   # best-performing weight for the 1280-float profile
DENSENET_COLOR_WEIGHT = 0.6  # best-performing weight for the 132-float profile


@dataclass
class PipelineConfig:
    """Everything needed to turn a cloud into a fused feature vector."""

    resolution: int = 224
    margin: float = 0.1
    splat_radius: int = 1
    spaces: tuple[str, ...] = DEFAULT_SPACES
    color_weight: float = DEFAULT_COLOR_WEIGHT
    reject_distance: float | None = None
    shape_backend: BackendConfig = field(default_factory=BackendConfig)
    color_backend: BackendConfig = field(default_factory=BackendConfig)

    def __post_init__(self):
        self.spaces = tuple(normalize_space(s) for s in self.spaces)
        if len(set(self.spaces)) != len(self.spaces):
            raise ValueError(f"duplicate colorspaces in {self.spaces}")
        if not self.spaces:
            raise ValueError("at least one colorspace is required")
        if not 0.0 <= self.color_weight <= 1.0:
            raise ValueError(f"color_weight must be in [0, 1], got {self.color_weight}")
        if self.resolution < 16:
            raise ValueError("resolution must be >= 16")

    def build_backends(self):
        """Resolve (shape_backend, color_backend) instances."""
        return self.shape_backend.resolve(), self.color_backend.resolve()

    def to_dict(self) -> dict:
        return asdict(self)


def _backend_from_dict(raw: dict) -> BackendConfig:
    known = {f for f in BackendConfig.__dataclass_fields__}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown backend config keys: {sorted(unknown)}")
    cfg = BackendConfig(**raw)
    if "mean" in raw:
        cfg.mean = tuple(raw["mean"])
    if "std" in raw:
        cfg.std = tuple(raw["std"])
    return cfg


def config_from_dict(raw: dict) -> PipelineConfig:
    raw = dict(raw)
    for key in ("shape_backend", "color_backend"):
        if key in raw and isinstance(raw[key], dict):
            raw[key] = _backend_from_dict(raw[key])
    if "spaces" in raw:
        raw["spaces"] = tuple(raw["spaces"])
    known = {f for f in PipelineConfig.__dataclass_fields__}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return PipelineConfig(**raw)


def mobilenet_profile(model_path: str | None = None) -> PipelineConfig:
    """Large-backbone profile: 224 px input, 1280-float features, w = 0.8."""
    from .backbones import IMAGENET_MEAN, IMAGENET_STD, MOBILENET_SPEC

    backend = BackendConfig(
        kind="onnx" if model_path else "fallback", model_path=model_path,
        name=MOBILENET_SPEC.name, input_size=MOBILENET_SPEC.input_size,
        feature_length=MOBILENET_SPEC.feature_length,
        mean=IMAGENET_MEAN, std=IMAGENET_STD)
    if not model_path:
        backend = BackendConfig()
    return PipelineConfig(color_weight=DEFAULT_COLOR_WEIGHT,
                          shape_backend=backend, color_backend=backend)


def densenet_profile(model_path: str | None = None) -> PipelineConfig:
    """Compact-backbone profile: 64 px input, 132-float features, w = 0.6."""
    from .backbones import DENSENET_SPEC, IMAGENET_MEAN, IMAGENET_STD

    backend = BackendConfig(
        kind="onnx" if model_path else "fallback", model_path=model_path,
        name=DENSENET_SPEC.name, input_size=DENSENET_SPEC.input_size,
        feature_length=DENSENET_SPEC.feature_length,
        mean=IMAGENET_MEAN, std=IMAGENET_STD)
    if not model_path:
        backend = BackendConfig()
    return PipelineConfig(color_weight=DENSENET_COLOR_WEIGHT,
                          shape_backend=backend, color_backend=backend)


def load_config(path) -> PipelineConfig:
    """Load a pipeline config from a JSON file."""
    raw = json.loads(Path(path).read_text())
    return config_from_dict(raw)


def save_config(config: PipelineConfig, path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")
