"""Instance-based open-ended category memory with nearest-neighbor recall."""

from __future__ import annotations

import json
import struct
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidFeature, LayoutError, ParseError
from .features import FeatureLayout, FeatureVector

MEMORY_MAGIC = b"OLMEMORY"
MEMORY_VERSION = 1


def cosine_distance(a: np.ndarray, b: np.ndarray) -> float:
    """d(a, b) = 1 - a.b / (|a||b|); raises on zero-norm input."""
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise InvalidFeature("cosine distance undefined for zero-norm vectors")
    return float(1.0 - (a @ b) / (na * nb))


@dataclass(frozen=True)
class Prediction:
    label: str | None          # None = unknown
    distance: float
    runner_up: tuple[str, float] | None = None

    @property
    def is_unknown(self) -> bool:
        return self.label is None


@dataclass
class CategoryModel:
    label: str
    created_at: int
    instances: list[np.ndarray] = field(default_factory=list)


class PerceptualMemory:
    """Categories as growing sets of stored feature vectors.

    Recognition returns the label of the globally nearest stored instance
    under cosine distance; ties go to the earliest-created category. Writes
    are serialized by a lock while reads work on consistent snapshots, so
    concurrent classify calls are safe during a teach.
    """

    def __init__(self, reject_distance: float | None = None,
                 max_instances_per_category: int | None = None):
        self.reject_distance = reject_distance
        self.max_instances_per_category = max_instances_per_category
        self.layout: FeatureLayout | None = None
        self.event_count = 0
        self._categories: dict[str, CategoryModel] = {}
        self._lock = threading.Lock()

    # -- inspection ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self._categories)

    def labels(self) -> list[str]:
        with self._lock:
            return list(self._categories)

    def counts(self) -> dict[str, int]:
        with self._lock:
            return {label: len(model.instances)
                    for label, model in self._categories.items()}

    @property
    def total_instances(self) -> int:
        with self._lock:
            return sum(len(m.instances) for m in self._categories.values())

    def category(self, label: str) -> CategoryModel:
        return self._categories[label]

    # -- learning -----------------------------------------------------------

    def _check_feature(self, feature: FeatureVector) -> np.ndarray:
        values = np.asarray(feature.values, dtype=np.float64).reshape(-1)
        if not np.isfinite(values).all():
            raise InvalidFeature("feature vector contains non-finite values")
        if np.linalg.norm(values) == 0.0:
            raise InvalidFeature("feature vector has zero norm")
        if self.layout is not None and feature.layout != self.layout:
            raise LayoutError(
                f"feature layout {feature.layout} does not match memory layout "
                f"{self.layout}")
        return values

    def teach(self, label: str, feature: FeatureVector) -> None:
        """Store one instance under the label, creating the category if new."""
        values = self._check_feature(feature)
        with self._lock:
            if self.layout is None:
                self.layout = feature.layout
            self.event_count += 1
            model = self._categories.get(label)
            if model is None:
                model = CategoryModel(label=label, created_at=self.event_count)
                self._categories[label] = model
            model.instances.append(values.copy())
            cap = self.max_instances_per_category
            if cap is not None and len(model.instances) > cap:
                del model.instances[0]

    def correct(self, true_label: str, feature: FeatureVector) -> None:
        """Store a misclassified instance under its true label (same as teach)."""
        self.teach(true_label, feature)

    # -- recognition --------------------------------------------------------

    def classify(self, feature: FeatureVector | np.ndarray,
                 reject_distance: float | None = None) -> Prediction:
        """Nearest stored instance over all categories; empty memory -> unknown."""
        if isinstance(feature, FeatureVector):
            query = np.asarray(feature.values, dtype=np.float64).reshape(-1)
        else:
            query = np.asarray(feature, dtype=np.float64).reshape(-1)
        if query.size == 0 or not np.isfinite(query).all() or np.linalg.norm(query) == 0.0:
            raise InvalidFeature("query vector must be finite with positive norm")
        with self._lock:
            snapshot = [(m.label, list(m.instances)) for m in self._categories.values()]
        if not snapshot:
            return Prediction(label=None, distance=float("inf"))

        best_label = None
        best_distance = float("inf")
        per_category: dict[str, float] = {}
        for label, instances in snapshot:
            for stored in instances:
                d = cosine_distance(query, stored)
                if d < per_category.get(label, float("inf")):
                    per_category[label] = d
                if d < best_distance:
                    best_distance = d
                    best_label = label
        runner_up = None
        others = [(d, label) for label, d in per_category.items() if label != best_label]
        if others:
            d2, label2 = min(others, key=lambda pair: pair[0])
            runner_up = (label2, d2)

        threshold = self.reject_distance if reject_distance is None else reject_distance
        if threshold is not None and best_distance > threshold:
            return Prediction(label=None, distance=best_distance, runner_up=runner_up)
        return Prediction(label=best_label, distance=best_distance, runner_up=runner_up)

    # -- persistence --------------------------------------------------------

    def save(self, path) -> None:
        """Write a versioned binary snapshot (magic, version, header, data)."""
        with self._lock:
            header = {
                "layout": None if self.layout is None else {
                    "shape_length": self.layout.shape_length,
                    "color_length": self.layout.color_length,
                    "spaces": list(self.layout.spaces),
                    "color_weight": self.layout.color_weight,
                },
                "event_count": self.event_count,
                "reject_distance": self.reject_distance,
                "max_instances_per_category": self.max_instances_per_category,
                "categories": [
                    {
                        "label": m.label,
                        "created_at": m.created_at,
                        "instances": len(m.instances),
                        "length": int(m.instances[0].shape[0]) if m.instances else 0,
                    }
                    for m in self._categories.values()
                ],
            }
            payload = b"".join(
                np.ascontiguousarray(inst, dtype="<f8").tobytes()
                for m in self._categories.values() for inst in m.instances)
        head = json.dumps(header, sort_keys=True).encode("utf-8")
        blob = MEMORY_MAGIC + struct.pack("<IQ", MEMORY_VERSION, len(head)) + head + payload
        Path(path).write_bytes(blob)

    @classmethod
    def load(cls, path) -> "PerceptualMemory":
        data = Path(path).read_bytes()
        if len(data) < len(MEMORY_MAGIC) + 12 or not data.startswith(MEMORY_MAGIC):
            raise ParseError("not a perceptual-memory snapshot (bad magic)")
        version, head_len = struct.unpack_from("<IQ", data, len(MEMORY_MAGIC))
        if version != MEMORY_VERSION:
            raise ParseError(f"unsupported snapshot version {version}")
        head_start = len(MEMORY_MAGIC) + 12
        try:
            header = json.loads(data[head_start:head_start + head_len])
        except json.JSONDecodeError as exc:
            raise ParseError(f"corrupt snapshot header: {exc}")
        memory = cls(reject_distance=header.get("reject_distance"),
                     max_instances_per_category=header.get("max_instances_per_category"))
        if header.get("layout"):
            raw = header["layout"]
            memory.layout = FeatureLayout(
                shape_length=raw["shape_length"], color_length=raw["color_length"],
                spaces=tuple(raw["spaces"]), color_weight=raw["color_weight"])
        memory.event_count = header.get("event_count", 0)
        offset = head_start + head_len
        for cat in header.get("categories", []):
            model = CategoryModel(label=cat["label"], created_at=cat["created_at"])
            length = cat["length"]
            for _ in range(cat["instances"]):
                end = offset + 8 * length
                if end > len(data):
                    raise ParseError("snapshot payload truncated")
                model.instances.append(np.frombuffer(data[offset:end], dtype="<f8").copy())
                offset = end
            memory._categories[model.label] = model
        return memory
