"""Scikit-learn style estimators wrapping the pipeline and the learner.

``ObjectRepresenter`` is a transformer from object clouds to fused feature
rows; ``InstanceBasedClassifier`` is an incremental nearest-instance
classifier. Together they compose in a sklearn ``Pipeline``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .backbones import BackendConfig
from .clouds import ObjectCloud
from .config import DEFAULT_COLOR_WEIGHT, DEFAULT_SPACES, PipelineConfig
from .features import FeatureVector, ObjectRepresentation
from .learner import PerceptualMemory


def _check_clouds(X) -> list[ObjectCloud]:
    clouds = list(X)
    for i, cloud in enumerate(clouds):
        if not isinstance(cloud, ObjectCloud):
            raise TypeError(f"X[{i}] is {type(cloud).__name__}, expected ObjectCloud")
    return clouds


class ObjectRepresenter(TransformerMixin, BaseEstimator):
    """Transform object clouds into fused shape+color feature rows.

    Parameters mirror the pipeline config; `fit` only resolves backends
    (the representation itself is training-free).
    """

    def __init__(self, resolution=224, margin=0.1, splat_radius=1,
                 spaces=DEFAULT_SPACES, color_weight=DEFAULT_COLOR_WEIGHT,
                 shape_backend=None, color_backend=None):
        self.resolution = resolution
        self.margin = margin
        self.splat_radius = splat_radius
        self.spaces = spaces
        self.color_weight = color_weight
        self.shape_backend = shape_backend
        self.color_backend = color_backend

    def _build_config(self) -> PipelineConfig:
        return PipelineConfig(
            resolution=self.resolution, margin=self.margin,
            splat_radius=self.splat_radius, spaces=tuple(self.spaces),
            color_weight=self.color_weight,
            shape_backend=self.shape_backend or BackendConfig(),
            color_backend=self.color_backend or BackendConfig(),
        )

    def fit(self, X=None, y=None):
        self.pipeline_ = ObjectRepresentation(self._build_config())
        self.n_features_out_ = self.pipeline_.feature_length
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "pipeline_")
        clouds = _check_clouds(X)
        if not clouds:
            return np.empty((0, self.n_features_out_))
        return np.vstack([self.pipeline_(cloud).values for cloud in clouds])

    def represent(self, cloud: ObjectCloud) -> FeatureVector:
        """Single-cloud convenience keeping the layout descriptor."""
        check_is_fitted(self, "pipeline_")
        return self.pipeline_(cloud)


class InstanceBasedClassifier(ClassifierMixin, BaseEstimator):
    """Open-ended nearest-instance classifier over stored feature rows.

    `fit` replaces the memory; `partial_fit` grows it one batch at a time,
    matching the teach/correct loop. `predict` returns the label of the
    globally nearest stored instance under cosine distance (None when the
    optional `reject_distance` open-set threshold fires).
    """

    def __init__(self, reject_distance=None, max_instances_per_category=None):
        self.reject_distance = reject_distance
        self.max_instances_per_category = max_instances_per_category

    def _fresh_memory(self) -> PerceptualMemory:
        return PerceptualMemory(
            reject_distance=self.reject_distance,
            max_instances_per_category=self.max_instances_per_category)

    def fit(self, X, y):
        self.memory_ = self._fresh_memory()
        return self._teach_batch(X, y)

    def partial_fit(self, X, y):
        if not hasattr(self, "memory_"):
            self.memory_ = self._fresh_memory()
        return self._teach_batch(X, y)

    def _teach_batch(self, X, y):
        X = check_array(X, dtype=np.float64)
        y = np.asarray(y)
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
        for row, label in zip(X, y):
            self.memory_.teach(str(label), _row_feature(row))
        self.classes_ = np.array(sorted(self.memory_.labels()))
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "memory_")
        X = check_array(X, dtype=np.float64)
        return np.array([self.memory_.classify(row).label for row in X], dtype=object)

    def predict_distance(self, X) -> np.ndarray:
        """Cosine distance to the nearest stored instance, per query."""
        check_is_fitted(self, "memory_")
        X = check_array(X, dtype=np.float64)
        return np.array([self.memory_.classify(row).distance for row in X])


def _row_feature(row: np.ndarray) -> FeatureVector:
    from .features import FeatureLayout

    layout = FeatureLayout(shape_length=row.shape[0], color_length=0,
                           spaces=(), color_weight=0.0)
    return FeatureVector(values=row, layout=layout)
