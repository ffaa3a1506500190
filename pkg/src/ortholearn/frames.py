"""Local reference frame construction from point covariance and gravity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clouds import ObjectCloud
from .errors import DegenerateCloud, InvalidMatrix

# Cyclic Jacobi stops when the off-diagonal norm drops below this fraction
# of the trace (falling back to the Frobenius norm for traceless input).
JACOBI_TOLERANCE = 1e-12
JACOBI_MAX_SWEEPS = 50

# v1 within this angle of gravity switches the horizontal axis to v2.
PARALLEL_TOLERANCE_RAD = 1e-6

# |skewness| below this uses the lexicographic sign tie-break instead.
SKEWNESS_TOLERANCE = 1e-9


@dataclass(frozen=True)
class CovarianceSummary:
    centroid: np.ndarray
    sigma: np.ndarray
    eigenvalues: np.ndarray   # descending
    eigenvectors: np.ndarray  # columns, matching eigenvalue order


@dataclass(frozen=True)
class LrfDiagnostics:
    axis_source: str   # "v1" or "v2"
    sign_source: str   # "skewness" or "lexicographic"


@dataclass(frozen=True)
class LocalReferenceFrame:
    origin: np.ndarray
    x_axis: np.ndarray
    y_axis: np.ndarray
    z_axis: np.ndarray
    diagnostics: LrfDiagnostics | None = None

    @property
    def rotation(self) -> np.ndarray:
        """Column matrix [x|y|z]; maps LRF coordinates to world coordinates."""
        return np.column_stack([self.x_axis, self.y_axis, self.z_axis])


def centroid(cloud: ObjectCloud) -> np.ndarray:
    """Arithmetic mean of the point coordinates."""
    if len(cloud) == 0:
        raise DegenerateCloud("cannot take the centroid of an empty cloud")
    return cloud.xyz.mean(axis=0)


def covariance(cloud: ObjectCloud) -> tuple[np.ndarray, np.ndarray]:
    """Centroid and population covariance (sum of outer products / n)."""
    center = centroid(cloud)
    centered = cloud.xyz - center
    sigma = centered.T @ centered / len(cloud)
    return center, sigma


def eigen3_symmetric(sigma) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric 3x3 matrix by cyclic Jacobi sweeps.

    Returns eigenvalues sorted descending and the matching unit eigenvectors
    as columns, with each column's sign fixed so its largest-magnitude
    component is positive. Deterministic for identical input.
    """
    a = np.array(sigma, dtype=np.float64)
    if a.shape != (3, 3):
        raise InvalidMatrix(f"expected a 3x3 matrix, got shape {a.shape}")
    scale = max(float(np.abs(a).max()), np.finfo(np.float64).tiny)
    defect = float(np.abs(a - a.T).max())
    if defect > 1e-12 * scale:
        raise InvalidMatrix(f"matrix not symmetric (defect {defect:.3e})")
    a = (a + a.T) / 2.0

    tol = JACOBI_TOLERANCE * max(abs(float(np.trace(a))),
                                 float(np.linalg.norm(a)),
                                 np.finfo(np.float64).tiny)
    v = np.eye(3)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = math.sqrt(a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2)
        if off <= tol:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = a[p, q]
            if apq == 0.0:
                continue
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            rot = np.eye(3)
            rot[p, p] = rot[q, q] = c
            rot[p, q] = s
            rot[q, p] = -s
            a = rot.T @ a @ rot
            a = (a + a.T) / 2.0
            v = v @ rot

    eigenvalues = np.diag(a).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    vectors = v[:, order]
    for i in range(3):
        col = vectors[:, i]
        lead = int(np.argmax(np.abs(col)))
        if col[lead] < 0:
            vectors[:, i] = -col
    return eigenvalues, vectors


def summarize_covariance(cloud: ObjectCloud) -> CovarianceSummary:
    center, sigma = covariance(cloud)
    eigenvalues, eigenvectors = eigen3_symmetric(sigma)
    return CovarianceSummary(center, sigma, eigenvalues, eigenvectors)


def _disambiguate_sign(cloud: ObjectCloud, center: np.ndarray,
                       axis: np.ndarray) -> tuple[np.ndarray, str]:
    centered = cloud.xyz - center
    proj = centered @ axis
    m2 = float(np.mean(proj ** 2))
    m3 = float(np.mean(proj ** 3))
    skewness = m3 / m2 ** 1.5 if m2 > 0 else 0.0
    if abs(skewness) >= SKEWNESS_TOLERANCE:
        return (axis if skewness > 0 else -axis), "skewness"
    order = np.lexsort((cloud.xyz[:, 2], cloud.xyz[:, 1], cloud.xyz[:, 0]))
    t = float((cloud.xyz[order[0]] - center) @ axis)
    return (axis if t >= 0 else -axis), "lexicographic"


def construct_lrf(cloud: ObjectCloud) -> LocalReferenceFrame:
    """Build the object's pose-normalizing frame.

    Z is gravity; X is the dominant covariance eigenvector projected onto
    the horizontal plane (falling back to the second eigenvector when the
    first is vertical), with its sign fixed by the sign of the point
    skewness along it; Y = Z x X closes a right-handed frame.
    """
    cloud.validate()
    summary = summarize_covariance(cloud)
    z = cloud.gravity / np.linalg.norm(cloud.gravity)

    axis_source = None
    horizontal = None
    for k, name in ((0, "v1"), (1, "v2")):
        candidate = summary.eigenvectors[:, k]
        h = candidate - (candidate @ z) * z
        if np.linalg.norm(h) > math.sin(PARALLEL_TOLERANCE_RAD):
            horizontal = h
            axis_source = name
            break
    if horizontal is None:
        # Cannot happen for orthonormal eigenvectors, kept as a hard guard.
        raise DegenerateCloud("no horizontal principal direction found")

    x = horizontal / np.linalg.norm(horizontal)
    x, sign_source = _disambiguate_sign(cloud, summary.centroid, x)
    y = np.cross(z, x)
    y = y / np.linalg.norm(y)
    return LocalReferenceFrame(
        origin=summary.centroid,
        x_axis=x,
        y_axis=y,
        z_axis=z,
        diagnostics=LrfDiagnostics(axis_source=axis_source, sign_source=sign_source),
    )


def transform_to_lrf(cloud: ObjectCloud, lrf: LocalReferenceFrame) -> ObjectCloud:
    """Express the cloud in LRF coordinates: p' = R^T (p - origin)."""
    r = lrf.rotation
    xyz = (cloud.xyz - lrf.origin) @ r
    gravity = r.T @ cloud.gravity
    gravity = gravity / np.linalg.norm(gravity)
    return ObjectCloud(xyz=xyz, rgb=cloud.rgb.copy(), gravity=gravity,
                       source_id=cloud.source_id)


def transform_from_lrf(cloud: ObjectCloud, lrf: LocalReferenceFrame) -> ObjectCloud:
    """Inverse of :func:`transform_to_lrf`."""
    r = lrf.rotation
    xyz = cloud.xyz @ r.T + lrf.origin
    gravity = r @ cloud.gravity
    gravity = gravity / np.linalg.norm(gravity)
    return ObjectCloud(xyz=xyz, rgb=cloud.rgb.copy(), gravity=gravity,
                       source_id=cloud.source_id)
