import numpy as np
import pytest

from ortholearn.clouds import ObjectCloud


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def box_lattice(lengths=(4.0, 1.0, 1.0), counts=(21, 6, 6), center=(0.0, 0.0, 0.0),
                skew_point=None) -> ObjectCloud:
    """Regular box lattice; optionally one extra point to pin the x-axis sign."""
    axes = [np.linspace(-l / 2, l / 2, n) for l, n in zip(lengths, counts)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    grid = grid + np.asarray(center)
    if skew_point is not None:
        grid = np.vstack([grid, np.asarray(skew_point) + np.asarray(center)])
    rgb = np.full_like(grid, 128.0)
    return ObjectCloud(xyz=grid, rgb=rgb)


def asymmetric_cloud(rng, n=600) -> ObjectCloud:
    """Elongated random cloud with a density gradient: stable, skewed LRF."""
    u = rng.uniform(0.0, 1.0, size=n) ** 0.5
    x = (u - 0.5) * 2.0
    y = rng.uniform(-0.25, 0.25, size=n)
    z = rng.uniform(0.0, 0.4, size=n)
    xyz = np.stack([x, y, z], axis=1)
    rgb = np.stack([
        np.clip(128 + 120 * x, 0, 255),
        rng.uniform(0, 255, size=n),
        np.full(n, 60.0),
    ], axis=1)
    return ObjectCloud(xyz=xyz, rgb=rgb)


def rotate_about_z(cloud: ObjectCloud, angle: float) -> ObjectCloud:
    c, s = np.cos(angle), np.sin(angle)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return ObjectCloud(xyz=cloud.xyz @ rot.T, rgb=cloud.rgb.copy(),
                       gravity=cloud.gravity, source_id=cloud.source_id)
