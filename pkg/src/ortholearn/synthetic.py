"""Synthetic object generators: six shape/texture-distinct categories.

Each generator samples a surface point cloud with per-view nuisance
variation (rotation about gravity, uniform scale, jitter, color noise), so
a pose/scale-invariant pipeline sees stable features per category. Used by
the test suite and for desk-scale demo datasets.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .clouds import ObjectCloud, serialize_pcd

GRAVITY = np.array([0.0, 0.0, 1.0])


def _finalize(rng: np.random.Generator, xyz: np.ndarray, rgb: np.ndarray,
              source_id: str, jitter: float = 0.0015,
              vary_pose: bool = True) -> ObjectCloud:
    xyz = np.asarray(xyz, dtype=np.float64)
    rgb = np.asarray(rgb, dtype=np.float64)
    if vary_pose:
        angle = rng.uniform(0.0, 2.0 * np.pi)
        c, s = np.cos(angle), np.sin(angle)
        rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        xyz = xyz @ rot.T
        xyz = xyz * rng.uniform(0.85, 1.2)
        xyz = xyz + rng.uniform(-0.05, 0.05, size=3)
    xyz = xyz + rng.normal(0.0, jitter, size=xyz.shape)
    rgb = np.clip(rgb + rng.normal(0.0, 4.0, size=rgb.shape), 0, 255)
    return ObjectCloud(xyz=xyz, rgb=rgb, gravity=GRAVITY, source_id=source_id)


def brick(rng: np.random.Generator, n: int = 1400, vary_pose: bool = True) -> ObjectCloud:
    """Elongated solid-color box, sampled denser toward one end so the
    principal-axis sign is stable."""
    u = rng.uniform(0.0, 1.0, size=n) ** 0.6  # density gradient along x
    x = (u - 0.5) * 0.20
    y = rng.uniform(-0.04, 0.04, size=n)
    z = rng.uniform(0.0, 0.05, size=n)
    # push points to the box surface on a random face
    face = rng.integers(0, 3, size=n)
    y = np.where(face == 0, np.sign(y) * 0.04, y)
    z = np.where(face == 1, np.round(z / 0.05) * 0.05, z)
    rgb = np.tile([178.0, 40.0, 36.0], (n, 1))
    rgb[:, 1] += 40.0 * (x / 0.20 + 0.5)
    return _finalize(rng, np.stack([x, y, z], axis=1), rgb, "brick", vary_pose=vary_pose)


def can(rng: np.random.Generator, n: int = 1400, vary_pose: bool = True) -> ObjectCloud:
    """Cylinder with a striped wrap texture and a plain top."""
    n_side = int(n * 0.8)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n_side)
    z = rng.uniform(0.0, 0.12, size=n_side)
    x = 0.033 * np.cos(theta)
    y = 0.033 * np.sin(theta)
    stripes = (np.floor(theta / (np.pi / 4)) % 2).astype(bool)
    side_rgb = np.where(stripes[:, None], [40.0, 90.0, 200.0], [230.0, 230.0, 235.0])
    n_top = n - n_side
    r = 0.033 * np.sqrt(rng.uniform(0.0, 1.0, size=n_top))
    phi = rng.uniform(0.0, 2.0 * np.pi, size=n_top)
    top = np.stack([r * np.cos(phi), r * np.sin(phi), np.full(n_top, 0.12)], axis=1)
    top_rgb = np.tile([200.0, 200.0, 205.0], (n_top, 1))
    xyz = np.concatenate([np.stack([x, y, z], axis=1), top])
    rgb = np.concatenate([side_rgb, top_rgb])
    return _finalize(rng, xyz, rgb, "can", vary_pose=vary_pose)


def ball(rng: np.random.Generator, n: int = 1200, vary_pose: bool = True) -> ObjectCloud:
    """Sphere with latitude bands."""
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    xyz = v * 0.045
    bands = (np.floor((v[:, 2] + 1.0) * 3.0) % 2).astype(bool)
    rgb = np.where(bands[:, None], [30.0, 160.0, 60.0], [240.0, 240.0, 230.0])
    return _finalize(rng, xyz, rgb, "ball", vary_pose=vary_pose)


def plate(rng: np.random.Generator, n: int = 1200, vary_pose: bool = True) -> ObjectCloud:
    """Flat disc with a checkerboard face."""
    r = 0.09 * np.sqrt(rng.uniform(0.0, 1.0, size=n))
    phi = rng.uniform(0.0, 2.0 * np.pi, size=n)
    x, y = r * np.cos(phi), r * np.sin(phi)
    z = rng.uniform(0.0, 0.012, size=n)
    checker = ((np.floor(x / 0.03) + np.floor(y / 0.03)) % 2).astype(bool)
    rgb = np.where(checker[:, None], [235.0, 140.0, 20.0], [25.0, 25.0, 30.0])
    return _finalize(rng, np.stack([x, y, z], axis=1), rgb, "plate", vary_pose=vary_pose)


def wedge(rng: np.random.Generator, n: int = 1300, vary_pose: bool = True) -> ObjectCloud:
    """Triangular prism with a vertical color gradient."""
    x = rng.uniform(-0.09, 0.09, size=n)
    height = 0.08 * (1.0 - np.abs(x) / 0.09)
    z = rng.uniform(0.0, 1.0, size=n) * np.maximum(height, 1e-6)
    y = rng.uniform(-0.03, 0.03, size=n)
    t = (z / 0.08)[:, None]
    rgb = (1.0 - t) * np.array([20.0, 60.0, 190.0]) + t * np.array([235.0, 240.0, 250.0])
    return _finalize(rng, np.stack([x, y, z], axis=1), rgb, "wedge", vary_pose=vary_pose)


def tower(rng: np.random.Generator, n: int = 1300, vary_pose: bool = True) -> ObjectCloud:
    """Tall thin box with horizontal stripes."""
    x = rng.uniform(-0.016, 0.016, size=n)
    y = rng.uniform(-0.016, 0.016, size=n)
    z = rng.uniform(0.0, 0.18, size=n)
    side = rng.integers(0, 2, size=n).astype(bool)
    x = np.where(side, np.sign(x) * 0.016, x)
    y = np.where(side, y, np.sign(y) * 0.016)
    stripes = (np.floor(z / 0.03) % 2).astype(bool)
    rgb = np.where(stripes[:, None], [150.0, 40.0, 170.0], [235.0, 220.0, 40.0])
    return _finalize(rng, np.stack([x, y, z], axis=1), rgb, "tower", vary_pose=vary_pose)


CATEGORY_GENERATORS = {
    "ball": ball,
    "brick": brick,
    "can": can,
    "plate": plate,
    "tower": tower,
    "wedge": wedge,
}


def make_view(label: str, rng: np.random.Generator, **kwargs) -> ObjectCloud:
    return CATEGORY_GENERATORS[label](rng, **kwargs)


def write_synthetic_dataset(root, views_per_category: int = 20, seed: int = 0,
                            categories=None, instances_per_category: int = 2) -> Path:
    """Write a PCD dataset tree usable by the dataset loader and protocol."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    labels = sorted(categories or CATEGORY_GENERATORS)
    for label in labels:
        for k in range(views_per_category):
            instance = k % instances_per_category + 1
            inst_dir = root / label / f"{label}_{instance}"
            inst_dir.mkdir(parents=True, exist_ok=True)
            meta = inst_dir / "meta.txt"
            if not meta.exists():
                meta.write_text("gravity = [0.0, 0.0, 1.0]\n")
            cloud = make_view(label, rng)
            cloud.source_id = f"{label}_{instance}_view{k:03d}"
            (inst_dir / f"view_{k:03d}.pcd").write_bytes(serialize_pcd(cloud))
    return root


def main(argv=None) -> int:
    import argparse

    parser = argparse.ArgumentParser(
        description="Generate a synthetic demo dataset of six object categories.")
    parser.add_argument("root", help="output directory")
    parser.add_argument("--views", type=int, default=20, help="views per category")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    path = write_synthetic_dataset(args.root, views_per_category=args.views,
                                   seed=args.seed)
    print(f"wrote {len(CATEGORY_GENERATORS)} categories x {args.views} views to {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
