"""Orthographic depth/color view rendering of an LRF-aligned cloud."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .clouds import ObjectCloud
from .errors import DegenerateCloud

VIEW_IDS = ("front", "side", "top")

# Per view: (camera axis, image u axis, image v axis) as coordinate indices.
# front looks along -X, side along -Y, top along -Z; u grows rightward,
# v upward (v is flipped into row indices).
_VIEW_AXES = {"front": (0, 1, 2), "side": (1, 0, 2), "top": (2, 0, 1)}

DEFAULT_RESOLUTION = 224
DEFAULT_MARGIN = 0.1
DEFAULT_SPLAT_RADIUS = 1


@dataclass
class DepthImage:
    pixels: np.ndarray  # (res, res) float32; 0 = background, foreground in (0, 1]
    view_id: str

    @property
    def foreground(self) -> np.ndarray:
        return self.pixels > 0


@dataclass
class ColorImage:
    pixels: np.ndarray  # (res, res, 3) uint8; background forced to (0, 0, 0)
    mask: np.ndarray    # (res, res) bool foreground flag
    view_id: str


@dataclass(frozen=True)
class RenderBounds:
    """Cubic render volume, stored as the object's symmetric extent.

    ``scale`` is the largest per-axis extent measured symmetrically about
    the LRF origin (2 * max |coordinate|); the cube edge is
    ``(1 + 2 * margin) * scale``. Rasterization happens in coordinates
    divided by ``scale``, so uniform rescaling of the cloud cannot change
    any pixel.
    """

    scale: float
    margin: float

    @property
    def edge(self) -> float:
        return (1.0 + 2.0 * self.margin) * self.scale


@dataclass
class ViewTriplet:
    depth: dict[str, DepthImage]
    color: dict[str, ColorImage]
    bounds: RenderBounds
    resolution: int


def fit_bounds(cloud: ObjectCloud, margin: float = DEFAULT_MARGIN) -> RenderBounds:
    """Cube centered on the LRF origin that contains the whole cloud."""
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    if len(cloud) == 0:
        raise DegenerateCloud("cannot fit bounds to an empty cloud")
    extent = 2.0 * float(np.abs(cloud.xyz).max())
    if extent <= 0.0:
        raise DegenerateCloud("cloud has zero extent on every axis")
    return RenderBounds(scale=extent, margin=margin)


def render_views(cloud: ObjectCloud, resolution: int = DEFAULT_RESOLUTION,
                 splat_radius: int = DEFAULT_SPLAT_RADIUS,
                 margin: float = DEFAULT_MARGIN,
                 bounds: RenderBounds | None = None) -> ViewTriplet:
    """Render the three orthographic depth and color views by z-buffering.

    Every point is splatted onto a (2r+1)^2 pixel square in each view; per
    pixel the point nearest to the camera wins. Depth is normalized per
    view so the nearest point maps to 1.0 and the cube's far face to 0
    (background keeps the exact 0 sentinel). Pass explicit ``bounds`` to
    render several clouds into the same volume.
    """
    if resolution < 16:
        raise ValueError(f"resolution must be >= 16, got {resolution}")
    if splat_radius < 0:
        raise ValueError("splat_radius must be >= 0")
    if bounds is None:
        bounds = fit_bounds(cloud, margin)
    else:
        margin = bounds.margin

    # Scale-canonical coordinates; float32 rounding erases the sub-ulp
    # differences uniform scaling introduces, keeping renders bit-identical.
    canon = (cloud.xyz / bounds.scale).astype(np.float32).astype(np.float64)
    edge = 1.0 + 2.0 * margin
    half = edge / 2.0

    offsets = [(dy, dx)
               for dy in range(-splat_radius, splat_radius + 1)
               for dx in range(-splat_radius, splat_radius + 1)]

    depth_images: dict[str, DepthImage] = {}
    color_images: dict[str, ColorImage] = {}
    for view_id in VIEW_IDS:
        d_axis, u_axis, v_axis = _VIEW_AXES[view_id]
        u, v, d = canon[:, u_axis], canon[:, v_axis], canon[:, d_axis]
        cols = np.floor((u + half) / edge * resolution).astype(np.int64)
        rows = resolution - 1 - np.floor((v + half) / edge * resolution).astype(np.int64)

        cols = np.clip(cols, 0, resolution - 1)
        rows = np.clip(rows, 0, resolution - 1)

        d_near = float(d.max())
        span = d_near + half
        if span > 0:
            # Keep foreground strictly above the 0 background sentinel even
            # for margin = 0 clouds touching the far face.
            depth_values = np.maximum((d + half) / span, 1.0 / 65535.0)
        else:
            depth_values = np.ones_like(d)

        all_rows, all_cols, all_depth, all_idx = [], [], [], []
        for dy, dx in offsets:
            rr = rows + dy
            cc = cols + dx
            keep = (rr >= 0) & (rr < resolution) & (cc >= 0) & (cc < resolution)
            all_rows.append(rr[keep])
            all_cols.append(cc[keep])
            all_depth.append(depth_values[keep])
            all_idx.append(np.nonzero(keep)[0])
        rr = np.concatenate(all_rows)
        cc = np.concatenate(all_cols)
        dd = np.concatenate(all_depth)
        src = np.concatenate(all_idx)

        # Painter's order: write far to near so the nearest point wins each
        # pixel; the stable sort makes ties deterministic.
        order = np.argsort(dd, kind="stable")
        rr, cc, dd, src = rr[order], cc[order], dd[order], src[order]

        depth = np.zeros((resolution, resolution), dtype=np.float32)
        color = np.zeros((resolution, resolution, 3), dtype=np.uint8)
        mask = np.zeros((resolution, resolution), dtype=bool)
        depth[rr, cc] = dd.astype(np.float32)
        color[rr, cc] = cloud.rgb[src]
        mask[rr, cc] = True

        depth_images[view_id] = DepthImage(pixels=depth, view_id=view_id)
        color_images[view_id] = ColorImage(pixels=color, mask=mask, view_id=view_id)

    return ViewTriplet(depth=depth_images, color=color_images, bounds=bounds,
                       resolution=resolution)


def depth_to_png_array(img: DepthImage) -> np.ndarray:
    """Quantize depth to the 16-bit gray scale used for PNG export."""
    return np.round(img.pixels.astype(np.float64) * 65535.0).astype(np.uint16)


def save_view_images(triplet: ViewTriplet, out_dir, source_id: str) -> list[Path]:
    """Write the six PNGs as ``<source_id>_<view>_{depth|color}.png``.

    Depth PNGs carry a ``depth_polarity`` text chunk recording the fixed
    nearer-is-brighter convention.
    """
    from PIL.PngImagePlugin import PngInfo

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    depth_meta = PngInfo()
    depth_meta.add_text("depth_polarity", "nearer=brighter; background=0")
    written = []
    for view_id in VIEW_IDS:
        depth_path = out_dir / f"{source_id}_{view_id}_depth.png"
        Image.fromarray(depth_to_png_array(triplet.depth[view_id])).save(
            depth_path, pnginfo=depth_meta)
        written.append(depth_path)
        color_path = out_dir / f"{source_id}_{view_id}_color.png"
        Image.fromarray(triplet.color[view_id].pixels, mode="RGB").save(color_path)
        written.append(color_path)
    return written
