"""Color transforms of 8-bit RGB views into the eight supported spaces.

All converters take arrays shaped (..., 3) with channels in [0, 255] and
return float64 arrays in each space's native range; rescaling to a model's
input range is the embedding stage's job. The affine spaces (YUV, YCbCr,
YIQ) are kept unclipped so that convert(a) - convert(b) == M @ (a - b)
holds exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidColorspace
from .projection import ColorImage

COLORSPACES = ("RGB", "HED", "HSV", "LAB", "YCbCr", "YIQ", "YUV", "GRAY")

# Digital YUV transform with the 128 chroma offset; the coefficient set is
# pinned to three decimals on purpose and must not be "corrected".
YUV_MATRIX = np.array([
    [0.299, 0.587, 0.114],
    [-0.168, -0.331, 0.500],
    [0.500, -0.418, -0.0813],
])
YUV_OFFSET = np.array([0.0, 128.0, 128.0])

# Full-range BT.601 YCbCr.
YCBCR_MATRIX = np.array([
    [0.299, 0.587, 0.114],
    [-0.168736, -0.331264, 0.5],
    [0.5, -0.418688, -0.081312],
])
YCBCR_OFFSET = np.array([0.0, 128.0, 128.0])

# NTSC YIQ.
YIQ_MATRIX = np.array([
    [0.299, 0.587, 0.114],
    [0.5959, -0.2746, -0.3213],
    [0.2115, -0.5227, 0.3112],
])
YIQ_OFFSET = np.zeros(3)

GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114])

# Ruifrok-Johnston stain vectors (rows: hematoxylin, eosin, DAB) applied to
# optical density OD = -log10((I + 1) / 256).
HED_STAINS = np.array([
    [0.65, 0.70, 0.29],
    [0.07, 0.99, 0.11],
    [0.27, 0.57, 0.78],
])
HED_FROM_OD = np.linalg.inv(HED_STAINS)
_OD_MAX = float(-np.log10(1.0 / 256.0))

# sRGB (linear) -> XYZ under D65.
SRGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
D65_WHITE = SRGB_TO_XYZ.sum(axis=1)

Range = tuple[float, float]


def _affine_ranges(matrix: np.ndarray, offset: np.ndarray,
                   lo: float = 0.0, hi: float = 255.0) -> tuple[Range, Range, Range]:
    """Exact per-channel output range of x -> M x + b over the input box."""
    ranges = []
    for row, off in zip(matrix, offset):
        low = float(off + hi * row[row < 0].sum() + lo * row[row > 0].sum())
        high = float(off + hi * row[row > 0].sum() + lo * row[row < 0].sum())
        ranges.append((low, high))
    return tuple(ranges)


_HED_RANGES = _affine_ranges(HED_FROM_OD.T, np.zeros(3), lo=0.0, hi=_OD_MAX)

NATIVE_RANGES: dict[str, tuple[Range, Range, Range]] = {
    "RGB": ((0.0, 255.0),) * 3,
    "GRAY": ((0.0, 255.0),) * 3,
    "HSV": ((0.0, 360.0), (0.0, 1.0), (0.0, 1.0)),
    "LAB": ((0.0, 100.0), (-128.0, 127.0), (-128.0, 127.0)),
    "YUV": _affine_ranges(YUV_MATRIX, YUV_OFFSET),
    "YCbCr": _affine_ranges(YCBCR_MATRIX, YCBCR_OFFSET),
    "YIQ": _affine_ranges(YIQ_MATRIX, YIQ_OFFSET),
    "HED": _HED_RANGES,
}


@dataclass
class ColorConvertedView:
    space: str
    pixels: np.ndarray              # (..., 3) float64 in native range
    mask: np.ndarray                # carried through unchanged
    ranges: tuple[Range, Range, Range]
    view_id: str = ""


def _as_float(rgb) -> np.ndarray:
    arr = np.asarray(rgb, dtype=np.float64)
    if arr.shape[-1] != 3:
        raise ValueError(f"expected (..., 3) array, got shape {arr.shape}")
    return arr


def _apply_affine(rgb, matrix, offset) -> np.ndarray:
    return _as_float(rgb) @ matrix.T + offset


def rgb_to_yuv(rgb) -> np.ndarray:
    return _apply_affine(rgb, YUV_MATRIX, YUV_OFFSET)


def rgb_to_ycbcr(rgb) -> np.ndarray:
    return _apply_affine(rgb, YCBCR_MATRIX, YCBCR_OFFSET)


def rgb_to_yiq(rgb) -> np.ndarray:
    return _apply_affine(rgb, YIQ_MATRIX, YIQ_OFFSET)


def rgb_to_gray(rgb) -> np.ndarray:
    luma = _as_float(rgb) @ GRAY_WEIGHTS
    return np.repeat(luma[..., None], 3, axis=-1)


def rgb_to_hsv(rgb) -> np.ndarray:
    """RGB [0, 255] -> (H degrees in [0, 360), S in [0, 1], V in [0, 1])."""
    arr = _as_float(rgb) / 255.0
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    v = arr.max(axis=-1)
    c = v - arr.min(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(v > 0, c / v, 0.0)
        hr = np.where(c > 0, ((g - b) / c) % 6.0, 0.0)
        hg = np.where(c > 0, (b - r) / c + 2.0, 0.0)
        hb = np.where(c > 0, (r - g) / c + 4.0, 0.0)
    h = np.where(v == r, hr, np.where(v == g, hg, hb))
    h = np.where(c > 0, h * 60.0, 0.0) % 360.0
    return np.stack([h, s, v], axis=-1)


def hsv_to_rgb(hsv) -> np.ndarray:
    """Inverse of :func:`rgb_to_hsv`; returns float RGB in [0, 255]."""
    arr = np.asarray(hsv, dtype=np.float64)
    h, s, v = arr[..., 0], arr[..., 1], arr[..., 2]
    c = v * s
    hp = (h % 360.0) / 60.0
    x = c * (1.0 - np.abs(hp % 2.0 - 1.0))
    zeros = np.zeros_like(c)
    sector = np.floor(hp).astype(int) % 6
    r = np.select([sector == 0, sector == 1, sector == 2,
                   sector == 3, sector == 4, sector == 5],
                  [c, x, zeros, zeros, x, c])
    g = np.select([sector == 0, sector == 1, sector == 2,
                   sector == 3, sector == 4, sector == 5],
                  [x, c, c, x, zeros, zeros])
    b = np.select([sector == 0, sector == 1, sector == 2,
                   sector == 3, sector == 4, sector == 5],
                  [zeros, zeros, x, c, c, x])
    m = v - c
    return np.stack([r + m, g + m, b + m], axis=-1) * 255.0


def _srgb_linearize(channel: np.ndarray) -> np.ndarray:
    return np.where(channel <= 0.04045,
                    channel / 12.92,
                    ((channel + 0.055) / 1.055) ** 2.4)


def rgb_to_lab(rgb) -> np.ndarray:
    """RGB [0, 255] -> CIE L*a*b* under D65 via sRGB linearization."""
    linear = _srgb_linearize(_as_float(rgb) / 255.0)
    xyz = linear @ SRGB_TO_XYZ.T
    t = xyz / D65_WHITE
    delta = 6.0 / 29.0
    f = np.where(t > delta ** 3,
                 np.cbrt(t),
                 t / (3.0 * delta ** 2) + 4.0 / 29.0)
    fx, fy, fz = f[..., 0], f[..., 1], f[..., 2]
    lum = 116.0 * fy - 16.0
    a = 500.0 * (fx - fy)
    b = 200.0 * (fy - fz)
    return np.stack([lum, a, b], axis=-1)


def rgb_to_hed(rgb) -> np.ndarray:
    """RGB [0, 255] -> stain concentrations via color deconvolution."""
    od = -np.log10((_as_float(rgb) + 1.0) / 256.0)
    return od @ HED_FROM_OD


_CONVERTERS = {
    "RGB": _as_float,
    "GRAY": rgb_to_gray,
    "HSV": rgb_to_hsv,
    "LAB": rgb_to_lab,
    "YUV": rgb_to_yuv,
    "YCbCr": rgb_to_ycbcr,
    "YIQ": rgb_to_yiq,
    "HED": rgb_to_hed,
}


def normalize_space(space: str) -> str:
    for known in COLORSPACES:
        if space.lower() == known.lower():
            return known
    raise InvalidColorspace(
        f"unknown colorspace {space!r}; expected one of {', '.join(COLORSPACES)}"
    )


def convert_array(rgb, space: str) -> np.ndarray:
    """Convert an (..., 3) RGB array in [0, 255] to the target space."""
    return _CONVERTERS[normalize_space(space)](rgb)


def convert(img: ColorImage, space: str) -> ColorConvertedView:
    """Convert a rendered color view; the occupancy mask passes through."""
    space = normalize_space(space)
    pixels = convert_array(img.pixels, space)
    return ColorConvertedView(space=space, pixels=pixels, mask=img.mask.copy(),
                              ranges=NATIVE_RANGES[space], view_id=img.view_id)
