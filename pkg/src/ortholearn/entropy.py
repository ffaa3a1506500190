"""Shannon-entropy scoring of colored views and best-view selection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import EmptyView
from .projection import ColorImage, VIEW_IDS

HISTOGRAM_BINS = 256
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])  # BT.601


@dataclass(frozen=True)
class EntropyReport:
    """Per-view entropy in bits (None for empty views) and the argmax."""

    entropies: dict[str, float | None]
    selected: str
    bins: int = HISTOGRAM_BINS


def image_entropy(img: ColorImage) -> float:
    """Shannon entropy (base 2) of the foreground luma histogram.

    Foreground pixels are reduced to BT.601 luma, binned into 256 levels,
    and the empirical distribution's entropy is returned; background pixels
    never contribute. Binning uses exact per-mille integer arithmetic
    (299 R + 587 G + 114 B) // 1000 and the terms are summed with fsum, so
    the value depends only on the histogram, not on pixel or bin order.
    Raises :class:`EmptyView` on an all-background image.
    """
    fg = img.pixels[img.mask]
    if fg.size == 0:
        raise EmptyView(f"view {img.view_id!r} has no foreground pixels")
    fg = np.rint(np.asarray(fg, dtype=np.float64)).astype(np.int64)
    milli = 299 * fg[:, 0] + 587 * fg[:, 1] + 114 * fg[:, 2]
    levels = np.clip(milli // 1000, 0, HISTOGRAM_BINS - 1)
    counts = np.bincount(levels, minlength=HISTOGRAM_BINS)
    total = fg.shape[0]
    return -math.fsum(c / total * math.log2(c / total)
                      for c in counts.tolist() if c) + 0.0


def select_max_entropy(views: Mapping[str, ColorImage]) -> tuple[str, EntropyReport]:
    """Pick the view with maximal entropy; ties prefer front > side > top."""
    entropies: dict[str, float | None] = {}
    best_id = None
    best_h = -np.inf
    for view_id in VIEW_IDS:
        if view_id not in views:
            continue
        try:
            h = image_entropy(views[view_id])
        except EmptyView:
            entropies[view_id] = None
            continue
        entropies[view_id] = h
        if h > best_h:
            best_h = h
            best_id = view_id
    if best_id is None:
        raise EmptyView("all views are empty")
    return best_id, EntropyReport(entropies=entropies, selected=best_id)
