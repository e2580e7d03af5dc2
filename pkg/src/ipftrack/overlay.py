"""Estimated-model outlines drawn over the input frames."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import ndimage

from .camera import CameraModel, rasterize
from .imageio import frame_name, write_pgm
from .report import TrackReport
from .skeleton import SkeletonSpec, flesh

OUTLINE_VALUE = 128


def mask_boundary(mask: np.ndarray) -> np.ndarray:
    """Foreground pixels with at least one 4-connected background neighbour."""
    mask = np.asarray(mask, dtype=bool)
    return mask & ~ndimage.binary_erosion(mask, border_value=0)


def overlay_frame(frame: np.ndarray, mask: np.ndarray) -> np.ndarray:
    out = np.asarray(frame, dtype=np.uint8).copy()
    out[mask_boundary(mask)] = OUTLINE_VALUE
    return out


def render_overlay(spec: SkeletonSpec, report: TrackReport, frames: Sequence[np.ndarray],
                   camera: CameraModel, out_dir) -> list[Path]:
    """Write ``overlay_<n>.pgm`` per frame: the frame with the estimated outline.

    ``frames`` are 8-bit grayscale images (boolean masks are drawn as 0/255).
    """
    if len(frames) != len(report):
        raise ValueError(f"{len(report)} report frames but {len(frames)} images")
    out = Path(out_dir)
    paths = []
    if len(report):
        out.mkdir(parents=True, exist_ok=True)
    for rec, frame in zip(report.records, frames):
        img = np.asarray(frame)
        if img.dtype == bool:
            img = img.astype(np.uint8) * 255
        if img.shape != camera.shape:
            raise ValueError(f"frame {rec.frame}: image {img.shape} vs camera {camera.shape}")
        mask = rasterize(camera, flesh(spec, rec.joints))
        path = out / frame_name(rec.frame).replace("frame_", "overlay_")
        write_pgm(path, overlay_frame(img, mask))
        paths.append(path)
    return paths
