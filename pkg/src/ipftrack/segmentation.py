"""Silhouette extraction by background subtraction and thresholding."""

from __future__ import annotations

import numpy as np
from scipy import ndimage


def to_gray(image: np.ndarray) -> np.ndarray:
    """Average colour channels; grayscale input passes through as float."""
    img = np.asarray(image, dtype=float)
    return img.mean(axis=2) if img.ndim == 3 else img


def background_subtract(frame: np.ndarray, background: np.ndarray, threshold: float,
                        cleanup: bool = False, cleanup_size: int = 3) -> np.ndarray:
    """Foreground mask: ``|frame - background| > threshold`` per pixel.

    Parameters
    ----------
    frame, background : ndarray
        Grayscale ``(H, W)`` or colour ``(H, W, C)`` images of equal size.
    threshold : float
        Intensity units; must be non-negative.
    cleanup : bool
        Apply a binary opening then closing with a square structuring
        element of side ``cleanup_size``. Off by default.
    """
    f, b = to_gray(frame), to_gray(background)
    if f.shape != b.shape:
        raise ValueError(f"frame {f.shape} and background {b.shape} differ in size")
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    mask = np.abs(f - b) > threshold
    if cleanup:
        st = np.ones((cleanup_size, cleanup_size), dtype=bool)
        mask = ndimage.binary_closing(ndimage.binary_opening(mask, st), st)
    return mask
