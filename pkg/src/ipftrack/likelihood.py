"""Silhouette overlap likelihood.

The weight of a model configuration is ``Nc / (Ns + Nm)`` where ``Nc`` counts
pixels set in both the silhouette and the rendered model, and ``Ns``/``Nm``
count pixels set only in the silhouette/only in the model.  A perfect
overlap would divide by zero, so the denominator is ``max(1, Ns + Nm)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .camera import CameraModel, overlap_batch
from .skeleton import RigidTransform, SkeletonSpec, flesh_batch, forward_kinematics_batch


@dataclass(frozen=True)
class OverlapCounts:
    n_common: int
    n_silhouette_only: int
    n_model_only: int


def overlap_counts(silhouette: np.ndarray, synthetic: np.ndarray) -> OverlapCounts:
    s = np.asarray(silhouette, dtype=bool)
    m = np.asarray(synthetic, dtype=bool)
    if s.shape != m.shape:
        raise ValueError(f"mask shapes differ: {s.shape} vs {m.shape}")
    nc = int(np.count_nonzero(s & m))
    return OverlapCounts(nc, int(np.count_nonzero(s)) - nc, int(np.count_nonzero(m)) - nc)


def weight(counts: OverlapCounts) -> float:
    denom = max(1, counts.n_silhouette_only + counts.n_model_only)
    return counts.n_common / denom


def weights_from_counts(n_common, n_silhouette_only, n_model_only) -> np.ndarray:
    """Vectorised :func:`weight`."""
    nc = np.asarray(n_common, dtype=float)
    denom = np.maximum(1, np.asarray(n_silhouette_only) + np.asarray(n_model_only))
    return nc / denom


def multi_camera_weight(per_camera_weights: Sequence[float]) -> float:
    """Mean of the per-camera weights."""
    w = np.asarray(per_camera_weights, dtype=float)
    if w.size == 0:
        raise ValueError("need at least one camera weight")
    return float(w.mean())


class Scorer:
    """Raw (unnormalised) weights of many body configurations against one frame.

    Holds the observation for a single time step: one silhouette per camera.
    """

    def __init__(self, spec: SkeletonSpec, cameras: Sequence[CameraModel],
                 silhouettes: Sequence[np.ndarray]):
        if len(cameras) != len(silhouettes):
            raise ValueError("need one silhouette per camera")
        if not cameras:
            raise ValueError("need at least one camera")
        self.spec = spec
        self.cameras = list(cameras)
        self.silhouettes = [np.ascontiguousarray(s, dtype=np.uint8) for s in silhouettes]
        self._sil_totals = [int(np.count_nonzero(s)) for s in self.silhouettes]
        self._radii = spec.radii
        self.evaluations = 0

    def joints(self, joints: np.ndarray) -> np.ndarray:
        """Weights for world-frame joint positions of shape ``(N, 19, 3)``."""
        ends = flesh_batch(self.spec, joints)
        total = np.zeros(len(ends))
        for cam, sil, sil_total in zip(self.cameras, self.silhouettes, self._sil_totals):
            counts = overlap_batch(cam, ends, self._radii, sil)
            model, common = counts[:, 0], counts[:, 1]
            total += weights_from_counts(common, sil_total - common, model - common)
        self.evaluations += len(ends)
        return total / len(self.cameras)

    def poses(self, poses: np.ndarray, origin: RigidTransform) -> np.ndarray:
        """Weights for clamped poses ``(N, 31)`` sharing one body origin."""
        return self.joints(forward_kinematics_batch(self.spec, poses, origin))

    def origins(self, pose: np.ndarray, origins: Sequence[RigidTransform]) -> np.ndarray:
        """Weights for one pose placed at each of several body origins."""
        local = forward_kinematics_batch(self.spec, np.asarray(pose, float)[None])[0]
        placed = np.stack([o.apply(local) for o in origins]) if origins else np.zeros((0, 19, 3))
        return self.joints(placed)
