"""Pinhole camera and the capsule rasterizer.

Binary images are plain ``numpy`` boolean arrays of shape ``(height, width)``.
Camera coordinates follow the usual vision convention: x right, y down,
z along the optical axis. Pixel ``(i, j)`` (column, row) has its centre at
``(i + 0.5, j + 0.5)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .skeleton import BodyVolume, RigidTransform

NEAR = 1e-6


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera.

    ``extrinsic`` maps world points into the camera frame:
    ``X_cam = R @ X_world + t`` with ``R``/``t`` taken from the transform.
    """

    focal: float
    principal: tuple[float, float]
    extrinsic: RigidTransform
    resolution: tuple[int, int]

    def __post_init__(self):
        w, h = self.resolution
        px, py = self.principal
        if not self.focal > 0:
            raise ValueError("focal length must be positive")
        if w <= 0 or h <= 0:
            raise ValueError("resolution must be positive")
        if not (0 <= px <= w and 0 <= py <= h):
            raise ValueError("principal point must lie inside the image")
        object.__setattr__(self, "resolution", (int(w), int(h)))
        object.__setattr__(self, "principal", (float(px), float(py)))
        object.__setattr__(self, "_R", self.extrinsic.rotation)
        object.__setattr__(self, "_t", np.array(self.extrinsic.position))

    @classmethod
    def look_at(cls, eye, target, focal: float, resolution=(320, 240),
                principal=None, up=(0.0, 0.0, 1.0)) -> "CameraModel":
        """Camera at ``eye`` looking at ``target`` with world ``up`` pointing up-image."""
        eye = np.asarray(eye, dtype=float)
        fwd = np.asarray(target, dtype=float) - eye
        fwd /= np.linalg.norm(fwd)
        right = np.cross(fwd, up)
        norm = np.linalg.norm(right)
        if norm < 1e-9:
            raise ValueError("view direction is parallel to the up vector")
        right /= norm
        down = np.cross(fwd, right)
        rot = np.stack([right, down, fwd])
        if principal is None:
            principal = (resolution[0] / 2.0, resolution[1] / 2.0)
        return cls(focal, principal, RigidTransform.from_matrix(rot, -rot @ eye), resolution)

    @property
    def width(self) -> int:
        return self.resolution[0]

    @property
    def height(self) -> int:
        return self.resolution[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.resolution[1], self.resolution[0]

    def to_camera(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self._R.T + self._t


def project_point(camera: CameraModel, point) -> tuple[float, float] | None:
    """Perspective projection of a world point.

    Returns ``None`` for points at or behind the camera plane.
    """
    x, y, z = camera.to_camera(point)
    if z <= 0:
        return None
    cx, cy = camera.principal
    return camera.focal * x / z + cx, camera.focal * y / z + cy


# -----------------------
# Kernels
# -----------------------

@njit(cache=True, fastmath=True)
def _ray_segment_dist2(dx, dy, p0, e, c_len2):
    """Squared distance from the ray ``t*(dx, dy, 1), t >= 0`` to a segment."""
    a = dx * dx + dy * dy + 1.0
    b = dx * e[0] + dy * e[1] + e[2]
    dd = dx * p0[0] + dy * p0[1] + p0[2]
    ee = p0[0] * e[0] + p0[1] * e[1] + p0[2] * e[2]
    if c_len2 <= 1e-18:
        s = 0.0
        t = dd / a
        if t < 0.0:
            t = 0.0
    else:
        denom = a * c_len2 - b * b
        if denom > 1e-14 * a * c_len2:
            s = (b * dd - a * ee) / denom
        else:
            s = 0.0
        if s < 0.0:
            s = 0.0
        elif s > 1.0:
            s = 1.0
        t = (b * s + dd) / a
        if t < 0.0:
            t = 0.0
            s = -ee / c_len2
            if s < 0.0:
                s = 0.0
            elif s > 1.0:
                s = 1.0
    qx = t * dx - p0[0] - s * e[0]
    qy = t * dy - p0[1] - s * e[1]
    qz = t - p0[2] - s * e[2]
    return qx * qx + qy * qy + qz * qz


@njit(cache=True, fastmath=True)
def _draw_capsules(ends, radii, focal, cx, cy, mask, sil, use_sil):
    """Rasterize capsules (camera frame) into ``mask``.

    Returns ``(newly set pixels, newly set pixels that are also set in sil)``.
    """
    h, w = mask.shape
    n_model = 0
    n_common = 0
    p0 = np.empty(3)
    p1 = np.empty(3)
    e = np.empty(3)
    for k in range(ends.shape[0]):
        r = radii[k]
        for m in range(3):
            p0[m] = ends[k, 0, m]
            p1[m] = ends[k, 1, m]
        # clip the segment to the positive-depth half-space
        if p0[2] <= NEAR and p1[2] <= NEAR:
            continue
        if p0[2] <= NEAR or p1[2] <= NEAR:
            if p0[2] <= NEAR:
                q, o = p0, p1
            else:
                q, o = p1, p0
            lam = (o[2] - NEAR) / (o[2] - q[2])
            for m in range(3):
                q[m] = o[m] + lam * (q[m] - o[m])
        for m in range(3):
            e[m] = p1[m] - p0[m]
        c_len2 = e[0] * e[0] + e[1] * e[1] + e[2] * e[2]

        # conservative image-space box from the capsule's 3D bounding box
        zlo = min(p0[2], p1[2]) - r
        zhi = max(p0[2], p1[2]) + r
        i0, i1, j0, j1 = 0, w - 1, 0, h - 1
        if zlo > NEAR:
            xlo = min(p0[0], p1[0]) - r
            xhi = max(p0[0], p1[0]) + r
            ylo = min(p0[1], p1[1]) - r
            yhi = max(p0[1], p1[1]) + r
            umin = min(xlo / zlo, xlo / zhi) * focal + cx
            umax = max(xhi / zlo, xhi / zhi) * focal + cx
            vmin = min(ylo / zlo, ylo / zhi) * focal + cy
            vmax = max(yhi / zlo, yhi / zhi) * focal + cy
            i0 = max(i0, int(np.ceil(umin - 0.5)))
            i1 = min(i1, int(np.floor(umax - 0.5)))
            j0 = max(j0, int(np.ceil(vmin - 0.5)))
            j1 = min(j1, int(np.floor(vmax - 0.5)))
        r2 = r * r
        for j in range(j0, j1 + 1):
            dy = (j + 0.5 - cy) / focal
            for i in range(i0, i1 + 1):
                if mask[j, i]:
                    continue
                dx = (i + 0.5 - cx) / focal
                if _ray_segment_dist2(dx, dy, p0, e, c_len2) <= r2:
                    mask[j, i] = 1
                    n_model += 1
                    if use_sil and sil[j, i]:
                        n_common += 1
    return n_model, n_common


@njit(cache=True, fastmath=True)
def _overlap_batch(ends, radii, focal, cx, cy, sil):
    """Model and common pixel counts for a batch of bodies, ``(N, 2)``."""
    n = ends.shape[0]
    out = np.empty((n, 2), dtype=np.int64)
    mask = np.zeros(sil.shape, dtype=np.uint8)
    for p in range(n):
        mask[:, :] = 0
        nm, nc = _draw_capsules(ends[p], radii, focal, cx, cy, mask, sil, True)
        out[p, 0] = nm
        out[p, 1] = nc
    return out


def _camera_ends(camera: CameraModel, ends: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(camera.to_camera(ends))


def rasterize(camera: CameraModel, body: BodyVolume) -> np.ndarray:
    """Binary footprint of a body: True where a pixel ray hits any capsule."""
    mask = np.zeros(camera.shape, dtype=np.uint8)
    if len(body):
        cx, cy = camera.principal
        _draw_capsules(_camera_ends(camera, body.ends), np.ascontiguousarray(body.radii, float),
                       float(camera.focal), cx, cy, mask, mask, False)
    return mask.astype(bool)


def overlap_batch(camera: CameraModel, ends: np.ndarray, radii: np.ndarray,
                  silhouette: np.ndarray) -> np.ndarray:
    """Rasterize ``(N, K, 2, 3)`` world-frame capsule sets against a silhouette.

    Returns an ``(N, 2)`` int array of ``(model pixels, common pixels)``.
    """
    sil = np.ascontiguousarray(silhouette, dtype=np.uint8)
    if sil.shape != camera.shape:
        raise ValueError(f"silhouette shape {sil.shape} does not match camera {camera.shape}")
    cx, cy = camera.principal
    return _overlap_batch(_camera_ends(camera, ends), np.ascontiguousarray(radii, float),
                          float(camera.focal), cx, cy, sil)
