"""Articulated body model: topology, joint limits, forward kinematics, capsules.

Conventions used throughout the package:

* Angles are degrees everywhere; radians only appear inside trig kernels.
* A joint carrying several DOFs composes them as ``Rz @ Ry @ Rx`` in its
  local frame (missing axes are zero).  The body origin uses the same order,
  ``Rz(yaw) @ Ry(pitch) @ Rx(roll)``.
* The rotation at a joint moves its descendants, never the joint itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

AXES = ("x", "y", "z")
N_JOINTS = 19
N_SEGMENTS = 17
N_DOF = 31


class SkeletonError(ValueError):
    """Raised for a malformed skeleton description."""


class PoseLimitError(ValueError):
    """Raised when a pose violates joint limits."""

    def __init__(self, violations: list[int], names: Sequence[str]):
        self.violations = violations
        listed = ", ".join(f"{i} ({names[i]})" for i in violations)
        super().__init__(f"pose outside joint limits at DOF {listed}")


# -----------------------
# Rotation helpers
# -----------------------

def axis_rotation(axis: str, angle_deg):
    """Rotation matrices about a principal axis.

    ``angle_deg`` may be a scalar or an array of shape ``(N,)``; the result
    is ``(3, 3)`` or ``(N, 3, 3)`` accordingly.
    """
    a = np.deg2rad(np.asarray(angle_deg, dtype=float))
    c, s = np.cos(a), np.sin(a)
    one, zero = np.ones_like(a), np.zeros_like(a)
    if axis == "x":
        rows = [[one, zero, zero], [zero, c, -s], [zero, s, c]]
    elif axis == "y":
        rows = [[c, zero, s], [zero, one, zero], [-s, zero, c]]
    elif axis == "z":
        rows = [[c, -s, zero], [s, c, zero], [zero, zero, one]]
    else:
        raise ValueError(f"unknown axis {axis!r}")
    m = np.array(rows, dtype=float)
    return np.moveaxis(m, (0, 1), (-2, -1)) if m.ndim > 2 else m


def euler_matrix(yaw: float, pitch: float, roll: float) -> np.ndarray:
    """``Rz(yaw) @ Ry(pitch) @ Rx(roll)``, angles in degrees."""
    return axis_rotation("z", yaw) @ axis_rotation("y", pitch) @ axis_rotation("x", roll)


def wrap_degrees(angle):
    """Wrap angles into [-180, 180)."""
    return (np.asarray(angle, dtype=float) + 180.0) % 360.0 - 180.0


@dataclass(frozen=True)
class RigidTransform:
    """Position (metres) plus yaw/pitch/roll (degrees, ``Rz Ry Rx`` order).

    Orientation angles are wrapped into [-180, 180) on construction.
    """

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    orientation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        pos = np.array(self.position, dtype=float).reshape(3)
        ori = wrap_degrees(np.array(self.orientation, dtype=float).reshape(3))
        pos.setflags(write=False)
        ori.setflags(write=False)
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "orientation", ori)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls()

    @classmethod
    def from_vector(cls, v: Sequence[float]) -> "RigidTransform":
        """Build from ``(x, y, z, yaw, pitch, roll)``."""
        v = np.asarray(v, dtype=float)
        return cls(v[:3], v[3:6])

    @classmethod
    def from_matrix(cls, rotation: np.ndarray, translation: np.ndarray) -> "RigidTransform":
        r = np.asarray(rotation, dtype=float)
        pitch = np.degrees(np.arcsin(np.clip(-r[2, 0], -1.0, 1.0)))
        yaw = np.degrees(np.arctan2(r[1, 0], r[0, 0]))
        roll = np.degrees(np.arctan2(r[2, 1], r[2, 2]))
        return cls(translation, (yaw, pitch, roll))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.position, self.orientation])

    @property
    def rotation(self) -> np.ndarray:
        return euler_matrix(*self.orientation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map points of shape ``(..., 3)`` through the transform."""
        return np.asarray(points, dtype=float) @ self.rotation.T + self.position

    def __eq__(self, other):
        if not isinstance(other, RigidTransform):
            return NotImplemented
        return np.array_equal(self.as_vector(), other.as_vector())

    def __hash__(self):
        return hash(self.as_vector().tobytes())


# -----------------------
# Skeleton description
# -----------------------

@dataclass(frozen=True)
class Joint:
    name: str
    parent: int | None
    offset: tuple[float, float, float]


@dataclass(frozen=True)
class Segment:
    a: int
    b: int
    radius: float


@dataclass(frozen=True)
class Dof:
    name: str
    joint: int
    axis: str
    limit_min: float
    limit_max: float


@dataclass(frozen=True)
class SkeletonSpec:
    """Static body topology. Immutable once constructed."""

    joints: tuple[Joint, ...]
    segments: tuple[Segment, ...]
    dofs: tuple[Dof, ...]

    def __post_init__(self):
        if len(self.joints) != N_JOINTS:
            raise SkeletonError(f"expected {N_JOINTS} joints, got {len(self.joints)}")
        if len(self.segments) != N_SEGMENTS:
            raise SkeletonError(f"expected {N_SEGMENTS} segments, got {len(self.segments)}")
        if len(self.dofs) != N_DOF:
            raise SkeletonError(f"expected {N_DOF} DOFs, got {len(self.dofs)}")
        roots = [i for i, j in enumerate(self.joints) if j.parent is None]
        if len(roots) != 1:
            raise SkeletonError(f"expected exactly one root joint, got {len(roots)}")
        object.__setattr__(self, "_order", self._topological_order(roots[0]))
        for s in self.segments:
            if s.a == s.b:
                raise SkeletonError(f"segment joins joint {s.a} to itself")
            if not s.radius > 0:
                raise SkeletonError(f"segment {s.a}-{s.b} has non-positive radius")
            for k in (s.a, s.b):
                if not 0 <= k < N_JOINTS:
                    raise SkeletonError(f"segment references unknown joint {k}")
        seen = set()
        for d in self.dofs:
            if d.axis not in AXES:
                raise SkeletonError(f"DOF {d.name}: bad axis {d.axis!r}")
            if not d.limit_min < d.limit_max:
                raise SkeletonError(f"DOF {d.name}: limit_min must be < limit_max")
            if (d.joint, d.axis) in seen:
                raise SkeletonError(f"DOF {d.name}: duplicate axis on joint {d.joint}")
            seen.add((d.joint, d.axis))
        # per-joint (dof index, axis) in application order z, y, x
        per_joint: list[list[tuple[int, str]]] = [[] for _ in self.joints]
        for i, d in enumerate(self.dofs):
            per_joint[d.joint].append((i, d.axis))
        for lst in per_joint:
            lst.sort(key=lambda t: "zyx".index(t[1]))
        object.__setattr__(self, "_joint_dofs", tuple(tuple(l) for l in per_joint))
        offsets = np.array([j.offset for j in self.joints], dtype=float)
        offsets.setflags(write=False)
        object.__setattr__(self, "_offsets", offsets)

    def _topological_order(self, root: int) -> tuple[int, ...]:
        children: dict[int, list[int]] = {i: [] for i in range(len(self.joints))}
        for i, j in enumerate(self.joints):
            if j.parent is not None:
                if not 0 <= j.parent < len(self.joints):
                    raise SkeletonError(f"joint {j.name} has unknown parent {j.parent}")
                children[j.parent].append(i)
        order, stack = [], [root]
        while stack:
            k = stack.pop()
            order.append(k)
            stack.extend(reversed(children[k]))
        if len(order) != len(self.joints):
            raise SkeletonError("joint hierarchy is cyclic or disconnected")
        return tuple(order)

    @property
    def root(self) -> int:
        return self._order[0]

    @property
    def joint_names(self) -> list[str]:
        return [j.name for j in self.joints]

    @property
    def dof_names(self) -> list[str]:
        return [d.name for d in self.dofs]

    @property
    def limits(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([d.limit_min for d in self.dofs])
        hi = np.array([d.limit_max for d in self.dofs])
        return lo, hi

    @property
    def radii(self) -> np.ndarray:
        return np.array([s.radius for s in self.segments])

    @property
    def segment_pairs(self) -> np.ndarray:
        return np.array([(s.a, s.b) for s in self.segments], dtype=np.intp)

    def joint_index(self, name: str) -> int:
        try:
            return self.joint_names.index(name)
        except ValueError:
            raise KeyError(f"unknown joint {name!r}") from None

    def dof_index(self, name: str) -> int:
        try:
            return self.dof_names.index(name)
        except ValueError:
            raise KeyError(f"unknown DOF {name!r}") from None

    def neutral_pose(self) -> np.ndarray:
        """All-zero pose clamped into the limits."""
        return clamp_pose(self, np.zeros(N_DOF))


def spec_from_dict(data: dict) -> SkeletonSpec:
    """Build a :class:`SkeletonSpec` from the parsed config mapping."""
    jrecs = data["joints"]
    names = [j["name"] for j in jrecs]
    if len(set(names)) != len(names):
        raise SkeletonError("duplicate joint names")
    index = {n: i for i, n in enumerate(names)}

    def ref(x):
        if isinstance(x, str):
            if x not in index:
                raise SkeletonError(f"unknown joint {x!r}")
            return index[x]
        return None if x is None else int(x)

    joints = tuple(
        Joint(j["name"], ref(j.get("parent")), tuple(float(v) for v in j["offset"]))
        for j in jrecs
    )
    segments = tuple(
        Segment(ref(s["joints"][0]), ref(s["joints"][1]), float(s["radius"]))
        for s in data["segments"]
    )
    dofs = []
    for d in data["dofs"]:
        jidx = ref(d["joint"])
        lo, hi = d["limits"]
        dofs.append(Dof(d.get("name", f"{names[jidx]}_{d['axis']}"), jidx, d["axis"],
                        float(lo), float(hi)))
    return SkeletonSpec(joints, segments, tuple(dofs))


def load_spec(path: str | Path | None = None) -> SkeletonSpec:
    """Load a skeleton YAML file; ``None`` gives the shipped default body."""
    if path is None:
        return default_spec()
    with open(path) as fh:
        return spec_from_dict(yaml.safe_load(fh))


@lru_cache(maxsize=1)
def default_spec() -> SkeletonSpec:
    text = resources.files("ipftrack.data").joinpath("body.yaml").read_text()
    return spec_from_dict(yaml.safe_load(text))


# -----------------------
# Poses
# -----------------------

def validate_pose(spec: SkeletonSpec, pose) -> list[int]:
    """Indices of DOFs outside their limits; empty when the pose is valid."""
    pose = np.asarray(pose, dtype=float)
    if pose.shape != (N_DOF,):
        raise ValueError(f"pose must have shape ({N_DOF},), got {pose.shape}")
    lo, hi = spec.limits
    bad = ~((pose >= lo) & (pose <= hi))
    return [int(i) for i in np.flatnonzero(bad)]


def clamp_pose(spec: SkeletonSpec, pose) -> np.ndarray:
    """Clamp each angle into its limit range. Works on ``(31,)`` or ``(N, 31)``."""
    lo, hi = spec.limits
    return np.clip(np.asarray(pose, dtype=float), lo, hi)


# -----------------------
# Forward kinematics
# -----------------------

def forward_kinematics_batch(spec: SkeletonSpec, poses: np.ndarray,
                             origin: RigidTransform | None = None) -> np.ndarray:
    """Joint positions for many poses at once.

    No limit check is done here; callers pass clamped poses.

    Parameters
    ----------
    poses : ndarray, shape (N, 31)
    origin : RigidTransform, optional
        Body origin; identity when omitted.

    Returns
    -------
    ndarray, shape (N, 19, 3)
    """
    poses = np.asarray(poses, dtype=float)
    n = poses.shape[0]
    origin = origin or RigidTransform()
    offsets = spec._offsets
    frames = np.empty((n, N_JOINTS, 3, 3))
    pos = np.empty((n, N_JOINTS, 3))
    root_rot = origin.rotation
    for j in spec._order:
        parent = spec.joints[j].parent
        if parent is None:
            frame = np.broadcast_to(root_rot, (n, 3, 3))
            pos[:, j] = origin.position
        else:
            frame = frames[:, parent]
            pos[:, j] = pos[:, parent] + frame @ offsets[j]
        for dof, axis in spec._joint_dofs[j]:
            frame = frame @ axis_rotation(axis, poses[:, dof])
        frames[:, j] = frame
    return pos


def forward_kinematics(spec: SkeletonSpec, pose,
                       origin: RigidTransform | None = None) -> np.ndarray:
    """World positions of the 19 joints, shape ``(19, 3)``.

    Raises
    ------
    PoseLimitError
        If any angle lies outside its limits.
    """
    bad = validate_pose(spec, pose)
    if bad:
        raise PoseLimitError(bad, spec.dof_names)
    return forward_kinematics_batch(spec, np.asarray(pose, dtype=float)[None], origin)[0]


# -----------------------
# Fleshed volumes
# -----------------------

@dataclass(frozen=True)
class Capsule:
    a: np.ndarray
    b: np.ndarray
    radius: float


@dataclass(frozen=True)
class BodyVolume:
    """Capsules as arrays: ``ends`` is ``(K, 2, 3)``, ``radii`` is ``(K,)``."""

    ends: np.ndarray
    radii: np.ndarray

    @classmethod
    def empty(cls) -> "BodyVolume":
        return cls(np.zeros((0, 2, 3)), np.zeros(0))

    @classmethod
    def from_capsules(cls, capsules: Sequence[Capsule]) -> "BodyVolume":
        if not capsules:
            return cls.empty()
        ends = np.array([[c.a, c.b] for c in capsules], dtype=float)
        return cls(ends, np.array([c.radius for c in capsules], dtype=float))

    @property
    def capsules(self) -> list[Capsule]:
        return [Capsule(e[0], e[1], float(r)) for e, r in zip(self.ends, self.radii)]

    def __len__(self):
        return len(self.radii)


def flesh(spec: SkeletonSpec, joint_positions: np.ndarray) -> BodyVolume:
    """One capsule per segment, endpoints at the segment's joints."""
    jp = np.asarray(joint_positions, dtype=float)
    pairs = spec.segment_pairs
    return BodyVolume(jp[pairs], spec.radii)


def flesh_batch(spec: SkeletonSpec, joint_positions: np.ndarray) -> np.ndarray:
    """Capsule endpoints for ``(N, 19, 3)`` joints, shape ``(N, 17, 2, 3)``."""
    return np.asarray(joint_positions)[:, spec.segment_pairs]
