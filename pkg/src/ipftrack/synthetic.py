"""Synthetic sequences with known ground truth."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .camera import CameraModel, rasterize
from .imageio import frame_name, write_pgm
from .report import TrackReport, FrameRecord
from .skeleton import RigidTransform, SkeletonSpec, clamp_pose, flesh, forward_kinematics


class TrajectoryError(ValueError):
    pass


@dataclass(frozen=True)
class Waveform:
    """``offset + amplitude * sin(2*pi*t/period + phase)``; amplitude 0 is constant."""

    amplitude: float = 0.0
    period: float = 1.0
    phase: float = 0.0       # degrees
    offset: float = 0.0

    @classmethod
    def constant(cls, value: float) -> "Waveform":
        return cls(offset=value)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.amplitude == 0:
            return np.full_like(t, self.offset)
        return self.offset + self.amplitude * np.sin(2 * np.pi * t / self.period
                                                     + np.deg2rad(self.phase))


@dataclass(frozen=True)
class Waypoint:
    t: float
    position: tuple[float, float, float]
    orientation: tuple[float, float, float] = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class TrajectorySpec:
    duration: float
    fps: float = 20.0
    motions: dict[int, Waveform] = field(default_factory=dict)
    origin_waypoints: tuple[Waypoint, ...] = ()
    base_pose: np.ndarray | None = None

    @property
    def n_frames(self) -> int:
        return int(round(self.duration * self.fps))

    def times(self) -> np.ndarray:
        return np.arange(self.n_frames) / self.fps

    def poses(self, spec: SkeletonSpec) -> np.ndarray:
        t = self.times()
        base = spec.neutral_pose() if self.base_pose is None else np.asarray(self.base_pose)
        out = np.repeat(np.asarray(base, dtype=float)[None], len(t), axis=0)
        for dof, wave in self.motions.items():
            out[:, dof] = wave(t)
        return clamp_pose(spec, out)

    def origins(self) -> list[RigidTransform]:
        t = self.times()
        if not self.origin_waypoints:
            return [RigidTransform() for _ in t]
        wps = sorted(self.origin_waypoints, key=lambda w: w.t)
        ts = [w.t for w in wps]
        vecs = np.array([list(w.position) + list(w.orientation) for w in wps], dtype=float)
        cols = [np.interp(t, ts, vecs[:, k]) for k in range(6)]
        return [RigidTransform.from_vector(v) for v in np.stack(cols, axis=1)]

    def check_rate(self, spec: SkeletonSpec, max_step: float,
                   dofs: Sequence[int] | None = None) -> None:
        """Reject trajectories whose per-frame change exceeds ``max_step`` degrees."""
        poses = self.poses(spec)
        if len(poses) < 2:
            return
        dofs = list(range(poses.shape[1])) if dofs is None else list(dofs)
        steps = np.abs(np.diff(poses[:, dofs], axis=0))
        bad = np.argwhere(steps > max_step + 1e-9)
        if len(bad):
            k, j = bad[0]
            raise TrajectoryError(
                f"frame {k + 1}: DOF {dofs[j]} ({spec.dof_names[dofs[j]]}) changes by "
                f"{steps[k, j]:.3f} deg > {max_step} deg")


def max_sinusoid_step(amplitude: float, period: float, fps: float) -> float:
    """Largest frame-to-frame change of a sampled sinusoid: ``2A sin(pi/(T fps))``."""
    return 2 * amplitude * math.sin(min(math.pi / (period * fps), math.pi / 2))


def trajectory_from_dict(spec: SkeletonSpec, d: dict) -> TrajectorySpec:
    motions = {}
    for m in d.get("motions", []):
        dof = spec.dof_index(m["dof"]) if isinstance(m["dof"], str) else int(m["dof"])
        if m.get("waveform", "sinusoid") == "constant":
            motions[dof] = Waveform.constant(float(m.get("value", m.get("offset", 0.0))))
        else:
            motions[dof] = Waveform(float(m["amplitude"]), float(m["period"]),
                                    float(m.get("phase", 0.0)), float(m.get("offset", 0.0)))
    wps = tuple(Waypoint(float(w["t"]), tuple(w["position"]), tuple(w.get("orientation", (0, 0, 0))))
                for w in d.get("origin_waypoints", []))
    return TrajectorySpec(float(d["duration"]), float(d.get("fps", 20.0)), motions, wps)


def truth_report(spec: SkeletonSpec, traj: TrajectorySpec) -> TrackReport:
    records = []
    for k, (pose, origin) in enumerate(zip(traj.poses(spec), traj.origins())):
        records.append(FrameRecord(k, origin, pose, forward_kinematics(spec, pose, origin)))
    return TrackReport(records)


def render_sequence(spec: SkeletonSpec, cameras: Sequence[CameraModel],
                    truth: TrackReport) -> list[list[np.ndarray]]:
    """Silhouettes ``[frame][camera]`` of a ground-truth report."""
    return [[rasterize(cam, flesh(spec, rec.joints)) for cam in cameras] for rec in truth.records]


def generate_synthetic(spec: SkeletonSpec, cameras: Sequence[CameraModel], traj: TrajectorySpec,
                       out_dir, max_step: float | None = None,
                       checked_dofs: Sequence[int] | None = None) -> TrackReport:
    """Render a trajectory to ``out_dir/cam<k>/frame_<n>.pgm`` plus ``ground_truth.csv``."""
    if max_step is not None:
        traj.check_rate(spec, max_step, checked_dofs)
    truth = truth_report(spec, traj)
    out = Path(out_dir)
    for c in range(len(cameras)):
        (out / f"cam{c}").mkdir(parents=True, exist_ok=True)
    for k, masks in enumerate(render_sequence(spec, cameras, truth)):
        for c, mask in enumerate(masks):
            write_pgm(out / f"cam{c}" / frame_name(k), mask)
    truth.to_csv(out / "ground_truth.csv", with_weights=False)
    return truth
