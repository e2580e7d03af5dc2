"""Accuracy metrics of a track against ground truth."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .report import TrackReport


@dataclass
class Metrics:
    dof_mae: np.ndarray            # (31,) degrees
    joint_error: np.ndarray        # (19,) metres, mean over frames
    dof_abs_error: np.ndarray      # (F, 31) per-frame absolute errors
    joint_frame_error: np.ndarray  # (F, 19) per-frame Euclidean errors

    def tracked_mae(self, dofs: Sequence[int]) -> float:
        return float(self.dof_mae[list(dofs)].mean())

    def frame_mae(self, dofs: Sequence[int] | None = None) -> np.ndarray:
        """Mean absolute error per frame over ``dofs`` (all DOFs by default)."""
        err = self.dof_abs_error if dofs is None else self.dof_abs_error[:, list(dofs)]
        return err.mean(axis=1)

    def write_series(self, path, dofs: Sequence[int] | None = None) -> None:
        """Per-frame error series as CSV for plotting."""
        n_joints = self.joint_frame_error.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            cols = ["frame", "dof_mae", "tracked_mae", "joint_error"]
            w.writerow(cols + [f"j{j:02d}_err" for j in range(n_joints)])
            tracked = self.frame_mae(dofs) if dofs is not None else self.frame_mae()
            for k in range(len(self.dof_abs_error)):
                row = [k, self.dof_abs_error[k].mean(), tracked[k],
                       self.joint_frame_error[k].mean(), *self.joint_frame_error[k]]
                w.writerow([row[0]] + [f"{v:.6f}" for v in row[1:]])


def evaluate(report: TrackReport, truth: TrackReport) -> Metrics:
    if len(report) != len(truth):
        raise ValueError(f"report has {len(report)} frames but ground truth has {len(truth)}")
    dof_err = np.abs(report.dofs - truth.dofs)
    joint_err = np.linalg.norm(report.joints - truth.joints, axis=2)
    if len(report) == 0:
        return Metrics(np.zeros(dof_err.shape[1]), np.zeros(joint_err.shape[1]), dof_err, joint_err)
    return Metrics(dof_err.mean(axis=0), joint_err.mean(axis=0), dof_err, joint_err)
