"""Per-frame tracking records and their CSV form.

Columns: ``frame, origin_x, origin_y, origin_z, origin_yaw, origin_pitch,
origin_roll, dof_00..dof_30, j00_x..j18_z, max_weight, lost``. Floats are
written with six decimals. Ground-truth files omit the last two columns.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .skeleton import N_DOF, N_JOINTS, RigidTransform

ORIGIN_COLUMNS = ["origin_x", "origin_y", "origin_z", "origin_yaw", "origin_pitch", "origin_roll"]
DOF_COLUMNS = [f"dof_{i:02d}" for i in range(N_DOF)]
JOINT_COLUMNS = [f"j{j:02d}_{a}" for j in range(N_JOINTS) for a in "xyz"]


def header(with_weights: bool = True) -> list[str]:
    cols = ["frame", *ORIGIN_COLUMNS, *DOF_COLUMNS, *JOINT_COLUMNS]
    return cols + ["max_weight", "lost"] if with_weights else cols


def _fmt(x: float) -> str:
    return f"{round(float(x), 6) + 0.0:.6f}"


@dataclass
class FrameRecord:
    frame: int
    origin: RigidTransform
    dofs: np.ndarray
    joints: np.ndarray
    max_weight: float = float("nan")
    lost: bool = False

    def row(self, with_weights: bool = True) -> list[str]:
        values = [*self.origin.as_vector(), *self.dofs, *np.asarray(self.joints).ravel()]
        row = [str(self.frame)] + [_fmt(v) for v in values]
        if with_weights:
            row += [_fmt(self.max_weight), str(int(self.lost))]
        return row


@dataclass
class TrackReport:
    records: list[FrameRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    @property
    def dofs(self) -> np.ndarray:
        return np.array([r.dofs for r in self.records]).reshape(-1, N_DOF)

    @property
    def joints(self) -> np.ndarray:
        return np.array([r.joints for r in self.records]).reshape(-1, N_JOINTS, 3)

    @property
    def origins(self) -> list[RigidTransform]:
        return [r.origin for r in self.records]

    @property
    def lost(self) -> np.ndarray:
        return np.array([r.lost for r in self.records], dtype=bool)

    def to_csv(self, path, with_weights: bool = True) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header(with_weights))
            for r in self.records:
                w.writerow(r.row(with_weights))

    @classmethod
    def from_csv(cls, path) -> "TrackReport":
        records = []
        with open(Path(path), newline="") as fh:
            for row in csv.DictReader(fh):
                origin = RigidTransform.from_vector([float(row[c]) for c in ORIGIN_COLUMNS])
                dofs = np.array([float(row[c]) for c in DOF_COLUMNS])
                joints = np.array([float(row[c]) for c in JOINT_COLUMNS]).reshape(N_JOINTS, 3)
                mw = float(row["max_weight"]) if "max_weight" in row else float("nan")
                lost = bool(int(row["lost"])) if "lost" in row else False
                records.append(FrameRecord(int(row["frame"]), origin, dofs, joints, mw, lost))
        return cls(records)
