"""Per-frame body origin estimation by coordinate-wise grid search.

The six origin coordinates are searched one at a time in the order
x, y, z, yaw, pitch, roll, with the body pose held fixed. For each
coordinate every grid value within the range around the current value is
scored, and the best one is fixed before moving to the next coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .likelihood import Scorer
from .skeleton import RigidTransform

DIMENSIONS = ("x", "y", "z", "yaw", "pitch", "roll")


@dataclass(frozen=True)
class OriginSearch:
    position_range: float = 0.3
    position_step: float = 0.05
    angle_range: float = 15.0
    angle_step: float = 5.0
    passes: int = 1

    def __post_init__(self):
        for name in ("position_range", "position_step", "angle_range", "angle_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.passes < 1:
            raise ValueError("passes must be at least 1")

    def offsets(self, dim: int) -> np.ndarray:
        """Candidate offsets for one coordinate, ascending, centre included."""
        rng, step = ((self.position_range, self.position_step) if dim < 3
                     else (self.angle_range, self.angle_step))
        k = int(np.floor(rng / step + 1e-9))
        return np.arange(-k, k + 1) * step


@dataclass(frozen=True)
class OriginEstimate:
    origin: RigidTransform
    weight: float
    lost: bool
    evaluations: int


def estimate_origin(pose: np.ndarray, prev_origin: RigidTransform, scorer: Scorer,
                    search: OriginSearch = OriginSearch()) -> OriginEstimate:
    """Best body origin for ``pose`` against the scorer's observation.

    On ties the current value of a coordinate is kept; otherwise the lowest
    candidate wins. If every candidate scores zero, ``prev_origin`` is
    returned with ``lost`` set.
    """
    current = prev_origin.as_vector()
    best_w = float(scorer.origins(pose, [prev_origin])[0])
    any_evidence = best_w > 0
    n_eval = 1
    for _ in range(search.passes):
        start = current.copy()
        for dim in range(6):
            offs = search.offsets(dim)
            cands = np.repeat(current[None], len(offs), axis=0)
            cands[:, dim] += offs
            w = scorer.origins(pose, [RigidTransform.from_vector(c) for c in cands])
            n_eval += len(offs)
            any_evidence |= bool(np.any(w > 0))
            centre = len(offs) // 2
            pick = int(np.argmax(w))
            if w[pick] > w[centre]:
                current = RigidTransform.from_vector(cands[pick]).as_vector()
                best_w = float(w[pick])
            else:
                best_w = float(w[centre])
        if np.array_equal(current, start):
            break  # a pass that moves nothing would repeat forever
    if not any_evidence:
        return OriginEstimate(prev_origin, 0.0, True, n_eval)
    return OriginEstimate(RigidTransform.from_vector(current), best_w, False, n_eval)
