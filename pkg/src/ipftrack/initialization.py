"""First-frame initialisation by exhaustive grid search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .likelihood import Scorer
from .skeleton import RigidTransform, SkeletonSpec, clamp_pose


class GridBudgetExceeded(ValueError):
    pass


class InitializationError(RuntimeError):
    pass


@dataclass(frozen=True)
class InitResult:
    pose: np.ndarray
    origin: RigidTransform
    weight: float
    # every pose in the grid, weighed at the winning origin
    poses: np.ndarray
    raw_weights: np.ndarray


def pose_grid(spec: SkeletonSpec, values: Mapping[int, Sequence[float]],
              defaults: np.ndarray | None = None) -> np.ndarray:
    """Cartesian product of per-DOF values, last listed DOF varying fastest."""
    base = spec.neutral_pose() if defaults is None else np.asarray(defaults, dtype=float)
    dofs = list(values)
    combos = np.array(list(itertools.product(*(values[d] for d in dofs))), dtype=float)
    grid = np.repeat(base[None], max(len(combos), 1), axis=0)
    if dofs:
        grid[:, dofs] = combos
    return clamp_pose(spec, grid)


def limit_grid(spec: SkeletonSpec, dofs: Sequence[int], step: float) -> dict[int, np.ndarray]:
    """Values from each DOF's lower limit to its upper limit in ``step`` increments."""
    lo, hi = spec.limits
    return {d: np.arange(lo[d], hi[d] + 1e-9, step) for d in dofs}


def initialize(spec: SkeletonSpec, poses: np.ndarray, origins: Sequence[RigidTransform],
               scorer: Scorer, budget: int = 200_000) -> InitResult:
    """Exhaustive argmax over ``origins x poses``.

    Ties go to the lowest enumeration index, origins outermost.

    Raises
    ------
    GridBudgetExceeded
        Before any evaluation, if the grid is larger than ``budget``.
    InitializationError
        If every configuration scores zero.
    """
    poses = np.asarray(poses, dtype=float)
    total = len(poses) * len(origins)
    if total > budget:
        raise GridBudgetExceeded(f"grid of {total} configurations exceeds budget {budget}")
    if total == 0:
        raise InitializationError("empty initialisation grid")
    best = (-1.0, 0, None)
    for k, origin in enumerate(origins):
        w = scorer.poses(poses, origin)
        i = int(np.argmax(w))
        if w[i] > best[0]:
            best = (float(w[i]), k, w)
    w_best, k, w = best
    if not w_best > 0:
        raise InitializationError("every initial configuration has zero weight")
    i = int(np.argmax(w))
    return InitResult(poses[i].copy(), origins[k], w_best, poses, w)
