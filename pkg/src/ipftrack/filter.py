"""Interval particle filtering and the Condensation baseline.

Particle sets are stored as arrays: ``poses`` of shape ``(N, 31)`` and
``weights`` of shape ``(N,)``. The split into tracked and remaining DOFs is
carried by :class:`IntervalSpec`, not by the particles themselves.

Randomness: every frame draws from its own generator seeded with
``(seed, frame)``; within a frame, row ``i`` of each noise matrix belongs to
output particle ``i``. Results therefore do not depend on how the weight
evaluations are scheduled.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .likelihood import Scorer
from .skeleton import N_DOF, RigidTransform, SkeletonSpec, clamp_pose


class DegenerateParticleSet(ValueError):
    """Fewer distinct particles than the selection step needs."""


@dataclass(frozen=True)
class IntervalSpec:
    """Tracked DOFs and the grid laid around each of them.

    ``half_width`` and ``q`` may be given once for all tracked DOFs or per DOF.
    """

    tracked: tuple[int, ...]
    half_width: tuple[float, ...] | float = 5.0
    q: tuple[int, ...] | int = 3

    def __post_init__(self):
        tracked = tuple(int(i) for i in self.tracked)
        n = len(tracked)
        if n < 1:
            raise ValueError("at least one tracked DOF is required")
        if len(set(tracked)) != n:
            raise ValueError("tracked DOF indices must be distinct")
        if any(not 0 <= i < N_DOF for i in tracked):
            raise ValueError(f"tracked DOF indices must lie in [0, {N_DOF})")
        hw = np.broadcast_to(np.asarray(self.half_width, dtype=float), (n,))
        q = np.broadcast_to(np.asarray(self.q), (n,))
        if np.any(hw <= 0):
            raise ValueError("half_width must be positive")
        if np.any(q != np.round(q)) or np.any(q < 3) or np.any(q % 2 == 0):
            raise ValueError("q must be an odd integer >= 3")
        object.__setattr__(self, "tracked", tracked)
        object.__setattr__(self, "half_width", tuple(float(v) for v in hw))
        object.__setattr__(self, "q", tuple(int(v) for v in q))
        rest = tuple(i for i in range(N_DOF) if i not in set(tracked))
        object.__setattr__(self, "_rest", rest)
        axes = [np.linspace(-h, h, k) for h, k in zip(self.half_width, self.q)]
        grid = np.array(list(itertools.product(*axes)), dtype=float)
        grid.setflags(write=False)
        object.__setattr__(self, "_grid", grid)

    @property
    def n(self) -> int:
        return len(self.tracked)

    @property
    def rest(self) -> tuple[int, ...]:
        return self._rest

    @property
    def size(self) -> int:
        """Number of grid vectors per particle (``q**n`` for uniform q)."""
        return len(self._grid)

    @property
    def offsets(self) -> np.ndarray:
        """Grid offsets ``(size, n)`` in odometer order, last DOF fastest."""
        return self._grid


@dataclass(frozen=True)
class TrackerConfig:
    M: int
    interval: IntervalSpec
    rest_noise_sigma: float = 0.5
    rng_seed: int = 0

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be at least 1")
        if self.rest_noise_sigma < 0:
            raise ValueError("rest_noise_sigma must be non-negative")

    @property
    def N(self) -> int:
        return self.M * self.interval.size


@dataclass(frozen=True)
class Particle:
    """One configuration split into tracked (L) and remaining (R) angles."""

    tracked: np.ndarray
    rest: np.ndarray
    weight: float = 0.0

    @classmethod
    def from_pose(cls, pose, interval: IntervalSpec, weight: float = 0.0) -> "Particle":
        pose = np.asarray(pose, dtype=float)
        return cls(pose[list(interval.tracked)], pose[list(interval.rest)], weight)

    def pose(self, interval: IntervalSpec) -> np.ndarray:
        out = np.empty(N_DOF)
        out[list(interval.tracked)] = self.tracked
        out[list(interval.rest)] = self.rest
        return out


@dataclass
class FilterState:
    """Weighted particle set carried between frames, plus the body origin."""

    poses: np.ndarray
    weights: np.ndarray
    origin: RigidTransform = field(default_factory=RigidTransform)
    frame: int = 0


@dataclass(frozen=True)
class Measurement:
    weights: np.ndarray      # normalised, sums to 1
    raw: np.ndarray          # weights as returned by the likelihood
    estimate: int            # index of the heaviest particle
    lost: bool               # every raw weight was zero


@dataclass(frozen=True)
class StepReport:
    estimate: np.ndarray
    origin: RigidTransform
    max_weight: float        # raw likelihood of the estimate
    lost: bool
    n_measured: int


def frame_rng(seed: int, frame: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(frame), int(stream)])


def normalize(raw: np.ndarray) -> tuple[np.ndarray, bool]:
    """Weights divided by their sum; uniform (and flagged) when all are zero."""
    raw = np.asarray(raw, dtype=float)
    total = raw.sum()
    if not total > 0:
        return np.full(len(raw), 1.0 / len(raw)), True
    return raw / total, False


# -----------------------
# Interval particle filtering
# -----------------------

def ipf_select(poses: np.ndarray, weights: np.ndarray, M: int) -> np.ndarray:
    """Indices of the ``M`` heaviest pairwise-distinct particles.

    Ties in weight go to the lower index.

    Raises
    ------
    DegenerateParticleSet
        If the set holds fewer than ``M`` distinct poses.
    """
    poses = np.asarray(poses, dtype=float)
    order = np.argsort(-np.asarray(weights, dtype=float), kind="stable")
    chosen, seen = [], set()
    for i in order:
        key = poses[i].tobytes()
        if key in seen:
            continue
        seen.add(key)
        chosen.append(i)
        if len(chosen) == M:
            return np.array(chosen, dtype=np.intp)
    raise DegenerateParticleSet(f"only {len(chosen)} distinct particles, need {M}")


def count_distinct(poses: np.ndarray) -> int:
    return len(np.unique(np.asarray(poses, dtype=float), axis=0))


def ipf_predict(spec: SkeletonSpec, pose, interval: IntervalSpec, rest_noise_sigma: float,
                rng: np.random.Generator) -> np.ndarray:
    """Expand one particle into its interval grid, shape ``(interval.size, 31)``.

    Tracked DOFs take every grid combination around their current values;
    the remaining DOFs get independent zero-mean Gaussian noise per output.
    Outputs are clamped to the joint limits.
    """
    pose = np.asarray(pose, dtype=float)
    out = np.repeat(pose[None], interval.size, axis=0)
    out[:, list(interval.tracked)] += interval.offsets
    if rest_noise_sigma > 0 and interval.rest:
        noise = rng.standard_normal((interval.size, len(interval.rest)))
        out[:, list(interval.rest)] += rest_noise_sigma * noise
    return clamp_pose(spec, out)


def ipf_predict_set(spec: SkeletonSpec, poses: np.ndarray, interval: IntervalSpec,
                    rest_noise_sigma: float, rng: np.random.Generator) -> np.ndarray:
    """:func:`ipf_predict` for each survivor in turn, concatenated."""
    parts = [ipf_predict(spec, p, interval, rest_noise_sigma, rng) for p in poses]
    return np.concatenate(parts) if parts else np.zeros((0, N_DOF))


def measure(poses: np.ndarray, scorer: Scorer, origin: RigidTransform) -> Measurement:
    """Weigh every particle, normalise, and pick the heaviest."""
    if len(poses) == 0:
        raise ValueError("cannot measure an empty particle set")
    raw = scorer.poses(poses, origin)
    weights, lost = normalize(raw)
    return Measurement(weights, raw, int(np.argmax(weights)), lost)


ipf_measure = measure


def ipf_step(state: FilterState, scorer: Scorer, spec: SkeletonSpec, config: TrackerConfig,
             M: int | None = None) -> tuple[FilterState, StepReport]:
    """One time step: select ``M``, expand each into its grid, measure.

    ``state.origin`` must already hold the body origin for the new frame.
    ``M`` overrides ``config.M`` (the tracker uses this when the initial set
    is smaller than ``config.M``).
    """
    frame = state.frame + 1
    rng = frame_rng(config.rng_seed, frame)
    keep = ipf_select(state.poses, state.weights, config.M if M is None else M)
    predicted = ipf_predict_set(spec, state.poses[keep], config.interval,
                                config.rest_noise_sigma, rng)
    m = measure(predicted, scorer, state.origin)
    new_state = FilterState(predicted, m.weights, state.origin, frame)
    report = StepReport(predicted[m.estimate].copy(), state.origin, float(m.raw[m.estimate]),
                        m.lost, len(predicted))
    return new_state, report


# -----------------------
# Condensation
# -----------------------

def resample(weights: np.ndarray, n: int, rng: np.random.Generator) -> tuple[np.ndarray, bool]:
    """``n`` indices drawn with replacement, probability proportional to weight.

    Zero total weight falls back to uniform draws and is flagged.
    """
    w, flat = normalize(weights)
    cdf = np.cumsum(w)
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, rng.random(n), side="right")
    return np.minimum(idx, len(w) - 1), flat


def condensation_step(state: FilterState, scorer: Scorer, spec: SkeletonSpec,
                      noise_sigma, n_particles: int, seed: int = 0
                      ) -> tuple[FilterState, StepReport]:
    """Resample proportionally to weight, add Gaussian noise to all DOFs, measure.

    ``noise_sigma`` is a scalar or a per-DOF array (degrees).
    """
    if len(state.poses) == 0:
        raise ValueError("cannot resample an empty particle set")
    frame = state.frame + 1
    rng = frame_rng(seed, frame)
    idx, flat = resample(state.weights, n_particles, rng)
    sigma = np.broadcast_to(np.asarray(noise_sigma, dtype=float), (N_DOF,))
    poses = state.poses[idx]
    if np.any(sigma > 0):
        poses = poses + sigma * rng.standard_normal(poses.shape)
    poses = clamp_pose(spec, poses)
    m = measure(poses, scorer, state.origin)
    new_state = FilterState(poses, m.weights, state.origin, frame)
    report = StepReport(poses[m.estimate].copy(), state.origin, float(m.raw[m.estimate]),
                        m.lost or flat, len(poses))
    return new_state, report


def with_origin(state: FilterState, origin: RigidTransform) -> FilterState:
    return replace(state, origin=origin)
