"""End-to-end tracking: initialise on frame 0, then origin search + filter step per frame."""

from __future__ import annotations

import logging
import time
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .config import RunConfig
from .filter import FilterState, condensation_step, count_distinct, ipf_step, normalize
from .imageio import list_frames, read_gray, read_mask
from .initialization import initialize, limit_grid, pose_grid
from .likelihood import Scorer
from .origin import estimate_origin
from .report import FrameRecord, TrackReport
from .segmentation import background_subtract
from .skeleton import forward_kinematics_batch

log = logging.getLogger(__name__)

ALGORITHMS = ("ipf", "condensation")


def load_silhouettes(frames_dir, n_cameras: int) -> list[list[np.ndarray]]:
    """Silhouettes ``[frame][camera]`` from ``frames_dir/cam<k>/``.

    A directory without ``cam*`` subfolders is read as a single camera.
    """
    root = Path(frames_dir)
    dirs = [root / f"cam{c}" for c in range(n_cameras)]
    if not dirs[0].is_dir():
        if n_cameras != 1:
            raise FileNotFoundError(f"{root}: expected cam0..cam{n_cameras - 1} subdirectories")
        dirs = [root]
    per_cam = [list_frames(d) for d in dirs]
    counts = {len(p) for p in per_cam}
    if len(counts) != 1:
        raise ValueError(f"{root}: cameras have different frame counts {sorted(counts)}")
    return [[read_mask(p) for p in frame] for frame in zip(*per_cam)]


def load_raw_frames(frames_dir, background, threshold: float,
                    cleanup: bool = False) -> list[list[np.ndarray]]:
    """Single-camera silhouettes from raw frames and a background image."""
    bg = read_gray(background)
    return [[background_subtract(read_gray(p), bg, threshold, cleanup)]
            for p in list_frames(frames_dir)]


def _record(cfg: RunConfig, frame: int, pose, origin, weight: float, lost: bool) -> FrameRecord:
    joints = forward_kinematics_batch(cfg.spec, np.asarray(pose)[None], origin)[0]
    return FrameRecord(frame, origin, np.array(pose, dtype=float), joints, weight, lost)


def run_tracker(cfg: RunConfig, observations: Iterable[Sequence[np.ndarray]],
                algorithm: str | None = None) -> TrackReport:
    """Track a sequence of per-camera silhouettes.

    Raises
    ------
    InitializationError
        When the first frame cannot be initialised.
    """
    algorithm = algorithm or cfg.algorithm
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    spec, tcfg = cfg.spec, cfg.tracker
    report = TrackReport()
    state = None
    estimate = None
    for k, sils in enumerate(observations):
        t0 = time.perf_counter()
        scorer = Scorer(spec, cfg.cameras, sils)
        if state is None:
            grid = pose_grid(spec, limit_grid(spec, cfg.init_dofs, cfg.init_step))
            init = initialize(spec, grid, cfg.init_origins(), scorer, cfg.init_budget)
            weights, _ = normalize(init.raw_weights)
            state = FilterState(init.poses, weights, init.origin, k)
            estimate = init.pose
            report.records.append(_record(cfg, k, init.pose, init.origin, init.weight, False))
        else:
            found = estimate_origin(estimate, state.origin, scorer, cfg.origin_search)
            state.origin = found.origin
            state.frame = k - 1
            if algorithm == "ipf":
                m = min(tcfg.M, count_distinct(state.poses)) if k == 1 else None
                new_state, step = ipf_step(state, scorer, spec, tcfg, M=m)
            else:
                new_state, step = condensation_step(state, scorer, spec, cfg.condensation_sigma,
                                                    tcfg.N, tcfg.rng_seed)
            lost = step.lost or found.lost
            if step.lost:
                # no evidence: keep the previous particle set and estimate
                state.frame = k
                rec = _record(cfg, k, estimate, state.origin, 0.0, True)
            else:
                state = new_state
                estimate = step.estimate
                rec = _record(cfg, k, estimate, state.origin, step.max_weight, lost)
            report.records.append(rec)
        log.info("frame %d: %.2f s, weight %.4f%s", k, time.perf_counter() - t0,
                 report.records[-1].max_weight, " (lost)" if report.records[-1].lost else "")
    return report
