"""Run configuration, loaded from one YAML file shared by every subcommand.

Example::

    skeleton: null                # path to a body file; null = built-in body
    cameras:
      - {focal: 400, resolution: [320, 240], eye: [2.5, 2.5, 0.5], target: [0, 0, -0.1]}
    tracker:
      algorithm: ipf              # or: condensation
      M: 81
      tracked: [l_hip_x, r_hip_x, l_knee_x, r_knee_x]
      half_width: 5.0
      q: 3
      rest_noise_sigma: 0.5
      seed: 0
    origin_search: {position_range: 0.3, position_step: 0.05,
                    angle_range: 15, angle_step: 5, passes: 1}
    init:
      dofs: [l_hip_x, r_hip_x, l_knee_x, r_knee_x]
      step: 15
      budget: 200000
      origin: [0, 0, 0, 0, 0, 0]
      origin_grid: {x: [0.1, 0.05]}   # coordinate: [range, step]
    segmentation: {threshold: 30, cleanup: false}
    synthetic:
      duration: 5.0
      fps: 20
      motions:
        - {dof: l_hip_x, amplitude: 20, period: 2.0, phase: 0, offset: 0}
      origin_waypoints:
        - {t: 0.0, position: [0, 0, 0], orientation: [0, 0, 0]}
"""

from __future__ import annotations

import copy
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .camera import CameraModel
from .filter import IntervalSpec, TrackerConfig
from .origin import DIMENSIONS, OriginSearch
from .skeleton import RigidTransform, SkeletonSpec, load_spec

SEED_ENV = "IPFTRACK_SEED"

DEFAULTS: dict[str, Any] = {
    "skeleton": None,
    "cameras": [{"focal": 400.0, "resolution": [320, 240],
                 "eye": [2.5, 2.5, 0.5], "target": [0.0, 0.0, -0.1]}],
    "tracker": {
        "algorithm": "ipf",
        "M": 81,
        "tracked": ["l_hip_x", "r_hip_x", "l_knee_x", "r_knee_x"],
        "half_width": 5.0,
        "q": 3,
        "rest_noise_sigma": 0.5,
        "condensation_sigma": None,
        "seed": 0,
    },
    "origin_search": {"position_range": 0.3, "position_step": 0.05,
                      "angle_range": 15.0, "angle_step": 5.0, "passes": 1},
    "init": {"dofs": None, "step": 15.0, "budget": 200_000,
             "origin": [0, 0, 0, 0, 0, 0], "origin_grid": {}},
    "segmentation": {"threshold": 30.0, "cleanup": False},
    "synthetic": {"duration": 5.0, "fps": 20.0, "motions": [], "origin_waypoints": []},
}


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in (override or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


@dataclass
class RunConfig:
    spec: SkeletonSpec
    cameras: list[CameraModel]
    tracker: TrackerConfig
    algorithm: str
    condensation_sigma: np.ndarray
    origin_search: OriginSearch
    init_dofs: list[int]
    init_step: float
    init_budget: int
    init_origin: RigidTransform
    init_origin_grid: dict[int, tuple[float, float]]
    threshold: float
    cleanup: bool
    synthetic: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def with_seed(self, seed: int) -> "RunConfig":
        tracker = TrackerConfig(self.tracker.M, self.tracker.interval,
                                self.tracker.rest_noise_sigma, int(seed))
        out = copy.copy(self)
        out.tracker = tracker
        return out

    def init_origins(self) -> list[RigidTransform]:
        """Cartesian grid of origins around ``init_origin`` (x fastest last)."""
        base = self.init_origin.as_vector()
        axes = []
        for d in range(6):
            if d in self.init_origin_grid:
                rng, step = self.init_origin_grid[d]
                k = int(np.floor(rng / step + 1e-9))
                axes.append(base[d] + np.arange(-k, k + 1) * step)
            else:
                axes.append(np.array([base[d]]))
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 6)
        return [RigidTransform.from_vector(v) for v in mesh]


def camera_from_dict(d: dict) -> CameraModel:
    res = tuple(d.get("resolution", (320, 240)))
    if "eye" in d:
        return CameraModel.look_at(d["eye"], d.get("target", (0, 0, 0)), float(d["focal"]),
                                   res, d.get("principal"), d.get("up", (0, 0, 1)))
    ext = RigidTransform(d.get("position", (0, 0, 0)), d.get("orientation", (0, 0, 0)))
    principal = d.get("principal", (res[0] / 2, res[1] / 2))
    return CameraModel(float(d["focal"]), tuple(principal), ext, res)


def _dof(spec: SkeletonSpec, ref) -> int:
    return spec.dof_index(ref) if isinstance(ref, str) else int(ref)


def config_from_dict(data: dict | None, base_dir: Path | None = None) -> RunConfig:
    raw = _merge(DEFAULTS, data or {})
    skel = raw["skeleton"]
    if skel is not None and base_dir is not None and not Path(skel).is_absolute():
        skel = base_dir / skel
    spec = load_spec(skel)
    t = raw["tracker"]
    tracked = [_dof(spec, r) for r in t["tracked"]]
    interval = IntervalSpec(tuple(tracked), t["half_width"], t["q"])
    seed = int(os.environ.get(SEED_ENV, t["seed"]))
    tracker = TrackerConfig(int(t["M"]), interval, float(t["rest_noise_sigma"]), seed)
    csig = t.get("condensation_sigma")
    if csig is None:
        # matched spread: tracked DOFs get the std of the interval grid offsets
        csig = np.full(31, float(t["rest_noise_sigma"]))
        csig[tracked] = interval.offsets.std(axis=0)
    csig = np.broadcast_to(np.asarray(csig, dtype=float), (31,)).copy()
    i = raw["init"]
    init_dofs = [_dof(spec, r) for r in (i["dofs"] if i["dofs"] is not None else t["tracked"])]
    grid = {DIMENSIONS.index(k): (float(v[0]), float(v[1]))
            for k, v in (i.get("origin_grid") or {}).items()}
    seg = raw["segmentation"]
    return RunConfig(
        spec=spec,
        cameras=[camera_from_dict(c) for c in raw["cameras"]],
        tracker=tracker,
        algorithm=str(t["algorithm"]),
        condensation_sigma=csig,
        origin_search=OriginSearch(**raw["origin_search"]),
        init_dofs=init_dofs,
        init_step=float(i["step"]),
        init_budget=int(i["budget"]),
        init_origin=RigidTransform.from_vector(i["origin"]),
        init_origin_grid=grid,
        threshold=float(seg["threshold"]),
        cleanup=bool(seg["cleanup"]),
        synthetic=raw["synthetic"],
        raw=raw,
    )


def load_config(path: str | Path | None = None) -> RunConfig:
    if path is None:
        return config_from_dict({})
    path = Path(path)
    with open(path) as fh:
        return config_from_dict(yaml.safe_load(fh) or {}, path.parent)
