import numpy as np
import pytest

from ipftrack.camera import CameraModel, rasterize
from ipftrack.skeleton import N_DOF, RigidTransform, default_spec, flesh, forward_kinematics

SPEC = default_spec()
SMALL_CAM = CameraModel.look_at([2.5, 2.5, 0.5], [0, 0, -0.1], 130, resolution=(96, 72))


def render(pose, cam=SMALL_CAM, origin=RigidTransform()):
    return rasterize(cam, flesh(SPEC, forward_kinematics(SPEC, pose, origin)))


def pose_with(**angles):
    p = np.zeros(N_DOF)
    for name, v in angles.items():
        p[SPEC.dof_index(name)] = v
    return p


@pytest.fixture
def spec():
    return SPEC


# (criterion, passed, detail) lines collected by the acceptance suite
ACCEPTANCE: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
