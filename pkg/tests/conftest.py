import pytest

from partweights.body import BodyModel
from partweights.synth import SubjectParams, procedural_action, project, random_rig


@pytest.fixture(scope="session")
def model():
    return BodyModel()


@pytest.fixture(scope="session")
def rig_affine():
    return random_rig(4, seed=11, kind="affine")


@pytest.fixture(scope="session")
def rig_persp():
    return random_rig(4, seed=11, kind="perspective")


@pytest.fixture(scope="session")
def motions():
    """Short world-space sequences: two subjects x (walk, run, jump)."""
    out = {}
    for s in range(2):
        params = SubjectParams.random(100 + s)
        for kind in ("walk", "run", "jump"):
            out[(kind, s)] = procedural_action(kind, params, frames=14, seed=5 + s, subject=f"s{s}")
    return out


@pytest.fixture(scope="session")
def views(motions, rig_persp):
    """Perspective projections keyed by (kind, subject, camera index)."""
    return {(k, s, c): project(seq, cam) for (k, s), seq in motions.items() for c, cam in enumerate(rig_persp)}


def random_pose(rng, n=11, extent=1.8):
    return rng.uniform(-extent / 2, extent / 2, size=(n, 3))


def random_affine_camera(rng):
    """Generic 2x4 affine camera (rows of a random matrix)."""
    P = rng.normal(size=(2, 3)) * 300.0
    t = rng.normal(size=2) * 100.0
    return P, t


def affine_project(P, t, X):
    return X @ P.T + t


ACCEPTANCE = []


def record(criterion, ok, detail):
    """One pass/fail line per acceptance criterion, echoed in the summary."""
    ACCEPTANCE.append(f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
