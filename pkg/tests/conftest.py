import threading

import pytest
from hypothesis import settings

from softtiler import eeb
from softtiler.realization import build_cell_mesh

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

MESH_RESOLUTION = 64


class MeshCache:
    """Builds each named cell mesh once per session, on first request."""

    def __init__(self, resolution):
        self.resolution = resolution
        self._meshes = {}
        self._lock = threading.Lock()

    def __call__(self, name):
        with self._lock:
            if name not in self._meshes:
                sol = eeb.named_solution(name)
                self._meshes[name] = build_cell_mesh(sol, resolution=self.resolution)
            return self._meshes[name]


@pytest.fixture(scope="session")
def meshes():
    return MeshCache(MESH_RESOLUTION)


@pytest.fixture(scope="session")
def small_meshes():
    return MeshCache(16)


@pytest.fixture(scope="session")
def octahedral_soft():
    return eeb.run_catalogue("octahedral", require_soft=True)


@pytest.fixture(scope="session")
def tetrahedral_planar_soft():
    return eeb.run_catalogue("tetrahedral", require_planar_face=True, require_soft=True)


# --- acceptance report ----------------------------------------------------------

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number, title, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title}"
        if detail:
            line += f"  [{detail}]"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
