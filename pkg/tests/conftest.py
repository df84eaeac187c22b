import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from stackthermal.materials import Material
from stackthermal.stack import VoxelModel

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


def small_model(shape=(3, 4, 5), k=(10.0, 10.0, 10.0), q=1e8, h_top=250.0, h_bottom=10.0, seed=None):
    """Layered random-ish box, 1 mm per side, for structural checks."""
    nz, ny, nx = shape
    rng = np.random.default_rng(seed)
    mat = Material("box", *k, density=2000.0, cp=800.0)
    x = np.linspace(0, 1e-3, nx + 1)
    y = np.linspace(0, 1e-3, ny + 1)
    z = np.linspace(0, 1e-3, nz + 1)
    power = q if seed is None else q * rng.random(shape)
    return VoxelModel.homogeneous(x, y, z, mat, power, h_top=h_top, h_bottom=h_bottom, t_ambient=300.0)


@pytest.fixture
def box():
    return small_model()
