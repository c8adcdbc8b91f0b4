import numpy as np
import pytest

from tyclab import (
    BoundaryCondition,
    DimensionlessParams,
    IntegratorConfig,
    ModelKind,
    ModelSpec,
    SpatialGrid,
    integrate,
    integrate_pde,
)

_ACCEPTANCE_RESULTS: dict[str, str] = {}


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Force kernel compilation once so acceptance timings measure the
    numerics, not the JIT."""
    spec = ModelSpec(ModelKind.CLASSIC3, DimensionlessParams(r=1.0))
    cfg = IntegratorConfig(t_end=0.01, sample_dt=0.01)
    integrate(spec, (0.1, 0.1, 0.1), cfg)
    grid = SpatialGrid(3, BoundaryCondition.NEUMANN)
    pde_spec = ModelSpec(ModelKind.CLASSIC3, DimensionlessParams(r=1.0, diffusion=0.1),
                         spatial=True)
    integrate_pde(pde_spec, np.full((3, 3), 0.1), grid, cfg)


@pytest.fixture(scope="session")
def classic3():
    return ModelSpec(ModelKind.CLASSIC3, DimensionlessParams(r=17.8125, gamma=0.0))


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    _ACCEPTANCE_RESULTS[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"{name}: {_ACCEPTANCE_RESULTS[name]}")
