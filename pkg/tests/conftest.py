import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gibbs_anneal.configuration import BoxRegion, Configuration
from gibbs_anneal.potential import shoulder_well

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# the shipped 2D potential: steep core, well of depth about 0.45 near r = 1.23
SHIPPED = dict(J=1e-8, alpha=12, a=1.0, R=1.5)


@pytest.fixture
def well():
    return shoulder_well(**SHIPPED)


def random_packing(box: BoxRegion, p, n: int, rng, tries: int = 20000, cap: float = 1.0) -> Configuration:
    """Random sequential addition of up to ``n`` points, each adding less than ``cap`` energy."""
    c = Configuration(box, p)
    lo, hi = np.asarray(box.lower), np.asarray(box.upper)
    for _ in range(tries):
        if len(c.points) >= n:
            break
        x = tuple((lo + (hi - lo) * rng.random(box.dimension)).tolist())
        d = c.delta_insert(x, 0.0)
        if d < cap:
            c.insert(x, d)
    return c


ACCEPTANCE_LINES: list = []


def report(criterion: int, ok: bool, detail: str) -> None:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
