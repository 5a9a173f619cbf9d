import numpy as np
import pytest

from dispersive_qkd import DetectorParams, FiberLink, SourceParams

_criteria: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for mark_label in report.user_properties:
        if mark_label[0] == "criterion":
            _criteria[report.nodeid] = (mark_label[1], report.outcome)


@pytest.fixture(autouse=True)
def _record_criterion(request, record_property):
    mark = request.node.get_closest_marker("criterion")
    if mark is not None:
        record_property("criterion", mark.args[0])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome in sorted(_criteria.values(), key=lambda x: int(x[0].split()[0].lstrip("C"))):
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {label}")


@pytest.fixture
def source():
    return SourceParams(rho=0.9)


@pytest.fixture
def detector():
    return DetectorParams()


def random_parameter_set(rng: np.random.Generator, max_x: float = 1e4, allow_zero: bool = True):
    """Random source and links with |x_Y| log-uniform up to ``max_x``."""
    sa, sb = rng.uniform(0.5e12, 3e12, 2)
    rho = rng.uniform(-0.95, 0.95)
    xs = 10 ** rng.uniform(-3, np.log10(max_x), 2) * rng.choice([-1.0, 1.0], 2)
    if allow_zero:
        xs = np.where(rng.random(2) < 0.1, 0.0, xs)
    lengths = rng.uniform(1.0, 300.0, 2)
    link_a = FiberLink(length=lengths[0], beta=xs[0] / (2 * sa**2 * lengths[0]))
    link_b = FiberLink(length=lengths[1], beta=xs[1] / (2 * sb**2 * lengths[1]))
    return SourceParams(sa, sb, rho), link_a, link_b
