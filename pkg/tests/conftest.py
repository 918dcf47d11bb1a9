import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "fixed",
    derandomize=True,
    deadline=None,
    max_examples=30,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("fixed")

CRITERIA: dict[int, str] = {}


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Max entry difference after aligning a global phase."""
    i = np.unravel_index(np.argmax(np.abs(a)), a.shape)
    ph = b[i] / a[i]
    ph /= abs(ph)
    return float(np.max(np.abs(a * ph - b)))


@pytest.fixture
def report(capsys):
    def _report(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        CRITERIA[number] = line
        with capsys.disabled():
            print("\n" + line)
    return _report


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[k])
