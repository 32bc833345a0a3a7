import numpy as np
import pytest
import scipy.linalg


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def dense_evolution(adj: np.ndarray, t: float) -> np.ndarray:
    """Independent oracle: exp(-i t A) by dense Pade approximation."""
    return scipy.linalg.expm(-1j * t * adj.astype(float))


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one acceptance line; printed together at the end of the run."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number: int, ok: bool, detail: str, elapsed: float, limit: float) -> bool:
        in_time = elapsed < limit
        status = "PASS" if ok and in_time else "FAIL"
        line = f"criterion {number:>2}: {status}  {detail}  [{elapsed:.3f} s, limit {limit:g} s]"
        lines.append((number, line))
        print(line)
        return ok and in_time

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
