import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_hermitian(rng, m, pd=True):
    b = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    if pd:
        return b @ b.conj().T + 0.1 * np.eye(m)
    return b + b.conj().T


ACCEPTANCE_LINES = {}


def record_criterion(number, part, ok, detail):
    """Store one acceptance outcome; the summary prints one line per criterion."""
    ACCEPTANCE_LINES.setdefault(number, []).append((part, bool(ok), detail))
    print(f"criterion {number} {part}: {'PASS' if ok else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        parts = ACCEPTANCE_LINES[number]
        status = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        detail = "; ".join(f"{p}: {'ok' if ok else 'failed'} ({d})" for p, ok, d in parts)
        terminalreporter.write_line(f"criterion {number}: {status}  {detail}")
