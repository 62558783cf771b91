import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def quad_bee(noise, m):
    """Independent route to B(m): integrate Phi(y) f(y - m) numerically."""
    from scipy import integrate

    s = noise.scale
    lo, hi = min(0.0, m) - 60 * s, max(0.0, m) + 60 * s
    val, _ = integrate.quad(lambda y: float(noise.cdf(y)) * float(noise.pdf(y - m)), lo, hi,
                            points=sorted({0.0, float(m)}), limit=400, epsabs=1e-13, epsrel=1e-12)
    return val


_CRITERIA = []


@pytest.fixture
def criterion():
    """Record a one-line pass/fail verdict, echoed in the terminal summary."""

    def record(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        _CRITERIA.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_CRITERIA, key=lambda t: t[0]):
        terminalreporter.write_line(line)
