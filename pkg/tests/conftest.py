import numpy as np
import pytest

from radvar.problem import load_problem


def spec(N=2, R=1.0, g=None, h=None, mu=None, H0=None, n=64, name="t"):
    out = {
        "name": name,
        "dimension": N,
        "radius": R,
        "g": g or {"kind": "power", "coef": 0.5, "exp": 2},
        "h": h or {"kind": "affine", "slope": 0.0},
        "grid": {"n": n, "grading": "uniform"},
    }
    if mu is not None:
        out["mu"] = mu
    if H0 is not None:
        out["H0"] = H0
    return out


def problem(**kw):
    return load_problem(spec(**kw))


def brute_conjugate(f, p, s_max=50.0, n=200001):
    """sup_s p s - f(|s|) over a dense symmetric grid."""
    s = np.linspace(-s_max, s_max, n)
    fs = f(s)
    return np.array([np.max(q * s - fs) for q in np.atleast_1d(p)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion."""

    def record(number, ok, detail):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
