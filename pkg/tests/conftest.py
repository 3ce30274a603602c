import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_complex(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_hermitian(rng, n=9):
    m = random_complex(rng, (n, n))
    return m + m.conj().T


def random_pure(rng, n=9):
    v = random_complex(rng, n)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------- acceptance summary

_ACCEPTANCE = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py::test_criterion_" in report.nodeid:
        name = report.nodeid.split("::test_criterion_")[1]
        detail = dict(report.user_properties).get("detail", "")
        _ACCEPTANCE.append((name, report.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, detail in sorted(_ACCEPTANCE, key=lambda r: int(r[0].split("_")[0])):
        number, _, label = name.partition("_")
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {number} [{verdict}] {label}: {detail}")
