from __future__ import annotations

from fractions import Fraction

import pytest

from epikit.cli import resolve_model

# Bifurcation-figure parameterization of the superinfection model:
# recruitment 1, natural death 1/4, gamma + delta = 1, xi = 4.
MOGHADAS_FIX = {"lam": "1", "b": "1/4", "gt": "1", "betaxi": "4*beta"}

EPIDEMIC_CORPUS = ["hethcote", "hethcote_closed", "seir", "sair", "slair", "moghadas", "jin",
                   "sirvs7", "sirvs5", "sirfs", "sir_ph", "sair_ph", "slair_ph"]


def bundled(name: str):
    return resolve_model(name)


def fraction_det(rows) -> Fraction:
    """Determinant by Gaussian elimination over Q (test oracle)."""
    M = [[Fraction(v) for v in r] for r in rows]
    n, det = len(M), Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return det


@pytest.fixture(scope="session")
def moghadas():
    return bundled("moghadas")


@pytest.fixture(scope="session")
def moghadas_beta(moghadas):
    return moghadas.substitute_params(MOGHADAS_FIX)


@pytest.fixture(scope="session")
def moghadas_scan(moghadas_beta):
    from epikit.bifurcation import branch_scan

    return branch_scan(moghadas_beta, "beta", 0.15, 0.40, {}, n=101)


# acceptance reporting ---------------------------------------------------------------------------

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    n, title = mark.args
    if rep.failed or (rep.when == "call" and rep.passed) or rep.skipped:
        prev = _ACCEPTANCE.get(n, (title, "PASS"))[1]
        status = "FAIL" if rep.failed or rep.skipped or prev == "FAIL" else "PASS"
        _ACCEPTANCE[n] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[n]
        terminalreporter.write_line(f"{status} [{n:2d}] {title}")
