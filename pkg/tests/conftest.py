import pytest
from hypothesis import settings

settings.register_profile("ci", max_examples=40, deadline=None)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def harmonic_spectrum():
    from weyl_tbc import Harmonic, SpectralProblem, Transparent, find_spectrum

    rule = Transparent(method="parabolic_cylinder")
    return find_spectrum(SpectralProblem(Harmonic(), -1.0, 2.0, rule, rule), 0.0, 6.0, 600)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
