import numpy as np
import pytest

from aspm.shaping import default_psf

ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def psf():
    return default_psf()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def report(request, capsys):
    """Print one status line now and repeat it in the terminal summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE_LINES, [])

    def emit(line: str):
        lines.append(line)
        with capsys.disabled():
            print("\n" + line)

    return emit


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            if line.startswith("criterion"):
                terminalreporter.write_line(line)
