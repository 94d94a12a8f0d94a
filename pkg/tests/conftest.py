import pytest

from kahlerquant.geometry import builtin_geometry, kahler_from_potential, potential_from_table
from kahlerquant.scalar import Scalar
from kahlerquant.weyl import WeylForm

CAP = 8


def generic_potential(order):
    """Non-symmetric potential; its curvature is not parallel, so the higher
    Kapranov tensors do not vanish."""
    return potential_from_table(1, order, [
        ((1,), (1,), 1), ((2,), (2,), Scalar(-1, 0) / 2), ((2,), (3,), Scalar(1, 1)),
        ((3,), (2,), Scalar(1, -1)), ((3,), (3,), 3)])


@pytest.fixture(scope="session")
def geos():
    order = CAP + 8
    return {
        "flat": kahler_from_potential(builtin_geometry("flat", 1, order)),
        "fs": kahler_from_potential(builtin_geometry("fs", 1, order)),
        "hyp": kahler_from_potential(builtin_geometry("hyp", 1, order)),
        "gen": kahler_from_potential(generic_potential(order)),
    }


@pytest.fixture(scope="session")
def v():
    """Generators of the n = 1 algebra."""
    n = 1
    return {name: WeylForm.var(n, name) for name in ("y", "yb", "z", "zb", "dz", "dzb", "hbar")}


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
