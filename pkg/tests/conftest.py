import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from horoshift import fixtures
from horoshift.cayley_ball import build_ball
from horoshift.rays_fields import busemann


@pytest.fixture(scope="session")
def z2():
    return fixtures.group("z2")


@pytest.fixture(scope="session")
def f2():
    return fixtures.group("f2")


@pytest.fixture(scope="session")
def zz():
    """The free product Z^2 * Z = <a, b, c | [a, b]>."""
    return fixtures.group("z2_star_z")


@pytest.fixture(scope="session")
def f2_ball6(f2):
    return build_ball(f2, radius=6)


@pytest.fixture(scope="session")
def z2_ball8(z2):
    return build_ball(z2, radius=8)


@pytest.fixture(scope="session")
def f2_busemann6(f2, f2_ball6):
    return busemann(f2_ball6, fixtures.ray("f2_a", f2))


@pytest.fixture(scope="session")
def z2_axis8(z2, z2_ball8):
    return busemann(z2_ball8, fixtures.ray("z2_x_axis", z2))


def xy(elem):
    """Coordinates of a Z^2 element."""
    return dict(elem).get(0, (0, 0))


def free_text(elem):
    """F2 element as a string over a, b (uppercase = inverse)."""
    if not elem:
        return ""
    letters = {1: "a", -1: "A", 2: "b", -2: "B"}
    return "".join(letters[x] for x in elem[0][1])


def random_lipschitz_field(ball, rng, k=3):
    """min_i (d(v, p_i) + c_i): a random 1-Lipschitz integer field on the ball."""
    import numpy as np
    from horoshift.rays_fields import ScalarField

    n = len(ball)
    vals = None
    for _ in range(k):
        p = rng.randrange(n)
        row = ball.dist_row(p).astype(np.int64) + rng.randrange(-3, 4)
        vals = row if vals is None else np.minimum(vals, row)
    return ScalarField(ball, vals)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
