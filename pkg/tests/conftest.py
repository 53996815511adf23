import random
from itertools import combinations

import pytest
from hypothesis import HealthCheck, settings

from pentaweights.symplectic import SpaceSpec

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def faces(n: int) -> list[tuple[int, ...]]:
    """The first n tetrahedra on vertices 1..7, in lexicographic order."""
    return list(combinations(range(1, 8), 4))[:n]


@pytest.fixture
def rng():
    return random.Random(20240501)


@pytest.fixture
def spec4():
    return SpaceSpec.of_faces(faces(4))


# acceptance results, printed after the run: (number, title, passed, seconds, note)
ACCEPTANCE: list[tuple] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, seconds, note in sorted(ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:>2}. {title} ({seconds:.2f} s){' - ' + note if note else ''}")
