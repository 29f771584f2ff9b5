import pytest

from algentropy.group_ring import RingElement
from algentropy.groups import FreeAbelian, Heisenberg3

Z = FreeAbelian(1)
Z2 = FreeAbelian(2)
H = Heisenberg3()


def zpoly(coeffs, group=Z):
    """``{exponent: c}`` on Z (or tuples on Z^d) as a ring element."""
    return RingElement(group, {(k,) if isinstance(k, int) else k: c for k, c in coeffs.items()})


def laplace_h(center=5):
    return RingElement.from_words(H, [([], center), ([("a", 1)], -1), ([("a", -1)], -1),
                                      ([("b", 1)], -1), ([("b", -1)], -1)])


@pytest.fixture
def two_minus_x():
    return zpoly({0: 2, 1: -1})


@pytest.fixture
def golden():
    return zpoly({0: 3, 1: -1, -1: -1})


@pytest.fixture
def heis_f():
    return laplace_h()


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line[1])
