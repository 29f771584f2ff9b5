import math

import numpy as np
import pytest

from algentropy.entropy_core import entropy_at_level
from algentropy.groups import FiniteQuotient, FreeAbelian
from algentropy.inversion import certify_invertible
from algentropy.mahler import (GRID_VANISHING, NONVANISHING, UNKNOWN, TorusPolynomial,
                               fourier_eval, grid_values, mahler_quadrature,
                               wiener_invertibility)

from conftest import Z2, zpoly

LAPLACE2 = {(0, 0): 5, (1, 0): -1, (-1, 0): -1, (0, 1): -1, (0, -1): -1}


def tp(f):
    return TorusPolynomial.from_ring(f)


def test_fourier_eval_examples(two_minus_x, golden):
    assert fourier_eval(tp(two_minus_x), [0.0]) == pytest.approx(1)
    assert fourier_eval(tp(golden), [0.5]) == pytest.approx(5)
    assert fourier_eval(TorusPolynomial.from_terms(2, LAPLACE2), [0, 0]) == pytest.approx(1)
    with pytest.raises(ValueError):
        fourier_eval(tp(golden), [0.1, 0.2])


def test_grid_values_match_direct_sum():
    p = TorusPolynomial.from_terms(2, {(2, -1): 1.5, (0, 3): -2.0, (0, 0): 0.25})
    vals = grid_values(p, 8)
    for k in [(0, 0), (3, 5), (7, 1)]:
        assert vals[k] == pytest.approx(fourier_eval(p, np.array(k) / 8))


def test_wiener_examples(golden):
    w = wiener_invertibility(tp(golden), 256)
    assert w.grid_min == pytest.approx(1) and w.argmin == (0.0,)
    assert w.verdict == NONVANISHING
    assert wiener_invertibility(tp(zpoly({0: 1, 1: -1})), 256).verdict == GRID_VANISHING
    w2 = wiener_invertibility(TorusPolynomial.from_terms(2, LAPLACE2), 256)
    assert w2.grid_min == pytest.approx(1) and w2.argmin == (0.0, 0.0)
    assert w2.verdict == NONVANISHING
    with pytest.raises(ValueError):
        wiener_invertibility(tp(zpoly({0: 3, 40: 1})), 64)


def test_wiener_unknown_when_grid_too_coarse():
    # 2 - x - x^-1 + small: min 0.01 at theta = 0 but the Lipschitz margin is larger
    f = TorusPolynomial.from_terms(1, {(0,): 2.01, (1,): -1.0, (-1,): -1.0})
    assert wiener_invertibility(f, 16).verdict == UNKNOWN


def test_mahler_examples(two_minus_x, golden):
    assert mahler_quadrature(tp(two_minus_x), 64).value == pytest.approx(math.log(2), abs=1e-10)
    m = mahler_quadrature(tp(golden), 256)
    assert abs(m.value - math.log((3 + math.sqrt(5)) / 2)) < 1e-10
    assert mahler_quadrature(tp(zpoly({0: 1})), 16).value == 0
    with pytest.raises(ValueError):
        mahler_quadrature(tp(zpoly({0: 1, 1: -1})), 64)


def test_grid_doubling_estimate_shrinks(golden):
    est = [mahler_quadrature(tp(golden), n).error_estimate for n in (4, 8, 16)]
    assert est[0] > est[1] > est[2]
    m8, m16 = mahler_quadrature(tp(golden), 8), mahler_quadrature(tp(golden), 16)
    assert abs(m8.value - m16.value) <= m8.error_estimate + 1e-15


def test_quadrature_equals_quotient_logdet():
    f = zpoly(LAPLACE2, Z2)
    for n in (5, 12):
        dense = entropy_at_level(f, FiniteQuotient(Z2, n))
        assert mahler_quadrature(tp(f), n).value == pytest.approx(dense, abs=1e-12)


CATALOG = [
    (1, {0: 2, 1: -1}),
    (1, {0: 1, 1: -1}),
    (1, {0: 3, 1: -1, -1: -1}),
    (1, {0: 1, 1: -3, 2: 1}),
    (1, {0: 2, 1: -1, -1: -1}),
    (1, {0: 1, 1: 1, 2: 1}),
    (2, LAPLACE2),
    (2, {(0, 0): 4, (1, 0): -1, (-1, 0): -1, (0, 1): -1, (0, -1): -1}),
    (2, {(0, 0): 3, (1, 0): 1, (0, 1): 1}),
]


@pytest.mark.parametrize("d,terms", CATALOG)
def test_wiener_matches_certificate(d, terms):
    f = zpoly(terms, FreeAbelian(d))
    w = wiener_invertibility(tp(f), 256)
    cert = certify_invertible(f, max_radius=24)
    assert (w.verdict == NONVANISHING) == cert.certified
