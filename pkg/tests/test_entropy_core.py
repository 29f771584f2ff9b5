import math

import numpy as np
import pytest

from algentropy.entropy_core import (InfiniteFixedGroup, InternalInconsistency, count_consistency,
                                     entropy_at_level, entropy_bounds, entropy_converge,
                                     fixed_points_exact, logdet_dense, separated_lower_bound)
from algentropy.groups import CapacityError, FiniteQuotient, QuotientChain
from algentropy.inversion import INVERTIBLE, InvertibilityCertificate, certify_invertible

from conftest import H, Z, zpoly

LOG_GOLDEN = math.log((3 + math.sqrt(5)) / 2)


def test_logdet_examples(two_minus_x):
    assert logdet_dense(np.array([[2.0, -1.0], [-1.0, 2.0]])) == pytest.approx(math.log(3))
    assert logdet_dense(-3.0 * np.eye(5)) == pytest.approx(5 * math.log(3))
    from algentropy.quotient_transfer import fibre_integrate, operator_matrix
    q = FiniteQuotient(Z, 8)
    op = operator_matrix(fibre_integrate(two_minus_x, q))
    assert logdet_dense(op) == pytest.approx(math.log(255), abs=1e-12)
    assert logdet_dense(np.array([[1.0, 1.0], [1.0, 1.0]])) == -math.inf
    with pytest.raises(ValueError):
        logdet_dense(np.array([[np.nan]]))


def test_entropy_at_level_examples(two_minus_x, golden):
    assert entropy_at_level(two_minus_x, FiniteQuotient(Z, 2)) == pytest.approx(0.5 * math.log(3))
    for m in (2, 3):
        assert entropy_at_level(zpoly({(0, 0, 0): 2}, H), FiniteQuotient(H, m)) == \
            pytest.approx(math.log(2))
    assert entropy_at_level(golden, FiniteQuotient(Z, 3)) == pytest.approx(math.log(16) / 3)


def test_fixed_points_examples(two_minus_x, golden):
    assert fixed_points_exact(two_minus_x, FiniteQuotient(Z, 4)) == 15
    assert fixed_points_exact(golden, FiniteQuotient(Z, 3)) == 16
    for n in (1, 2, 5):
        with pytest.raises(InfiniteFixedGroup):
            fixed_points_exact(zpoly({0: 1, 1: -1}), FiniteQuotient(Z, n))
    with pytest.raises(TypeError):
        fixed_points_exact(zpoly({0: 2.5}), FiniteQuotient(Z, 2))


def test_count_consistency(heis_f):
    rep = count_consistency(heis_f, FiniteQuotient(H, 2))
    assert not rep["flagged"]
    assert rep["count"] == round(math.exp(rep["logdet"])) == 65025
    # too large for float integers: compared through logs
    rep = count_consistency(heis_f, FiniteQuotient(H, 3))
    assert not rep["flagged"]
    assert rep["count"] == 349044242982512896


def test_converge_two_minus_x(two_minus_x):
    chain = QuotientChain(Z, [2, 4, 8, 16, 32])
    rep = entropy_converge(two_minus_x, chain, cert=certify_invertible(two_minus_x))
    vals = rep.values("dense")
    closed = [math.log(2 ** n - 1) / n for n in (2, 4, 8, 16, 32)]
    assert vals == pytest.approx(closed, abs=1e-12)
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert abs(vals[-1] - math.log(2)) < 1e-9
    assert rep.diagnostics["monotone_increasing"]


def test_converge_scalar_stops():
    f = zpoly({0: 2})
    rep = entropy_converge(f, QuotientChain(Z, [2, 4, 8, 16]), cauchy_tol=1e-12,
                           cert=certify_invertible(f))
    assert rep.values("dense") == pytest.approx([math.log(2)] * 2)
    assert rep.diagnostics["cauchy_fired"]


def test_converge_golden(golden):
    chain = QuotientChain(Z, [16, 64, 256, 1024])
    rep = entropy_converge(golden, chain, cert=certify_invertible(golden), threads=2)
    assert abs(rep.estimate - LOG_GOLDEN) < 1e-3
    assert [r.order for r in rep.rows] == [16, 64, 256, 1024]


def test_converge_errors(two_minus_x):
    with pytest.raises(CapacityError) as err:
        entropy_converge(two_minus_x, QuotientChain(Z, [9000]))
    assert err.value.suggestion == "cheb"
    fake = InvertibilityCertificate(INVERTIBLE, residual=0.5)
    with pytest.raises(InternalInconsistency):
        entropy_converge(zpoly({0: 1, 1: -1}), QuotientChain(Z, [2, 4]), cert=fake)


def test_report_serialisation(two_minus_x):
    rep = entropy_converge(two_minus_x, QuotientChain(Z, [2, 4]))
    assert rep.advisory
    assert "wall_ms" not in rep.dumps()
    lines = rep.to_csv().splitlines()
    assert lines[0] == "level_order,method,value,error_bar,wall_ms"
    assert len(lines) == 3


def test_bounds_examples(two_minus_x, heis_f):
    b = entropy_bounds(two_minus_x, certify_invertible(two_minus_x))
    assert b.upper_sequence[0] == pytest.approx(math.log(3))
    assert b.lower_sequence[0] == pytest.approx(0.0, abs=1e-9)
    assert b.lower == pytest.approx(0.0, abs=1e-9)
    assert b.contains(math.log(2))
    s = entropy_bounds(zpoly({0: 2}), certify_invertible(zpoly({0: 2})))
    assert s.lower == pytest.approx(math.log(2)) and s.upper == pytest.approx(math.log(2))
    h = entropy_bounds(heis_f, certify_invertible(heis_f, max_radius=12), power_iters=1)
    assert 0 <= h.lower and h.upper <= math.log(9) + 1e-12


def test_levels_inside_bracket(golden):
    cert = certify_invertible(golden)
    b = entropy_bounds(golden, cert)
    for n in (4, 16, 64, 256):
        assert b.contains(entropy_at_level(golden, FiniteQuotient(Z, n)))


def test_per_level_multiplicativity_and_involution(two_minus_x, golden, heis_f):
    g = zpoly({0: 1, 1: 3, -2: -1})
    for n in (3, 5, 8):
        q = FiniteQuotient(Z, n)
        fg = entropy_at_level(two_minus_x * g, q)
        assert fg == pytest.approx(entropy_at_level(two_minus_x, q) + entropy_at_level(g, q),
                                   abs=1e-10)
        assert entropy_at_level(g.involute(), q) == pytest.approx(entropy_at_level(g, q),
                                                                  abs=1e-10)
        assert fixed_points_exact(two_minus_x * g, q) == \
            fixed_points_exact(two_minus_x, q) * fixed_points_exact(g, q)


def test_monotonicity_spot_check(two_minus_x):
    g = two_minus_x * two_minus_x.involute()
    g2 = g + zpoly({0: 1})
    for n in (2, 4, 8, 16):
        q = FiniteQuotient(Z, n)
        assert entropy_at_level(g, q) <= entropy_at_level(g2, q) + 1e-10


def test_separated_lower_bound_examples(two_minus_x, golden):
    fam = separated_lower_bound(two_minus_x, FiniteQuotient(Z, 4))
    assert fam.bound == pytest.approx(math.log(2) / 4)
    assert fam.family_size == 2 ** 8
    assert fam.gap == pytest.approx(0.5)
    fam = separated_lower_bound(golden, FiniteQuotient(Z, 3))
    assert fam.bound == pytest.approx(math.log(2) / 3)
    with pytest.raises(ValueError):
        separated_lower_bound(zpoly({0: 1}), FiniteQuotient(Z, 4))
