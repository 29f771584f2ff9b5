import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algentropy.group_ring import RATIONAL, RingElement
from algentropy.groups import CapacityError, FiniteQuotient
from algentropy.quotient_transfer import apply_operator, fibre_integrate, operator_matrix

from conftest import H, Z, laplace_h, zpoly

small = st.integers(-4, 4)


def heis_elements():
    return st.dictionaries(st.tuples(small, small, small),
                           st.fractions(min_value=-3, max_value=3, max_denominator=5),
                           max_size=5).map(lambda d: RingElement(H, d, RATIONAL))


def test_fibre_integrate_examples(golden, two_minus_x):
    q2 = FiniteQuotient(Z, 2)
    assert fibre_integrate(golden, q2).coeffs == {(0,): 3, (1,): -2}
    q4 = FiniteQuotient(Z, 4)
    assert fibre_integrate(two_minus_x, q4).coeffs == {(0,): 2, (1,): -1}
    h2 = FiniteQuotient(H, 2)
    assert fibre_integrate(laplace_h(), h2).coeffs == {(0, 0, 0): 5, (0, 1, 0): -2,
                                                       (1, 0, 0): -2}


def test_operator_matrix_examples(two_minus_x, golden):
    q2 = FiniteQuotient(Z, 2)
    M = operator_matrix(fibre_integrate(two_minus_x, q2)).matrix
    assert M.tolist() == [[2, -1], [-1, 2]]
    q5 = FiniteQuotient(H, 2)
    M = operator_matrix(fibre_integrate(zpoly({(0, 0, 0): 7}, H), q5)).matrix
    assert np.array_equal(M, 7 * np.eye(8))
    q3 = FiniteQuotient(Z, 3)
    M = operator_matrix(fibre_integrate(golden, q3), exact=True).matrix
    assert M.tolist() == [[3, -1, -1], [-1, 3, -1], [-1, -1, 3]]


def test_dense_cap():
    q = FiniteQuotient(Z, 9000)
    with pytest.raises(CapacityError) as err:
        operator_matrix(fibre_integrate(zpoly({0: 2, 1: -1}), q))
    assert err.value.suggestion == "cheb"


def test_rows_are_permuted_copies_and_diagonal():
    f = RingElement(H, {(0, 0, 0): 4, (1, 0, 0): -1, (0, 1, 1): 2, (-1, 2, 0): 3})
    q = FiniteQuotient(H, 3)
    M = operator_matrix(fibre_integrate(f, q)).matrix
    first = sorted(M[0])
    for row in M:
        assert sorted(row) == first
    assert np.all(np.diag(M) == 4)


def test_apply_operator_matches_matrix():
    f = laplace_h()
    q = FiniteQuotient(H, 3)
    fq = fibre_integrate(f, q)
    w = np.random.default_rng(0).standard_normal(q.order)
    assert np.allclose(apply_operator(fq, w), operator_matrix(fq).matrix @ w)


@settings(max_examples=40, deadline=None)
@given(heis_elements(), heis_elements(), st.sampled_from([2, 3, 4]))
def test_fibre_integration_homomorphism(f, g, m):
    q = FiniteQuotient(H, m)
    assert fibre_integrate(f * g, q) == fibre_integrate(f, q) * fibre_integrate(g, q)
    assert fibre_integrate(f.involute(), q) == fibre_integrate(f, q).involute()
    assert fibre_integrate(f, q).norm_l1() <= f.norm_l1()


@settings(max_examples=25, deadline=None)
@given(heis_elements(), st.sampled_from([2, 3]))
def test_adjoint_matrix_is_transpose_and_norm(f, m):
    q = FiniteQuotient(H, m)
    M = operator_matrix(fibre_integrate(f, q)).matrix
    Ms = operator_matrix(fibre_integrate(f.involute(), q)).matrix
    assert np.array_equal(Ms, M.T)
    lam = np.max(np.abs(np.linalg.eigvals(M))) if M.size else 0.0
    assert lam <= float(f.norm_l1()) + 1e-9
