"""Pushing ring elements to finite quotients and building their operators."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .group_ring import FLOAT, INTEGER, RingElement
from .groups import CapacityError, DescriptorMismatch, FiniteQuotient

DENSE_CAP = 8192


def fibre_integrate(f: RingElement, q: FiniteQuotient) -> RingElement:
    """Sum the coefficients of ``f`` over each coset of the kernel of ``q``."""
    if f.group != q.parent:
        raise DescriptorMismatch(f"{f.group!r} is not the parent of {q!r}")
    acc = {}
    for g, v in f:
        r = q.group.reduce(g)
        acc[r] = acc.get(r, 0) + v
    return RingElement(q.group, acc, f.domain)


def _quotient_of(fq: RingElement) -> FiniteQuotient:
    grp = fq.group
    if not getattr(grp, "finite", False) or not hasattr(grp, "radix"):
        raise DescriptorMismatch("operator matrices need an element over a finite quotient")
    return FiniteQuotient(grp.parent, grp.radix)


@dataclass(frozen=True)
class QuotientOperator:
    """Matrix of right convolution ``w -> w * fq^*`` on functions on the quotient.

    ``matrix[i, j] = fq(g_i^{-1} g_j)`` in the quotient's element order, so
    ``(matrix @ w)[i] = sum_t fq(t) w(g_i t)``.
    """

    quotient: FiniteQuotient
    matrix: np.ndarray
    domain: str

    @property
    def order(self):
        return self.quotient.order

    def to_csv(self, path):
        fmt = "%d" if self.matrix.dtype == object or self.domain == INTEGER else "%.17g"
        np.savetxt(path, np.asarray(self.matrix, dtype=float if fmt != "%d" else np.int64),
                   delimiter=",", fmt=fmt)


def operator_matrix(fq: RingElement, q: FiniteQuotient = None, cap: int = DENSE_CAP,
                    exact: bool = False) -> QuotientOperator:
    """Dense operator of ``fq``; ``exact`` keeps Python integers (object dtype)."""
    q = q or _quotient_of(fq)
    if q.order > cap:
        raise CapacityError(
            f"quotient of order {q.order} exceeds the dense cap {cap}",
            suggestion="cheb",
        )
    n = q.order
    if exact:
        if fq.domain != INTEGER:
            raise TypeError("exact operator matrices need integer coefficients")
        M = np.zeros((n, n), dtype=object)
        M[:, :] = 0
    else:
        M = np.zeros((n, n), dtype=np.float64)
    rows = np.arange(n)
    for t, v in fq:
        # entry (i, j) with g_j = g_i t
        M[rows, q.right_table(t)] += v if exact else float(v)
    return QuotientOperator(q, M, fq.domain if exact else FLOAT)


def apply_operator(fq: RingElement, w: np.ndarray, q: FiniteQuotient = None) -> np.ndarray:
    """Matrix-free ``w -> w * fq^*`` via the quotient's multiplication tables."""
    q = q or _quotient_of(fq)
    out = np.zeros(q.order, dtype=np.result_type(w, np.float64))
    for t, v in fq:
        out += float(v) * w[q.right_table(t)]
    return out
