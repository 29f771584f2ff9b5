"""Points of ``X_f``: homoclinic points, the map xi, lifts, gluing, periodic points.

Conventions follow the right action ``(rho_h w)_g = sum_t w_{g t} h_t``:
``X_f`` is the set of ``x`` in the torus over the group with
``sum_t f_t x_{g t}`` an integer for every ``g``.  With ``w = f^{-1}`` and
``wt = w^*`` the homoclinic point is ``wt mod 1`` and ``xi(v) = (v * wt) mod 1``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional

import numpy as np

from .entropy_core import InfiniteFixedGroup
from .group_ring import INTEGER, RingElement
from .groups import Element, FiniteQuotient, Group, word_lengths
from .intlinalg import smith_normal_form
from .inversion import TruncatedInverse, l1_inverse
from .quotient_transfer import fibre_integrate, operator_matrix


class WindowError(ValueError):
    pass


class GluingError(ValueError):
    def __init__(self, message, achievable_eps=None):
        super().__init__(message)
        self.achievable_eps = achievable_eps


def support_radius(h: RingElement) -> int:
    r = 1
    while not all(g in word_lengths(h.group, None, r) for g in h.support):
        r *= 2
    lengths = word_lengths(h.group, None, r)
    return max(lengths[g] for g in h.support)


def torus_distance(a, b):
    """Distance on R/Z; exact for Fractions."""
    d = (a - b) % 1
    return min(d, 1 - d)


def _centered(v):
    """Representative of ``v mod 1`` in ``[-1/2, 1/2)``."""
    r = v % 1
    return r - 1 if r >= Fraction(1, 2) else r


@dataclass
class TorusPoint:
    """Coordinates of a point of the torus over a window or a full period.

    ``quotient`` is set for ``Gamma_n``-periodic points, whose values are
    indexed by residues; otherwise coordinates outside ``values`` are
    unknown.
    """

    group: Group
    values: Dict[Element, object]
    quotient: Optional[FiniteQuotient] = None
    tolerance: float = 0.0

    @classmethod
    def zero(cls, group, window):
        return cls(group, {g: 0.0 for g in window})

    def __getitem__(self, g):
        if self.quotient is not None:
            return self.values[self.quotient.project(g)]
        return self.values[g]

    def covers(self, g):
        return self.quotient is not None or g in self.values

    def to_json(self):
        def fmt(v):
            return f"{v.numerator}/{v.denominator}" if isinstance(v, Fraction) else float(v)
        out = {"coordinates": [[list(g), fmt(v)] for g, v in sorted(self.values.items())]}
        if self.quotient is not None:
            out["radix"] = list(self.quotient.radix)
        return out


def membership_residual(x: TorusPoint, f: RingElement):
    """Max distance of ``sum_t f_t x_{g t}`` to the integers over covered ``g``."""
    group = f.group
    worst = 0
    checked = 0
    for g in x.values:
        if x.quotient is not None:
            s = sum(v * x.values[x.quotient.group.multiply(g, x.quotient.group.reduce(t))]
                    for t, v in f)
        else:
            nbrs = [group.multiply(g, t) for t, _ in f]
            if not all(n in x.values for n in nbrs):
                continue
            s = sum(v * x.values[n] for (t, v), n in zip(f, nbrs))
        checked += 1
        worst = max(worst, torus_distance(s, 0))
    if not checked:
        raise WindowError("window has no coordinate whose f-neighbourhood is covered")
    return worst


def homoclinic_point(f: RingElement, radius: int, inv: TruncatedInverse = None) -> TorusPoint:
    """``(f^-1)^* mod 1`` on the word ball of the given radius."""
    inv = inv or l1_inverse(f)
    wt = inv.element.involute()
    window = word_lengths(f.group, None, radius)
    values = {g: float(wt[g]) % 1.0 for g in window}
    return TorusPoint(f.group, values, tolerance=inv.tail_bound)


def xi_map(v: Mapping[Element, int], f: RingElement, window: Iterable[Element],
           inv: TruncatedInverse = None) -> TorusPoint:
    """``(v * (f^-1)^*) mod 1`` on ``window`` for finitely supported integer ``v``."""
    inv = inv or l1_inverse(f)
    window = list(window)
    v = {tuple(g): int(c) for g, c in dict(v).items() if c}
    if not v:
        return TorusPoint(f.group, {g: 0.0 for g in window})
    ve = RingElement(f.group, v, INTEGER)
    y = ve * inv.element.involute()
    tol = inv.tail_bound * sum(abs(c) for c in v.values())
    return TorusPoint(f.group, {g: float(y[g]) % 1.0 for g in window}, tolerance=tol)


def lift_point(x: TorusPoint, f: RingElement):
    """Integer ``v`` with ``xi(v) = x`` and ``||v||_inf <= ||f||_1 / 2``.

    For periodic points the lift is exact and periodic (returned as a dict on
    residues); for windows it is defined where the f-neighbourhood is covered.
    """
    bound = Fraction(f.norm_l1()) / 2
    if x.quotient is not None:
        q = x.quotient
        w = {g: _centered(Fraction(v)) for g, v in x.values.items()}
        out = {}
        for g in q.elements:
            s = sum(c * w[q.group.multiply(g, q.group.reduce(t))] for t, c in f)
            if s.denominator != 1:
                raise ValueError(f"x is not in X_f: relation at {g} gives {s}")
            out[g] = int(s)
    else:
        w = {g: (float(v) + 0.5) % 1.0 - 0.5 for g, v in x.values.items()}
        out = {}
        for g in x.values:
            nbrs = [f.group.multiply(g, t) for t, _ in f]
            if not all(n in w for n in nbrs):
                continue
            s = sum(float(c) * w[n] for (_, c), n in zip(f, nbrs))
            k = round(s)
            if abs(s - k) > 1e-6 + x.tolerance * float(f.norm_l1()):
                raise ValueError(f"x is not in X_f: relation at {g} is {s}")
            out[g] = int(k)
        if not out:
            raise WindowError("window too small for the support of f")
    assert all(abs(v) <= bound for v in out.values())
    return out


# -- specification -------------------------------------------------------------------


@dataclass
class GlueResult:
    y: TorusPoint
    F: List[Element]
    v: Dict[Element, int]
    max_distance: List[float]
    residual: float
    eps: float


def _tail_ball(w: RingElement, tail: float, lengths, threshold: float):
    """Smallest K with mass of ``w`` outside the radius-K ball below threshold."""
    by_len: Dict[int, float] = {}
    for g, v in w:
        by_len[lengths[g]] = by_len.get(lengths[g], 0.0) + abs(float(v))
    outside = sum(by_len.values()) + tail
    for K in range(0, max(by_len) + 1):
        outside -= by_len.get(K, 0.0)
        if outside < threshold:
            return K, outside
    return None, outside


def epsilon_window(f: RingElement, eps: float, inv: TruncatedInverse = None):
    """``F_eps``: support of ``f^-1`` on the smallest ball leaving l1 mass below
    ``eps / ||f||_1`` outside."""
    inv = inv or l1_inverse(f)
    w = inv.element
    lengths = word_lengths(f.group, None, inv.radius or 0)
    K, _ = _tail_ball(w, inv.tail_bound, lengths, eps / float(f.norm_l1()))
    if K is None:
        raise GluingError(f"inverse truncation too coarse for eps={eps}")
    return sorted(g for g in w.support if lengths[g] <= K), K


def specification_glue(x1: TorusPoint, x2: TorusPoint, C1, C2, eps: float, f: RingElement,
                       inv: TruncatedInverse = None) -> GlueResult:
    """A point of ``X_f`` that is ``eps``-close to ``x1`` on ``C1`` and to ``x2`` on ``C2``."""
    inv = inv or l1_inverse(f)
    group = f.group
    F, K = epsilon_window(f, eps, inv)
    C = [[tuple(c) for c in C1], [tuple(c) for c in C2]]
    enlarged = [{group.multiply(c, t) for c in Ci for t in F} for Ci in C]
    if enlarged[0] & enlarged[1]:
        lengths = word_lengths(group, None, inv.radius or 0)
        achievable = None
        for k in range(K - 1, -1, -1):
            Fk = [g for g in F if lengths[g] <= k]
            e = [{group.multiply(c, t) for c in Ci for t in Fk} for Ci in C]
            if not e[0] & e[1]:
                mass = sum(abs(float(v)) for g, v in inv.element if lengths[g] > k)
                achievable = (mass + inv.tail_bound) * float(f.norm_l1())
                break
        raise GluingError("enlarged windows overlap", achievable_eps=achievable)
    v: Dict[Element, int] = {}
    for x, E in zip((x1, x2), enlarged):
        lift = lift_point(x, f)
        for g in E:
            key = x.quotient.project(g) if x.quotient is not None else g
            if key not in lift:
                raise WindowError(f"point does not cover the f-neighbourhood of {g}")
            v[g] = lift[key]
    # y on C1 u C2 and a margin large enough to test membership
    margin = word_lengths(group, None, support_radius(f) + 1)
    window = {group.multiply(c, m) for Ci in C for c in Ci for m in margin}
    y = xi_map(v, f, window, inv)
    dists = []
    for x, Ci in zip((x1, x2), C):
        d = max(torus_distance(float(x[c]), y[c]) for c in Ci)
        if not d < eps:
            raise GluingError(f"glued point misses by {d:.3g} >= eps")
        dists.append(d)
    return GlueResult(y, F, v, dists, float(membership_residual(y, f)), eps)


# -- periodic points -------------------------------------------------------------------


@dataclass
class FixedPointGroup:
    """``Fix_{Gamma_n}(X_f)`` as ``M^-1 Z^n / Z^n`` with ``M`` the integer operator.

    With ``L M R = diag(d)`` the points are ``x = R y`` with ``y_i`` in
    ``(1/d_i) Z / Z``.  Points are stored as integer numerators over the
    common denominator ``d[-1]``.
    """

    quotient: FiniteQuotient
    smith_diagonal: List[int]
    left: List[List[int]]
    right: List[List[int]]
    matrix: List[List[int]]
    count: int
    numerators: Optional[np.ndarray] = None

    @property
    def denominator(self):
        return self.smith_diagonal[-1]

    def point(self, i: int) -> TorusPoint:
        D = self.denominator
        vals = {g: Fraction(int(n), D) for g, n in zip(self.quotient.elements,
                                                        self.numerators[i])}
        return TorusPoint(self.quotient.parent, vals, quotient=self.quotient)

    def points(self):
        return [self.point(i) for i in range(len(self.numerators))]

    def solve(self, v: Mapping[Element, int]) -> TorusPoint:
        """Periodic ``xi(v)``: the unique periodic ``x`` with ``M x = v`` mod 1."""
        q = self.quotient
        vec = [int(v[g]) for g in q.elements]
        Lv = [sum(a * b for a, b in zip(row, vec)) for row in self.left]
        y = [Fraction(c, d) for c, d in zip(Lv, self.smith_diagonal)]
        x = [sum(r * yy for r, yy in zip(row, y)) % 1 for row in self.right]
        return TorusPoint(q.parent, dict(zip(q.elements, x)), quotient=q)

    def verify_all(self) -> bool:
        """Every stored point satisfies ``M x`` integral, exactly."""
        if self.numerators is None:
            return True
        M = np.array(self.matrix, dtype=object)
        prod = self.numerators.astype(object) @ M.T
        return bool(np.all(prod % self.denominator == 0))

    def to_json(self, limit: int = 1000):
        out = {"radix": list(self.quotient.radix), "smith_diagonal": self.smith_diagonal,
               "count": self.count}
        if self.numerators is not None:
            out["points"] = [self.point(i).to_json()["coordinates"]
                             for i in range(min(limit, len(self.numerators)))]
        return out


def enumerate_fixed_points(f: RingElement, q: FiniteQuotient, cap: int = 10**4
                           ) -> FixedPointGroup:
    if f.domain != INTEGER:
        raise TypeError("periodic points need integer f")
    M = operator_matrix(fibre_integrate(f, q), q, exact=True).matrix.tolist()
    diag, L, R = smith_normal_form(M)
    if any(d == 0 for d in diag):
        raise InfiniteFixedGroup(f"operator on quotient of order {q.order} is singular")
    count = math.prod(diag)
    fpg = FixedPointGroup(q, diag, L, R, M, count)
    if count <= cap:
        D = diag[-1]
        nz = [i for i, d in enumerate(diag) if d > 1]
        ranges = [range(diag[i]) for i in nz]
        ks = np.array(list(itertools.product(*ranges)), dtype=object).reshape(count, len(nz))
        scaled = ks * np.array([D // diag[i] for i in nz], dtype=object)
        Rm = np.array([[R[r][c] % D for c in nz] for r in range(len(R))], dtype=object)
        X = (scaled @ Rm.T) % D if nz else np.zeros((1, q.order), dtype=object)
        big = D * D * max(1, len(nz)) >= 2**62
        fpg.numerators = X if big else X.astype(np.int64)
    return fpg


def min_pairwise_separation(fpg: FixedPointGroup, chunk: int = 256) -> Fraction:
    """Smallest, over pairs of distinct points, of the largest coordinate distance."""
    X = np.asarray(fpg.numerators, dtype=np.int64)
    D = fpg.denominator
    n = len(X)
    best = D
    for s in range(0, n, chunk):
        A = X[s:s + chunk]
        diff = np.abs(A[:, None, :] - X[None, :, :]) % D
        diff = np.minimum(diff, D - diff).max(axis=2)
        idx = np.arange(s, s + len(A))
        diff[np.arange(len(A)), idx] = D  # ignore self pairs
        best = min(best, int(diff.min()))
    return Fraction(best, D)


def homoclinic_approximation(f: RingElement, x: TorusPoint, radius: int,
                             inv: TruncatedInverse = None, centre_radius: int = 2) -> float:
    """Distance near the identity between a periodic point and ``xi`` of its
    lift cut down to a finite window (a homoclinic point)."""
    if x.quotient is None:
        raise ValueError("expected a periodic point")
    lift = lift_point(x, f)
    window = word_lengths(f.group, None, radius)
    v = {g: lift[x.quotient.project(g)] for g in window}
    centre = list(word_lengths(f.group, None, centre_radius))
    y = xi_map(v, f, centre, inv)
    return max(torus_distance(float(x[g]), y[g]) for g in centre)
