"""Finitely supported elements of the real group ring and their arithmetic."""
from __future__ import annotations

from fractions import Fraction
from numbers import Integral, Rational
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

from .groups import DescriptorMismatch, Element, Group

INTEGER, RATIONAL, FLOAT = "integer", "rational", "float"
_RANK = {INTEGER: 0, RATIONAL: 1, FLOAT: 2}

# Above this many coefficient pairs float convolution goes through numpy.
_VECTOR_THRESHOLD = 256


def _domain_of(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("boolean coefficients are not allowed")
    if isinstance(value, Integral):
        return INTEGER
    if isinstance(value, Rational):
        return RATIONAL
    if isinstance(value, (float, np.floating)):
        return FLOAT
    raise TypeError(f"unsupported coefficient type {type(value).__name__}")


def _cast(value, domain):
    if domain == INTEGER:
        return int(value)
    if domain == RATIONAL:
        return Fraction(value)
    return float(value)


def promote(*domains: str) -> str:
    return max(domains, key=_RANK.__getitem__)


class RingElement:
    """Finitely supported map from group elements to scalars.

    Zero coefficients are never stored and iteration over the support is
    lexicographic in the element tuples, which fixes the order of every
    floating point reduction.
    """

    __slots__ = ("group", "domain", "_coeffs")

    def __init__(self, group: Group, coeffs: Mapping[Element, object] = None, domain=None):
        coeffs = dict(coeffs or {})
        if domain is None:
            domain = promote(INTEGER, *(_domain_of(v) for v in coeffs.values()))
        elif domain not in _RANK:
            raise ValueError(f"unknown scalar domain {domain!r}")
        clean = {}
        for g, v in coeffs.items():
            g = tuple(int(c) for c in g)
            group.check(g)
            if _RANK[_domain_of(v)] > _RANK[domain]:
                raise TypeError(f"coefficient {v!r} would be narrowed to {domain}")
            v = _cast(v, domain)
            if v != 0:
                clean[g] = v
        self.group = group
        self.domain = domain
        self._coeffs = dict(sorted(clean.items()))

    # construction helpers

    @classmethod
    def from_words(cls, group: Group, terms: Iterable[Tuple[Iterable, object]], domain=None):
        """Build ``sum c * word`` from ``(word, coefficient)`` pairs."""
        acc: Dict[Element, object] = {}
        for word, c in terms:
            g = group.word(word)
            acc[g] = acc.get(g, 0) + c
        return cls(group, acc, domain)

    @classmethod
    def from_arrays(cls, group, keys: np.ndarray, values: np.ndarray):
        return cls(group, {tuple(map(int, k)): float(v) for k, v in zip(keys, values) if v != 0.0},
                   FLOAT)

    def to_arrays(self):
        n = len(self._coeffs)
        keys = np.array(list(self._coeffs), dtype=np.int64).reshape(n, self.group.dim)
        vals = np.array([float(v) for v in self._coeffs.values()], dtype=np.float64)
        return keys, vals

    # mapping protocol

    @property
    def coeffs(self) -> Mapping[Element, object]:
        return self._coeffs

    @property
    def support(self):
        return list(self._coeffs)

    def __getitem__(self, g):
        return self._coeffs.get(tuple(g), _cast(0, self.domain))

    def __len__(self):
        return len(self._coeffs)

    def __iter__(self):
        return iter(self._coeffs.items())

    def __repr__(self):
        terms = ", ".join(f"{g}: {v}" for g, v in self._coeffs.items())
        return f"RingElement({self.group!r}, {{{terms}}})"

    def __eq__(self, other):
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.group == other.group and self._coeffs == other._coeffs

    def __hash__(self):
        return hash((self.group, tuple(self._coeffs.items())))

    def is_zero(self):
        return not self._coeffs

    def as_domain(self, domain):
        if _RANK[domain] < _RANK[self.domain]:
            raise TypeError(f"refusing to narrow {self.domain} to {domain}")
        return RingElement(self.group, self._coeffs, domain)

    # linear structure

    def _check(self, other):
        if self.group != other.group:
            raise DescriptorMismatch(f"{self.group!r} vs {other.group!r}")

    def __add__(self, other):
        if not isinstance(other, RingElement):
            return NotImplemented
        self._check(other)
        dom = promote(self.domain, other.domain)
        acc = {g: _cast(v, dom) for g, v in self._coeffs.items()}
        for g, v in other._coeffs.items():
            acc[g] = acc.get(g, 0) + _cast(v, dom)
        return RingElement(self.group, acc, dom)

    def __neg__(self):
        return RingElement(self.group, {g: -v for g, v in self._coeffs.items()}, self.domain)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        dom = promote(self.domain, _domain_of(c))
        return RingElement(self.group, {g: _cast(v, dom) * _cast(c, dom)
                                        for g, v in self._coeffs.items()}, dom)

    def __mul__(self, other):
        if isinstance(other, RingElement):
            return convolve(self, other)
        return self.scale(other)

    def __rmul__(self, c):
        return self.scale(c)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not defined here")
        out = basis(self.group, self.group.identity, self.domain)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def restrict(self, keep) -> "RingElement":
        keep = keep if isinstance(keep, (set, frozenset, dict)) else set(keep)
        return RingElement(self.group, {g: v for g, v in self._coeffs.items() if g in keep},
                           self.domain)

    def split(self, keep):
        """Return ``(inside, dropped l1 mass)`` for a truncation to ``keep``."""
        inside = {}
        dropped = 0.0
        for g, v in self._coeffs.items():
            if g in keep:
                inside[g] = v
            else:
                dropped += abs(float(v))
        return RingElement(self.group, inside, self.domain), dropped

    # norms and trace

    def norm_l1(self):
        return sum((abs(v) for v in self._coeffs.values()), _cast(0, self.domain))

    def norm_linf(self):
        return max((abs(v) for v in self._coeffs.values()), default=_cast(0, self.domain))

    def trace(self):
        return self[self.group.identity]

    def involute(self) -> "RingElement":
        inv = self.group.inverse
        return RingElement(self.group, {inv(g): v for g, v in self._coeffs.items()}, self.domain)


def basis(group: Group, g: Element, domain=INTEGER) -> RingElement:
    return RingElement(group, {tuple(g): 1}, domain)


def unit(group: Group, domain=INTEGER) -> RingElement:
    return basis(group, group.identity, domain)


def convolve(h: RingElement, k: RingElement) -> RingElement:
    """Product in the convolution algebra: ``(h k)_g = sum_t h_t k_{t^-1 g}``."""
    h._check(k)
    dom = promote(h.domain, k.domain)
    group = h.group
    if not h._coeffs or not k._coeffs:
        return RingElement(group, {}, dom)
    if dom == FLOAT and len(h) * len(k) > _VECTOR_THRESHOLD:
        return _convolve_arrays(h, k)
    mul = group.multiply
    acc: Dict[Element, object] = {}
    for g, a in h._coeffs.items():
        for t, b in k._coeffs.items():
            p = mul(g, t)
            acc[p] = acc.get(p, 0) + a * b
    return RingElement(group, acc, dom)


def encode_rows(rows: np.ndarray):
    """Injective int64 keys for integer rows, plus what is needed to decode."""
    lo = rows.min(axis=0) if len(rows) else np.zeros(rows.shape[1], dtype=np.int64)
    span = (rows.max(axis=0) - lo + 1) if len(rows) else np.ones(rows.shape[1], dtype=np.int64)
    if float(np.prod(span.astype(float))) >= 2.0**62:
        raise OverflowError("row bounding box too large for int64 keys")
    strides = np.ones(rows.shape[1], dtype=np.int64)
    for i in range(rows.shape[1] - 2, -1, -1):
        strides[i] = strides[i + 1] * span[i + 1]
    return (rows - lo) @ strides, (lo, strides)


def decode_keys(keys: np.ndarray, info) -> np.ndarray:
    lo, strides = info
    out = np.empty((len(keys), len(strides)), dtype=np.int64)
    rem = keys.copy()
    for i, s in enumerate(strides):
        out[:, i], rem = np.divmod(rem, s)
    return out + lo


def product_arrays(group: Group, hk, hv, kk, kv):
    """Convolution on ``(keys, values)`` arrays; returns sorted unique keys."""
    n, m = len(hv), len(kv)
    prods = group.multiply_arrays(np.repeat(hk, m, axis=0), np.tile(kk, (n, 1)))
    vals = np.outer(hv, kv).ravel()
    keys, info = encode_rows(prods)
    uniq, inv = np.unique(keys, return_inverse=True)
    summed = np.bincount(inv.ravel(), weights=vals, minlength=len(uniq))
    return decode_keys(uniq, info), summed


def _convolve_arrays(h: RingElement, k: RingElement) -> RingElement:
    hk, hv = h.to_arrays()
    kk, kv = k.to_arrays()
    rows, vals = product_arrays(h.group, hk, hv, kk, kv)
    return RingElement.from_arrays(h.group, rows, vals)


def involute(h: RingElement) -> RingElement:
    return h.involute()


def norm_l1(h: RingElement):
    return h.norm_l1()


def norm_linf(h: RingElement):
    return h.norm_linf()


def trace(h: RingElement):
    return h.trace()

