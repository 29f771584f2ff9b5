"""Log-determinants through Chebyshev polynomials and identity coefficients.

``log det f = 1/2 tr log(f f*)``, and ``tr`` of a group ring element is its
coefficient at the identity.  Replacing ``log`` by a polynomial ``Q`` that is
uniformly close on an interval containing the spectrum of ``g = f f*``
reduces everything to ring products, on a finite quotient or directly on
the infinite group with truncation to a word ball.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
from numpy.polynomial import chebyshev as C

from .group_ring import FLOAT, INTEGER, RingElement, unit
from .groups import FiniteQuotient, QuotientChain, verify_chain_separation, word_lengths
from .inversion import InvertibilityCertificate
from .quotient_transfer import fibre_integrate

DEGENERATE_WIDENING = 1e-12


class InconsistentTraces(RuntimeError):
    pass


@dataclass(frozen=True)
class SpectralInterval:
    a: float
    b: float

    def __post_init__(self):
        if not 0 < self.a <= self.b:
            raise ValueError(f"need 0 < a <= b, got [{self.a}, {self.b}]")


def spectral_interval(g: RingElement, cert: InvertibilityCertificate) -> SpectralInterval:
    """Interval holding the spectrum of ``g = f f*`` and of all its quotients.

    ``cert`` certifies ``f``; ``||g^-1||_1 <= ||f^-1||_1^2`` gives the lower end.
    """
    if cert is None or not cert.certified:
        raise ValueError("a certified inverse of f is required")
    inv_norm = cert.inverse_norm_bound()
    b = float(g.norm_l1())
    a = min(1.0 / inv_norm ** 2, b)
    return SpectralInterval(a, b)


@dataclass
class LogPolynomial:
    degree: int
    coeffs: np.ndarray
    a: float
    b: float
    sup_error: float

    def to_unit(self, t):
        return (2.0 * np.asarray(t, dtype=float) - (self.a + self.b)) / (self.b - self.a)

    def __call__(self, t):
        return C.chebval(self.to_unit(t), self.coeffs)


def chebyshev_log(interval: SpectralInterval, degree: int) -> LogPolynomial:
    """Interpolant of ``log`` at Chebyshev points with a sampled sup error."""
    if degree < 1:
        raise ValueError("degree must be at least 1")
    a, b = float(interval.a), float(interval.b)
    if a <= 0:
        raise ValueError("interval must be positive")
    if b - a <= DEGENERATE_WIDENING * b:
        a = b * (1.0 - DEGENERATE_WIDENING)
        coeffs = np.zeros(degree + 1)
        coeffs[0] = math.log(b)
        return LogPolynomial(degree, coeffs, a, b, abs(math.log(b / a)))
    half, mid = (b - a) / 2.0, (b + a) / 2.0
    coeffs = C.chebinterpolate(lambda s: np.log(half * s + mid), degree)
    poly = LogPolynomial(degree, coeffs, a, b, 0.0)
    t = np.linspace(a, b, 10 * degree + 1)
    poly.sup_error = 2.0 * float(np.max(np.abs(np.log(t) - poly(t))))
    return poly


def trace_identity_coeff(h: Union[RingElement, np.ndarray]) -> float:
    """Coefficient at the identity (position 0 for quotient vectors)."""
    if isinstance(h, RingElement):
        return float(h.trace())
    return float(h[0])


@dataclass
class ChebEstimate:
    value: float
    error_bar: float
    sup_error: float
    slack: float
    degree: int
    mode: str
    traces: List[float] = field(default_factory=list)

    def to_json(self):
        return {"degree": self.degree, "mode": self.mode, "estimate": self.value,
                "error_bar": self.error_bar, "sup_error": self.sup_error, "slack": self.slack}


def _rescaled(g: RingElement, poly: LogPolynomial) -> RingElement:
    gf = g.as_domain(FLOAT)
    shift = unit(g.group, FLOAT).scale(-(poly.a + poly.b))
    return (gf.scale(2.0) + shift).scale(1.0 / (poly.b - poly.a))


def chebyshev_traces_quotient(gq: RingElement, q: FiniteQuotient, poly: LogPolynomial,
                              degree: Optional[int] = None) -> List[float]:
    """``tr T_k(gbar)`` for k = 0..degree on the quotient, by ring recurrence."""
    degree = poly.degree if degree is None else degree
    gbar = _rescaled(gq, poly)
    terms = [(q.right_table(t), float(v)) for t, v in gbar]
    n = q.order

    def times_gbar(x):
        out = np.zeros(n)
        for table, v in terms:
            out[table] += v * x
        return out

    prev = np.zeros(n)
    prev[0] = 1.0
    traces = [1.0]
    if degree == 0:
        return traces
    cur = times_gbar(prev)
    traces.append(cur[0])
    for _ in range(2, degree + 1):
        prev, cur = cur, 2.0 * times_gbar(cur) - prev
        if not np.all(np.isfinite(cur)):
            raise OverflowError("Chebyshev recurrence overflowed; check degree and interval")
        traces.append(cur[0])
    return traces


def chebyshev_traces_direct(g: RingElement, radius: int, poly: LogPolynomial,
                            degree: Optional[int] = None):
    """Traces of ``T_k(gbar)`` on the infinite group, truncated to a word ball.

    Returns the traces and, per k, a bound on the l1 error of the truncated
    ``T_k``: dropped mass enters the recurrence and is propagated with
    ``E_{k+1} <= 2 ||gbar|| E_k + E_{k-1} + dropped_{k+1}``.
    """
    degree = poly.degree if degree is None else degree
    gbar = _rescaled(g, poly)
    keep = word_lengths(g.group, None, radius)
    gnorm = float(gbar.norm_l1())
    prev = unit(g.group, FLOAT)
    traces = [1.0]
    errs = [0.0]
    if degree == 0:
        return traces, errs
    cur, dropped = (gbar * prev).split(keep)
    traces.append(trace_identity_coeff(cur))
    errs.append(dropped)
    for _ in range(2, degree + 1):
        nxt, dropped = ((gbar * cur).scale(2.0) - prev).split(keep)
        errs.append(2 * gnorm * errs[-1] + errs[-2] + dropped)
        prev, cur = cur, nxt
        t = trace_identity_coeff(cur)
        if not math.isfinite(t) or not math.isfinite(errs[-1]):
            raise OverflowError("Chebyshev recurrence overflowed; check degree and interval")
        traces.append(t)
    return traces, errs


def entropy_cheb(f: RingElement, where: Union[FiniteQuotient, int], poly: LogPolynomial
                 ) -> ChebEstimate:
    """``1/2 sum_k c_k tr T_k(gbar)`` with an error bar.

    ``where`` is a finite quotient (quotient mode) or a word-ball radius
    (direct mode on the infinite group).
    """
    g = f * f.involute()
    c = np.asarray(poly.coeffs)
    if isinstance(where, FiniteQuotient):
        traces = chebyshev_traces_quotient(fibre_integrate(g, where), where, poly)
        slack = 0.0
        mode = "quotient"
    else:
        traces, errs = chebyshev_traces_direct(g, int(where), poly)
        slack = float(np.dot(np.abs(c), errs))
        mode = "direct"
    value = 0.5 * float(np.dot(c, traces))
    bar = 0.5 * (poly.sup_error + slack)
    return ChebEstimate(value, bar, poly.sup_error, slack, poly.degree, mode, traces)


def entropy_cheb_adaptive(f: RingElement, where, interval: SpectralInterval,
                          target_bar: float, degree: int = 64, max_degree: int = 1024):
    """Double the degree until the error bar meets ``target_bar``.

    Returns the final estimate and one diagnostics row per degree tried.
    """
    rows = []
    while True:
        est = entropy_cheb(f, where, chebyshev_log(interval, degree))
        rows.append(est.to_json())
        if est.error_bar <= target_bar or degree >= max_degree:
            return est, rows
        degree = min(2 * degree, max_degree)


# -- integer traces ---------------------------------------------------------------------


def _poly_of(h: RingElement, coeffs: Sequence[int]) -> RingElement:
    """``sum_j coeffs[j] h^j`` by Horner's rule."""
    one = unit(h.group, h.domain)
    out = RingElement(h.group, {}, h.domain)
    for c in reversed(list(coeffs)):
        out = out * h + one.scale(c)
    return out


@dataclass
class TraceStabilization:
    level: Optional[int]
    separation_level: Optional[int]
    exact_trace: int
    level_traces: List[int]
    flagged: bool
    note: str = ""


def trace_stabilization(f: RingElement, Q: Sequence[int], chain: QuotientChain
                        ) -> TraceStabilization:
    """First level from which ``tr Q(f^(n)) == tr Q(f)`` holds through the chain.

    The separation bound is computed for ``supp Q(f)`` together with the
    identity, which is what guarantees that no support element falls into
    the kernel.
    """
    if f.domain != INTEGER or any(int(c) != c for c in Q):
        raise TypeError("trace stabilization needs integer data")
    Qf = _poly_of(f, Q)
    exact = int(Qf.trace())
    level_traces = [int(_poly_of(fibre_integrate(f, q), Q).trace()) for q in chain]
    level = None
    for i in range(len(chain)):
        if all(t == exact for t in level_traces[i:]):
            level = i
            break
    try:
        sep = verify_chain_separation(chain, set(Qf.support) | {f.group.identity})
    except ValueError:
        sep = None
    flagged = False
    note = ""
    if level is None:
        flagged, note = True, "no agreement within the chain"
    elif sep is not None and level > sep:
        flagged, note = True, "agreement later than the separation bound"
    return TraceStabilization(level, sep, exact, level_traces, flagged, note)
