"""Entropy from quotient determinants.

For an expansive principal action the entropy is the limit over the chain
of ``log|det(operator of f on Gamma/Gamma_n)| / |Gamma/Gamma_n|``; the
integer determinant itself is the number of ``Gamma_n``-periodic points.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .group_ring import INTEGER, RingElement
from .groups import CapacityError, FiniteQuotient, QuotientChain
from .intlinalg import bareiss_determinant
from .inversion import InvertibilityCertificate, residual as inverse_residual
from .quotient_transfer import DENSE_CAP, QuotientOperator, fibre_integrate, operator_matrix


class InfiniteFixedGroup(ArithmeticError):
    """The quotient operator is singular, so the periodic point group is infinite."""


class InternalInconsistency(RuntimeError):
    pass


def logdet_dense(op) -> float:
    """``log|det|`` by a pivoted factorization; ``-inf`` when singular."""
    M = op.matrix if isinstance(op, QuotientOperator) else np.asarray(op)
    M = np.asarray(M, dtype=np.float64)
    if not np.all(np.isfinite(M)):
        raise ValueError("operator matrix has non-finite entries")
    if M.shape[0] and np.array_equal(M, M.T):
        try:
            L = np.linalg.cholesky(M)
            return float(2.0 * np.sum(np.log(np.diag(L))))
        except np.linalg.LinAlgError:
            pass
    sign, logdet = np.linalg.slogdet(M)
    return float(logdet) if sign != 0 else -math.inf


def entropy_at_level(f: RingElement, q: FiniteQuotient, cap: int = DENSE_CAP) -> float:
    op = operator_matrix(fibre_integrate(f, q), q, cap=cap)
    return logdet_dense(op) / q.order


def fixed_points_exact(f: RingElement, q: FiniteQuotient) -> int:
    """Number of ``Gamma_n``-periodic points of ``X_f``: ``|det|`` in exact arithmetic."""
    if f.domain != INTEGER:
        raise TypeError("exact periodic point counts need integer coefficients")
    op = operator_matrix(fibre_integrate(f, q), q, exact=True)
    det = bareiss_determinant(op.matrix.tolist())
    if det == 0:
        raise InfiniteFixedGroup(f"operator on quotient of order {q.order} is singular")
    return abs(det)


def log_int(n: int) -> float:
    """``log n`` for big integers without float overflow."""
    if n < 2**1000:
        return math.log(n)
    shift = n.bit_length() - 64
    return math.log(n >> shift) + shift * math.log(2)


def fixed_point_entropy(f: RingElement, q: FiniteQuotient) -> float:
    return log_int(fixed_points_exact(f, q)) / q.order


def count_consistency(f: RingElement, q: FiniteQuotient) -> dict:
    """Compare the exact count with ``exp`` of the float log-determinant."""
    count = fixed_points_exact(f, q)
    ld = logdet_dense(operator_matrix(fibre_integrate(f, q), q))
    out = {"order": q.order, "count": count, "logdet": ld, "flagged": False}
    approx = math.exp(ld) if ld < 700 else math.inf
    # integers are only resolvable while the float error stays well below 1/2
    if approx * 1e-12 < 0.4:
        if abs(approx - round(approx)) <= 0.4:
            out["flagged"] = round(approx) != count
    else:
        out["flagged"] = abs(ld - log_int(count)) > 1e-8 * max(1.0, ld)
    return out


# -- reports -----------------------------------------------------------------------


@dataclass
class LevelRow:
    order: int
    value: float
    method: str
    error_bar: float = 0.0
    wall_ms: float = 0.0
    label: str = ""

    def data(self):
        # -inf marks a singular level; JSON has no infinities
        value = self.value if math.isfinite(self.value) else None
        return {"level_order": self.order, "method": self.method, "value": value,
                "error_bar": self.error_bar, "label": self.label}


@dataclass
class EntropyReport:
    rows: List[LevelRow] = field(default_factory=list)
    bracket: Optional[List[float]] = None
    estimate: Optional[float] = None
    diagnostics: dict = field(default_factory=dict)
    certificate: Optional[dict] = None
    advisory: Optional[str] = None

    def add(self, row: LevelRow):
        self.rows.append(row)
        self.rows.sort(key=lambda r: (r.method, r.order))

    def values(self, method="dense"):
        return [r.value for r in self.rows if r.method == method]

    def to_json(self) -> dict:
        """Deterministic payload; wall times are kept out (see ``timings``)."""
        return {
            "rows": [r.data() for r in sorted(self.rows, key=lambda r: (r.method, r.order))],
            "bracket": self.bracket,
            "estimate": self.estimate,
            "diagnostics": self.diagnostics,
            "certificate": self.certificate,
            "advisory": self.advisory,
        }

    def timings(self) -> dict:
        return {"wall_ms": [{"level_order": r.order, "method": r.method, "wall_ms": r.wall_ms}
                            for r in self.rows]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level_order", "method", "value", "error_bar", "wall_ms"])
        for r in sorted(self.rows, key=lambda r: (r.method, r.order)):
            w.writerow([r.order, r.method, repr(r.value), repr(r.error_bar),
                        f"{r.wall_ms:.3f}"])
        return buf.getvalue()


def entropy_converge(f: RingElement, chain: QuotientChain, max_levels: Optional[int] = None,
                     cauchy_tol: float = 0.0, cert: InvertibilityCertificate = None,
                     cap: int = DENSE_CAP, threads: int = 1, richardson: bool = False
                     ) -> EntropyReport:
    """Per-level dense entropies until a Cauchy gap below ``cauchy_tol``."""
    levels = [q for q in chain if q.order <= cap]
    if not levels:
        raise CapacityError("every level exceeds the dense cap", suggestion="cheb")
    if max_levels is not None:
        levels = levels[:max_levels]
    report = EntropyReport()
    if cert is None or not cert.certified:
        report.advisory = "f is not certified invertible; values are advisory"

    def run(q):
        t0 = time.perf_counter()
        v = entropy_at_level(f, q, cap)
        return q, v, 1e3 * (time.perf_counter() - t0)

    fired = False
    prev = None
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        # levels are evaluated in order so the Cauchy stop stays deterministic
        batch = max(1, threads)
        i = 0
        while i < len(levels) and not fired:
            for q, v, ms in pool.map(run, levels[i:i + batch]):
                if fired:
                    break
                if v == -math.inf and cert is not None and cert.certified:
                    raise InternalInconsistency(
                        f"singular level of order {q.order} for a certified invertible f")
                report.add(LevelRow(q.order, v, "dense", wall_ms=ms))
                if prev is not None and abs(v - prev) < cauchy_tol:
                    fired = True
                prev = v
            i += batch
    vals = report.values("dense")
    report.estimate = vals[-1]
    report.diagnostics = {
        "cauchy_fired": fired,
        "levels_run": len(vals),
        "last_gap": abs(vals[-1] - vals[-2]) if len(vals) > 1 else None,
        "monotone_increasing": all(b >= a for a, b in zip(vals, vals[1:])),
    }
    if richardson and len(vals) > 1:
        rows = report.rows
        n1, n2 = rows[-2].order, rows[-1].order
        report.diagnostics["richardson_heuristic"] = (n2 * vals[-1] - n1 * vals[-2]) / (n2 - n1)
    return report


# -- bracket -------------------------------------------------------------------------


@dataclass
class EntropyBracket:
    lower: float
    upper: float
    upper_sequence: List[float]
    lower_sequence: List[float]

    def as_list(self):
        return [self.lower, self.upper]

    def contains(self, v, tol=1e-12):
        return self.lower - tol <= v <= self.upper + tol


def entropy_bounds(f: RingElement, cert: InvertibilityCertificate, power_iters: int = 4,
                   max_pairs: int = 2 * 10**6) -> EntropyBracket:
    """Bracket from l1 norms of powers of ``f`` and of its truncated inverse.

    ``(1/k) log||f^k||_1`` bounds the entropy above and ``-(1/k) log||f^-k||_1``
    below; powers are only formed while supports stay small.
    """
    if not cert.certified:
        raise ValueError("entropy bounds need a certified inverse")
    upper_seq = []
    p = f.as_domain("float") if f.domain != INTEGER else f
    power = p
    for k in range(1, power_iters + 1):
        upper_seq.append(math.log(float(power.norm_l1())) / k)
        if k < power_iters:
            if len(power) * len(p) > max_pairs:
                break
            power = power * p
    g = cert.approx_inverse
    tau = cert.tail_bound
    gnorm = float(g.norm_l1())
    lower_seq = []
    power = g
    for k in range(1, power_iters + 1):
        # ||(f^-1)^k|| <= ||g^k|| + (||g|| + tau)^k - ||g||^k
        bound = float(power.norm_l1()) + (gnorm + tau) ** k - gnorm ** k
        lower_seq.append(-math.log(bound) / k)
        if k < power_iters:
            if len(power) * len(g) > max_pairs:
                break
            power = power * g
    lower = max(lower_seq)
    if f.domain == INTEGER:
        # periodic point counts are nonzero integers, so every level is >= 0
        lower = max(lower, 0.0)
    upper = min(upper_seq)
    if lower > upper + 1e-12:
        raise InternalInconsistency(f"empty bracket [{lower}, {upper}]")
    return EntropyBracket(lower, upper, upper_seq, lower_seq)


def verify_certificate(f: RingElement, cert: InvertibilityCertificate) -> float:
    """Recompute ``||e - g f||_1`` for the stored candidate."""
    return inverse_residual(cert.approx_inverse, f)


# -- positivity --------------------------------------------------------------------------


@dataclass
class SeparatedFamily:
    bound: float
    gamma0: tuple
    gap: float
    window: List[tuple]
    family_size: int
    min_distance: float


def separated_lower_bound(f: RingElement, q: FiniteQuotient, max_index: int = 8,
                          tail_target: float = 1e-12) -> SeparatedFamily:
    """Entropy lower bound ``log 2 / |Gamma/Gamma_n|`` from shifted homoclinic points.

    Picks ``gamma0`` where the homoclinic point is farthest from 0, a finite
    ``F`` carrying all but ``d(x_gamma0, 0)/2`` of the l1 mass, checks that the
    translates ``gamma F`` over the kernel are disjoint, then builds all
    ``2^|Omega|`` sums over a small set ``Omega`` of kernel elements and
    verifies their separation at the coordinates ``gamma * gamma0``.
    """
    from .dynamics import torus_distance
    from .inversion import l1_inverse
    from .groups import word_lengths

    group = f.group
    if f.domain != INTEGER:
        raise TypeError("positivity needs an integer f")
    if fixed_points_exact(f, q) <= 1:
        raise ValueError("X_f has no nonzero periodic points at this level; "
                         "the positivity construction needs X_f != 0")
    inv = l1_inverse(f, tail_target)
    wt = inv.element.involute()
    dist0 = {g: torus_distance(float(v), 0.0) for g, v in wt}
    gamma0 = max(dist0, key=lambda g: (dist0[g], tuple(-abs(c) for c in g)))
    d0 = dist0[gamma0]
    if d0 <= 1e-9:
        raise ValueError("homoclinic point vanishes mod 1 on the window")
    budget = d0 / 2
    # F: gamma0 plus the shortest words until the mass left outside is < budget
    lengths = word_lengths(group, None, inv.radius or 0)
    order = sorted(wt.support, key=lambda g: (g != gamma0, lengths.get(g, 10**9)))
    mass_out = float(wt.norm_l1()) + inv.tail_bound
    F = []
    for g in order:
        if F and mass_out < budget:
            break
        F.append(g)
        mass_out -= abs(float(wt[g]))
    if mass_out >= budget:
        raise ValueError("could not isolate the homoclinic mass on a finite set")
    Fset = set(F)
    diffs = {group.multiply(a, group.inverse(b)) for a in Fset for b in Fset}
    diffs.discard(group.identity)
    if any(q.in_kernel(d) for d in diffs):
        raise ValueError(f"translates of F over the kernel of {q!r} overlap; use a deeper level")
    # Omega: kernel elements along the first generator direction
    step = group.power(list(group.generators().values())[0], q.radix[0])
    omega = [group.power(step, k) for k in range(max_index)]
    targets = [group.multiply(om, gamma0) for om in omega]
    # values of sum_{k in S} lambda^{omega_k} wt at targets[j]
    contrib = np.zeros((len(omega), len(targets)))
    for k, om in enumerate(omega):
        om_inv = group.inverse(om)
        for j, t in enumerate(targets):
            contrib[k, j] = float(wt[group.multiply(om_inv, t)])
    masks = np.array([[(m >> k) & 1 for k in range(len(omega))]
                      for m in range(2 ** len(omega))], dtype=float)
    pts = np.mod(masks @ contrib, 1.0)
    min_sep = math.inf
    for a in range(len(pts) - 1):
        diff = masks[a + 1:] != masks[a]
        d = np.abs(pts[a + 1:] - pts[a])
        d = np.minimum(d, 1.0 - d)
        # every coordinate where the two choices differ must be separated
        min_sep = min(min_sep, float(np.where(diff, d, np.inf).min()))
    # the window values use the truncated inverse; the tail shifts them by <= tail
    if not min_sep - 2 * inv.tail_bound > budget:
        raise ValueError(f"separation {min_sep:.3g} not above {budget:.3g}")
    return SeparatedFamily(math.log(2) / q.order, gamma0, d0, targets, len(pts), min_sep)
