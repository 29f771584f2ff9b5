"""Batch driver.

Every subcommand reads the shared JSON job config, writes the full JSON
report (and a CSV table when asked), a ``.meta.json`` sidecar with wall
times, and a figure, then prints one summary line.

Exit status: 0 success, 1 error, 2 nonexpansive verdict, 3 invertibility unknown.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional

import numpy as np

from . import __version__
from .config import ConfigError, JobConfig, load_config
from .dynamics import (GluingError, TorusPoint, WindowError, epsilon_window,
                       specification_glue, support_radius, xi_map)
from .entropy_core import (EntropyReport, InfiniteFixedGroup, LevelRow, entropy_at_level,
                           entropy_bounds, entropy_converge, fixed_point_entropy,
                           fixed_points_exact, log_int)
from .group_ring import INTEGER, RingElement
from .groups import CapacityError, FiniteQuotient, FreeAbelian, group_to_json, word_lengths
from .inversion import (INVERTIBLE, NONINVERTIBLE, InsufficientData, certify_invertible,
                        decay_profile, detect_noninvertible, l1_inverse)
from .mahler import (GRID_VANISHING, NONVANISHING, TorusPolynomial, mahler_quadrature,
                     wiener_invertibility)
from .poly_trace import chebyshev_log, entropy_cheb, entropy_cheb_adaptive, spectral_interval

EXIT_OK, EXIT_ERROR, EXIT_NONEXPANSIVE, EXIT_UNKNOWN = 0, 1, 2, 3
COMMANDS = ("entropy", "fixcount", "invert", "mahler", "specdemo", "decay")

# exact Bareiss determinants above this order are slow in pure Python
EXACT_CAP = 512
CHEB_CAP = 10**6


@dataclass
class JobResult:
    status: int
    payload: dict
    summary: str
    csv_rows: List[list] = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    figure: Optional[Callable[[Path], None]] = None


def _f_json(f: RingElement):
    return [[list(g), v if f.domain == INTEGER else float(v)] for g, v in f]


def _header(cfg: JobConfig, command: str) -> dict:
    return {"command": command, "group": group_to_json(cfg.group), "f": _f_json(cfg.f)}


def _label(q: FiniteQuotient) -> str:
    return "x".join(str(m) for m in q.radix)


def _need_chain(cfg: JobConfig):
    if cfg.chain is None:
        raise ConfigError("this command needs a quotient chain", field="chain")
    return cfg.chain


def _certify(cfg: JobConfig):
    tol = cfg.tolerances
    return certify_invertible(cfg.f, tol.get("target_residual", 1e-12), tol.get("max_radius"))


def _rows_csv(report: EntropyReport):
    return [[r.order, r.method, repr(r.value), repr(r.error_bar), f"{r.wall_ms:.3f}"]
            for r in sorted(report.rows, key=lambda r: (r.method, r.order))]


def _timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, 1e3 * (time.perf_counter() - t0)


# -- entropy -----------------------------------------------------------------------


def _advisory_levels(cfg: JobConfig, report: EntropyReport):
    """Dense and exact values without a certificate; singular levels give -inf."""
    f = cfg.f
    for q in _need_chain(cfg):
        if "dense" in cfg.methods or "exact" not in cfg.methods:
            try:
                v, ms = _timed(entropy_at_level, f, q)
                report.add(LevelRow(q.order, v, "dense", wall_ms=ms, label=_label(q)))
            except CapacityError:
                pass
        if "exact" in cfg.methods and f.domain == INTEGER and q.order <= EXACT_CAP:
            try:
                v, ms = _timed(fixed_point_entropy, f, q)
            except InfiniteFixedGroup:
                v, ms = -math.inf, 0.0
            report.add(LevelRow(q.order, v, "exact", wall_ms=ms, label=_label(q)))


def run_job(cfg: JobConfig, threads: int = 1) -> JobResult:
    """Certify, then run the requested methods and validate against the bracket."""
    f = cfg.f
    chain = _need_chain(cfg)
    tol = cfg.tolerances
    payload = _header(cfg, "entropy")
    report = EntropyReport()
    cert, cert_ms = _timed(_certify, cfg)
    timings = {"certify_ms": cert_ms}
    if not cert.certified:
        det = detect_noninvertible(f, chain)
        if det.verdict == NONINVERTIBLE:
            report.certificate = det.to_json()
            report.advisory = "nonexpansive: singular quotient operator, entropy is not computed"
            payload["report"] = report.to_json()
            summary = (f"NonInvertibleCertified: singular operator on quotient of order "
                       f"{det.witness_quotient.order}")
            return JobResult(EXIT_NONEXPANSIVE, payload, summary, [], timings)
        report.certificate = cert.to_json()
        report.advisory = ("ADVISORY: invertibility unknown; values are fixed-point "
                           "growth rates only and are not certified entropies")
        _advisory_levels(cfg, report)
        payload["report"] = report.to_json()
        timings.update(report.timings())
        return JobResult(EXIT_UNKNOWN, payload, "Unknown invertibility: advisory values only",
                         _rows_csv(report), timings,
                         lambda p: _plot_entropy(report, p, "advisory"))

    bracket = entropy_bounds(f, cert, tol.get("power_iters", 4))
    report.bracket = bracket.as_list()
    report.certificate = cert.to_json()
    diagnostics = {}
    if "dense" in cfg.methods:
        dense = entropy_converge(f, chain, cauchy_tol=tol.get("cauchy_tol", 0.0), cert=cert,
                                 threads=threads)
        for r in dense.rows:
            r.label = _label(next(q for q in chain if q.order == r.order))
            report.add(r)
        diagnostics["dense"] = dense.diagnostics
        report.estimate = dense.estimate
    if "exact" in cfg.methods:
        if f.domain != INTEGER:
            diagnostics["exact"] = "skipped: f has non-integer coefficients"
        else:
            for q in chain:
                if q.order > EXACT_CAP:
                    continue
                v, ms = _timed(fixed_point_entropy, f, q)
                report.add(LevelRow(q.order, v, "exact", wall_ms=ms, label=_label(q)))
    if "cheb" in cfg.methods:
        ch = cfg.cheb
        interval = spectral_interval(f * f.involute(), cert)
        target = tol.get("cheb_target", 1e-6)
        deg, max_deg = ch.get("degree", 64), ch.get("max_degree", 1024)
        tried = {}
        for q in chain:
            if q.order > CHEB_CAP:
                continue
            (est, rows), ms = _timed(entropy_cheb_adaptive, f, q, interval, target, deg, max_deg)
            report.add(LevelRow(q.order, est.value, "cheb", est.error_bar, ms,
                                f"{_label(q)} deg={est.degree}"))
            tried[_label(q)] = [r["degree"] for r in rows]
        if "direct_radius" in ch:
            R = ch["direct_radius"]
            est, ms = _timed(entropy_cheb, f, R, chebyshev_log(interval, deg))
            report.add(LevelRow(0, est.value, "cheb", est.error_bar, ms,
                                f"direct R={R} deg={deg}"))
            diagnostics["cheb_direct"] = est.to_json()
        diagnostics["cheb"] = {"interval": [interval.a, interval.b], "degrees": tried}
        if report.estimate is None:
            report.estimate = report.values("cheb")[-1]
    if "mahler" in cfg.methods:
        if not isinstance(cfg.group, FreeAbelian):
            diagnostics["mahler"] = "skipped: the torus oracle needs a free abelian group"
        else:
            grid = cfg.mahler.get("grid", 256)
            mv, ms = _timed(mahler_quadrature, TorusPolynomial.from_ring(f), grid)
            report.add(LevelRow(grid ** cfg.group.d, mv.value, "mahler", mv.error_estimate,
                                ms, f"grid={grid}"))
    outside = [r.data() for r in report.rows
               if math.isfinite(r.value) and not bracket.contains(r.value, tol=r.error_bar + 1e-9)]
    diagnostics["outside_bracket"] = outside
    report.diagnostics = diagnostics
    payload["report"] = report.to_json()
    timings.update(report.timings())
    last = report.estimate
    summary = (f"InvertibleCertified (residual {cert.residual:.2e}); entropy ~ {last:.12g}; "
               f"bracket [{bracket.lower:.6g}, {bracket.upper:.6g}]")
    if outside:
        summary += f"; WARNING {len(outside)} values outside the bracket"
    return JobResult(EXIT_OK, payload, summary, _rows_csv(report), timings,
                     lambda p: _plot_entropy(report, p, None))


def _plot_entropy(report, path, title):
    from .plotting import plot_convergence
    plot_convergence(report, path, title)


# -- other subcommands -----------------------------------------------------------------


def run_fixcount(cfg: JobConfig, threads: int = 1) -> JobResult:
    if cfg.f.domain != INTEGER:
        raise ConfigError("periodic point counts need integer coefficients", field="f")
    moduli = cfg.levels or [q.radix for q in _need_chain(cfg)]
    rows, table, ms_rows = [], [], []
    for m in moduli:
        q = FiniteQuotient(cfg.group, m)
        try:
            count, ms = _timed(fixed_points_exact, cfg.f, q)
        except InfiniteFixedGroup:
            count, ms = None, 0.0
        rate = None if count is None else log_int(count) / q.order
        rows.append({"level_order": q.order, "label": _label(q),
                     "count": None if count is None else str(count), "log_count_per_order": rate})
        table.append([q.order, "exact", "inf" if count is None else str(count), "0.0",
                      f"{ms:.3f}"])
        ms_rows.append({"level_order": q.order, "wall_ms": ms})
    payload = _header(cfg, "fixcount")
    payload["rows"] = rows
    finite = [r for r in rows if r["count"] is not None]
    summary = f"{len(rows)} levels; " + ", ".join(
        f"{r['label']}:{r['count'] if r['count'] is not None else 'inf'}" for r in rows[:6])
    if len(rows) > 6:
        summary += ", ..."

    def fig(p):
        from .plotting import plot_counts
        plot_counts([r["level_order"] for r in finite], [int(r["count"]) for r in finite], p,
                    "periodic point growth")

    return JobResult(EXIT_OK, payload, summary, table, {"wall_ms": ms_rows},
                     fig if finite else None)


def run_invert(cfg: JobConfig, threads: int = 1) -> JobResult:
    cert, ms = _timed(_certify, cfg)
    payload = _header(cfg, "invert")
    status = EXIT_OK
    if not cert.certified and cfg.chain is not None:
        det = detect_noninvertible(cfg.f, cfg.chain)
        if det.verdict == NONINVERTIBLE:
            cert = det
    if cert.verdict == NONINVERTIBLE:
        status = EXIT_NONEXPANSIVE
    elif cert.verdict != INVERTIBLE:
        status = EXIT_UNKNOWN
    payload["certificate"] = cert.to_json()
    payload["history"] = cert.history
    summary = f"{cert.verdict}"
    if cert.certified:
        summary += (f": residual {cert.residual:.3e}, tail bound {cert.tail_bound:.3e}, "
                    f"radius {cert.radius}, support {len(cert.approx_inverse)}")
    elif cert.witness_quotient is not None:
        summary += f": singular quotient of order {cert.witness_quotient.order}"
    table = [[h["radius"], cert.method, repr(h["residual"]), "0.0", "0.000"]
             for h in cert.history]
    return JobResult(status, payload, summary, table, {"certify_ms": ms})


def run_mahler(cfg: JobConfig, threads: int = 1) -> JobResult:
    if not isinstance(cfg.group, FreeAbelian):
        raise ConfigError("the Mahler oracle needs a free abelian group", field="group.kind")
    p = TorusPolynomial.from_ring(cfg.f)
    grid = cfg.mahler.get("grid", 256)
    w, wms = _timed(wiener_invertibility, p, max(grid, 4 * (p.max_exponent + 1)))
    payload = _header(cfg, "mahler")
    payload["wiener"] = w.to_json()
    if w.verdict != NONVANISHING:
        status = EXIT_NONEXPANSIVE if w.verdict == GRID_VANISHING else EXIT_UNKNOWN
        return JobResult(status, payload, f"Wiener check: {w.verdict}", [],
                         {"wiener_ms": wms})
    mv, ms = _timed(mahler_quadrature, p, grid)
    payload["mahler"] = mv.to_json()
    summary = f"mahler measure {mv.value:.15g} (grid {grid}, doubling change {mv.error_estimate:.2e})"
    table = [[grid ** p.d, "mahler", repr(mv.value), repr(mv.error_estimate), f"{ms:.3f}"]]
    return JobResult(EXIT_OK, payload, summary, table, {"wiener_ms": wms, "mahler_ms": ms})


def _spec_point(desc, f, window, inv):
    group = f.group
    if desc == "zero":
        return TorusPoint.zero(group, window)
    shift = group.identity if desc == "homoclinic" else tuple(desc["homoclinic_shift"])
    group.check(shift)
    return xi_map({shift: 1}, f, window, inv)


def run_specdemo(cfg: JobConfig, threads: int = 1) -> JobResult:
    spec = cfg.spec
    if spec is None:
        raise ConfigError("specdemo needs a 'spec' block", field="spec")
    f, group = cfg.f, cfg.group
    tol = cfg.tolerances
    inv = l1_inverse(f, tol.get("tail_target", 1e-12), tol.get("max_radius"))
    C1 = [tuple(c) for c in spec["C1"]]
    C2 = [tuple(c) for c in spec["C2"]]
    for name, C in (("C1", C1), ("C2", C2)):
        for c in C:
            try:
                group.check(c)
            except Exception as exc:
                raise ConfigError(str(exc), field=f"spec.{name}") from None
    F, _ = epsilon_window(f, spec["eps"], inv)
    margin = word_lengths(group, None, spec.get("window_radius", support_radius(f) + 1))
    windows = [{group.multiply(group.multiply(c, t), m) for c in C for t in F for m in margin}
               for C in (C1, C2)]
    x1 = _spec_point(spec.get("x1", "homoclinic"), f, windows[0], inv)
    x2 = _spec_point(spec.get("x2", "zero"), f, windows[1], inv)
    res, ms = _timed(specification_glue, x1, x2, C1, C2, spec["eps"], f, inv)
    payload = _header(cfg, "specdemo")
    payload["glue"] = {
        "eps": res.eps, "F_size": len(res.F), "F": [list(g) for g in res.F],
        "max_distance": res.max_distance, "membership_residual": res.residual,
        "lift_support": len(res.v), "inverse_tail_bound": inv.tail_bound,
        "y_on_C1": [[list(c), res.y[c]] for c in C1],
        "y_on_C2": [[list(c), res.y[c]] for c in C2],
    }
    summary = (f"glued: max distance {max(res.max_distance):.3g} < eps {res.eps}, "
               f"membership residual {res.residual:.3g}")
    table = [[len(C), f"window{i + 1}", repr(d), repr(res.residual), f"{ms:.3f}"]
             for i, (C, d) in enumerate(zip((C1, C2), res.max_distance))]
    return JobResult(EXIT_OK, payload, summary, table, {"glue_ms": ms})


def run_decay(cfg: JobConfig, threads: int = 1) -> JobResult:
    tol = cfg.tolerances
    tail = cfg.decay.get("tail_target", tol.get("tail_target", 1e-12))
    try:
        inv, ms = _timed(l1_inverse, cfg.f, tail, tol.get("max_radius"))
    except CapacityError as exc:
        raise CapacityError(f"{exc}; best tail {exc.best:.3g}", suggestion="raise max_radius",
                            best=exc.best) from None
    w = inv.element.involute()
    prof = decay_profile(w)
    payload = _header(cfg, "decay")
    payload["profile"] = prof.to_json()
    payload["ratio_per_shell"] = math.exp(prof.rate)
    payload["inverse"] = {"radius": inv.radius, "tail_bound": inv.tail_bound,
                          "residual": inv.residual, "support": len(inv.element)}
    summary = f"decay rate {prof.rate:.6f} per shell (ratio {math.exp(prof.rate):.4f})"
    table = [[r, "shell_max", repr(m), "0.0", "0.000"] for r, m in zip(prof.radii, prof.maxima)]

    def fig(p):
        from .plotting import plot_decay
        plot_decay(prof, p, "homoclinic coefficients by shell")

    return JobResult(EXIT_OK, payload, summary, table, {"inverse_ms": ms}, fig)


RUNNERS = {"entropy": run_job, "fixcount": run_fixcount, "invert": run_invert,
           "mahler": run_mahler, "specdemo": run_specdemo, "decay": run_decay}


# -- output -----------------------------------------------------------------------------


def dumps(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["level_order", "method", "value", "error_bar", "wall_ms"])
    w.writerows(rows)
    return buf.getvalue()


def write_outputs(result: JobResult, out: Path, fmt: str, figures: bool, meta: dict):
    out.parent.mkdir(parents=True, exist_ok=True)
    json_path = out if fmt == "json" else out.with_suffix(".json")
    json_path.write_text(dumps(result.payload))
    written = [json_path]
    if fmt == "csv":
        out.write_text(to_csv(result.csv_rows))
        written.append(out)
    meta = dict(meta, timings=result.timings)
    meta_path = Path(str(json_path) + ".meta.json")
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")
    written.append(meta_path)
    if figures and result.figure is not None:
        png = out.with_suffix(".png")
        result.figure(png)
        written.append(png)
    return written


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="algentropy",
                                description="Entropy of principal algebraic actions.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, type=Path)
        s.add_argument("--out", type=Path)
        s.add_argument("--format", choices=["json", "csv"])
        s.add_argument("--threads", type=int, default=1)
        s.add_argument("--seed", type=int, default=0,
                       help="seed for randomized helpers; never changes reported values")
        s.add_argument("--no-figures", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    np.random.seed(args.seed)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error in {args.config}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_ERROR
    fmt = args.format or cfg.output_format
    out = args.out or (Path(cfg.output_path) if cfg.output_path
                       else Path(f"{args.config.stem}.{args.command}.{fmt}"))
    t0 = time.perf_counter()
    try:
        result = RUNNERS[args.command](cfg, threads=args.threads)
    except ConfigError as exc:
        print(f"config error in {args.config}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except CapacityError as exc:
        hint = f" (try: {exc.suggestion})" if exc.suggestion else ""
        print(f"capacity exceeded: {exc}{hint}", file=sys.stderr)
        return EXIT_ERROR
    except GluingError as exc:
        hint = (f"; achievable eps {exc.achievable_eps:.3g}"
                if exc.achievable_eps is not None else "")
        print(f"gluing failed: {exc}{hint}", file=sys.stderr)
        return EXIT_ERROR
    except (WindowError, InsufficientData, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    meta = {"command": args.command, "config": str(args.config), "threads": args.threads,
            "seed": args.seed, "version": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "total_ms": 1e3 * (time.perf_counter() - t0)}
    written = write_outputs(result, out, fmt, not args.no_figures, meta)
    print(result.summary)
    print("wrote " + ", ".join(str(p) for p in written), file=sys.stderr)
    return result.status


if __name__ == "__main__":
    sys.exit(main())
