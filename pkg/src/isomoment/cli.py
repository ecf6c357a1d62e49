"""Command-line verification runs.

Subcommands::

    isomoment info     --spec CURVE
    isomoment sweep    --spec CURVE [--t-min A --t-max B] [--steps K] [--p P] [--format csv|report]
    isomoment cover    --spec CURVE --t T [--format csv|svg|report]
    isomoment fuglede  --p P [--profile sin2] [--eps-lo 1e-3 --eps-hi 8e-3]
    isomoment optimize --p P [--modes 4] [--restarts 20] --seed S

Exit status is 0 when every check passed, 1 when a check failed and 2 on
bad input or a runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .cover import build_cover, verify_cover_bound, verify_hartman_refined
from .curve import (DEFAULT_N, TWO_PI, CurveSpecError, SamplingError, is_centrally_symmetric, is_simple, kappa_max,
                    parse_spec, sample, total_curvature)
from .fuglede import RadialProfile, FugledeError, expansion_check, optimize_Cp
from .moments import MomentError, centroid, moment_report, mom_tolerance
from .offset import OffsetError, inradius, join_tolerance, parallel_set, t_star_estimate
from .trace import as_pieces

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2

SWEEP_COLUMNS = ("t", "regular", "n_components", "len_St", "hartman_margin", "refined_margin", "cover_len",
                 "cover_margin", "centroid_x", "centroid_y", "moment_p", "disk_ref", "moment_margin",
                 "wirtinger_lhs", "wirtinger_rhs")


class UsageError(ValueError):
    """Bad command-line input."""


@dataclass
class Record:
    name: str
    measured: float | None = None
    reference: float | None = None
    margin: float | None = None
    passed: bool | None = None
    regular: bool = True
    tolerance: float | None = None
    t: float | None = None
    note: str = ""


@dataclass
class RunReport:
    command: str
    inputs: dict
    records: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)

    @property
    def summary(self):
        passed = sum(1 for r in self.records if r.passed is True)
        failed = sum(1 for r in self.records if r.passed is False)
        return {"passed": passed, "failed": failed, "unchecked": len(self.records) - passed - failed,
                "total": len(self.records)}

    def add(self, *records):
        self.records.extend(records)

    def to_dict(self):
        return _clean({"command": self.command, "inputs": self.inputs, "values": self.values,
                       "records": [vars(r) for r in self.records], "summary": self.summary,
                       "provenance": self.provenance})

    @property
    def exit_code(self):
        return EXIT_FAIL if self.summary["failed"] else EXIT_OK


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def _provenance(args, **extra):
    out = {"tool": "isomoment", "version": __version__, "timestamp": datetime.now(timezone.utc).isoformat()}
    for key in ("n", "seed"):
        if hasattr(args, key):
            out[key] = getattr(args, key)
    out.update(extra)
    return out


def _load_curve(args):
    spec = parse_spec(Path(args.spec))
    curve = sample(spec, args.n)
    return spec, curve


# ---------------------------------------------------------------------------
# info


def cmd_curve_info(args):
    spec, curve = _load_curve(args)
    r_i, center = inradius(curve)
    report = RunReport(command="info", inputs={"spec": spec.to_dict(), "n": args.n})
    tk = total_curvature(curve)
    kmax = kappa_max(curve)
    report.values = {"length": curve.length, "total_curvature": tk, "kappa_max": kmax, "inradius": r_i,
                     "inradius_center": center, "t_star": t_star_estimate(curve, r_i),
                     "simple": is_simple(curve), "centrally_symmetric": is_centrally_symmetric(curve),
                     "signed_area": curve.signed_area}
    report.add(Record("total_curvature", tk, TWO_PI, TWO_PI - tk, abs(tk - TWO_PI) <= 1e-6, tolerance=1e-6),
               Record("simple", float(is_simple(curve)), 1.0, None, is_simple(curve), tolerance=0.0),
               Record("inradius_vs_focal", r_i, 1.0 / kmax, r_i - 1.0 / kmax, r_i >= 1.0 / kmax - 1e-6,
                      tolerance=1e-6))
    report.provenance = _provenance(args)
    return report


# ---------------------------------------------------------------------------
# sweep


def default_grid(r_i, steps):
    """``steps`` midpoints of an even partition of ``[0, r_i]``."""
    return (np.arange(steps) + 0.5) * (r_i / steps)


def sweep_level(curve, t, p, r_i, x0):
    """One row of the sweep table and its check records."""
    row = dict.fromkeys(SWEEP_COLUMNS, "")
    row["t"] = t
    ps = parallel_set(curve, t, r_i)
    if ps.empty or not ps.regular:
        row["regular"] = False
        note = "empty" if ps.empty else "; ".join(ps.notes)
        return row, [Record("level", regular=False, t=t, note=note)]
    L = curve.length
    cover = build_cover(ps, curve)
    cb = verify_cover_bound(cover, curve)
    hr = verify_hartman_refined(ps)
    mr = moment_report(curve, ps, p, x0, cover)
    lt = 1e-5 * L
    wtol = 1e-8 * L**3
    row.update(regular=True, n_components=len(ps.components), len_St=ps.length, hartman_margin=hr.plain_margin,
               refined_margin=hr.refined_margin, cover_len=cover.length, cover_margin=cb.margin,
               centroid_x=mr.centroid[0], centroid_y=mr.centroid[1], moment_p=mr.moment,
               disk_ref=mr.disk_reference, moment_margin=mr.margin, wirtinger_lhs=mr.wirtinger_lhs,
               wirtinger_rhs=mr.wirtinger_rhs)
    records = [
        Record("hartman", ps.length, hr.bound, hr.plain_margin, hr.plain_margin >= -lt, tolerance=lt, t=t),
        Record("hartman_refined", ps.length + hr.distance_sum, hr.bound, hr.refined_margin, hr.passed,
               tolerance=hr.tolerance, t=t),
        Record("cover_length", cover.length, cb.bound, cb.margin, cb.passed, tolerance=cb.tolerance, t=t),
        Record("moment", mr.moment, mr.disk_reference, mr.margin, mr.passed, tolerance=mr.tolerance, t=t),
        Record("wirtinger", mr.wirtinger_lhs, mr.wirtinger_rhs, mr.wirtinger_rhs - mr.wirtinger_lhs,
               mr.wirtinger_lhs <= mr.wirtinger_rhs + wtol, tolerance=wtol, t=t),
    ]
    if mr.condition_passed is not None:
        records.append(Record("fixed_center_condition", mr.condition_lhs, mr.condition_rhs,
                              mr.condition_rhs - mr.condition_lhs, mr.condition_passed,
                              tolerance=mom_tolerance(L, 2.0), t=t))
    return row, records


def _sweep_job(job):
    spec_dict, n, t, p, r_i, x0 = job
    curve = sample(parse_spec(spec_dict), n)
    return sweep_level(curve, t, p, r_i, x0)


def cmd_sweep(args):
    if not 0.0 < args.p <= 2.0:
        raise UsageError("--p must lie in (0, 2]")
    if args.steps < 1:
        raise UsageError("--steps must be positive")
    spec, curve = _load_curve(args)
    r_i, _ = inradius(curve)
    if args.t_min is None and args.t_max is None:
        grid = default_grid(r_i, args.steps)
    else:
        lo = 0.0 if args.t_min is None else args.t_min
        hi = args.t_max if args.t_max is not None else r_i * (1 - 0.5 / args.steps)
        if not 0.0 <= lo < hi < r_i:
            raise UsageError(f"need 0 <= t-min < t-max < r_i = {r_i:.6g}")
        grid = np.linspace(lo, hi, args.steps)

    # the fixed center of the condition check: origin for symmetric curves,
    # otherwise the centroid of S_t at the smallest regular level
    x0 = np.zeros(2) if is_centrally_symmetric(curve) else None
    if x0 is None:
        for t in grid:
            ps = parallel_set(curve, t, r_i)
            if ps.regular and not ps.empty:
                x0 = centroid(as_pieces(ps))
                break

    jobs = [(spec.to_dict(), args.n, float(t), args.p, r_i, x0) for t in grid]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_job, jobs))
    else:
        results = [sweep_level(curve, float(t), args.p, r_i, x0) for t in grid]

    report = RunReport(command="sweep", inputs={"spec": spec.to_dict(), "n": args.n, "p": args.p,
                                                "grid": [float(t) for t in grid]})
    rows = []
    for row, records in results:
        rows.append(row)
        report.add(*records)
    if not any(row["regular"] for row in rows):
        raise UsageError("no regular level on the grid")
    report.values = {"length": curve.length, "inradius": r_i, "fixed_center": x0,
                     "components": [row["n_components"] for row in rows]}
    report.provenance = _provenance(args, tolerances={"hartman": 1e-5 * curve.length,
                                                      "moment": mom_tolerance(curve.length, args.p),
                                                      "join": join_tolerance(curve)})
    report.rows = rows
    return report


def sweep_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in SWEEP_COLUMNS])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


# ---------------------------------------------------------------------------
# cover export


def cmd_cover_export(args):
    if args.t is None:
        raise UsageError("--t is required")
    spec, curve = _load_curve(args)
    r_i, _ = inradius(curve)
    if not 0.0 <= args.t < r_i:
        raise UsageError(f"t = {args.t} outside [0, r_i = {r_i:.6g})")
    ps = parallel_set(curve, args.t, r_i)
    if ps.empty or not ps.regular:
        raise UsageError(f"level t = {args.t} is not regular")
    cover = build_cover(ps, curve)
    cb = verify_cover_bound(cover, curve)
    report = RunReport(command="cover", inputs={"spec": spec.to_dict(), "n": args.n, "t": args.t})
    report.add(Record("cover_length", cover.length, cb.bound, cb.margin, cb.passed, tolerance=cb.tolerance, t=args.t),
               Record("closed", float(cb.closed), 1.0, None, cb.closed, tolerance=join_tolerance(curve), t=args.t))
    for g in cb.gaps:
        report.add(Record(f"gap_{g.k}", g.segment_length, g.gap_length - args.t * g.curvature_integral, g.margin,
                          g.passed, tolerance=cb.tolerance, t=args.t))
    report.values = {"pieces": [list(p) for p in cover.pieces], "n_components": len(ps.components),
                     "segment_lengths": cover.segment_lengths, "symmetric": cover.symmetric}
    report.provenance = _provenance(args)
    report.cover, report.curve, report.ps = cover, curve, ps
    return report


def cover_csv(cover):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("piece", "kind", "index", "x", "y"))
    for i, ((kind, k), line) in enumerate(zip(cover.pieces, cover.polylines)):
        for x, y in line:
            writer.writerow((i, kind, k, repr(float(x)), repr(float(y))))
    return buf.getvalue()


def cover_svg(curve, ps, cover, size=600):
    pts = curve.points
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    pad = 0.05 * float((hi - lo).max())
    lo, hi = lo - pad, hi + pad
    scale = size / float((hi - lo).max())

    def path(line, closed=False):
        xy = (line - lo) * scale
        xy[:, 1] = size - xy[:, 1]
        d = "M " + " L ".join(f"{x:.3f} {y:.3f}" for x, y in xy)
        return d + (" Z" if closed else "")

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
             f'<path d="{path(pts, True)}" fill="none" stroke="black" stroke-width="1.5"/>']
    for kind, line in zip(cover.pieces, cover.polylines):
        colour = "#1f77b4" if kind[0] == "arc" else "#d62728"
        parts.append(f'<path d="{path(line)}" fill="none" stroke="{colour}" stroke-width="2"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# Fuglede expansion and the optimizer


def parse_profile(text):
    """``sin2``/``cosN``-style names or a JSON object ``{"mean":, "cos": [...], "sin": [...]}``."""
    text = text.strip()
    for kind in ("sin", "cos"):
        if text.startswith(kind) and text[3:].isdigit():
            return RadialProfile.mode(int(text[3:]), kind)
    try:
        doc = json.loads(Path(text).read_text() if not text.startswith("{") else text)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read profile {text!r}: {exc}") from exc
    return RadialProfile(mean=float(doc.get("mean", 0.0)), cos_coeffs=doc.get("cos", ()), sin_coeffs=doc.get("sin", ()))


def cmd_fuglede(args):
    r = parse_profile(args.profile)
    eps = np.geomspace(args.eps_lo, args.eps_hi, args.eps_count)
    rep = expansion_check(r, args.p, eps, args.n)
    report = RunReport(command="fuglede", inputs={"p": args.p, "profile": vars(r), "eps": list(eps), "n": args.n})
    report.add(Record("parseval_agreement", rep.F_quadrature, rep.F_parseval, rep.F_parseval - rep.F_quadrature,
                      rep.agreement, tolerance=1e-8 * (1 + abs(rep.F_parseval))),
               Record("expansion_coefficient", rep.fitted_quadratic_coeff, rep.expected_coeff,
                      rep.relative_error, rep.relative_error <= 0.02, tolerance=0.02))
    report.values = {"F": rep.F_quadrature, "G": rep.G_values, "fitted": rep.fitted_quadratic_coeff}
    report.provenance = _provenance(args)
    return report


def cmd_optimize(args):
    res = optimize_Cp(args.p, args.modes, args.restarts, args.budget, args.seed)
    report = RunReport(command="optimize", inputs={"p": args.p, "modes": args.modes, "restarts": args.restarts,
                                                   "budget": args.budget, "seed": args.seed})
    if args.p <= 2:
        rec = Record("lower_bound_Cp", res.best_J, 1.0, 1.0 - res.best_J, res.best_J <= 1 + 1e-4, tolerance=1e-4)
    else:
        rec = Record("lower_bound_Cp", res.best_J, 1.0, 1.0 - res.best_J, None,
                     note="exploratory: a lower bound on C_p, not its value")
    report.add(rec)
    report.values = {"best_J": res.best_J, "lower_bound": True, "profile": vars(res.best_profile),
                     "trace": res.trace, "evaluations": res.evaluations,
                     "note": "search capped by the budget and the min-radius barrier; the supremum may be larger"}
    report.provenance = _provenance(args)
    return report


# ---------------------------------------------------------------------------
# entry point


def build_parser():
    parser = argparse.ArgumentParser(prog="isomoment", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, spec=True):
        if spec:
            p.add_argument("--spec", required=True, help="curve document (JSON or YAML)")
        p.add_argument("--n", type=int, default=DEFAULT_N, help="samples along the boundary")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--seed", type=int, default=0)

    info = sub.add_parser("info", help="length, curvature, in-radius and injectivity depth")
    common(info)
    info.add_argument("--format", choices=("report",), default="report")

    sweep = sub.add_parser("sweep", help="verify the length and moment inequalities over offset depths")
    common(sweep)
    sweep.add_argument("--t-min", type=float)
    sweep.add_argument("--t-max", type=float)
    sweep.add_argument("--steps", type=int, default=50)
    sweep.add_argument("--p", type=float, default=2.0)
    sweep.add_argument("--jobs", type=int, default=1, help="worker processes")
    sweep.add_argument("--format", choices=("csv", "report"), default="csv")

    cover = sub.add_parser("cover", help="export the covering curve at one depth")
    common(cover)
    cover.add_argument("--t", type=float)
    cover.add_argument("--format", choices=("csv", "svg", "report"), default="csv")

    fug = sub.add_parser("fuglede", help="second-order expansion around the circle")
    common(fug, spec=False)
    fug.add_argument("--p", type=float, required=True)
    fug.add_argument("--profile", default="sin2")
    fug.add_argument("--eps-lo", type=float, default=1e-3)
    fug.add_argument("--eps-hi", type=float, default=8e-3)
    fug.add_argument("--eps-count", type=int, default=6)
    fug.add_argument("--format", choices=("report",), default="report")

    opt = sub.add_parser("optimize", help="search symmetric radial curves for large J_p")
    common(opt, spec=False)
    opt.add_argument("--p", type=float, required=True)
    opt.add_argument("--modes", type=int, default=4)
    opt.add_argument("--restarts", type=int, default=20)
    opt.add_argument("--budget", type=int, default=2000)
    opt.add_argument("--format", choices=("report",), default="report")
    return parser


COMMANDS = {"info": cmd_curve_info, "sweep": cmd_sweep, "cover": cmd_cover_export, "fuglede": cmd_fuglede,
            "optimize": cmd_optimize}


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = COMMANDS[args.command](args)
    except (UsageError, CurveSpecError, SamplingError, OffsetError, MomentError, FugledeError, ValueError) as exc:
        kind = "not simple" if "not simple" in str(exc) else type(exc).__name__
        diag = {"command": args.command, "error": kind, "message": str(exc)}
        sys.stderr.write(json.dumps(diag) + "\n")
        return EXIT_ERROR

    fmt = args.format
    if args.command == "sweep" and fmt == "csv":
        _emit(sweep_csv(report.rows), args.out)
    elif args.command == "cover" and fmt == "csv":
        _emit(cover_csv(report.cover), args.out)
    elif args.command == "cover" and fmt == "svg":
        _emit(cover_svg(report.curve, report.ps, report.cover), args.out)
    else:
        _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.out)
    s = report.summary
    sys.stderr.write(f"{args.command}: {s['passed']} passed, {s['failed']} failed, {s['unchecked']} unchecked\n")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
