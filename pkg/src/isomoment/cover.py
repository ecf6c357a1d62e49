"""
Covering curves of inner parallel sets
======================================

The offset arcs of ``S_t`` are traversed in the cyclic order of their
parameter intervals, and the terminal point ``q_k`` of each arc is joined
to the starting point ``p_{k+1}`` of the next one by a straight segment
``I_k``. The result ``Sigma_t`` is a closed, piecewise smooth and possibly
self-overlapping curve containing ``S_t``; its length is at most
``L - 2 pi t``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import cKDTree

from .curve import TWO_PI
from .offset import ParallelSet, disk_length, is_set_symmetric, join_tolerance
from .quadrature import panel_nodes
from .trace import Piece, segment_piece


class CoverError(ValueError):
    """The parallel set cannot be covered (empty or irregular level)."""


@dataclass(frozen=True, eq=False)
class CoverCurve:
    """The closed covering curve ``Sigma_t``.

    ``pieces`` alternates ``("arc", k)`` and ``("segment", k)`` entries;
    segment ``k`` runs from ``ends[k]`` (``q_k``) to ``starts[k+1]``
    (``p_{k+1}``). ``quad_pieces`` carry the matching quadrature rules and
    ``polylines`` the display samples, in the same order.
    """

    t: float
    pieces: tuple
    quad_pieces: tuple
    polylines: tuple
    starts: np.ndarray
    ends: np.ndarray
    segment_lengths: np.ndarray
    arc_lengths: np.ndarray
    length: float
    symmetric: bool
    curve_length: float
    parallel_set: ParallelSet | None = None

    @property
    def margin(self):
        return disk_length(self.curve_length, self.t) - self.length

    def trace(self):
        """The closed trace as one polyline (last point repeats the first)."""
        pts = np.vstack(self.polylines)
        return np.vstack((pts, pts[:1]))


def build_cover(ps: ParallelSet, curve=None):
    """Join the arcs of ``ps`` into the covering curve ``Sigma_t``."""
    if ps.empty:
        raise CoverError(f"S_t is empty at t = {ps.t:g}")
    if not ps.regular:
        raise CoverError(f"level t = {ps.t:g} is irregular: {'; '.join(ps.notes)}")
    curve = curve if curve is not None else ps.curve
    m = ps.m
    pieces, quads, lines, seg_len = [], [], [], []
    for k in range(m):
        pieces.append(("arc", k))
        quads.append(Piece(*ps.quad[k], kind="arc"))
        lines.append(ps.arcs[k])
        if ps.full:
            continue
        q, p_next = ps.ends[k], ps.starts[(k + 1) % m]
        pieces.append(("segment", k))
        quads.append(segment_piece(q, p_next))
        lines.append(np.vstack((q, p_next)))
        seg_len.append(float(np.hypot(*(p_next - q))))
    seg_len = np.array(seg_len)
    arc_len = np.array([w.sum() for _, w in ps.quad])
    pts = np.vstack(lines)
    tol = join_tolerance(curve) if curve is not None else 1e-6
    return CoverCurve(t=ps.t, pieces=tuple(pieces), quad_pieces=tuple(quads), polylines=tuple(lines),
                      starts=ps.starts, ends=ps.ends, segment_lengths=seg_len, arc_lengths=arc_len,
                      length=float(arc_len.sum() + seg_len.sum()), symmetric=is_set_symmetric(pts, tol),
                      curve_length=ps.curve_length, parallel_set=ps)


@dataclass(frozen=True)
class GapCheck:
    """Per-gap inequality ``|I_k| <= (a_{k+1} - b_k) - t * int kappa``."""

    k: int
    gap_length: float
    curvature_integral: float
    segment_length: float
    margin: float
    passed: bool


@dataclass(frozen=True)
class CoverReport:
    t: float
    gaps: tuple
    length: float
    bound: float
    margin: float
    tolerance: float
    closed: bool
    passed: bool


def _gap_curvature(curve, ub, ua_next):
    """``int kappa ds`` between native parameters ``ub < ua_next``."""
    nodes, w = panel_nodes(ub, ua_next, TWO_PI / 256)
    if len(nodes) == 0:
        return 0.0
    return float(np.dot(w, curve.geometry.kappa_speed(nodes)))


def verify_cover_bound(cc: CoverCurve, curve, rel_tol=1e-5):
    """Check the per-gap length inequalities and the global bound ``|Sigma_t| <= L - 2 pi t``.

    Segment lengths are taken from the pieces of ``cc`` (not recomputed from
    the parallel set), so a tampered cover is reported as failing.
    """
    ps = cc.parallel_set
    L, t = curve.length, cc.t
    tol = rel_tol * L
    gaps = []
    seg = [qp for qp, kind in zip(cc.quad_pieces, cc.pieces) if kind[0] == "segment"]
    if not ps.full:
        m = ps.m
        for k in range(m):
            ub = ps.u_intervals[k][1]
            ua = ps.u_intervals[(k + 1) % m][0]
            sa = ps.intervals[(k + 1) % m][0]
            if k == m - 1:
                ua += TWO_PI
                sa += L
            while ua < ub:
                ua += TWO_PI
                sa += L
            gap = sa - ps.intervals[k][1]
            kint = _gap_curvature(curve, ub, ua)
            length = seg[k].length
            margin = gap - t * kint - length
            gaps.append(GapCheck(k=k, gap_length=gap, curvature_integral=kint, segment_length=length,
                                 margin=margin, passed=margin >= -tol))
    # closure: each piece starts where the previous one ends
    firsts = [line[0] for line in cc.polylines]
    lasts = [line[-1] for line in cc.polylines]
    jt = join_tolerance(curve)
    closed = all(np.hypot(*(firsts[(i + 1) % len(firsts)] - lasts[i])) <= jt for i in range(len(lasts)))
    bound = disk_length(L, t)
    margin = bound - cc.length
    passed = closed and margin >= -tol and all(g.passed for g in gaps)
    return CoverReport(t=t, gaps=tuple(gaps), length=cc.length, bound=bound, margin=margin, tolerance=tol,
                       closed=closed, passed=passed)


def perturb_segments(cc: CoverCurve, delta):
    """A copy of ``cc`` whose joining segments are pushed apart by ``delta`` at both ends.

    Each segment endpoint moves ``delta`` away from the other endpoint (along
    the arc's outward direction for degenerate segments). Used to exercise
    the cover checker on a curve that violates the bounds.
    """
    ps = cc.parallel_set
    quads, lines, seg_len = [], [], []
    for kind, qp, line in zip(cc.pieces, cc.quad_pieces, cc.polylines):
        if kind[0] != "segment":
            quads.append(qp)
            lines.append(line)
            continue
        a, b = line
        d = b - a
        norm = np.hypot(*d)
        if norm > 0:
            e = d / norm
        else:
            e = np.array([1.0, 0.0])
        a2, b2 = a - delta * e, b + delta * e
        quads.append(segment_piece(a2, b2))
        lines.append(np.vstack((a2, b2)))
        seg_len.append(float(np.hypot(*(b2 - a2))))
    seg_len = np.array(seg_len)
    return CoverCurve(t=cc.t, pieces=cc.pieces, quad_pieces=tuple(quads), polylines=tuple(lines),
                      starts=cc.starts, ends=cc.ends, segment_lengths=seg_len, arc_lengths=cc.arc_lengths,
                      length=float(cc.arc_lengths.sum() + seg_len.sum()), symmetric=cc.symmetric,
                      curve_length=cc.curve_length, parallel_set=ps)


# ---------------------------------------------------------------------------
# refined Hartman bound


@dataclass(frozen=True)
class HartmanReport:
    t: float
    n_components: int
    length: float
    bound: float
    distances: tuple
    distance_sum: float
    plain_margin: float
    refined_margin: float
    tolerance: float
    passed: bool


def _component_samples(ps, comp, per_arc=512):
    """Offset samples of a component with the native parameter and bounds of each sample."""
    us, lo, hi = [], [], []
    for k in comp:
        ua, ub = ps.u_intervals[k]
        grid = np.linspace(ua, ub, per_arc)
        us.append(grid)
        lo.append(np.full(per_arc, ua))
        hi.append(np.full(per_arc, ub))
    u = np.concatenate(us)
    return ps.curve.offset(u, ps.t), u, np.concatenate(lo), np.concatenate(hi)


def _closest_between(ps, comp_a, comp_b):
    """Distance between two components: sample minimum refined on the offset parametrization."""
    if ps.curve is None:
        A = np.vstack([ps.arcs[k] for k in comp_a])
        B = np.vstack([ps.arcs[k] for k in comp_b])
        return float(cKDTree(B).query(A)[0].min())
    A, ua, alo, ahi = _component_samples(ps, comp_a)
    B, ub, blo, bhi = _component_samples(ps, comp_b)
    d, j = cKDTree(B).query(A)
    i = int(np.argmin(d))
    j = int(j[i])
    curve, t = ps.curve, ps.t

    def f(x):
        pts = curve.offset(np.asarray(x), t)
        return float(np.sum((pts[0] - pts[1]) ** 2))

    res = minimize(f, [ua[i], ub[j]], method="L-BFGS-B", bounds=[(alo[i], ahi[i]), (blo[j], bhi[j])],
                   options={"ftol": 1e-16, "gtol": 1e-14})
    return float(min(d[i], np.sqrt(max(res.fun, 0.0))))


def verify_hartman_refined(ps: ParallelSet, rel_tol=1e-5):
    """Check ``|S_t| + sum_n dist(Gamma_n, S_t minus Gamma_n) <= L - 2 pi t``.

    For a connected level the sum is empty and the check reduces to the
    plain bound ``|S_t| <= L - 2 pi t``.
    """
    L, t = ps.curve_length, ps.t
    tol = rel_tol * L
    bound = disk_length(L, t)
    comps = ps.components
    dists = []
    if len(comps) > 1:
        pair = {}
        for a in range(len(comps)):
            for b in range(a + 1, len(comps)):
                pair[a, b] = pair[b, a] = _closest_between(ps, comps[a], comps[b])
        for a in range(len(comps)):
            dists.append(min(pair[a, b] for b in range(len(comps)) if b != a))
    total = float(sum(dists))
    plain = bound - ps.length
    refined = plain - total
    return HartmanReport(t=t, n_components=len(comps), length=ps.length, bound=bound, distances=tuple(dists),
                         distance_sum=total, plain_margin=plain, refined_margin=refined, tolerance=tol,
                         passed=bool(refined >= -tol))
