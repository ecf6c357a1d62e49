"""
Distance function, in-radius and inner parallel sets
====================================================

``S_t`` is the set of points of the domain at distance exactly ``t`` from
the boundary. For a regular level it is traced by ``Phi(s, t) = gamma(s) +
t n(s)`` over finitely many parameter intervals ``[a_k, b_k]``; the rest of
the offset trace ``alpha_t`` is cut off because some other boundary point
is closer than ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import shapely
from scipy.optimize import minimize
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .curve import TWO_PI, SampledCurve, _polygon_is_simple, kappa_max
from .quadrature import panel_nodes

BISECTION_STEPS = 40
_PANEL_WIDTH = TWO_PI / 256


class OffsetError(ValueError):
    """Offset depth outside the admissible range."""


def dist_tolerance(curve):
    """Activity / membership tolerance, ten sample spacings."""
    return 10.0 * curve.h


def join_tolerance(curve):
    """Tolerance for matching arc endpoints, five sample spacings."""
    return 5.0 * curve.h


# ---------------------------------------------------------------------------
# distance to the boundary


def _refine_feet(curve, x, u0, lo, hi, iterations=10):
    """Safeguarded Newton for the nearest curve point to ``x[i]`` near ``u0[i]``."""
    geom = curve.geometry
    u = u0.copy()
    width = hi - lo
    for _ in range(iterations):
        pos, d1, d2 = geom.eval(u)
        diff = pos - x
        g = np.einsum("ij,ij->i", diff, d1)
        gp = np.einsum("ij,ij->i", d1, d1) + np.einsum("ij,ij->i", diff, d2)
        step = np.where(gp > 0, g / np.where(gp > 0, gp, 1.0), np.sign(g) * 0.25 * width)
        u = np.clip(u - step, lo, hi)
    pos, _, _ = geom.eval(u)
    return u, np.hypot(*(pos - x).T)


def distance_to_boundary(x, curve, chunk=512):
    """Distance from ``x`` (a point or an ``(N, 2)`` array) to the curve.

    A brute-force pass over the samples finds every discrete local minimum
    that could hold the global one; each is refined by Newton projection
    onto the parametric curve.
    """
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    u = curve.u
    u_ext = np.concatenate(([u[-1] - TWO_PI], u, [u[0] + TWO_PI]))
    kabs = float(np.abs(curve.curvatures).max())
    out = np.empty(len(X))
    for start in range(0, len(X), chunk):
        P = X[start:start + chunk]
        D = cdist(P, curve.points)
        rowmin = D.min(axis=1)
        eta = np.minimum(0.5 * curve.h, curve.h**2 * (1.0 / (8 * np.maximum(rowmin, 1e-300)) + kabs / 8)) + 1e-14
        local = (D <= np.roll(D, 1, axis=1)) & (D <= np.roll(D, -1, axis=1)) & (D <= (rowmin + eta)[:, None])
        rows, cols = np.nonzero(local)
        _, dist = _refine_feet(curve, P[rows], u[cols], u_ext[cols], u_ext[cols + 2])
        best = rowmin.copy()
        np.minimum.at(best, rows, dist)
        out[start:start + chunk] = best
    return float(out[0]) if single else out


def interior_mask(curve, x, y):
    """Even-odd membership of the points ``(x, y)`` in the sampled domain."""
    poly = shapely.Polygon(curve.points)
    return shapely.contains_xy(poly, x, y)


def inradius(curve, grid=160, candidates=6):
    """Maximum of the boundary distance over the domain and a maximizer.

    A coarse grid over the bounding box (interior points only) seeds local
    Nelder-Mead ascents on the refined distance function.
    """
    lo, hi = curve.points.min(axis=0), curve.points.max(axis=0)
    xs = np.linspace(lo[0], hi[0], grid)
    ys = np.linspace(lo[1], hi[1], grid)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    inside = interior_mask(curve, gx.ravel(), gy.ravel()).reshape(gx.shape)
    if not inside.any():
        raise OffsetError("no interior grid point; domain too thin for the grid resolution")
    tree = cKDTree(curve.points)
    d = np.zeros(gx.shape)
    d[inside], _ = tree.query(np.column_stack((gx[inside], gy[inside])))

    from scipy.ndimage import maximum_filter

    peaks = inside & (d == maximum_filter(d, size=3, mode="constant"))
    order = np.argsort(d[peaks])[::-1][:candidates]
    seeds = np.column_stack((gx[peaks], gy[peaks]))[order]
    spacing = max(xs[1] - xs[0], ys[1] - ys[0])

    best_val, best_x = -np.inf, None
    for seed in seeds:
        simplex = np.array([seed, seed + [spacing, 0.0], seed + [0.0, spacing]])
        res = minimize(lambda p: -distance_to_boundary(p, curve), seed, method="Nelder-Mead",
                       options={"initial_simplex": simplex, "xatol": 1e-11, "fatol": 1e-14,
                                "maxiter": 4000, "maxfev": 8000})
        val = -float(res.fun)
        if val > best_val and interior_mask(curve, res.x[:1], res.x[1:]).all():
            best_val, best_x = val, np.asarray(res.x, dtype=float)
    return best_val, best_x


# ---------------------------------------------------------------------------
# offset trace


@dataclass(frozen=True, eq=False)
class OffsetTrace:
    """The unpruned offset ``alpha_t(s) = gamma(s) + t n(s)`` at the curve samples."""

    t: float
    points: np.ndarray
    length: float


def alpha_curve(curve, t):
    """Offset trace and its length ``int |1 - t kappa| ds``."""
    pts = curve.points + t * curve.normals
    length = float(np.sum(np.abs(1.0 - t * curve.curvatures)) * curve.h)
    return OffsetTrace(t=float(t), points=pts, length=length)


# ---------------------------------------------------------------------------
# inner parallel set


@dataclass(frozen=True, eq=False)
class ParallelSet:
    """The inner parallel set ``S_t`` of a sampled curve.

    ``intervals`` are arc-length intervals ``(a_k, b_k)`` in cyclic order
    with ``a_k`` in ``[0, L)``; ``b_k`` may exceed ``L`` when an interval
    wraps. ``arcs`` hold display samples of each offset arc, ``quad`` the
    ``(nodes, weights)`` pairs of a line-integral rule over the arc.
    ``starts``/``ends`` are the arc endpoints ``p_k``/``q_k``;
    ``successor[k]`` is the arc whose start continues arc ``k`` inside its
    closed component.
    """

    t: float
    curve_length: float
    intervals: tuple
    u_intervals: tuple
    arcs: tuple
    quad: tuple
    starts: np.ndarray
    ends: np.ndarray
    components: tuple
    successor: tuple
    length: float
    regular: bool
    empty: bool = False
    full: bool = False
    notes: tuple = field(default=())
    curve: SampledCurve | None = field(default=None, repr=False)

    @property
    def m(self):
        return len(self.intervals)

    @property
    def hartman_margin(self):
        return self.curve_length - TWO_PI * self.t - self.length

    def points(self):
        """All display samples stacked into one array."""
        if self.empty:
            return np.empty((0, 2))
        return np.vstack(self.arcs)


def _empty_set(curve, t, notes=()):
    return ParallelSet(t=float(t), curve_length=curve.length, intervals=(), u_intervals=(), arcs=(), quad=(),
                       starts=np.empty((0, 2)), ends=np.empty((0, 2)), components=(), successor=(), length=0.0,
                       regular=True, empty=True, notes=tuple(notes), curve=curve)


def _runs(active):
    """Cyclic runs of True as ``(first, last)`` index pairs, ``last`` unwrapped."""
    n = len(active)
    if active.all():
        return None
    if not active.any():
        return []
    # rotate so index 0 is inactive
    shift = int(np.argmin(active))
    rolled = np.roll(active, -shift)
    edges = np.diff(np.concatenate(([0], rolled.astype(int), [0])))
    starts = np.nonzero(edges == 1)[0]
    ends = np.nonzero(edges == -1)[0] - 1
    out = []
    for a, b in zip(starts, ends):
        a0 = (a + shift) % n
        out.append((a0, a0 + (b - a)))
    out.sort()
    return out


def parallel_set(curve: SampledCurve, t, r_i=None):
    """Compute ``S_t`` for ``0 <= t < r_i``.

    Samples of ``Phi(., t)`` are classified as active when no boundary
    sample is closer than ``t``; classification next to each transition is
    redone with the refined distance, and interval endpoints are located
    by bisection on the refined predicate. A level is marked irregular when
    its structure is not resolved at the sampling resolution: arcs that do
    not close up into loops, intervals or gaps shorter than two sample
    spacings, or curvature above ``1/t`` inside an active interval.

    Raises
    ------
    OffsetError
        if ``t < 0`` or ``t`` exceeds the in-radius.
    """
    t = float(t)
    if t < 0:
        raise OffsetError("offset depth must be non-negative")
    n, L, h = curve.n, curve.length, curve.h
    u = curve.u
    u_ext = np.concatenate((u, u + TWO_PI, u + 2 * TWO_PI))
    eps = 1e-10 * max(L, 1.0)

    phi = curve.points + t * curve.normals
    if t == 0.0:
        active = np.ones(n, dtype=bool)
    else:
        d, _ = cKDTree(curve.points).query(phi)
        active = d >= t - eps

    def precise(uu):
        uu = np.atleast_1d(uu)
        return distance_to_boundary(curve.offset(uu, t), curve) >= t - eps

    if t > 0:
        # re-classify samples adjacent to transitions with the refined distance
        for _ in range(4):
            trans = np.nonzero(active != np.roll(active, 1))[0]
            if len(trans) == 0:
                break
            near = np.unique(np.concatenate([(trans + k) % n for k in (-2, -1, 0, 1)]))
            refined = precise(u[near])
            if np.array_equal(refined, active[near]):
                break
            active[near] = refined

    runs = _runs(active)
    if runs is not None and not runs:
        if r_i is None:
            r_i, _ = inradius(curve)
        if t <= r_i + dist_tolerance(curve):
            return _empty_set(curve, t, notes=("no active samples",))
        raise OffsetError(f"t = {t:g} exceeds the in-radius {r_i:g}")

    notes = []
    if runs is None:
        u_intervals = [(0.0, TWO_PI)]
        intervals = [(0.0, L)]
        full = True
    else:
        full = False
        firsts = np.array([r[0] for r in runs])
        lasts = np.array([r[1] for r in runs])
        # bracket [first-1, first] for each start and [last, last+1] for each end
        out = np.concatenate((u_ext[firsts + n - 1], u_ext[lasts + n + 1])) - TWO_PI
        inn = np.concatenate((u_ext[firsts + n], u_ext[lasts + n])) - TWO_PI
        ends_u = _bisect(precise, out, inn)
        u_intervals, intervals = [], []
        for ua, ub in zip(ends_u[:len(runs)] % TWO_PI, ends_u[len(runs):]):
            while ub <= ua:
                ub += TWO_PI
            u_intervals.append((float(ua), float(ub)))
        u_intervals.sort()
        for ua, ub in u_intervals:
            sa = curve.arclength.s_of_u(ua)
            sb = sa + curve.arclength.s_of_u(ub) - curve.arclength.s_of_u(ua)
            intervals.append((sa, sb))

    arcs, quad, starts, ends = [], [], [], []
    geom = curve.geometry
    max_tk = -np.inf
    for ua, ub in u_intervals:
        nodes, w = panel_nodes(ua, ub, _PANEL_WIDTH)
        _, d1, _ = geom.eval(nodes)
        speed = np.hypot(d1[:, 0], d1[:, 1])
        ks = geom.kappa_speed(nodes)
        weights = w * (speed - t * ks)
        max_tk = max(max_tk, float(np.max(t * ks / speed)))
        quad.append((curve.offset(nodes, t), weights))
        inner = u_ext[(u_ext > ua) & (u_ext < ub)]
        arc_u = np.concatenate(([ua], inner, [ub]))
        arcs.append(curve.offset(arc_u, t))
        starts.append(arcs[-1][0])
        ends.append(arcs[-1][-1])
    starts, ends = np.array(starts), np.array(ends)
    length = float(sum(w.sum() for _, w in quad))

    regular = True
    if max_tk > 1.0 + 1e-6:
        regular = False
        notes.append(f"curvature exceeds 1/t on an active interval (t*kappa = {max_tk:.6g})")
    if full:
        successor = (0,)
    else:
        lens = [b - a for a, b in intervals]
        gaps = [intervals[(k + 1) % len(intervals)][0] + (L if k == len(intervals) - 1 else 0.0) - intervals[k][1]
                for k in range(len(intervals))]
        if min(lens) < 2 * h or min(gaps) < 2 * h:
            regular = False
            notes.append("interval or gap shorter than two sample spacings")
        D = cdist(ends, starts)
        succ = np.argmin(D, axis=1)
        if D[np.arange(len(succ)), succ].max() > join_tolerance(curve) or len(set(succ.tolist())) != len(succ):
            regular = False
            notes.append("offset arcs do not close into loops")
        successor = tuple(int(k) for k in succ)
    components = _cycles(successor)

    return ParallelSet(t=t, curve_length=L, intervals=tuple(intervals), u_intervals=tuple(u_intervals),
                       arcs=tuple(arcs), quad=tuple(quad), starts=starts, ends=ends, components=components,
                       successor=successor, length=length, regular=regular, full=full, notes=tuple(notes),
                       curve=curve)


def _bisect(pred, u_out, u_in, steps=BISECTION_STEPS):
    """Boundaries of ``pred`` between inactive ``u_out`` and active ``u_in`` (arrays)."""
    u_out = np.array(u_out, dtype=float)
    u_in = np.array(u_in, dtype=float)
    for _ in range(steps):
        mid = 0.5 * (u_out + u_in)
        ok = pred(mid)
        u_in = np.where(ok, mid, u_in)
        u_out = np.where(ok, u_out, mid)
    return 0.5 * (u_out + u_in)


def _cycles(successor):
    seen = set()
    comps = []
    for k in range(len(successor)):
        if k in seen:
            continue
        cyc = []
        j = k
        while j not in seen and j < len(successor):
            seen.add(j)
            cyc.append(j)
            j = successor[j]
        comps.append(tuple(cyc))
    return tuple(comps)


def is_set_symmetric(points, tol):
    """Hausdorff test of a point cloud against its reflection through the origin."""
    if len(points) == 0:
        return True
    d1, _ = cKDTree(points).query(-points)
    return bool(d1.max() <= tol)


def t_star_estimate(curve, r_i=None, steps=30):
    """Largest ``t`` (to bisection resolution) below which ``Phi(., t)`` stays injective.

    Injectivity at a level means ``t * kappa_max < 1`` and a simple offset
    polygon; the levels are assumed to be nested, so bisection applies.
    """
    if r_i is None:
        r_i, _ = inradius(curve)
    kmax = kappa_max(curve)

    def injective(t):
        if t * kmax >= 1.0:
            return False
        return _polygon_is_simple(curve.points + t * curve.normals)

    lo, hi = 0.0, float(r_i)
    if injective(hi):
        return hi
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if injective(mid):
            lo = mid
        else:
            hi = mid
    return lo


def hausdorff(a, b):
    """Symmetric Hausdorff distance between two point clouds."""
    da, _ = cKDTree(b).query(a)
    db, _ = cKDTree(a).query(b)
    return float(max(da.max(), db.max()))


def disk_length(L, t):
    """``L - 2 pi t``, the length bound for ``S_t``."""
    return L - 2.0 * math.pi * t
