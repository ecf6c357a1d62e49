"""
Winding numbers of open arcs
============================

The winding number of an arc ``Gamma`` about a point ``x0`` is the net
change of a continuous angle function of ``gamma(s) - x0`` along the arc.
At the endpoints of the arc the angle function is not defined; there the
winding number is the limit over points approaching the endpoint from
outside the arc, which does not depend on how the arc is extended.

Arcs are built from parametric pieces (segments, circular arcs, general
parametric curves) and resampled uniformly in arc length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import shapely
from scipy.integrate import simpson

from .quadrature import ArcLengthMap

JUMP_LIMIT = 0.5 * math.pi
MAX_RESAMPLE = 3
DEFAULT_ARC_N = 2049


class WindingError(ValueError):
    """Winding number undefined or not resolved at the sampling resolution."""


class HypothesisError(ValueError):
    """Arc configuration does not satisfy the tangency hypothesis."""


def _rot90(v):
    return np.stack((-v[..., 1], v[..., 0]), -1)


# ---------------------------------------------------------------------------
# paths


class ParametricPiece:
    """A regular parametric curve on ``[u0, u1]``.

    ``func(u)`` returns ``(pos, d1, d2)`` as ``(N, 2)`` arrays.
    """

    def __init__(self, func, u0, u1, unit_speed=False):
        self.func = func
        self.u0, self.u1 = float(u0), float(u1)
        if unit_speed:
            self.map = None
            self.length = self.u1 - self.u0
        else:
            self.map = ArcLengthMap(self._speed, self.u0, self.u1, panels=256)
            self.length = self.map.length

    def _speed(self, u):
        _, d1, _ = self.func(u)
        return np.hypot(d1[:, 0], d1[:, 1])

    def eval_s(self, s):
        """Position, unit tangent and signed curvature at local arc length ``s``."""
        s = np.asarray(s, dtype=float)
        u = self.u0 + s if self.map is None else self.map.u_of_s(s)
        pos, d1, d2 = self.func(np.atleast_1d(u))
        sp = np.hypot(d1[:, 0], d1[:, 1])
        kap = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / sp**3
        return pos, d1 / sp[:, None], kap


def segment_piece(p, q):
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    length = float(np.hypot(*(q - p)))
    if length == 0:
        raise ValueError("degenerate segment")
    e = (q - p) / length

    def func(u):
        u = np.atleast_1d(u)
        return p + u[:, None] * e, np.tile(e, (len(u), 1)), np.zeros((len(u), 2))

    return ParametricPiece(func, 0.0, length, unit_speed=True)


def circle_piece(center, radius, theta0, theta1):
    """Circular arc from angle ``theta0`` to ``theta1`` (clockwise when ``theta1 < theta0``)."""
    c = np.asarray(center, dtype=float)
    sign = 1.0 if theta1 >= theta0 else -1.0
    length = radius * abs(theta1 - theta0)

    def func(u):
        th = theta0 + sign * np.atleast_1d(u) / radius
        e = np.stack((np.cos(th), np.sin(th)), -1)
        return c + radius * e, sign * _rot90(e), -e / radius

    return ParametricPiece(func, 0.0, length, unit_speed=True)


class Path:
    """Concatenation of parametric pieces, evaluated by global arc length."""

    def __init__(self, pieces):
        self.pieces = list(pieces)
        self.offsets = np.concatenate(([0.0], np.cumsum([p.length for p in self.pieces])))
        self.length = float(self.offsets[-1])

    def eval_s(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        idx = np.clip(np.searchsorted(self.offsets, s, side="right") - 1, 0, len(self.pieces) - 1)
        pos = np.empty((len(s), 2))
        tan = np.empty((len(s), 2))
        kap = np.empty(len(s))
        for k in np.unique(idx):
            sel = idx == k
            local = np.clip(s[sel] - self.offsets[k], 0.0, self.pieces[k].length)
            pos[sel], tan[sel], kap[sel] = self.pieces[k].eval_s(local)
        return pos, tan, kap


# ---------------------------------------------------------------------------
# arcs


@dataclass(frozen=True, eq=False)
class OpenArc:
    """A non-closed arc sampled at ``n`` points equally spaced in arc length."""

    s: np.ndarray
    points: np.ndarray
    tangents: np.ndarray
    curvatures: np.ndarray
    simple: bool
    path: Path | None = field(default=None, repr=False)

    @property
    def n(self):
        return len(self.s)

    @property
    def length(self):
        return float(self.s[-1] - self.s[0])

    @classmethod
    def from_path(cls, path, n=DEFAULT_ARC_N):
        s = np.linspace(0.0, path.length, n)
        pos, tan, kap = path.eval_s(s)
        simple = bool(shapely.is_simple(shapely.LineString(pos)))
        return cls(s=s, points=pos, tangents=tan, curvatures=kap, simple=simple, path=path)

    @classmethod
    def from_points(cls, points):
        """An arc from raw samples; tangents and curvatures by finite differences."""
        pts = np.asarray(points, dtype=float)
        seg = np.hypot(*np.diff(pts, axis=0).T)
        s = np.concatenate(([0.0], np.cumsum(seg)))
        tan = np.gradient(pts, s, axis=0)
        tan /= np.hypot(tan[:, 0], tan[:, 1])[:, None]
        ang = np.unwrap(np.arctan2(tan[:, 1], tan[:, 0]))
        kap = np.gradient(ang, s)
        simple = bool(shapely.is_simple(shapely.LineString(pts)))
        return cls(s=s, points=pts, tangents=tan, curvatures=kap, simple=simple)

    def resample(self, n):
        if self.path is None:
            raise WindingError("arc has no underlying path to resample")
        return OpenArc.from_path(self.path, n)

    def reversed(self):
        rev = _ReversedPath(self.path) if self.path is not None else None
        return OpenArc(s=self.s[-1] - self.s[::-1], points=self.points[::-1], tangents=-self.tangents[::-1],
                       curvatures=-self.curvatures[::-1], simple=self.simple, path=rev)

    def transformed(self, angle, shift):
        """Image under the rotation by ``angle`` followed by translation by ``shift``."""
        c, s_ = math.cos(angle), math.sin(angle)
        R = np.array([[c, -s_], [s_, c]])
        shift = np.asarray(shift, dtype=float)
        path = _MovedPath(self.path, R, shift) if self.path is not None else None
        return OpenArc(s=self.s, points=self.points @ R.T + shift, tangents=self.tangents @ R.T,
                       curvatures=self.curvatures, simple=self.simple, path=path)

    def split(self, s_cut, n=DEFAULT_ARC_N):
        """The two sub-arcs ``[0, s_cut]`` and ``[s_cut, length]`` sharing the cut point."""
        if self.path is None:
            raise WindingError("arc has no underlying path to split")
        if not 0.0 < s_cut < self.length:
            raise ValueError("cut point must be interior")
        return (OpenArc.from_path(_SubPath(self.path, 0.0, s_cut), n),
                OpenArc.from_path(_SubPath(self.path, s_cut, self.length), n))


class _ReversedPath:
    def __init__(self, base):
        self.base, self.length = base, base.length

    def eval_s(self, s):
        pos, tan, kap = self.base.eval_s(self.length - np.atleast_1d(s))
        return pos, -tan, -kap


class _MovedPath:
    def __init__(self, base, R, shift):
        self.base, self.R, self.shift, self.length = base, R, shift, base.length

    def eval_s(self, s):
        pos, tan, kap = self.base.eval_s(s)
        return pos @ self.R.T + self.shift, tan @ self.R.T, kap


class _SubPath:
    def __init__(self, base, a, b):
        self.base, self.a, self.length = base, float(a), float(b - a)

    def eval_s(self, s):
        return self.base.eval_s(self.a + np.atleast_1d(s))


def circle_arc(center, radius, theta0, theta1, n=DEFAULT_ARC_N):
    return OpenArc.from_path(Path([circle_piece(center, radius, theta0, theta1)]), n)


def segment(p, q, n=DEFAULT_ARC_N):
    return OpenArc.from_path(Path([segment_piece(p, q)]), n)


def parametric_arc(func, u0, u1, n=DEFAULT_ARC_N):
    """Arc of a parametric curve ``func(u) -> (pos, d1, d2)`` on ``[u0, u1]``."""
    return OpenArc.from_path(Path([ParametricPiece(func, u0, u1)]), n)


def composite_arc(pieces, n=DEFAULT_ARC_N):
    return OpenArc.from_path(Path(pieces), n)


# ---------------------------------------------------------------------------
# winding numbers


@dataclass(frozen=True, eq=False)
class WindingResult:
    value: float
    angle_trace: np.ndarray
    basepoint: np.ndarray


def _unwrapped(points, x0):
    d = points - x0
    ang = np.arctan2(d[:, 1], d[:, 0])
    inc = np.diff(ang)
    inc = inc - 2 * np.pi * np.ceil((inc - np.pi) / (2 * np.pi))  # representative in (-pi, pi]
    return ang, inc


def winding_number(arc: OpenArc, x0, on_arc_tol=None):
    """Net angle swept by ``gamma(s) - x0`` as ``s`` runs over the arc.

    Raises
    ------
    WindingError
        if ``x0`` lies on the arc or the samples are too coarse around it
        even after resampling.
    """
    x0 = np.asarray(x0, dtype=float)
    tol = 1e-12 * max(1.0, arc.length) if on_arc_tol is None else on_arc_tol
    current = arc
    for attempt in range(MAX_RESAMPLE + 1):
        dist = np.hypot(*(current.points - x0).T)
        if dist.min() <= tol:
            raise WindingError("base point lies on the arc")
        ang, inc = _unwrapped(current.points, x0)
        if np.abs(inc).max() <= JUMP_LIMIT:
            trace = ang[0] + np.concatenate(([0.0], np.cumsum(inc)))
            return WindingResult(value=float(inc.sum()), angle_trace=trace, basepoint=x0)
        if current.path is None or attempt == MAX_RESAMPLE:
            break
        current = current.resample(2 * (current.n - 1) + 1)
    raise WindingError("angle increments exceed pi/2; base point too close to the arc for the sampling")


def _extension_point(arc, which, h, extension):
    if which == "end":
        p, tau, kap = arc.points[-1], arc.tangents[-1], arc.curvatures[-1]
    elif which == "start":
        p, tau, kap = arc.points[0], -arc.tangents[0], -arc.curvatures[0]
    else:
        raise ValueError("which must be 'start' or 'end'")
    if extension == "tangent" or kap == 0.0:
        return p + h * tau
    if extension == "circle":
        # continue along the osculating circle
        nrm = _rot90(tau)
        return p + math.sin(kap * h) / kap * tau + (1 - math.cos(kap * h)) / kap * nrm
    raise ValueError(f"unknown extension {extension!r}")


def endpoint_winding(arc: OpenArc, which="end", h=None, extension="tangent", tol=1e-4):
    """Winding number of the arc about its own start or end point.

    Evaluated at points ``h, h/2, h/4`` beyond the endpoint along a smooth
    extension of the arc (its tangent line, or its osculating circle) and
    extrapolated to ``h -> 0`` by two rounds of Richardson extrapolation.

    Raises
    ------
    WindingError
        if the last Richardson correction exceeds ``tol``.
    """
    h = 1e-3 * arc.length if h is None else h
    w = [winding_number(arc, _extension_point(arc, which, h / 2**k, extension)).value for k in range(3)]
    r1 = [2 * w[1] - w[0], 2 * w[2] - w[1]]
    r2 = (4 * r1[1] - r1[0]) / 3
    if not abs(r2 - r1[1]) <= tol:
        raise WindingError(f"endpoint winding did not converge ({w})")
    return float(r2)


def curvature_integral(arc: OpenArc):
    """Simpson quadrature of ``kappa ds`` over the samples."""
    return float(simpson(arc.curvatures, x=arc.s))


def turning_angle(arc: OpenArc):
    """Net rotation of the unit tangent; equals ``int kappa ds`` and is exact for piecewise arcs."""
    ang = np.arctan2(arc.tangents[:, 1], arc.tangents[:, 0])
    inc = np.diff(ang)
    inc = inc - 2 * np.pi * np.ceil((inc - np.pi) / (2 * np.pi))
    return float(inc.sum())


def curvature_winding_identity(arc: OpenArc, **kw):
    """``(int kappa ds, w(start) + w(end))`` for a simple smooth arc."""
    if not arc.simple:
        raise WindingError("arc is not simple")
    rhs = endpoint_winding(arc, "start", **kw) + endpoint_winding(arc, "end", **kw)
    return curvature_integral(arc), rhs


# ---------------------------------------------------------------------------
# the belt inequality


@dataclass(frozen=True)
class BeltReport:
    length: float
    center_distance: float
    curvature_term: float
    margin: float
    passed: bool


def check_tangency(arc, c1, c2, t, dist_tol=1e-8, angle_tol=1e-6):
    """Raise :class:`HypothesisError` unless the arc leaves ``dB_t(c1)`` and reaches ``dB_t(c2)``
    tangentially, following both circles counterclockwise."""
    for label, p, tau, c in (("start", arc.points[0], arc.tangents[0], c1),
                             ("end", arc.points[-1], arc.tangents[-1], c2)):
        r = p - np.asarray(c, dtype=float)
        d = float(np.hypot(*r))
        if abs(d - t) > dist_tol * max(1.0, t):
            raise HypothesisError(f"{label} point is at distance {d:.9g} from its center, not {t}")
        expect = _rot90(r / d)
        if abs(math.atan2(expect[0] * tau[1] - expect[1] * tau[0], expect @ tau)) > angle_tol:
            raise HypothesisError(f"{label} tangent is not the counterclockwise tangent of the circle")


def geometric_inequality_check(arc, c1, c2, t, tol=1e-6, **kw):
    """Margin ``|Gamma| - |c1 - c2| - t int kappa`` for an arc joining two circles of radius ``t``.

    The tangency hypothesis on the endpoints is checked first; the global
    condition that the arc extends to a closed curve around both disks is
    the caller's responsibility.
    """
    check_tangency(arc, c1, c2, t, **kw)
    dist = float(np.hypot(*(np.asarray(c1, dtype=float) - np.asarray(c2, dtype=float))))
    kint = turning_angle(arc)
    margin = arc.length - dist - t * kint
    return BeltReport(length=arc.length, center_distance=dist, curvature_term=t * kint, margin=margin,
                      passed=bool(margin >= -tol))


def lower_belt(c1, c2, t, n=DEFAULT_ARC_N):
    """Quarter circle around ``c1``, the common lower tangent, quarter circle around ``c2``.

    The centers must share the same height with ``c1`` to the left.
    """
    c1, c2 = np.asarray(c1, dtype=float), np.asarray(c2, dtype=float)
    pieces = [circle_piece(c1, t, math.pi, 1.5 * math.pi),
              segment_piece(c1 + [0.0, -t], c2 + [0.0, -t]),
              circle_piece(c2, t, 1.5 * math.pi, 2 * math.pi)]
    return Path(pieces)


def perturbed_path(base, coeffs):
    """Push ``base`` away from its left side by a bump vanishing to third order at both ends.

    The displacement is ``delta(s) = (sum_k c_k sin(k pi s / l))^2 sin^2(pi s / l)``
    along the right-hand normal, so endpoints, end tangents and end
    curvatures are unchanged. ``base`` must be made of segments and
    circular arcs (piecewise constant curvature).
    """
    ell = base.length
    coeffs = np.asarray(coeffs, dtype=float)
    ks = np.arange(1, len(coeffs) + 1)
    w = math.pi / ell

    def delta(s):
        a = np.sin(np.outer(s, ks) * w) @ coeffs
        da = (np.cos(np.outer(s, ks) * w) * (ks * w)) @ coeffs
        dda = -(np.sin(np.outer(s, ks) * w) * (ks * w) ** 2) @ coeffs
        b, db, ddb = np.sin(w * s) ** 2, w * np.sin(2 * w * s), 2 * w * w * np.cos(2 * w * s)
        f, df, ddf = a * a, 2 * a * da, 2 * (da * da + a * dda)
        return f * b, df * b + f * db, ddf * b + 2 * df * db + f * ddb

    def func(s):
        s = np.atleast_1d(s)
        pos, tau, kap = base.eval_s(s)
        nrm = _rot90(tau)
        d, dd, ddd = delta(s)
        p = pos - d[:, None] * nrm
        d1 = tau * (1 + d * kap)[:, None] - dd[:, None] * nrm
        d2 = (nrm * (kap * (1 + d * kap))[:, None] + tau * (2 * dd * kap)[:, None] - ddd[:, None] * nrm)
        return p, d1, d2

    return Path([ParametricPiece(func, 0.0, ell)])
