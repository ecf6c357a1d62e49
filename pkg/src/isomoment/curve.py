"""
Closed plane curves
===================

Curve specifications (truncated Fourier series, polylines, named presets),
arc-length resampling and the differential-geometric primitives used by
the rest of the package: unit tangent, inward normal, signed curvature,
total curvature, curvature maximum and a simplicity check.

Conventions: curves are oriented counterclockwise, the inward normal is
``n = (-t_y, t_x)`` and the curvature of a convex curve is non-negative.
"""

from __future__ import annotations

import json
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import shapely
from scipy.optimize import minimize_scalar

from .quadrature import ArcLengthMap

TWO_PI = 2.0 * math.pi
DEFAULT_N = 4096
MIN_SAMPLES = 64

KINDS = ("fourier_radial", "fourier_xy", "polyline", "preset")
PRESETS = ("disk", "ellipse", "peanut")


class CurveSpecError(ValueError):
    """Malformed or invalid curve description."""


class SamplingError(ValueError):
    """The curve could not be resampled (degenerate or self-intersecting)."""


class NotSimpleError(SamplingError):
    pass


# ---------------------------------------------------------------------------
# curve documents


@dataclass(frozen=True)
class ClosedCurveSpec:
    """Declarative description of a closed plane curve.

    ``fourier_radial``: ``r(u) = a0 + sum a_n cos(n u) + b_n sin(n u)`` with
    ``cos_coeffs[0]`` holding ``a_1``. ``fourier_xy``: ``x_series`` and
    ``y_series`` are ``(const, cos_coeffs, sin_coeffs)`` triples.
    ``polyline``: ordered vertices, closed implicitly. Presets are expanded
    by :func:`parse_spec`; ``name`` only records where a spec came from.
    """

    kind: str
    a0: float = 0.0
    cos_coeffs: tuple = ()
    sin_coeffs: tuple = ()
    x_series: tuple = (0.0, (), ())
    y_series: tuple = (0.0, (), ())
    vertices: tuple = ()
    name: str | None = None

    def scaled(self, lam):
        """The same curve scaled by ``lam`` about the origin."""
        lam = float(lam)
        if self.kind == "fourier_radial":
            return ClosedCurveSpec(
                kind=self.kind,
                a0=lam * self.a0,
                cos_coeffs=tuple(lam * c for c in self.cos_coeffs),
                sin_coeffs=tuple(lam * c for c in self.sin_coeffs),
                name=self.name,
            )
        if self.kind == "fourier_xy":
            def sc(series):
                c0, cc, ss = series
                return (lam * c0, tuple(lam * c for c in cc), tuple(lam * c for c in ss))

            return ClosedCurveSpec(kind=self.kind, x_series=sc(self.x_series),
                                   y_series=sc(self.y_series), name=self.name)
        return ClosedCurveSpec(kind=self.kind, vertices=tuple((lam * x, lam * y) for x, y in self.vertices),
                               name=self.name)

    def to_dict(self):
        if self.kind == "fourier_radial":
            d = {"kind": self.kind, "a0": self.a0, "cos_coeffs": list(self.cos_coeffs),
                 "sin_coeffs": list(self.sin_coeffs)}
        elif self.kind == "fourier_xy":
            d = {"kind": self.kind,
                 "x": {"a0": self.x_series[0], "cos": list(self.x_series[1]), "sin": list(self.x_series[2])},
                 "y": {"a0": self.y_series[0], "cos": list(self.y_series[1]), "sin": list(self.y_series[2])}}
        else:
            d = {"kind": self.kind, "vertices": [list(v) for v in self.vertices]}
        if self.name:
            d["name"] = self.name
        return d


def _floats(values, what):
    try:
        return tuple(float(v) for v in (values or ()))
    except (TypeError, ValueError) as exc:
        raise CurveSpecError(f"{what}: expected a list of numbers") from exc


def _number(doc, key, default=None):
    if key not in doc:
        if default is None:
            raise CurveSpecError(f"missing field {key!r}")
        return float(default)
    try:
        return float(doc[key])
    except (TypeError, ValueError) as exc:
        raise CurveSpecError(f"field {key!r} is not a number") from exc


def radial_profile(a0, cos_coeffs, sin_coeffs, u):
    """Evaluate ``r(u)`` and its first two derivatives."""
    u = np.asarray(u, dtype=float)
    r = np.full_like(u, a0)
    dr = np.zeros_like(u)
    ddr = np.zeros_like(u)
    for k, c in enumerate(cos_coeffs, start=1):
        if c:
            ck, sk = np.cos(k * u), np.sin(k * u)
            r += c * ck
            dr -= k * c * sk
            ddr -= k * k * c * ck
    for k, c in enumerate(sin_coeffs, start=1):
        if c:
            ck, sk = np.cos(k * u), np.sin(k * u)
            r += c * sk
            dr += k * c * ck
            ddr -= k * k * c * sk
    return r, dr, ddr


def parse_spec(document):
    """Validate a curve document and return a :class:`ClosedCurveSpec`.

    ``document`` may be a mapping, a JSON/YAML string, or a path to a
    ``.json``/``.yaml`` file. Presets are expanded to coefficient form.
    """
    if isinstance(document, str) and ("{" in document or ":" in document or "\n" in document):
        document = _load_text(document, ".json" if document.lstrip().startswith("{") else ".yaml")
    elif isinstance(document, (str, Path)):
        path = Path(document)
        try:
            text = path.read_text()
        except OSError as exc:
            raise CurveSpecError(f"cannot read {path}: {exc}") from exc
        document = _load_text(text, path.suffix)
    if not isinstance(document, Mapping):
        raise CurveSpecError("curve document must be a mapping")

    kind = document.get("kind")
    if kind not in KINDS:
        raise CurveSpecError(f"unknown kind {kind!r}; expected one of {KINDS}")

    if kind == "preset":
        name = document.get("name")
        if name == "disk":
            R = _number(document, "R", 1.0)
            if R <= 0:
                raise CurveSpecError("disk radius must be positive")
            spec = ClosedCurveSpec(kind="fourier_radial", a0=R, name="disk")
        elif name == "ellipse":
            a, b = _number(document, "a"), _number(document, "b")
            if a <= 0 or b <= 0:
                raise CurveSpecError("ellipse semi-axes must be positive")
            spec = ClosedCurveSpec(kind="fourier_xy", x_series=(0.0, (a,), ()), y_series=(0.0, (), (b,)),
                                   name="ellipse")
        elif name == "peanut":
            spec = ClosedCurveSpec(kind="fourier_radial", a0=_number(document, "a0", 1.0),
                                   cos_coeffs=(0.0, _number(document, "c2")), name="peanut")
        else:
            raise CurveSpecError(f"unknown preset {name!r}; expected one of {PRESETS}")
    elif kind == "fourier_radial":
        spec = ClosedCurveSpec(kind=kind, a0=_number(document, "a0"),
                               cos_coeffs=_floats(document.get("cos_coeffs"), "cos_coeffs"),
                               sin_coeffs=_floats(document.get("sin_coeffs"), "sin_coeffs"),
                               name=document.get("name"))
    elif kind == "fourier_xy":
        def series(key):
            part = document.get(key)
            if not isinstance(part, Mapping):
                raise CurveSpecError(f"fourier_xy needs a mapping {key!r}")
            return (_number(part, "a0", 0.0), _floats(part.get("cos"), f"{key}.cos"),
                    _floats(part.get("sin"), f"{key}.sin"))

        spec = ClosedCurveSpec(kind=kind, x_series=series("x"), y_series=series("y"), name=document.get("name"))
    else:
        try:
            verts = tuple((float(x), float(y)) for x, y in document.get("vertices", ()))
        except (TypeError, ValueError) as exc:
            raise CurveSpecError("vertices must be [x, y] pairs") from exc
        if len(verts) < 3:
            raise CurveSpecError("polyline needs at least 3 vertices")
        for v, w in zip(verts, verts[1:] + verts[:1]):
            if v == w:
                raise CurveSpecError(f"repeated consecutive vertex {v}")
        spec = ClosedCurveSpec(kind="polyline", vertices=verts, name=document.get("name"))

    if spec.kind == "fourier_radial":
        grid = np.linspace(0.0, TWO_PI, 1024, endpoint=False)
        r, _, _ = radial_profile(spec.a0, spec.cos_coeffs, spec.sin_coeffs, grid)
        if r.min() <= 0.0:
            raise CurveSpecError(f"radial profile is not positive (min {r.min():.4g} at u={grid[r.argmin()]:.4g})")
    return spec


def _load_text(text, suffix):
    try:
        if suffix == ".json":
            return json.loads(text)
        import yaml

        return yaml.safe_load(text)
    except Exception as exc:  # json.JSONDecodeError, yaml.YAMLError
        raise CurveSpecError(f"malformed curve document: {exc}") from exc


# ---------------------------------------------------------------------------
# parametric geometry


class CurveGeometry:
    """A closed curve parametrized over ``[0, 2*pi)``; subclasses define ``eval``."""

    def eval(self, u):
        """Return ``(position, first derivative, second derivative)`` as ``(N, 2)`` arrays."""
        raise NotImplementedError

    def speed(self, u):
        _, d1, _ = self.eval(u)
        return np.hypot(d1[:, 0], d1[:, 1])

    def kappa(self, u):
        _, d1, d2 = self.eval(u)
        sp = np.hypot(d1[:, 0], d1[:, 1])
        return (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / sp**3

    def kappa_speed(self, u):
        """``kappa * |gamma'|``, the curvature density per unit parameter."""
        _, d1, d2 = self.eval(u)
        return (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / (d1[:, 0] ** 2 + d1[:, 1] ** 2)


class FourierRadialGeometry(CurveGeometry):
    def __init__(self, a0, cos_coeffs, sin_coeffs):
        self.a0 = a0
        self.cos_coeffs = tuple(cos_coeffs)
        self.sin_coeffs = tuple(sin_coeffs)

    def eval(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        r, dr, ddr = radial_profile(self.a0, self.cos_coeffs, self.sin_coeffs, u)
        c, s = np.cos(u), np.sin(u)
        pos = np.stack((r * c, r * s), axis=-1)
        d1 = np.stack((dr * c - r * s, dr * s + r * c), axis=-1)
        d2 = np.stack(((ddr - r) * c - 2 * dr * s, (ddr - r) * s + 2 * dr * c), axis=-1)
        return pos, d1, d2


def _series(series, u):
    c0, cc, ss = series
    f = np.full_like(u, c0)
    df = np.zeros_like(u)
    ddf = np.zeros_like(u)
    for k, a in enumerate(cc, start=1):
        if a:
            ck, sk = np.cos(k * u), np.sin(k * u)
            f += a * ck
            df -= k * a * sk
            ddf -= k * k * a * ck
    for k, b in enumerate(ss, start=1):
        if b:
            ck, sk = np.cos(k * u), np.sin(k * u)
            f += b * sk
            df += k * b * ck
            ddf -= k * k * b * sk
    return f, df, ddf


class FourierXYGeometry(CurveGeometry):
    def __init__(self, x_series, y_series):
        self.x_series = x_series
        self.y_series = y_series

    def eval(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        x, dx, ddx = _series(self.x_series, u)
        y, dy, ddy = _series(self.y_series, u)
        return np.stack((x, y), -1), np.stack((dx, dy), -1), np.stack((ddx, ddy), -1)


class ReversedGeometry(CurveGeometry):
    """Traverse ``base`` backwards: ``u -> -u``."""

    def __init__(self, base):
        self.base = base

    def eval(self, u):
        pos, d1, d2 = self.base.eval(-np.atleast_1d(np.asarray(u, dtype=float)))
        return pos, -d1, d2


class PolylineGeometry(CurveGeometry):
    """Finite-difference geometry of a polygon resampled at ``n`` equal arc-length steps.

    Positions interpolate the polygon exactly; tangents and curvature are
    interpolated from sample values (central differences and turning
    angles), so corners are smeared over a couple of samples.
    """

    def __init__(self, vertices, n):
        v = np.asarray(vertices, dtype=float)
        closed = np.vstack((v, v[:1]))
        seg = np.hypot(*np.diff(closed, axis=0).T)
        self.knots = np.concatenate(([0.0], np.cumsum(seg)))
        self.closed = closed
        self.length = float(self.knots[-1])
        self.scale = self.length / TWO_PI
        s = np.arange(n) * self.length / n
        pts = self._interp(s)
        fwd = np.roll(pts, -1, axis=0) - pts
        back = pts - np.roll(pts, 1, axis=0)
        tan = fwd / np.linalg.norm(fwd, axis=1, keepdims=True) + back / np.linalg.norm(back, axis=1, keepdims=True)
        tan /= np.linalg.norm(tan, axis=1, keepdims=True)
        turn = np.arctan2(back[:, 0] * fwd[:, 1] - back[:, 1] * fwd[:, 0], (back * fwd).sum(axis=1))
        self.sample_u = s / self.scale
        self.sample_tangent = tan
        self.sample_kappa = turn / (self.length / n)

    def _interp(self, s):
        s = np.mod(s, self.length)
        return np.stack((np.interp(s, self.knots, self.closed[:, 0]),
                         np.interp(s, self.knots, self.closed[:, 1])), -1)

    def _periodic(self, u, values):
        up = np.concatenate((self.sample_u, [TWO_PI]))
        vp = np.concatenate((values, values[:1]))
        return np.interp(np.mod(u, TWO_PI), up, vp)

    def eval(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        pos = self._interp(u * self.scale)
        tx = self._periodic(u, self.sample_tangent[:, 0])
        ty = self._periodic(u, self.sample_tangent[:, 1])
        norm = np.hypot(tx, ty)
        tx, ty = tx / norm, ty / norm
        k = self._periodic(u, self.sample_kappa)
        d1 = self.scale * np.stack((tx, ty), -1)
        d2 = self.scale**2 * k[:, None] * np.stack((-ty, tx), -1)
        return pos, d1, d2


def geometry_for(spec, n=DEFAULT_N):
    if spec.kind == "fourier_radial":
        return FourierRadialGeometry(spec.a0, spec.cos_coeffs, spec.sin_coeffs)
    if spec.kind == "fourier_xy":
        return FourierXYGeometry(spec.x_series, spec.y_series)
    if spec.kind == "polyline":
        return PolylineGeometry(spec.vertices, n)
    raise CurveSpecError(f"spec kind {spec.kind!r} must be expanded by parse_spec first")


# ---------------------------------------------------------------------------
# sampled curve


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """A closed curve resampled at ``n`` points equally spaced in arc length.

    ``u`` holds the native parameter of each sample; ``geometry`` and
    ``arclength`` allow evaluation between samples.
    """

    spec: ClosedCurveSpec
    n: int
    length: float
    s: np.ndarray
    u: np.ndarray
    points: np.ndarray
    tangents: np.ndarray
    normals: np.ndarray
    curvatures: np.ndarray
    geometry: CurveGeometry = field(repr=False)
    arclength: ArcLengthMap = field(repr=False)

    @property
    def h(self):
        """Sample spacing ``L / n``."""
        return self.length / self.n

    @property
    def smooth(self):
        return self.spec.kind != "polyline"

    @property
    def signed_area(self):
        x, y = self.points[:, 0], self.points[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def eval_u(self, u):
        """Points, unit tangents, inward normals and curvatures at native parameters ``u``."""
        pos, d1, d2 = self.geometry.eval(u)
        sp = np.hypot(d1[:, 0], d1[:, 1])
        tan = d1 / sp[:, None]
        nor = np.stack((-tan[:, 1], tan[:, 0]), -1)
        kap = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / sp**3
        return pos, tan, nor, kap

    def at(self, s):
        """Same as :meth:`eval_u` but addressed by arc length."""
        return self.eval_u(self.arclength.u_of_s(np.atleast_1d(np.asarray(s, dtype=float))))

    def offset(self, u, t):
        """``Phi(u, t) = gamma(u) + t * n(u)``."""
        pos, _, nor, _ = self.eval_u(u)
        return pos + t * nor


def _signed_area(geometry, m=4096):
    u = np.linspace(0.0, TWO_PI, m, endpoint=False)
    pos, d1, _ = geometry.eval(u)
    return 0.5 * float(np.mean(pos[:, 0] * d1[:, 1] - pos[:, 1] * d1[:, 0])) * TWO_PI


def sample(spec, n=DEFAULT_N, check_simple=True):
    """Resample ``spec`` at ``n`` points equally spaced in arc length.

    Orientation is corrected to counterclockwise. Fourier specs use
    analytic derivatives; polylines use finite differences.

    Raises
    ------
    SamplingError
        if ``n`` is too small or the parametrization degenerates.
    NotSimpleError
        if ``check_simple`` and the sampled curve self-intersects.
    """
    if n < MIN_SAMPLES:
        raise SamplingError(f"need at least {MIN_SAMPLES} samples, got {n}")
    geometry = geometry_for(spec, n)
    probe = np.linspace(0.0, TWO_PI, 8 * n, endpoint=False)
    speed = geometry.speed(probe)
    if speed.min() <= 1e-10 * speed.mean():
        raise SamplingError("parametrization has vanishing speed; arc-length inversion is not monotone")
    if _signed_area(geometry) < 0:
        geometry = ReversedGeometry(geometry)

    amap = ArcLengthMap(geometry.speed, 0.0, TWO_PI, panels=max(256, n // 8), periodic=True)
    L = amap.length
    s = np.arange(n) * (L / n)
    u = amap.u_of_s(s)
    pos, d1, d2 = geometry.eval(u)
    sp = np.hypot(d1[:, 0], d1[:, 1])
    tan = d1 / sp[:, None]
    nor = np.stack((-tan[:, 1], tan[:, 0]), -1)
    if spec.kind == "polyline":
        kap = geometry.kappa(u)
    else:
        kap = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / sp**3
    curve = SampledCurve(spec=spec, n=n, length=L, s=s, u=u, points=pos, tangents=tan, normals=nor,
                         curvatures=kap, geometry=geometry, arclength=amap)
    if check_simple and not is_simple(curve):
        raise NotSimpleError("curve is not simple (self-intersecting)")
    return curve


def total_curvature(curve):
    """Periodic trapezoid quadrature of ``kappa ds`` over one period."""
    return float(np.sum(curve.curvatures) * curve.h)


def kappa_max(curve):
    """Maximum curvature, refined around the discrete argmax.

    Fourier curves are refined by a bounded scalar search on the analytic
    curvature; polylines by parabolic interpolation of the samples.
    """
    k = curve.curvatures
    i = int(np.argmax(k))
    km, k0, kp = k[i - 1], k[i], k[(i + 1) % curve.n]
    denom = km - 2 * k0 + kp
    best = k0 - 0.125 * (kp - km) ** 2 / denom if denom < 0 else k0
    if not curve.smooth:
        return float(best)
    u0 = curve.u[i]
    step = curve.arclength.u_of_s(curve.h) - curve.arclength.u_of_s(0.0)
    width = max(step, 1e-9)
    res = minimize_scalar(lambda x: -curve.geometry.kappa(np.array([x]))[0], bounds=(u0 - 2 * width, u0 + 2 * width),
                          method="bounded", options={"xatol": 1e-13})
    return float(max(k0, -res.fun))


def is_simple(curve):
    """True iff no two non-adjacent edges of the sampled polygon intersect."""
    return _polygon_is_simple(curve.points)


def _polygon_is_simple(points):
    ring = shapely.LinearRing(np.asarray(points))
    return bool(shapely.is_simple(ring))


def is_centrally_symmetric(curve, tol=None):
    """Whether the sampled point set is invariant under ``x -> -x`` up to ``tol``."""
    from scipy.spatial import cKDTree

    tol = 5 * curve.h if tol is None else tol
    d, _ = cKDTree(curve.points).query(-curve.points)
    return bool(d.max() <= tol)
