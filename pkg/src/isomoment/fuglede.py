"""
Nearly circular curves and the normalized p-th moment
=====================================================

For a closed curve ``Gamma`` centred at the origin the normalized moment

    J_p(Gamma) = (2 pi)^p / |Gamma|^(p+1) * int_Gamma |x|^p dH^1

equals 1 on circles. Along radial perturbations ``R = 1 + eps r`` the
excess ``G(eps) = int |x|^p - |Gamma_eps|^(p+1) / (2 pi)^p`` behaves like
``eps^2 p F(r) / 2`` with

    F(r) = (p+1) int r^2 - (p+1)/(2 pi) (int r)^2 - int r'^2
         = pi sum_n (p + 1 - n^2) (a_n^2 + b_n^2),

so the mode ``sin 2 theta`` decides whether the circle is a local
maximizer of ``J_p`` among centrally symmetric curves (it is for ``p < 3``
and is not for ``p > 3``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .curve import TWO_PI, ClosedCurveSpec, SampledCurve, is_centrally_symmetric, radial_profile, sample
from .moments import centroid, p_moment, trace_length
from .trace import as_pieces, doubly_covered_segment as _segment_pieces

MIN_RADIUS = 0.05
MAX_MODES = 12
_QUAD_POINTS = 1024


class FugledeError(ValueError):
    """Invalid profile, exponent or perturbation size."""


@dataclass(frozen=True)
class RadialProfile:
    """``r(theta) = mean + sum_n a_n cos(n theta) + b_n sin(n theta)``, modes from ``n = 1``."""

    mean: float = 0.0
    cos_coeffs: tuple = ()
    sin_coeffs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "cos_coeffs", tuple(float(c) for c in self.cos_coeffs))
        object.__setattr__(self, "sin_coeffs", tuple(float(c) for c in self.sin_coeffs))

    @property
    def symmetric(self):
        """True when ``r(theta) = r(theta + pi)``, i.e. all odd modes vanish."""
        odd = list(self.cos_coeffs[0::2]) + list(self.sin_coeffs[0::2])
        return all(c == 0.0 for c in odd)

    @property
    def max_mode(self):
        return max(len(self.cos_coeffs), len(self.sin_coeffs))

    def __call__(self, theta):
        r, dr, _ = radial_profile(self.mean, self.cos_coeffs, self.sin_coeffs, np.asarray(theta, dtype=float))
        return r, dr

    @classmethod
    def mode(cls, n, kind="sin", amplitude=1.0):
        coeffs = [0.0] * n
        coeffs[n - 1] = amplitude
        return cls(sin_coeffs=coeffs) if kind == "sin" else cls(cos_coeffs=coeffs)

    @classmethod
    def from_even_modes(cls, cos_even, sin_even, mean=0.0):
        """Profile with coefficients given for modes ``2, 4, 6, ...`` only."""
        def spread(vals):
            out = [0.0] * (2 * len(vals))
            out[1::2] = list(vals)
            return out

        return cls(mean=mean, cos_coeffs=spread(cos_even), sin_coeffs=spread(sin_even))


def sin2():
    """The profile ``sin 2 theta``."""
    return RadialProfile.mode(2, "sin")


def perturbed_curve(r: RadialProfile, eps):
    """Radial spec of ``R_eps(theta) = 1 + eps r(theta)``.

    Raises
    ------
    FugledeError
        if ``1 + eps r`` is not positive on the check grid.
    """
    theta = np.linspace(0.0, TWO_PI, _QUAD_POINTS, endpoint=False)
    R = 1.0 + eps * r(theta)[0]
    if R.min() <= 0:
        raise FugledeError(f"radius 1 + eps r reaches {R.min():.4g} at eps = {eps}")
    return ClosedCurveSpec(kind="fourier_radial", a0=1.0 + eps * r.mean,
                           cos_coeffs=tuple(eps * c for c in r.cos_coeffs),
                           sin_coeffs=tuple(eps * c for c in r.sin_coeffs))


def fuglede_parseval(r: RadialProfile, p):
    """``pi sum_n (p + 1 - n^2) (a_n^2 + b_n^2)``."""
    a = np.zeros(r.max_mode)
    b = np.zeros(r.max_mode)
    a[:len(r.cos_coeffs)] = r.cos_coeffs
    b[:len(r.sin_coeffs)] = r.sin_coeffs
    n = np.arange(1, r.max_mode + 1)
    return float(math.pi * np.sum((p + 1 - n**2) * (a**2 + b**2)))


def fuglede_functional(r: RadialProfile, p, m=_QUAD_POINTS):
    """``F(r)`` by periodic trapezoid quadrature (exact for trigonometric profiles of degree < m/2)."""
    theta = np.linspace(0.0, TWO_PI, m, endpoint=False)
    val, der = r(theta)
    dtheta = TWO_PI / m
    int_r2 = np.sum(val**2) * dtheta
    int_r = np.sum(val) * dtheta
    int_d2 = np.sum(der**2) * dtheta
    return float((p + 1) * int_r2 - (p + 1) / TWO_PI * int_r**2 - int_d2)


@dataclass(frozen=True)
class FugledeReport:
    p: float
    F_quadrature: float
    F_parseval: float
    eps_grid: tuple
    G_values: tuple
    fitted_quadratic_coeff: float
    expected_coeff: float
    relative_error: float = field(default=math.nan)

    @property
    def agreement(self):
        return abs(self.F_quadrature - self.F_parseval) <= 1e-8 * (1 + abs(self.F_parseval))


def excess(spec_or_curve, p, n=4096):
    """``G = int |x|^p dH^1 - |Gamma|^(p+1) / (2 pi)^p`` with the moment taken about the origin."""
    curve = spec_or_curve if isinstance(spec_or_curve, SampledCurve) else sample(spec_or_curve, n)
    return p_moment(curve, p) - curve.length ** (p + 1) / TWO_PI**p


def default_eps_grid(lo=1e-3, hi=8e-3, count=6):
    return tuple(np.geomspace(lo, hi, count))


def expansion_check(r: RadialProfile, p, eps_grid=None, n=4096):
    """Fit ``G(eps) ~ c2 eps^2`` and compare ``c2`` with ``p F(r) / 2``.

    Raises
    ------
    FugledeError
        if the profile is not centrally symmetric or the grid is too small.
    """
    if not r.symmetric:
        raise FugledeError("expansion check needs a centrally symmetric profile (even modes only)")
    eps = np.asarray(default_eps_grid() if eps_grid is None else eps_grid, dtype=float)
    if len(eps) < 4 or eps.min() <= 0 or eps.max() / eps.min() < 8 * (1 - 1e-12):
        raise FugledeError("eps grid needs at least 4 positive values spanning a factor of 8")
    G = np.array([excess(perturbed_curve(r, e), p, n) for e in eps])
    c2 = float(np.dot(G, eps**2) / np.dot(eps**2, eps**2))
    Fq = fuglede_functional(r, p)
    expected = 0.5 * p * Fq
    rel = abs(c2 - expected) / abs(expected) if expected != 0 else abs(c2)
    return FugledeReport(p=float(p), F_quadrature=Fq, F_parseval=fuglede_parseval(r, p), eps_grid=tuple(eps),
                         G_values=tuple(G), fitted_quadratic_coeff=c2, expected_coeff=expected, relative_error=rel)


def normalized_functional(obj, p, n=4096, require_symmetric=True, tol=1e-8):
    """``J_p = (2 pi)^p / |Gamma|^(p+1) int_Gamma |x|^p dH^1``.

    ``obj`` may be a spec, a sampled curve or a list of quadrature pieces
    (pieces traversed twice are counted twice).

    Raises
    ------
    FugledeError
        if ``require_symmetric`` and the trace is not centred at the origin.
    """
    if isinstance(obj, ClosedCurveSpec):
        obj = sample(obj, n)
    pieces = as_pieces(obj)
    length = trace_length(pieces)
    if require_symmetric:
        c = centroid(pieces)
        symmetric = is_centrally_symmetric(obj) if isinstance(obj, SampledCurve) else True
        if not symmetric or np.hypot(*c) > tol * max(1.0, length):
            raise FugledeError("trace is not centrally symmetric about the origin")
    return TWO_PI**p / length ** (p + 1) * p_moment(pieces, p)


def doubly_covered_segment(length=1.0):
    """Quadrature pieces of the segment ``[-length/4, length/4] x {0}`` traversed there and back."""
    return _segment_pieces(length)


def segment_witness(p):
    """Closed form ``(pi/2)^p / (p+1)`` of ``J_p`` on the doubly covered segment."""
    return (math.pi / 2) ** p / (p + 1)


# ---------------------------------------------------------------------------
# search over symmetric radial curves


def _radial_J(R, dR, p):
    ds = np.sqrt(R**2 + dR**2)
    length = ds.sum() * TWO_PI / len(R)
    mom = np.sum(R**p * ds) * TWO_PI / len(R)
    return TWO_PI**p / length ** (p + 1) * mom


@dataclass(frozen=True)
class OptimizeResult:
    """Best normalized moment found. ``best_J`` is a lower bound on the supremum, nothing more."""

    p: float
    best_J: float
    best_profile: RadialProfile
    trace: tuple
    evaluations: int
    feasible_evaluations: int
    seed: int
    lower_bound: bool = True


def optimize_Cp(p, n_modes=4, restarts=20, budget=2000, seed=0, init_scale=0.1):
    """Maximize ``J_p`` over ``R = 1 + sum_{n even} a_n cos n theta + b_n sin n theta``.

    Uses Nelder-Mead from ``restarts`` random starting points (seeded);
    profiles with ``min R < 0.05`` are rejected. ``trace`` lists the best
    value after each restart.

    Raises
    ------
    FugledeError
        if ``n_modes`` is out of range or no feasible profile was evaluated.
    """
    if not 1 <= n_modes <= MAX_MODES:
        raise FugledeError(f"n_modes must be in 1..{MAX_MODES}")
    rng = np.random.default_rng(seed)
    m = max(_QUAD_POINTS, 16 * 2 * n_modes)
    theta = np.linspace(0.0, TWO_PI, m, endpoint=False)
    ns = 2 * np.arange(1, n_modes + 1)
    C = np.cos(np.outer(theta, ns))
    S = np.sin(np.outer(theta, ns))
    counts = {"all": 0, "feasible": 0}

    def neg_J(x):
        counts["all"] += 1
        a, b = x[:n_modes], x[n_modes:]
        R = 1.0 + C @ a + S @ b
        if R.min() < MIN_RADIUS:
            return np.inf
        counts["feasible"] += 1
        dR = (S * -ns) @ a + (C * ns) @ b
        return -_radial_J(R, dR, p)

    best_val, best_x, trace = -np.inf, None, []
    for k in range(restarts):
        x0 = np.zeros(2 * n_modes) if k == 0 else rng.normal(scale=init_scale, size=2 * n_modes)
        if k == 0:
            x0[n_modes] = 0.05  # a small sin 2 theta seed
        if not np.isfinite(neg_J(x0)):
            x0 *= 0.0
        res = minimize(neg_J, x0, method="Nelder-Mead",
                       options={"maxfev": budget, "xatol": 1e-10, "fatol": 1e-14, "adaptive": True})
        if np.isfinite(res.fun) and -res.fun > best_val:
            best_val, best_x = -float(res.fun), res.x.copy()
        trace.append((k, best_val))
    if best_x is None or counts["feasible"] == 0:
        raise FugledeError("no feasible profile evaluated within the budget")
    profile = RadialProfile.from_even_modes(best_x[:n_modes], best_x[n_modes:], mean=1.0)
    return OptimizeResult(p=float(p), best_J=best_val, best_profile=profile, trace=tuple(trace),
                          evaluations=counts["all"], feasible_evaluations=counts["feasible"], seed=int(seed))


def symmetry_breaking_sequence(p, count=5, eps0=0.02, n=4096):
    """``[(eps_k, J_p(Gamma_k))]`` for ``Gamma_k = perturbed_curve(sin 2 theta, eps0 / 2^k)``.

    ``eps_k`` is also the maximal radial deviation of ``Gamma_k`` from the unit circle.

    Raises
    ------
    FugledeError
        if ``p <= 3``.
    """
    if p <= 3:
        raise FugledeError("the mode-2 perturbation raises J_p above 1 only for p > 3")
    out = []
    for k in range(count):
        eps = eps0 / 2**k
        out.append((eps, normalized_functional(perturbed_curve(sin2(), eps), p, n)))
    return out
