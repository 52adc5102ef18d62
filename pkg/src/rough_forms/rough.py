"""
Corrected sewing below the Young/Züst thresholds, and the deterministic
pure-area families it is demonstrated on.

A corrector is a nonatomic germ omega with delta(f u delta eta) close to
delta(omega). The corrected integral is sew(f u delta eta - omega),
optionally with omega added back.
"""
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import roots_legendre

from src.rough_forms.errors import DegreeError, ParameterError
from src.rough_forms.funcs import Scalar0, trig
from src.rough_forms.germ import Gauge, Germ, coboundary, cup, sample_simplices, seminorm_estimate
from src.rough_forms.integrals import IntegralResult, _raise_if_diverged, young, zust
from src.rough_forms.sew import SewOptions, sew_eval
from src.rough_forms.simplex import diam, diam_batch, signed_volume_batch

logger = logging.getLogger(__name__)

MODES = ("without", "with_corrector_added")
MAX_AREA_N = 512


@dataclass(frozen=True)
class CorrectedGerm:
    base: Germ
    corrector: Germ
    mode: str = "without"

    def __post_init__(self):
        if self.base.degree != self.corrector.degree:
            raise DegreeError(f"base has degree {self.base.degree}, corrector {self.corrector.degree}")
        if self.mode not in MODES:
            raise ParameterError(f"unknown corrected value mode {self.mode!r}; expected one of {MODES}")

    @property
    def degree(self):
        return self.base.degree


def corrected_sew(c, s, opts=None):
    """
    sew(base - corrector) on s, plus corrector(s) in "with_corrector_added" mode.

    Returns:
        IntegralResult with provenance "corrected"
    """
    report = sew_eval(c.base - c.corrector, s, opts)
    _raise_if_diverged(report, "corrected")
    value = report.value + (c.corrector(s) if c.mode == "with_corrector_added" else 0.0)
    return IntegralResult(value, report.error_estimate, "corrected", report)


def corrected_chain_sew(f, eta, omega, phi, dphi, s, opts=None, mode="without"):
    """
    The corrected integral of phi(f) d eta: base phi(f) u delta(eta), corrector phi'(f) u omega.

    Args:
        f: Scalar0
        eta: Scalar0 (k = 1) or 1-germ (k = 2)
        omega: Corrector germ of degree k
        phi, dphi: Vectorized real function and its derivative
        s: Simplex of degree k
    """
    eta_germ = eta.as_germ() if isinstance(eta, Scalar0) else eta
    base = cup(f.map(phi, label=f"phi({f.label})").as_germ(), coboundary(eta_germ))
    corrector = cup(f.map(dphi, label=f"phi'({f.label})").as_germ(), omega)
    return corrected_sew(CorrectedGerm(base, corrector, mode), s, opts)


def _xi(xi):
    v = np.atleast_1d(np.asarray(xi, dtype=float))
    if v.ndim != 1:
        raise ParameterError("xi must be a vector")
    return v


def _check_n(n, cap=None):
    if n < 1 or (cap is not None and n > cap):
        raise ParameterError(f"family index n must lie in 1..{cap or 'inf'}, got {n}")


def _sinc_integral(c, w):
    """int_0^1 sin(c + w t) dt, stable as w -> 0."""
    return np.sin(c + 0.5 * w) * np.sinc(w / (2.0 * np.pi))


def pure_area_antiderivative(n, xi):
    """I^n(p) = xi.p / 2 + sin(2 n xi.p) / (4 n), so that f^n dg^n = delta I^n."""
    _check_n(n)
    v = _xi(xi)

    def evaluator(p):
        t = p[:, : v.shape[0]] @ v
        return 0.5 * t + np.sin(2.0 * n * t) / (4.0 * n)

    return Scalar0(evaluator, 1.0, None, f"I{n}")


class PureArea1D(NamedTuple):
    f: Scalar0
    g: Scalar0
    corrector: Germ
    antiderivative: Scalar0


def pure_area_family_1d(n, xi=(1.0,)):
    """
    f = cos(n xi.p) / sqrt(n), g = sin(n xi.p) / sqrt(n), with the exact corrector
    omega(pq) = f(p)(g(q) - g(p)) - (I(q) - I(p)).

    Both functions are 1/2-Hölder with constant sqrt(2 |xi|), uniformly in n.
    """
    _check_n(n)
    v = _xi(xi)
    const = math.sqrt(2.0 * float(np.linalg.norm(v)))
    amp = 1.0 / math.sqrt(n)
    f = trig("cos", n, v, amp, holder_alpha=0.5, holder_const=const)
    g = trig("sin", n, v, amp, holder_alpha=0.5, holder_const=const)
    antiderivative = pure_area_antiderivative(n, v)
    corrector = cup(f.as_germ(), coboundary(g.as_germ())) - coboundary(antiderivative.as_germ())
    return PureArea1D(f, g, corrector, antiderivative)


def alternative_corrector_1d(n, xi=(1.0,)):
    """omega~(pq) = f(p)(g(q) - g(p)) - xi.(q - p) / 2; sews the family to xi.(q - p) / 2 for every n."""
    fam = pure_area_family_1d(n, xi)
    v = _xi(xi)
    half = Scalar0(lambda p: 0.5 * (p[:, : v.shape[0]] @ v), 1.0, None, "xi.x/2")
    return cup(fam.f.as_germ(), coboundary(fam.g.as_germ())) - coboundary(half.as_germ())


def _triangle_rule(order):
    """Gauss-Legendre nodes on the reference triangle via the collapsed square."""
    x, w = roots_legendre(order)
    u, wu = 0.5 * (x + 1.0), 0.5 * w
    s = np.repeat(u, order)
    t = (1.0 - s) * np.tile(u, order)
    weights = np.outer(wu, wu).ravel() * (1.0 - s)
    return s, t, weights


def pure_area_integrand(n):
    """cos^2(n x1) cos^2(n x2), the density of f^n dg^n ^ dh^n against dx1 ^ dx2."""
    return lambda p: np.cos(n * p[..., 0]) ** 2 * np.cos(n * p[..., 1]) ** 2


def pure_area_2d_integral(n, triangles, order=None):
    """
    Oriented integral of f^n dg^n ^ dh^n over each triangle of an (N, 3, 2) batch.

    The quadrature order grows with n * diam so the oscillations stay resolved.
    """
    tri = np.asarray(triangles, dtype=float)
    if order is None:
        order = int(min(256, max(16, math.ceil(2.0 * n * float(np.max(diam_batch(tri)))) + 16)))
    s, t, w = _triangle_rule(order)
    e1 = tri[:, 1] - tri[:, 0]
    e2 = tri[:, 2] - tri[:, 0]
    points = tri[:, None, 0] + s[None, :, None] * e1[:, None] + t[None, :, None] * e2[:, None]
    density = pure_area_integrand(n)(points) @ w
    return 2.0 * signed_volume_batch(tri) * density


def pure_area_2d_exact(n):
    """Closed form of the pure-area integral on the unit right triangle [(0,0),(1,0),(0,1)]."""
    return 0.25 * (0.5 + (1.0 - math.cos(2 * n)) / (2.0 * n * n) + math.sin(2 * n) / (4.0 * n))


def pure_area_eta_2d(n, eps=0.25):
    """The exact Young germ eta^n = g^n dh^n on straight segments."""
    scale = n ** -eps

    def batch(v):
        p, q = v[:, 0], v[:, 1]
        d = q - p
        a0, b0 = n * p[:, 0], n * p[:, 1]
        wa, wb = n * d[:, 0], n * d[:, 1]
        # sin(A) cos(B) = (sin(A + B) + sin(A - B)) / 2
        inner = 0.5 * (_sinc_integral(a0 + b0, wa + wb) + _sinc_integral(a0 - b0, wa - wb))
        return scale * d[:, 1] * inner

    return Germ(1, batch, label=f"eta{n}")


class PureArea2D(NamedTuple):
    f: Scalar0
    g: Scalar0
    h: Scalar0
    eta: Germ
    corrector: Germ


def pure_area_family_2d(n, eps=0.25):
    """
    f = n^(eps-1) cos(n x1) cos(n x2), g = n^(-eps-1/2) sin(n x1), h = n^(-1/2) sin(n x2),
    with the corrector omega(S) = f(p0) delta(eta)(S) - int_S f dg ^ dh.
    """
    _check_n(n, MAX_AREA_N)
    if not 0 < eps <= 0.5:
        raise ParameterError(f"eps must lie in (0, 1/2], got {eps}")
    f = Scalar0(lambda p: n ** (eps - 1.0) * np.cos(n * p[:, 0]) * np.cos(n * p[:, 1]), 1.0 - eps, None, f"f{n}")
    g = Scalar0(lambda p: n ** (-eps - 0.5) * np.sin(n * p[:, 0]), eps + 0.5, None, f"g{n}")
    h = Scalar0(lambda p: n ** -0.5 * np.sin(n * p[:, 1]), 0.5, None, f"h{n}")
    eta = pure_area_eta_2d(n, eps)
    base = cup(f.as_germ(), coboundary(eta))
    corrector = Germ(2, lambda v: base.evaluate(v) - pure_area_2d_integral(n, v), label=f"omega{n}")
    return PureArea2D(f, g, h, eta, corrector)


def resolving_options(opts, n, scale=1.0):
    """
    Sewing options that hold back verdicts until the dyadic mesh resolves the
    n-th oscillation: min_level = ceil(log2(n * scale)) + 1.
    """
    opts = opts or SewOptions()
    first = max(0, math.ceil(math.log2(max(n * scale, 1.0))) + 1)
    return opts.with_(min_level=max(opts.min_level, first))


def pure_area_young(n, seg, xi=(1.0,), opts=None):
    """Plain Young integral of the 1D family, with verdicts deferred until resolved."""
    fam = pure_area_family_1d(n, xi)
    scale = float(np.linalg.norm(_xi(xi))) * diam(seg)
    return young(fam.f, fam.g, seg, resolving_options(opts, n, scale))


def pure_area_zust(n, tri, eps=0.25, opts=None, zust_opts=None, exact_inner=True):
    """
    f^n dg^n ^ dh^n on a triangle.

    With ``exact_inner`` the stage-1 Young germ is the closed-form eta^n, so
    only the outer sewing runs; otherwise the full two-stage Züst sewing.
    """
    fam = pure_area_family_2d(n, eps)
    opts = resolving_options(opts, n, diam(tri))
    if not exact_inner:
        return zust(fam.f, fam.g, fam.h, tri, opts, zust_opts)
    report = sew_eval(cup(fam.f.as_germ(), coboundary(fam.eta)), tri, opts)
    logger.debug("pure-area n=%d: %r after %d levels", n, report.value, report.levels_used)
    _raise_if_diverged(report, "pure-area")
    return IntegralResult(report.value, report.error_estimate, "zust", report)


def remainder_germ(f, eta, omega, phi, dphi):
    """
    -delta(phi'(f)) u omega + (delta phi(f) - phi'(f) u delta f) u delta(eta).

    Args:
        f: Scalar0
        eta: Scalar0 (k = 1) or 1-germ (k = 2)
        omega: Corrector of degree k
        phi, dphi: Vectorized real function and its derivative
    """
    eta_germ = eta.as_germ() if isinstance(eta, Scalar0) else eta
    phi_f = f.map(phi).as_germ()
    dphi_f = f.map(dphi).as_germ()
    taylor = coboundary(phi_f) - cup(dphi_f, coboundary(f.as_germ()))
    return cup(taylor, coboundary(eta_germ)) - cup(coboundary(dphi_f), omega)


def corrector_remainder_check(f, eta, omega, phi, dphi, gamma, sampler, dim=1):
    """
    Seminorm of the chain-rule remainder against diam^gamma on sampled simplices.

    Returns:
        SeminormEstimate
    """
    r = remainder_germ(f, eta, omega, phi, dphi)
    samples = sample_simplices(r.degree, dim, sampler)
    return seminorm_estimate(r, Gauge.power(r.degree, gamma), samples=samples)
