"""
Young and Züst integrals, their calculus identities, pull-backs, and
classical quadrature oracles to compare against.

The Young integral f dg on a segment is the sewn 1-germ f(p)(g(q) - g(p)).
The Züst integral f dg1 ^ dg2 on a triangle is sewn in two stages: the
Young germ eta = g1 dg2 is sewn on edges (stage 1, memoized), then the
2-germ f(p0) * delta(eta)(p0 p1 p2) is sewn on the triangle (stage 2).
"""
import json
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate

from src.rough_forms.compensator import CompensatorOptions, CompensatorGerm
from src.rough_forms.config import section
from src.rough_forms.decompose import dya_leaves
from src.rough_forms.errors import DegreeError, DimensionError, NonConvergentError, OracleError, ParameterError
from src.rough_forms.funcs import Scalar0, constant
from src.rough_forms.germ import Gauge, coboundary, cup, pullback, sample_simplices, seminorm_estimate
from src.rough_forms.sew import SewnGerm, SewOptions, SewStatus, _json_float, sew_eval
from src.rough_forms.simplex import Simplex, apply_point_map, boundary, diam_batch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadratureOptions:
    tol: float = 1e-10
    limit: int = 200
    derivative_step: float = 1e-5

    def __post_init__(self):
        if not (self.tol > 0 and self.derivative_step > 0) or self.limit < 1:
            raise ParameterError("quadrature tolerance, limit and derivative step must be positive")

    @classmethod
    def from_config(cls, config=None, **overrides):
        values = section(config, "quadrature")
        values.update(overrides)
        return cls(**{k: v for k, v in values.items() if k in cls.__dataclass_fields__})


@dataclass(frozen=True)
class ZustOptions:
    """
    Level caps and the inner tolerance budget of the two-stage Züst sewing.

    Unless ``inner_abs_tol`` is given, the inner Young sewing runs at
    outer abs_tol / (3 * 4^N), N the outer level cap.
    """

    outer_max_level: int = 6
    inner_max_level: int = 12
    inner_extrapolate: bool = True
    inner_extrapolation: str = "romberg"
    inner_romberg_columns: int = 3
    inner_abs_tol: float | None = None
    cache_decimals: int = 12

    @classmethod
    def from_config(cls, config=None, **overrides):
        values = section(config, "zust")
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**{k: v for k, v in values.items() if k in cls.__dataclass_fields__})

    def outer_options(self, opts):
        return opts if opts.max_level is not None else replace(opts, max_level=self.outer_max_level)

    def inner_options(self, outer):
        cap = outer.level_cap(2)
        abs_tol = self.inner_abs_tol if self.inner_abs_tol is not None else outer.abs_tol / (3.0 * 4.0 ** cap)
        return replace(outer, max_level=self.inner_max_level, abs_tol=abs_tol, extrapolate=self.inner_extrapolate,
                       extrapolation=self.inner_extrapolation, romberg_columns=self.inner_romberg_columns,
                       variant="dya", threads=1, min_level=0)


@dataclass
class IntegralResult:
    """A sewn integral with its error estimate and where it came from."""

    value: float
    error_estimate: float
    provenance: str
    report: object = None
    inner_reports: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    stage1: dict | None = None

    @property
    def status(self):
        return self.report.status if self.report is not None else SewStatus.CONVERGED

    def to_dict(self):
        out = {
            "provenance": self.provenance,
            "value": _json_float(self.value),
            "error_estimate": _json_float(self.error_estimate),
            "status": self.status.value,
        }
        if self.report is not None:
            out["report"] = self.report.to_dict()
        if self.inner_reports:
            out["inner_reports"] = [r.to_dict() for r in self.inner_reports]
        if self.stage1 is not None:
            out["stage1_cache_hits"] = self.stage1["cache_hits"]
            out["stage1_evals"] = self.stage1["evals"]
            out["stage1_max_error"] = _json_float(self.stage1["max_error"])
        out["warnings"] = list(self.warnings)
        return out

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def _hypothesis_warning(exponents, degree, what):
    if any(a is None for a in exponents):
        return None
    gamma = sum(exponents)
    if gamma <= degree:
        msg = f"{what}: exponent sum {gamma:.4g} <= {degree}; sewability is not guaranteed"
        logger.warning(msg)
        return msg
    return None


def _raise_if_diverged(report, stage):
    if report.status is SewStatus.DIVERGED:
        raise NonConvergentError(f"{stage} sewing diverged (observed rate {report.observed_rate})", report, stage)


def young_germ(f, g, opts=None, cache=True, decimals=12):
    """The sewn Young germ f dg as a batch 1-germ."""
    return SewnGerm(cup(f.as_germ(), coboundary(g.as_germ())), opts, cache=cache, decimals=decimals,
                    label=f"{f.label} d{g.label}")


def young(f, g, seg, opts=None):
    """
    Young integral of f dg over a segment.

    Args:
        f: Scalar0 integrand
        g: Scalar0 integrator
        seg: Simplex of degree 1
        opts: SewOptions

    Returns:
        IntegralResult

    Raises:
        NonConvergentError: the sewing was classified as divergent
    """
    if seg.degree != 1:
        raise DegreeError(f"young integrates over segments, got degree {seg.degree}")
    warnings = [w for w in [_hypothesis_warning((f.holder_alpha, g.holder_alpha), 1, "young")] if w]
    report = sew_eval(cup(f.as_germ(), coboundary(g.as_germ())), seg, opts)
    _raise_if_diverged(report, "young")
    return IntegralResult(report.value, report.error_estimate, "young", report, warnings=warnings)


def _derivative_along(g, p, q, h):
    direction = q - p

    def deriv(t):
        ahead = g.evaluate((p + (t + h) * direction)[None])[0]
        behind = g.evaluate((p + (t - h) * direction)[None])[0]
        return (ahead - behind) / (2.0 * h)

    return deriv


def _quad(fn, quad_opts):
    out = integrate.quad(fn, 0.0, 1.0, epsabs=quad_opts.tol, epsrel=quad_opts.tol, limit=quad_opts.limit,
                         full_output=1)
    value, abserr = out[0], out[1]
    if len(out) > 3:
        if abserr > 10.0 * quad_opts.tol * max(1.0, abs(value)):
            raise OracleError(f"quadrature did not converge: {out[3]} (error estimate {abserr:.3g})")
        logger.debug("quad warning accepted (abserr %.3g): %s", abserr, out[3])
    return value


def young_oracle(f, g, seg, quad_opts=None):
    """
    Classical integral of f dg along a segment, for differentiable g.

    The derivative of g along the segment is a central difference; the
    integral is scipy's adaptive quadrature.
    """
    quad_opts = quad_opts or QuadratureOptions()
    p, q = seg.vertices
    deriv = _derivative_along(g, p, q, quad_opts.derivative_step)
    return _quad(lambda t: f.evaluate((p + t * (q - p))[None])[0] * deriv(t), quad_opts)


def _stage1_stats(eta):
    stats = eta.cache.stats() if eta.cache is not None else {"hits": 0, "evals": eta.evaluations}
    return {"cache_hits": stats["hits"], "evals": stats["evals"], "max_error": eta.max_error}


class ZustGerm(SewnGerm):
    """The sewn Züst germ f dg1 ^ dg2; ``eta`` is the memoized stage-1 Young germ."""

    def __init__(self, f, g1, g2, opts=None, zust_opts=None):
        zust_opts = zust_opts or ZustOptions()
        outer = zust_opts.outer_options(opts or SewOptions())
        self.eta = young_germ(g1, g2, zust_opts.inner_options(outer), cache=True, decimals=zust_opts.cache_decimals)
        base = cup(f.as_germ(), coboundary(self.eta))
        super().__init__(base, outer, label=f"{f.label} d{g1.label}^d{g2.label}")


def zust_germ(f, g1, g2, opts=None, zust_opts=None):
    return ZustGerm(f, g1, g2, opts, zust_opts)


def zust(f, g1, g2, tri, opts=None, zust_opts=None):
    """
    Züst integral of f dg1 ^ dg2 over a triangle.

    The error estimate adds the outer estimate and a stage-1 bound
    3 * 4^N * max|f| * (largest inner error), N the last outer level.

    Raises:
        NonConvergentError: stage "zust-inner" or "zust-outer" diverged
    """
    if tri.degree != 2:
        raise DegreeError(f"zust integrates over triangles, got degree {tri.degree}")
    warnings = [w for w in [_hypothesis_warning((f.holder_alpha, g1.holder_alpha, g2.holder_alpha), 2, "zust")] if w]
    z = ZustGerm(f, g1, g2, opts, zust_opts)
    report = sew_eval(z.base, tri, z.opts)
    if z.eta.diverged:
        raise NonConvergentError(f"stage-1 Young sewing diverged on {z.eta.diverged} edges",
                                 z.eta.diverged_report, "zust-inner")
    _raise_if_diverged(report, "zust-outer")
    leaves, _ = dya_leaves(tri.vertices[None], report.levels_used)
    f_max = float(np.max(np.abs(f.evaluate(leaves[:, 0]))))
    stage1 = _stage1_stats(z.eta)
    inner_bound = 3.0 * 4.0 ** report.levels_used * f_max * stage1["max_error"]
    logger.debug("zust stage 1: %s", stage1)
    return IntegralResult(report.value, report.error_estimate + inner_bound, "zust", report,
                          warnings=warnings, stage1=stage1)


def _triangle_frame(tri, i, j):
    p0, p1, p2 = tri.vertices
    e1, e2 = p1 - p0, p2 - p0
    if max(i, j) >= tri.dim:
        raise DimensionError(f"axes ({i}, {j}) exceed the dimension {tri.dim}")
    return p0, e1, e2, e1[i] * e2[j] - e1[j] * e2[i]


def _dblquad(fn, quad_opts):
    value, abserr = integrate.dblquad(fn, 0.0, 1.0, 0.0, lambda s: 1.0 - s,
                                      epsabs=quad_opts.tol, epsrel=quad_opts.tol)
    if abserr > 100.0 * quad_opts.tol * max(1.0, abs(value)):
        raise OracleError(f"2D quadrature error estimate {abserr:.3g} exceeds the tolerance")
    return value


def zust_oracle(f, tri, i=0, j=1, quad_opts=None):
    """
    Classical integral of f dx^i ^ dx^j over an oriented triangle.

    The triangle is parametrized over the reference triangle; the projected
    determinant carries the orientation.
    """
    quad_opts = quad_opts or QuadratureOptions()
    p0, e1, e2, det = _triangle_frame(tri, i, j)
    if det == 0.0:
        return 0.0
    integral = _dblquad(lambda t, s: f.evaluate((p0 + s * e1 + t * e2)[None])[0], quad_opts)
    return det * integral


def zust_smooth_oracle(f, g1, g2, tri, quad_opts=None):
    """Classical integral of f dg1 ^ dg2 for differentiable g1, g2, via central differences."""
    quad_opts = quad_opts or QuadratureOptions()
    p0, e1, e2 = tri.vertices[0], tri.vertices[1] - tri.vertices[0], tri.vertices[2] - tri.vertices[0]
    h = quad_opts.derivative_step

    def at(g, s, t):
        return g.evaluate((p0 + s * e1 + t * e2)[None])[0]

    def integrand(t, s):
        ds1 = (at(g1, s + h, t) - at(g1, s - h, t)) / (2 * h)
        dt1 = (at(g1, s, t + h) - at(g1, s, t - h)) / (2 * h)
        ds2 = (at(g2, s + h, t) - at(g2, s - h, t)) / (2 * h)
        dt2 = (at(g2, s, t + h) - at(g2, s, t - h)) / (2 * h)
        return at(f, s, t) * (ds1 * dt2 - dt1 * ds2)

    return _dblquad(integrand, quad_opts)


@dataclass
class ComparisonResult:
    """Two computations of the same quantity with a combined tolerance."""

    lhs: float
    rhs: float
    tolerance: float
    parts: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def discrepancy(self):
        return abs(self.lhs - self.rhs)

    @property
    def ok(self):
        return self.discrepancy <= self.tolerance

    def to_dict(self):
        return {"lhs": _json_float(self.lhs), "rhs": _json_float(self.rhs),
                "discrepancy": _json_float(self.discrepancy), "tolerance": _json_float(self.tolerance),
                "ok": self.ok, "parts": {k: _json_float(v) for k, v in self.parts.items()}, "notes": self.notes}


def stokes_check(f, g, tri, opts=None, tol=1e-12):
    """
    Stokes-Cartan: the Young integral over the boundary against the sewn
    2-germ delta(f u delta g) on the triangle, refined with dya_dagger.

    Returns:
        ComparisonResult with lhs the boundary integral
    """
    opts = opts or SewOptions()
    if tri.degree != 2:
        raise DegreeError("stokes_check needs a triangle")
    lhs, lhs_err, edges = 0.0, 0.0, {}
    for w, edge in boundary(tri):
        r = young(f, g, edge, opts)
        lhs += w * r.value
        lhs_err += r.error_estimate
        edges[edge.to_text()] = r.value
    omega = coboundary(cup(f.as_germ(), coboundary(g.as_germ())))
    rhs = sew_eval(omega, tri, replace(opts, variant="dya_dagger"))
    _raise_if_diverged(rhs, "stokes")
    scale = max(1.0, abs(lhs))
    return ComparisonResult(lhs, rhs.value, lhs_err + rhs.error_estimate + tol * scale, parts=edges)


def _compose_vector(gs, psi, label):
    def evaluator(p):
        return np.asarray(psi(np.stack([g.evaluate(p) for g in gs], axis=1)), dtype=float)

    return Scalar0(evaluator, None, None, label)


def young_chain_rule_check(f, gs, psi, grads, seg, opts=None, tol=1e-12):
    """
    f d(Psi o g) against sum_i (f dPsi/du_i o g) dg_i on a segment.

    Gradients are supplied by the caller; their Hölder regularity is not
    verified.

    Args:
        f: Scalar0
        gs: list of m Scalar0 components of g
        psi: Vectorized map (N, m) -> (N,)
        grads: list of m vectorized partial derivatives (N, m) -> (N,)
        seg: Simplex of degree 1
        opts: SewOptions
    """
    if len(grads) != len(gs):
        raise ParameterError(f"{len(gs)} components need {len(gs)} partial derivatives, got {len(grads)}")
    left = young(f, _compose_vector(gs, psi, "Psi(g)"), seg, opts)
    rhs, err = 0.0, left.error_estimate
    for i, (gi, di) in enumerate(zip(gs, grads)):
        r = young(f * _compose_vector(gs, di, f"dPsi{i}(g)"), gi, seg, opts)
        rhs += r.value
        err += r.error_estimate
    return ComparisonResult(left.value, rhs, err + tol * max(1.0, abs(rhs)),
                            notes=["gradient regularity is assumed, not checked"])


def young_iterated_check(f, h, g, seg, opts=None, inner_opts=None, tol=1e-12):
    """(f h) dg against sew(f u (h dg))."""
    direct = young(f * h, g, seg, opts)
    inner = young_germ(h, g, inner_opts or opts)
    nested = sew_eval(cup(f.as_germ(), inner), seg, opts)
    _raise_if_diverged(nested, "young-iterated")
    f_max = float(np.max(np.abs(f.evaluate(dya_leaves(seg.vertices[None], nested.levels_used)[0][:, 0]))))
    inner_bound = 2.0 ** nested.levels_used * f_max * inner.max_error
    return ComparisonResult(direct.value, nested.value,
                            direct.error_estimate + nested.error_estimate + inner_bound + tol)


def zust_iterated_check(f, h, g1, g2, tri, opts=None, zust_opts=None, tol=1e-12):
    """(f h) dg1 ^ dg2 against sew(f u (h dg1 ^ dg2))."""
    direct = zust(f * h, g1, g2, tri, opts, zust_opts)
    inner = ZustGerm(h, g1, g2, opts, zust_opts)
    nested = sew_eval(cup(f.as_germ(), inner), tri, inner.opts)
    _raise_if_diverged(nested, "zust-iterated")
    f_max = float(np.max(np.abs(f.evaluate(dya_leaves(tri.vertices[None], nested.levels_used)[0][:, 0]))))
    inner_bound = 4.0 ** nested.levels_used * f_max * inner.max_error
    return ComparisonResult(direct.value, nested.value,
                            direct.error_estimate + nested.error_estimate + inner_bound + tol)


def zust_chain_rule_check(f, gs, psi, minors, tri, opts=None, zust_opts=None, tol=1e-12):
    """
    f d(Psi1 o g) ^ d(Psi2 o g) against sum_{i<j} (f J^{ij} o g) dg_i ^ dg_j.

    Args:
        f: Scalar0
        gs: list of m Scalar0 components
        psi: Pair of vectorized maps (N, m) -> (N,)
        minors: dict {(i, j): J^{ij}} of Jacobian minors, i < j, as vectorized maps (N, m) -> (N,)
        tri: Simplex of degree 2
    """
    lhs = zust(f, _compose_vector(gs, psi[0], "Psi1(g)"), _compose_vector(gs, psi[1], "Psi2(g)"), tri, opts, zust_opts)
    rhs, err = 0.0, lhs.error_estimate
    for (i, j), minor in sorted(minors.items()):
        if not i < j:
            raise ParameterError(f"minor indices must satisfy i < j, got ({i}, {j})")
        r = zust(f * _compose_vector(gs, minor, f"J{i}{j}(g)"), gs[i], gs[j], tri, opts, zust_opts)
        rhs += r.value
        err += r.error_estimate
    return ComparisonResult(lhs.value, rhs, err + tol * max(1.0, abs(rhs)))


def leibniz_zust_check(g1, g2, h, tri, opts=None, zust_opts=None, tol=1e-12):
    """d(g1 h) ^ dg2 against g1 dh ^ dg2 + h dg1 ^ dg2."""
    one = constant(1.0)
    lhs = zust(one, g1 * h, g2, tri, opts, zust_opts)
    a = zust(g1, h, g2, tri, opts, zust_opts)
    b = zust(h, g1, g2, tri, opts, zust_opts)
    return ComparisonResult(lhs.value, a.value + b.value,
                            lhs.error_estimate + a.error_estimate + b.error_estimate + tol)


def pullback_curve(f, g, phi, seg, opts=None, inner_opts=None, tol=1e-12):
    """
    Integration along the curve phi restricted to ``seg``.

    ``lhs`` sews the algebraic pull-back of the sewn germ f dg (inner Young
    integrals on the chords [phi(s), phi(t)]); ``rhs`` is (f o phi) d(g o phi).
    When ``seg`` lies in [0, inf) the part "reparametrized" also recomputes
    the rhs through rho(t) = t^2 over [sqrt(a), sqrt(b)].

    Args:
        f, g: Scalar0 on the target space
        phi: Vectorized point map (N, 1) -> (N, d)
        seg: Simplex of degree 1 in R^1
    """
    opts = opts or SewOptions()
    if seg.degree != 1 or seg.dim != 1:
        raise DegreeError("pullback_curve needs a segment of the real line")
    f_phi = f.compose(lambda p: apply_point_map(phi, p), label=f"{f.label}(phi)")
    g_phi = g.compose(lambda p: apply_point_map(phi, p), label=f"{g.label}(phi)")
    direct = young(f_phi, g_phi, seg, opts)
    inner = young_germ(f, g, inner_opts or opts)
    algebraic = sew_eval(pullback(phi, inner), seg, opts)
    _raise_if_diverged(algebraic, "pullback-curve")
    inner_bound = 2.0 ** algebraic.levels_used * inner.max_error
    result = ComparisonResult(algebraic.value, direct.value,
                              algebraic.error_estimate + direct.error_estimate + inner_bound + tol,
                              parts={"algebraic": algebraic.value, "differential": direct.value})
    a, b = seg.vertices[:, 0]
    if a >= 0 and b >= 0:
        def rho(p):
            return p * p

        reparam = young(f_phi.compose(rho), g_phi.compose(rho), Simplex([[math.sqrt(a)], [math.sqrt(b)]]), opts)
        result.parts["reparametrized"] = reparam.value
        result.parts["reparametrized_error"] = reparam.error_estimate + direct.error_estimate + tol
    return result


@dataclass
class SurfacePullback:
    """
    The three quantities of the change-of-variables formula on a triangle.

    In target dimension 2 they satisfy algebraic = differential + boundary_term.
    """

    algebraic: float
    differential: float
    boundary_term: float
    tolerance: float
    edges: dict = field(default_factory=dict)
    top_dimension: bool = True
    inner_bound: float = 0.0

    @property
    def defect(self):
        return abs(self.algebraic - self.differential - self.boundary_term)

    @property
    def ok(self):
        return self.defect <= self.tolerance

    def to_dict(self):
        return {"algebraic": _json_float(self.algebraic), "differential": _json_float(self.differential),
                "boundary_term": _json_float(self.boundary_term), "defect": _json_float(self.defect),
                "tolerance": _json_float(self.tolerance), "ok": self.ok, "edges": self.edges,
                "top_dimension": self.top_dimension, "inner_bound": _json_float(self.inner_bound)}


def pullback_surface(f, g1, g2, phi, tri, opts=None, zust_opts=None, comp_opts=None, tol=1e-10):
    """
    Change of variables for the Züst integral under a map phi: R^2 -> R^d.

    algebraic: the Züst integral over the straight triangle phi_#(tri).
    differential: (f o phi) d(g1 o phi) ^ d(g2 o phi) over tri.
    boundary_term: the side compensator of the algebraic pull-back germ,
    paired with the boundary of tri.

    For d > 2 the identity between the three is not expected and
    ``top_dimension`` is False.
    """
    if tri.degree != 2 or tri.dim != 2:
        raise DegreeError("pullback_surface needs a triangle in the plane")
    comp_opts = comp_opts or CompensatorOptions(extrapolate=True)
    image = Simplex(apply_point_map(phi, tri.vertices))
    algebraic = zust(f, g1, g2, image, opts, zust_opts)

    def along(s):
        return s.compose(lambda p: apply_point_map(phi, p), label=f"{s.label}(phi)")

    differential = zust(along(f), along(g1), along(g2), tri, opts, zust_opts)
    inner = ZustGerm(f, g1, g2, opts, zust_opts)
    comp = CompensatorGerm(pullback(phi, inner), comp_opts)
    term, term_err, edges = 0.0, 0.0, {}
    for w, edge in boundary(tri):
        values, errors = comp.evaluate_with_errors(edge.vertices[None])
        term += w * values[0]
        term_err += errors[0]
        edges[edge.to_text()] = float(values[0])
    # each edge's compensator sums Züst values that are only known to inner.max_error
    inner_bound = 3.0 * comp.omega_error_bound(inner.max_error)
    return SurfacePullback(
        algebraic=algebraic.value,
        differential=differential.value,
        boundary_term=term,
        tolerance=algebraic.error_estimate + differential.error_estimate + term_err + inner_bound + tol,
        edges=edges,
        top_dimension=image.dim == 2,
        inner_bound=inner_bound,
    )


@dataclass
class RatioReport:
    numerator: float
    denominator: float

    @property
    def ratio(self):
        if self.denominator == 0:
            return 0.0 if self.numerator == 0 else math.inf
        return self.numerator / self.denominator

    def to_dict(self):
        return {"numerator": self.numerator, "denominator": self.denominator, "ratio": _json_float(self.ratio)}


def bound_delta_young_check(g1, g2, beta, sampler, opts=None, dim=1):
    """Measured [delta(g1 dg2)]_beta / [delta g1 u delta g2]_beta on sampled triangles."""
    samples = sample_simplices(2, dim, sampler)
    u = Gauge.power(2, beta)
    eta = young_germ(g1, g2, opts)
    num = seminorm_estimate(coboundary(eta), u, samples=samples)
    den = seminorm_estimate(cup(coboundary(g1.as_germ()), coboundary(g2.as_germ())), u, samples=samples)
    return RatioReport(num.value, den.value)


def _thin_triangles(aspect, rng, count, scales):
    out = []
    for n in range(scales):
        size = 2.0 ** -n
        base = rng.uniform(0.0, 1.0 - size, (count, 2))
        angle = rng.uniform(0.0, 2 * np.pi, count)
        e1 = np.stack([np.cos(angle), np.sin(angle)], axis=1) * size
        e2 = np.stack([-np.sin(angle), np.cos(angle)], axis=1) * size / aspect
        out.append(np.stack([base, base + e1, base + 0.5 * e1 + e2], axis=1))
    return np.concatenate(out)


def bound_improvement_probe(g1, g2, gamma, aspect_ratios=(1.0, 10.0, 100.0, 1000.0), opts=None,
                            seed=0, count=16, scales=6):
    """
    Mixed seminorm [delta(g1 dg2)] against diam^(2-gamma) vol2^(gamma-1) on thin triangles.

    Returns:
        dict aspect ratio -> seminorm estimate
    """
    if not 1 <= gamma <= 2:
        raise ParameterError("the mixed gauge needs 1 <= gamma <= 2")
    rng = np.random.default_rng(seed)
    u = Gauge.power(2, 2.0 - gamma, gamma - 1.0)
    delta_eta = coboundary(young_germ(g1, g2, opts))
    return {aspect: seminorm_estimate(delta_eta, u, samples=_thin_triangles(aspect, rng, count, scales)).value
            for aspect in aspect_ratios}


def zust_defect_bound(f, g1, g2, tri, gamma, depths=(0, 1, 2, 3), opts=None, zust_opts=None):
    """
    max |f(p0) delta(eta)(S) - zust(S)| / diam(S)^gamma over the depth-n
    descendants S of ``tri``, per depth.

    Returns:
        dict depth -> measured constant
    """
    z = ZustGerm(f, g1, g2, opts, zust_opts)
    out = {}
    for n in depths:
        leaves, _ = dya_leaves(tri.vertices[None], n)
        defect = np.abs(z.base.evaluate(leaves) - z.evaluate(leaves))
        out[n] = float(np.max(defect / diam_batch(leaves) ** gamma))
    return out
