"""
Germs (functions of simplices), cochain evaluation, coboundary, cup product,
pull-back, gauges and sampled seminorm and regularity diagnostics.

A germ of degree k wraps a vectorized evaluator taking an ``(N, k+1, d)``
array of simplices to an ``(N,)`` array of reals. The scalar call
``germ(simplex)`` is a convenience over the batch path.
"""
import logging
import threading
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from src.rough_forms.config import section
from src.rough_forms.errors import DegreeError, DimensionError, DivergentGaugeError, ParameterError
from src.rough_forms.simplex import (
    Chain,
    Simplex,
    apply_point_map,
    diam_batch,
    permutation_sign,
    signed_volume_batch,
    vol2_batch,
)

logger = logging.getLogger(__name__)

MAX_GERM_DEGREE = 3
TINY_GAUGE = 1e-300


class GermCache:
    """
    Concurrency-safe memo of germ values keyed by quantized vertex coordinates.

    Races between threads are benign: values are deterministic, so the last
    writer stores the same number as the first.
    """

    def __init__(self, decimals=12):
        self.decimals = decimals
        self._store = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.evals = 0

    def _keys(self, vertices):
        q = np.round(vertices.reshape(vertices.shape[0], -1), self.decimals) + 0.0
        q = np.ascontiguousarray(q)
        return q.view(np.dtype((np.void, q.dtype.itemsize * q.shape[1]))).ravel()

    def lookup(self, fn, vertices):
        """
        Evaluate ``fn`` on a batch, reusing stored values for known simplices.

        Args:
            fn: Batch evaluator (N, k+1, d) -> (N,)
            vertices: Batch of simplices

        Returns:
            (N,) array of values
        """
        keys = self._keys(vertices)
        uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
        values = np.empty(uniq.shape[0])
        missing = []
        with self._lock:
            for u, key in enumerate(uniq):
                hit = self._store.get(key.tobytes())
                if hit is None:
                    missing.append(u)
                else:
                    values[u] = hit
            self.hits += vertices.shape[0] - len(missing)
        if missing:
            missing = np.asarray(missing)
            computed = np.asarray(fn(vertices[first[missing]]), dtype=float).reshape(-1)
            values[missing] = computed
            with self._lock:
                self.evals += missing.shape[0]
                for u, val in zip(missing.tolist(), computed.tolist()):
                    self._store[uniq[u].tobytes()] = val
        return values[inverse.reshape(-1)]

    def clear(self):
        with self._lock:
            self._store.clear()
            self.hits = 0
            self.evals = 0

    def stats(self):
        return {"hits": self.hits, "evals": self.evals, "size": len(self._store)}


class Germ:
    """A real-valued function of k-simplices with cochain semantics by linearity."""

    def __init__(self, degree, batch_fn, label=None, cache=None):
        if not 0 <= degree <= MAX_GERM_DEGREE:
            raise DegreeError(f"germ degree must be in 0..{MAX_GERM_DEGREE}, got {degree}")
        self.degree = degree
        self._fn = batch_fn
        self.label = label
        self.cache = cache

    @classmethod
    def from_function(cls, degree, fn, label=None):
        """Wrap a per-simplex callable ``fn(Simplex) -> float``."""

        def batch(vertices):
            return np.array([fn(Simplex(v)) for v in vertices], dtype=float)

        return cls(degree, batch, label=label)

    def cached(self, decimals=12):
        """Copy of this germ that memoizes values in a fresh GermCache."""
        return Germ(self.degree, self._fn, label=self.label, cache=GermCache(decimals))

    def evaluate(self, vertices):
        """
        Evaluate on a batch of simplices.

        Args:
            vertices: (N, k+1, d) array

        Returns:
            (N,) float array
        """
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 3 or v.shape[1] != self.degree + 1:
            raise DegreeError(f"{self!r} expects simplices with {self.degree + 1} vertices, got shape {v.shape}")
        if v.shape[0] == 0:
            return np.zeros(0)
        if self.cache is not None:
            return self.cache.lookup(self._fn, v)
        return np.asarray(self._fn(v), dtype=float).reshape(v.shape[0])

    def __call__(self, s):
        if s.degree != self.degree:
            raise DegreeError(f"{self!r} cannot evaluate a simplex of degree {s.degree}")
        return float(self.evaluate(s.vertices[None])[0])

    def _check_same_degree(self, other):
        if other.degree != self.degree:
            raise DegreeError(f"germ degrees differ: {self.degree} vs {other.degree}")

    def __add__(self, other):
        if not isinstance(other, Germ):
            return NotImplemented
        self._check_same_degree(other)
        return Germ(self.degree, lambda v: self.evaluate(v) + other.evaluate(v), label=f"({self.label} + {other.label})")

    def __sub__(self, other):
        if not isinstance(other, Germ):
            return NotImplemented
        self._check_same_degree(other)
        return Germ(self.degree, lambda v: self.evaluate(v) - other.evaluate(v), label=f"({self.label} - {other.label})")

    def __neg__(self):
        return Germ(self.degree, lambda v: -self.evaluate(v), label=f"-{self.label}")

    def __mul__(self, other):
        # scalar multiple, or pointwise product of equal-degree germs
        if isinstance(other, Germ):
            self._check_same_degree(other)
            return Germ(self.degree, lambda v: self.evaluate(v) * other.evaluate(v), label=f"{self.label}*{other.label}")
        c = float(other)
        return Germ(self.degree, lambda v: c * self.evaluate(v), label=f"{c:g}*{self.label}")

    __rmul__ = __mul__

    def __repr__(self):
        return f"Germ(degree={self.degree}, label={self.label!r})"


def eval_chain(g, c):
    """
    Cochain pairing: sum of weight * g(simplex) over the normalized chain.

    Args:
        g: Germ of degree k
        c: Chain (or Simplex) of degree k

    Returns:
        float
    """
    if isinstance(c, Simplex):
        c = Chain.of(c)
    if c.degree != g.degree:
        raise DegreeError(f"cannot pair a degree-{g.degree} germ with a degree-{c.degree} chain")
    c = c.normalize()
    if not c.terms:
        return 0.0
    verts, weights = c.to_arrays()
    return float(np.dot(weights, g.evaluate(verts)))


def coboundary(g):
    """(delta g)(S) = g(boundary S), for germs of degree <= 2."""
    if g.degree > 2:
        raise DegreeError("coboundary is only defined up to degree 2")
    k = g.degree

    def batch(v):
        total = np.zeros(v.shape[0])
        for i in range(k + 2):
            face = g.evaluate(np.delete(v, i, axis=1))
            total = total + face if i % 2 == 0 else total - face
        return total

    return Germ(k + 1, batch, label=f"d({g.label})")


def cup(a, b):
    """
    Cup product: (a u b)[p0..p_{k+h}] = a[p0..pk] * b[pk..p_{k+h}].

    Args:
        a: Germ of degree k
        b: Germ of degree h, with k + h <= 3

    Returns:
        Germ of degree k + h
    """
    k, h = a.degree, b.degree
    if k + h > MAX_GERM_DEGREE:
        raise DegreeError(f"cup product degree {k + h} exceeds {MAX_GERM_DEGREE}")
    return Germ(k + h, lambda v: a.evaluate(v[:, : k + 1]) * b.evaluate(v[:, k:]), label=f"{a.label} u {b.label}")


def pullback(m, g):
    """Algebraic pull-back: (phi^# g)(S) = g(phi_# S)."""
    return Germ(g.degree, lambda v: g.evaluate(apply_point_map(m, v)), label=f"pullback({g.label})")


def scalar_germ(f, label=None):
    """Lift a vectorized point function (N, d) -> (N,) to a 0-germ."""
    return Germ(0, lambda v: np.asarray(f(v[:, 0]), dtype=float), label=label or getattr(f, "label", None))


def zero(degree):
    return Germ(degree, lambda v: np.zeros(v.shape[0]), label="0")


def abs_increment():
    """The 1-germ [p, q] -> |q - p|; nonatomic but not alternating, hence not sewable."""
    return Germ(1, lambda v: np.linalg.norm(v[:, 1] - v[:, 0], axis=-1), label="|q-p|")


def signed_area(i=0, j=1):
    """Oriented area of the projection of a triangle to the (x^i, x^j) plane."""
    return Germ(2, lambda v: signed_volume_batch(v, (i, j)), label=f"area{i}{j}")


def coordinate_form(i=0, j=1):
    """The sewn germ x^i dx^j in closed form: (p^i + q^i)/2 * (q^j - p^j)."""

    def batch(v):
        return 0.5 * (v[:, 0, i] + v[:, 1, i]) * (v[:, 1, j] - v[:, 0, j])

    return Germ(1, batch, label=f"x{i} dx{j}")


def poincare_primitive(g, basepoint):
    """
    Cone construction eta[p0..p_{k-1}] = g[pbar p0 .. p_{k-1}].

    If g is closed then delta(eta) = g.

    Args:
        g: Germ of degree k >= 1
        basepoint: Cone vertex pbar

    Returns:
        Germ of degree k - 1
    """
    if g.degree < 1:
        raise DegreeError("poincare_primitive needs a germ of degree >= 1")
    base = np.atleast_1d(np.asarray(basepoint, dtype=float))

    def batch(v):
        if v.shape[2] != base.shape[0]:
            raise DimensionError(f"basepoint has dimension {base.shape[0]}, simplices have {v.shape[2]}")
        cone = np.broadcast_to(base, (v.shape[0], 1, base.shape[0]))
        return g.evaluate(np.concatenate([cone, v], axis=1))

    return Germ(g.degree - 1, batch, label=f"cone({g.label})")


class Gauge(Germ):
    """
    A nonnegative germ used to measure other germs.

    ``family`` is "power" for scale * diam^gamma1 * vol2^gamma2 or "custom".
    """

    def __init__(self, degree, batch_fn, family, gamma1=None, gamma2=None, scale=1.0,
                 uniform=True, truncation=None, label=None):
        super().__init__(degree, batch_fn, label=label)
        self.family = family
        self.gamma1 = gamma1
        self.gamma2 = gamma2
        self.scale = scale
        self.uniform = uniform
        self.truncation = truncation

    @classmethod
    def power(cls, degree, gamma1, gamma2=0.0, scale=1.0):
        if gamma1 < 0 or gamma2 < 0:
            raise ParameterError("power gauge exponents must be nonnegative")
        if gamma2 > 0 and degree < 2:
            raise ParameterError("a vol2 exponent needs degree >= 2")

        def batch(v):
            out = diam_batch(v) ** gamma1
            if gamma2:
                out = out * vol2_batch(v) ** gamma2
            return scale * out

        label = f"{scale:g}*diam^{gamma1:g}" + (f"*vol2^{gamma2:g}" if gamma2 else "")
        return cls(degree, batch, "power", gamma1=gamma1, gamma2=gamma2, scale=scale, label=label)

    @classmethod
    def custom(cls, degree, batch_fn, uniform=True, truncation=None, label=None):
        return cls(degree, batch_fn, "custom", uniform=uniform, truncation=truncation, label=label or "custom")

    @property
    def homogeneity(self):
        """gamma1 + 2 gamma2 for power gauges."""
        return self.gamma1 + 2.0 * self.gamma2 if self.family == "power" else None


def dini_transform(u, r):
    """
    The rescaled series sum_n 2^{nr} u((2^-n) S).

    Power gauges have the closed form (1 - 2^{r - (gamma1 + 2 gamma2)})^-1 * u;
    custom gauges are summed up to their declared truncation depth.

    Args:
        u: Gauge
        r: Dini rate

    Returns:
        Gauge
    """
    if u.family == "power":
        s = u.homogeneity
        if r >= s:
            raise DivergentGaugeError(f"rate {r:g} is not below the gauge homogeneity {s:g}")
        factor = 1.0 / (1.0 - 2.0 ** (r - s))
        return Gauge.power(u.degree, u.gamma1, u.gamma2, scale=u.scale * factor)
    if u.truncation is None:
        raise ParameterError("custom gauges need an explicit truncation depth for the Dini series")

    def batch(v):
        total = np.zeros(v.shape[0])
        for n in range(u.truncation + 1):
            total += 2.0 ** (n * r) * u.evaluate(v * 2.0 ** -n)
        return total

    return Gauge.custom(u.degree, batch, uniform=u.uniform, label=f"dini({u.label}, {r:g})")


@dataclass(frozen=True)
class SamplerConfig:
    """Where and how densely seminorms and probes sample simplices."""

    box_lo: float = 0.0
    box_hi: float = 1.0
    n_random: int = 10_000
    dyadic_depth: int = 8
    n_scales: int = 20
    n_multiscale: int = 64
    seed: int = 0
    reference: Simplex | None = None

    def __post_init__(self):
        if not self.box_hi > self.box_lo:
            raise ParameterError("sampling box must have box_hi > box_lo")
        if min(self.n_random, self.dyadic_depth, self.n_scales, self.n_multiscale) < 0:
            raise ParameterError("sample counts must be nonnegative")

    @classmethod
    def from_config(cls, config=None, **overrides):
        values = section(config, "sampling")
        values.update(overrides)
        return cls(**{k: v for k, v in values.items() if k in cls.__dataclass_fields__})


def _reference_simplex(degree, dim, lo, hi):
    if degree <= dim:
        verts = np.full((degree + 1, dim), lo)
        for i in range(degree):
            verts[i + 1, i] = hi
        return verts
    verts = np.full((degree + 1, dim), lo)
    verts[:, 0] = np.linspace(lo, hi, degree + 1)
    return verts


def sample_simplices(degree, dim, sampler):
    """
    Draw the seminorm sample family.

    The union of (a) dyadic descendants of a reference simplex, (b) uniform
    random simplices in the box and (c) random simplices shrunk towards their
    first vertex by 2^-n, n = 1..n_scales.

    Args:
        degree: Simplex degree k
        dim: Ambient dimension d
        sampler: SamplerConfig

    Returns:
        (N, k+1, d) array
    """
    from src.rough_forms.decompose import dya_leaves

    rng = np.random.default_rng(sampler.seed)
    parts = []
    if degree in (1, 2) and sampler.dyadic_depth > 0:
        ref = sampler.reference.vertices if sampler.reference is not None else \
            _reference_simplex(degree, dim, sampler.box_lo, sampler.box_hi)
        for n in range(sampler.dyadic_depth + 1):
            leaves, _ = dya_leaves(ref[None], n)
            parts.append(leaves)
    if sampler.n_random:
        parts.append(rng.uniform(sampler.box_lo, sampler.box_hi, (sampler.n_random, degree + 1, dim)))
    if sampler.n_multiscale and sampler.n_scales:
        base = rng.uniform(sampler.box_lo, sampler.box_hi, (sampler.n_multiscale, degree + 1, dim))
        anchor = base[:, :1]
        for n in range(1, sampler.n_scales + 1):
            parts.append(anchor + 2.0 ** -n * (base - anchor))
    if not parts:
        return np.zeros((0, degree + 1, dim))
    return np.concatenate(parts, axis=0)


@dataclass
class SeminormEstimate:
    """Sampled lower bound for sup |g(S)| / v(S)."""

    value: float
    witness: Simplex | None
    samples_used: int

    def to_dict(self):
        return {
            "value": self.value,
            "witness": self.witness.vertices.tolist() if self.witness is not None else None,
            "samples_used": self.samples_used,
        }


def seminorm_estimate(g, v, sampler=None, samples=None, dim=None):
    """
    Estimate [g]_v as a max of |g(S)| / v(S) over a sample.

    Args:
        g: Germ
        v: Gauge of the same degree
        sampler: SamplerConfig used when ``samples`` is not given
        samples: Optional explicit (N, k+1, d) sample array
        dim: Ambient dimension for drawn samples (default: reference or max(1, k))

    Returns:
        SeminormEstimate
    """
    if g.degree != v.degree:
        raise DegreeError(f"germ degree {g.degree} does not match gauge degree {v.degree}")
    if samples is None:
        if sampler is None:
            raise ParameterError("seminorm_estimate needs a sampler or explicit samples")
        if dim is None:
            dim = sampler.reference.dim if sampler.reference is not None else max(1, g.degree)
        samples = sample_simplices(g.degree, dim, sampler)
    samples = np.asarray(samples, dtype=float)
    gauge = v.evaluate(samples)
    keep = gauge > TINY_GAUGE
    if not np.any(keep):
        return SeminormEstimate(0.0, None, 0)
    ratios = np.abs(g.evaluate(samples[keep])) / gauge[keep]
    ratios = np.where(np.isfinite(ratios), ratios, 0.0)
    best = int(np.argmax(ratios))
    return SeminormEstimate(float(ratios[best]), Simplex(samples[keep][best]), int(keep.sum()))


def _plane_points(rng, n, count, plane_dim, dim, lo, hi):
    """``count`` points on each of n random affine planes of dimension plane_dim."""
    origin = rng.uniform(lo, hi, (n, 1, dim))
    if plane_dim >= dim:
        return rng.uniform(lo, hi, (n, count, dim))
    if plane_dim == 0:
        return np.repeat(origin, count, axis=1)
    directions = rng.normal(size=(n, plane_dim, dim))
    coeffs = rng.uniform(-0.5, 0.5, (n, count, plane_dim)) * (hi - lo)
    return origin + coeffs @ directions


@dataclass
class RegularityReport:
    """Sampled verdicts; probabilistic, not proofs."""

    nonatomic: bool
    closed_on_planes: bool
    alternating: bool
    defects: dict = field(default_factory=dict)

    def to_dict(self):
        return {"nonatomic": self.nonatomic, "closed_on_planes": self.closed_on_planes,
                "alternating": self.alternating, "defects": self.defects}


def regularity_probe(g, dim=2, n_samples=500, seed=0, tol=1e-10, box=(0.0, 1.0)):
    """
    Probe nonatomicity, closedness on k-planes and alternation by sampling.

    Args:
        g: Germ of degree k in 1..2
        dim: Ambient dimension of the probe simplices
        n_samples: Simplices per property
        seed: Seed for numpy's default_rng
        tol: Absolute tolerance, scaled by max(1, typical |g|)
        box: Coordinate range for the samples

    Returns:
        RegularityReport
    """
    k = g.degree
    if k < 1:
        raise DegreeError("regularity_probe needs a germ of degree >= 1")
    rng = np.random.default_rng(seed)
    lo, hi = box
    generic = rng.uniform(lo, hi, (n_samples, k + 1, dim))
    values = g.evaluate(generic)
    scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
    limit = tol * scale

    degenerate = _plane_points(rng, n_samples, k + 1, k - 1, dim, lo, hi)
    nonatomic_defect = float(np.max(np.abs(g.evaluate(degenerate))))

    closed_defect = 0.0
    if k <= 2:
        planar = _plane_points(rng, n_samples, k + 2, k, dim, lo, hi)
        closed_defect = float(np.max(np.abs(coboundary(g).evaluate(planar))))

    alternation_defect = 0.0
    for sigma in permutations(range(k + 1)):
        sign = permutation_sign(sigma)
        moved = np.empty_like(generic)
        moved[:, list(sigma)] = generic
        alternation_defect = max(alternation_defect, float(np.max(np.abs(g.evaluate(moved) - sign * values))))

    report = RegularityReport(
        nonatomic=nonatomic_defect <= limit,
        closed_on_planes=closed_defect <= limit,
        alternating=alternation_defect <= limit,
        defects={"nonatomic": nonatomic_defect, "closed_on_planes": closed_defect,
                 "alternating": alternation_defect, "tolerance": limit},
    )
    logger.debug("regularity probe of %r: %s", g, report.defects)
    return report
