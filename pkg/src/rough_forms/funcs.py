"""
Scalar point functions (0-germs) with Hölder metadata, and the catalog of
test functions the integrals are exercised with.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from src.rough_forms.errors import DimensionError, ParameterError
from src.rough_forms.expr import eval_batch, format_expr, free_variables, parse_expr, weierstrass_series
from src.rough_forms.germ import scalar_germ

logger = logging.getLogger(__name__)

DEFAULT_TERMS = 40


def _as_points(points):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    return pts


def _min_alpha(a, b):
    if a is None or b is None:
        return None
    return min(a, b)


@dataclass(frozen=True, eq=False)
class Scalar0:
    """
    A real function on points.

    ``evaluator`` maps an (N, d) array of points to an (N,) array. The Hölder
    metadata is advisory: integrals compare exponent sums against the degree
    and warn, they never refuse to run.
    """

    evaluator: Callable
    holder_alpha: float | None = None
    holder_const: float | None = None
    label: str = "f"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.holder_alpha is not None and not 0 < self.holder_alpha <= 1:
            raise ParameterError(f"Hölder exponent must lie in (0, 1], got {self.holder_alpha}")

    def evaluate(self, points):
        pts = _as_points(points)
        return np.broadcast_to(np.asarray(self.evaluator(pts), dtype=float), (pts.shape[0],)).copy()

    def __call__(self, p):
        return float(self.evaluate(np.atleast_1d(np.asarray(p, dtype=float))[None])[0])

    def as_germ(self):
        return scalar_germ(self.evaluate, label=self.label)

    def __add__(self, other):
        if isinstance(other, Scalar0):
            const = None
            if self.holder_alpha == other.holder_alpha and None not in (self.holder_const, other.holder_const):
                const = self.holder_const + other.holder_const
            return Scalar0(lambda p: self.evaluate(p) + other.evaluate(p), _min_alpha(self.holder_alpha, other.holder_alpha),
                           const, f"({self.label} + {other.label})")
        c = float(other)
        return Scalar0(lambda p: self.evaluate(p) + c, self.holder_alpha, self.holder_const, f"({self.label} + {c:g})")

    __radd__ = __add__

    def __neg__(self):
        return Scalar0(lambda p: -self.evaluate(p), self.holder_alpha, self.holder_const, f"-{self.label}")

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Scalar0):
            # the product constant needs sup bounds we do not track
            return Scalar0(lambda p: self.evaluate(p) * other.evaluate(p), _min_alpha(self.holder_alpha, other.holder_alpha),
                           None, f"{self.label}*{other.label}")
        c = float(other)
        const = abs(c) * self.holder_const if self.holder_const is not None else None
        return Scalar0(lambda p: c * self.evaluate(p), self.holder_alpha, const, f"{c:g}*{self.label}")

    __rmul__ = __mul__

    def map(self, fn, lipschitz=None, label=None):
        """phi o f for a vectorized real function phi; Lipschitz phi keeps the exponent."""
        alpha = self.holder_alpha if lipschitz is not None else None
        const = lipschitz * self.holder_const if lipschitz is not None and self.holder_const is not None else None
        return Scalar0(lambda p: fn(self.evaluate(p)), alpha, const, label or f"phi({self.label})")

    def compose(self, point_map, sigma=None, const=None, label=None):
        """
        f o phi for a vectorized point map phi: (N, m) -> (N, d).

        With phi sigma-Hölder (constant ``const``) the result is
        (alpha * sigma)-Hölder with constant holder_const * const^alpha.
        """
        alpha = self.holder_alpha * sigma if self.holder_alpha is not None and sigma is not None else None
        c = None
        if alpha is not None and const is not None and self.holder_const is not None:
            c = self.holder_const * const ** self.holder_alpha
        return Scalar0(lambda p: self.evaluate(point_map(_as_points(p))), alpha, c, label or f"{self.label}(phi)")


def coordinate(i, label=None):
    """The i-th coordinate function (0-based)."""
    names = ("x", "y", "z")
    return Scalar0(lambda p: p[:, i], 1.0, 1.0, label or (names[i] if i < 3 else f"x{i + 1}"))


def constant(c):
    c = float(c)
    return Scalar0(lambda p: np.full(p.shape[0], c), 1.0, 0.0, f"{c:g}")


def linear(coeffs, offset=0.0):
    a = np.asarray(coeffs, dtype=float)
    return Scalar0(lambda p: p[:, : a.shape[0]] @ a + offset, 1.0, float(np.linalg.norm(a)),
                   "linear(" + ", ".join(f"{x:g}" for x in a) + ")")


def polynomial(coeffs, axis=0):
    """sum_k coeffs[k] * x_axis^k."""
    c = [float(x) for x in coeffs]
    return Scalar0(lambda p: np.polynomial.polynomial.polyval(p[:, axis], c), 1.0, None,
                   "poly(" + ", ".join(f"{x:g}" for x in c) + ")")


def _direction(direction, axis):
    if direction is None:
        return None
    return np.atleast_1d(np.asarray(direction, dtype=float))


def _project(p, direction, axis):
    if direction is None:
        return p[:, axis]
    if p.shape[1] < direction.shape[0]:
        raise DimensionError(f"direction has {direction.shape[0]} components, points have {p.shape[1]}")
    return p[:, : direction.shape[0]] @ direction


@dataclass(frozen=True)
class Weierstrass:
    """
    W(t) = sum_{k < terms} a^k cos(b^k pi t), read along a coordinate or a direction.

    For ab > 1 the Hölder exponent is -ln a / ln b; otherwise W is Lipschitz.
    """

    a: float = 0.5
    b: float = 3.0
    terms: int = DEFAULT_TERMS
    axis: int = 0
    direction: tuple | None = None

    def __post_init__(self):
        if not 0 < self.a < 1 or self.b <= 1 or self.terms < 1:
            raise ParameterError("Weierstrass parameters need 0 < a < 1, b > 1 and terms >= 1")

    @property
    def alpha(self):
        if self.a * self.b > 1:
            return -math.log(self.a) / math.log(self.b)
        return 1.0

    def tail_bound(self):
        """Uniform truncation error a^terms / (1 - a)."""
        return self.a ** self.terms / (1.0 - self.a)

    def series(self, t):
        return weierstrass_series(self.a, self.b, self.terms, t)

    def antiderivative_series(self, t):
        """F(t) = sum_k a^k sin(b^k pi t) / (b^k pi), so that F' = W."""
        t = np.asarray(t, dtype=float)
        total = np.zeros_like(t)
        for k in range(self.terms):
            w = self.b ** k * np.pi
            total = total + self.a ** k * np.sin(w * t) / w
        return total

    def _t(self, p):
        return _project(_as_points(p), _direction(self.direction, self.axis), self.axis)

    def scalar(self):
        label = f"W({self.a:g},{self.b:g})"
        return Scalar0(lambda p: self.series(self._t(p)), self.alpha, None, label, meta={"weierstrass": self})

    def antiderivative(self):
        """F composed with the same projection, as a Scalar0."""
        return Scalar0(lambda p: self.antiderivative_series(self._t(p)), 1.0, None,
                       f"F({self.a:g},{self.b:g})", meta={"weierstrass": self})


def weierstrass(a=0.5, b=3.0, terms=DEFAULT_TERMS, axis=0, direction=None):
    direction = tuple(direction) if direction is not None else None
    return Weierstrass(a, b, terms, axis, direction).scalar()


def trig(kind="cos", freq=1.0, direction=None, amplitude=1.0, phase=0.0, axis=0,
         holder_alpha=None, holder_const=None):
    """
    amplitude * kind(freq * xi.p + phase).

    Without explicit metadata the function is reported Lipschitz with
    constant |amplitude| * freq * |xi|.
    """
    if kind not in ("sin", "cos"):
        raise ParameterError(f"trig kind must be 'sin' or 'cos', got {kind!r}")
    fn = np.sin if kind == "sin" else np.cos
    xi = _direction(direction, axis)
    norm = float(np.linalg.norm(xi)) if xi is not None else 1.0
    if holder_alpha is None:
        holder_alpha, holder_const = 1.0, abs(amplitude) * abs(freq) * norm
    return Scalar0(lambda p: amplitude * fn(freq * _project(_as_points(p), xi, axis) + phase),
                   holder_alpha, holder_const, f"{amplitude:g}*{kind}({freq:g}t)")


def from_expression(text, dim=None, holder_alpha=None, holder_const=None):
    """
    Scalar0 from expression text.

    Hölder metadata is whatever the caller supplies; nothing is inferred.

    Raises:
        ExpressionError: text does not parse
        DimensionError: the expression reads a coordinate beyond ``dim``
    """
    e = parse_expr(text)
    used = free_variables(e)
    if dim is not None and used and max(used) >= dim:
        raise DimensionError(f"{text!r} reads x{max(used) + 1} but the domain has dimension {dim}")
    return Scalar0(lambda p: eval_batch(e, p), holder_alpha, holder_const, format_expr(e), meta={"expr": e})


CATALOG = {
    "coordinate": coordinate,
    "constant": constant,
    "linear": linear,
    "polynomial": polynomial,
    "weierstrass": weierstrass,
    "trig": trig,
    "expression": from_expression,
}


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    params: dict
    scalar: Scalar0


def catalog_entry(name, **params):
    try:
        ctor = CATALOG[name]
    except KeyError:
        raise ParameterError(f"unknown catalog function {name!r}; expected one of {sorted(CATALOG)}") from None
    return CatalogEntry(name, params, ctor(**params))


@dataclass
class HolderRow:
    """Measured sup |delta f| / h^alpha per scale h = 2^-n."""

    alpha: float
    per_scale: list
    constant: float
    growth: float

    def to_dict(self):
        return {"alpha": self.alpha, "per_scale": self.per_scale, "constant": self.constant, "growth": self.growth}


def holder_probe(f, interval=(0.0, 1.0), exponents=(0.5, 1.0), dim=1, n_scales=16, n_samples=512, seed=0):
    """
    Multi-scale difference quotients of f.

    For each scale h = 2^-n, n = 1..n_scales, pairs (p, p + h u) with u a
    random unit vector are drawn inside the box ``interval^dim``. ``growth``
    is the ratio of the finest-scale maximum to the coarsest-scale one: it
    stays near 1 at the true exponent and blows up above it.

    Returns:
        list[HolderRow], one per exponent
    """
    lo, hi = interval
    rng = np.random.default_rng(seed)
    raw = []
    for n in range(1, n_scales + 1):
        h = (hi - lo) * 2.0 ** -n
        u = rng.normal(size=(n_samples, dim))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        # keep both endpoints inside the box
        p = rng.uniform(lo + h, hi - h, (n_samples, dim)) if dim > 1 else rng.uniform(lo, hi - h, (n_samples, 1))
        if dim == 1:
            u = np.abs(u)
        q = p + h * u
        raw.append((h, np.abs(f.evaluate(q) - f.evaluate(p))))
    rows = []
    for alpha in exponents:
        per_scale = [float(np.max(d) / h ** alpha) for h, d in raw]
        coarse = max(per_scale[: max(1, n_scales // 4)])
        growth = per_scale[-1] / coarse if coarse > 0 else (0.0 if per_scale[-1] == 0 else math.inf)
        rows.append(HolderRow(alpha, per_scale, max(per_scale), growth))
    return rows
