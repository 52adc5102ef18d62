"""
Side compensators of 2-germs.

L(omega) is the 1-germ obtained as the limit of the midpoint recursion
L^{n+1}(pq) = L^n(pr) + L^n(rq) - omega(prq), r the midpoint of pq, started
from L^0(pq) = omega(prq). Unrolled over the binary midpoint tree this is

    L^n = W_n - (W_0 + ... + W_{n-1}),

where W_m sums omega over the midpoint triangles of the 2^m depth-m pieces of
[p, q]. The W_m are the dyadic level sums of the 1-germ ab -> omega(a, mid, b),
so the sewing engine computes them with the same reduction tree.
"""
import logging
import threading
from dataclasses import dataclass, field

import numpy as np

from src.rough_forms.config import section
from src.rough_forms.decompose import dya_leaves
from src.rough_forms.errors import DegreeError, ParameterError
from src.rough_forms.germ import Gauge, Germ, coboundary, sample_simplices, seminorm_estimate
from src.rough_forms.sew import BoundCheck, SewOptions, level_sums, run_sequence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CompensatorOptions:
    max_depth: int = 24
    abs_tol: float = 1e-10
    rel_tol: float = 1e-12
    extrapolate: bool = False
    extrapolation: str = "observed"
    min_depth: int = 2
    chunk_size: int = 1 << 20

    def __post_init__(self):
        if self.max_depth < 1 or not self.abs_tol > 0 or not self.rel_tol > 0:
            raise ParameterError("compensator max_depth and tolerances must be positive")

    @classmethod
    def from_config(cls, config=None, **overrides):
        values = section(config, "compensator")
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**{k: v for k, v in values.items() if k in cls.__dataclass_fields__})

    def sew_options(self):
        return SewOptions(max_level=self.max_depth, max_level_1=self.max_depth, abs_tol=self.abs_tol,
                          rel_tol=self.rel_tol, extrapolate=self.extrapolate, extrapolation=self.extrapolation,
                          min_level=self.min_depth, chunk_size=self.chunk_size)


def midpoint_germ(omega):
    """The 1-germ ab -> omega(a, (a+b)/2, b)."""
    if omega.degree != 2:
        raise DegreeError(f"side compensators need a 2-germ, got degree {omega.degree}")

    def batch(v):
        a, b = v[:, 0], v[:, 1]
        return omega.evaluate(np.stack([a, 0.5 * (a + b), b], axis=1))

    return Germ(1, batch, label=f"mid({omega.label})")


def side_compensator_batch(omega, segments, opts=None):
    """
    L(omega) on a batch of segments.

    Args:
        omega: Germ of degree 2
        segments: (N, 2, d) array
        opts: CompensatorOptions

    Returns:
        BatchSewResult whose partial sums are the L^n sequences
    """
    opts = opts or CompensatorOptions()
    v = np.asarray(segments, dtype=float)
    if v.ndim != 3 or v.shape[1] != 2:
        raise DegreeError(f"side compensators act on segments, got shape {v.shape}")
    mid = midpoint_germ(omega)
    sew_opts = opts.sew_options()
    previous = np.zeros(v.shape[0])

    def level(n, active):
        w = level_sums(mid, v[active], n, sew_opts)
        out = w - previous[active]
        previous[active] += w
        return out

    cap = sew_opts.level_cap(1)
    return run_sequence(v.shape[0], cap, level, sew_opts, degree=1, label="compensator")


def side_compensator(omega, seg, opts=None):
    """
    L(omega) on one segment, with the L^n sequence as a SewReport.

    Args:
        omega: Germ of degree 2
        seg: Simplex of degree 1
        opts: CompensatorOptions

    Returns:
        SewReport
    """
    if seg.degree != 1:
        raise DegreeError(f"side compensators act on segments, got degree {seg.degree}")
    report = side_compensator_batch(omega, seg.vertices[None], opts).report(0)
    logger.debug("L(%s) on %s: %r (%s)", omega.label, seg.to_text(), report.value, report.status.value)
    return report


class CompensatorGerm(Germ):
    """
    L(omega) as a 1-germ.

    ``max_error`` tracks the largest error estimate seen and ``max_depth``
    the deepest midpoint level any evaluation reached. At depth n, L^n is
    built from fewer than 2^(n+1) values of omega.
    """

    def __init__(self, omega, opts=None):
        self.omega = omega
        self.opts = opts or CompensatorOptions()
        self._lock = threading.Lock()
        self.max_error = 0.0
        self.max_depth = 0
        super().__init__(1, self._values, label=f"L({omega.label})")

    def evaluate_with_errors(self, vertices):
        v = np.asarray(vertices, dtype=float)
        if v.shape[0] == 0:
            return np.zeros(0), np.zeros(0)
        result = side_compensator_batch(self.omega, v, self.opts)
        with self._lock:
            self.max_error = max(self.max_error, float(np.max(result.error_estimates)))
            self.max_depth = max(self.max_depth, int(np.max(result.levels_used)))
        return result.values, result.error_estimates

    def omega_error_bound(self, omega_error):
        """Propagated bound on L when every omega value is off by at most ``omega_error``."""
        return 2.0 ** (self.max_depth + 1) * omega_error

    def _values(self, vertices):
        return self.evaluate_with_errors(vertices)[0]


def compensator_germ(omega, opts=None):
    return CompensatorGerm(omega, opts)


@dataclass
class CancellationReport:
    """omega(S) against L(omega) on the boundary of S, over sampled triangles."""

    max_discrepancy: float
    tolerance: float
    passed: bool
    witness: list | None = None
    samples: int = 0

    @property
    def ok(self):
        return self.passed

    def to_dict(self):
        return {"max_discrepancy": self.max_discrepancy, "tolerance": self.tolerance,
                "ok": self.ok, "witness": self.witness, "samples": self.samples}


def cancellation_check(omega, opts=None, samples=None, sampler=None, dim=2, tol=1e-7):
    """
    Compare omega with delta L(omega) on triangles.

    The identity holds when omega is closed on 2-planes, alternating and small
    against a strong 2-Dini gauge; those hypotheses are the caller's to
    establish, the check only measures.

    Args:
        omega: Germ of degree 2
        opts: CompensatorOptions
        samples: Optional (N, 3, d) triangle array
        sampler: SamplerConfig used when ``samples`` is None
        dim: Ambient dimension of sampled triangles
        tol: Absolute slack added to the summed error estimates

    Returns:
        CancellationReport; ``witness`` is the triangle with the largest excess
    """
    if samples is None:
        if sampler is None:
            raise ParameterError("cancellation_check needs samples or a sampler")
        samples = sample_simplices(2, dim, sampler)
    tri = np.asarray(samples, dtype=float)
    n = tri.shape[0]
    if n == 0:
        return CancellationReport(0.0, tol, True)
    edges = np.concatenate([tri[:, [1, 2]], tri[:, [0, 2]], tri[:, [0, 1]]])
    values, errors = CompensatorGerm(omega, opts).evaluate_with_errors(edges)
    boundary = values[2 * n:] - values[n:2 * n] + values[:n]
    allowed = errors[2 * n:] + errors[n:2 * n] + errors[:n] + tol
    gap = np.abs(omega.evaluate(tri) - boundary)
    worst = int(np.argmax(gap - allowed))
    return CancellationReport(
        max_discrepancy=float(gap.max()),
        tolerance=float(allowed[worst]),
        passed=bool(np.all(gap <= allowed)),
        witness=tri[worst].tolist(),
        samples=n,
    )


@dataclass
class UniquenessReport:
    """
    Hypotheses and conclusion of the compensator uniqueness statement.

    ``additive``: the 1-germ is midpoint additive on the probes.
    ``decays``: its dyadic absolute sums tend to zero (the small-gauge hypothesis).
    ``vanishes``: the germ is zero on the probes.
    """

    additive: bool
    decays: bool
    vanishes: bool
    additivity_defect: float
    decay: list = field(default_factory=list)

    @property
    def hypotheses_hold(self):
        return self.additive and self.decays

    @property
    def conclusion(self):
        """True when the hypotheses hold and the germ vanishes as they imply."""
        return self.hypotheses_hold and self.vanishes

    def to_dict(self):
        return {"additive": self.additive, "decays": self.decays, "vanishes": self.vanishes,
                "additivity_defect": self.additivity_defect, "decay": self.decay,
                "hypotheses_hold": self.hypotheses_hold, "conclusion": self.conclusion}


def compensator_uniqueness_probe(eta, sampler=None, samples=None, dim=1, depth=12, tol=1e-10):
    """
    Probe the statement "midpoint additive and small implies zero" for a 1-germ.

    Decay is measured as sum_{depth-n pieces} |eta| relative to depth 0; it
    must fall below ``sqrt(tol)`` by ``depth`` for the hypothesis to count.
    """
    if eta.degree != 1:
        raise DegreeError("compensator_uniqueness_probe needs a 1-germ")
    if samples is None:
        if sampler is None:
            raise ParameterError("compensator_uniqueness_probe needs samples or a sampler")
        samples = sample_simplices(1, dim, sampler)
    seg = np.asarray(samples, dtype=float)
    a, b = seg[:, 0], seg[:, 1]
    r = 0.5 * (a + b)
    defect = np.abs(eta.evaluate(np.stack([r, b], 1)) - eta.evaluate(seg) + eta.evaluate(np.stack([a, r], 1)))
    scale = max(1.0, float(np.max(np.abs(eta.evaluate(seg))))) if seg.shape[0] else 1.0
    additivity = float(defect.max()) if defect.size else 0.0

    probe = seg[: min(seg.shape[0], 16)]
    decay = []
    for n in range(depth + 1):
        leaves, _ = dya_leaves(probe, n)
        per_leaf = np.abs(eta.evaluate(leaves)).reshape(probe.shape[0], -1)
        decay.append(float(per_leaf.sum(1).max()) if per_leaf.size else 0.0)
    decays = decay[-1] <= np.sqrt(tol) * max(decay[0], 1.0)
    vanishes = bool(np.all(np.abs(eta.evaluate(seg)) <= tol * scale))
    report = UniquenessReport(additive=additivity <= tol * scale, decays=bool(decays), vanishes=vanishes,
                              additivity_defect=additivity, decay=decay)
    if not report.decays:
        logger.warning("%s does not decay under dyadic refinement; uniqueness hypothesis fails", eta.label)
    return report


def compensator_bound_check(omega, alpha, sampler, opts=None, dim=1, n_segments=64):
    """
    sup |L(omega)| / diam^alpha against (1 - 2^(1-alpha))^-1 [omega]_{diam^alpha}.

    The seminorm is measured on the midpoint triangles of the sampled
    segments and their dyadic descendants, which are the only triangles the
    recursion touches.
    """
    if not alpha > 1:
        raise ParameterError("the compensator bound needs alpha > 1")
    segments = sample_simplices(1, dim, sampler)
    rng = np.random.default_rng(sampler.seed)
    if segments.shape[0] > n_segments:
        segments = segments[np.sort(rng.choice(segments.shape[0], n_segments, replace=False))]
    leaves = np.concatenate([dya_leaves(segments, n)[0] for n in range(0, 9)])
    a, b = leaves[:, 0], leaves[:, 1]
    triangles = np.stack([a, 0.5 * (a + b), b], axis=1)
    est = seminorm_estimate(omega, Gauge.power(2, alpha), samples=triangles)
    values, errors = CompensatorGerm(omega, opts).evaluate_with_errors(segments)
    gauge = Gauge.power(1, alpha).evaluate(segments)
    keep = gauge > 0
    measured = float(np.max(np.abs(values[keep]) / gauge[keep])) if np.any(keep) else 0.0
    slack = float(np.max(errors[keep] / gauge[keep])) if np.any(keep) else 0.0
    return BoundCheck(measured=measured, bound=est.value / (1.0 - 2.0 ** (1.0 - alpha)),
                      seminorm=est.value, slack=slack)


def compensated_residual(omega, opts=None):
    """The 2-germ omega - delta L(omega), whose own compensator vanishes."""
    return omega - coboundary(compensator_germ(omega, opts))
