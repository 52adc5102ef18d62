"""
The sewing operator.

A germ is sewn on a simplex S by computing the dyadic refinement sums
A_n = <dya^n S, g> level by level until the increments settle. The sums use
a fixed reduction tree (siblings first, then parents), so chunking the
leaves or spreading subtrees over threads never changes a single bit of the
result.

Convergence verdicts are numerical, not proofs: "Converged" means two
consecutive increments fell below abs_tol + rel_tol * |A|, "Diverged" means
the increment ratio stayed above divergence_ratio for four levels.
"""
import json
import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from src.rough_forms.config import section
from src.rough_forms.decompose import BUDGET, VARIANTS, branching, cut_t, dya_children, dya_leaves, flip
from src.rough_forms.errors import DegreeError, InsufficientDataError, ParameterError
from src.rough_forms.germ import Gauge, Germ, GermCache, coboundary, seminorm_estimate
from src.rough_forms.simplex import Chain, Simplex, diam

logger = logging.getLogger(__name__)

EXTRAPOLATIONS = ("observed", "romberg")
NOISE_ULPS = 64
DIVERGENCE_LEVELS = 4


class SewStatus(str, Enum):
    CONVERGED = "Converged"
    MAX_LEVEL = "MaxLevel"
    DIVERGED = "Diverged"


@dataclass(frozen=True)
class SewOptions:
    """Knobs of the dyadic sewing loop."""

    max_level: int | None = None
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    variant: str = "dya"
    extrapolate: bool = False
    extrapolation: str = "observed"
    romberg_columns: int = 3
    divergence_ratio: float = 0.95
    rate_window: int = 8
    min_level: int = 0  # no convergence or divergence verdict below this level
    compensated: bool = False
    threads: int = 1
    chunk_size: int = 1 << 20
    max_level_1: int = 14
    max_level_2: int = 10

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ParameterError("sewing tolerances must be positive")
        if self.variant not in VARIANTS:
            raise ParameterError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.extrapolation not in EXTRAPOLATIONS:
            raise ParameterError(f"unknown extrapolation {self.extrapolation!r}; expected one of {EXTRAPOLATIONS}")
        if self.max_level is not None and self.max_level < 0:
            raise ParameterError("max_level must be nonnegative")
        if not 0 < self.divergence_ratio:
            raise ParameterError("divergence_ratio must be positive")
        if self.threads < 1 or self.chunk_size < 1 or self.rate_window < 2 or self.romberg_columns < 0:
            raise ParameterError("threads, chunk_size, rate_window and romberg_columns are out of range")

    @classmethod
    def from_config(cls, config=None, **overrides):
        values = section(config, "sewing")
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**{k: v for k, v in values.items() if k in cls.__dataclass_fields__})

    def with_(self, **changes):
        return replace(self, **changes)

    def level_cap(self, degree):
        """Requested maximum level for this degree, clipped to the k * n <= 30 budget."""
        requested = self.max_level
        if requested is None:
            requested = self.max_level_1 if degree == 1 else self.max_level_2
        allowed = BUDGET // degree
        if requested > allowed:
            logger.warning("max_level %d exceeds the budget for degree %d; capping at %d", requested, degree, allowed)
        return min(requested, allowed)


def _json_float(x):
    return float(x) if x is not None and math.isfinite(x) else None


@dataclass
class SewReport:
    """Outcome of sewing one germ on one simplex."""

    value: float
    status: SewStatus
    partial_sums: list
    increments: list
    observed_rate: float | None
    error_estimate: float
    degree: int = 1
    extrapolated: list | None = None
    notes: list = field(default_factory=list)

    @property
    def levels_used(self):
        return len(self.partial_sums) - 1

    def rate_estimates(self):
        """Per-level ratio |increment_n| / |increment_{n-1}|, None where undefined."""
        out = [None]
        for n in range(1, len(self.partial_sums)):
            if n >= 2 and self.increments[n - 2] > 0:
                out.append(self.increments[n - 1] / self.increments[n - 2])
            else:
                out.append(None)
        return out

    def table_rows(self):
        """Rows (level, n_leaves, partial_sum, increment, rate_estimate) for CSV output."""
        b = 2 ** self.degree
        rates = self.rate_estimates()
        rows = []
        for n, a in enumerate(self.partial_sums):
            inc = self.increments[n - 1] if n else None
            rows.append((n, b ** n, a, inc, rates[n]))
        return rows

    def to_dict(self):
        levels = [{"n": n, "partial_sum": _json_float(a), "increment": _json_float(inc)}
                  for n, _, a, inc, _ in self.table_rows()]
        out = {
            "value": _json_float(self.value),
            "status": self.status.value,
            "levels": levels,
            "observed_rate": _json_float(self.observed_rate),
            "error_estimate": _json_float(self.error_estimate),
        }
        if self.extrapolated is not None:
            out["extrapolated"] = [_json_float(x) for x in self.extrapolated]
        if self.notes:
            out["notes"] = list(self.notes)
        return out

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def _map(fn, items, threads):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _reduce(values, b, compensated):
    """
    Sum each row of an (N, b**n) array along its dyadic tree.

    Siblings are added left to right, then parents, so any split of the
    tree into subtrees reproduces the same floating-point result.
    """
    if compensated:
        return np.array([math.fsum(row) for row in values])
    while values.shape[1] > 1:
        grouped = values.reshape(values.shape[0], -1, b)
        acc = grouped[:, :, 0].copy()
        for c in range(1, b):
            acc += grouped[:, :, c]
        values = acc
    return values[:, 0].copy()


def level_sums(germ, vertices, n, opts, threads=None):
    """
    A_n = <dya^n S, g> for every simplex of a batch.

    Args:
        germ: Germ of degree k
        vertices: (N, k+1, d) array
        n: Refinement level
        opts: SewOptions (variant, chunk_size, compensated)
        threads: Worker threads for this call (defaults to opts.threads)

    Returns:
        (N,) array
    """
    threads = opts.threads if threads is None else threads
    v = np.asarray(vertices, dtype=float)
    k = v.shape[1] - 1
    b = branching(k)
    rows, leaves = v.shape[0], b ** n
    if rows * leaves <= opts.chunk_size:
        leaf_vertices, weights = dya_leaves(v, n, opts.variant)
        values = germ.evaluate(leaf_vertices) * weights
        return _reduce(values.reshape(rows, leaves), b, opts.compensated)
    if rows > 1 and leaves <= opts.chunk_size:
        per_block = max(1, opts.chunk_size // leaves)
        blocks = [v[i:i + per_block] for i in range(0, rows, per_block)]
        return np.concatenate(_map(lambda blk: level_sums(germ, blk, n, opts, threads=1), blocks, threads))
    # one tree is larger than a chunk: descend into its depth-1 subtrees
    children, child_weights = dya_children(v, opts.variant)
    flat = children.reshape(-1, k + 1, v.shape[2])
    parts = _map(lambda i: level_sums(germ, flat[i:i + 1], n - 1, opts, threads=1), range(flat.shape[0]), threads)
    sub = np.concatenate(parts) * np.tile(child_weights, rows)
    return _reduce(sub.reshape(rows, b), b, opts.compensated)


def noise_floor(sums):
    """Increments below this are treated as rounding noise, per column."""
    scale = np.nanmax(np.abs(sums), axis=0) if sums.size else 0.0
    return NOISE_ULPS * np.finfo(float).eps * scale + 1e-300


def fit_rates(increments, window, noise):
    """
    Least-squares decay ratio of increments over the trailing window.

    For an exactly geometric sequence this is its ratio, which is also the
    geometric mean of successive ratios.

    Args:
        increments: (L, M) array of |A_n - A_{n-1}|
        window: Number of trailing rows to use
        noise: (M,) noise floor; smaller increments are ignored

    Returns:
        (M,) array, NaN where fewer than two usable increments exist
    """
    inc = np.abs(increments[-window:])
    if inc.shape[0] == 0:
        return np.full(increments.shape[1], np.nan)
    x = np.arange(inc.shape[0], dtype=float)[:, None]
    mask = inc > noise
    y = np.log2(np.where(mask, inc, 1.0))
    m = mask.astype(float)
    n = m.sum(0)
    sx, sy = (m * x).sum(0), (m * y).sum(0)
    sxx, sxy = (m * x * x).sum(0), (m * x * y).sum(0)
    den = n * sxx - sx * sx
    ok = (n >= 2) & (den > 0)
    slope = np.where(ok, (n * sxy - sx * sy) / np.where(ok, den, 1.0), np.nan)
    return np.where(ok, 2.0 ** slope, np.nan)


def _romberg(sums, columns):
    out = np.empty_like(sums)
    prev = None
    for m in range(sums.shape[0]):
        row = [sums[m]]
        for j in range(1, min(m, columns) + 1):
            row.append(row[j - 1] + (row[j - 1] - prev[j - 1]) / (2.0 ** j - 1.0))
        out[m] = row[-1]
        prev = row
    return out


def _observed(sums, window):
    out = sums.copy()
    d = np.diff(sums, axis=0)
    noise = noise_floor(sums)
    for m in range(2, sums.shape[0]):
        rate = fit_rates(d[:m], window, noise)
        q = np.sign(d[m - 1] * d[m - 2]) * rate
        usable = np.isfinite(rate) & (rate < 1.0) & (d[m - 2] != 0)
        q = np.where(usable, q, 0.0)
        out[m] = np.where(usable, sums[m] + d[m - 1] * q / (1.0 - q), sums[m])
    return out


def extrapolate_sequence(sums, opts):
    """
    Accelerated limits of partial-sum sequences, one column per simplex.

    "romberg" eliminates the integer powers of the mesh size 2^-n; "observed"
    removes the geometric tail using the fitted decay ratio.
    """
    sums = np.asarray(sums, dtype=float)
    if sums.ndim == 1:
        return extrapolate_sequence(sums[:, None], opts)[:, 0]
    if opts.extrapolation == "romberg":
        return _romberg(sums, opts.romberg_columns)
    return _observed(sums, opts.rate_window)


@dataclass
class BatchSewResult:
    """Sewing outcome for a batch of simplices."""

    values: np.ndarray
    error_estimates: np.ndarray
    statuses: list
    levels_used: np.ndarray
    partial_sums: np.ndarray
    observed_rates: np.ndarray
    extrapolated: np.ndarray | None = None
    degree: int = 1
    notes: list = field(default_factory=list)

    def report(self, j):
        """SewReport for simplex j of the batch."""
        last = int(self.levels_used[j])
        sums = self.partial_sums[: last + 1, j]
        rate = self.observed_rates[j]
        return SewReport(
            value=float(self.values[j]),
            status=self.statuses[j],
            partial_sums=sums.tolist(),
            increments=np.abs(np.diff(sums)).tolist(),
            observed_rate=float(rate) if np.isfinite(rate) else None,
            error_estimate=float(self.error_estimates[j]),
            degree=self.degree,
            extrapolated=self.extrapolated[: last + 1, j].tolist() if self.extrapolated is not None else None,
            notes=list(self.notes),
        )


def _finish(sums, opts):
    """Values, error estimates and rates for columns that stopped at the same level."""
    d = np.abs(np.diff(sums, axis=0))
    noise = noise_floor(sums)
    rates = fit_rates(d, opts.rate_window, noise) if d.shape[0] else np.full(sums.shape[1], np.nan)
    if opts.extrapolate:
        ext = extrapolate_sequence(sums, opts)
        values = ext[-1]
        errors = np.abs(ext[-1] - ext[-2]) if sums.shape[0] >= 2 else np.full(sums.shape[1], np.inf)
        return values, errors, rates, ext
    values = sums[-1]
    if d.shape[0] == 0:
        return values, np.full(sums.shape[1], np.inf), rates, None
    last = np.where(d[-1] > noise, d[-1], 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        geometric = last / (1.0 - rates)
    errors = np.where(np.isnan(rates), last, np.where(rates < 1.0, geometric, np.inf))
    errors = np.where(last == 0.0, 0.0, errors)
    return values, errors, rates, None


def run_sequence(n_rows, cap, level_fn, opts, degree=1, label="sew"):
    """
    Drive a batch of partial-sum sequences to convergence.

    Args:
        n_rows: Number of sequences
        cap: Last level to compute
        level_fn: Callable (n, active_rows) -> values of the sequences at level n
        opts: SewOptions (tolerances, extrapolation, divergence_ratio, min_level)
        degree: Degree reported by the resulting SewReports
        label: Name used in debug logging

    Returns:
        BatchSewResult
    """
    sums = np.full((cap + 1, n_rows), np.nan)
    statuses = np.full(n_rows, 1)  # 0 converged, 1 max level, 2 diverged
    last = np.full(n_rows, cap)
    streak = np.zeros(n_rows, dtype=int)
    rising = np.zeros(n_rows, dtype=int)
    active = np.arange(n_rows)
    for n in range(cap + 1):
        if active.size == 0:
            break
        sums[n, active] = level_fn(n, active)
        if n == 0:
            continue
        seq = sums[: n + 1, active]
        if opts.extrapolate:
            seq = extrapolate_sequence(seq, opts)
        small = np.abs(seq[n] - seq[n - 1]) <= opts.abs_tol + opts.rel_tol * np.abs(seq[n - 1])
        streak[active] = np.where(small, streak[active] + 1, 0)
        if n >= max(2, opts.min_level):
            inc = np.abs(sums[n, active] - sums[n - 1, active])
            prev = np.abs(sums[n - 1, active] - sums[n - 2, active])
            growing = (inc > opts.abs_tol) & (inc >= opts.divergence_ratio * prev)
            rising[active] = np.where(growing, rising[active] + 1, 0)
        converged = (streak[active] >= 2) & (n >= opts.min_level)
        diverged = ~converged & (rising[active] >= DIVERGENCE_LEVELS)
        stopped = converged | diverged
        statuses[active[converged]] = 0
        statuses[active[diverged]] = 2
        last[active[stopped]] = n
        logger.debug("%s level %d: %d active, %d converged, %d diverged",
                     label, n, active.size, int(converged.sum()), int(diverged.sum()))
        active = active[~stopped]

    values = np.empty(n_rows)
    errors = np.empty(n_rows)
    rates = np.full(n_rows, np.nan)
    extrapolated = np.full_like(sums, np.nan) if opts.extrapolate else None
    for level in np.unique(last):
        cols = np.nonzero(last == level)[0]
        val, err, rate, ext = _finish(sums[: level + 1, cols], opts)
        values[cols], errors[cols], rates[cols] = val, err, rate
        if ext is not None:
            extrapolated[: level + 1, cols] = ext
    names = (SewStatus.CONVERGED, SewStatus.MAX_LEVEL, SewStatus.DIVERGED)
    return BatchSewResult(values, errors, [names[s] for s in statuses], last, sums, rates,
                          extrapolated=extrapolated, degree=degree)


def sew_batch(germ, vertices, opts=None):
    """
    Sew a germ on every simplex of a batch.

    Simplices drop out of the loop once they converge or diverge; the rest
    keep refining until the level cap.

    Args:
        germ: Germ of degree 1 or 2
        vertices: (N, k+1, d) array
        opts: SewOptions

    Returns:
        BatchSewResult
    """
    opts = opts or SewOptions()
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 3:
        raise DegreeError(f"sew_batch expects an (N, k+1, d) array, got shape {v.shape}")
    k = v.shape[1] - 1
    if germ.degree != k:
        raise DegreeError(f"germ of degree {germ.degree} cannot be sewn on simplices of degree {k}")
    branching(k)
    cap = opts.level_cap(k)
    result = run_sequence(v.shape[0], cap, lambda n, active: level_sums(germ, v[active], n, opts), opts, degree=k)
    requested = opts.max_level if opts.max_level is not None else (opts.max_level_1 if k == 1 else opts.max_level_2)
    if requested > cap:
        result.notes.append(f"level cap reduced from {requested} to {cap} by the k*n <= {BUDGET} budget")
    return result


def sew_eval(g, s, opts=None):
    """
    Sew a germ on one simplex.

    Args:
        g: Germ of degree 1 or 2
        s: Simplex of the same degree
        opts: SewOptions

    Returns:
        SewReport
    """
    if g.degree != s.degree:
        raise DegreeError(f"germ of degree {g.degree} cannot be sewn on a simplex of degree {s.degree}")
    report = sew_batch(g, s.vertices[None], opts).report(0)
    logger.debug("sewed %r: value=%r status=%s levels=%d", g, report.value, report.status.value, report.levels_used)
    return report


def sew_rate(g, s, opts=None):
    """
    Observed geometric decay ratio of the increments.

    For a germ whose coboundary is small against diam^gamma the expected
    ratio is 2^(k - gamma).

    Raises:
        InsufficientDataError: fewer than three nonzero increments
    """
    report = sew_eval(g, s, opts)
    sums = np.asarray(report.partial_sums)[:, None]
    noise = float(noise_floor(sums)[0])
    usable = sum(1 for inc in report.increments if inc > noise)
    if usable < 3 or report.observed_rate is None:
        raise InsufficientDataError(f"only {usable} nonzero increments; cannot fit a rate")
    return report.observed_rate


class SewnGerm(Germ):
    """
    The sewn germ sew(g) as a germ of its own, evaluated by batch sewing.

    ``max_error`` holds the largest error estimate seen by any evaluation;
    ``diverged_report`` keeps the first diverged run, if any.
    """

    def __init__(self, germ, opts=None, cache=False, decimals=12, label=None):
        self.base = germ
        self.opts = opts or SewOptions()
        self._lock = threading.Lock()
        self.max_error = 0.0
        self.evaluations = 0
        self.diverged = 0
        self.diverged_report = None
        super().__init__(germ.degree, self._sew_values, label=label or f"sew({germ.label})",
                         cache=GermCache(decimals) if cache else None)

    def evaluate_with_errors(self, vertices):
        """Sew a batch and return (values, error_estimates)."""
        v = np.asarray(vertices, dtype=float)
        if v.shape[0] == 0:
            return np.zeros(0), np.zeros(0)
        result = sew_batch(self.base, v, self.opts)
        bad = [j for j, status in enumerate(result.statuses) if status is SewStatus.DIVERGED]
        with self._lock:
            self.max_error = max(self.max_error, float(np.max(result.error_estimates)))
            self.evaluations += v.shape[0]
            self.diverged += len(bad)
            if bad and self.diverged_report is None:
                self.diverged_report = result.report(bad[0])
        return result.values, result.error_estimates

    def _sew_values(self, vertices):
        return self.evaluate_with_errors(vertices)[0]


def sewn(g, opts=None, cache=True):
    """sew(g) as a germ, memoized by default."""
    return SewnGerm(g, opts, cache=cache)


@dataclass(frozen=True)
class CertifyConfig:
    n_probes: int = 6
    tol: float = 1e-7
    cut_t: float = 0.3
    seed: int = 0

    @classmethod
    def from_config(cls, config=None, **overrides):
        values = section(config, "certify")
        values.update(overrides)
        return cls(**{k: v for k, v in values.items() if k in cls.__dataclass_fields__})


@dataclass
class CheckResult:
    passed: bool
    max_defect: float
    tolerance: float
    witness: list | None = None

    def to_dict(self):
        return {"passed": self.passed, "max_defect": _json_float(self.max_defect),
                "tolerance": _json_float(self.tolerance), "witness": self.witness}


@dataclass
class CertificationReport:
    """Per-property verdicts for a sewn germ."""

    checks: dict

    @property
    def passed(self):
        return all(c.passed for c in self.checks.values())

    def to_dict(self):
        return {"passed": self.passed, "checks": {k: c.to_dict() for k, c in self.checks.items()}}


def _chain_with_errors(sewn_germ, chain):
    verts, weights = chain.to_arrays()
    values, errors = sewn_germ.evaluate_with_errors(verts)
    return float(np.dot(weights, values)), float(np.sum(errors))


def _degenerate_probe(s):
    v = s.vertices
    if s.degree == 1:
        return Simplex([v[0], v[0]])
    return Simplex([v[0], v[1], 0.5 * (v[0] + v[1])])


def certify_sewn(g, sewn_germ=None, config=None, probes=None, dim=None, opts=None):
    """
    Check that sewn values behave like a regular germ on probe simplices.

    The four checks are antisymmetry under a vertex transposition, additivity
    under cut_t, vanishing on flip chains (degree 2) and vanishing on
    degenerate simplices. Each comparison allows the summed error estimates
    plus ``config.tol``.

    Args:
        g: Germ of degree 1 or 2
        sewn_germ: SewnGerm to certify (default: sew g with ``opts``)
        config: CertifyConfig
        probes: Optional list of probe simplices
        dim: Ambient dimension for random probes
        opts: SewOptions for the default sewn germ

    Returns:
        CertificationReport
    """
    config = config or CertifyConfig()
    sewn_germ = sewn_germ or SewnGerm(g, opts)
    k = g.degree
    if probes is None:
        rng = np.random.default_rng(config.seed)
        d = dim or max(1, k)
        probes = [Simplex(rng.uniform(0.0, 1.0, (k + 1, d))) for _ in range(config.n_probes)]
    swap = [1, 0] if k == 1 else [0, 2, 1]

    def run(build):
        worst, worst_tol, witness, passed = 0.0, config.tol, None, True
        for s in probes:
            lhs_chain, rhs_chain = build(s)
            lhs, lerr = _chain_with_errors(sewn_germ, lhs_chain)
            rhs, rerr = _chain_with_errors(sewn_germ, rhs_chain) if rhs_chain is not None else (0.0, 0.0)
            defect = abs(lhs - rhs)
            tol = lerr + rerr + config.tol
            if defect > tol and passed:
                passed = False
                witness = [c.to_text() for _, c in lhs_chain] + ([c.to_text() for _, c in rhs_chain] if rhs_chain else [])
            if defect > worst:
                worst, worst_tol = defect, tol
        return CheckResult(passed, worst, worst_tol, witness)

    checks = {
        "antisymmetry": run(lambda s: (Chain([(1.0, s), (1.0, Simplex(s.vertices[swap]))]), None)),
        "cut": run(lambda s: (Chain.of(s), cut_t(config.cut_t, s))),
        "degenerate": run(lambda s: (Chain.of(_degenerate_probe(s)), None)),
    }
    if k == 2:
        checks["flip"] = run(lambda s: (flip(s), None))
    report = CertificationReport(checks)
    if not report.passed:
        failed = [name for name, c in checks.items() if not c.passed]
        logger.warning("certification of %r failed: %s", g, ", ".join(failed))
    return report


@dataclass
class LocalityReport:
    inside: bool
    evaluations: int
    min_barycentric: float


def locality_probe(g, s, opts=None, tol=1e-12):
    """Record every simplex the sewing evaluates and check it lies in conv(S)."""
    seen = []

    def recording(v):
        seen.append(np.array(v, copy=True))
        return g.evaluate(v)

    sew_eval(Germ(g.degree, recording, label=g.label), s, opts)
    points = np.concatenate([v.reshape(-1, v.shape[-1]) for v in seen])
    base = s.vertices[0]
    edges = (s.vertices[1:] - base).T
    coeffs, *_ = np.linalg.lstsq(edges, (points - base).T, rcond=None)
    bary = np.vstack([1.0 - coeffs.sum(0), coeffs])
    residual = np.abs(edges @ coeffs - (points - base).T).max() if points.size else 0.0
    min_bary = float(bary.min()) if bary.size else 0.0
    return LocalityReport(inside=min_bary >= -tol and residual <= tol * max(1.0, diam(s)),
                          evaluations=int(points.shape[0]), min_barycentric=min_bary)


@dataclass
class ComparisonReport:
    """lhs vs rhs with a combined tolerance."""

    lhs: float
    rhs: float
    tolerance: float

    @property
    def discrepancy(self):
        return abs(self.lhs - self.rhs)

    @property
    def ok(self):
        return self.discrepancy <= self.tolerance

    def to_dict(self):
        return {"lhs": _json_float(self.lhs), "rhs": _json_float(self.rhs),
                "discrepancy": _json_float(self.discrepancy), "tolerance": _json_float(self.tolerance), "ok": self.ok}


@dataclass
class BoundCheck:
    """A measured quantity against an a-priori bound, with additive slack."""

    measured: float
    bound: float
    seminorm: float
    slack: float = 0.0

    @property
    def ok(self):
        return self.measured <= self.bound * (1.0 + 1e-9) + self.slack

    def to_dict(self):
        return {"measured": _json_float(self.measured), "bound": _json_float(self.bound),
                "seminorm": _json_float(self.seminorm), "slack": _json_float(self.slack), "ok": self.ok}


def linearity_check(g1, g2, a, b, s, opts=None, tol=1e-12):
    """sew(a g1 + b g2) against a sew(g1) + b sew(g2)."""
    combined = sew_eval(a * g1 + b * g2, s, opts)
    r1, r2 = sew_eval(g1, s, opts), sew_eval(g2, s, opts)
    return ComparisonReport(combined.value, a * r1.value + b * r2.value,
                            combined.error_estimate + abs(a) * r1.error_estimate + abs(b) * r2.error_estimate + tol)


def idempotence_check(g, s, opts=None, outer_opts=None, tol=1e-12):
    """Sewing an already sewn germ changes its value by at most the error estimates."""
    inner = SewnGerm(g, opts)
    first = sew_eval(g, s, opts)
    again = sew_eval(inner, s, outer_opts or opts)
    return ComparisonReport(again.value, first.value,
                            again.error_estimate + first.error_estimate + inner.max_error + tol)


def sew_error_bound(g, s, gamma, sampler, opts=None):
    """
    The a-priori bound |sew g(S) - g(S)| <= [delta g]_u (1 - 2^(k - gamma))^-1 diam(S)^gamma.

    Returns:
        BoundCheck of the observed deviation against the bound
    """
    k = g.degree
    if gamma <= k:
        raise ParameterError(f"gamma must exceed the degree {k}")
    u = Gauge.power(k + 1, gamma)
    est = seminorm_estimate(coboundary(g), u, sampler, dim=s.dim)
    report = sew_eval(g, s, opts)
    deviation = abs(report.value - g(s))
    bound = est.value / (1.0 - 2.0 ** (k - gamma)) * diam(s) ** gamma
    return BoundCheck(deviation, bound, est.value, report.error_estimate)
