"""
Points, simplices and polyhedral chains, with the purely algebraic operators
on them: boundary, push-forward, permutations, scaling and volumes.

Simplices are stored as read-only ``(k+1, d)`` float arrays. Batched code
elsewhere in the package works directly on ``(N, k+1, d)`` arrays; the batch
volume helpers below are shared by both paths so scalar and vectorized
results agree bit for bit.
"""
from dataclasses import dataclass
from itertools import combinations
from math import factorial

import numpy as np

from src.rough_forms.errors import DegreeError, DimensionError, ParameterError, PermutationError

MAX_DIM = 8
MAX_DEGREE = 3
DEGENERACY_TOL = 1e-14


def as_point(p):
    """
    Convert a coordinate sequence (or a bare number) to a point array.

    Args:
        p: Number or sequence of 1..8 finite coordinates

    Returns:
        1-D float array
    """
    arr = np.atleast_1d(np.asarray(p, dtype=float))
    if arr.ndim != 1 or not 1 <= arr.shape[0] <= MAX_DIM:
        raise DimensionError(f"points must have 1..{MAX_DIM} coordinates, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError("point coordinates must be finite")
    return arr + 0.0


class Simplex:
    """An ordered list of k+1 points of equal dimension (0 <= k <= 3)."""

    __slots__ = ("_vertices",)

    def __init__(self, vertices):
        arr = np.array(vertices, dtype=float)
        if arr.ndim == 1:
            # [a, b, c] is read as points on the real line
            arr = arr[:, None]
        if arr.ndim != 2:
            raise DimensionError(f"cannot build a simplex from an array of shape {arr.shape}")
        if not 0 <= arr.shape[0] - 1 <= MAX_DEGREE:
            raise DegreeError(f"simplex degree must be in 0..{MAX_DEGREE}, got {arr.shape[0] - 1}")
        if not 1 <= arr.shape[1] <= MAX_DIM:
            raise DimensionError(f"ambient dimension must be in 1..{MAX_DIM}, got {arr.shape[1]}")
        if not np.all(np.isfinite(arr)):
            raise ParameterError("simplex vertices must be finite")
        arr = arr + 0.0  # folds -0.0 into 0.0 so equal simplices hash equally
        arr.flags.writeable = False
        self._vertices = arr

    @classmethod
    def parse(cls, text):
        """
        Parse the CLI syntax ``"x1,y1;x2,y2;x3,y3"``.

        Args:
            text: Semicolon-separated vertices of comma-separated coordinates

        Returns:
            Simplex
        """
        try:
            rows = [[float(c) for c in chunk.split(",")] for chunk in text.split(";")]
        except ValueError as e:
            raise ParameterError(f"bad simplex syntax {text!r}: {e}") from None
        if len({len(r) for r in rows}) != 1:
            raise DimensionError(f"vertices of {text!r} have different dimensions")
        return cls(rows)

    @property
    def vertices(self):
        return self._vertices

    @property
    def degree(self):
        return self._vertices.shape[0] - 1

    @property
    def dim(self):
        return self._vertices.shape[1]

    def __len__(self):
        return self._vertices.shape[0]

    def __getitem__(self, i):
        return self._vertices[i]

    def key(self):
        """Tuple-of-tuples key used for exact sorting and merging."""
        return tuple(tuple(row) for row in self._vertices.tolist())

    def faces(self):
        """The faces [p0..^pi..pk] in order i = 0..k."""
        if self.degree == 0:
            raise DegreeError("a 0-simplex has no faces")
        return [Simplex(np.delete(self._vertices, i, axis=0)) for i in range(len(self))]

    def to_text(self):
        return ";".join(",".join(repr(c) for c in row) for row in self._vertices.tolist())

    def __eq__(self, other):
        if not isinstance(other, Simplex):
            return NotImplemented
        return self._vertices.shape == other._vertices.shape and np.array_equal(self._vertices, other._vertices)

    def __hash__(self):
        return hash((self._vertices.shape, self._vertices.tobytes()))

    def __repr__(self):
        return f"Simplex({self._vertices.tolist()})"


class Chain:
    """A finite real-weighted formal sum of simplices of one degree."""

    __slots__ = ("degree", "terms")

    def __init__(self, terms=(), degree=None):
        terms = tuple((float(w), s) for w, s in terms)
        degrees = {s.degree for _, s in terms}
        dims = {s.dim for _, s in terms}
        if len(degrees) > 1:
            raise DegreeError(f"chain mixes simplex degrees {sorted(degrees)}")
        if len(dims) > 1:
            raise DimensionError(f"chain mixes ambient dimensions {sorted(dims)}")
        if degrees:
            (found,) = degrees
            if degree is not None and degree != found:
                raise DegreeError(f"chain declared degree {degree} but holds degree {found}")
            degree = found
        if degree is None:
            raise DegreeError("an empty chain needs an explicit degree")
        self.degree = degree
        self.terms = terms

    @classmethod
    def of(cls, simplex, weight=1.0):
        return cls([(weight, simplex)])

    @property
    def dim(self):
        return self.terms[0][1].dim if self.terms else None

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def __add__(self, other):
        if not isinstance(other, Chain):
            return NotImplemented
        if other.degree != self.degree:
            raise DegreeError(f"cannot add chains of degree {self.degree} and {other.degree}")
        return Chain(self.terms + other.terms, degree=self.degree)

    def __neg__(self):
        return Chain([(-w, s) for w, s in self.terms], degree=self.degree)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        return Chain([(scalar * w, s) for w, s in self.terms], degree=self.degree)

    __rmul__ = __mul__

    def normalize(self):
        """Merge equal simplices, drop zero weights and sort terms by vertex key."""
        merged = {}
        for w, s in self.terms:
            k = s.key()
            if k in merged:
                merged[k] = (merged[k][0] + w, s)
            else:
                merged[k] = (w, s)
        kept = [(w, s) for key, (w, s) in sorted(merged.items()) if w != 0.0]
        return Chain(kept, degree=self.degree)

    def is_zero(self):
        return len(self.normalize()) == 0

    def to_arrays(self):
        """
        Stack the chain into arrays for vectorized evaluation.

        Returns:
            Tuple (vertices of shape (N, k+1, d), weights of shape (N,))
        """
        if not self.terms:
            return np.zeros((0, self.degree + 1, 1)), np.zeros(0)
        return (np.stack([s.vertices for _, s in self.terms]),
                np.array([w for w, _ in self.terms]))

    def __eq__(self, other):
        if not isinstance(other, Chain):
            return NotImplemented
        a, b = self.normalize(), other.normalize()
        return a.degree == b.degree and len(a) == len(b) and all(
            wa == wb and sa == sb for (wa, sa), (wb, sb) in zip(a.terms, b.terms))

    def __hash__(self):
        return hash(tuple((w, s.key()) for w, s in self.normalize().terms))

    def __repr__(self):
        body = " + ".join(f"{w:g}*{s.key()}" for w, s in self.terms) or "0"
        return f"Chain[{self.degree}]({body})"


@dataclass(frozen=True, eq=False)
class AffineMap:
    """The map x -> A x + q from R^d to R^d'."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        q = np.atleast_1d(np.asarray(self.offset, dtype=float))
        if a.shape[0] != q.shape[0]:
            raise DimensionError(f"matrix rows {a.shape[0]} != offset length {q.shape[0]}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(q))):
            raise ParameterError("affine map entries must be finite")
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "offset", q)

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim), np.zeros(dim))

    @classmethod
    def scaling(cls, lam, dim):
        return cls(lam * np.eye(dim), np.zeros(dim))

    @property
    def in_dim(self):
        return self.matrix.shape[1]

    @property
    def out_dim(self):
        return self.matrix.shape[0]

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != self.in_dim:
            raise DimensionError(f"affine map expects dimension {self.in_dim}, got {pts.shape[-1]}")
        return pts @ self.matrix.T + self.offset

    def compose(self, inner):
        """Return self o inner."""
        return AffineMap(self.matrix @ inner.matrix, self.matrix @ inner.offset + self.offset)


def apply_point_map(m, points):
    """
    Apply an affine map or a vectorized point map to an array of points.

    Args:
        m: AffineMap or callable mapping (..., d) arrays to (..., d') arrays
        points: Array whose last axis holds coordinates

    Returns:
        Image array with the same leading shape
    """
    pts = np.asarray(points, dtype=float)
    flat = pts.reshape(-1, pts.shape[-1])
    try:
        out = np.asarray(m(flat), dtype=float)
    except (ValueError, IndexError) as e:
        raise DimensionError(f"point map rejected points of dimension {pts.shape[-1]}: {e}") from None
    if out.ndim == 1:
        out = out[:, None]
    if out.shape[0] != flat.shape[0]:
        raise DimensionError("point map changed the number of points")
    return out.reshape(pts.shape[:-1] + (out.shape[-1],))


def boundary(c):
    """
    Alternating-sign face sum, extended linearly over the chain.

    Args:
        c: Chain (or Simplex) of degree k >= 1

    Returns:
        Chain of degree k-1
    """
    if isinstance(c, Simplex):
        c = Chain.of(c)
    if c.degree < 1:
        raise DegreeError("boundary of a degree-0 chain is not defined")
    terms = []
    for w, s in c.terms:
        for i, face in enumerate(s.faces()):
            terms.append(((-1) ** i * w, face))
    return Chain(terms, degree=c.degree - 1)


def push_forward(m, c):
    """
    Vertex-wise image of a simplex or chain under a point map.

    Args:
        m: AffineMap or vectorized point map
        c: Simplex or Chain

    Returns:
        Object of the same kind as ``c``
    """
    if isinstance(c, Simplex):
        return Simplex(apply_point_map(m, c.vertices))
    if not c.terms:
        return Chain((), degree=c.degree)
    verts, weights = c.to_arrays()
    images = apply_point_map(m, verts)
    return Chain(zip(weights, (Simplex(v) for v in images)), degree=c.degree)


def permutation_sign(sigma):
    """Parity of a permutation given as the image list [sigma(0), ..., sigma(k)]."""
    inversions = sum(1 for i, j in combinations(range(len(sigma)), 2) if sigma[i] > sigma[j])
    return -1 if inversions % 2 else 1


def permute(sigma, s):
    """
    Reorder vertices: (sigma S)_i = p_{sigma^{-1}(i)}.

    Args:
        sigma: Sequence with sigma[i] = sigma(i), a permutation of 0..k
        s: Simplex of degree k

    Returns:
        Tuple (permuted Simplex, sign +1 or -1)
    """
    sigma = list(sigma)
    if sorted(sigma) != list(range(len(s))):
        raise PermutationError(f"{sigma} is not a permutation of 0..{s.degree}")
    new = np.empty_like(s.vertices)
    new[sigma] = s.vertices
    return Simplex(new), permutation_sign(sigma)


def diam_batch(vertices):
    """Max pairwise vertex distance for each simplex of an (N, k+1, d) array."""
    v = np.asarray(vertices, dtype=float)
    out = np.zeros(v.shape[0])
    for i, j in combinations(range(v.shape[1]), 2):
        np.maximum(out, np.linalg.norm(v[:, j] - v[:, i], axis=-1), out=out)
    return out


def _simplex_volume(v):
    """Gram-determinant volume of an (N, h+1, d) batch of h-simplices."""
    h = v.shape[1] - 1
    edges = v[:, 1:] - v[:, :1]
    if h == 2 and v.shape[2] == 2:
        cross = edges[:, 0, 0] * edges[:, 1, 1] - edges[:, 0, 1] * edges[:, 1, 0]
        return 0.5 * np.abs(cross)
    gram = edges @ np.swapaxes(edges, 1, 2)
    return np.sqrt(np.clip(np.linalg.det(gram), 0.0, None)) / factorial(h)


def vol_batch(vertices, h):
    """
    h-dimensional volume of each simplex in a batch.

    For h below the simplex degree the value is the maximum over all
    (h+1)-vertex subtuples; h = 1 gives the diameter.

    Args:
        vertices: (N, k+1, d) array
        h: Volume order, 1 <= h <= k

    Returns:
        (N,) array of nonnegative volumes
    """
    v = np.asarray(vertices, dtype=float)
    k = v.shape[1] - 1
    if not 1 <= h <= max(k, 1):
        raise ParameterError(f"volume order {h} must satisfy 1 <= h <= {k}")
    if h == 1:
        return diam_batch(v)
    out = np.zeros(v.shape[0])
    for idx in combinations(range(k + 1), h + 1):
        np.maximum(out, _simplex_volume(v[:, list(idx)]), out=out)
    return out


def vol2_batch(vertices):
    """Area gauge of a batch; zero for simplices of degree below 2."""
    v = np.asarray(vertices, dtype=float)
    if v.shape[1] < 3:
        return np.zeros(v.shape[0])
    return vol_batch(v, 2)


def diam(s):
    return float(diam_batch(s.vertices[None])[0])


def vol2(s):
    if s.degree < 2:
        raise DegreeError("vol2 needs a simplex of degree >= 2")
    return float(vol_batch(s.vertices[None], 2)[0])


def volk(s, h):
    return float(vol_batch(s.vertices[None], h)[0])


def degenerate_batch(vertices):
    """Boolean mask: vol_k <= 1e-14 * diam^k for each simplex of the batch."""
    v = np.asarray(vertices, dtype=float)
    k = v.shape[1] - 1
    if k == 0:
        return np.zeros(v.shape[0], dtype=bool)
    return vol_batch(v, k) <= DEGENERACY_TOL * diam_batch(v) ** k


def is_degenerate(s):
    return bool(degenerate_batch(s.vertices[None])[0])


def signed_volume_batch(vertices, axes=(0, 1)):
    """
    Oriented area of the projection of 2-simplices onto two coordinate axes.

    Args:
        vertices: (N, 3, d) array
        axes: Pair (i, j) of 0-based coordinate indices

    Returns:
        (N,) array, positive for counter-clockwise projections
    """
    i, j = axes
    e1 = vertices[:, 1] - vertices[:, 0]
    e2 = vertices[:, 2] - vertices[:, 0]
    return 0.5 * (e1[:, i] * e2[:, j] - e1[:, j] * e2[:, i])
