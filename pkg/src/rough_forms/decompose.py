"""
Geometric maps on simplices: dyadic decomposition, edge cutting and edge
flipping, as chain-valued operators, plus array versions of the dyadic
refinement used by the sewing engine.

Vertex naming follows the usual convention: a 2-simplex is [p0 p1 p2] with
edge midpoints q0 = (p1+p2)/2, q1 = (p0+p2)/2, q2 = (p0+p1)/2. For cut_t a
2-simplex is read as [p p0 p1] and the p0 p1 edge is the one being cut.
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np

from src.rough_forms.errors import BudgetError, DegreeError, ParameterError
from src.rough_forms.simplex import Chain, Simplex

VARIANTS = ("dya", "dya_dagger")
BUDGET = 30


def _check_variant(variant):
    if variant not in VARIANTS:
        raise ParameterError(f"unknown refinement variant {variant!r}; expected one of {VARIANTS}")


def _mid(a, b):
    # every module computes midpoints with this exact expression
    return 0.5 * (a + b)


def dya_children(vertices, variant="dya"):
    """
    One dyadic refinement step on a batch.

    Args:
        vertices: (N, k+1, d) array with k in {1, 2}
        variant: "dya" or "dya_dagger" (the latter differs only for k = 2)

    Returns:
        Tuple (children of shape (N, B, k+1, d), child weights of shape (B,)),
        B = 2 for k = 1 and 4 for k = 2, children in the order dya^1..dya^B
    """
    _check_variant(variant)
    v = np.asarray(vertices, dtype=float)
    k = v.shape[1] - 1
    if k == 1:
        p0, p1 = v[:, 0], v[:, 1]
        q = _mid(p0, p1)
        children = np.stack([np.stack([p0, q], 1), np.stack([q, p1], 1)], 1)
        return children, np.ones(2)
    if k == 2:
        p0, p1, p2 = v[:, 0], v[:, 1], v[:, 2]
        q0, q1, q2 = _mid(p1, p2), _mid(p0, p2), _mid(p0, p1)
        if variant == "dya_dagger":
            central, weights = np.stack([q2, q1, q0], 1), np.array([-1.0, 1.0, 1.0, 1.0])
        else:
            central, weights = np.stack([q0, q1, q2], 1), np.ones(4)
        children = np.stack([
            central,
            np.stack([q1, q0, p2], 1),
            np.stack([q2, p1, q0], 1),
            np.stack([p0, q2, q1], 1),
        ], 1)
        return children, weights
    raise DegreeError(f"dyadic decomposition is defined for degrees 1 and 2, got {k}")


def branching(degree):
    """Children per dyadic step: 2 ** degree."""
    if degree not in (1, 2):
        raise DegreeError(f"dyadic decomposition is defined for degrees 1 and 2, got {degree}")
    return 2 ** degree


def check_budget(degree, n):
    if degree * n > BUDGET:
        raise BudgetError(f"depth {n} on degree {degree} exceeds the cost cap k*n <= {BUDGET}")


def dya_leaves(vertices, n, variant="dya"):
    """
    All depth-n leaves of the dyadic tree, in depth-first order.

    Leaf i of simplex j sits at row j * B**n + i, and the children of one
    parent are contiguous, so reshaping to (N, B, ..., B) recovers the tree.

    Args:
        vertices: (N, k+1, d) array
        n: Depth
        variant: "dya" or "dya_dagger"

    Returns:
        Tuple (leaves of shape (N * B**n, k+1, d), weights of shape (N * B**n,))
    """
    v = np.asarray(vertices, dtype=float)
    k = v.shape[1] - 1
    if n == 0:
        return v.copy(), np.ones(v.shape[0])
    check_budget(k, n)
    weights = np.ones(v.shape[0])
    for _ in range(n):
        children, cw = dya_children(v, variant)
        v = children.reshape(-1, k + 1, v.shape[2])
        weights = (weights[:, None] * cw[None, :]).reshape(-1)
    return v, weights


def _as_chain(children, weights):
    return Chain(zip(weights.tolist(), (Simplex(c) for c in children)), degree=children.shape[1] - 1)


def dya(s):
    """Dyadic decomposition: 2 halves of a segment or 4 midpoint triangles."""
    children, weights = dya_children(s.vertices[None], "dya")
    return _as_chain(children[0], weights)


def dya_dagger(s):
    """dya with the central triangle reversed and negated; satisfies boundary(dya_dagger) = dya(boundary)."""
    if s.degree != 2:
        raise DegreeError("dya_dagger is defined on 2-simplices")
    children, weights = dya_children(s.vertices[None], "dya_dagger")
    return _as_chain(children[0], weights)


def cut_t(t, s):
    """
    Cut the p0 p1 edge at p_t = (1-t) p0 + t p1.

    Args:
        t: Cut parameter in [0, 1]
        s: [p0 p1] or [p p0 p1]

    Returns:
        Chain [p0 p_t] + [p_t p1], or [p_t p1 p] + [p_t p p0]
    """
    if not 0.0 <= t <= 1.0:
        raise ParameterError(f"cut parameter must lie in [0, 1], got {t}")
    v = s.vertices
    if s.degree == 1:
        pt = (1.0 - t) * v[0] + t * v[1]
        return Chain([(1.0, Simplex([v[0], pt])), (1.0, Simplex([pt, v[1]]))])
    if s.degree == 2:
        p, p0, p1 = v
        pt = (1.0 - t) * p0 + t * p1
        return Chain([(1.0, Simplex([pt, p1, p])), (1.0, Simplex([pt, p, p0]))])
    raise DegreeError(f"cut_t is defined for degrees 1 and 2, got {s.degree}")


def cut_n(n, s):
    """n equal segments of [p0 p1], or n equal fan slices of [p p0 p1] with apex p."""
    if n < 1:
        raise ParameterError(f"cut_n needs n >= 1, got {n}")
    v = s.vertices
    if s.degree == 1:
        a, b = v
    elif s.degree == 2:
        apex, a, b = v
    else:
        raise DegreeError(f"cut_n is defined for degrees 1 and 2, got {s.degree}")
    points = [(1.0 - i / n) * a + (i / n) * b for i in range(n + 1)]
    if s.degree == 1:
        return Chain([(1.0, Simplex([points[i], points[i + 1]])) for i in range(n)])
    return Chain([(1.0, Simplex([apex, points[i], points[i + 1]])) for i in range(n)])


def _parallelogram(s):
    if s.degree != 2:
        raise DegreeError("flip is defined on 2-simplices")
    p0, p1, p2 = s.vertices
    return p0, p1, p2, p1 + p2 - p0


def flip(s):
    """Difference of the two triangulations of the parallelogram spanned at p0."""
    p0, p1, p2, p3 = _parallelogram(s)
    return Chain([
        (1.0, Simplex([p0, p1, p2])), (1.0, Simplex([p3, p2, p1])),
        (-1.0, Simplex([p1, p3, p0])), (-1.0, Simplex([p2, p0, p3])),
    ])


def flip_dagger(s):
    """The flip variant whose evaluation vanishes on closed alternating germs."""
    p0, p1, p2, p3 = _parallelogram(s)
    return Chain([
        (1.0, Simplex([p2, p0, p1])), (1.0, Simplex([p1, p3, p2])),
        (-1.0, Simplex([p3, p0, p1])), (-1.0, Simplex([p0, p3, p2])),
    ])


def dya_iter(n, s, variant="dya"):
    """
    Stream the depth-n dyadic leaves of ``s`` as (weight, Simplex) pairs.

    Leaves come in depth-first order with children dya^1..dya^4, without
    materializing the full chain.

    Args:
        n: Depth, with degree * n <= 30
        s: Simplex of degree 1 or 2
        variant: "dya" or "dya_dagger"

    Yields:
        Tuples (weight, Simplex)
    """
    _check_variant(variant)
    if n == 0:
        yield 1.0, s
        return
    check_budget(s.degree, n)

    def walk(vertices, weight, depth):
        if depth == 0:
            yield weight, Simplex(vertices)
            return
        children, cw = dya_children(vertices[None], variant)
        for child, w in zip(children[0], cw):
            yield from walk(child, weight * w, depth - 1)

    yield from walk(s.vertices, 1.0, n)


@dataclass(frozen=True)
class GeometricMap:
    """A chain-valued map on simplices that commutes with affine push-forward."""

    name: str
    in_degree: int
    out_degree: int
    apply: Callable[[Simplex], Chain]

    def __call__(self, s):
        if s.degree != self.in_degree:
            raise DegreeError(f"{self.name} expects degree {self.in_degree}, got {s.degree}")
        return self.apply(s)


GEOMETRIC_MAPS = {
    "dya1": GeometricMap("dya1", 1, 1, dya),
    "dya2": GeometricMap("dya2", 2, 2, dya),
    "dya_dagger": GeometricMap("dya_dagger", 2, 2, dya_dagger),
    "cut_third1": GeometricMap("cut_third1", 1, 1, lambda s: cut_t(1.0 / 3.0, s)),
    "cut_third2": GeometricMap("cut_third2", 2, 2, lambda s: cut_t(1.0 / 3.0, s)),
    "cut3_1": GeometricMap("cut3_1", 1, 1, lambda s: cut_n(3, s)),
    "cut3_2": GeometricMap("cut3_2", 2, 2, lambda s: cut_n(3, s)),
    "flip": GeometricMap("flip", 2, 2, flip),
    "flip_dagger": GeometricMap("flip_dagger", 2, 2, flip_dagger),
}
