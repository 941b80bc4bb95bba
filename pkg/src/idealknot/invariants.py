"""Space writhe and average crossing number of polygonal curves.

Both quantities are Gauss double integrals which, for a polygon, split into
a sum over pairs of straight segments. Each pair is evaluated exactly as
the signed solid angle of the quadrilateral spanned by the four endpoints
(Klenin and Langowski, method 1a). For two straight segments the triple
product ``(r1 - r2) . (t1 x t2)`` is constant, so the unsigned (ACN)
integrand is the absolute value of the signed one pair by pair.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import PolygonalKnot, edge_lengths, segment_distance

FOUR_PI = 4.0 * np.pi
#: pairs closer than this fraction of the mean edge length use quadrature
NEAR_SINGULAR = 1e-7


@dataclass(frozen=True)
class GaussPairContribution:
    i: int
    j: int
    writhe_term: float
    acn_term: float


def _unit(v):
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        u = v / n
    return np.where(n > 0.0, u, 0.0)


def segment_pair_writhe(p1, p2, p3, p4) -> np.ndarray:
    """Signed Gauss integral of segment pairs, divided by ``4 pi``.

    Segments run ``p1 -> p2`` and ``p3 -> p4``; arrays are ``(m, 3)``. The
    value is the contribution of the ordered pair; a closed curve's writhe
    sums it over ordered pairs, i.e. twice over unordered pairs.
    """
    p1, p2, p3, p4 = (np.atleast_2d(np.asarray(x, dtype=float))
                      for x in (p1, p2, p3, p4))
    r13 = p3 - p1
    r14 = p4 - p1
    r23 = p3 - p2
    r24 = p4 - p2
    n1 = _unit(np.cross(r13, r14))
    n2 = _unit(np.cross(r14, r24))
    n3 = _unit(np.cross(r24, r23))
    n4 = _unit(np.cross(r23, r13))

    def asin_dot(a, b):
        # arcsin(a.b) loses half the digits when a and b are nearly parallel
        return np.arctan2(np.einsum("ij,ij->i", a, b),
                          np.linalg.norm(np.cross(a, b), axis=1))

    omega = asin_dot(n1, n2) + asin_dot(n2, n3) + asin_dot(n3, n4) + asin_dot(n4, n1)
    triple = np.einsum("ij,ij->i", np.cross(p4 - p3, p2 - p1), r13)
    return np.abs(omega) * np.sign(triple) / FOUR_PI


def gauss_integrand(r1, r2, t1, t2):
    """``(t1 x t2) . (r1 - r2) / |r1 - r2|^3`` for arrays of points."""
    d = r1 - r2
    return (np.einsum("...k,...k->...", np.cross(t1, t2), d)
            / np.linalg.norm(d, axis=-1) ** 3)


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(order):
    if order not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[order]


def quadrature_pair_writhe(p1, p2, p3, p4, absolute=False, tol=1e-12,
                           order=16, max_depth=30) -> float:
    """Adaptive tensor Gauss-Legendre quadrature of the Gauss integrand.

    Independent of the closed form in :func:`segment_pair_writhe`; used as
    its fallback near contact and as a test oracle. The parameter square is
    bisected along both axes until the ``order`` rule agrees with the sum
    over the four children.
    """
    p1, p2, p3, p4 = (np.asarray(x, dtype=float) for x in (p1, p2, p3, p4))
    t1 = p2 - p1
    t2 = p4 - p3
    x, w = _gauss_legendre(order)

    def rule(s0, s1, u0, u1):
        s = s0 + (s1 - s0) * x
        u = u0 + (u1 - u0) * x
        r1 = p1 + s[:, None] * t1
        r2 = p3 + u[:, None] * t2
        f = gauss_integrand(r1[:, None, :], r2[None, :, :], t1, t2)
        if absolute:
            f = np.abs(f)
        return (s1 - s0) * (u1 - u0) * float(w @ f @ w)

    total = 0.0
    stack = [(0.0, 1.0, 0.0, 1.0, rule(0.0, 1.0, 0.0, 1.0), 0)]
    while stack:
        s0, s1, u0, u1, coarse, depth = stack.pop()
        sm = 0.5 * (s0 + s1)
        um = 0.5 * (u0 + u1)
        kids = [(s0, sm, u0, um), (sm, s1, u0, um), (s0, sm, um, u1),
                (sm, s1, um, u1)]
        vals = [rule(*k) for k in kids]
        fine = sum(vals)
        if abs(fine - coarse) <= tol * max(1.0, abs(fine)) or depth >= max_depth:
            total += fine
        else:
            stack.extend((*k, v, depth + 1) for k, v in zip(kids, vals))
    return total / FOUR_PI


def _component_pairs(knot: PolygonalKnot):
    """Unordered non-adjacent edge pairs lying in the same component."""
    top = knot.topology
    i, j = top.edge_pairs
    same = top.comp[i] == top.comp[j]
    return i[same], j[same]


def pair_contributions(knot: PolygonalKnot, i=None, j=None) -> np.ndarray:
    """Signed per-pair writhe terms for the given (or all same-component)
    non-adjacent edge pairs, in a fixed order."""
    if i is None:
        i, j = _component_pairs(knot)
    v = knot.vertices
    nxt = knot.topology.nxt
    terms = segment_pair_writhe(v[i], v[nxt[i]], v[j], v[nxt[j]])
    # near-contact pairs lose precision in the closed form
    scale = NEAR_SINGULAR * float(np.mean(edge_lengths(knot)))
    dist = segment_distance(v[i], v[nxt[i]], v[j], v[nxt[j]]) if len(i) else []
    for k in np.nonzero(np.asarray(dist) < scale)[0]:
        terms[k] = quadrature_pair_writhe(v[i[k]], v[nxt[i[k]]],
                                          v[j[k]], v[nxt[j[k]]])
    return terms


def _check_single(knot):
    if knot.n_components != 1:
        raise ValueError("writhe and ACN are defined here for a single "
                         "component; use component_writhes for links")


def space_writhe(knot: PolygonalKnot) -> float:
    """Space writhe ``Wr`` of a closed polygon."""
    _check_single(knot)
    terms = pair_contributions(knot)
    return float(2.0 * np.sum(terms))


def average_crossing_number(knot: PolygonalKnot) -> float:
    """Average crossing number: the Gauss integral of the absolute integrand."""
    _check_single(knot)
    terms = pair_contributions(knot)
    return float(2.0 * np.sum(np.abs(terms)))


def writhe_and_acn(knot: PolygonalKnot) -> tuple[float, float]:
    """Both sums from one pass over the segment pairs."""
    _check_single(knot)
    terms = pair_contributions(knot)
    return float(2.0 * np.sum(terms)), float(2.0 * np.sum(np.abs(terms)))


def pair_table(knot: PolygonalKnot) -> list[GaussPairContribution]:
    i, j = _component_pairs(knot)
    terms = pair_contributions(knot, i, j)
    return [GaussPairContribution(int(a), int(b), float(t), float(abs(t)))
            for a, b, t in zip(i, j, terms)]


def mirror(knot: PolygonalKnot, axis: int = 2) -> PolygonalKnot:
    v = np.array(knot.vertices)
    v[:, axis] *= -1.0
    return knot.with_vertices(v)


def writhe_mirror_check(knot: PolygonalKnot) -> tuple[float, float]:
    """``(Wr(knot), Wr(mirror image))``; the second is minus the first."""
    return space_writhe(knot), space_writhe(mirror(knot))


def component_writhes(knot: PolygonalKnot) -> list[float]:
    return [space_writhe(knot.component(k)) for k in range(knot.n_components)]


def component_acns(knot: PolygonalKnot) -> list[float]:
    return [average_crossing_number(knot.component(k))
            for k in range(knot.n_components)]


def linking_number(a: np.ndarray, b: np.ndarray) -> float:
    """Gauss linking integral of two closed polygons (not rounded)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    i, j = np.meshgrid(np.arange(len(a)), np.arange(len(b)), indexing="ij")
    i, j = i.ravel(), j.ravel()
    an = np.roll(a, -1, axis=0)
    bn = np.roll(b, -1, axis=0)
    return float(np.sum(segment_pair_writhe(a[i], an[i], b[j], bn[j])))
