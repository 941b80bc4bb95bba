"""Closed polygonal space curves and their thickness.

Thickness follows the polygonal convention

    thickness = min(minrad, dcsd / 2)

where ``minrad`` is the smallest turning-angle curvature radius over the
vertices and ``dcsd`` is the doubly critical self-distance: the shortest
chord between two points of the curve at which the distance function is
(generalized) critical with respect to moving either endpoint.

Multi-component curves (links) are stored as one vertex array plus a list
of component sizes. Pairs from different components are always eligible
as struts.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

#: relative slack used when classifying a vertex as critical
CRITICAL_EPS = 1e-12
#: below this squared sine two edges are treated as parallel
PARALLEL_EPS = 1e-14


class GeometryError(ValueError):
    """Raised for invalid or self-intersecting configurations."""


@dataclass(frozen=True, eq=False)
class PolygonalKnot:
    """A closed polygon (or a union of closed polygons) in 3-space.

    Parameters
    ----------
    vertices : (n, 3) array_like
        Vertex coordinates. Within each component edge ``i`` joins vertex
        ``i`` to the next vertex, cyclically.
    label : str, optional
        Knot identifier such as ``"12a1"``.
    component_sizes : sequence of int, optional
        Number of vertices in each component, in storage order. Defaults to
        a single component.
    """

    vertices: np.ndarray
    label: str | None = None
    component_sizes: tuple[int, ...] = field(default=())

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float, copy=True)
        if v.ndim != 2 or v.shape[1] != 3:
            raise GeometryError(f"vertices must have shape (n, 3), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise GeometryError("vertex coordinates must be finite")
        sizes = tuple(int(s) for s in self.component_sizes) or (len(v),)
        if sum(sizes) != len(v):
            raise GeometryError("component sizes do not sum to the vertex count")
        if min(sizes) < 3:
            raise GeometryError("every component needs at least 3 vertices")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "component_sizes", sizes)
        if np.any(edge_lengths(self) <= 0.0):
            raise GeometryError("consecutive vertices coincide")

    @classmethod
    def from_components(cls, components: Sequence[np.ndarray], label=None):
        comps = [np.asarray(c, dtype=float) for c in components]
        return cls(np.vstack(comps), label=label,
                   component_sizes=tuple(len(c) for c in comps))

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def n_components(self) -> int:
        return len(self.component_sizes)

    def components(self) -> list[np.ndarray]:
        bounds = np.cumsum((0,) + self.component_sizes)
        return [self.vertices[a:b] for a, b in zip(bounds[:-1], bounds[1:])]

    def component(self, k: int) -> "PolygonalKnot":
        return PolygonalKnot(self.components()[k], label=self.label)

    def with_vertices(self, vertices) -> "PolygonalKnot":
        return PolygonalKnot(vertices, label=self.label,
                             component_sizes=self.component_sizes)

    def scaled(self, s: float) -> "PolygonalKnot":
        return self.with_vertices(self.vertices * s)

    @property
    def topology(self) -> "_Topology":
        return _topology(self.component_sizes)

    def __repr__(self):
        return (f"PolygonalKnot(n={self.n}, components={self.n_components}, "
                f"label={self.label!r})")


class _Topology:
    """Index bookkeeping shared by every knot with the same component sizes."""

    def __init__(self, sizes: tuple[int, ...]):
        n = sum(sizes)
        self.sizes = sizes
        start = np.repeat(np.cumsum((0,) + sizes[:-1]), sizes)
        size = np.repeat(sizes, sizes)
        pos = np.arange(n) - start
        self.comp = np.repeat(np.arange(len(sizes)), sizes)
        self.pos = pos
        self.size = size
        self.nxt = start + (pos + 1) % size
        self.prv = start + (pos - 1) % size
        self.n = n
        iu, ju = np.triu_indices(n, k=1)
        same = self.comp[iu] == self.comp[ju]
        fwd = (pos[ju] - pos[iu]) % size[iu]
        sep = np.minimum(fwd, size[iu] - fwd)
        self.edge_pairs = _pairs(iu, ju, ~same | (sep > 1))
        self.vertex_pairs = _pairs(iu, ju, ~same | (sep > 2))
        k, j = np.nonzero(~np.eye(n, dtype=bool))
        same = self.comp[k] == self.comp[j]
        d = (pos[j] - pos[k]) % size[k]
        sz = size[k]
        near = (d == 0) | (d == 1) | (d == sz - 1) | (d == sz - 2)
        self.vertex_edge_pairs = _pairs(k, j, ~same | ~near)

    def edge_pair_ok(self, i, j):
        same = self.comp[i] == self.comp[j]
        fwd = (self.pos[j] - self.pos[i]) % self.size[i]
        sep = np.minimum(fwd, self.size[i] - fwd)
        return (i != j) & (~same | (sep > 1))

    def vertex_pair_ok(self, k, m):
        same = self.comp[k] == self.comp[m]
        fwd = (self.pos[m] - self.pos[k]) % self.size[k]
        sep = np.minimum(fwd, self.size[k] - fwd)
        return (k != m) & (~same | (sep > 2))

    def vertex_edge_ok(self, k, j):
        same = self.comp[k] == self.comp[j]
        sz = self.size[k]
        d = (self.pos[j] - self.pos[k]) % sz
        near = (d == 0) | (d == 1) | (d == sz - 1) | (d == sz - 2)
        return ~same | ~near


def _pairs(a, b, mask):
    return np.ascontiguousarray(a[mask]), np.ascontiguousarray(b[mask])


_TOPOLOGY_CACHE: dict[tuple[int, ...], _Topology] = {}


def _topology(sizes):
    top = _TOPOLOGY_CACHE.get(sizes)
    if top is None:
        if len(_TOPOLOGY_CACHE) > 64:
            _TOPOLOGY_CACHE.clear()
        top = _TOPOLOGY_CACHE[sizes] = _Topology(sizes)
    return top


# ---------------------------------------------------------------------------
# length and curvature


def edge_vectors(knot: PolygonalKnot) -> np.ndarray:
    v = knot.vertices
    return v[knot.topology.nxt] - v


def edge_lengths(knot: PolygonalKnot) -> np.ndarray:
    return np.linalg.norm(edge_vectors(knot), axis=1)


def length(knot: PolygonalKnot) -> float:
    """Total Euclidean length of all edges."""
    return float(np.sum(edge_lengths(knot)))


def turning_angles(knot: PolygonalKnot) -> np.ndarray:
    """Exterior turning angle at each vertex, in ``[0, pi]``."""
    e = edge_vectors(knot)
    a = e[knot.topology.prv]
    cross = np.linalg.norm(np.cross(a, e), axis=1)
    return np.arctan2(cross, np.einsum("ij,ij->i", a, e))


def vertex_radii(knot: PolygonalKnot) -> np.ndarray:
    """Polygonal curvature radius ``min(e-, e+) / (2 tan(theta/2))`` per vertex.

    Straight vertices get ``inf`` and full reversals get ``0``.
    """
    e = edge_vectors(knot)
    a = e[knot.topology.prv]
    la = np.linalg.norm(a, axis=1)
    lb = np.linalg.norm(e, axis=1)
    cross = np.linalg.norm(np.cross(a, e), axis=1)
    # 1 / tan(theta/2) = (|a||b| + a.b) / |a x b|
    num = la * lb + np.einsum("ij,ij->i", a, e)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.minimum(la, lb) * num / (2.0 * cross)
    flat = cross == 0.0
    r[flat] = np.where(num[flat] > 0.0, np.inf, 0.0)
    return r


def min_radius_of_curvature(knot: PolygonalKnot, return_vertex: bool = False):
    """Smallest polygonal curvature radius over all vertices.

    With ``return_vertex=True`` a ``(radius, vertex_index)`` pair is returned.
    """
    r = vertex_radii(knot)
    k = int(np.argmin(r))
    return (float(r[k]), k) if return_vertex else float(r[k])


# ---------------------------------------------------------------------------
# segment distances


def segment_closest_params(p0, p1, q0, q1):
    """Parameters ``(s, t)`` of the closest points of segment batches.

    Exact clamped closest-point computation on ``p0 + s (p1 - p0)`` and
    ``q0 + t (q1 - q0)``. Parallel pairs are resolved by taking the best of
    the endpoint-to-segment projections. All arguments are ``(m, 3)``.
    """
    d1 = p1 - p0
    d2 = q1 - q0
    r = p0 - q0
    a = np.einsum("ij,ij->i", d1, d1)
    e = np.einsum("ij,ij->i", d2, d2)
    b = np.einsum("ij,ij->i", d1, d2)
    c = np.einsum("ij,ij->i", d1, r)
    f = np.einsum("ij,ij->i", d2, r)
    denom = a * e - b * b
    parallel = denom <= PARALLEL_EPS * a * e
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(parallel, 0.0, np.clip((b * f - c * e) / denom, 0.0, 1.0))
    t = (b * s + f) / e
    lo = t < 0.0
    hi = t > 1.0
    t = np.clip(t, 0.0, 1.0)
    s = np.where(lo, np.clip(-c / a, 0.0, 1.0), s)
    s = np.where(hi, np.clip((b - c) / a, 0.0, 1.0), s)
    if np.any(parallel):
        # candidates: each endpoint projected onto the other segment
        idx = np.nonzero(parallel)[0]
        P0, P1, Q0, Q1 = p0[idx], p1[idx], q0[idx], q1[idx]
        cands = []
        for sv, pt in ((0.0, P0), (1.0, P1)):
            tv = np.clip(np.einsum("ij,ij->i", pt - Q0, Q1 - Q0) / e[idx], 0, 1)
            cands.append((np.full(len(idx), sv), tv))
        for tv, pt in ((0.0, Q0), (1.0, Q1)):
            sv = np.clip(np.einsum("ij,ij->i", pt - P0, P1 - P0) / a[idx], 0, 1)
            cands.append((sv, np.full(len(idx), tv)))
        best = None
        for sv, tv in cands:
            dist = np.linalg.norm(P0 + sv[:, None] * (P1 - P0)
                                  - Q0 - tv[:, None] * (Q1 - Q0), axis=1)
            if best is None:
                best = [dist, sv, tv]
            else:
                better = dist < best[0]
                best[0] = np.where(better, dist, best[0])
                best[1] = np.where(better, sv, best[1])
                best[2] = np.where(better, tv, best[2])
        s = s.copy()
        s[idx] = best[1]
        t[idx] = best[2]
    return s, t


def segment_distance(p0, p1, q0, q1) -> np.ndarray:
    """Minimum distance between segment batches ``[p0, p1]`` and ``[q0, q1]``."""
    p0, p1, q0, q1 = (np.atleast_2d(np.asarray(x, dtype=float))
                      for x in (p0, p1, q0, q1))
    s, t = segment_closest_params(p0, p1, q0, q1)
    diff = p0 + s[:, None] * (p1 - p0) - q0 - t[:, None] * (q1 - q0)
    return np.linalg.norm(diff, axis=1)


def min_segment_distance(knot: PolygonalKnot) -> float:
    """Plain minimum distance between non-adjacent edges.

    Unlike :func:`min_strut_distance` this is not a thickness ingredient; it
    bounds how far vertices may move without two edges passing through
    each other.
    """
    top = knot.topology
    i, j = top.edge_pairs
    if len(i) == 0:
        return np.inf
    v = knot.vertices
    return float(np.min(segment_distance(v[i], v[top.nxt[i]],
                                         v[j], v[top.nxt[j]])))


# ---------------------------------------------------------------------------
# struts (doubly critical pairs)


@dataclass
class Struts:
    """Doubly critical chords of a configuration.

    Every strut is written as a weighted combination of up to four vertices:
    endpoint ``p = sum(w[:, :2] * x[idx[:, :2]])`` and ``q`` likewise from
    the last two columns, so ``d|p - q| / dx = u`` times the weights, with
    the ``q`` weights negated.
    """

    idx: np.ndarray      # (m, 4) vertex indices
    w: np.ndarray        # (m, 4) barycentric weights, q-side already negated
    dist: np.ndarray     # (m,)
    kind: np.ndarray     # (m,) 0 edge-edge, 1 vertex-edge, 2 vertex-vertex
    unit: np.ndarray     # (m, 3) unit vector from q to p

    def __len__(self):
        return len(self.dist)

    def order(self):
        """Sort struts canonically so different search paths agree exactly."""
        key = np.lexsort((self.idx[:, 3], self.idx[:, 2], self.idx[:, 1],
                          self.idx[:, 0], self.kind))
        return Struts(self.idx[key], self.w[key], self.dist[key],
                      self.kind[key], self.unit[key])

    def select(self, mask):
        return Struts(self.idx[mask], self.w[mask], self.dist[mask],
                      self.kind[mask], self.unit[mask])

    @staticmethod
    def concat(parts):
        return Struts(*(np.concatenate([getattr(p, f) for p in parts])
                        for f in ("idx", "w", "dist", "kind", "unit")))


def _vertex_critical(x, v_prev, v, v_next, y):
    """Generalized criticality of vertex ``v`` for the chord towards ``y``."""
    c = y - x
    a = np.einsum("ij,ij->i", c, v - v_prev)
    b = np.einsum("ij,ij->i", c, v_next - v)
    scale = (np.einsum("ij,ij->i", c, c)
             * np.linalg.norm(v - v_prev, axis=1)
             * np.linalg.norm(v_next - v, axis=1))
    return a * b <= CRITICAL_EPS * scale


def _edge_edge_struts(v, top, i, j):
    """Interior-interior critical pairs: common perpendiculars."""
    p0, p1 = v[i], v[top.nxt[i]]
    q0, q1 = v[j], v[top.nxt[j]]
    d1 = p1 - p0
    d2 = q1 - q0
    r = p0 - q0
    a = np.einsum("ij,ij->i", d1, d1)
    e = np.einsum("ij,ij->i", d2, d2)
    b = np.einsum("ij,ij->i", d1, d2)
    c = np.einsum("ij,ij->i", d1, r)
    f = np.einsum("ij,ij->i", d2, r)
    denom = a * e - b * b
    parallel = denom <= PARALLEL_EPS * a * e
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (b * f - c * e) / denom
        t = (a * f - b * c) / denom
    # parallel edges: centre of the overlap of the two projections
    if np.any(parallel):
        with np.errstate(divide="ignore", invalid="ignore"):
            u0 = -c / a                     # q0 projected onto p, in s units
            u1 = u0 + b / a                 # q1 projected onto p
        lo = np.maximum(0.0, np.minimum(u0, u1))
        hi = np.minimum(1.0, np.maximum(u0, u1))
        sp = 0.5 * (lo + hi)
        overlap = hi - lo > 1e-9
        sp = np.where(overlap, sp, -1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            tp = (np.einsum("ij,ij->i", p0 + sp[:, None] * d1 - q0, d2)) / e
        s = np.where(parallel, sp, s)
        t = np.where(parallel, tp, t)
    ok = (s > 0.0) & (s < 1.0) & (t > 0.0) & (t < 1.0)
    idx_ok = np.nonzero(ok)[0]
    s, t = s[idx_ok], t[idx_ok]
    ii, jj = i[idx_ok], j[idx_ok]
    p = p0[idx_ok] + s[:, None] * d1[idx_ok]
    q = q0[idx_ok] + t[:, None] * d2[idx_ok]
    idx = np.stack([ii, top.nxt[ii], jj, top.nxt[jj]], axis=1)
    w = np.stack([1.0 - s, s, -(1.0 - t), -t], axis=1)
    return _build(idx, w, p, q, 0)


def _vertex_edge_struts(v, top, k, j):
    """Vertex against an edge interior point (the foot of the vertex)."""
    q0, q1 = v[j], v[top.nxt[j]]
    d2 = q1 - q0
    x = v[k]
    t = np.einsum("ij,ij->i", x - q0, d2) / np.einsum("ij,ij->i", d2, d2)
    inside = (t > 0.0) & (t < 1.0)
    sel = np.nonzero(inside)[0]
    k, j, t = k[sel], j[sel], t[sel]
    x = v[k]
    q = v[j] + t[:, None] * (v[top.nxt[j]] - v[j])
    crit = _vertex_critical(x, v[top.prv[k]], x, v[top.nxt[k]], q)
    sel = np.nonzero(crit)[0]
    k, j, t, x, q = k[sel], j[sel], t[sel], x[sel], q[sel]
    idx = np.stack([k, k, j, top.nxt[j]], axis=1)
    w = np.stack([np.ones_like(t), np.zeros_like(t), -(1.0 - t), -t], axis=1)
    return _build(idx, w, x, q, 1)


def _vertex_vertex_struts(v, top, k, m):
    x, y = v[k], v[m]
    crit = (_vertex_critical(x, v[top.prv[k]], x, v[top.nxt[k]], y)
            & _vertex_critical(y, v[top.prv[m]], y, v[top.nxt[m]], x))
    sel = np.nonzero(crit)[0]
    k, m = k[sel], m[sel]
    one = np.ones(len(k))
    idx = np.stack([k, k, m, m], axis=1)
    w = np.stack([one, 0 * one, -one, 0 * one], axis=1)
    return _build(idx, w, v[k], v[m], 2)


def _build(idx, w, p, q, kind):
    diff = p - q
    dist = np.linalg.norm(diff, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        unit = diff / dist[:, None]
    return Struts(idx.astype(np.int64), w, dist, np.full(len(dist), kind),
                  unit)


def _prune(v, top, ee, ve, vv, cutoff):
    """Drop pairs whose bounding balls are already farther than ``cutoff``."""
    e = v[top.nxt] - v
    mid = v + 0.5 * e
    half = 0.5 * np.linalg.norm(e, axis=1)
    i, j = ee
    keep = np.linalg.norm(mid[i] - mid[j], axis=1) - half[i] - half[j] <= cutoff
    ee = (i[keep], j[keep])
    k, j = ve
    keep = np.linalg.norm(v[k] - mid[j], axis=1) - half[j] <= cutoff
    ve = (k[keep], j[keep])
    k, m = vv
    keep = np.linalg.norm(v[k] - v[m], axis=1) <= cutoff
    return ee, ve, (k[keep], m[keep])


def _struts_from_pairs(knot, ee, ve, vv, cutoff):
    v = knot.vertices
    top = knot.topology
    if cutoff is not None and np.isfinite(cutoff):
        ee, ve, vv = _prune(v, top, ee, ve, vv, cutoff)
    parts = [_edge_edge_struts(v, top, *ee),
             _vertex_edge_struts(v, top, *ve),
             _vertex_vertex_struts(v, top, *vv)]
    st = Struts.concat(parts)
    if cutoff is not None:
        st = st.select(st.dist <= cutoff)
    return st.order()


def find_struts(knot: PolygonalKnot, cutoff: float | None = None,
                method: str = "auto") -> Struts:
    """All doubly critical chords, optionally only those up to ``cutoff``.

    ``method`` is ``"brute"`` (all pairs), ``"grid"`` (uniform spatial grid;
    needs a finite cutoff) or ``"auto"``. Both paths evaluate identical
    pair kernels and return identically ordered results.
    """
    if method == "auto":
        method = "grid" if (cutoff is not None and knot.n > 256) else "brute"
    top = knot.topology
    if method == "brute":
        return _struts_from_pairs(knot, top.edge_pairs, top.vertex_edge_pairs,
                                  top.vertex_pairs, cutoff)
    if method != "grid":
        raise ValueError(f"unknown method {method!r}")
    if cutoff is None or not np.isfinite(cutoff):
        raise ValueError("grid search needs a finite cutoff")
    ee, ve, vv = _grid_pairs(knot, cutoff)
    return _struts_from_pairs(knot, ee, ve, vv, cutoff)


def _grid_pairs(knot, cutoff):
    """Candidate pairs whose edges may lie within ``cutoff`` of each other."""
    v = knot.vertices
    top = knot.topology
    e = v[top.nxt] - v
    mid = v + 0.5 * e
    lens = np.linalg.norm(e, axis=1)
    h = cutoff + lens.max()
    cells = np.floor(mid / h).astype(np.int64)
    buckets: dict[tuple, list[int]] = {}
    for idx, key in enumerate(map(tuple, cells)):
        buckets.setdefault(key, []).append(idx)
    offsets = [(a, b, c) for a in (-1, 0, 1) for b in (-1, 0, 1)
               for c in (-1, 0, 1)]
    ai, aj = [], []
    for key, members in buckets.items():
        near = []
        for off in offsets:
            other = buckets.get((key[0] + off[0], key[1] + off[1],
                                 key[2] + off[2]))
            if other:
                near.extend(other)
        near = np.asarray(near)
        for i in members:
            js = near[near > i]
            ai.append(np.full(len(js), i))
            aj.append(js)
    if ai:
        i = np.concatenate(ai)
        j = np.concatenate(aj)
    else:
        i = j = np.zeros(0, dtype=np.int64)
    # prune with the exact midpoint bound
    gap = np.linalg.norm(mid[i] - mid[j], axis=1) - 0.5 * (lens[i] + lens[j])
    keep = gap <= cutoff
    i, j = i[keep], j[keep]

    # edge-edge pairs
    ok = top.edge_pair_ok(i, j)
    ee = _unique_pairs(i[ok], j[ok], symmetric=True)
    # vertex-edge: endpoints of one edge against the other edge, both ways;
    # a close edge pair also covers the edges touching at shared vertices
    ends_i = np.concatenate([i, top.nxt[i], j, top.nxt[j]])
    ends_j = np.concatenate([j, j, i, i])
    ok = top.vertex_edge_ok(ends_i, ends_j)
    ve = _unique_pairs(ends_i[ok], ends_j[ok], symmetric=False)
    # vertex-vertex
    va = np.concatenate([i, i, top.nxt[i], top.nxt[i]])
    vb = np.concatenate([j, top.nxt[j], j, top.nxt[j]])
    lo, hi = np.minimum(va, vb), np.maximum(va, vb)
    ok = top.vertex_pair_ok(lo, hi)
    vv = _unique_pairs(lo[ok], hi[ok], symmetric=True)
    return ee, ve, vv


def _unique_pairs(a, b, symmetric):
    if symmetric:
        a, b = np.minimum(a, b), np.maximum(a, b)
    if len(a) == 0:
        return a.astype(np.int64), b.astype(np.int64)
    packed = np.unique(np.stack([a, b], axis=1), axis=0)
    return packed[:, 0].copy(), packed[:, 1].copy()


def min_strut_distance(knot: PolygonalKnot, method: str = "brute",
                       return_strut: bool = False):
    """Doubly critical self-distance (``inf`` if no critical chord exists).

    The grid path grows its search radius until a chord is found or the
    radius covers the whole configuration; it returns exactly the brute
    force value.
    """
    if method == "brute":
        st = find_struts(knot, None, "brute")
    else:
        span = float(np.linalg.norm(np.ptp(knot.vertices, axis=0)))
        cutoff = 4.0 * float(np.mean(edge_lengths(knot)))
        while True:
            st = find_struts(knot, cutoff, "grid")
            if len(st) or cutoff > span:
                break
            cutoff *= 2.0
    if len(st) == 0:
        return (np.inf, None) if return_strut else np.inf
    k = int(np.argmin(st.dist))
    d = float(st.dist[k])
    if return_strut:
        return d, tuple(int(x) for x in st.idx[k])
    return d


@dataclass(frozen=True)
class ThicknessBreakdown:
    min_rad: float
    dcsd_half: float
    thickness: float
    governing_pair: tuple
    governed_by: str

    @property
    def self_intersecting(self) -> bool:
        return not self.thickness > 0.0


def thickness(knot: PolygonalKnot, method: str = "brute") -> ThicknessBreakdown:
    """Polygonal thickness ``min(minrad, dcsd / 2)`` with its ingredients."""
    r, vtx = min_radius_of_curvature(knot, return_vertex=True)
    d, strut = min_strut_distance(knot, method=method, return_strut=True)
    half = 0.5 * d
    if half < r:
        return ThicknessBreakdown(r, half, half, strut, "strut")
    return ThicknessBreakdown(r, half, r, (vtx,), "curvature")


def thickness_value(knot: PolygonalKnot, method: str = "brute") -> float:
    """Thickness alone; only chords shorter than ``2 * minrad`` are examined."""
    r = min_radius_of_curvature(knot)
    if not r > 0.0:
        return 0.0
    cutoff = 2.0 * r * (1.0 + 1e-12) if np.isfinite(r) else None
    if method == "grid" and cutoff is None:
        return 0.5 * min_strut_distance(knot, method="grid")
    if method == "auto":
        method = "grid" if (cutoff is not None and knot.n > 256) else "brute"
    st = find_struts(knot, cutoff, method)
    if len(st) == 0:
        return float(r)
    return float(min(r, 0.5 * st.dist.min()))


def ropelength(knot: PolygonalKnot) -> float:
    """Length divided by thickness; invariant under similarity."""
    tb = thickness(knot)
    if not tb.thickness > 0.0:
        raise GeometryError("non-positive thickness: configuration "
                            "self-intersects")
    return length(knot) / tb.thickness


def regular_polygon(n: int, radius: float = 1.0, center=(0.0, 0.0, 0.0),
                    phase: float = 0.0) -> PolygonalKnot:
    """Regular ``n``-gon inscribed in a circle in the xy-plane."""
    t = 2.0 * np.pi * np.arange(n) / n + phase
    pts = np.stack([radius * np.cos(t), radius * np.sin(t), np.zeros(n)], axis=1)
    return PolygonalKnot(pts + np.asarray(center, dtype=float))
