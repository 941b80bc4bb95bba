"""Knot diagrams from projections and the knot determinant |Delta(-1)|.

A projection is turned into a signed Gauss code. The planar embedding of
the diagram is recovered from the code alone (the sign of a crossing fixes
the cyclic order of its four arcs), faces are traced, checkerboard coloured,
and the determinant is the absolute value of any first minor of the
Goeritz matrix of the shaded faces.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
import sympy
from scipy.stats import qmc

from .geometry import PolygonalKnot

MAX_ATTEMPTS = 50
GENERIC_TOL = 1e-9


class DiagramError(ValueError):
    """Inconsistent diagram data."""


class NonGenericProjection(ValueError):
    """The projection direction is degenerate for this knot."""


@dataclass(frozen=True)
class Crossing:
    over_edge: int
    under_edge: int
    sign: int
    over_param: float = 0.0
    under_param: float = 0.0


@dataclass
class Diagram:
    """Crossings plus the cyclic Gauss sequence of ``(crossing, is_over)``."""

    crossings: list[Crossing]
    strand_order: list[tuple[int, bool]]
    direction: np.ndarray | None = None

    def __post_init__(self):
        seen: dict[int, list[bool]] = {}
        for c, over in self.strand_order:
            seen.setdefault(c, []).append(bool(over))
        if set(seen) != set(range(len(self.crossings))):
            raise DiagramError("strand order does not visit every crossing")
        for c, flags in seen.items():
            if sorted(flags) != [False, True]:
                raise DiagramError(f"crossing {c} must be visited once over "
                                   "and once under")
        for c in self.crossings:
            if c.sign not in (1, -1):
                raise DiagramError("crossing signs must be +1 or -1")

    @property
    def crossing_count(self) -> int:
        return len(self.crossings)

    @property
    def writhe(self) -> int:
        return sum(c.sign for c in self.crossings)

    def gauss_code(self) -> str:
        """Signed Gauss code, e.g. ``"O1+ U2+ O3+ U1+ O2+ U3+"``."""
        return " ".join(
            f"{'O' if over else 'U'}{c + 1}{'+' if self.crossings[c].sign > 0 else '-'}"
            for c, over in self.strand_order)

    @classmethod
    def from_gauss_code(cls, text: str) -> "Diagram":
        tokens = text.replace(",", " ").split()
        signs: dict[int, int] = {}
        order = []
        labels: dict[str, int] = {}
        for tok in tokens:
            m = re.fullmatch(r"([OUou])(\d+)([+-])", tok)
            if not m:
                raise DiagramError(f"bad Gauss code token {tok!r}")
            key = m.group(2)
            c = labels.setdefault(key, len(labels))
            sign = 1 if m.group(3) == "+" else -1
            if signs.setdefault(c, sign) != sign:
                raise DiagramError(f"crossing {key} has conflicting signs")
            order.append((c, m.group(1).upper() == "O"))
        crossings = [Crossing(-1, -1, signs[c]) for c in range(len(labels))]
        return cls(crossings, order)


@dataclass(frozen=True)
class DeterminantResult:
    determinant: int
    projection_direction: tuple = field(default=())
    crossing_count: int = 0


# ---------------------------------------------------------------------------
# projection


def _basis(direction):
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    helper = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(helper, d)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(d, e1)
    return d, e1, e2


def _cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def project_to_diagram(knot: PolygonalKnot, direction) -> Diagram:
    """Signed crossing diagram of ``knot`` viewed from ``+direction``.

    Raises :class:`NonGenericProjection` when a projected vertex lands within
    ``1e-9 * diameter`` of another edge, when projected edges overlap, or when
    a crossing is tangential.
    """
    if knot.n_components != 1:
        raise ValueError("diagrams are built for single-component knots")
    d, e1, e2 = _basis(direction)
    v = knot.vertices
    n = len(v)
    P = np.stack([v @ e1, v @ e2], axis=1)
    depth = v @ d
    diam = float(np.linalg.norm(np.ptp(v, axis=0)))
    tol = GENERIC_TOL * max(diam, 1e-300)
    nxt = np.roll(np.arange(n), -1)
    A = P[nxt] - P

    # every projected vertex must keep clear of the edges not incident to it
    k, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    k, j = k.ravel(), j.ravel()
    keep = (j != k) & (nxt[j] != k)
    k, j = k[keep], j[keep]
    rel = P[k] - P[j]
    if np.any(np.linalg.norm(A, axis=1) <= tol):
        raise NonGenericProjection("an edge projects to a point")
    L2 = np.einsum("ij,ij->i", A[j], A[j])
    t = np.clip(np.einsum("ij,ij->i", rel, A[j]) / L2, 0.0, 1.0)
    gap = np.linalg.norm(rel - t[:, None] * A[j], axis=1)
    if np.any(gap < tol):
        raise NonGenericProjection("a vertex projects onto another edge")
    # adjacent edges folding back onto each other
    a, b = A, A[nxt]
    fold = (np.abs(_cross2(a, b)) <= tol * np.linalg.norm(a, axis=1)) & \
        (np.einsum("ij,ij->i", a, b) < 0)
    if np.any(fold):
        raise NonGenericProjection("adjacent edges overlap in projection")

    iu, ju = np.triu_indices(n, k=2)
    ok = ~((iu == 0) & (ju == n - 1))
    iu, ju = iu[ok], ju[ok]
    a, b = A[iu], A[ju]
    den = _cross2(a, b)
    r = P[ju] - P[iu]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = _cross2(r, b) / den
        u = _cross2(r, a) / den
    hit = (den != 0) & (s > 0) & (s < 1) & (u > 0) & (u < 1)
    events = []  # (edge, param, crossing_id, is_over)
    crossings = []
    for idx in np.nonzero(hit)[0]:
        i, jj = int(iu[idx]), int(ju[idx])
        si, uj = float(s[idx]), float(u[idx])
        sin_angle = abs(den[idx]) / (np.linalg.norm(a[idx]) * np.linalg.norm(b[idx]))
        if sin_angle < 1e-9:
            raise NonGenericProjection("tangential crossing")
        hi = depth[i] + si * (depth[nxt[i]] - depth[i])
        hj = depth[jj] + uj * (depth[nxt[jj]] - depth[jj])
        if abs(hi - hj) <= tol:
            raise NonGenericProjection("strands meet in space at a crossing")
        if hi > hj:
            over, under, po, pu = i, jj, si, uj
        else:
            over, under, po, pu = jj, i, uj, si
        sign = 1 if _cross2(A[over], A[under]) > 0 else -1
        cid = len(crossings)
        crossings.append(Crossing(over, under, sign, po, pu))
        events.append((over, po, cid, True))
        events.append((under, pu, cid, False))
    events.sort(key=lambda e: (e[0], e[1]))
    # relabel crossings by first visit
    relabel: dict[int, int] = {}
    for e in events:
        relabel.setdefault(e[2], len(relabel))
    ordered = [None] * len(crossings)
    for old, new in relabel.items():
        ordered[new] = crossings[old]
    strand = [(relabel[e[2]], e[3]) for e in events]
    return Diagram(ordered, strand, direction=d)


def generic_directions(seed: int = 0, count: int = MAX_ATTEMPTS) -> np.ndarray:
    """Scrambled Sobol directions, uniform on the sphere and reproducible."""
    m = int(np.ceil(np.log2(max(count, 2))))
    pts = qmc.Sobol(d=2, scramble=True, seed=seed).random_base2(m)[:count]
    z = 2.0 * pts[:, 0] - 1.0
    phi = 2.0 * np.pi * pts[:, 1]
    rho = np.sqrt(1.0 - z * z)
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)


def project_generic(knot: PolygonalKnot, direction=None, seed: int = 0,
                    attempts: int = MAX_ATTEMPTS) -> Diagram:
    """Project along ``direction`` or, failing that, along seeded fallbacks."""
    tries = [] if direction is None else [np.asarray(direction, dtype=float)]
    tries.extend(generic_directions(seed, attempts))
    last = None
    for dvec in tries[:attempts]:
        try:
            return project_to_diagram(knot, dvec)
        except NonGenericProjection as exc:
            last = exc
    raise NonGenericProjection(f"no generic direction in {attempts} attempts: {last}")


# ---------------------------------------------------------------------------
# determinant


def _rotations(diagram: Diagram):
    """Counter-clockwise half-edge order at each crossing.

    Arc ``m`` runs from visit ``m`` to visit ``m + 1``. A half-edge is
    ``(arc, +1)`` leaving the start of the arc or ``(arc, -1)`` leaving its
    end.
    """
    order = diagram.strand_order
    m = len(order)
    visit = {}
    for pos, (c, over) in enumerate(order):
        visit[(c, over)] = pos
    rot = {}
    for c, cr in enumerate(diagram.crossings):
        a = visit[(c, True)]
        b = visit[(c, False)]
        out_o, in_o = (a, 1), ((a - 1) % m, -1)
        out_u, in_u = (b, 1), ((b - 1) % m, -1)
        if cr.sign > 0:
            rot[c] = [out_o, out_u, in_o, in_u]
        else:
            rot[c] = [out_o, in_u, in_o, out_u]
    return rot


def _faces(diagram: Diagram, rot):
    order = diagram.strand_order
    m = len(order)

    def origin(h):
        arc, dr = h
        return order[arc][0] if dr > 0 else order[(arc + 1) % m][0]

    where = {}
    for c, hs in rot.items():
        for k, h in enumerate(hs):
            where[h] = (c, k)
    face_of = {}
    faces = []
    for start in where:
        if start in face_of:
            continue
        fid = len(faces)
        cycle = []
        h = start
        while h not in face_of:
            face_of[h] = fid
            cycle.append(h)
            arc, dr = h
            back = (arc, -dr)
            c, k = where[back]
            h = rot[c][(k - 1) % 4]
        if h != start:
            raise DiagramError("face tracing did not close up")
        faces.append(cycle)
    return faces, face_of, origin


def determinant(diagram: Diagram) -> DeterminantResult:
    """``|Delta(-1)|`` from the Goeritz matrix of a checkerboard colouring."""
    k = diagram.crossing_count
    direction = tuple(diagram.direction) if diagram.direction is not None else ()
    if k == 0:
        return DeterminantResult(1, direction, 0)
    rot = _rotations(diagram)
    faces, face_of, _ = _faces(diagram, rot)
    if len(faces) != k + 2:
        raise DiagramError(f"diagram is not planar: {len(faces)} faces for "
                           f"{k} crossings")
    # two-colour the faces: the two sides of an arc differ
    colour = {0: 0}
    stack = [0]
    while stack:
        f = stack.pop()
        for h in faces[f]:
            g = face_of[(h[0], -h[1])]
            if g not in colour:
                colour[g] = 1 - colour[f]
                stack.append(g)
            elif colour[g] == colour[f]:
                raise DiagramError("faces cannot be checkerboard coloured")
    shaded = sorted(f for f in range(len(faces)) if colour[f] == 0)
    index = {f: i for i, f in enumerate(shaded)}
    G = [[0] * len(shaded) for _ in shaded]
    visit_over = {}
    for pos, (c, over) in enumerate(diagram.strand_order):
        visit_over[pos] = over
    order = diagram.strand_order
    m = len(order)

    def is_over(h):
        arc, dr = h
        pos = arc if dr > 0 else (arc + 1) % m
        return order[pos][1]

    for c, hs in rot.items():
        corners = []
        for q in range(4):
            h, h2 = hs[q], hs[(q + 1) % 4]
            f = face_of[h]
            if colour[f] == 0:
                eta = 1 if (is_over(h) and not is_over(h2)) else -1
                corners.append((f, eta))
        if len(corners) != 2 or corners[0][1] != corners[1][1]:
            raise DiagramError(f"crossing {c} has inconsistent shading")
        (f1, eta), (f2, _) = corners
        if f1 != f2:
            i, j = index[f1], index[f2]
            G[i][j] += eta
            G[j][i] += eta
    for i in range(len(G)):
        G[i][i] = -sum(G[i][j] for j in range(len(G)) if j != i)
    if len(G) <= 1:
        det = 1
    else:
        det = abs(int(sympy.Matrix(G)[1:, 1:].det(method="bareiss")))
    return DeterminantResult(det, direction, k)


def knot_determinant(knot: PolygonalKnot, direction=None, seed: int = 0) -> DeterminantResult:
    return determinant(project_generic(knot, direction, seed=seed))


def verify_topology(before: PolygonalKnot, after: PolygonalKnot, seed: int = 0):
    """Compare knot determinants of two configurations.

    Agreement is necessary but not sufficient for the two to be the same
    knot type: distinct knots can share a determinant.
    """
    if before.n_components != after.n_components:
        raise ValueError("component counts differ")
    if before.n_components > 1:
        rb = [knot_determinant(before.component(k), seed=seed)
              for k in range(before.n_components)]
        ra = [knot_determinant(after.component(k), seed=seed)
              for k in range(after.n_components)]
        same = [x.determinant for x in rb] == [x.determinant for x in ra]
        return same, rb, ra
    rb = knot_determinant(before, seed=seed)
    ra = knot_determinant(after, seed=seed)
    return rb.determinant == ra.determinant, rb, ra
