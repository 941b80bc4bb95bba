"""Ropelength minimisation by constrained gradient descent.

Every step works at unit thickness. The length gradient (plus, during the
first phase, a tangential equilateralisation force) is projected onto the
cone of directions that do not shorten any active strut or shrink any
active curvature radius; the projection is a non-negative least squares
problem on the active constraint normals. After each move a few Newton
corrections push violated constraints back to the boundary, and the step is
halved until the result is feasible and no longer than before.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq, nnls

from . import geometry as geo
from .geometry import GeometryError, PolygonalKnot

log = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-9


class TighteningError(RuntimeError):
    pass


@dataclass
class TighteningConfig:
    phase1_max_steps: int = 25000
    phase1_residual_target: float = 0.1
    phase2_max_steps: int = 12000
    phase2_residual_target: float = 0.001
    equilateralization_weight: float = 1.0
    step_scale: float = 0.03
    contact_activation_distance: float = 1.001
    random_seed: int = 0
    stall_steps: int = 500
    stall_improvement: float = 1e-8
    min_step: float = 1e-12
    trace_every: int = 25
    corrections: int = 4
    strut_method: str = "auto"
    debug: bool = False

    def __post_init__(self):
        if min(self.phase1_max_steps, self.phase2_max_steps) < 0:
            raise ValueError("step counts must be non-negative")
        if self.phase1_residual_target <= 0 or self.phase2_residual_target <= 0:
            raise ValueError("residual targets must be positive")
        if self.equilateralization_weight < 0:
            raise ValueError("equilateralization_weight must be >= 0")
        if self.step_scale <= 0:
            raise ValueError("step_scale must be positive")

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class PhaseReport:
    steps_taken: int = 0
    termination_reason: str = "step-limit"
    final_residual: float = float("nan")
    quiet: int = 0


@dataclass
class TighteningReport:
    phases: list[PhaseReport] = field(default_factory=list)
    final_residual: float = float("nan")
    final_ropelength: float = float("nan")
    initial_ropelength: float = float("nan")
    ropelength_trace: list[tuple[int, float]] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def steps_taken(self):
        return [p.steps_taken for p in self.phases]

    @property
    def termination_reason(self):
        return [p.termination_reason for p in self.phases]

    @property
    def stalled(self) -> bool:
        return bool(self.phases) and self.phases[-1].termination_reason == "stalled"


# ---------------------------------------------------------------------------
# constraint rows


def _curvature_rows(v, top, limit):
    """Gradients of the one-sided turning radii ``e-/(2 tan(theta/2))`` and
    ``e+/(2 tan(theta/2))`` for every side at or below ``limit``.

    Returns ``(vertex triples (m, 3), gradients (m, 3, 3), values (m,))``
    where the triples are ``(prev, vertex, next)``.
    """
    a = v - v[top.prv]
    b = v[top.nxt] - v
    la = np.linalg.norm(a, axis=1)
    lb = np.linalg.norm(b, axis=1)
    c = np.cross(a, b)
    lc = np.linalg.norm(c, axis=1)
    num = la * lb + np.einsum("ij,ij->i", a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = num / (2.0 * lc)
    g[lc == 0] = np.inf
    fm, fp = la * g, lb * g
    sel_m = np.nonzero(fm <= limit)[0]
    sel_p = np.nonzero(fp <= limit)[0]
    sel = np.concatenate([sel_m, sel_p])
    if len(sel) == 0:
        return (np.zeros((0, 3), dtype=np.int64), np.zeros((0, 3, 3)),
                np.zeros(0))
    side = np.concatenate([np.zeros(len(sel_m)), np.ones(len(sel_p))])
    a, b, la, lb, c, lc, num, gg = (x[sel] for x in (a, b, la, lb, c, lc, num, g))
    ch = c / lc[:, None]
    ah = a / la[:, None]
    bh = b / lb[:, None]
    dg_da = ((lb[:, None] * ah + b) / (2 * lc[:, None])
             - num[:, None] * np.cross(b, ch) / (2 * lc[:, None] ** 2))
    dg_db = ((la[:, None] * bh + a) / (2 * lc[:, None])
             - num[:, None] * np.cross(ch, a) / (2 * lc[:, None] ** 2))
    m = side == 0
    # f = |a| g  or  |b| g
    df_da = np.where(m[:, None], ah * gg[:, None] + la[:, None] * dg_da,
                     lb[:, None] * dg_da)
    df_db = np.where(m[:, None], la[:, None] * dg_db,
                     bh * gg[:, None] + lb[:, None] * dg_db)
    grads = np.stack([-df_da, df_da - df_db, df_db], axis=1)
    triples = np.stack([top.prv[sel], sel, top.nxt[sel]], axis=1)
    values = np.where(m, la * gg, lb * gg)
    return triples, grads, values


def _constraint_matrix(knot, limit_strut, limit_curv, method):
    """Dense constraint gradients (rows) and their current values/targets."""
    v = knot.vertices
    top = knot.topology
    n = len(v)
    st = geo.find_struts(knot, cutoff=limit_strut, method=method)
    tri, grads, cvals = _curvature_rows(v, top, limit_curv)
    m = len(st) + len(tri)
    N = np.zeros((m, n, 3))
    rows = np.arange(len(st))
    for col in range(4):
        np.add.at(N, (rows, st.idx[:, col]),
                  st.w[:, col, None] * st.unit)
    r0 = len(st)
    rows = np.arange(r0, m)
    for col in range(3):
        np.add.at(N, (rows, tri[:, col]), grads[:, col])
    values = np.concatenate([st.dist, cvals])
    targets = np.concatenate([np.full(len(st), 2.0), np.ones(len(tri))])
    return N.reshape(m, 3 * n), values, targets


# ---------------------------------------------------------------------------
# forces


def length_gradient(v, top) -> np.ndarray:
    e = v[top.nxt] - v
    u = e / np.linalg.norm(e, axis=1)[:, None]
    return u[top.prv] - u


def equilateralization_force(v, top) -> np.ndarray:
    """Tangential force driving each component's edges towards equal length."""
    e = v[top.nxt] - v
    lens = np.linalg.norm(e, axis=1)
    u = e / lens[:, None]
    mean = np.bincount(top.comp, lens) / np.bincount(top.comp)
    dev = lens - mean[top.comp]
    # -dE/dv for E = 1/2 sum (len - mean)^2 at fixed mean
    f = dev[:, None] * u - dev[top.prv][:, None] * u[top.prv]
    t = u + u[top.prv]
    tn = np.linalg.norm(t, axis=1)
    t = np.where(tn[:, None] > 0, t / np.where(tn > 0, tn, 1)[:, None], 0.0)
    return np.einsum("ij,ij->i", f, t)[:, None] * t


def _project(direction, N):
    """Project ``direction`` onto ``{d : N d >= 0}``."""
    if N.shape[0] == 0:
        return direction.copy(), np.zeros(0)
    lam, _ = nnls(N.T, -direction, maxiter=50 * N.shape[0])
    return direction + N.T @ lam, lam


def _normalise(knot):
    """Centre at the origin and rescale to unit thickness."""
    v = knot.vertices - knot.vertices.mean(axis=0)
    tau = geo.thickness_value(knot.with_vertices(v))
    if not tau > 0:
        raise GeometryError("cannot tighten a self-intersecting configuration")
    return knot.with_vertices(v / tau)


def _search_direction(knot, config, phase, method):
    v = knot.vertices
    top = knot.topology
    act = config.contact_activation_distance
    direction = -length_gradient(v, top)
    if phase == 0 and config.equilateralization_weight > 0:
        direction = direction + config.equilateralization_weight * \
            equilateralization_force(v, top)
    N, _, _ = _constraint_matrix(knot, 2.0 * act, act, method)
    flat = direction.ravel()
    proj, lam = _project(flat, N)
    if config.debug and len(lam):
        worst = float(np.min(N @ proj)) if N.shape[0] else 0.0
        if worst < -1e-8 * max(1.0, np.linalg.norm(proj)):
            raise TighteningError(f"projection leaves the feasible cone ({worst})")
    if not np.all(np.isfinite(proj)):
        raise TighteningError("non-finite gradient")
    return proj.reshape(-1, 3)


def residual(knot: PolygonalKnot, config: TighteningConfig | None = None,
             phase: int = 1) -> float:
    """Projected-gradient norm per vertex, evaluated where the knot is.

    Constraints are thickness >= 1 at the knot's own scale, so a knot
    thicker than one has no active constraints. ``phase`` is the 0-based
    phase index; the default 1 omits the equilateralisation force.
    """
    config = config or TighteningConfig()
    d = _search_direction(knot, config, phase, config.strut_method)
    return float(np.linalg.norm(d) / knot.n)


def _min_norm_inequality(J, b):
    """Smallest ``d`` with ``J d >= b`` via the dual non-negative problem."""
    c, *_ = np.linalg.lstsq(J, b, rcond=None)
    mu, _ = nnls(J.T, c, maxiter=50 * J.shape[0])
    return J.T @ mu


def _correct(knot, config, method):
    """Push violated constraints back to the boundary.

    Each round solves for the smallest displacement that restores every
    violated row to its target while keeping nearby rows from dropping
    below theirs (to first order).
    """
    act = config.contact_activation_distance
    for _ in range(config.corrections):
        tau = geo.thickness_value(knot, method)
        if tau >= 1.0 - FEASIBILITY_TOL * 0.01:
            return knot, tau
        N, vals, targets = _constraint_matrix(knot, 2.0 * act, act, method)
        if not np.any(vals < targets):
            return knot, tau
        b = (targets * (1.0 + 1e-10) - vals)
        delta = _min_norm_inequality(N, b)
        try:
            knot = knot.with_vertices(knot.vertices + delta.reshape(-1, 3))
        except GeometryError:
            return knot, 0.0
    return knot, geo.thickness_value(knot, method)


def tighten(knot: PolygonalKnot, config: TighteningConfig | None = None,
            callback=None, checkpoint=None, checkpoint_every: int = 0,
            resume: bool = False) -> tuple[PolygonalKnot, TighteningReport]:
    """Shrink ``knot`` towards minimal ropelength at thickness one.

    Parameters
    ----------
    knot : PolygonalKnot
        Embedded starting configuration (any scale).
    config : TighteningConfig, optional
    callback : callable, optional
        Called as ``callback(step, knot, ropelength)`` after accepted steps.
    checkpoint : path, optional
        Coordinate file written every ``checkpoint_every`` accepted steps
        and at the end, with the report in a ``.report`` sidecar.
    resume : bool
        Continue from ``checkpoint`` if it exists and was written with the
        same config. The resumed run reproduces the uninterrupted one.

    Returns
    -------
    knot : PolygonalKnot
        Final configuration at unit thickness, so its length is its
        ropelength.
    report : TighteningReport
    """
    config = config or TighteningConfig()
    t0 = time.perf_counter()
    method = config.strut_method
    if method == "auto":
        method = "grid" if knot.n > 256 else "brute"
    report = None
    if resume and checkpoint is not None and _exists(checkpoint):
        cur, report, digest = load_checkpoint(checkpoint)
        if digest != config.digest():
            log.info("checkpoint %s has a different config; starting over",
                     checkpoint)
            report = None
        else:
            cur = knot.with_vertices(cur.vertices)
    if report is None:
        cur = _normalise(knot)
        report = TighteningReport(initial_ropelength=geo.length(cur))
        report.ropelength_trace.append((0, report.initial_ropelength))
    rl = geo.length(cur) if np.isnan(report.final_ropelength) \
        else report.final_ropelength
    total = sum(p.steps_taken for p in report.phases)
    schedule = [(config.phase1_max_steps, config.phase1_residual_target),
                (config.phase2_max_steps, config.phase2_residual_target)]
    for phase, (max_steps, target) in enumerate(schedule):
        if phase < len(report.phases) - 1 or (
                phase == len(report.phases) - 1
                and report.phases[phase].termination_reason != "running"):
            continue
        if phase == len(report.phases):
            report.phases.append(PhaseReport())
        pr = report.phases[phase]
        pr.termination_reason = "running"
        while True:
            step = pr.steps_taken
            direction = _search_direction(cur, config, phase, method)
            res = float(np.linalg.norm(direction) / cur.n)
            pr.final_residual = res
            if res <= target:
                pr.termination_reason = "residual-met"
                break
            if step >= max_steps:
                pr.termination_reason = "step-limit"
                break
            h = config.step_scale * float(np.mean(geo.edge_lengths(cur)))
            while True:
                try:
                    trial = cur.with_vertices(cur.vertices + h * direction)
                    trial, tau = _correct(trial, config, method)
                except GeometryError:
                    tau = 0.0
                if tau >= 1.0 - FEASIBILITY_TOL:
                    new_rl = geo.length(trial) / tau
                    if new_rl <= rl + FEASIBILITY_TOL:
                        break
                h *= 0.5
                if h < config.min_step:
                    trial = None
                    break
            if trial is None:
                pr.termination_reason = "stalled"
                break
            v = trial.vertices - trial.vertices.mean(axis=0)
            cur = trial.with_vertices(v / tau)
            gain = rl - new_rl
            rl = new_rl
            total += 1
            pr.steps_taken = step + 1
            pr.quiet = pr.quiet + 1 if gain < config.stall_improvement else 0
            if total % config.trace_every == 0:
                report.ropelength_trace.append((total, rl))
            if callback is not None:
                callback(total, cur, rl)
            if pr.quiet >= config.stall_steps:
                pr.termination_reason = "stalled"
                break
            if checkpoint is not None and checkpoint_every > 0 \
                    and total % checkpoint_every == 0:
                report.final_ropelength = rl
                save_checkpoint(checkpoint, cur, report, config)
    if report.ropelength_trace[-1][0] != total:
        report.ropelength_trace.append((total, rl))
    report.final_ropelength = geo.length(cur)
    report.final_residual = report.phases[-1].final_residual
    report.elapsed = time.perf_counter() - t0
    if checkpoint is not None:
        save_checkpoint(checkpoint, cur, report, config)
    return cur, report


def _exists(path):
    return os.path.exists(path) and os.path.exists(f"{path}.report")


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(path, knot: PolygonalKnot, report: TighteningReport,
                    config: TighteningConfig):
    """Write coordinates to ``path`` and report fields to ``path.report``."""
    from .io import KnotFile, write_knot_file

    write_knot_file(path, KnotFile.from_knot(knot), "plain")
    state = {
        "config_digest": config.digest(),
        "initial_ropelength": report.initial_ropelength,
        "final_ropelength": report.final_ropelength,
        "final_residual": report.final_residual,
        "phases": [asdict(p) for p in report.phases],
        "ropelength_trace": report.ropelength_trace,
    }
    with open(f"{path}.report", "w") as fh:
        json.dump(state, fh, indent=1)


def load_checkpoint(path) -> tuple[PolygonalKnot, TighteningReport, str]:
    """Inverse of :func:`save_checkpoint`; returns the config digest too."""
    from .io import read_knot_file

    knot = read_knot_file(path).to_knot()
    with open(f"{path}.report") as fh:
        state = json.load(fh)
    report = TighteningReport(
        phases=[PhaseReport(**p) for p in state["phases"]],
        final_residual=state["final_residual"],
        final_ropelength=state["final_ropelength"],
        initial_ropelength=state["initial_ropelength"],
        ropelength_trace=[tuple(x) for x in state["ropelength_trace"]],
    )
    return knot, report, state["config_digest"]


# ---------------------------------------------------------------------------
# preprocessing and resampling


@dataclass
class PreprocessConfig:
    coulomb_steps: int = 100
    coulomb_strength: float = 0.5
    tangential_strength: float = 1.0
    damping: float = 0.5

    def __post_init__(self):
        if self.coulomb_steps < 0:
            raise ValueError("coulomb_steps must be non-negative")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        if self.coulomb_strength < 0 or self.tangential_strength < 0:
            raise ValueError("strengths must be non-negative")


class PreprocessStarvation(GeometryError):
    """The per-step displacement cap collapsed to (numerically) zero."""


def _coulomb_force(v, top):
    """Inverse-square repulsion from every vertex except self and neighbours."""
    d = v[:, None, :] - v[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", d, d)
    n = len(v)
    mask = np.ones((n, n), dtype=bool)
    mask[np.arange(n), np.arange(n)] = False
    mask[np.arange(n), top.nxt] = False
    mask[np.arange(n), top.prv] = False
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(mask, r2 ** -1.5, 0.0)
    return np.einsum("ij,ijk->ik", w, d)


def preprocess(knot: PolygonalKnot, config: PreprocessConfig | None = None
               ) -> PolygonalKnot:
    """Damped Coulomb repulsion plus tangential contraction.

    Forces are made scale free with the mean edge length ``l``: the
    repulsion is multiplied by ``l**2`` and each update by ``l``. No vertex
    moves farther than a quarter of the current minimum distance between
    non-adjacent edges, so edges can never pass through each other. The
    result is centred at the origin.
    """
    config = config or PreprocessConfig()
    if config.coulomb_steps == 0:
        return knot
    top = knot.topology
    v = knot.vertices.copy()
    for step in range(config.coulomb_steps):
        cur = knot.with_vertices(v)
        ell = float(np.mean(geo.edge_lengths(cur)))
        force = (config.coulomb_strength * ell ** 2 * _coulomb_force(v, top)
                 - config.tangential_strength * length_gradient(v, top))
        dx = config.damping * ell * force
        cap = 0.25 * geo.min_segment_distance(cur)
        if not cap > 1e-12 * ell:
            raise PreprocessStarvation(
                f"step cap vanished at step {step} (min distance {4 * cap:g})")
        biggest = float(np.max(np.linalg.norm(dx, axis=1)))
        if biggest > cap:
            dx *= cap / biggest
        v = v + dx
    return knot.with_vertices(v - v.mean(axis=0))


def _walk(P, cum, L, c, count):
    """Arclength positions of ``count`` successive points at chord ``c``."""
    n = len(P) - 1
    seg = 0
    p = P[0]
    out = [0.0]
    for _ in range(count):
        # advance to the first segment whose end is at least ``c`` away
        while True:
            end = P[seg % n + 1]
            if np.dot(end - p, end - p) >= c * c or seg >= 4 * n:
                break
            seg += 1
        a = P[seg % n]
        d = P[seg % n + 1] - a
        ld = cum[seg % n + 1] - cum[seg % n]
        # |a + t d - p|^2 = c^2, larger root
        r = a - p
        qa = np.dot(d, d)
        qb = 2.0 * np.dot(d, r)
        qc = np.dot(r, r) - c * c
        disc = max(qb * qb - 4 * qa * qc, 0.0)
        t = (-qb + np.sqrt(disc)) / (2 * qa)
        t = min(max(t, 0.0), 1.0)
        s = (seg // n) * L + cum[seg % n] + t * ld
        p = a + t * d
        out.append(s)
    return np.asarray(out)


def _equal_chords(P, count):
    """Closed polygon with ``count`` equal chords inscribed in ``P``."""
    Q = np.vstack([P, P[:1]])
    cum = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(Q, axis=0),
                                                          axis=1))])
    L = cum[-1]

    def excess(c):
        return _walk(Q, cum, L, c, count)[-1] - L

    hi = L / count
    lo = 0.5 * hi
    while excess(lo) > 0 and lo > 1e-6 * hi:
        lo *= 0.5
    if excess(hi) < 0 or excess(lo) > 0:
        return None
    c = brentq(excess, lo, hi, xtol=1e-15 * hi, rtol=1e-15, maxiter=200)
    s = _walk(Q, cum, L, c, count)[:-1]
    pts = _at_arclength(Q, cum, s)
    return pts


def _at_arclength(Q, cum, s):
    L = cum[-1]
    s = np.mod(s, L)
    k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(Q) - 2)
    t = (s - cum[k]) / (cum[k + 1] - cum[k])
    return Q[k] + t[:, None] * (Q[k + 1] - Q[k])


def equilateralize(knot: PolygonalKnot, target_count: int) -> PolygonalKnot:
    """Resample every component to ``target_count`` equal-length edges.

    The new vertices lie on the old polygon, starting at its vertex 0, and
    are spaced by a common chord found by root finding on the closing gap.
    If the chord walk cannot close (very coarse targets on wiggly input)
    the component falls back to equal arclength spacing.
    """
    if target_count < 3:
        raise ValueError("target_count must be at least 3")
    comps = []
    for P in knot.components():
        pts = _equal_chords(P, target_count)
        if pts is None:
            log.warning("equal-chord walk failed; using equal arclength")
            Q = np.vstack([P, P[:1]])
            cum = np.concatenate([[0.0], np.cumsum(
                np.linalg.norm(np.diff(Q, axis=0), axis=1))])
            pts = _at_arclength(Q, cum, cum[-1] * np.arange(target_count)
                                / target_count)
        comps.append(pts)
    return PolygonalKnot.from_components(comps, label=knot.label)
