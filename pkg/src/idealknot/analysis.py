"""Statistics over tables of tight-knot measurements."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

ALTERNATING_QUANTUM = 4.0 / 7.0
NONALTERNATING_QUANTUM = 4.0 / 3.0


class AnalysisError(ValueError):
    pass


# ---------------------------------------------------------------------------
# writhe quantization


@dataclass(frozen=True)
class QuantizationResult:
    A: float
    B: float
    variance: float
    resolution: tuple[float, float]


def centred_fraction(x):
    """Signed distance to the nearest integer, in ``[-1/2, 1/2)``."""
    x = np.asarray(x, dtype=float)
    return x - np.floor(x + 0.5)


def quantization_objective(writhes, A, B):
    """Spread of ``Wr / A + B`` about the nearest integers.

    This is the mean square of the centred fractional part. Plain variance
    is blind to ``B`` except where points cross the wrap; measuring about
    zero pins ``B`` to the offset that centres the cluster on the integers,
    where the two quantities coincide. Shifting ``B`` by one leaves the
    value unchanged.
    """
    w = np.asarray(writhes, dtype=float)
    return float(np.mean(centred_fraction(w / A + B) ** 2))


def _grid_search(w, A_vals, B_vals):
    best = (np.inf, 0, 0)
    for ia, A in enumerate(A_vals):
        frac = centred_fraction((w / A)[None, :] + B_vals[:, None])
        var = np.mean(frac * frac, axis=1)
        ib = int(np.argmin(var))
        if var[ib] < best[0]:
            best = (float(var[ib]), ia, ib)
    return best


def quantization_sweep(writhes: Sequence[float], A_range=(0.3, 2.0),
                       B_range=(0.0, 1.0),
                       resolution=(1e-3, 1e-2)) -> QuantizationResult:
    """Grid search for the quantum ``A`` and offset ``B``.

    A coarse grid over ``A_range`` x ``B_range`` is followed by one pass 10x
    finer over the neighbouring cells of the best coarse point. Ties go to
    the smallest ``A``, then the smallest ``B``.
    """
    w = np.asarray(writhes, dtype=float)
    if w.size < 3:
        raise AnalysisError("need at least 3 writhe values")
    a0, a1 = map(float, A_range)
    if not 0 < a0 < a1:
        raise AnalysisError("A range must be positive and increasing")
    b0, b1 = map(float, B_range)
    da, db = map(float, resolution)
    A_vals = a0 + da * np.arange(int(math.floor((a1 - a0) / da + 1e-9)) + 1)
    B_vals = b0 + db * np.arange(int(math.ceil((b1 - b0) / db - 1e-9)))
    _, ia, ib = _grid_search(w, A_vals, B_vals)
    A_c, B_c = A_vals[ia], B_vals[ib]
    fa, fb = da / 10.0, db / 10.0
    A_fine = A_c + fa * np.arange(-10, 11)
    A_fine = A_fine[A_fine > 0]
    B_fine = B_c + fb * np.arange(-10, 11)
    _, ia, ib = _grid_search(w, A_fine, B_fine)
    A, B = float(A_fine[ia]), float(B_fine[ib])
    if b1 - b0 == 1.0:
        B -= math.floor(B - b0)
    var = float(np.var(centred_fraction(w / A + B)))
    return QuantizationResult(A, B, var, (fa, fb))


def residual_writhe(wr, quantum: float, offset_half: bool = False):
    """Deviation of ``wr`` from the nearest multiple of ``quantum``.

    With ``offset_half`` the allowed values are half-integer multiples.
    The result lies in ``[-quantum/2, quantum/2)``.
    """
    if not quantum > 0:
        raise AnalysisError("quantum must be positive")
    y = np.asarray(wr, dtype=float) / quantum
    if offset_half:
        y = y - 0.5
    r = quantum * centred_fraction(y)
    return float(r) if np.ndim(r) == 0 else r


def uniform_null_sd() -> float:
    """Standard deviation of U(0, 1), the no-quantization reference."""
    return 1.0 / math.sqrt(12.0)


# ---------------------------------------------------------------------------
# correlation, moments, fits


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise AnalysisError("pearson needs two equal-length 1-d sequences")
    if len(x) < 2:
        raise AnalysisError("pearson needs at least 2 points")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise AnalysisError("zero variance input")
    return float(np.clip(stats.pearsonr(x, y)[0], -1.0, 1.0))


@dataclass(frozen=True)
class DistributionStats:
    mean: float
    sd: float
    sd_over_mean: float
    skewness: float
    kurtosis: float
    count: int

    def __iter__(self):
        return iter((self.mean, self.sd, self.sd_over_mean, self.skewness,
                     self.kurtosis))


def distribution_stats(values: Sequence[float]) -> DistributionStats:
    """Mean, sample sd (n - 1), sd/mean, biased skewness and non-excess
    kurtosis (a normal sample gives about 3)."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise AnalysisError("need at least 2 values")
    if np.ptp(v) == 0:
        raise AnalysisError("degenerate input: zero spread")
    mean = float(v.mean())
    sd = float(v.std(ddof=1))
    return DistributionStats(mean, sd, sd / mean,
                             float(stats.skew(v, bias=True)),
                             float(stats.kurtosis(v, fisher=False, bias=True)),
                             int(v.size))


@dataclass
class FitResult:
    model: str
    coefficients: dict[str, float]
    stderr: dict[str, float]
    rss: float
    points: int
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        out = {}
        for k, v in self.coefficients.items():
            out[k] = float(v)
            out[f"{k}_stderr"] = float(self.stderr[k])
        out["rss"] = self.rss
        out["points"] = self.points
        return out

    def __str__(self):
        parts = [f"{k}={v:.6g}+-{self.stderr[k]:.2g}"
                 for k, v in self.coefficients.items()]
        return f"{self.model}: " + ", ".join(parts) + f" (rss={self.rss:.4g})"


def _ols(X, y):
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    dof = len(y) - X.shape[1]
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = s2 * np.linalg.inv(X.T @ X)
    return coef, np.sqrt(np.clip(np.diag(cov), 0.0, None)), resid


def fit_scaling(crossing_numbers: Iterable[float], ropelengths: Iterable[float],
                model: str = "power") -> FitResult:
    """Unweighted least squares of ropelength against crossing number.

    ``model="linear"`` fits ``slope * C + intercept``; ``model="power"`` fits
    ``prefactor * C ** exponent`` by a straight line in log-log space, with
    the prefactor error carried back by the delta method. Every point gets
    the same weight.
    """
    C = np.asarray(list(crossing_numbers), dtype=float)
    y = np.asarray(list(ropelengths), dtype=float)
    if C.shape != y.shape:
        raise AnalysisError("crossing numbers and ropelengths differ in length")
    if len(np.unique(C)) < 3:
        raise AnalysisError("need at least 3 distinct crossing numbers")
    if model == "linear":
        X = np.column_stack([C, np.ones_like(C)])
        coef, se, resid = _ols(X, y)
        return FitResult("linear", {"slope": coef[0], "intercept": coef[1]},
                         {"slope": se[0], "intercept": se[1]},
                         float(resid @ resid), len(y))
    if model == "power":
        if np.any(C <= 0) or np.any(y <= 0):
            raise AnalysisError("power fit needs positive data")
        X = np.column_stack([np.log(C), np.ones_like(C)])
        coef, se, resid = _ols(X, np.log(y))
        a = math.exp(coef[1])
        fitted = a * C ** coef[0]
        return FitResult("power", {"prefactor": a, "exponent": coef[0]},
                         {"prefactor": a * se[1], "exponent": se[0]},
                         float(np.sum((y - fitted) ** 2)), len(y),
                         extra={"log_rss": float(resid @ resid)})
    raise AnalysisError(f"unknown model {model!r}")


def fit_records(records, model="power", alternating=None) -> FitResult:
    """Fit one point per knot, optionally restricted to one class."""
    sel = [r for r in records
           if r.ropelength is not None and r.crossing_number is not None
           and (alternating is None or r.alternating == alternating)]
    return fit_scaling([r.crossing_number for r in sel],
                       [r.ropelength for r in sel], model)


# ---------------------------------------------------------------------------
# table-level summaries


def group_records(records, by_class=True):
    """``{(crossing_number, 'A' | 'N' | '*'): [records]}``."""
    groups: dict[tuple, list] = {}
    for r in records:
        if r.crossing_number is None:
            continue
        groups.setdefault((r.crossing_number, "*"), []).append(r)
        if by_class and r.alternating is not None:
            key = (r.crossing_number, "A" if r.alternating else "N")
            groups.setdefault(key, []).append(r)
    return dict(sorted(groups.items()))


def ropelength_table(records, min_count=2):
    """Per-group ropelength moments by crossing number and class."""
    rows = []
    for (c, cls), rs in group_records(records).items():
        vals = [r.ropelength for r in rs if r.ropelength is not None]
        if len(vals) >= min_count and np.ptp(vals) > 0:
            st = distribution_stats(vals)
            rows.append({"crossings": c, "class": cls, **st.__dict__})
        elif vals:
            rows.append({"crossings": c, "class": cls, "mean": float(np.mean(vals)),
                         "count": len(vals)})
    return rows


def _column(records, name, absolute=False):
    vals = [r.get(name) for r in records]
    vals = np.array([np.nan if v is None else float(v) for v in vals])
    return np.abs(vals) if absolute else vals


def correlation(records, x: str, y: str, absolute=()):
    xs = _column(records, x, x in absolute)
    ys = _column(records, y, y in absolute)
    ok = np.isfinite(xs) & np.isfinite(ys)
    if ok.sum() < 2:
        return None
    try:
        return pearson(xs[ok], ys[ok])
    except AnalysisError:
        return None


def writhe_residuals(records, alternating: bool):
    """Residual writhes of one class about its quantum (absolute writhe)."""
    w = np.abs(_column([r for r in records if r.alternating == alternating],
                       "writhe"))
    w = w[np.isfinite(w)]
    if alternating:
        return residual_writhe(w, ALTERNATING_QUANTUM)
    return residual_writhe(w, NONALTERNATING_QUANTUM, offset_half=True)


def summarize(records, sweep_classes=True):
    """Everything the ``analyze`` command reports, as plain data."""
    out = {"count": len(records), "groups": ropelength_table(records)}
    ok = [r for r in records if r.ropelength is not None]
    corr = {}
    for cls, flag in (("A", True), ("N", False)):
        sub = [r for r in ok if r.alternating is flag]
        corr[cls] = {
            "ropelength~acn": correlation(sub, "ropelength", "acn"),
            "ropelength~hyperbolic_volume": correlation(sub, "ropelength",
                                                        "hyperbolic_volume"),
            "ropelength~alexander_at_minus1": correlation(
                sub, "ropelength", "alexander_at_minus1",
                absolute=("alexander_at_minus1",)),
            "writhe~rasmussen_s": correlation(sub, "writhe", "rasmussen_s"),
            "writhe~tau": correlation(sub, "writhe", "tau"),
        }
    out["correlations"] = corr
    fits = {}
    for name, flag in (("all", None), ("alternating", True),
                       ("nonalternating", False)):
        for model in ("linear", "power"):
            try:
                fits[f"{name}/{model}"] = fit_records(ok, model, flag)
            except AnalysisError:
                pass
    out["fits"] = fits
    resid = {}
    for cls, flag in (("A", True), ("N", False)):
        r = writhe_residuals(ok, flag)
        if len(r) >= 2:
            resid[cls] = {"mean": float(np.mean(r)), "sd": float(np.std(r, ddof=1)),
                          "count": int(len(r))}
    out["residual_writhe"] = resid
    out["uniform_null_sd"] = uniform_null_sd()
    if sweep_classes:
        sweeps = {}
        for cls, flag, rng in (("A", True, (0.3, 0.8)), ("N", False, (1.0, 2.0))):
            w = np.abs(_column([r for r in ok if r.alternating is flag], "writhe"))
            w = w[np.isfinite(w)]
            if len(w) >= 3:
                sweeps[cls] = quantization_sweep(w, A_range=rng)
        out["sweeps"] = sweeps
    return out
