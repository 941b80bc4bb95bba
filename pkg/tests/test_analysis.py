import math

import numpy as np
import pytest

from idealknot.analysis import (ALTERNATING_QUANTUM, NONALTERNATING_QUANTUM,
                                AnalysisError, centred_fraction,
                                distribution_stats, fit_records, fit_scaling,
                                pearson, quantization_objective,
                                quantization_sweep, residual_writhe,
                                ropelength_table, summarize, uniform_null_sd)
from idealknot.io import InvariantRecord

TABLE_MEANS = [32.74, 42.09, 48.32, 57.16, 63.37, 71.64, 79.30, 85.98, 93.38,
               102.95]


def test_centred_fraction():
    np.testing.assert_allclose(centred_fraction([0.2, 0.7, -0.3, 2.5]),
                               [0.2, -0.3, -0.3, -0.5])


def test_objective_invariant_under_integer_shift(rng):
    w = rng.normal(size=40)
    assert quantization_objective(w, 0.8, 0.3) == \
        pytest.approx(quantization_objective(w, 0.8, 1.3), abs=1e-15)


def test_sweep_recovers_alternating_quantum(rng):
    w = ALTERNATING_QUANTUM * rng.integers(1, 20, size=200)
    res = quantization_sweep(w, A_range=(0.3, 0.8))
    assert res.A == pytest.approx(4 / 7, rel=0.01)
    assert res.variance < 1e-4


def test_sweep_recovers_half_integer_offset(rng):
    k = rng.integers(0, 8, size=400) + 0.5
    w = NONALTERNATING_QUANTUM * k + rng.normal(0, 0.15, size=400)
    res = quantization_sweep(w, A_range=(1.0, 2.0))
    assert res.A == pytest.approx(4 / 3, rel=0.02)
    assert abs((res.B % 1.0) - 0.5) < 0.05


def test_sweep_ties_go_to_smallest():
    # integers fit exactly at A = 1 and A = 1/2 (1/3 is off the grid)
    res = quantization_sweep(np.arange(1, 30, dtype=float), A_range=(0.3, 1.5))
    assert res.A == 0.5 and res.B == 0.0 and res.variance == 0.0


def test_sweep_rejects_bad_input():
    with pytest.raises(AnalysisError):
        quantization_sweep([1.0, 2.0])
    with pytest.raises(AnalysisError):
        quantization_sweep([1.0, 2.0, 3.0], A_range=(0.0, 1.0))


def test_residual_writhe():
    assert residual_writhe(4 / 7 * 3 + 0.01, ALTERNATING_QUANTUM) == \
        pytest.approx(0.01)
    assert residual_writhe(4 / 3 * 2.5, NONALTERNATING_QUANTUM,
                           offset_half=True) == pytest.approx(0.0, abs=1e-12)
    r = residual_writhe(np.linspace(-5, 5, 101), 0.5)
    assert np.all((-0.25 <= r) & (r < 0.25))


def test_uniform_null_sd_monte_carlo(rng):
    assert uniform_null_sd() == 1 / math.sqrt(12)
    sample = rng.uniform(size=200_000)
    assert sample.std() == pytest.approx(uniform_null_sd(), rel=5e-3)
    # residuals of unquantised writhes about any quantum are uniform
    r = residual_writhe(rng.uniform(0, 50, size=200_000), 0.5) / 0.5
    assert r.std() == pytest.approx(uniform_null_sd(), rel=5e-3)


def test_pearson(rng):
    x = rng.normal(size=50)
    assert pearson(x, 3 * x + 1) == pytest.approx(1.0)
    assert pearson(x, -x) == pytest.approx(-1.0)
    with pytest.raises(AnalysisError):
        pearson(x, np.ones(50))
    with pytest.raises(AnalysisError):
        pearson([1.0], [2.0])


def test_distribution_stats(rng):
    v = rng.normal(10, 2, size=100_000)
    st = distribution_stats(v)
    assert st.mean == pytest.approx(10, abs=0.05)
    assert st.sd_over_mean == pytest.approx(0.2, rel=0.01)
    assert st.skewness == pytest.approx(0.0, abs=0.05)
    assert st.kurtosis == pytest.approx(3.0, abs=0.05)
    with pytest.raises(AnalysisError):
        distribution_stats([1.0, 1.0])


def test_noiseless_power_law():
    C = np.arange(3, 13, dtype=float)
    fit = fit_scaling(C, 12.9 * C ** 0.83)
    assert fit.coefficients["exponent"] == pytest.approx(0.83, abs=1e-12)
    assert fit.coefficients["prefactor"] == pytest.approx(12.9, rel=1e-12)


def test_noiseless_line():
    C = np.arange(3, 13, dtype=float)
    fit = fit_scaling(C, 7.6 * C + 10.7, model="linear")
    assert fit.coefficients["slope"] == pytest.approx(7.6, rel=1e-12)
    assert fit.stderr["slope"] < 1e-12


def test_table_means_fit():
    C = np.arange(3, 13)
    power = fit_scaling(C, TABLE_MEANS)
    assert abs(power.coefficients["exponent"] - 0.83) <= 0.05
    lin = fit_scaling(C, TABLE_MEANS, model="linear")
    assert lin.coefficients["slope"] == pytest.approx(7.6, abs=0.05)
    assert lin.coefficients["intercept"] == pytest.approx(10.7, abs=0.05)
    assert set(lin.as_dict()) == {"slope", "slope_stderr", "intercept",
                                  "intercept_stderr", "rss", "points"}


def test_fit_errors():
    with pytest.raises(AnalysisError):
        fit_scaling([3, 3, 4], [1.0, 2.0, 3.0])
    with pytest.raises(AnalysisError):
        fit_scaling([3, 4, 5], [1.0, -2.0, 3.0])
    with pytest.raises(AnalysisError):
        fit_scaling([3, 4, 5], [1.0, 2.0, 3.0], model="cubic")


def make_records(rng):
    recs = []
    for c in range(3, 9):
        for k in range(6):
            alt = k % 2 == 0
            rl = (12.9 * c ** 0.83) * (1.0 if alt else 0.9) + rng.normal(0, 0.5)
            q = ALTERNATING_QUANTUM if alt else NONALTERNATING_QUANTUM
            wr = q * (k + (0 if alt else 0.5)) + rng.normal(0, 0.01)
            recs.append(InvariantRecord(
                label=f"{c}{'a' if alt else 'n'}_{k}", crossing_number=c,
                alternating=alt, ropelength=rl, writhe=wr, acn=rl / 5,
                extra={"rasmussen_s": 2 * wr}))
    return recs


def test_summaries(rng):
    recs = make_records(rng)
    table = ropelength_table(recs)
    assert {(r["crossings"], r["class"]) for r in table} >= {(5, "A"), (5, "N"),
                                                             (5, "*")}
    alt = fit_records(recs, alternating=True)
    assert alt.coefficients["exponent"] == pytest.approx(0.83, abs=0.05)
    out = summarize(recs)
    assert out["count"] == len(recs)
    assert out["correlations"]["A"]["writhe~rasmussen_s"] == pytest.approx(1.0)
    assert out["correlations"]["A"]["ropelength~hyperbolic_volume"] is None
    assert abs(out["residual_writhe"]["A"]["mean"]) < 0.02
    assert out["sweeps"]["A"].A == pytest.approx(4 / 7, rel=0.01)
