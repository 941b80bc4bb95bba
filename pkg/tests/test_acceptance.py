"""Acceptance criteria 1-10, one test each, at their stated tolerances.

Each test records a PASS/FAIL line that is printed in the terminal summary.
The benchmark tightenings (criteria 3-5) take a few minutes together.
"""
import math
import os
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idealknot.analysis import (ALTERNATING_QUANTUM, NONALTERNATING_QUANTUM,
                                fit_scaling, quantization_sweep,
                                ropelength_table, summarize, uniform_null_sd)
from idealknot.batch import BatchConfig, batch_run
from idealknot.geometry import (PolygonalKnot, regular_polygon, ropelength,
                                thickness)
from idealknot.invariants import (mirror, quadrature_pair_writhe,
                                  segment_pair_writhe, space_writhe)
from idealknot.io import (FIGURE_EIGHT, TREFOIL, KnotFile, make_hopf_chain,
                          parse_coordinates, read_records, sample_fourier,
                          write_coordinates, write_knot_file)
from idealknot.tightener import TighteningConfig, tighten
from idealknot.topology import (NonGenericProjection, determinant,
                                generic_directions, project_to_diagram)

TABLE_MEANS = [32.74, 42.09, 48.32, 57.16, 63.37, 71.64, 79.30, 85.98, 93.38,
               102.95]


def test_criterion_01_geometry_identities(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for n in range(3, 65):
        knot = regular_polygon(n, radius=1.7)
        tb = thickness(knot)
        R = 1.7
        assert tb.min_rad == pytest.approx(R * math.cos(math.pi / n), rel=1e-12)
        closed = 2 * n * R * math.sin(math.pi / n) / tb.thickness
        expect = 2 * n * math.tan(math.pi / n)
        worst = max(worst, abs(ropelength(knot) / closed - 1),
                    abs(ropelength(knot) / expect - 1))
    big = abs(ropelength(regular_polygon(256)) - 2 * math.pi)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and big <= 1e-3 and elapsed < 1.0
    criterion(1, ok, f"max rel err {worst:.1e}, 256-gon off 2pi by {big:.2e}, "
                     f"{elapsed:.2f} s")
    assert ok


def test_criterion_02_writhe(criterion, rng):
    t0 = time.perf_counter()
    planar = [regular_polygon(40)]
    for k in range(5):
        t = np.linspace(0, 2 * np.pi, 60, endpoint=False)
        r = 1 + 0.4 * np.cos((k + 2) * t) * rng.uniform(0.5, 1)
        planar.append(PolygonalKnot(np.stack([r * np.cos(t), r * np.sin(t),
                                              np.zeros_like(t)], 1)))
    planar_max = max(abs(space_writhe(k)) for k in planar)
    p = rng.uniform(-1, 1, size=(4, 1000, 3))
    p[2:] += rng.uniform(-1, 1, size=(1, 1000, 3))
    exact = segment_pair_writhe(*p)
    quad = np.array([quadrature_pair_writhe(*p[:, k]) for k in range(1000)])
    pair_err = float(np.max(np.abs(exact - quad)))
    tre = sample_fourier(TREFOIL, 96)
    mirror_err = abs(space_writhe(tre) + space_writhe(mirror(tre)))
    elapsed = time.perf_counter() - t0
    ok = (planar_max <= 1e-10 and pair_err <= 1e-8 and mirror_err <= 1e-12
          and elapsed < 10)
    criterion(2, ok, f"planar {planar_max:.1e}, pair vs quadrature "
                     f"{pair_err:.1e}, mirror {mirror_err:.1e}, {elapsed:.1f} s")
    assert ok


def test_criterion_03_trefoil(criterion):
    out, rep = tighten(sample_fourier(TREFOIL, 96), TighteningConfig())
    wr = space_writhe(out)
    ok = (rep.final_ropelength <= 33.8 and abs(abs(wr) - 3.4171) <= 0.05
          and rep.elapsed <= 600)
    criterion(3, ok, f"ropelength {rep.final_ropelength:.4f} (<= 33.8), "
                     f"|Wr| {abs(wr):.4f} (3.4171 +- 0.05), {rep.elapsed:.0f} s")
    assert ok


def test_criterion_04_figure_eight(criterion):
    out, rep = tighten(sample_fourier(FIGURE_EIGHT, 80), TighteningConfig())
    wr = space_writhe(out)
    ok = rep.final_ropelength <= 43.5 and abs(wr) <= 0.1 and rep.elapsed <= 600
    criterion(4, ok, f"ropelength {rep.final_ropelength:.4f} (<= 43.5), "
                     f"|Wr| {abs(wr):.4f} (<= 0.1), {rep.elapsed:.0f} s")
    assert ok


def test_criterion_05_hopf_chain(criterion):
    t0 = time.perf_counter()
    result = {}
    for per_link in (20, 12):
        chain = make_hopf_chain(6, per_link).to_knot()
        _, rep = tighten(chain, TighteningConfig())
        result[per_link] = rep.final_ropelength
    elapsed = time.perf_counter() - t0
    ok = (result[20] <= 101.7 and result[12] <= 103.3
          and result[20] < result[12] and elapsed <= 900)
    criterion(5, ok, f"20 vtx/link {result[20]:.3f} (<= 101.7), 12 vtx/link "
                     f"{result[12]:.3f} (<= 103.3), {elapsed:.0f} s")
    assert ok


def test_criterion_06_determinants(criterion):
    t0 = time.perf_counter()
    cases = {"unknot": (regular_polygon(30), 1),
             "trefoil": (sample_fourier(TREFOIL, 96), 3),
             "figure-eight": (sample_fourier(FIGURE_EIGHT, 96), 5)}
    found = {}
    for name, (knot, _) in cases.items():
        dets = []
        for d in generic_directions(seed=11, count=20):
            try:
                dets.append(determinant(project_to_diagram(knot, d)).determinant)
            except NonGenericProjection:
                dets.append(None)
        found[name] = dets
    elapsed = time.perf_counter() - t0
    ok = all(found[name] == [det] * 20 for name, (_, det) in cases.items()) \
        and elapsed < 60
    criterion(6, ok, ", ".join(f"{k} {sorted(set(v), key=str)}"
                               for k, v in found.items()) + f", {elapsed:.1f} s")
    assert ok


def test_criterion_07_quantization(criterion, rng):
    t0 = time.perf_counter()
    w = ALTERNATING_QUANTUM * rng.integers(1, 20, size=300)
    alt = quantization_sweep(w)
    k = rng.integers(0, 8, size=400) + 0.5
    w = NONALTERNATING_QUANTUM * k + rng.normal(0, 0.15, size=400)
    non = quantization_sweep(w, A_range=(1.0, 2.0))
    elapsed = time.perf_counter() - t0
    ok = (abs(alt.A / (4 / 7) - 1) <= 0.01 and alt.variance < 1e-4
          and abs(non.A / (4 / 3) - 1) <= 0.02
          and abs((non.B % 1.0) - 0.5) <= 0.05 and elapsed < 60)
    criterion(7, ok, f"alt A {alt.A:.4f} var {alt.variance:.1e}; non-alt A "
                     f"{non.A:.4f} B {non.B % 1:.3f}; {elapsed:.1f} s")
    assert ok


def test_criterion_08_statistics(criterion):
    C = np.arange(3, 13, dtype=float)
    clean = fit_scaling(C, 12.9 * C ** 0.83)
    clean_err = abs(clean.coefficients["exponent"] - 0.83)
    table = fit_scaling(C, TABLE_MEANS)
    expo = table.coefficients["exponent"]
    ok = (clean_err <= 1e-12 and abs(expo - 0.83) <= 0.05
          and uniform_null_sd() == 1 / math.sqrt(12))
    criterion(8, ok, f"noiseless exponent err {clean_err:.1e}, reference-mean "
                     f"exponent {expo:.3f} +- {table.stderr['exponent']:.3f}, "
                     f"uniform sd {uniform_null_sd():.6f}")
    assert ok


DATASET = os.environ.get("IDEALKNOT_REFERENCE_TABLE")


@pytest.mark.skipif(not DATASET, reason="set IDEALKNOT_REFERENCE_TABLE to the "
                                        "reference record table")
def test_criterion_09_reference_table(criterion):
    records = [r for r in read_records(DATASET) if r.ropelength is not None]
    rows = {(g["crossings"], g["class"]): g for g in ropelength_table(records)}
    means_ok = (abs(rows[(12, "A")]["mean"] - 106.99) <= 0.01
                and abs(rows[(12, "N")]["mean"] - 97.08) <= 0.01)
    expected = {"A": (0.0139, 0.2559, 3.7451), "N": (0.0372, -0.5964, 3.6611)}
    moments_ok = all(
        abs(rows[(12, cls)][key] - val) <= 1e-3
        for cls, vals in expected.items()
        for key, val in zip(("sd_over_mean", "skewness", "kurtosis"), vals))
    twelve = [r for r in records if r.crossing_number == 12]
    sweep = summarize(twelve)["sweeps"]["N"]
    sweep_ok = round(sweep.A, 4) == 1.3434 and round(sweep.B % 1, 4) == 0.5253
    ok = means_ok and moments_ok and sweep_ok
    criterion(9, ok, f"12A {rows[(12, 'A')]['mean']:.3f}, 12N "
                     f"{rows[(12, 'N')]['mean']:.3f}, sweep A {sweep.A:.4f} "
                     f"B {sweep.B % 1:.4f}")
    assert ok


@pytest.fixture(autouse=True, scope="module")
def _criterion_9_skip_line(request):
    yield
    if not DATASET:
        request.config._acceptance[9] = (
            "SKIP", "reference table not supplied (IDEALKNOT_REFERENCE_TABLE)")


def test_criterion_10_property_suites(criterion, tmp_path_factory):
    counts = {"tightener": 0, "parser": 0, "batch": 0}
    cfg = TighteningConfig(phase1_max_steps=3, phase1_residual_target=1e-9,
                           phase2_max_steps=3)

    @settings(max_examples=100)
    @given(st.integers(0, 2**32 - 1))
    def tightener(seed):
        counts["tightener"] += 1
        r = np.random.default_rng(seed)
        knot = PolygonalKnot(regular_polygon(16).vertices
                             + 0.05 * r.normal(size=(16, 3)))
        seen = []
        a, ra = tighten(knot, cfg, callback=lambda s, k, rl: seen.append(
            (thickness(k).thickness, rl)))
        b, _ = tighten(knot, cfg)
        rls = [ra.initial_ropelength] + [rl for _, rl in seen]
        assert all(t >= 1 - 1e-9 for t, _ in seen)
        assert all(y <= x + 1e-9 for x, y in zip(rls, rls[1:]))
        assert np.array_equal(a.vertices, b.vertices)

    @settings(max_examples=100)
    @given(st.lists(st.integers(3, 9).flatmap(lambda n: st.lists(
        st.tuples(*[st.floats(-1e6, 1e6, allow_nan=False)] * 3),
        min_size=n, max_size=n)), min_size=1, max_size=3),
        st.sampled_from(["plain", "vect"]))
    def parser(comps, dialect):
        counts["parser"] += 1
        kf = KnotFile([np.array(c) for c in comps], label="x")
        assert parse_coordinates(write_coordinates(kf, dialect)) == kf

    quick = TighteningConfig(phase1_max_steps=0, phase2_max_steps=0)

    @settings(max_examples=100)
    @given(st.lists(st.integers(10, 20), min_size=1, max_size=3),
           st.booleans())
    def batch(sizes, corrupt):
        counts["batch"] += 1
        root = tmp_path_factory.mktemp("acc")
        lines = ["path,label"]
        for k, n in enumerate(sizes):
            write_knot_file(root / f"{k}.txt",
                            KnotFile.from_knot(sample_fourier(TREFOIL, n)))
            lines.append(f"{k}.txt,k{k}")
        if corrupt:
            (root / "bad.txt").write_text("1 2 3\n")
            lines.append("bad.txt,bad")
        (root / "m.csv").write_text("\n".join(lines) + "\n")
        out = root / "out.csv"
        first = batch_run(root / "m.csv", BatchConfig(quick), output=out)
        text = out.read_text()
        again = batch_run(root / "m.csv", BatchConfig(quick), output=out)
        assert again == first and out.read_text() == text

    failures = []
    for name, fn in (("tightener", tightener), ("parser", parser),
                     ("batch", batch)):
        try:
            fn()
        except Exception as exc:  # noqa: BLE001 - reported below
            failures.append(f"{name}: {type(exc).__name__}")
    ok = not failures and min(counts.values()) >= 100
    criterion(10, ok, ", ".join(f"{k} {v} cases" for k, v in counts.items())
              + (f"; failed {failures}" if failures else ""))
    assert ok
