from io import StringIO

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from idealknot.geometry import thickness
from idealknot.io import (FourierKnotSpec, InvariantRecord, KnotFile,
                          KnotFormatError, TREFOIL, make_hopf_chain,
                          parse_coordinates, parse_records, read_knot_file,
                          sample_fourier, write_coordinates, write_knot_file,
                          write_records)
from idealknot.topology import knot_determinant

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
component = st.integers(3, 12).flatmap(
    lambda n: arrays(np.float64, (n, 3), elements=finite))


@given(st.lists(component, min_size=1, max_size=3),
       st.sampled_from(["plain", "vect"]),
       st.one_of(st.none(), st.from_regex(r"[A-Za-z0-9_]{1,8}", fullmatch=True)))
def test_coordinate_round_trip(comps, dialect, label):
    kf = KnotFile(comps, label=label)
    assert parse_coordinates(write_coordinates(kf, dialect)) == kf


cell = st.one_of(st.none(), st.floats(-1e3, 1e3, allow_nan=False).filter(
    lambda x: x != 0.0))


@given(st.lists(st.tuples(
    st.integers(0, 16), st.one_of(st.none(), st.booleans()), cell,
    st.floats(1.0, 500.0), st.one_of(st.none(), st.integers(1, 99))),
    min_size=1, max_size=5))
def test_record_round_trip(rows):
    recs = [InvariantRecord(label=f"k{i}", crossing_number=c, alternating=a,
                            writhe=w, ropelength=rl, determinant=d,
                            extra={"rasmussen_s": 2.0})
            for i, (c, a, w, rl, d) in enumerate(rows)]
    buf = StringIO()
    write_records(buf, recs)
    assert parse_records(buf.getvalue()) == recs


def test_triangle():
    kf = parse_coordinates("0 0 0\n1 0 0\n0 1 0\n")
    assert len(kf.components) == 1
    np.testing.assert_array_equal(kf.components[0],
                                  [[0, 0, 0], [1, 0, 0], [0, 1, 0]])


def test_512_vertex_file_round_trip(tmp_path):
    knot = sample_fourier(TREFOIL, 512)
    p = tmp_path / "t.txt"
    write_knot_file(p, KnotFile.from_knot(knot))
    np.testing.assert_array_equal(read_knot_file(p).components[0], knot.vertices)


def test_vect_fixture():
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(96, 3))
    text = "VECT\n1 96 1\n-96\n1\n" + \
        "\n".join(" ".join(repr(float(x)) for x in p) for p in pts) + "\n0 0 1 1\n"
    kf = parse_coordinates(text)
    assert kf.vertex_count == 96
    np.testing.assert_array_equal(kf.components[0], pts)


@pytest.mark.parametrize("text,line", [
    ("0 0 0\n1 0 0\n1 x 0\n", 3),
    ("VECT\n1 3 1\n-3\n1\n0 0 0\n1 0 0\n1 y 0\n1 1 1 1\n", 7),
    ("# c\n0 0 0\n1 0\n0 1 0\n", 3),
    ("0 0 0\n1 0 0\n0 nan 0\n", 3),
    ("VECT\n1 4 1\n-4\n1\n0 0 0\n1 0 0\n1 1 0\n", 7),
    ("VECT\n1 3 1\n-4\n1\n0 0 0\n", 2),
])
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(KnotFormatError) as err:
        parse_coordinates(text)
    assert err.value.line == line


@pytest.mark.parametrize("text", ["", "# only\n", "0 0 0\n1 1 1\n"])
def test_too_little_data(text):
    with pytest.raises(KnotFormatError):
        parse_coordinates(text)


def test_fourier_square():
    spec = FourierKnotSpec(a=([1.0], [], []), b=([], [1.0], []))
    v = sample_fourier(spec, 4).vertices
    np.testing.assert_allclose(v, [[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]],
                               atol=1e-15)


def test_fourier_text_round_trip():
    again = FourierKnotSpec.from_text(TREFOIL.to_text())
    np.testing.assert_array_equal(sample_fourier(again, 50).vertices,
                                  sample_fourier(TREFOIL, 50).vertices)
    with pytest.raises(ValueError):
        FourierKnotSpec(a=([], [], []), b=([0.0], [], []))
    with pytest.raises(KnotFormatError):
        FourierKnotSpec.from_text("w cos 1\n")


def test_trefoil_determinant():
    assert knot_determinant(sample_fourier(TREFOIL, 96)).determinant == 3


def test_hopf_chain():
    kf = make_hopf_chain(6, 20)
    assert len(kf.components) == 6 and kf.vertex_count == 120
    knot = kf.to_knot()
    assert thickness(knot).thickness == pytest.approx(1.25)
    for k in range(6):
        assert knot_determinant(knot.component(k)).determinant == 1
    for bad in [(1, 20), (3, 20), (6, 6)]:
        with pytest.raises(ValueError):
            make_hopf_chain(*bad)
    with pytest.raises(ValueError):
        make_hopf_chain(6, 20, slack=1.0)


def test_hopf_neighbours_linked():
    from idealknot.invariants import linking_number
    knot = make_hopf_chain(6, 20).to_knot()
    for k in range(6):
        a = knot.component(k).vertices
        b = knot.component((k + 1) % 6).vertices
        c = knot.component((k + 2) % 6).vertices
        assert abs(linking_number(a, b)) == pytest.approx(1.0, abs=1e-9)
        assert linking_number(a, c) == pytest.approx(0.0, abs=1e-9)


def test_records_aliases_and_labels():
    recs = parse_records("Name\tRopelength\tWr\n12a_101\t100.5\t3.1\n"
                         "12n_7\t98.0\t-1.2\n")
    assert [(r.crossing_number, r.alternating) for r in recs] == \
        [(12, True), (12, False)]
    assert recs[0].ropelength == 100.5 and recs[1].writhe == -1.2
    with pytest.raises(KnotFormatError) as err:
        parse_records("label,ropelength\nk,abc\n")
    assert err.value.line == 2
