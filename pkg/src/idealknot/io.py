"""Coordinate files, Fourier knots, the Hopf necklace and record tables.

Two coordinate dialects are read and written:

plain
    One ``x y z`` triple per line, a blank line between components. Lines
    starting with ``#`` carry metadata (``# label: 3_1``).
VECT
    The Geomview polyline format read by common tightening codes::

        VECT
        ncomp nvertices ncolors
        -n1 -n2 ...          # vertex count per polyline, negative = closed
        c1 c2 ...            # colour count per polyline
        x y z                # nvertices lines
        r g b a              # ncolors lines

All numbers are written with 17 significant digits so that parsing a
written file reproduces the coordinates bit for bit.
"""
from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import GeometryError, PolygonalKnot, thickness


class KnotFormatError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class KnotFile:
    components: list[np.ndarray]
    label: str | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.components = [np.asarray(c, dtype=float) for c in self.components]
        if not self.components:
            raise KnotFormatError("no components")
        for c in self.components:
            if c.ndim != 2 or c.shape[1] != 3:
                raise KnotFormatError("components must be (n, 3) arrays")
            if len(c) < 3:
                raise KnotFormatError("a component needs at least 3 vertices")

    @property
    def vertex_count(self) -> int:
        return sum(len(c) for c in self.components)

    def to_knot(self) -> PolygonalKnot:
        return PolygonalKnot.from_components(self.components, label=self.label)

    @classmethod
    def from_knot(cls, knot: PolygonalKnot) -> "KnotFile":
        return cls([np.array(c) for c in knot.components()], label=knot.label)

    def __eq__(self, other):
        return (isinstance(other, KnotFile) and self.label == other.label
                and len(self.components) == len(other.components)
                and all(np.array_equal(a, b) for a, b in
                        zip(self.components, other.components)))


# ---------------------------------------------------------------------------
# coordinate formats


def _floats(line, lineno, count=None):
    try:
        vals = [float(x) for x in line.split()]
    except ValueError:
        raise KnotFormatError(f"cannot parse numbers from {line.strip()!r}",
                              lineno) from None
    if count is not None and len(vals) != count:
        raise KnotFormatError(f"expected {count} numbers, got {len(vals)}",
                              lineno)
    if not all(math.isfinite(v) for v in vals):
        raise KnotFormatError("non-finite coordinate", lineno)
    return vals


def parse_coordinates(text: str) -> KnotFile:
    """Parse a plain or VECT coordinate file (detected from the first
    non-blank, non-comment line)."""
    for line in text.splitlines():
        s = line.strip()
        if s and not s.startswith("#"):
            break
    else:
        raise KnotFormatError("empty file")
    if s.upper().startswith("VECT"):
        return _parse_vect(text)
    return _parse_plain(text)


def _parse_plain(text):
    comps, cur = [], []
    meta = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith("#"):
            m = re.match(r"#\s*([\w ]+?)\s*:\s*(.*)$", s)
            if m:
                meta[m.group(1).strip().lower()] = m.group(2).strip()
            continue
        if not s:
            if cur:
                comps.append(cur)
                cur = []
            continue
        cur.append(_floats(s, lineno, 3))
    if cur:
        comps.append(cur)
    if not comps:
        raise KnotFormatError("no coordinates")
    for k, c in enumerate(comps):
        if len(c) < 3:
            raise KnotFormatError(f"component {k} has fewer than 3 vertices")
    label = meta.pop("label", None)
    return KnotFile([np.array(c) for c in comps], label=label, metadata=meta)


def _parse_vect(text):
    meta = {}
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.split("#", 1)
        if len(s) == 2:
            m = re.match(r"\s*([\w ]+?)\s*:\s*(.*)$", s[1])
            if m:
                meta[m.group(1).strip().lower()] = m.group(2).strip()
        s = s[0].strip()
        if s:
            rows.append((lineno, s))
    if not rows[0][1].upper().startswith("VECT"):
        raise KnotFormatError("missing VECT header", rows[0][0])
    # tokens after the keyword, keeping line numbers for errors
    tokens = []
    first = rows[0][1][4:].split()
    tokens.extend((rows[0][0], t) for t in first)
    for lineno, s in rows[1:]:
        tokens.extend((lineno, t) for t in s.split())
    pos = 0

    def take(k, kind=float):
        nonlocal pos
        if pos + k > len(tokens):
            raise KnotFormatError("unexpected end of file",
                                  tokens[-1][0] if tokens else None)
        chunk = tokens[pos:pos + k]
        pos += k
        vals = []
        for lineno, t in chunk:
            try:
                vals.append(kind(t))
            except ValueError:
                raise KnotFormatError(f"bad value {t!r}", lineno) from None
        if kind is float and not all(math.isfinite(v) for v in vals):
            raise KnotFormatError("non-finite coordinate", chunk[0][0])
        return vals

    ncomp, nvert, ncolor = take(3, int)
    counts = take(ncomp, int)
    colors = take(ncomp, int)
    if sum(abs(c) for c in counts) != nvert:
        raise KnotFormatError("vertex counts do not add up", rows[1][0])
    if sum(colors) != ncolor:
        raise KnotFormatError("colour counts do not add up", rows[1][0])
    comps = []
    for c in counts:
        if abs(c) < 3:
            raise KnotFormatError("a component needs at least 3 vertices")
        pts = np.array(take(3 * abs(c))).reshape(-1, 3)
        comps.append(pts)
    take(4 * ncolor)
    if pos != len(tokens):
        raise KnotFormatError("trailing data after colours", tokens[pos][0])
    label = meta.pop("label", None)
    return KnotFile(comps, label=label, metadata=meta)


def write_coordinates(kf: KnotFile | PolygonalKnot, fmt_name: str = "plain") -> str:
    if isinstance(kf, PolygonalKnot):
        kf = KnotFile.from_knot(kf)
    lines = []
    if fmt_name == "vect":
        lines.append("VECT")
        if kf.label is not None:
            lines.append(f"# label: {kf.label}")
        lines.append(f"{len(kf.components)} {kf.vertex_count} "
                     f"{len(kf.components)}")
        lines.append(" ".join(str(-len(c)) for c in kf.components))
        lines.append(" ".join("1" for _ in kf.components))
        for c in kf.components:
            lines.extend(" ".join(fmt(x) for x in p) for p in c)
        lines.extend("1 1 1 1" for _ in kf.components)
    elif fmt_name == "plain":
        if kf.label is not None:
            lines.append(f"# label: {kf.label}")
        lines.append(f"# vertices: {kf.vertex_count}")
        for k, c in enumerate(kf.components):
            if k:
                lines.append("")
            lines.extend(" ".join(fmt(x) for x in p) for p in c)
    else:
        raise ValueError(f"unknown coordinate format {fmt_name!r}")
    return "\n".join(lines) + "\n"


def read_knot_file(path) -> KnotFile:
    kf = parse_coordinates(Path(path).read_text())
    if kf.label is None:
        kf.label = Path(path).stem
    return kf


def write_knot_file(path, kf, fmt_name=None):
    if fmt_name is None:
        fmt_name = "vect" if str(path).lower().endswith(".vect") else "plain"
    Path(path).write_text(write_coordinates(kf, fmt_name))


# ---------------------------------------------------------------------------
# generators


@dataclass
class FourierKnotSpec:
    """Per-axis cosine (``a``) and sine (``b``) coefficients, harmonics 1..m.

    ``x(t) = sum_j a_x[j-1] cos(2 pi j t) + b_x[j-1] sin(2 pi j t)`` and so
    on, for ``t`` in ``[0, 1)``.
    """

    a: tuple[list[float], list[float], list[float]]
    b: tuple[list[float], list[float], list[float]]
    label: str | None = None

    def __post_init__(self):
        if not any(any(c != 0 for c in axis) for axis in (*self.a, *self.b)):
            raise ValueError("Fourier spec has no nonzero coefficient")

    @classmethod
    def from_text(cls, text: str) -> "FourierKnotSpec":
        """Read lines ``<axis> <cos|sin> c1 c2 ...`` (``#`` comments,
        optional ``label <name>``)."""
        a = {"x": [], "y": [], "z": []}
        b = {"x": [], "y": [], "z": []}
        label = None
        for lineno, line in enumerate(text.splitlines(), 1):
            s = line.split("#", 1)[0].strip()
            if not s:
                continue
            parts = s.split()
            if parts[0].lower() == "label":
                label = " ".join(parts[1:])
                continue
            if len(parts) < 2 or parts[0] not in a or parts[1] not in ("cos", "sin"):
                raise KnotFormatError("expected '<x|y|z> <cos|sin> coeffs...'",
                                      lineno)
            vals = _floats(" ".join(parts[2:]), lineno)
            (a if parts[1] == "cos" else b)[parts[0]] = vals
        return cls(tuple(a[k] for k in "xyz"), tuple(b[k] for k in "xyz"),
                   label=label)

    def to_text(self) -> str:
        lines = [] if self.label is None else [f"label {self.label}"]
        for ax, ca, cb in zip("xyz", self.a, self.b):
            lines.append(f"{ax} cos " + " ".join(fmt(c) for c in ca))
            lines.append(f"{ax} sin " + " ".join(fmt(c) for c in cb))
        return "\n".join(lines) + "\n"


def sample_fourier(spec: FourierKnotSpec, n: int) -> PolygonalKnot:
    """Sample a Fourier knot at ``t_i = i / n``."""
    if n < 3:
        raise ValueError("need at least 3 samples")
    t = np.arange(n) / n
    cols = []
    for ca, cb in zip(spec.a, spec.b):
        x = np.zeros(n)
        for j, c in enumerate(ca, 1):
            x += c * np.cos(2 * np.pi * j * t)
        for j, c in enumerate(cb, 1):
            x += c * np.sin(2 * np.pi * j * t)
        cols.append(x)
    return PolygonalKnot(np.stack(cols, axis=1), label=spec.label)


#: x = sin t + 2 sin 2t, y = cos t - 2 cos 2t, z = -sin 3t
TREFOIL = FourierKnotSpec(a=([], [1.0, -2.0], []),
                          b=([1.0, 2.0], [], [0.0, 0.0, -1.0]), label="3_1")
#: x + iy = e^{it} + 1.5 e^{-3it}, z = cos(2t + pi/4). Symmetric under a
#: quarter turn combined with z -> -z, like the tight figure-eight.
FIGURE_EIGHT = FourierKnotSpec(a=([1.0, 0.0, 1.5], [], [0.0, math.sqrt(0.5)]),
                               b=([], [1.0, 0.0, -1.5], [0.0, -math.sqrt(0.5)]),
                               label="4_1")
#: x = (2 + cos 2t) cos 3t, y = (2 + cos 2t) sin 3t, z = sin 4t. Tightening
#: from this curve tends to jam near ropelength 55.
FIGURE_EIGHT_TORUS = FourierKnotSpec(a=([0.5, 0.0, 2.0, 0.0, 0.5], [], []),
                                     b=([], [0.5, 0.0, 2.0, 0.0, 0.5],
                                        [0.0, 0.0, 0.0, 1.0]), label="4_1")
STANDARD_KNOTS = {"3_1": TREFOIL, "trefoil": TREFOIL,
                  "4_1": FIGURE_EIGHT, "figure-eight": FIGURE_EIGHT}


def make_hopf_chain(links: int = 6, vertices_per_link: int = 20,
                    slack: float = 1.25) -> KnotFile:
    """Closed necklace of ``links`` round loops, each linked with its two
    neighbours.

    Loop centres sit on a horizontal circle; loop planes contain the local
    tangent of that circle and are tilted alternately by +-45 degrees so
    that neighbours are perpendicular. The result is scaled to thickness
    ``slack`` (> 1).
    """
    if links < 2 or links % 2:
        raise ValueError("alternating tilts close up only for an even "
                         "number of links (at least 2)")
    if vertices_per_link < 8:
        raise ValueError("need at least 8 vertices per link")
    if slack <= 1.0:
        raise ValueError("slack must exceed 1")
    spacing = 1.2
    R = spacing / (2.0 * np.sin(np.pi / links))
    z = np.array([0.0, 0.0, 1.0])
    a = 2.0 * np.pi * (np.arange(vertices_per_link) + 0.5) / vertices_per_link
    comps = []
    for k in range(links):
        ph = 2.0 * np.pi * k / links
        rho = np.array([np.cos(ph), np.sin(ph), 0.0])
        tan = np.array([-np.sin(ph), np.cos(ph), 0.0])
        tilt = (rho + (1.0 if k % 2 == 0 else -1.0) * z) / np.sqrt(2.0)
        comps.append(R * rho + np.cos(a)[:, None] * tan
                     + np.sin(a)[:, None] * tilt)
    knot = PolygonalKnot.from_components(comps)
    th = thickness(knot).thickness
    if not th > 0.0:
        raise GeometryError("generated loops intersect")
    s = slack / th
    return KnotFile([c * s for c in comps],
                    label=f"hopf-chain-{links}x{vertices_per_link}")


# ---------------------------------------------------------------------------
# record tables

RECORD_COLUMNS = ["label", "crossing_number", "alternating", "vertex_count",
                  "ropelength", "writhe", "acn", "residual", "termination",
                  "determinant", "topology_ok", "status", "error",
                  "config_hash"]
EXTERNAL_COLUMNS = ["hyperbolic_volume", "alexander_at_minus1",
                    "rasmussen_s", "tau"]
NUMERIC = {"ropelength", "writhe", "acn", "residual", *EXTERNAL_COLUMNS}
INTEGER = {"crossing_number", "vertex_count", "determinant"}
BOOLEAN = {"alternating", "topology_ok"}


@dataclass
class InvariantRecord:
    label: str
    crossing_number: int | None = None
    alternating: bool | None = None
    vertex_count: int | None = None
    ropelength: float | None = None
    writhe: float | None = None
    acn: float | None = None
    residual: float | None = None
    termination: str | None = None
    determinant: int | None = None
    topology_ok: bool | None = None
    status: str = "ok"
    error: str | None = None
    config_hash: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.crossing_number is not None and self.crossing_number < 0:
            raise ValueError("crossing number must be non-negative")
        if self.ropelength is not None and not self.ropelength > 0:
            raise ValueError("ropelength must be positive")

    def get(self, column):
        if hasattr(self, column) and column != "extra":
            return getattr(self, column)
        return self.extra.get(column)


def _to_cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError("record tables hold finite numbers only")
        return fmt(value)
    return str(value)


def _from_cell(column, text):
    if text is None or text == "":
        return None
    if column in BOOLEAN:
        low = text.strip().lower()
        if low in ("1", "true", "yes", "y", "a", "alt", "alternating"):
            return True
        if low in ("0", "false", "no", "n", "na", "nonalternating"):
            return False
        raise ValueError(f"bad flag {text!r} in column {column}")
    if column in INTEGER:
        return int(float(text))
    if column in NUMERIC:
        v = float(text)
        if not math.isfinite(v):
            raise ValueError(f"non-finite value in column {column}")
        return v
    return text


def write_records(path_or_file, records, delimiter=","):
    extra_cols = []
    for r in records:
        for k in r.extra:
            if k not in extra_cols:
                extra_cols.append(k)
    ordered_extra = [c for c in EXTERNAL_COLUMNS if c in extra_cols] + \
        [c for c in extra_cols if c not in EXTERNAL_COLUMNS]
    header = RECORD_COLUMNS + ordered_extra

    def emit(fh):
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(header)
        for r in records:
            w.writerow([_to_cell(r.get(c)) for c in header])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)


def _sniff_delimiter(text):
    head = text.splitlines()[0] if text else ""
    return "\t" if head.count("\t") > head.count(",") else ","


def parse_records(text: str) -> list[InvariantRecord]:
    """Read a record table. Unknown columns land in ``extra``; common
    aliases (``Ropelength``, ``Wr``, ``crossings``...) are accepted."""
    rows = list(csv.reader(text.splitlines(), delimiter=_sniff_delimiter(text)))
    if not rows:
        return []
    header = [_canonical(h) for h in rows[0]]
    known = set(RECORD_COLUMNS)
    out = []
    for lineno, row in enumerate(rows[1:], 2):
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise KnotFormatError(f"expected {len(header)} fields, got {len(row)}",
                                  lineno)
        fields, extra = {}, {}
        for col, cell in zip(header, row):
            cell = cell.strip()
            try:
                value = _from_cell(col, cell)
            except ValueError as exc:
                raise KnotFormatError(str(exc), lineno) from None
            if col in known:
                fields[col] = value
            elif value is not None:
                extra[col] = value
        if "label" not in fields or fields["label"] is None:
            raise KnotFormatError("row without label", lineno)
        if fields.get("status") is None:
            fields["status"] = "ok"
        _infer_from_label(fields)
        out.append(InvariantRecord(**fields, extra=extra))
    return out


_ALIASES = {
    "name": "label", "knot": "label", "knot_name": "label",
    "crossings": "crossing_number", "c": "crossing_number",
    "crossing number": "crossing_number",
    "rl": "ropelength", "l": "ropelength",
    "wr": "writhe", "space_writhe": "writhe", "space writhe": "writhe",
    "average_crossing_number": "acn", "average crossing number": "acn",
    "vertices": "vertex_count", "n": "vertex_count",
    "volume": "hyperbolic_volume", "hyperbolic volume": "hyperbolic_volume",
    "determinant_alexander": "alexander_at_minus1",
    "s": "rasmussen_s", "rasmussen": "rasmussen_s",
}


def _canonical(name):
    key = name.strip().lower()
    return _ALIASES.get(key, key.replace(" ", "_"))


def _infer_from_label(fields):
    """Fill crossing number / alternation from labels like ``12a_1``."""
    m = re.match(r"^(\d+)\s*([an])?_?\d+", str(fields["label"]).strip(), re.I)
    if not m:
        return
    if fields.get("crossing_number") is None:
        fields["crossing_number"] = int(m.group(1))
    if fields.get("alternating") is None and m.group(2):
        fields["alternating"] = m.group(2).lower() == "a"


def read_records(path) -> list[InvariantRecord]:
    return parse_records(Path(path).read_text())


# ---------------------------------------------------------------------------
# plot-ready outputs


def write_columns(path, columns: dict[str, np.ndarray]):
    """Whitespace-separated columns with a ``#`` header line."""
    names = list(columns)
    data = np.column_stack([np.asarray(columns[k], dtype=float) for k in names])
    with open(path, "w") as fh:
        fh.write("# " + " ".join(names) + "\n")
        for row in data:
            fh.write(" ".join(fmt(x) for x in row) + "\n")


def histogram_columns(values, bins=20, range_=None, density=True):
    counts, edges = np.histogram(values, bins=bins, range=range_, density=density)
    return {"left": edges[:-1], "right": edges[1:], "value": counts}
