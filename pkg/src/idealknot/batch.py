"""Manifest-driven tightening of many knots with resumable output.

A manifest is a delimited table with a header. Required columns are
``path`` (relative paths are taken from the manifest's directory) and
``label``; ``crossing_number`` and ``alternating`` are optional and any
further columns are copied to the output rows unchanged.

Each manifest row becomes one output row. Rows are written in manifest
order after every completed knot (atomically, by the parent process only),
so an interrupted batch resumes from the rows already on disk. A row is
reused when its ``(label, config_hash)`` pair matches the current run.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import geometry as geo
from .invariants import component_acns, component_writhes
from .io import (InvariantRecord, KnotFormatError, _canonical, _from_cell,
                 read_knot_file, read_records, write_records)
from .tightener import (PreprocessConfig, TighteningConfig, equilateralize,
                        preprocess, tighten)
from .topology import verify_topology

log = logging.getLogger(__name__)


class ManifestError(ValueError):
    pass


@dataclass
class ManifestEntry:
    path: Path
    label: str
    crossing_number: int | None = None
    alternating: bool | None = None
    extra: dict = field(default_factory=dict)


@dataclass
class BatchConfig:
    tightening: TighteningConfig = field(default_factory=TighteningConfig)
    preprocess: PreprocessConfig | None = None
    resample: int | None = None
    seed: int = 0
    workers: int = 1

    def digest(self) -> str:
        blob = {
            "tightening": asdict(self.tightening),
            "preprocess": None if self.preprocess is None else asdict(self.preprocess),
            "resample": self.resample,
            "seed": self.seed,
        }
        raw = json.dumps(blob, sort_keys=True).encode()
        return hashlib.sha256(raw).hexdigest()[:16]


def read_manifest(path) -> list[ManifestEntry]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest: {exc}") from None
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ManifestError("empty manifest")
    delim = "\t" if lines[0].count("\t") > lines[0].count(",") else ","
    rows = list(csv.reader(lines, delimiter=delim))
    header = [_canonical(h) for h in rows[0]]
    for need in ("path", "label"):
        if need not in header:
            raise ManifestError(f"manifest lacks a {need!r} column")
    entries, seen = [], set()
    for lineno, row in enumerate(rows[1:], 2):
        if len(row) != len(header):
            raise ManifestError(f"line {lineno}: expected {len(header)} fields")
        cells = dict(zip(header, (c.strip() for c in row)))
        label = cells.pop("label")
        if not label:
            raise ManifestError(f"line {lineno}: empty label")
        if label in seen:
            raise ManifestError(f"line {lineno}: duplicate label {label!r}")
        seen.add(label)
        p = Path(cells.pop("path"))
        if not p.is_absolute():
            p = path.parent / p
        try:
            cn = _from_cell("crossing_number", cells.pop("crossing_number", ""))
            alt = _from_cell("alternating", cells.pop("alternating", ""))
            extra = {k: _from_cell(k, v) for k, v in cells.items() if v != ""}
        except ValueError as exc:
            raise ManifestError(f"line {lineno}: {exc}") from None
        entries.append(ManifestEntry(p, label, cn, alt, extra))
    return entries


def process_entry(entry: ManifestEntry, config: BatchConfig) -> InvariantRecord:
    """Tighten and measure one knot; any failure becomes an error row."""
    rec = InvariantRecord(label=entry.label,
                          crossing_number=entry.crossing_number,
                          alternating=entry.alternating,
                          config_hash=config.digest(),
                          extra=dict(entry.extra))
    try:
        start = read_knot_file(entry.path).to_knot()
        knot = start
        if config.resample:
            knot = equilateralize(knot, config.resample)
        if config.preprocess is not None:
            knot = preprocess(knot, config.preprocess)
        out, report = tighten(knot, config.tightening)
        ok, _, after = verify_topology(start, out, seed=config.seed)
        rec.vertex_count = out.n
        rec.ropelength = float(report.final_ropelength)
        rec.writhe = float(sum(component_writhes(out)))
        rec.acn = float(sum(component_acns(out)))
        rec.residual = float(report.final_residual)
        rec.termination = "/".join(report.termination_reason)
        rec.determinant = int(after.determinant) if not isinstance(after, list) \
            else int(after[0].determinant)
        rec.topology_ok = bool(ok)
    except (KnotFormatError, OSError, geo.GeometryError, ValueError,
            RuntimeError, ArithmeticError) as exc:
        rec.status = "error"
        rec.error = f"{type(exc).__name__}: {exc}".replace("\n", " ")
        for name in ("vertex_count", "ropelength", "writhe", "acn", "residual",
                     "termination", "determinant", "topology_ok"):
            setattr(rec, name, None)
    return rec


def _atomic_write(path, records):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".batch-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            write_records(fh, records)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def batch_run(manifest, config: BatchConfig | None = None, output=None,
              ) -> list[InvariantRecord]:
    """Run every manifest row and return records in manifest order.

    If ``output`` is given, rows already present there with the same label
    and config hash are reused without recomputation, and the file is
    rewritten after each newly finished knot.
    """
    config = config or BatchConfig()
    entries = read_manifest(manifest)
    digest = config.digest()
    done: dict[str, InvariantRecord] = {}
    if output is not None and Path(output).exists():
        for r in read_records(output):
            if r.config_hash == digest:
                done[r.label] = r
    rows: list[InvariantRecord | None] = [done.get(e.label) for e in entries]
    todo = [i for i, r in enumerate(rows) if r is None]
    log.info("batch: %d rows, %d cached, %d to run", len(rows),
             len(rows) - len(todo), len(todo))

    def flush():
        if output is not None:
            _atomic_write(output, [r for r in rows if r is not None])

    if config.workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = {pool.submit(process_entry, entries[i], config): i
                       for i in todo}
            for fut in as_completed(futures):
                rows[futures[fut]] = fut.result()
                flush()
    else:
        for i in todo:
            rows[i] = process_entry(entries[i], config)
            flush()
    if not todo:
        flush()
    return rows
