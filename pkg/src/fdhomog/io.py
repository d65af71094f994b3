"""CSV ingestion and emission of functional samples, and run manifests.

Curve files are plain CSV.  The header row holds the grid points; every
following row is one curve.  An optional first column carries curve labels,
signalled by a non-numeric first header cell (e.g. ``label``)::

    label,0,0.5,1
    a,0.1,0.3,0.2
    b,0.0,0.4,0.1

Lines starting with ``#`` are comments.  Files written by this package put
their :class:`RunManifest` on the first such line as ``# manifest: {json}``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .curves import FunctionalSample, Grid
from .errors import ContractError, DegenerateInputError, ParseError

__all__ = [
    "RunManifest",
    "load_sample_csv",
    "parse_sample_csv",
    "format_sample_csv",
    "write_sample_csv",
    "format_table_csv",
    "file_digest",
    "read_manifest",
    "fmt_float",
]

MANIFEST_PREFIX = "# manifest: "


def fmt_float(x) -> str:
    """Shortest text that round-trips to the same float."""
    return repr(float(x))


@dataclass
class RunManifest:
    """Everything needed to reproduce one command's output.

    ``argv`` is the normalized argument list replayed by ``fdhomog replay``.
    """

    command: str
    argv: list
    config: dict
    seed: int | None = None
    inputs: dict = field(default_factory=dict)
    version: str = __version__
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        return cls(**d)


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def _parse_float(text, row, col):
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"non-numeric cell {text!r} at row {row}, column {col}", row, col) from None
    if not np.isfinite(value):
        raise ParseError(f"non-finite cell {text!r} at row {row}, column {col}", row, col)
    return value


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def parse_sample_csv(text: str, labels: bool | None = None, delimiter: str = ",") -> FunctionalSample:
    """Parse CSV text into a :class:`FunctionalSample`.

    Parameters
    ----------
    text : str
        File contents.
    labels : bool, optional
        Whether the first column holds curve labels.  Detected from the header
        when omitted.
    delimiter : str
        Field separator.

    Raises
    ------
    ParseError
        Empty input, ragged rows, non-numeric cells or an invalid grid.  Row
        and column numbers are 1-based file positions.
    """
    rows = []
    for lineno, rec in enumerate(csv.reader(io.StringIO(text), delimiter=delimiter), start=1):
        if not rec or all(not c.strip() for c in rec):
            continue
        if rec[0].lstrip().startswith("#"):
            continue
        rows.append((lineno, [c.strip() for c in rec]))
    if not rows:
        raise ParseError("empty file: no header row with grid points", 1, None)

    head_line, header = rows[0]
    if labels is None:
        labels = not _is_number(header[0])
    grid_cells = header[1:] if labels else header
    pts = [_parse_float(c, head_line, j + 1 + int(labels)) for j, c in enumerate(grid_cells)]
    try:
        grid = Grid(pts)
    except (ContractError, DegenerateInputError) as exc:
        raise ParseError(f"invalid grid in header row {head_line}: {exc}", head_line, None) from None

    if len(rows) < 2:
        raise ParseError("no curves after the header row", head_line + 1, None)
    width = len(header)
    names, values = [], []
    for lineno, rec in rows[1:]:
        if len(rec) != width:
            raise ParseError(
                f"ragged row {lineno}: {len(rec)} fields, expected {width}", lineno, None
            )
        cells = rec
        if labels:
            names.append(rec[0])
            cells = rec[1:]
        off = 1 + int(labels)
        values.append([_parse_float(c, lineno, j + off) for j, c in enumerate(cells)])
    return FunctionalSample(grid, np.array(values), tuple(names) if labels else None)


def load_sample_csv(path, labels: bool | None = None, delimiter: str = ",") -> FunctionalSample:
    """Read a curve file from disk; see :func:`parse_sample_csv`."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_sample_csv(text, labels=labels, delimiter=delimiter)


def _manifest_line(manifest):
    return "" if manifest is None else MANIFEST_PREFIX + manifest.to_json() + "\n"


def format_sample_csv(sample: FunctionalSample, manifest: RunManifest | None = None) -> str:
    buf = io.StringIO()
    buf.write(_manifest_line(manifest))
    w = csv.writer(buf, lineterminator="\n")
    grid = [fmt_float(t) for t in sample.grid.points]
    if sample.labels is not None:
        w.writerow(["label", *grid])
        for lab, row in zip(sample.labels, sample.values):
            w.writerow([lab, *(fmt_float(v) for v in row)])
    else:
        w.writerow(grid)
        for row in sample.values:
            w.writerow([fmt_float(v) for v in row])
    return buf.getvalue()


def write_sample_csv(sample: FunctionalSample, path, manifest: RunManifest | None = None) -> None:
    Path(path).write_text(format_sample_csv(sample, manifest), encoding="utf-8")


def format_table_csv(columns, rows, manifest: RunManifest | None = None) -> str:
    """Render dict rows in a fixed column order; floats use :func:`fmt_float`."""
    buf = io.StringIO()
    buf.write(_manifest_line(manifest))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        cells = []
        for c in columns:
            v = row[c]
            cells.append(fmt_float(v) if isinstance(v, (float, np.floating)) else v)
        w.writerow(cells)
    return buf.getvalue()


def read_manifest(path) -> RunManifest:
    """Extract the manifest from a JSON result or from a CSV comment line."""
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        data = json.loads(stripped)
        if "manifest" in data:
            data = data["manifest"]
        return RunManifest.from_dict(data)
    for line in text.splitlines():
        if line.startswith(MANIFEST_PREFIX):
            return RunManifest.from_dict(json.loads(line[len(MANIFEST_PREFIX):]))
    raise ParseError(f"no run manifest found in {path}")
