"""CSV and JSON plumbing shared by the CLI and the library.

All files are UTF-8, comma-separated, with a mandatory header row.
"""

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import EmptyInputError, ParseError


def read_csv_columns(path, names, allow_empty=False):
    """Read the named float columns from a headed CSV file.

    Extra columns are ignored. A missing column, an unparseable cell or a
    ragged row raises :class:`ParseError` naming the file and line.
    """
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot open: {exc.strerror}", path) from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInputError(f"{path}: empty file (header row required)") from None
        header = [h.strip() for h in header]
        missing = [n for n in names if n not in header]
        if missing:
            raise ParseError(f"missing column(s) {', '.join(repr(m) for m in missing)}; "
                             f"header is {header}", path, 1)
        idx = [header.index(n) for n in names]
        cols = {n: [] for n in names}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", path, lineno)
            for n, i in zip(names, idx):
                try:
                    v = float(row[i])
                except ValueError:
                    raise ParseError(f"column {n!r}: cannot parse {row[i]!r} as a number",
                                     path, lineno) from None
                if not math.isfinite(v):
                    raise ParseError(f"column {n!r}: non-finite value {row[i]!r}", path, lineno)
                cols[n].append(v)
    out = {n: np.asarray(v, dtype=float) for n, v in cols.items()}
    if not allow_empty and any(v.size == 0 for v in out.values()):
        raise EmptyInputError(f"{path}: no data rows")
    return out


def write_csv_columns(path, columns):
    """Write equal-length columns (dict name -> sequence) with a header row."""
    names = list(columns)
    data = [np.asarray(columns[n]) for n in names]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*data):
            w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def dump_json(obj, path=None):
    text = json.dumps(obj, indent=2, allow_nan=False)
    if path is None:
        return text
    Path(path).write_text(text + "\n", encoding="utf-8")
    return text


def load_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot open: {exc.strerror}", path) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path, exc.lineno) from exc
