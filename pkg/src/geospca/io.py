"""Matrix ingestion, synthetic instances and report serialisation."""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ParseError, ShapeError
from .linalg import DataMatrix

FORMATS = ("csv", "matrixmarket")


def _atomic_write(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    _atomic_write(path, text.encode("utf-8"))


def guess_format(path) -> str:
    suffix = Path(path).suffix.lower()
    return "matrixmarket" if suffix in (".mtx", ".mm") else "csv"


def read_csv_matrix(path, header: bool = False) -> np.ndarray:
    """Rows are observations; every row must have the same number of fields."""
    rows = []
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for row in reader:
            lineno = reader.line_num
            if header and lineno == 1:
                continue
            if not row or all(not f.strip() for f in row):
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ShapeError(f"expected {width} fields, found {len(row)}", line=lineno)
            try:
                rows.append([float(f) for f in row])
            except ValueError:
                col = next(i for i, f in enumerate(row, 1) if not _is_float(f))
                raise ParseError(f"not a number: {row[col - 1]!r}", line=lineno, column=col) from None
    if not rows:
        raise ParseError("no data rows found")
    return np.array(rows, dtype=float)


def _is_float(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_matrix_market(path) -> np.ndarray:
    """Dense array of an ``array`` or ``coordinate`` MatrixMarket file."""
    from scipy.io import mmread

    try:
        M = mmread(str(path))
    except (ValueError, IndexError, OSError) as exc:
        raise ParseError(f"invalid MatrixMarket file: {exc}") from None
    if hasattr(M, "toarray"):
        M = M.toarray()
    return np.asarray(M, dtype=float)


def load_matrix(path, fmt: Optional[str] = None, center: bool = True, header: bool = False) -> DataMatrix:
    fmt = fmt or guess_format(path)
    if fmt == "csv":
        raw = read_csv_matrix(path, header=header)
    elif fmt == "matrixmarket":
        raw = read_matrix_market(path)
    else:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    return DataMatrix.from_array(raw, center=center)


def format_csv_matrix(values) -> str:
    lines = (",".join(f"{x:.17g}" for x in row) for row in np.asarray(values))
    return "\n".join(lines) + "\n"


def write_csv_matrix(path, values) -> None:
    atomic_write_text(path, format_csv_matrix(values))


def synth_array(seed: int, n: int, p: int, rank: int, noise: float) -> np.ndarray:
    """``L R^T + noise * G`` with standard normal factors drawn from ``seed``."""
    if not 0 <= rank <= min(n, p):
        raise ValueError(f"rank must be in [0, {min(n, p)}]")
    if noise < 0:
        raise ValueError("noise must be nonnegative")
    rng = np.random.default_rng(seed)
    L = rng.standard_normal((n, rank))
    R = rng.standard_normal((p, rank))
    G = rng.standard_normal((n, p))
    return L @ R.T + noise * G


def synth(seed: int, n: int, p: int, rank: int, noise: float, path=None, center: bool = True) -> DataMatrix:
    """Seeded low-rank-plus-noise instance; the raw values go to ``path`` as CSV if given."""
    raw = synth_array(seed, n, p, rank, noise)
    if path is not None:
        write_csv_matrix(path, raw)
    return DataMatrix.from_array(raw, center=center)


def _clean(x):
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def dumps_report(doc: dict) -> str:
    """JSON with insertion-ordered keys; infinities become null."""
    return json.dumps(_clean(doc), indent=2, allow_nan=False) + "\n"


def write_json(path, doc: dict) -> None:
    atomic_write_text(path, dumps_report(doc))


TRACE_COLUMNS = ("t", "eta", "psi", "f", "cuts")


def format_trace_csv(trace) -> str:
    lines = [",".join(TRACE_COLUMNS)]
    for r in trace:
        lines.append(f"{r.t},{r.eta:.17g},{r.psi:.17g},{r.f:.17g},{r.cuts}")
    return "\n".join(lines) + "\n"


def write_trace_csv(path, trace) -> None:
    atomic_write_text(path, format_trace_csv(trace))
