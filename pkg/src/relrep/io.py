"""Readers and writers for .vec (word2vec text) and CSV embedding files."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import EmbeddingSpace, RelRepError


class FormatError(RelRepError):
    def __init__(self, path, line, message):
        self.path, self.line = str(path), line
        super().__init__(f"{path}:{line}: {message}")


def fmt_float(x) -> str:
    """Shortest decimal that round-trips to the same double."""
    return repr(float(x))


def atomic_write(path, data: str | bytes):
    """Write to a sibling temp file then rename, so failures leave no partial output."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": "\n",
                                                            "encoding": "utf-8"})) as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def parse_vec(path, name: str | None = None) -> EmbeddingSpace:
    """Parse a word2vec text file: header ``N d`` then ``token v1 ... vd`` per line."""
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        lines = f.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatError(path, 1, "empty file, expected header 'N d'")
    head = lines[0].split()
    try:
        n, d = (int(v) for v in head)
    except ValueError:
        raise FormatError(path, 1, f"bad header {lines[0]!r}, expected 'N d'") from None
    if n < 1 or d < 1:
        raise FormatError(path, 1, f"header declares {n} rows of width {d}")
    ids, M, seen = [], np.empty((n, d)), {}
    for r in range(n):
        lineno = r + 2
        if r + 1 >= len(lines):
            raise FormatError(path, lineno, f"header declares {n} rows, file has {r}")
        parts = lines[r + 1].split()
        if len(parts) != d + 1:
            raise FormatError(path, lineno, f"expected token and {d} values, got {len(parts)} fields")
        tok = parts[0]
        if tok in seen:
            raise FormatError(path, lineno, f"duplicate token {tok!r} (first on line {seen[tok]})")
        seen[tok] = lineno
        try:
            M[r] = [float(v) for v in parts[1:]]
        except ValueError as e:
            raise FormatError(path, lineno, f"non-numeric field: {e}") from None
        ids.append(tok)
    if len(lines) > n + 1:
        raise FormatError(path, n + 2, f"header declares {n} rows, file has more")
    return EmbeddingSpace(name or path.stem, ids, M)


def format_vec(ids, matrix) -> str:
    M = np.asarray(matrix, dtype=np.float64)
    buf = io.StringIO()
    buf.write(f"{M.shape[0]} {M.shape[1]}\n")
    for tok, row in zip(ids, M.tolist()):
        buf.write(tok + " " + " ".join(map(fmt_float, row)) + "\n")
    return buf.getvalue()


def format_csv(ids, matrix, columns=None) -> str:
    M = np.asarray(matrix, dtype=np.float64)
    columns = list(columns) if columns is not None else [f"d{j}" for j in range(M.shape[1])]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", *columns])
    for tok, row in zip(ids, M.tolist()):
        w.writerow([tok, *map(fmt_float, row)])
    return buf.getvalue()


def parse_csv(path, name: str | None = None) -> EmbeddingSpace:
    """CSV with a header row; first column is the id, the rest are values."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if len(rows) < 2:
        raise FormatError(path, 1, "CSV needs a header and at least one row")
    width = len(rows[0]) - 1
    ids, M, seen = [], [], set()
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != width + 1:
            raise FormatError(path, r, f"expected {width + 1} fields, got {len(row)}")
        if row[0] in seen:
            raise FormatError(path, r, f"duplicate id {row[0]!r}")
        seen.add(row[0])
        try:
            M.append([float(v) for v in row[1:]])
        except ValueError as e:
            raise FormatError(path, r, f"non-numeric field: {e}") from None
        ids.append(row[0])
    return EmbeddingSpace(name or path.stem, ids, np.array(M))


def detect_format(path, fmt: str | None = None) -> str:
    if fmt:
        return fmt
    return "csv" if str(path).lower().endswith(".csv") else "vec"


def read_space(path, fmt: str | None = None) -> EmbeddingSpace:
    fmt = detect_format(path, fmt)
    if fmt == "csv":
        return parse_csv(path)
    if fmt == "vec":
        return parse_vec(path)
    raise RelRepError(f"unknown format {fmt!r}")


def write_space(path, ids, matrix, fmt: str | None = None, columns=None):
    fmt = detect_format(path, fmt)
    text = format_csv(ids, matrix, columns) if fmt == "csv" else format_vec(ids, matrix)
    atomic_write(path, text)


def read_id_list(path) -> list[str]:
    ids = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines()]
    ids = [s for s in ids if s]
    if not ids:
        raise FormatError(path, 1, "empty anchor list")
    return ids


def write_id_list(path, ids):
    atomic_write(path, "".join(f"{s}\n" for s in ids))


def read_frequencies(path) -> dict:
    """Two-column CSV ``id,count``; a non-numeric first row is treated as a header."""
    freqs = {}
    with open(path, newline="", encoding="utf-8") as f:
        for r, row in enumerate(csv.reader(f), start=1):
            if not row:
                continue
            if len(row) != 2:
                raise FormatError(path, r, f"expected 2 fields, got {len(row)}")
            try:
                freqs[row[0]] = float(row[1])
            except ValueError:
                if r == 1:
                    continue
                raise FormatError(path, r, f"non-numeric count {row[1]!r}") from None
    return freqs


def write_json(path, obj):
    atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
