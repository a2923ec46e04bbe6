"""Plain-text matrices: a ``rows cols`` header line, then whitespace-separated row-major values."""

from __future__ import annotations

from pathlib import Path

import numpy as np

__all__ = ["format_matrix", "load_matrix", "parse_matrix", "save_matrix"]


def parse_matrix(text: str, source: str = "<string>", dtype=float) -> np.ndarray:
    lines = [ln.split("#", 1)[0] for ln in text.splitlines()]
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise ValueError(f"{source}: empty file, expected a 'rows cols' header")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError(f"{source}: header must be 'rows cols', got {lines[0].strip()!r}")
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError:
        raise ValueError(f"{source}: header must be two integers, got {lines[0].strip()!r}") from None
    tokens = " ".join(lines[1:]).split()
    try:
        values = [dtype(t) for t in tokens]
    except ValueError as exc:
        raise ValueError(f"{source}: {exc}") from None
    if rows < 1 or cols < 1 or len(values) != rows * cols:
        raise ValueError(f"{source}: header says {rows}x{cols} but found {len(values)} values")
    return np.array(values, dtype=dtype).reshape(rows, cols)


def load_matrix(path, dtype=float) -> np.ndarray:
    path = Path(path)
    return parse_matrix(path.read_text(), str(path), dtype)


def format_matrix(matrix) -> str:
    m = np.atleast_2d(np.asarray(matrix))
    fmt = repr if m.dtype.kind == "f" else str
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    lines += [" ".join(fmt(v.item()) for v in row) for row in m]
    return "\n".join(lines) + "\n"


def save_matrix(path, matrix) -> None:
    Path(path).write_text(format_matrix(matrix))
