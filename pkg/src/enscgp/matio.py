"""Plain-text matrix files.

Format: an optional block of ``#`` comment lines, a header line
``rows cols``, then exactly ``rows`` lines of ``cols`` whitespace-separated
decimal numbers. ``#`` starts a comment anywhere on a line. Non-finite
tokens are rejected. Numbers are written with 17 significant digits, which
round-trips IEEE doubles exactly, so write -> read -> write is
byte-identical.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import MatrixParseError


def format_float(x: float) -> str:
    """17-significant-digit decimal form; exact for doubles."""
    return f"{float(x):.17g}"


def dumps_matrix(matrix, comments: tuple[str, ...] = ()) -> str:
    m = np.asarray(matrix, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise ValueError(f"expected a matrix or vector, got shape {m.shape}")
    lines = [f"# {c}" for c in comments]
    lines.append(f"{m.shape[0]} {m.shape[1]}")
    for row in m:
        lines.append(" ".join(format_float(v) for v in row))
    return "\n".join(lines) + "\n"


def write_matrix(path, matrix, comments: tuple[str, ...] = ()) -> None:
    Path(path).write_text(dumps_matrix(matrix, comments))


def loads_matrix(text: str, name: str = "<string>") -> np.ndarray:
    header = None
    rows: list[list[float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if header is None:
            if len(tokens) != 2:
                raise MatrixParseError(
                    f"{name}:{lineno}: header must be 'rows cols', got {len(tokens)} tokens"
                )
            try:
                header = (int(tokens[0]), int(tokens[1]))
            except ValueError:
                raise MatrixParseError(
                    f"{name}:{lineno}: header dimensions must be integers"
                ) from None
            if header[0] < 0 or header[1] < 0:
                raise MatrixParseError(f"{name}:{lineno}: dimensions must be nonnegative")
            continue
        if len(rows) >= header[0]:
            raise MatrixParseError(
                f"{name}:{lineno}: extra data beyond the declared {header[0]} rows"
            )
        if len(tokens) != header[1]:
            raise MatrixParseError(
                f"{name}:{lineno}: expected {header[1]} values, got {len(tokens)}"
            )
        values = []
        for col, token in enumerate(tokens, start=1):
            try:
                value = float(token)
            except ValueError:
                raise MatrixParseError(
                    f"{name}:{lineno}: column {col}: invalid number {token!r}"
                ) from None
            if not math.isfinite(value):
                raise MatrixParseError(
                    f"{name}:{lineno}: column {col}: non-finite value {token!r}"
                )
            values.append(value)
        rows.append(values)
    if header is None:
        raise MatrixParseError(f"{name}: empty file, missing 'rows cols' header")
    if len(rows) != header[0]:
        raise MatrixParseError(
            f"{name}: declared {header[0]} rows but found {len(rows)}"
        )
    return np.asarray(rows, dtype=float).reshape(header)


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    return loads_matrix(path.read_text(), name=str(path))


def read_vector(path) -> np.ndarray:
    """Read a matrix file holding a single row or column and flatten it."""
    m = read_matrix(path)
    if m.ndim != 2 or (m.shape[0] != 1 and m.shape[1] != 1):
        raise MatrixParseError(
            f"{path}: expected a single-row or single-column matrix, got {m.shape[0]}x{m.shape[1]}"
        )
    return m.ravel()
