"""Plain-text matrix files.

Format: the first non-comment line holds the dimension ``d``; the next ``d``
lines hold ``d`` whitespace-separated decimals each. Lines starting with ``#``
are ignored. Numbers are written with 17 significant digits so a float64
matrix survives a write/read round trip exactly.
"""

from pathlib import Path

import numpy as np

from .errors import MatrixFormatError
from .symmat import DEFAULT_CONFIG, NumericConfig, as_spd, as_sym


def parse_matrix(text: str, cfg: NumericConfig = DEFAULT_CONFIG, spd: bool = False,
                 source: str = "<string>"):
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise MatrixFormatError(f"{source}: empty matrix file")
    try:
        dim = int(lines[0])
    except ValueError:
        raise MatrixFormatError(f"{source}: first line must be the dimension, got {lines[0]!r}")
    if dim < 1:
        raise MatrixFormatError(f"{source}: dimension must be positive")
    if len(lines) - 1 != dim:
        raise MatrixFormatError(f"{source}: expected {dim} rows, found {len(lines) - 1}")
    rows = []
    for k, ln in enumerate(lines[1:], start=1):
        try:
            row = [float(tok) for tok in ln.split()]
        except ValueError as exc:
            raise MatrixFormatError(f"{source}: row {k}: {exc}")
        if len(row) != dim:
            raise MatrixFormatError(f"{source}: row {k} has {len(row)} entries, expected {dim}")
        rows.append(row)
    X = np.array(rows)
    return as_spd(X, cfg) if spd else as_sym(X, cfg)


def read_matrix(path, cfg: NumericConfig = DEFAULT_CONFIG, spd: bool = False):
    path = Path(path)
    return parse_matrix(path.read_text(), cfg, spd=spd, source=str(path))


def format_matrix(X) -> str:
    X = np.asarray(X, dtype=float)
    out = [str(X.shape[0])]
    out += [" ".join(f"{v:.17g}" for v in row) for row in X]
    return "\n".join(out) + "\n"


def write_matrix(path, X):
    Path(path).write_text(format_matrix(X))
