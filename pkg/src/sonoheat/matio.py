"""Plain-text serialization of complex matrices.

One matrix row per line, entries whitespace-separated, each entry written
as ``re+imj`` (parseable by Python's ``complex``), e.g.::

    1.0+0.0j 0.5-0.25j
    0.5+0.25j 0.0+0.0j
"""

from __future__ import annotations

import math
import os
from pathlib import Path

import numpy as np


def format_complex(z: complex) -> str:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite entry {z!r}")
    re = repr(z.real)
    im = repr(z.imag)
    sign = "" if im.startswith("-") else "+"
    return f"{re}{sign}{im}j"


def write_complex_matrix(path: str | Path, matrix: np.ndarray) -> None:
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {matrix.shape}")
    lines = [" ".join(format_complex(z) for z in row) for row in matrix]
    tmp = Path(str(path) + ".tmp")
    tmp.write_text("\n".join(lines) + "\n")
    os.replace(tmp, path)


def read_complex_matrix(path: str | Path) -> np.ndarray:
    rows: list[list[complex]] = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rows.append([complex(tok) for tok in line.split()])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: bad complex entry ({exc})") from exc
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path}: ragged rows")
    return np.array(rows, dtype=np.complex128)
