"""Deterministic CSV output shared by the exporters."""

import numpy as np


def fmt(x) -> str:
    # 12 significant digits; repr-stable across runs and platforms
    x = float(x)
    if np.isnan(x):
        return "nan"
    out = format(x, ".12g")
    return "0" if out == "-0" else out


def write_csv(path, header, columns):
    """Write equal-length numeric ``columns`` under ``header`` with ``\\n`` endings."""
    columns = [np.asarray(c, dtype=float) for c in columns]
    if len(header) != len(columns):
        raise ValueError("header and column count differ")
    n = len(columns[0]) if columns else 0
    if any(len(c) != n for c in columns):
        raise ValueError("CSV columns have unequal lengths")
    lines = [",".join(header)]
    lines.extend(",".join(fmt(c[i]) for c in columns) for i in range(n))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path):
    """Read a file written by :func:`write_csv` into ``(header, 2-D float array)``."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))
