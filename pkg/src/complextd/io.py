"""CSV helpers.  Numbers are written with 12 significant digits."""

from __future__ import annotations

import csv

import numpy as np


def fmt(x) -> str:
    x = float(x)
    if x == 0.0:
        return "0"  # folds -0.0 so conjugate tables diff cleanly
    return f"{x:.12g}"


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([c if isinstance(c, str) else fmt(c) if isinstance(c, float) else c for c in row])


def read_csv(path):
    """Return ``(header, rows)`` with rows as lists of strings."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    return rows[0], rows[1:]


def read_columns(path, *names):
    header, rows = read_csv(path)
    missing = [n for n in names if n not in header]
    if missing:
        raise ValueError(f"{path}: missing columns {missing}")
    idx = [header.index(n) for n in names]
    return [np.array([float(row[i]) for row in rows]) for i in idx]


def write_complex_table(path, index_names, index_rows, values, omegas=None):
    """Rows of ``index..., real, imaginary``; with ``omegas`` a leading omega column.

    ``values`` has shape ``(len(index_rows),)`` or ``(len(omegas), len(index_rows))``.
    """
    values = np.asarray(values, dtype=complex)
    header = list(index_names) + ["real", "imaginary"]
    rows = []
    if omegas is None:
        for idx, v in zip(index_rows, values.reshape(-1)):
            rows.append(list(idx) + [float(v.real), float(v.imag)])
    else:
        header = ["omega"] + header
        values = values.reshape(len(omegas), len(index_rows))
        for w, row in zip(omegas, values):
            for idx, v in zip(index_rows, row):
                rows.append([float(w)] + list(idx) + [float(v.real), float(v.imag)])
    write_csv(path, header, rows)
