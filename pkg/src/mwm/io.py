"""CSV tables with a '#'-prefixed metadata header.

Dialect: comma separated, LF line endings, every number written with 15
significant digits, metadata lines ``# key: value`` before a single header
row. Output depends only on the values given, so identical inputs give
byte-identical files.
"""
import math

import numpy as np

from .errors import DomainError
from .pulses import DiffractionOrder
from .signals import SignalCurve

X_NAMES = {"t": "t_ps", "t1": "t1_ps"}


def fmt(v):
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    s = f"{v:.15g}"
    return "0" if s == "-0" else s


def write_table(path, columns, meta=None):
    """Write ``columns`` (an ordered mapping name -> 1-D array) to ``path``."""
    names = list(columns)
    cols = [np.asarray(columns[n], dtype=float).reshape(-1) for n in names]
    if len({c.size for c in cols}) > 1:
        raise DomainError("all columns must have equal length")
    lines = []
    for k, v in (meta or {}).items():
        text = str(v).replace("\n", " ")
        lines.append(f"# {k}: {text}")
    lines.append(",".join(names))
    for row in zip(*cols):
        lines.append(",".join(fmt(v) for v in row))
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_table(path):
    """Return (meta dict of strings, dict of float columns)."""
    meta = {}
    header = None
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                meta[key.strip()] = val.strip()
            elif header is None:
                header = [h.strip() for h in line.split(",")]
            else:
                parts = line.split(",")
                if len(parts) != len(header):
                    raise DomainError(f"{path}:{lineno}: expected {len(header)} fields")
                try:
                    rows.append([float(p) for p in parts])
                except ValueError as e:
                    raise DomainError(f"{path}:{lineno}: {e}") from None
    if header is None:
        raise DomainError(f"{path}: no header row")
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return meta, {h: data[:, i] for i, h in enumerate(header)}


def intensity_column(order):
    return f"I[{order.label()}]"


def order_from_column(name):
    if not (name.startswith("I[") and name.endswith("]")):
        raise DomainError(f"column {name!r} is not an intensity column")
    return DiffractionOrder.parse(name[2:-1])


def write_curves(path, curves, meta=None):
    """Write curves sharing one abscissa as columns of a single table."""
    if not curves:
        raise DomainError("no curves to write")
    x = curves[0].x
    kind = curves[0].kind
    for c in curves[1:]:
        if c.kind != kind or not np.array_equal(c.x, x):
            raise DomainError("curves written together must share kind and abscissa")
    cols = {X_NAMES[kind]: x}
    for c in curves:
        cols[intensity_column(c.order)] = c.intensity
    m = dict(curves[0].meta)
    m.update(meta or {})
    write_table(path, cols, m)


def read_curves(path):
    """Read a table written by :func:`write_curves` back into curves."""
    meta, cols = read_table(path)
    names = list(cols)
    kinds = {v: k for k, v in X_NAMES.items()}
    if names[0] not in kinds:
        raise DomainError(f"{path}: first column must be one of {sorted(kinds)}")
    kind = kinds[names[0]]
    x = cols[names[0]]
    return [SignalCurve(order_from_column(n), x, cols[n], kind, dict(meta))
            for n in names[1:] if n.startswith("I[")]
