"""JSON matrix files: ``{"rows": m, "cols": n, "data": [[re, im], ...]}`` in row-major order.

Numbers are written with ``repr`` precision, so a write/read cycle is bit-exact
for every finite double.
"""
from __future__ import annotations

import json
import math
from numbers import Real

import numpy as np


class MatrixFileError(ValueError):
    """Malformed matrix document; ``field`` names the offending entry."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


def _reject_constant(name):
    raise MatrixFileError("data", f"non-finite number {name} is not allowed")


def _number(x, where):
    if isinstance(x, bool) or not isinstance(x, Real):
        raise MatrixFileError(where, f"expected a number, got {x!r}")
    x = float(x)
    if not math.isfinite(x):
        raise MatrixFileError(where, "non-finite number")
    return x


def _count(doc, key):
    if key not in doc:
        raise MatrixFileError(key, "missing")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise MatrixFileError(key, f"expected a nonnegative integer, got {v!r}")
    return v


def matrix_from_dict(doc) -> np.ndarray:
    if not isinstance(doc, dict):
        raise MatrixFileError("<root>", "expected an object with rows, cols and data")
    rows = _count(doc, "rows")
    cols = _count(doc, "cols")
    if "data" not in doc:
        raise MatrixFileError("data", "missing")
    data = doc["data"]
    if not isinstance(data, list):
        raise MatrixFileError("data", "expected a list of [re, im] pairs")
    if len(data) != rows * cols:
        raise MatrixFileError("data", f"expected {rows * cols} entries, got {len(data)}")
    out = np.empty(rows * cols, dtype=np.complex128)
    for k, pair in enumerate(data):
        where = f"data[{k}]"
        if not isinstance(pair, list) or len(pair) != 2:
            raise MatrixFileError(where, f"expected [re, im], got {pair!r}")
        out[k] = complex(_number(pair[0], where), _number(pair[1], where))
    return out.reshape(rows, cols)


def matrix_to_dict(T) -> dict:
    T = np.asarray(T, dtype=np.complex128)
    if T.ndim == 1:
        T = T.reshape(-1, 1)
    rows, cols = T.shape
    return {
        "rows": rows,
        "cols": cols,
        "data": [[float(z.real), float(z.imag)] for z in T.reshape(-1)],
    }


def loads(text: str) -> np.ndarray:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise MatrixFileError("<root>", f"invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    return matrix_from_dict(doc)


def dumps(T) -> str:
    return json.dumps(matrix_to_dict(T))


def read_matrix(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def write_matrix(path, T):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(T))
        fh.write("\n")
