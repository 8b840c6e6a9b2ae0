"""Conversion of plain JSON-shaped records into field elements and matrices.

Scalars are written either as a rational (int, or a string "num/den") or as
a pair ``{"a": ..., "b": ...}`` meaning a + b*sqrt(p).  Errors carry the
field path of the offending value.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ParseError
from .exact import Field, Matrix


def rational(x, where: str) -> Fraction:
    if isinstance(x, bool):
        raise ParseError(f"expected a rational, got {x!r}", where)
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad rational {x!r}", where) from None
    if isinstance(x, Fraction):
        return x
    # floats are refused on purpose: input must be bit-exact
    raise ParseError(f"expected an int or a 'num/den' string, got {type(x).__name__}", where)


def scalar(F: Field, x, where: str):
    if isinstance(x, dict):
        extra = set(x) - {"a", "b"}
        if extra:
            raise ParseError(f"unexpected keys {sorted(extra)}", where)
        return F(rational(x.get("a", 0), f"{where}.a"), rational(x.get("b", 0), f"{where}.b"))
    return F(rational(x, where))


def matrix(F: Field, grid, where: str, shape: tuple | None = None) -> Matrix:
    if not isinstance(grid, list) or any(not isinstance(r, list) for r in grid):
        raise ParseError("expected a list of rows", where)
    rows = [[scalar(F, x, f"{where}[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(grid)]
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise ParseError("rows have different lengths", where)
    M = Matrix(F, rows, ncols=shape[1] if shape and not rows else None)
    if shape is not None and M.shape != tuple(shape):
        raise ParseError(f"shape {M.shape}, expected {tuple(shape)}", where)
    return M


def require(record: dict, key: str, where: str, kind=None):
    if not isinstance(record, dict):
        raise ParseError("expected an object", where)
    if key not in record:
        raise ParseError(f"missing field '{key}'", where)
    value = record[key]
    if kind is not None and (not isinstance(value, kind) or isinstance(value, bool) and kind is int):
        raise ParseError(f"field '{key}' has the wrong type", f"{where}.{key}")
    return value


def encode_scalar(x) -> object:
    """Inverse of :func:`scalar` for report output."""
    a = str(x.a) if x.a.denominator != 1 else int(x.a)
    if not x.b:
        return a
    b = str(x.b) if x.b.denominator != 1 else int(x.b)
    return {"a": a, "b": b}


def encode_matrix(M: Matrix) -> list:
    return [[encode_scalar(x) for x in row] for row in M.rows()]
