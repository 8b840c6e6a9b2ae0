"""Reading module and fiber description files."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import records
from .degeneration import SemistableFiber, validate_fiber
from .errors import ParseError
from .exact import Field
from .phimod import PhiNModule, mk_phin


def read_json(path) -> tuple:
    """(data, raw bytes).  Syntax errors become ParseError at a byte offset."""
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError("file is not UTF-8", f"{path}@byte {exc.start}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise ParseError(exc.msg, f"{path}@byte {offset}") from None
    return data, raw


def digest(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def parse_module(data: dict, prime: int | None = None, where: str = "module") -> PhiNModule:
    """``{dim, phi, n?, prime?}``; an explicit ``prime`` argument overrides the record."""
    p = prime
    if p is None and "prime" in data:
        p = records.require(data, "prime", where, int)
    if p is None:
        raise ParseError("no prime given (record field 'prime', --prime or LIMITCOH_PRIME)", where)
    try:
        F = Field(p)
    except ValueError as exc:
        raise ParseError(str(exc), f"{where}.prime") from None
    dim = records.require(data, "dim", where, int)
    if dim < 0:
        raise ParseError("negative dimension", f"{where}.dim")
    Phi = records.matrix(F, records.require(data, "phi", where), f"{where}.phi", (dim, dim))
    N = records.matrix(F, data["n"], f"{where}.n", (dim, dim)) if "n" in data else None
    return mk_phin(dim, Phi, N, F)


def parse_input(path, prime: int | None = None, default_prime: int | None = None):
    """A fiber if the record has ``strata``, otherwise a (phi,N)-module.

    ``prime`` overrides the file; ``default_prime`` only fills in a module
    record that names none.
    """
    data, raw = read_json(path)
    if not isinstance(data, dict):
        raise ParseError("top level must be an object", str(path))
    if "strata" in data:
        if prime is not None:
            data = dict(data, prime=prime)
        return validate_fiber(data, Path(path).stem), raw
    if prime is None and "prime" not in data:
        prime = default_prime
    return parse_module(data, prime, Path(path).stem), raw


def fiber_to_json(raw: dict) -> str:
    return json.dumps(raw, indent=2, sort_keys=True)


__all__ = ["read_json", "digest", "parse_module", "parse_input", "fiber_to_json", "SemistableFiber"]
