"""JSON encodings for coset sets and Hecke elements, plus atomic file output."""

from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path

from .errors import DomainError
from .field import frac_str, make_field, parse_frac
from .hecke import DoubleCosetKey, HeckeElement, RightCosetSet, canonical_form
from .matrices import mat_from_json, row_lattice_key


def key_to_json(key: DoubleCosetKey) -> list[int]:
    return list(key.divisors)


def key_from_json(n: int, obj) -> DoubleCosetKey:
    if isinstance(obj, str):
        obj = [int(x) for x in obj.split(",") if x.strip()]
    return DoubleCosetKey.from_divisors(n, obj)


def cosets_to_json(cs: RightCosetSet) -> dict:
    return {
        "m": cs.K.m,
        "n": cs.key.n,
        "key": key_to_json(cs.key),
        "q": cs.key.q,
        "reps": [R.to_json(cs.key.q) for R in cs.reps],
    }


def cosets_from_json(obj, verify: bool = True) -> RightCosetSet:
    try:
        K = make_field(int(obj["m"]))
        n = int(obj["n"])
        key = key_from_json(n, obj["key"])
        reps = [mat_from_json(K, r) for r in obj["reps"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed coset JSON: {exc}") from exc
    if verify:
        for R in reps:
            if canonical_form(R) != key:
                raise DomainError("a representative does not lie in the declared double coset")
    row_keys = [row_lattice_key(R, key.q, check=not verify) for R in reps]
    if len(set(row_keys)) != len(row_keys):
        raise DomainError("duplicate right cosets in coset JSON")
    return RightCosetSet(K, key, reps, row_keys, len(reps))


def element_to_json(e: HeckeElement) -> dict:
    return {
        "m": e.K.m,
        "n": e.n,
        "terms": [{"key": key_to_json(k), "c": frac_str(c)} for k, c in e.sorted_terms()],
    }


def element_from_json(obj) -> HeckeElement:
    """Accepts either a Hecke element or a coset file (read as its double coset)."""
    try:
        K = make_field(int(obj["m"]))
        n = int(obj["n"])
        if "terms" in obj:
            terms = {}
            for t in obj["terms"]:
                k = key_from_json(n, t["key"])
                terms[k] = terms.get(k, Fraction(0)) + parse_frac(t["c"])
            return HeckeElement(K, n, terms)
        return HeckeElement.from_key(K, key_from_json(n, obj["key"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed Hecke element JSON: {exc}") from exc


def dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise DomainError(f"{path}: {exc.strerror}") from exc


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the target directory and rename it into place."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
