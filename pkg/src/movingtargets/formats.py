"""Chain and target-sequence files, and the named chain generators."""
from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path

from .chain import MarkovChain, biased_cycle
from .errors import ConfigError, InvalidChain
from .hitting import SetSequence
from .linalg import to_fraction

_GENERATOR = re.compile(r"^\s*([a-z-]+)\s*\((.*)\)\s*$")


def chain_to_json(chain: MarkovChain) -> dict:
    if chain.exact:
        rows = [[f"{v.numerator}/{v.denominator}" for v in row] for row in chain.P]
    else:
        rows = [[float(v) for v in row] for row in chain.P]
    return {"states": chain.n, "mode": "exact" if chain.exact else "float", "rows": rows}


def chain_from_json(doc: dict, mode: str | None = None) -> MarkovChain:
    if not isinstance(doc, dict) or not {"states", "rows"} <= set(doc):
        raise InvalidChain('chain file needs "states" and "rows"')
    extra = set(doc) - {"states", "mode", "rows", "name"}
    if extra:
        raise InvalidChain(f"unknown chain file keys: {sorted(extra)}")
    file_mode = doc.get("mode", "exact")
    if file_mode not in ("exact", "float"):
        raise InvalidChain(f'mode must be "exact" or "float", got {file_mode!r}')
    rows = doc["rows"]
    if len(rows) != doc["states"]:
        raise InvalidChain(f'"states" is {doc["states"]} but {len(rows)} rows were given')
    if file_mode == "exact" and any(not isinstance(v, (str, int)) for r in rows for v in r):
        raise InvalidChain('exact chain entries must be "p/q" strings or integers')
    want = mode or file_mode
    return MarkovChain(rows, exact=(want == "exact"), name=doc.get("name"))


def _generator(name: str, args: list[str], mode: str | None) -> MarkovChain:
    from .gnm import build_gnm
    from .torus import lazy_torus_kernel
    exact = None if mode is None else mode == "exact"
    if name == "lazy-torus" and len(args) == 2:
        chain = lazy_torus_kernel(int(args[0]), int(args[1]))
    elif name == "biased-cycle" and len(args) == 2:
        chain = biased_cycle(int(args[0]), to_fraction(args[1]), exact=exact is not False)
    elif name == "gnm" and len(args) == 3 and args[2] in ("lazy", "plain"):
        g = build_gnm(int(args[0]), int(args[1]))
        return g.walk(lazy=args[2] == "lazy", exact=exact)
    else:
        raise ConfigError(f"unknown chain generator {name}({', '.join(args)})")
    return chain if exact is None else chain.with_mode(exact)


def load_chain(spec: str, mode: str | None = None) -> MarkovChain:
    """A generator expression such as ``lazy-torus(8,1)`` or a JSON chain file path."""
    m = _GENERATOR.match(spec)
    if m and not Path(spec).exists():
        args = [a.strip() for a in m.group(2).split(",") if a.strip()]
        return _generator(m.group(1), args, mode)
    try:
        doc = json.loads(Path(spec).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"chain file not found: {spec}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"chain file {spec} is not valid JSON: {exc}") from exc
    return chain_from_json(doc, mode)


def load_sequence(path: str) -> SetSequence:
    try:
        doc = json.loads(Path(path).read_text())
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read sequence file {path}: {exc}") from exc
    if not isinstance(doc, dict) or "tail" not in doc or set(doc) - {"prefix", "tail"}:
        raise ConfigError('sequence file must be {"prefix": [[...], ...], "tail": [...]}')
    return SetSequence.from_json(doc)


def parse_ints(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    return [int(v) for v in str(text).replace(";", ",").split(",") if v.strip()]


def parse_number(text) -> Fraction:
    try:
        return to_fraction(text)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ConfigError(f"not a number: {text!r}") from exc
