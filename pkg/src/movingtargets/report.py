"""Lossless report serialisation and the verdict container used by the CLI."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from . import __version__


def num(x):
    """JSON-safe scalar: Fractions become ``"p/q"`` strings, numpy scalars become Python ones."""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def jsonable(obj):
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(jsonable(v) for v in obj)
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    return num(obj)


@dataclass
class Verdict:
    name: str
    passed: bool | None
    lhs: Any = None
    rhs: Any = None
    relation: str | None = None
    value: Any = None
    detail: Any = None

    def to_json(self) -> dict:
        out = {"name": self.name,
               "status": "value" if self.passed is None else ("pass" if self.passed else "fail")}
        if self.relation is not None:
            out.update(lhs=jsonable(self.lhs), relation=self.relation, rhs=jsonable(self.rhs))
        if self.value is not None:
            out["value"] = jsonable(self.value)
        if self.detail is not None:
            out["detail"] = jsonable(self.detail)
        return out


@dataclass
class Report:
    command: str
    config: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    started: float = field(default_factory=time.perf_counter)

    def add(self, name, passed=None, **kw) -> Verdict:
        v = Verdict(name, passed, **kw)
        self.verdicts.append(v)
        return v

    def compare(self, name, lhs, relation, rhs, detail=None) -> Verdict:
        ops = {"<": lambda a, b: a < b, "<=": lambda a, b: a <= b, "==": lambda a, b: a == b,
               ">=": lambda a, b: a >= b, ">": lambda a, b: a > b}
        return self.add(name, bool(ops[relation](lhs, rhs)), lhs=lhs, rhs=rhs, relation=relation,
                        detail=detail)

    @property
    def passed(self) -> bool:
        return all(v.passed is not False for v in self.verdicts)

    def body(self) -> dict:
        return {"command": self.command, "passed": self.passed,
                "verdicts": [v.to_json() for v in self.verdicts]}

    def to_json(self) -> dict:
        out = self.body()
        out["provenance"] = {"config": jsonable(self.config), "version": __version__,
                             "timing": {"seconds": round(time.perf_counter() - self.started, 3)}}
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False)
