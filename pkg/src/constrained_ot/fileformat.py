"""
JSON problem and report files.

Problem file (version 1)::

    {
      "version": 1,
      "spaces": [{"id": "X", "labels": ["a", "b"], "coordinates": [0, 1]}, ...],
      "marginals": {"X": [0.5, 0.5], ...},
      "cost": {"formula": "abs_diff"}            # or {"values": [...]} row-major
      "constraints": {"type": "none"}             # | "explicit" | "martingale" | "group"
    }

``explicit`` constraints carry ``"generators": [{"name": ..., "values": [...]}]``
and ``group`` constraints carry ``"elements": [[perm_1, ..., perm_n], ...]``.
Named cost formulas (``abs_diff``, ``sq_diff``, ``product``) need two factors
with coordinates.

A file may instead hold a bare linear program, ``{"version": 1, "lp": {"c":
[...], "A": [[...]], "b": [...]}}``, which is solved as is.

Output is canonical: sorted keys, two-space indent, floats printed with 17
significant digits so every value round-trips exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .constraints import ConstraintSet
from .invariant import GroupAction, GroupAxiomError, invariance_generators, validate_group
from .lp import LinearProgram
from .martingale import martingale_generators
from .measures import CostTensor, DiscreteMeasure, DiscreteSpace, ProductGrid
from .solver import ConstrainedProblem

FORMAT_VERSION = 1
FORMULAS = {
    "abs_diff": lambda x, y: np.abs(x - y),
    "sq_diff": lambda x, y: (x - y) ** 2,
    "product": lambda x, y: x * y,
}
CONSTRAINT_TYPES = ("none", "explicit", "martingale", "group")


class ProblemFileError(ValueError):
    """Malformed or inconsistent problem file; ``where`` names the field or line."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


# -- canonical JSON -----------------------------------------------------------

def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number {x!r}")
    if x == 0:
        return "0.0"
    text = "%.17g" % x
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_encode(obj[k], indent, level + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Canonical JSON text (sorted keys, 17-digit floats, trailing newline)."""
    return _encode(obj, indent, 0) + "\n"


# -- problem files ------------------------------------------------------------

def _numbers(value, where, length=None) -> tuple:
    if not isinstance(value, list):
        raise ProblemFileError(where, "expected a list of numbers")
    out = []
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ProblemFileError(f"{where}[{i}]", f"expected a number, got {v!r}")
        if not math.isfinite(v):
            raise ProblemFileError(f"{where}[{i}]", "non-finite number")
        out.append(float(v))
    if length is not None and len(out) != length:
        raise ProblemFileError(where, f"expected {length} entries, got {len(out)}")
    return tuple(out)


@dataclass(frozen=True)
class SpaceSpec:
    id: str
    labels: tuple
    coordinates: tuple | None

    def to_json(self) -> dict:
        d = {"id": self.id, "labels": list(self.labels)}
        if self.coordinates is not None:
            d["coordinates"] = list(self.coordinates)
        return d


@dataclass(frozen=True)
class ProblemFile:
    """Validated contents of a problem file, before building solver objects."""

    version: int
    spaces: tuple = ()
    marginals: tuple = ()  # (space id, weights) in space order
    cost: tuple = ()  # ("formula", name) or ("values", floats)
    constraints: tuple = ("none",)  # ("none",), ("martingale",), ("explicit", ((name, values), ...)), ("group", elements)
    lp: tuple | None = None  # (c, A rows, b) for a bare linear program

    @property
    def is_lp(self) -> bool:
        return self.lp is not None

    @property
    def constraint_type(self) -> str:
        return self.constraints[0]

    @property
    def shape(self) -> tuple:
        return tuple(len(s.labels) for s in self.spaces)

    def to_json(self) -> dict:
        if self.is_lp:
            c, A, b = self.lp
            return {"version": self.version, "lp": {"c": list(c), "A": [list(r) for r in A], "b": list(b)}}
        kind, payload = self.cost
        cons: dict = {"type": self.constraints[0]}
        if self.constraints[0] == "explicit":
            cons["generators"] = [{"name": n, "values": list(v)} for n, v in self.constraints[1]]
        elif self.constraints[0] == "group":
            cons["elements"] = [[list(p) for p in e] for e in self.constraints[1]]
        return {
            "version": self.version,
            "spaces": [s.to_json() for s in self.spaces],
            "marginals": {sid: list(w) for sid, w in self.marginals},
            "cost": {"formula": payload} if kind == "formula" else {"values": list(payload)},
            "constraints": cons,
        }

    def dumps(self) -> str:
        return dumps(self.to_json())


def _parse_space(raw, where) -> SpaceSpec:
    if not isinstance(raw, dict):
        raise ProblemFileError(where, "expected an object")
    sid = raw.get("id")
    if not isinstance(sid, str) or not sid:
        raise ProblemFileError(f"{where}.id", "missing or not a string")
    coords = None
    if "coordinates" in raw and raw["coordinates"] is not None:
        coords = _numbers(raw["coordinates"], f"{where}.coordinates")
    labels = raw.get("labels")
    if labels is None:
        if coords is None:
            raise ProblemFileError(where, "needs labels or coordinates")
        labels = [f"{x:g}" for x in coords]
    if not isinstance(labels, list) or not labels or not all(isinstance(s, str) for s in labels):
        raise ProblemFileError(f"{where}.labels", "expected a non-empty list of strings")
    if len(set(labels)) != len(labels):
        raise ProblemFileError(f"{where}.labels", "duplicate labels")
    if coords is not None and len(coords) != len(labels):
        raise ProblemFileError(f"{where}.coordinates", f"expected {len(labels)} entries, got {len(coords)}")
    return SpaceSpec(sid, tuple(labels), coords)


def _parse_lp(raw) -> tuple:
    if not isinstance(raw, dict):
        raise ProblemFileError("lp", "expected an object")
    c = _numbers(raw.get("c"), "lp.c")
    b = _numbers(raw.get("b"), "lp.b")
    A = raw.get("A")
    if not isinstance(A, list) or len(A) != len(b):
        raise ProblemFileError("lp.A", f"expected {len(b)} rows")
    rows = tuple(_numbers(r, f"lp.A[{i}]", len(c)) for i, r in enumerate(A))
    if not c:
        raise ProblemFileError("lp.c", "needs at least one variable")
    return c, rows, b


def parse_problem(source) -> ProblemFile:
    """Validate a problem given as JSON text or an already-decoded object."""
    if isinstance(source, (str, bytes)):
        try:
            raw = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ProblemFileError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    else:
        raw = source
    if not isinstance(raw, dict):
        raise ProblemFileError("<root>", "expected a JSON object")
    version = raw.get("version")
    if version != FORMAT_VERSION:
        raise ProblemFileError("version", f"unsupported version {version!r} (expected {FORMAT_VERSION})")
    if "lp" in raw:
        return ProblemFile(version, lp=_parse_lp(raw["lp"]))

    spaces_raw = raw.get("spaces")
    if not isinstance(spaces_raw, list) or not spaces_raw:
        raise ProblemFileError("spaces", "expected a non-empty list")
    spaces = tuple(_parse_space(s, f"spaces[{i}]") for i, s in enumerate(spaces_raw))
    ids = [s.id for s in spaces]
    if len(set(ids)) != len(ids):
        raise ProblemFileError("spaces", "duplicate space ids")

    marg_raw = raw.get("marginals")
    if not isinstance(marg_raw, dict):
        raise ProblemFileError("marginals", "expected an object keyed by space id")
    unknown = sorted(set(marg_raw) - set(ids))
    if unknown:
        raise ProblemFileError("marginals", f"unknown space ids {unknown}")
    marginals = []
    for s in spaces:
        if s.id not in marg_raw:
            raise ProblemFileError(f"marginals.{s.id}", "missing")
        w = _numbers(marg_raw[s.id], f"marginals.{s.id}", len(s.labels))
        try:
            DiscreteMeasure(DiscreteSpace(s.id, s.labels), w)
        except ValueError as exc:
            raise ProblemFileError(f"marginals.{s.id}", str(exc)) from None
        marginals.append((s.id, w))

    size = int(np.prod([len(s.labels) for s in spaces]))
    cost_raw = raw.get("cost")
    if not isinstance(cost_raw, dict):
        raise ProblemFileError("cost", "expected an object")
    if "formula" in cost_raw:
        name = cost_raw["formula"]
        if name not in FORMULAS:
            raise ProblemFileError("cost.formula", f"unknown formula {name!r}; choose from {sorted(FORMULAS)}")
        if len(spaces) != 2:
            raise ProblemFileError("cost.formula", "named formulas need exactly two spaces")
        if any(s.coordinates is None for s in spaces):
            raise ProblemFileError("cost.formula", "named formulas need coordinates on every space")
        cost = ("formula", name)
    elif "values" in cost_raw:
        cost = ("values", _numbers(cost_raw["values"], "cost.values", size))
    else:
        raise ProblemFileError("cost", "needs 'formula' or 'values'")

    cons_raw = raw.get("constraints", {"type": "none"})
    if not isinstance(cons_raw, dict) or cons_raw.get("type") not in CONSTRAINT_TYPES:
        raise ProblemFileError("constraints.type", f"expected one of {list(CONSTRAINT_TYPES)}")
    kind = cons_raw["type"]
    if kind == "explicit":
        gens_raw = cons_raw.get("generators")
        if not isinstance(gens_raw, list):
            raise ProblemFileError("constraints.generators", "expected a list")
        gens = []
        for i, g in enumerate(gens_raw):
            where = f"constraints.generators[{i}]"
            if not isinstance(g, dict) or not isinstance(g.get("name"), str):
                raise ProblemFileError(where, "expected an object with a string 'name'")
            gens.append((g["name"], _numbers(g.get("values"), f"{where}.values", size)))
        names = [n for n, _ in gens]
        if len(set(names)) != len(names):
            raise ProblemFileError("constraints.generators", "duplicate generator names")
        constraints = ("explicit", tuple(gens))
    elif kind == "martingale":
        if any(s.coordinates is None for s in spaces):
            raise ProblemFileError("constraints", "martingale constraints need coordinates on every space")
        if len(spaces) < 2:
            raise ProblemFileError("constraints", "martingale constraints need at least two spaces")
        constraints = ("martingale",)
    elif kind == "group":
        elems_raw = cons_raw.get("elements")
        if not isinstance(elems_raw, list) or not elems_raw:
            raise ProblemFileError("constraints.elements", "expected a non-empty list")
        elems = []
        for i, e in enumerate(elems_raw):
            where = f"constraints.elements[{i}]"
            if not isinstance(e, list) or len(e) != len(spaces):
                raise ProblemFileError(where, f"expected {len(spaces)} permutations")
            perms = []
            for k, p in enumerate(e):
                n_k = len(spaces[k].labels)
                if (not isinstance(p, list) or sorted(p) != list(range(n_k))
                        or not all(isinstance(v, int) and not isinstance(v, bool) for v in p)):
                    raise ProblemFileError(f"{where}[{k}]", f"not a permutation of 0..{n_k - 1}")
                perms.append(tuple(p))
            elems.append(tuple(perms))
        report = validate_group(GroupAction(elems))
        if not report.valid:
            raise ProblemFileError("constraints.elements", report.message)
        constraints = ("group", tuple(elems))
    else:
        constraints = ("none",)
    return ProblemFile(version, spaces, tuple(marginals), cost, constraints)


def load_problem(path) -> ProblemFile:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())


# -- building solver objects --------------------------------------------------

@dataclass(frozen=True)
class BuiltProblem:
    source: ProblemFile
    problem: ConstrainedProblem
    group: GroupAction | None = None

    @property
    def constraint_type(self) -> str:
        return self.source.constraint_type


def build_lp(pf: ProblemFile) -> LinearProgram:
    c, A, b = pf.lp
    return LinearProgram(np.array(c), np.array(A).reshape(len(b), len(c)), np.array(b))


def build(pf: ProblemFile, reduce_group: bool = True) -> BuiltProblem:
    """Turn a validated file into solver objects."""
    if pf.is_lp:
        raise ValueError("file holds a bare linear program; use build_lp")
    spaces = [DiscreteSpace(s.id, s.labels, s.coordinates) for s in pf.spaces]
    grid = ProductGrid(spaces)
    marginals = [DiscreteMeasure(sp, w) for sp, (_, w) in zip(spaces, pf.marginals)]
    kind, payload = pf.cost
    if kind == "formula":
        cost = CostTensor.from_function(grid, FORMULAS[payload])
    else:
        cost = CostTensor(grid, np.array(payload))
    group = None
    ctype = pf.constraint_type
    if ctype == "explicit":
        ws = ConstraintSet(grid, [(n, np.array(v)) for n, v in pf.constraints[1]])
    elif ctype == "martingale":
        ws = martingale_generators(grid)
    elif ctype == "group":
        try:
            group = GroupAction(pf.constraints[1])
        except GroupAxiomError as exc:
            raise ProblemFileError("constraints.elements", str(exc)) from None
        ws = invariance_generators(group, grid, reduce=reduce_group)
    else:
        ws = ConstraintSet.empty(grid)
    return BuiltProblem(pf, ConstrainedProblem(marginals, cost, ws), group)

