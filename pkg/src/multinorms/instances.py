"""JSON instance files.

Layout::

    {
      "algebra": {"blocks": [k_1, ..., k_B]},
      "module": {"rank": p},
      "tuple": [entry_1, ..., entry_n],
      "decomposition": [E_1, ..., E_m],      # optional
      "cfg": {"restarts": 8, ...}            # optional
    }

An entry is a list of ``p`` algebra elements; an algebra element is a list of ``B``
square matrices; ``E_i`` is a ``p x p`` array of algebra elements.  Complex numbers are
``[re, im]`` pairs (a bare real number is accepted too).  Every parse error names the
offending position, e.g. ``tuple[1][0][0][1][0]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .algebra import AlgebraElement, AlgebraShape
from .decomp import Decomposition
from .module import ModuleSpace, ModuleTuple, ModuleVector, OperatorOnModule
from .optimize import OptimizerConfig

CFG_FIELDS = {"restarts": int, "max_iters": int, "step": float, "fd_step": float, "obj_tol": float, "seed": int}


class InstanceError(ValueError):
    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


@dataclass
class Instance:
    space: ModuleSpace
    tuple: ModuleTuple
    decomposition: Decomposition | None = None
    cfg: dict | None = None

    def config(self, base: OptimizerConfig | None = None) -> OptimizerConfig:
        base = base or OptimizerConfig()
        return base.with_(**self.cfg) if self.cfg else base


def _complex(v: Any, where: str) -> complex:
    if isinstance(v, bool):
        raise InstanceError(where, "expected a number or [re, im] pair, got a boolean")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v):
        return complex(v[0], v[1])
    raise InstanceError(where, f"expected a number or [re, im] pair, got {json.dumps(v)}")


def _list(v: Any, length: int | None, where: str, what: str) -> list:
    if not isinstance(v, list):
        raise InstanceError(where, f"expected {what} (a list), got {type(v).__name__}")
    if length is not None and len(v) != length:
        raise InstanceError(where, f"expected {length} {what}, got {len(v)}")
    return v


def _matrix(v: Any, k: int, where: str) -> np.ndarray:
    rows = _list(v, k, where, "rows")
    out = np.zeros((k, k), complex)
    for r, row in enumerate(rows):
        row = _list(row, k, f"{where}[{r}]", "entries")
        for c, z in enumerate(row):
            out[r, c] = _complex(z, f"{where}[{r}][{c}]")
    return out


def _element(v: Any, shape: AlgebraShape, where: str) -> AlgebraElement:
    blocks = _list(v, shape.num_blocks, where, "blocks")
    return AlgebraElement(shape, [_matrix(b, k, f"{where}[{j}]") for j, (b, k) in enumerate(zip(blocks, shape.blocks))])


def _int(v: Any, where: str, minimum: int = 1) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise InstanceError(where, f"expected an integer >= {minimum}, got {json.dumps(v)}")
    return v


def parse_instance(doc: Any) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceError("", "instance must be a JSON object")
    for key in ("algebra", "module", "tuple"):
        if key not in doc:
            raise InstanceError(key, "missing field")
    unknown = set(doc) - {"algebra", "module", "tuple", "decomposition", "cfg"}
    if unknown:
        raise InstanceError(sorted(unknown)[0], "unknown field")
    alg = doc["algebra"]
    if not isinstance(alg, dict) or "blocks" not in alg:
        raise InstanceError("algebra", "expected an object with a 'blocks' list")
    blocks = _list(alg["blocks"], None, "algebra.blocks", "block sizes")
    if not blocks:
        raise InstanceError("algebra.blocks", "need at least one block")
    shape = AlgebraShape(tuple(_int(k, f"algebra.blocks[{j}]") for j, k in enumerate(blocks)))
    mod = doc["module"]
    if not isinstance(mod, dict) or "rank" not in mod:
        raise InstanceError("module", "expected an object with a 'rank' field")
    space = ModuleSpace(shape, _int(mod["rank"], "module.rank"))

    entries = _list(doc["tuple"], None, "tuple", "entries")
    if not entries:
        raise InstanceError("tuple", "need at least one entry")
    vecs = []
    for i, e in enumerate(entries):
        coords = _list(e, space.rank, f"tuple[{i}]", "coordinates")
        vecs.append(ModuleVector.from_coords(space, [_element(c, shape, f"tuple[{i}][{r}]") for r, c in enumerate(coords)]))
    t = ModuleTuple(vecs, space)

    decomposition = None
    if "decomposition" in doc:
        mats = _list(doc["decomposition"], None, "decomposition", "idempotents")
        ops = []
        for m, mat in enumerate(mats):
            rows = _list(mat, space.rank, f"decomposition[{m}]", "rows")
            entries2 = []
            for r, row in enumerate(rows):
                row = _list(row, space.rank, f"decomposition[{m}][{r}]", "entries")
                entries2.append([_element(a, shape, f"decomposition[{m}][{r}][{c}]") for c, a in enumerate(row)])
            ops.append(OperatorOnModule.from_entries(space, entries2))
        try:
            decomposition = Decomposition(space, ops)
        except ValueError as exc:
            raise InstanceError("decomposition", str(exc)) from None

    cfg = None
    if "cfg" in doc:
        raw = doc["cfg"]
        if not isinstance(raw, dict):
            raise InstanceError("cfg", "expected an object")
        cfg = {}
        for key, value in raw.items():
            if key not in CFG_FIELDS:
                raise InstanceError(f"cfg.{key}", "unknown option")
            kind = CFG_FIELDS[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)) or (kind is int and not isinstance(value, int)):
                raise InstanceError(f"cfg.{key}", f"expected {kind.__name__}, got {json.dumps(value)}")
            cfg[key] = kind(value)
        try:
            OptimizerConfig(**cfg)
        except ValueError as exc:
            raise InstanceError("cfg", str(exc)) from None
    return Instance(space, t, decomposition, cfg)


def load_instance(path: str | Path) -> Instance:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InstanceError(str(path), f"cannot read file ({exc.strerror})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"line {exc.lineno} column {exc.colno}", f"invalid JSON: {exc.msg}") from None
    return parse_instance(doc)


def _encode_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def encode_element(a: AlgebraElement) -> list:
    return [_encode_matrix(b) for b in a.data]


def dump_instance(t: ModuleTuple, decomposition: Decomposition | None = None, cfg: dict | None = None) -> dict:
    space = t.space
    doc = {
        "algebra": {"blocks": list(space.shape.blocks)},
        "module": {"rank": space.rank},
        "tuple": [[encode_element(c) for c in x.coords] for x in t],
    }
    if decomposition is not None:
        doc["decomposition"] = [
            [[encode_element(E.entry(i, l)) for l in range(space.rank)] for i in range(space.rank)]
            for E in decomposition.idempotents
        ]
    if cfg:
        doc["cfg"] = dict(cfg)
    return doc
