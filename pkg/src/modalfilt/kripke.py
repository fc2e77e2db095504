"""Finite Kripke models over dense integer states.

State sets are Python ints used as bitsets (bit ``x`` set iff state ``x`` is
in the set); a relation stores one successor bitset per state.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import FormatError, PreconditionError, UnknownModality
from .syntax import (
    Atom, Bot, Comp, Converse, Diamond, Formula, Imp, Program, TransClos, Union, Var,
)


def bits(mask: int) -> Iterator[int]:
    """Indices of the set bits of ``mask``, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_of(states: Iterable[int]) -> int:
    m = 0
    for s in states:
        m |= 1 << s
    return m


# ---------------------------------------------------------------- relations


@dataclass(frozen=True, slots=True)
class Relation:
    n: int
    rows: tuple[int, ...]

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> Relation:
        rows = [0] * n
        for x, y in pairs:
            if not (0 <= x < n and 0 <= y < n):
                raise ValueError(f"pair {(x, y)} outside {n} states")
            rows[x] |= 1 << y
        return cls(n, tuple(rows))

    @classmethod
    def empty(cls, n: int) -> Relation:
        return cls(n, (0,) * n)

    @classmethod
    def identity(cls, n: int) -> Relation:
        return cls(n, tuple(1 << x for x in range(n)))

    @classmethod
    def full(cls, n: int) -> Relation:
        return cls(n, ((1 << n) - 1,) * n)

    def pairs(self) -> list[tuple[int, int]]:
        return [(x, y) for x in range(self.n) for y in bits(self.rows[x])]

    def __contains__(self, pair: tuple[int, int]) -> bool:
        x, y = pair
        return bool(self.rows[x] >> y & 1)

    def __len__(self) -> int:
        return sum(popcount(r) for r in self.rows)

    def __or__(self, other: Relation) -> Relation:
        return Relation(self.n, tuple(a | b for a, b in zip(self.rows, other.rows)))

    def __and__(self, other: Relation) -> Relation:
        return Relation(self.n, tuple(a & b for a, b in zip(self.rows, other.rows)))

    def issubset(self, other: Relation) -> bool:
        return all(a & ~b == 0 for a, b in zip(self.rows, other.rows))

    def compose(self, other: Relation) -> Relation:
        """``self`` followed by ``other``."""
        out = []
        for r in self.rows:
            acc = 0
            for y in bits(r):
                acc |= other.rows[y]
            out.append(acc)
        return Relation(self.n, tuple(out))

    def converse(self) -> Relation:
        out = [0] * self.n
        for x, r in enumerate(self.rows):
            for y in bits(r):
                out[y] |= 1 << x
        return Relation(self.n, tuple(out))

    def closure(self) -> Relation:
        """Transitive closure by Warshall's algorithm over bitset rows."""
        rows = list(self.rows)
        for k in range(self.n):
            bk, rk = 1 << k, rows[k]
            for i in range(self.n):
                if rows[i] & bk:
                    rows[i] |= rk
        return Relation(self.n, tuple(rows))

    def power(self, m: int) -> Relation:
        out = Relation.identity(self.n)
        for _ in range(m):
            out = out.compose(self)
        return out

    def preimage(self, target: int) -> int:
        """States with at least one successor in ``target``."""
        out = 0
        for x, r in enumerate(self.rows):
            if r & target:
                out |= 1 << x
        return out


# ----------------------------------------------------------- frame conditions

CONDITION_KINDS = (
    "reflexive", "transitive", "symmetric", "serial", "euclidean",
    "equivalence", "m_collapse", "weakly_transitive",
)


@dataclass(frozen=True, slots=True)
class FrameCondition:
    kind: str
    m: int | None = None

    def __post_init__(self):
        if self.kind not in CONDITION_KINDS:
            raise ValueError(f"unknown frame condition {self.kind!r}")
        if self.kind == "m_collapse" and (self.m is None or self.m < 1):
            raise ValueError("m_collapse needs m >= 1")

    @classmethod
    def parse(cls, text: str) -> FrameCondition:
        m = re.fullmatch(r"\s*m_collapse\((\d+)\)\s*", text)
        if m:
            return cls("m_collapse", int(m.group(1)))
        return cls(text.strip())

    def __str__(self) -> str:
        return f"m_collapse({self.m})" if self.kind == "m_collapse" else self.kind

    def holds(self, r: Relation) -> bool:
        n, rows = r.n, r.rows
        match self.kind:
            case "reflexive":
                return all(rows[x] >> x & 1 for x in range(n))
            case "serial":
                return all(rows)
            case "symmetric":
                return r == r.converse()
            case "transitive":
                return r.compose(r).issubset(r)
            case "euclidean":
                return r.converse().compose(r).issubset(r)
            case "equivalence":
                return all(FrameCondition(k).holds(r)
                           for k in ("reflexive", "symmetric", "transitive"))
            case "m_collapse":
                return r.power(self.m).issubset(r)
            case "weakly_transitive":
                two = r.compose(r)
                return all(two.rows[x] & ~(1 << x) & ~rows[x] == 0 for x in range(n))
        raise AssertionError(self.kind)

    def close(self, r: Relation) -> Relation:
        """Least relation containing ``r`` that satisfies the condition.

        Serial frames have no least extension; empty rows get a self-loop.
        """
        n = r.n
        match self.kind:
            case "reflexive":
                return r | Relation.identity(n)
            case "serial":
                return Relation(n, tuple(row or 1 << x for x, row in enumerate(r.rows)))
            case "symmetric":
                return r | r.converse()
            case "transitive":
                return r.closure()
            case "equivalence":
                return (r | r.converse() | Relation.identity(n)).closure()
        while not self.holds(r):
            match self.kind:
                case "euclidean":
                    r = r | r.converse().compose(r)
                case "m_collapse":
                    r = r | r.power(self.m)
                case "weakly_transitive":
                    two = r.compose(r)
                    r = r | Relation(n, tuple(two.rows[x] & ~(1 << x) for x in range(n)))
        return r


# -------------------------------------------------------------------- models


@dataclass(frozen=True)
class Model:
    """States ``0..n-1`` named by ``names``; ``valuation`` maps variable index to a state bitset."""

    names: tuple[str, ...]
    relations: Mapping[str, Relation]
    valuation: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.names)
        if len(set(self.names)) != n:
            raise ValueError("duplicate state names")
        for name, r in self.relations.items():
            if r.n != n:
                raise ValueError(f"relation {name!r} has {r.n} states, model has {n}")
        full = (1 << n) - 1
        for p, s in self.valuation.items():
            if s & ~full:
                raise ValueError(f"valuation of p{p} references missing states")

    @classmethod
    def build(cls, n: int | Iterable[str], relations: Mapping[str, Iterable[tuple[int, int]]],
              valuation: Mapping[int, Iterable[int]] | None = None) -> Model:
        names = tuple(str(i) for i in range(n)) if isinstance(n, int) else tuple(n)
        size = len(names)
        rels = {a: Relation.from_pairs(size, ps) for a, ps in relations.items()}
        val = {p: mask_of(s) for p, s in (valuation or {}).items()}
        return cls(names, rels, val)

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def full(self) -> int:
        return (1 << len(self.names)) - 1

    @property
    def alphabet(self) -> tuple[str, ...]:
        return tuple(sorted(self.relations))

    def state_names(self, mask: int) -> list[str]:
        return [self.names[x] for x in bits(mask)]

    def with_valuation(self, valuation: Mapping[int, int]) -> Model:
        return Model(self.names, self.relations, dict(valuation))

    def with_relations(self, relations: Mapping[str, Relation]) -> Model:
        return Model(self.names, dict(relations), self.valuation)

    def reduct(self, alphabet: Iterable[str]) -> Model:
        return Model(self.names, {a: self.relations[a] for a in alphabet}, self.valuation)


def program_relation(model: Model, e: Program, _memo: dict | None = None) -> Relation:
    """Relation of a compound program in the standard model over ``model``."""
    memo = {} if _memo is None else _memo
    if e in memo:
        return memo[e]
    match e:
        case Atom(name):
            if name not in model.relations:
                raise UnknownModality(name)
            r = model.relations[name]
        case Union(a, b):
            r = program_relation(model, a, memo) | program_relation(model, b, memo)
        case Comp(a, b):
            r = program_relation(model, a, memo).compose(program_relation(model, b, memo))
        case TransClos(a):
            r = program_relation(model, a, memo).closure()
        case Converse(a):
            r = program_relation(model, a, memo).converse()
        case _:
            raise TypeError(e)
    memo[e] = r
    return r


def truth_set(model: Model, f: Formula, valuation: Mapping[int, int] | None = None) -> int:
    """Bitset of the states where ``f`` holds; unvalued variables are empty."""
    val = model.valuation if valuation is None else valuation
    full = model.full
    rels: dict = {}
    memo: dict[int, int] = {}

    def go(g: Formula) -> int:
        key = id(g)
        hit = memo.get(key)
        if hit is not None:
            return hit
        match g:
            case Bot():
                out = 0
            case Var(i):
                out = val.get(i, 0)
            case Imp(a, b):
                out = (full & ~go(a)) | go(b)
            case Diamond(e, b):
                out = program_relation(model, e, rels).preimage(go(b))
            case _:
                raise TypeError(g)
        memo[key] = out
        return out

    return go(f)


def models(model: Model, f: Formula) -> bool:
    return truth_set(model, f) == model.full


def frame_condition_holds(model: Model, modality: str, cond: FrameCondition) -> bool:
    if modality not in model.relations:
        raise UnknownModality(modality)
    return cond.holds(model.relations[modality])


def _enrich(model: Model, new_name: str, rel: Relation) -> Model:
    if new_name in model.relations:
        raise PreconditionError(f"modality {new_name!r} already present")
    return model.with_relations({**model.relations, new_name: rel})


def trans_enrich(model: Model, e: str, new_name: str) -> Model:
    """Add the transitive closure of ``R_e`` under ``new_name``."""
    if e not in model.relations:
        raise UnknownModality(e)
    return _enrich(model, new_name, model.relations[e].closure())


def temp_enrich(model: Model, e: str, new_name: str) -> Model:
    """Add the converse of ``R_e`` under ``new_name``."""
    if e not in model.relations:
        raise UnknownModality(e)
    return _enrich(model, new_name, model.relations[e].converse())


# -------------------------------------------------------------- file format

_MODEL_KEYS = {"states", "relations", "valuation"}
_VAR_KEY = re.compile(r"p(\d+)")


def model_from_json(data: dict) -> Model:
    if not isinstance(data, dict):
        raise FormatError("model must be a JSON object")
    extra = set(data) - _MODEL_KEYS
    if extra:
        raise FormatError(f"unknown keys in model: {sorted(extra)}")
    if "states" not in data:
        raise FormatError("model lacks 'states'")
    names = data["states"]
    if not isinstance(names, list) or not all(isinstance(s, str) for s in names):
        raise FormatError("'states' must be a list of strings")
    if len(set(names)) != len(names):
        raise FormatError("duplicate state names")
    index = {s: i for i, s in enumerate(names)}

    def state(s):
        if s not in index:
            raise FormatError(f"unknown state {s!r}")
        return index[s]

    rels = {}
    for a, pairs in (data.get("relations") or {}).items():
        if not re.fullmatch(r"[a-z][a-z0-9_]*", a) or _VAR_KEY.fullmatch(a):
            raise FormatError(f"bad modality name {a!r}")
        if not isinstance(pairs, list) or not all(isinstance(p, list) and len(p) == 2 for p in pairs):
            raise FormatError(f"relation {a!r} must be a list of [from, to] pairs")
        rels[a] = Relation.from_pairs(len(names), [(state(x), state(y)) for x, y in pairs])
    val = {}
    for key, members in (data.get("valuation") or {}).items():
        m = _VAR_KEY.fullmatch(key)
        if not m:
            raise FormatError(f"bad variable name {key!r}")
        if not isinstance(members, list):
            raise FormatError(f"valuation of {key!r} must be a list")
        val[int(m.group(1))] = mask_of(state(s) for s in members)
    return Model(tuple(names), rels, val)


def model_to_json(model: Model) -> dict:
    return {
        "states": list(model.names),
        "relations": {a: [[model.names[x], model.names[y]] for x, y in model.relations[a].pairs()]
                      for a in model.alphabet},
        "valuation": {f"p{p}": model.state_names(model.valuation[p])
                      for p in sorted(model.valuation)},
    }


def load_model(path) -> Model:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from None
    return model_from_json(data)
