"""Bounded finite-model search for formulas of dynamic logic with converse.

Frames are enumerated size by size in a fixed canonical order and every
valuation of the formula's variables is tried, so the first model found is
the least one in that order at the smallest size.  A negative answer only
says that no model with at most ``n_max`` states exists.

Canonical order: for ``n`` states a relation is the tuple of its successor
bitsets (row 0 first), compared lexicographically; a frame is the tuple of
its relations with modalities sorted by name; a valuation is the integer
whose bits ``j*n .. j*n+n-1`` hold the extension of the ``j``-th variable
(variables ascending).  Frames vary slowest.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, PreconditionError
from .kripke import FrameCondition, Model, Relation, truth_set
from .logics import LogicSpec
from .syntax import (
    Atom, Bot, Comp, Converse, Diamond, Formula, Imp, Not, Program, TransClos, Union, Var,
    modalities, variables,
)

DEFAULT_BUDGET = 10**7
_CHUNK = 1 << 20
_DT = np.uint32


@dataclass
class SearchResult:
    verdict: str                      # "SAT" or "NO_MODEL_UP_TO"
    n_max: int
    model: Model | None = None
    witness: int | None = None
    stats: dict = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.verdict == "SAT"

    def __str__(self) -> str:
        if self.sat:
            return f"SAT({self.model.n} states, witness {self.model.names[self.witness]})"
        return f"NO_MODEL_UP_TO({self.n_max})"


# ------------------------------------------------------ relation enumeration


def _bit(rows: np.ndarray, x: int, y: int) -> np.ndarray:
    return (rows[:, x] >> y) & 1


def _row_check(cond: FrameCondition, rows: np.ndarray, k: int, n: int) -> np.ndarray:
    """Constraints that become decidable once rows ``0..k`` are fixed."""
    ok = np.ones(len(rows), dtype=bool)
    kind = cond.kind
    if kind in ("reflexive", "equivalence"):
        ok &= _bit(rows, k, k) == 1
    if kind == "serial":
        ok &= rows[:, k] != 0
    if kind in ("symmetric", "equivalence"):
        for j in range(k):
            ok &= _bit(rows, k, j) == _bit(rows, j, k)
    pairs = [(x, y) for x in range(k + 1) for y in range(k + 1) if max(x, y) == k]
    if kind in ("transitive", "equivalence"):
        # xRy implies row_y within row_x
        for x, y in pairs:
            ok &= (_bit(rows, x, y) == 0) | ((rows[:, y] & ~rows[:, x]) == 0)
    if kind == "euclidean":
        # xRy implies row_x within row_y
        for x, y in pairs:
            ok &= (_bit(rows, x, y) == 0) | ((rows[:, x] & ~rows[:, y]) == 0)
    if kind == "weakly_transitive":
        for x, y in pairs:
            ok &= (_bit(rows, x, y) == 0) | ((rows[:, y] & ~rows[:, x] & ~_DT(1 << x)) == 0)
    return ok


def _compose(r: np.ndarray, s: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(np.broadcast_shapes(r.shape, s.shape), dtype=_DT)
    for x in range(n):
        for y in range(n):
            out[:, x] |= np.where((r[:, x] >> y) & 1, s[:, y], 0).astype(_DT)
    return out


def _converse(r: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros_like(r)
    for x in range(n):
        for y in range(n):
            out[:, y] |= (((r[:, x] >> y) & 1) << x).astype(_DT)
    return out


def _closure(r: np.ndarray, n: int) -> np.ndarray:
    r = r.copy()
    for k in range(n):
        for i in range(n):
            r[:, i] |= np.where((r[:, i] >> k) & 1, r[:, k], 0).astype(_DT)
    return r


def _final_check(cond: FrameCondition, rows: np.ndarray, n: int) -> np.ndarray:
    if cond.kind != "m_collapse":
        return np.ones(len(rows), dtype=bool)
    ident = np.array([1 << x for x in range(n)], dtype=_DT)
    power = np.broadcast_to(ident, rows.shape).copy()
    for _ in range(cond.m):
        power = _compose(power, rows, n)
    return np.all((power & ~rows) == 0, axis=1)


def enumerate_relations(n: int, conditions: Sequence[FrameCondition],
                        limit: int = DEFAULT_BUDGET) -> np.ndarray:
    """All relations on ``n`` states satisfying ``conditions``, in canonical order.

    Rows are chosen one at a time and partial relations are pruned as soon
    as a condition instance involves only chosen rows.
    """
    choices = np.arange(1 << n, dtype=_DT)
    partial = np.zeros((1, 0), dtype=_DT)
    for k in range(n):
        count = len(partial) * len(choices)
        if count > limit:
            raise BudgetExceeded(f"more than {limit} partial relations on {n} states",
                                 {"states": n, "row": k})
        rows = np.empty((count, k + 1), dtype=_DT)
        rows[:, :k] = np.repeat(partial, len(choices), axis=0)
        rows[:, k] = np.tile(choices, len(partial))
        ok = np.ones(count, dtype=bool)
        for c in conditions:
            ok &= _row_check(c, rows, k, n)
        partial = rows[ok]
    if n == 0:
        return partial
    ok = np.ones(len(partial), dtype=bool)
    for c in conditions:
        ok &= _final_check(c, partial, n)
    return partial[ok]


def count_frames(n: int, conditions: Sequence[FrameCondition]) -> int:
    return len(enumerate_relations(n, conditions))


# ------------------------------------------------------------- batched eval


class _Batch:
    """Truth sets of one formula over a batch of frames times all valuations."""

    def __init__(self, rels: dict[str, np.ndarray], n: int, var_vals: dict[int, np.ndarray]):
        self.rels = rels
        self.n = n
        self.full = _DT((1 << n) - 1)
        self.var_vals = var_vals
        self.progs: dict = {}
        self.memo: dict = {}
        self.frames = len(next(iter(rels.values()))) if rels else 1

    def program(self, e: Program) -> np.ndarray:
        if e in self.progs:
            return self.progs[e]
        n = self.n
        match e:
            case Atom(name):
                r = self.rels[name]
            case Union(a, b):
                r = self.program(a) | self.program(b)
            case Comp(a, b):
                r = _compose(self.program(a), self.program(b), n)
            case TransClos(a):
                r = _closure(self.program(a), n)
            case Converse(a):
                r = _converse(self.program(a), n)
            case _:
                raise TypeError(e)
        self.progs[e] = r
        return r

    def eval(self, f: Formula) -> np.ndarray:
        """Array of shape (frames, valuations) or broadcastable to it."""
        if f in self.memo:
            return self.memo[f]
        match f:
            case Bot():
                out = np.zeros((1, 1), dtype=_DT)
            case Var(i):
                out = self.var_vals.get(i, np.zeros(1, dtype=_DT))[None, :]
            case Imp(a, b):
                out = (self.full & ~self.eval(a)) | self.eval(b)
            case Diamond(e, b):
                rows = self.program(e)
                body = self.eval(b)
                out = np.zeros((rows.shape[0], body.shape[1]), dtype=_DT)
                for x in range(self.n):
                    hit = (rows[:, x, None] & body) != 0
                    out |= hit.astype(_DT) << _DT(x)
            case _:
                raise TypeError(f)
        self.memo[f] = out
        return out


# -------------------------------------------------------------------- search


def _alphabet(specs: Sequence[LogicSpec]) -> list[str]:
    return sorted({a for s in specs for a in s.alphabet})


def _conditions(specs: Sequence[LogicSpec]) -> dict[str, list[FrameCondition]]:
    out: dict[str, list[FrameCondition]] = {}
    for s in specs:
        if s.frame_conditions is None:
            raise PreconditionError(
                f"logic {s.name} has no frame conditions; frame-based search would be unsound")
        for a, c in s.frame_conditions:
            out.setdefault(a, []).append(c)
    return out


def _canonical_mask(rel_lists: list[np.ndarray], n: int) -> np.ndarray:
    """Frames whose code is least among all relabellings of the states."""
    codes = [_codes(r, n) for r in rel_lists]
    keep = np.ones(len(codes[0]) if codes else 0, dtype=bool)
    for perm in itertools.permutations(range(n)):
        if list(perm) == list(range(n)):
            continue
        smaller = np.zeros_like(keep)
        equal = np.ones_like(keep)
        for r, code in zip(rel_lists, codes):
            pc = _codes(_permute(r, perm, n), n)
            smaller |= equal & (pc < code)
            equal &= pc == code
        keep &= ~smaller
    return keep


def _codes(rows: np.ndarray, n: int) -> np.ndarray:
    code = np.zeros(len(rows), dtype=np.uint64)
    for x in range(n):
        code = (code << np.uint64(n)) | rows[:, x].astype(np.uint64)
    return code


def _permute(rows: np.ndarray, perm: Sequence[int], n: int) -> np.ndarray:
    out = np.zeros_like(rows)
    for x in range(n):
        for y in range(n):
            out[:, perm[x]] |= (((rows[:, x] >> y) & 1) << perm[y]).astype(_DT)
    return out


def bounded_sat(phi: Formula, specs: Sequence[LogicSpec], n_max: int, *,
                budget: int = DEFAULT_BUDGET, prune_isomorphic: bool = False) -> SearchResult:
    """First model (canonical order, smallest size) with a state satisfying ``phi``."""
    specs = list(specs)
    conds = _conditions(specs)
    alphabet = _alphabet(specs)
    stray = modalities(phi) - set(alphabet)
    if stray:
        raise PreconditionError(f"formula uses modalities without a logic: {sorted(stray)}")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if n_max > 8:
        raise PreconditionError("bounded search supports at most 8 states")
    vs = sorted(variables(phi))
    start = time.perf_counter()
    frames_seen = 0
    models_seen = 0
    covered = 0
    for n in range(1, n_max + 1):
        try:
            rel_lists = [enumerate_relations(n, conds.get(a, ()), budget) for a in alphabet]
        except BudgetExceeded as exc:
            raise BudgetExceeded(f"{exc}; sizes 1..{covered} fully searched",
                                 {"covered_up_to": covered, "frames": frames_seen}) from None
        if prune_isomorphic and alphabet and n > 1:
            pool = list(itertools.product(*[range(len(r)) for r in rel_lists]))
            if pool and len(pool) * len(alphabet) <= budget:
                idx = np.array(pool, dtype=np.int64).reshape(len(pool), len(alphabet))
                frames = [rel_lists[j][idx[:, j]] for j in range(len(alphabet))]
                keep = _canonical_mask(frames, n)
                rel_lists_full = [f[keep] for f in frames]
            else:
                rel_lists_full = None
        else:
            rel_lists_full = None
        counts = [len(r) for r in rel_lists]
        total = len(rel_lists_full[0]) if rel_lists_full is not None else int(np.prod(counts)) if counts else 1
        if frames_seen + total > budget:
            raise BudgetExceeded(
                f"frame budget {budget} exceeded at {n} states; sizes 1..{covered} fully searched",
                {"covered_up_to": covered, "frames": frames_seen, "needed": total})
        n_vals = 1 << (n * len(vs))
        vals = np.arange(n_vals, dtype=np.uint64)
        mask = np.uint64((1 << n) - 1)
        var_vals = {p: ((vals >> np.uint64(j * n)) & mask).astype(_DT) for j, p in enumerate(vs)}
        chunk = max(1, _CHUNK // n_vals)
        for lo in range(0, total, chunk):
            hi = min(total, lo + chunk)
            idx = np.arange(lo, hi, dtype=np.int64)
            rels = {}
            if rel_lists_full is not None:
                for j, a in enumerate(alphabet):
                    rels[a] = rel_lists_full[j][idx]
            else:
                rem = idx
                for j in range(len(alphabet) - 1, -1, -1):
                    rels[alphabet[j]] = rel_lists[j][rem % counts[j]]
                    rem = rem // counts[j]
            batch = _Batch(rels, n, var_vals)
            sets = np.broadcast_to(batch.eval(phi), (hi - lo, n_vals))
            hit = np.flatnonzero(sets.ravel() != 0)
            if len(hit):
                first = int(hit[0])
                f, v = divmod(first, n_vals)
                frames_seen += f + 1
                models_seen += first + 1
                rows = {a: tuple(int(x) for x in rels[a][f]) for a in alphabet}
                valuation = {p: int(var_vals[p][v]) for p in vs}
                model = Model(tuple(f"w{i}" for i in range(n)),
                              {a: Relation(n, rows[a]) for a in alphabet}, valuation)
                found = int(sets[f, v])
                witness = (found & -found).bit_length() - 1
                _replay(model, phi, witness, conds)
                return SearchResult("SAT", n_max, model, witness, {
                    "frames": frames_seen, "models": models_seen, "states": n,
                    "seconds": time.perf_counter() - start})
        frames_seen += total
        models_seen += total * n_vals
        covered = n
    return SearchResult("NO_MODEL_UP_TO", n_max, stats={
        "frames": frames_seen, "models": models_seen,
        "seconds": time.perf_counter() - start})


def _replay(model: Model, phi: Formula, witness: int, conds) -> None:
    if not truth_set(model, phi) >> witness & 1:
        raise AssertionError("returned model does not satisfy the formula at the witness")
    for a, cs in conds.items():
        for c in cs:
            if not c.holds(model.relations[a]):
                raise AssertionError(f"returned frame violates {c} on {a}")


def bounded_countermodel(phi: Formula, specs: Sequence[LogicSpec], n_max: int, **kw) -> SearchResult:
    """Search for a model refuting ``phi`` somewhere."""
    return bounded_sat(Not(phi), specs, n_max, **kw)
