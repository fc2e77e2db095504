"""Seeded random models, formulas and programs for property checks."""

from __future__ import annotations

import random
from typing import Sequence

from .kripke import FrameCondition, Model, Relation
from .syntax import (
    Atom, BOT, Comp, Converse, Diamond, Formula, FormulaSet, Imp, Program, TransClos, Union,
    Var, sub_closure,
)


def random_relation(rng: random.Random, n: int, density: float = 0.3) -> Relation:
    rows = []
    for _ in range(n):
        row = 0
        for y in range(n):
            if rng.random() < density:
                row |= 1 << y
        rows.append(row)
    return Relation(n, tuple(rows))


def random_frame_relation(rng: random.Random, n: int, conditions: Sequence[FrameCondition],
                          density: float = 0.3) -> Relation:
    """Random relation closed until every condition holds."""
    r = random_relation(rng, n, density)
    if any(c.kind == "equivalence" for c in conditions) and rng.random() < 0.5:
        # random partition instead of closing a random relation, for variety
        labels = [rng.randrange(max(1, n)) for _ in range(n)]
        r = Relation.from_pairs(n, [(x, y) for x in range(n) for y in range(n) if labels[x] == labels[y]])
    for _ in range(64):
        if all(c.holds(r) for c in conditions):
            return r
        for c in conditions:
            r = c.close(r)
    raise RuntimeError(f"could not close relation under {list(map(str, conditions))}")


def random_model(rng: random.Random, n: int, alphabet: Sequence[str], n_vars: int,
                 conditions: dict[str, Sequence[FrameCondition]] | None = None,
                 density: float = 0.3) -> Model:
    conditions = conditions or {}
    rels = {a: random_frame_relation(rng, n, conditions.get(a, ()), density) for a in alphabet}
    val = {p: sum(1 << x for x in range(n) if rng.random() < 0.5) for p in range(n_vars)}
    return Model(tuple(f"w{i}" for i in range(n)), rels, val)


def random_program(rng: random.Random, atoms: Sequence[str], depth: int) -> Program:
    if depth <= 0 or rng.random() < 0.3:
        return Atom(rng.choice(list(atoms)))
    kind = rng.randrange(4)
    if kind == 0:
        return Union(random_program(rng, atoms, depth - 1), random_program(rng, atoms, depth - 1))
    if kind == 1:
        return Comp(random_program(rng, atoms, depth - 1), random_program(rng, atoms, depth - 1))
    if kind == 2:
        return TransClos(random_program(rng, atoms, depth - 1))
    return Converse(random_program(rng, atoms, depth - 1))


def random_formula(rng: random.Random, n_vars: int, atoms: Sequence[str], depth: int,
                   program_depth: int = 0) -> Formula:
    """Random formula in the primitive basis; compound programs when ``program_depth`` > 0."""
    if depth <= 0 or rng.random() < 0.25:
        if n_vars and rng.random() < 0.85:
            return Var(rng.randrange(n_vars))
        return BOT
    if atoms and rng.random() < 0.45:
        prog = random_program(rng, atoms, program_depth) if program_depth else Atom(rng.choice(list(atoms)))
        return Diamond(prog, random_formula(rng, n_vars, atoms, depth - 1, program_depth))
    return Imp(random_formula(rng, n_vars, atoms, depth - 1, program_depth),
               random_formula(rng, n_vars, atoms, depth - 1, program_depth))


def random_gamma(rng: random.Random, n_vars: int, atoms: Sequence[str], max_size: int = 6,
                 depth: int = 3) -> FormulaSet:
    """Random Sub-closed set of at most ``max_size`` formulas with at least one diamond if possible."""
    best = None
    for _ in range(200):
        seeds = [random_formula(rng, n_vars, atoms, depth) for _ in range(rng.randint(1, 2))]
        gamma = FormulaSet(g for f in seeds for g in sub_closure(f))
        if len(gamma) > max_size:
            continue
        if any(isinstance(f, Diamond) for f in gamma) or not atoms:
            return gamma
        best = best or gamma
    return best or FormulaSet([Var(0)])
