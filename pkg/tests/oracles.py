"""Slow, obviously-correct reference implementations used as test oracles.

They work on sets of pairs and recurse state by state, sharing no code with
the bitset implementation under test beyond the AST classes.
"""

import itertools

from modalfilt.syntax import (
    And, Atom, Bot, Box, Comp, Converse, Diamond, Imp, Not, Or, TransClos, Union, Var,
)


def pairs_of(model, name):
    return {(x, y) for x in range(model.n) for y in range(model.n)
            if (model.relations[name].rows[x] >> y) & 1}


def rel(model, e):
    if isinstance(e, Atom):
        return pairs_of(model, e.name)
    if isinstance(e, Union):
        return rel(model, e.left) | rel(model, e.right)
    if isinstance(e, Comp):
        r, s = rel(model, e.left), rel(model, e.right)
        return {(x, z) for x, y in r for y2, z in s if y == y2}
    if isinstance(e, Converse):
        return {(y, x) for x, y in rel(model, e.body)}
    if isinstance(e, TransClos):
        r = rel(model, e.body)
        out = set(r)
        while True:
            step = out | {(x, z) for x, y in out for y2, z in r if y == y2}
            if step == out:
                return out
            out = step
    raise TypeError(e)


def holds(model, f, x, val=None):
    val = model.valuation if val is None else val
    if isinstance(f, Bot):
        return False
    if isinstance(f, Var):
        return bool((val.get(f.index, 0) >> x) & 1)
    if isinstance(f, Imp):
        return (not holds(model, f.left, x, val)) or holds(model, f.right, x, val)
    if isinstance(f, Diamond):
        return any(holds(model, f.body, y, val) for (x2, y) in rel(model, f.program) if x2 == x)
    raise TypeError(f)


def extension(model, f, val=None):
    return {x for x in range(model.n) if holds(model, f, x, val)}


def globally(model, f, val=None):
    return all(holds(model, f, x, val) for x in range(model.n))


def all_subsets_validates(model, axiom, variables):
    """Validity under every assignment of arbitrary state sets."""
    subsets = range(1 << model.n)
    for combo in itertools.product(subsets, repeat=len(variables)):
        if not globally(model, axiom, dict(zip(variables, combo))):
            return False
    return True


def frame_ok(kind, pairs, n, m=None):
    r = set(pairs)
    w = range(n)
    if kind == "reflexive":
        return all((x, x) in r for x in w)
    if kind == "symmetric":
        return all((y, x) in r for x, y in r)
    if kind == "transitive":
        return all((x, z) in r for x, y in r for y2, z in r if y == y2)
    if kind == "serial":
        return all(any((x, y) in r for y in w) for x in w)
    if kind == "euclidean":
        return all((y, z) in r for x, y in r for x2, z in r if x == x2)
    if kind == "equivalence":
        return all(frame_ok(k, r, n) for k in ("reflexive", "symmetric", "transitive"))
    if kind == "weakly_transitive":
        return all((x, z) in r for x, y in r for y2, z in r if y == y2 and x != z)
    if kind == "m_collapse":
        power = {(x, x) for x in w}
        for _ in range(m):
            power = {(x, z) for x, y in power for y2, z in r if y == y2}
        return power <= r
    raise ValueError(kind)


def all_relations(n):
    cells = [(x, y) for x in range(n) for y in range(n)]
    for bits in itertools.product((0, 1), repeat=len(cells)):
        yield {c for c, b in zip(cells, bits) if b}


def cpdl_axioms(e, f, p):
    """Instances of the seven standard-model axioms for programs ``e``, ``f`` and formula ``p``."""
    def iff(a, b):
        return And(Imp(a, b), Imp(b, a))

    dia = Diamond
    plus = TransClos(e)
    return {
        "A1": iff(dia(Union(e, f), p), Or(dia(e, p), dia(f, p))),
        "A2": iff(dia(Comp(e, f), p), dia(e, dia(f, p))),
        "A3": Imp(dia(e, p), dia(plus, p)),
        "A4": Imp(dia(e, dia(plus, p)), dia(plus, p)),
        "A5": Imp(dia(plus, p), Or(dia(e, p), dia(plus, And(Not(p), dia(e, p))))),
        "A6": Imp(p, Box(e, dia(Converse(e), p))),
        "A7": Imp(p, Box(Converse(e), dia(e, p))),
    }
