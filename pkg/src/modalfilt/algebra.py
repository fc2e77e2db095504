"""The algebra of definable sets of a finite model.

A model validates a logic exactly when every axiom evaluates to the whole
state set under every assignment of its variables to definable sets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import CapExceeded, PreconditionError
from .kripke import Model, Relation, truth_set
from .syntax import Formula, FormulaSet, is_atomic_modal, variables

DEFAULT_CAP = 10**6
DEFAULT_CARRIER_CAP = 1 << 16


@dataclass(frozen=True)
class DefinableAlgebra:
    n: int
    carrier: frozenset[int]
    generators: tuple[int, ...]
    operators: Mapping[str, Relation]

    @property
    def top(self) -> int:
        return (1 << self.n) - 1

    def complement(self, a: int) -> int:
        return self.top & ~a

    def meet(self, a: int, b: int) -> int:
        return a & b

    def join(self, a: int, b: int) -> int:
        return self.complement(self.complement(a) & self.complement(b))

    def diamond(self, modality: str, a: int) -> int:
        return self.operators[modality].preimage(a)

    def elements(self) -> list[int]:
        return sorted(self.carrier)

    def __len__(self) -> int:
        return len(self.carrier)

    def __contains__(self, a: int) -> bool:
        return a in self.carrier


def definable_algebra(model: Model, vars: Iterable[int] | None = None,
                      cap: int = DEFAULT_CARRIER_CAP) -> DefinableAlgebra:
    """Close the generator sets under complement, intersection and every preimage operator."""
    vars = sorted(model.valuation) if vars is None else sorted(vars)
    top = model.full
    gens = tuple(model.valuation.get(p, 0) for p in vars)
    ops = [model.relations[a] for a in model.alphabet]
    carrier: set[int] = set()
    order: list[int] = []
    pending = [0, top, *gens]
    while pending:
        a = pending.pop()
        if a in carrier:
            continue
        carrier.add(a)
        order.append(a)
        if len(carrier) > cap:
            raise CapExceeded("definable algebra exceeds the carrier cap", len(carrier))
        pending.append(top & ~a)
        pending.extend(r.preimage(a) for r in ops)
        pending.extend(a & b for b in order)
    return DefinableAlgebra(model.n, frozenset(carrier), gens, dict(model.relations))


@dataclass
class Validation:
    ok: bool
    axiom: Formula | None = None
    assignment: dict[int, int] | None = None
    evaluations: int = 0
    carrier_size: int = 0

    def to_json(self, model: Model) -> dict:
        from .syntax import to_text
        out = {"validates": self.ok, "carrier_size": self.carrier_size,
               "evaluations": self.evaluations}
        if not self.ok:
            out["axiom"] = to_text(self.axiom)
            out["counter_assignment"] = {f"p{p}": model.state_names(s)
                                         for p, s in sorted(self.assignment.items())}
        return out


def validate(model: Model, axioms: Iterable[Formula], cap: int = DEFAULT_CAP,
             algebra: DefinableAlgebra | None = None) -> Validation:
    """Check every axiom under every assignment into the definable algebra.

    The first failing axiom is reported with its lexicographically least
    counter-assignment (variables ascending, sets ordered as integers).
    """
    axioms = list(axioms)
    if not axioms:
        return Validation(True)
    for ax in axioms:
        if not is_atomic_modal(ax):
            raise PreconditionError("axioms must use atomic modalities only")
    alg = definable_algebra(model) if algebra is None else algebra
    elems = alg.elements()
    plans = [(ax, sorted(variables(ax))) for ax in axioms]
    total = sum(len(elems) ** len(vs) for _, vs in plans)
    if total > cap:
        raise CapExceeded(f"validation needs {total} axiom evaluations, cap is {cap}", total)
    full = model.full
    done = 0
    for ax, vs in plans:
        for combo in itertools.product(elems, repeat=len(vs)):
            assignment = dict(zip(vs, combo))
            done += 1
            if truth_set(model, ax, assignment) != full:
                return Validation(False, ax, assignment, done, len(elems))
    return Validation(True, evaluations=done, carrier_size=len(elems))


def model_validates(model: Model, axioms: Iterable[Formula] | FormulaSet,
                    cap: int = DEFAULT_CAP) -> bool:
    return validate(model, axioms, cap).ok


def fails_under(model: Model, axiom: Formula, assignment: Mapping[int, int]) -> bool:
    """True when ``axiom`` is not globally true under ``assignment``."""
    return truth_set(model, axiom, assignment) != model.full
