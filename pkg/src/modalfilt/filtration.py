"""Filtrations of finite models through Sub-closed formula sets.

A filtration is a quotient of a model by an equivalence that refines
agreement on ``gamma``, with relations squeezed between the minimal and
maximal filtered relations.  Every construction here is re-verified by
:func:`check_filtration` and, when a logic is involved, by
:func:`modalfilt.algebra.validate`; a failed check is an error.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .algebra import DEFAULT_CAP, Validation, validate
from .errors import PreconditionError, StrategyFailed
from .kripke import FrameCondition, Model, Relation, bits, truth_set
from .logics import LogicSpec
from .syntax import (
    Atom, Diamond, Formula, FormulaSet, Not, TOP, Var, conj, disj, is_atomic_modal, to_text,
)

DEFAULT_SEARCH_BOUND = 20

# ---------------------------------------------------------------- partitions


@dataclass(frozen=True)
class Partition:
    """Blocks are state bitsets ordered by their least member.

    ``witness`` is a formula set inducing the partition; ``witness_note``
    stands in for it when the formulas are only known to exist.
    """

    blocks: tuple[int, ...]
    class_of: tuple[int, ...]
    witness: FormulaSet | None = None
    witness_note: str | None = None

    @classmethod
    def from_labels(cls, labels: Sequence, witness: FormulaSet | None = None,
                    witness_note: str | None = None) -> Partition:
        ids: dict = {}
        class_of = []
        for lab in labels:
            class_of.append(ids.setdefault(lab, len(ids)))
        blocks = [0] * len(ids)
        for x, c in enumerate(class_of):
            blocks[c] |= 1 << x
        return cls(tuple(blocks), tuple(class_of), witness, witness_note)

    @classmethod
    def identity(cls, n: int) -> Partition:
        return cls.from_labels(range(n))

    @classmethod
    def single(cls, n: int) -> Partition:
        return cls.from_labels([0] * n)

    @property
    def n(self) -> int:
        return len(self.class_of)

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def definable(self) -> bool:
        return self.witness is not None or self.witness_note is not None

    def representative(self, block: int) -> int:
        return (self.blocks[block] & -self.blocks[block]).bit_length() - 1

    def refines(self, other: Partition) -> bool:
        return all(other.class_of[x] == other.class_of[self.representative(b)]
                   for b in range(len(self.blocks)) for x in bits(self.blocks[b]))

    def meet(self, other: Partition) -> Partition:
        witness = None
        if self.witness is not None and other.witness is not None:
            witness = self.witness | other.witness
        notes = [p.witness_note or (None if p.witness is None else "formulas")
                 for p in (self, other)]
        note = None if witness is not None or None in notes else " & ".join(notes)
        return Partition.from_labels(list(zip(self.class_of, other.class_of)), witness, note)

    def same_blocks(self, other: Partition) -> bool:
        return self.class_of == other.class_of


def equiv_induced(model: Model, delta: Iterable[Formula]) -> Partition:
    """Partition by agreement on every formula of ``delta``."""
    delta = FormulaSet(delta)
    exts = [truth_set(model, f) for f in delta]
    labels = [tuple(e >> x & 1 for e in exts) for x in range(model.n)]
    return Partition.from_labels(labels, delta)


# ------------------------------------------------------- filtered relations


def min_filtered(model: Model, part: Partition, modality: str) -> Relation:
    r = model.relations[modality]
    rows = [0] * len(part.blocks)
    for x, y in r.pairs():
        rows[part.class_of[x]] |= 1 << part.class_of[y]
    return Relation(len(rows), tuple(rows))


def max_filtered(model: Model, part: Partition, gamma: Iterable[Formula], modality: str) -> Relation:
    """Pairs of blocks allowed by every ``<modality>psi`` in ``gamma``.

    Quantifies over all members of both blocks, which agrees with the
    representative-wise definition whenever the partition refines gamma.
    """
    gamma = FormulaSet(gamma)
    k = len(part.blocks)
    conds = []
    for psi in gamma.diamonds(modality):
        conds.append((truth_set(model, psi), truth_set(model, Diamond(Atom(modality), psi))))
    rows = []
    for b1 in range(k):
        row = 0
        for b2 in range(k):
            if all(not (part.blocks[b2] & ext) or part.blocks[b1] & ~dia == 0
                   for ext, dia in conds):
                row |= 1 << b2
        rows.append(row)
    return Relation(k, tuple(rows))


def quotient_model(model: Model, part: Partition, relations: dict[str, Relation],
                   vars: Iterable[int]) -> Model:
    """Quotient on ``part``; a variable holds at a block inside its extension, others are empty."""
    names = tuple(f"[{model.names[part.representative(b)]}]" for b in range(len(part.blocks)))
    val = {}
    for p in sorted(vars):
        ext = model.valuation.get(p, 0)
        val[p] = sum(1 << b for b, blk in enumerate(part.blocks) if blk & ~ext == 0)
    return Model(names, relations, val)


# ------------------------------------------------------------- certificates


@dataclass
class FiltrationReport:
    refines_gamma: bool = True
    valuation: bool = True
    lower: bool = True
    upper: bool = True
    lemma: bool = True
    failures: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.refines_gamma and self.valuation and self.lower and self.upper and self.lemma

    def to_json(self) -> dict:
        return {"ok": self.ok, "refines_gamma": self.refines_gamma, "valuation": self.valuation,
                "lower_bound": self.lower, "upper_bound": self.upper,
                "filtration_lemma": self.lemma, "failures": self.failures}


@dataclass
class FiltrationCertificate:
    source: Model
    gamma: FormulaSet
    delta: FormulaSet | None
    partition: Partition
    quotient: Model
    strategy: str
    report: FiltrationReport | None = None
    logic_check: Validation | None = None
    delta_note: str | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def map(self) -> tuple[int, ...]:
        return self.partition.class_of

    @property
    def strict(self) -> bool:
        return self.delta is not None and self.delta == self.gamma

    @property
    def verified(self) -> bool:
        return (self.report is not None and self.report.ok
                and (self.logic_check is None or self.logic_check.ok))


def _require_gamma(gamma: FormulaSet) -> None:
    if not gamma.is_sub_closed():
        raise PreconditionError("gamma must be Sub-closed")
    if not all(is_atomic_modal(f) for f in gamma):
        raise PreconditionError("filtration needs gamma over atomic modalities")


def check_filtration(cert: FiltrationCertificate) -> FiltrationReport:
    """Check the three filtration conditions and the filtration lemma on gamma."""
    m, q, part, gamma = cert.source, cert.quotient, cert.partition, cert.gamma
    if part.n != m.n or len(part.blocks) != q.n:
        raise PreconditionError("map does not match the source and quotient sizes")
    for x, c in enumerate(part.class_of):
        if not part.blocks[c] >> x & 1:
            raise PreconditionError(f"state {m.names[x]} is not in its mapped block")
    if set(q.alphabet) != set(m.alphabet):
        raise PreconditionError("source and quotient alphabets differ")
    _require_gamma(gamma)
    rep = FiltrationReport()
    src = {f: truth_set(m, f) for f in gamma}
    for f, ext in src.items():
        for blk in part.blocks:
            inside = blk & ext
            if inside and inside != blk:
                rep.refines_gamma = False
                x, y = next(bits(inside)), next(bits(blk & ~ext))
                rep.failures.append({"condition": "refines_gamma", "formula": to_text(f),
                                     "states": [m.names[x], m.names[y]]})
                break
    for p in sorted(gamma.variables()):
        if Var(p) not in gamma:
            continue
        for x in range(m.n):
            if (m.valuation.get(p, 0) >> x & 1) != (q.valuation.get(p, 0) >> part.class_of[x] & 1):
                rep.valuation = False
                rep.failures.append({"condition": "valuation", "variable": f"p{p}",
                                     "state": m.names[x]})
                break
    for a in m.alphabet:
        lo = min_filtered(m, part, a)
        hi = max_filtered(m, part, gamma, a)
        r = q.relations[a]
        for b1, b2 in lo.pairs():
            if (b1, b2) not in r:
                rep.lower = False
                rep.failures.append({"condition": "lower_bound", "modality": a,
                                     "pair": [q.names[b1], q.names[b2]]})
        for b1, b2 in r.pairs():
            if (b1, b2) not in hi:
                rep.upper = False
                rep.failures.append({"condition": "upper_bound", "modality": a,
                                     "pair": [q.names[b1], q.names[b2]]})
    for f, ext in src.items():
        qext = truth_set(q, f)
        for x in range(m.n):
            if (ext >> x & 1) != (qext >> part.class_of[x] & 1):
                rep.lemma = False
                rep.failures.append({"condition": "filtration_lemma", "formula": to_text(f),
                                     "state": m.names[x]})
                break
    return rep


def make_certificate(model: Model, gamma: FormulaSet, part: Partition,
                     relations: dict[str, Relation], strategy: str,
                     delta: FormulaSet | None = None, delta_note: str | None = None,
                     ) -> FiltrationCertificate:
    quotient = quotient_model(model, part, relations, gamma.variables())
    if delta is None and delta_note is None:
        delta, delta_note = part.witness, part.witness_note
    cert = FiltrationCertificate(model, gamma, delta, part, quotient, strategy,
                                 delta_note=delta_note)
    cert.report = check_filtration(cert)
    return cert


# --------------------------------------------------------------- strategies


@dataclass(frozen=True)
class StrategyInfo:
    name: str
    strict: bool
    arg: int | None = None


_STRATEGY = re.compile(r"(minimal|reflexive|lemmon|s4|s5|serial|strict|bisim|gabbay|search)"
                       r"(?:\((\d+)\))?")
_STRICT = {"minimal", "reflexive", "lemmon", "s4", "s5", "serial", "strict", "search"}
STRATEGY_NAMES = ("minimal", "reflexive", "lemmon", "s4", "s5", "serial", "strict",
                  "search(b)", "gabbay(m)", "bisim")


def parse_strategy(name: str) -> StrategyInfo:
    m = _STRATEGY.fullmatch(name.strip())
    if not m:
        raise ValueError(f"unknown strategy {name!r}; known: {', '.join(STRATEGY_NAMES)}")
    kind, arg = m.group(1), m.group(2)
    if kind == "gabbay" and arg is None:
        raise ValueError("gabbay needs an argument, e.g. gabbay(3)")
    if arg is not None and kind not in ("gabbay", "search"):
        raise ValueError(f"strategy {kind} takes no argument")
    return StrategyInfo(kind, kind in _STRICT, None if arg is None else int(arg))


def lemmon_relation(model: Model, part: Partition, gamma: FormulaSet, modality: str) -> Relation:
    """[x]R[y] iff for every <>psi in gamma, y |= psi or <>psi implies x |= <>psi."""
    k = len(part.blocks)
    conds = []
    for psi in gamma.diamonds(modality):
        dia = truth_set(model, Diamond(Atom(modality), psi))
        conds.append((truth_set(model, psi) | dia, dia))
    rows = []
    for b1 in range(k):
        row = 0
        for b2 in range(k):
            if all(not (part.blocks[b2] & ext) or part.blocks[b1] & ~dia == 0
                   for ext, dia in conds):
                row |= 1 << b2
        rows.append(row)
    return Relation(k, tuple(rows))


def _serial_relation(lo: Relation) -> Relation:
    return Relation(lo.n, tuple(row or 1 << b for b, row in enumerate(lo.rows)))


def _relations(model, part, gamma, build) -> dict[str, Relation]:
    return {a: build(a) for a in model.alphabet}


def _attempt(model, gamma, part, rels, strategy, logic, cap) -> FiltrationCertificate:
    cert = make_certificate(model, gamma, part, rels, strategy)
    if cert.report.ok:
        cert.logic_check = validate(cert.quotient, logic.axioms, cap)
    return cert


def search_relations(model: Model, gamma: FormulaSet, part: Partition, logic: LogicSpec,
                     bound: int, strategy: str, cap: int = DEFAULT_CAP,
                     ) -> tuple[FiltrationCertificate | None, int]:
    """First relation choice between min and max whose quotient validates ``logic``.

    Candidates are ordered by the integer whose bit ``i`` selects the
    ``i``-th free pair (modality, source block, target block).  Returns the
    certificate (or None) and the number of candidates.
    """
    alphabet = model.alphabet
    lo = {a: min_filtered(model, part, a) for a in alphabet}
    hi = {a: max_filtered(model, part, gamma, a) for a in alphabet}
    for a in alphabet:
        if not lo[a].issubset(hi[a]):
            raise StrategyFailed(f"minimal relation of {a} exceeds the maximal one; "
                                 "partition does not refine gamma")
    free = [(a, b1, b2) for a in alphabet for b1, b2 in hi[a].pairs() if (b1, b2) not in lo[a]]
    total = 1 << len(free)
    if len(free) > bound:
        raise StrategyFailed(f"{len(free)} free pairs exceed the search bound {bound}",
                             {"free_pairs": len(free), "bound": bound})
    for code in range(total):
        rows = {a: list(lo[a].rows) for a in alphabet}
        for i, (a, b1, b2) in enumerate(free):
            if code >> i & 1:
                rows[a][b1] |= 1 << b2
        rels = {a: Relation(len(part.blocks), tuple(rows[a])) for a in alphabet}
        cert = _attempt(model, gamma, part, rels, strategy, logic, cap)
        if cert.verified:
            cert.notes.append(f"candidate {code} of {total}")
            return cert, total
    return None, total


def gabbay_delta(gamma: FormulaSet, modalities: Iterable[str], m: int) -> FormulaSet:
    """gamma together with every <a>^i phi, 1 <= i <= m."""
    out = list(gamma)
    for a in sorted(modalities):
        for phi in gamma:
            f = phi
            for _ in range(m):
                f = Diamond(Atom(a), f)
                out.append(f)
    return FormulaSet(out)


def filter_with(model: Model, gamma: FormulaSet, strategy: str | None, logic: LogicSpec,
                *, search_bound: int = DEFAULT_SEARCH_BOUND, cap: int = DEFAULT_CAP,
                emit_witness: bool = False) -> FiltrationCertificate:
    """Build a filtration of ``model`` through ``gamma`` that is again a ``logic``-model."""
    _require_gamma(gamma)
    strategy = logic.strategy if strategy is None else strategy
    info = parse_strategy(strategy)
    if logic.axioms:
        pre = validate(model, logic.axioms, cap)
        if not pre.ok:
            raise PreconditionError(f"model does not validate {logic.name}")
    kind = info.name

    if kind in ("strict", "search"):
        part = equiv_induced(model, gamma)
        bound = search_bound if info.arg is None else info.arg
        cert, total = search_relations(model, gamma, part, logic, bound, strategy, cap)
        if cert is None:
            what = "strict filtration" if kind == "strict" else "filtration"
            raise StrategyFailed(f"no {what} exists among {total} candidates",
                                 {"strategy": strategy, "candidates": total, "blocks": len(part)})
        return cert

    if kind == "gabbay":
        m = info.arg
        mods = [a for a in logic.alphabet if a in model.relations] or list(model.alphabet)
        delta = gabbay_delta(gamma, mods, m)
        part = equiv_induced(model, delta)
        lo = _relations(model, part, gamma, lambda a: min_filtered(model, part, a))
        cert = _attempt(model, gamma, part, lo, strategy, logic, cap)
        if cert.verified:
            return cert
        closed = {a: FrameCondition("m_collapse", m).close(r) if a in mods else r
                  for a, r in lo.items()}
        cert = _attempt(model, gamma, part, closed, f"{strategy}+collapse", logic, cap)
        if cert.verified:
            return cert
        found, total = search_relations(model, gamma, part, logic, search_bound,
                                        f"{strategy}+search", cap)
        if found is None:
            raise StrategyFailed(f"gabbay({m}): no relation among {total} candidates on "
                                 f"{len(part)} blocks", {"strategy": strategy})
        return found

    if kind == "bisim":
        part = bisim_coarsest(model, gamma.variables())
        if emit_witness:
            chars = FormulaSet(characteristic_formulas(model, gamma.variables(), part.depth))
            part = replace(part, witness=gamma | chars, witness_note=None)
        rels = _relations(model, part, gamma, lambda a: min_filtered(model, part, a))
        cert = _attempt(model, gamma, part, rels, strategy, logic, cap)
    else:
        part = equiv_induced(model, gamma)
        builders = {
            "minimal": lambda a: min_filtered(model, part, a),
            "reflexive": lambda a: min_filtered(model, part, a) | Relation.identity(len(part)),
            "lemmon": lambda a: lemmon_relation(model, part, gamma, a),
            "s4": lambda a: lemmon_relation(model, part, gamma, a) | Relation.identity(len(part)),
            "s5": lambda a: max_filtered(model, part, gamma, a),
            "serial": lambda a: _serial_relation(min_filtered(model, part, a)),
        }
        rels = _relations(model, part, gamma, builders[kind])
        cert = _attempt(model, gamma, part, rels, strategy, logic, cap)
    if not cert.verified:
        report = {"filtration": cert.report.to_json()}
        if cert.logic_check is not None:
            report["logic"] = cert.logic_check.to_json(cert.quotient)
        why = "not a filtration" if not cert.report.ok else f"quotient is not a {logic.name}-model"
        raise StrategyFailed(f"strategy {strategy}: {why}", report)
    return cert


# ------------------------------------------------------------- bisimulation


@dataclass(frozen=True)
class BisimPartition(Partition):
    depth: int = 0


def bisim_coarsest(model: Model, vars: Iterable[int]) -> BisimPartition:
    """Coarsest partition that respects ``vars`` and is a bisimulation for every relation.

    Signature refinement to a fixpoint; ``depth`` is the number of rounds
    that changed the partition, i.e. the modal depth that separates blocks.
    """
    vars = sorted(vars)
    n = model.n
    labels = [tuple(model.valuation.get(p, 0) >> x & 1 for p in vars) for x in range(n)]
    part = Partition.from_labels(labels)
    rels = [model.relations[a] for a in model.alphabet]
    depth = 0
    while True:
        cls = part.class_of
        sig = [(cls[x], tuple(frozenset(cls[y] for y in bits(r.rows[x])) for r in rels))
               for x in range(n)]
        nxt = Partition.from_labels(sig)
        if len(nxt) == len(part):
            break
        part, depth = nxt, depth + 1
    note = f"characteristic(depth<={depth})"
    return BisimPartition(part.blocks, part.class_of, None, note, depth)


def characteristic_formulas(model: Model, vars: Iterable[int], depth: int) -> list[Formula]:
    """One formula per block of the depth-``depth`` bisimilarity partition, true exactly on it."""
    vars = sorted(vars)
    n = model.n
    alphabet = model.alphabet
    chi = []
    for x in range(n):
        lits = [Var(p) if model.valuation.get(p, 0) >> x & 1 else Not(Var(p)) for p in vars]
        chi.append(conj(lits) if lits else TOP)
    for _ in range(depth):
        nxt = []
        for x in range(n):
            parts = [chi[x]]
            for a in alphabet:
                succ = list(bits(model.relations[a].rows[x]))
                targets = list(dict.fromkeys(chi[y] for y in succ))
                parts.extend(Diamond(Atom(a), t) for t in targets)
                parts.append(Not(Diamond(Atom(a), Not(disj(targets)))))
            nxt.append(conj(parts))
        chi = nxt
    part = bisim_partition_at(model, vars, depth)
    return [chi[part.representative(b)] for b in range(len(part))]


def bisim_partition_at(model: Model, vars: Sequence[int], depth: int) -> Partition:
    labels = [tuple(model.valuation.get(p, 0) >> x & 1 for p in vars) for x in range(model.n)]
    part = Partition.from_labels(labels)
    rels = [model.relations[a] for a in model.alphabet]
    for _ in range(depth):
        cls = part.class_of
        part = Partition.from_labels(
            [(cls[x], tuple(frozenset(cls[y] for y in bits(r.rows[x])) for r in rels))
             for x in range(model.n)])
    return part


# --------------------------------------------------------------- refinement


def refine(cert: FiltrationCertificate, finer: Partition) -> FiltrationCertificate:
    """Lift ``cert`` to a finer equivalence.

    A fine block ``u`` is related to ``v`` iff their coarse blocks are
    related in the original quotient; a variable holds at ``u`` iff it holds
    at the coarse block of ``u``.
    """
    coarse = cert.partition
    if finer.n != coarse.n or not finer.refines(coarse):
        raise PreconditionError("partition does not refine the certificate's partition")
    if not finer.definable:
        raise PreconditionError("refining partition carries no definability witness")
    up = [coarse.class_of[finer.representative(u)] for u in range(len(finer))]
    k = len(finer)
    rels = {}
    for a, r in cert.quotient.relations.items():
        rows = []
        for u in range(k):
            row = 0
            for v in range(k):
                if (up[u], up[v]) in r:
                    row |= 1 << v
            rows.append(row)
        rels[a] = Relation(k, tuple(rows))
    val = {p: sum(1 << u for u in range(k) if s >> up[u] & 1)
           for p, s in cert.quotient.valuation.items()}
    names = tuple(f"[{cert.source.names[finer.representative(u)]}]" for u in range(k))
    quotient = Model(names, rels, val)
    if finer.witness is not None:
        delta, note = cert.gamma | (cert.delta or ()) | finer.witness, None
    else:
        delta, note = None, finer.witness_note
    out = FiltrationCertificate(cert.source, cert.gamma, delta, finer, quotient,
                                f"{cert.strategy}+refine", delta_note=note)
    out.report = check_filtration(out)
    return out


def coarse_image(cert: FiltrationCertificate, refined: FiltrationCertificate) -> list[int]:
    """For each block of ``refined``, the block of ``cert`` that contains it."""
    return [cert.partition.class_of[refined.partition.representative(u)]
            for u in range(len(refined.partition))]
