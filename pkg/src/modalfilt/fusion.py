"""Fusions of logics and filtration of models of a fusion.

:func:`fuse_filter` filters a model of ``L_A * L_B`` by filtering its two
reducts separately (over fresh variables naming the members of gamma),
intersecting the two equivalences, lifting both component filtrations to
the common equivalence and merging their relations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .algebra import DEFAULT_CAP, validate
from .errors import FusionError, PreconditionError, StrategyFailed
from .filtration import (
    DEFAULT_SEARCH_BOUND, FiltrationCertificate, Partition, check_filtration,
    filter_with, refine,
)
from .kripke import Model, truth_set
from .logics import LogicSpec
from .syntax import Atom, Diamond, FormulaSet, Var, substitute, to_text


def combine(specs: Sequence[LogicSpec]) -> LogicSpec:
    """Fusion of specs whose alphabets are already pairwise disjoint."""
    specs = list(specs)
    if not specs:
        raise ValueError("fusion of no logics")
    if len(specs) == 1:
        return specs[0]
    seen: set[str] = set()
    for s in specs:
        if seen & set(s.alphabet):
            raise PreconditionError(f"alphabets overlap on {sorted(seen & set(s.alphabet))}")
        seen |= set(s.alphabet)
    conds = None
    if all(s.frame_conditions is not None for s in specs):
        conds = tuple(c for s in specs for c in s.frame_conditions)
    axioms = FormulaSet(f for s in specs for f in s.axioms)
    alphabet = tuple(a for s in specs for a in s.alphabet)
    name = "*".join(s.name for s in specs)
    return LogicSpec(name, alphabet, axioms, conds, "fuse", tuple(specs),
                     all(s.builtin for s in specs))


def fuse_logics(specs: Sequence[LogicSpec]) -> LogicSpec:
    """Fusion with modalities renamed apart when the alphabets collide.

    On a collision every modality ``m`` of the i-th spec becomes ``m<i>``
    (1-based), e.g. K5 * K5 over ``a`` gives modalities ``a1`` and ``a2``.
    """
    specs = list(specs)
    alphabets = [set(s.alphabet) for s in specs]
    clash = any(alphabets[i] & alphabets[j]
                for i in range(len(specs)) for j in range(i + 1, len(specs)))
    if clash:
        specs = [s.shifted({a: f"{a}{i}" for a in s.alphabet}) for i, s in enumerate(specs, 1)]
    return combine(specs)


@dataclass
class FusionTrace:
    fresh_vars: dict[str, int]
    model_v: Model
    reducts: tuple[Model, Model]
    gamma_a: FormulaSet
    gamma_b: FormulaSet
    component_certs: tuple[FiltrationCertificate, FiltrationCertificate]
    common_partition: Partition
    refined: tuple[FiltrationCertificate, FiltrationCertificate]
    merged: Model
    final: FiltrationCertificate | None = None
    nested: list[FusionTrace] = field(default_factory=list)


def fresh_variables(gamma: FormulaSet) -> dict:
    """q_phi index = (largest variable index in gamma) + 1 + rank of phi in canonical order."""
    base = max(gamma.variables(), default=-1) + 1
    return {phi: base + i for i, phi in enumerate(gamma.canonical())}


def _component_filter(model: Model, gamma: FormulaSet, spec: LogicSpec, side: str, **kw
                      ) -> tuple[FiltrationCertificate, list]:
    try:
        if spec.parts:
            return fuse_filter_many(model, gamma, spec.parts, **kw)
        cert = filter_with(model, gamma, spec.strategy, spec,
                           search_bound=kw.get("search_bound", DEFAULT_SEARCH_BOUND),
                           cap=kw.get("cap", DEFAULT_CAP),
                           emit_witness=kw.get("emit_witness", False))
        return cert, []
    except StrategyFailed as exc:
        if isinstance(exc, FusionError):
            raise
        raise FusionError(str(exc), side, exc.report) from exc


def fuse_filter(model: Model, gamma: FormulaSet, spec_a: LogicSpec, spec_b: LogicSpec, *,
                search_bound: int = DEFAULT_SEARCH_BOUND, cap: int = DEFAULT_CAP,
                emit_witness: bool = False) -> tuple[FiltrationCertificate, FusionTrace]:
    """Definable filtration of a model of ``spec_a * spec_b`` through ``gamma``."""
    alpha, beta = set(spec_a.alphabet), set(spec_b.alphabet)
    if alpha & beta:
        raise PreconditionError(f"component alphabets overlap on {sorted(alpha & beta)}")
    if alpha | beta != set(model.alphabet):
        raise PreconditionError(f"model alphabet {list(model.alphabet)} is not "
                                f"{sorted(alpha)} + {sorted(beta)}")
    if not gamma.is_sub_closed():
        raise PreconditionError("gamma must be Sub-closed")
    axioms = spec_a.axioms | spec_b.axioms
    if not validate(model, axioms, cap).ok:
        raise PreconditionError("model does not validate the fused axioms")
    kw = dict(search_bound=search_bound, cap=cap, emit_witness=emit_witness)

    fresh = fresh_variables(gamma)
    eta = {q: truth_set(model, phi) for phi, q in fresh.items()}
    model_v = model.with_valuation(eta)
    red_a = model_v.reduct(sorted(alpha))
    red_b = model_v.reduct(sorted(beta))
    v_atoms = [Var(q) for q in sorted(eta)]

    def component_gamma(side_alphabet):
        extra = []
        for f in gamma:
            if isinstance(f, Diamond) and isinstance(f.program, Atom) and f.program.name in side_alphabet:
                extra.append(Diamond(f.program, Var(fresh[f.body])))
        return FormulaSet([*v_atoms, *extra])

    gamma_a, gamma_b = component_gamma(alpha), component_gamma(beta)
    cert_a, nested_a = _component_filter(red_a, gamma_a, spec_a, "A", **kw)
    cert_b, nested_b = _component_filter(red_b, gamma_b, spec_b, "B", **kw)
    common = cert_a.partition.meet(cert_b.partition)
    ref_a = refine(cert_a, common)
    ref_b = refine(cert_b, common)
    if ref_a.quotient.valuation != ref_b.quotient.valuation:
        raise AssertionError("component quotients disagree on the fresh variables")
    eta_hat = {q: s for q, s in ref_a.quotient.valuation.items() if q in eta}
    merged = Model(ref_a.quotient.names,
                   {**ref_a.quotient.relations, **ref_b.quotient.relations}, eta_hat)
    theta_hat = {p: eta_hat[fresh[Var(p)]] for p in sorted(gamma.variables()) if Var(p) in fresh}
    quotient = Model(merged.names, merged.relations, theta_hat)

    back = {q: phi for phi, q in fresh.items()}
    delta, note = None, common.witness_note
    if common.witness is not None:
        delta, note = gamma | FormulaSet(substitute(f, back) for f in common.witness), None
    witness_part = Partition(common.blocks, common.class_of, delta, note)
    strategy = f"fuse({cert_a.strategy},{cert_b.strategy})"
    final = FiltrationCertificate(model, gamma, delta, witness_part, quotient, strategy,
                                  delta_note=note)
    final.report = check_filtration(final)
    final.logic_check = validate(quotient, axioms, cap)
    trace = FusionTrace(
        fresh_vars={to_text(phi): q for phi, q in fresh.items()},
        model_v=model_v, reducts=(red_a, red_b), gamma_a=gamma_a, gamma_b=gamma_b,
        component_certs=(cert_a, cert_b), common_partition=common,
        refined=(ref_a, ref_b), merged=merged, final=final,
        nested=nested_a + nested_b,
    )
    if not final.verified:
        report = {"filtration": final.report.to_json()}
        if final.logic_check is not None:
            report["logic"] = final.logic_check.to_json(quotient)
        raise StrategyFailed("merged quotient failed verification", report)
    return final, trace


def fuse_filter_many(model: Model, gamma: FormulaSet, specs: Sequence[LogicSpec], **kw
                     ) -> tuple[FiltrationCertificate, list[FusionTrace]]:
    """n-ary fusion as ((L1 * L2) * L3) * ..., each step the binary construction."""
    specs = list(specs)
    if not specs:
        raise ValueError("no logics given")
    if len(specs) == 1:
        if set(specs[0].alphabet) != set(model.alphabet):
            raise PreconditionError("logic alphabet differs from the model alphabet")
        return _component_filter(model, gamma, specs[0], "A", **kw)
    left = combine(specs[:-1]) if len(specs) > 2 else specs[0]
    cert, trace = fuse_filter(model, gamma, left, specs[-1], **kw)
    return cert, [trace]


def spot_check_refinement(coarse: FiltrationCertificate, fine: FiltrationCertificate,
                          formulas) -> list[str]:
    """Formulas on which a fine block and its coarse block disagree (should be empty)."""
    up = [coarse.partition.class_of[fine.partition.representative(u)]
          for u in range(len(fine.partition))]
    bad = []
    for f in formulas:
        a, b = truth_set(fine.quotient, f), truth_set(coarse.quotient, f)
        if any((a >> u & 1) != (b >> up[u] & 1) for u in range(len(up))):
            bad.append(to_text(f))
    return bad
