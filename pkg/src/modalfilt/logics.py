"""Named normal modal logics with frame conditions and filtration strategies.

Axioms are written schematically with ``<>``/``[]`` for the logic's
modality, ``<>^k`` for k nested diamonds, bare ``p q r s`` for ``p0..p3``
and ``T`` for ``true``; e.g. ``K+<>^3p-><>p``.  A trailing
``@cond&cond`` attaches frame conditions to a user-supplied axiom set.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .kripke import FrameCondition
from .syntax import FormulaSet, parse_formula, shift_alphabet

SCHEMAS = {
    "T": "p -> <>p",
    "4": "<><>p -> <>p",
    "5": "<>p -> []<>p",
    "B": "p -> []<>p",
    "D": "<>T",
    "W": "<><>p -> <>p | p",
}

# name -> (axiom schemas, frame conditions, default strategy)
ROSTER = {
    "K": ((), (), "minimal"),
    "T": (("T",), ("reflexive",), "reflexive"),
    "K4": (("4",), ("transitive",), "lemmon"),
    "S4": (("T", "4"), ("reflexive", "transitive"), "s4"),
    "S5": (("T", "5"), ("equivalence",), "bisim"),
    "K5": (("5",), ("euclidean",), "bisim"),
    "K45": (("4", "5"), ("transitive", "euclidean"), "bisim"),
    "D": (("D",), ("serial",), "serial"),
    "KB": (("B",), ("symmetric",), "minimal"),
    "K4D": (("4", "D"), ("transitive", "serial"), "lemmon"),
    "DIFF": (("B", "W"), ("symmetric", "weakly_transitive"), "bisim"),
}

_KM = re.compile(r"Km\((\d+)\)")
_MAX_RECOGNISED_M = 16


@dataclass(frozen=True)
class LogicSpec:
    name: str
    alphabet: tuple[str, ...]
    axioms: FormulaSet = field(default_factory=FormulaSet)
    frame_conditions: tuple[tuple[str, FrameCondition], ...] | None = ()
    strategy: str = "minimal"
    parts: tuple[LogicSpec, ...] = ()
    builtin: bool = True

    def __post_init__(self):
        stray = self.axioms.modalities() - set(self.alphabet)
        if stray:
            raise ValueError(f"axioms of {self.name} use modalities outside its alphabet: {sorted(stray)}")

    @property
    def complete_by_conditions(self) -> bool:
        return self.frame_conditions is not None

    def conditions_for(self, modality: str) -> list[FrameCondition]:
        return [c for a, c in self.frame_conditions or () if a == modality]

    def shifted(self, renaming: dict[str, str]) -> LogicSpec:
        conds = None if self.frame_conditions is None else tuple(
            (renaming[a], c) for a, c in self.frame_conditions)
        return replace(
            self,
            name=f"{self.name}[{','.join(renaming[a] for a in self.alphabet)}]",
            alphabet=tuple(renaming[a] for a in self.alphabet),
            axioms=FormulaSet(shift_alphabet(f, renaming) for f in self.axioms),
            frame_conditions=conds,
            parts=tuple(p.shifted({a: renaming[a] for a in p.alphabet}) for p in self.parts),
        )


def schematic(text: str, modality: str) -> FormulaSet:
    """Instantiate ``;``-separated schematic axioms for one modality."""
    out = []
    for piece in text.split(";"):
        piece = piece.strip()
        if not piece:
            continue
        piece = re.sub(r"<>\^(\d+)", lambda m: "<>" * int(m.group(1)), piece)
        piece = re.sub(r"(?<![A-Za-z0-9_])([pqrs])(?![A-Za-z0-9_])",
                       lambda m: f"p{'pqrs'.index(m.group(1))}", piece)
        piece = re.sub(r"(?<![A-Za-z0-9_])T(?![A-Za-z0-9_])", "true", piece)
        piece = piece.replace("<>", f"<{modality}>").replace("[]", f"[{modality}]")
        out.append(parse_formula(piece, [modality]))
    return FormulaSet(out)


def builtin(name: str, modality: str = "a") -> LogicSpec:
    m = _KM.fullmatch(name)
    if m:
        k = int(m.group(1))
        if k < 1:
            raise ValueError("Km(m) needs m >= 1")
        axioms = schematic(f"<>^{k}p -> <>p", modality)
        return LogicSpec(name, (modality,), axioms,
                         ((modality, FrameCondition("m_collapse", k)),), f"gabbay({k})")
    if name not in ROSTER:
        raise ValueError(f"unknown logic {name!r}; known: {', '.join(ROSTER)}, Km(m)")
    schemas, conds, strategy = ROSTER[name]
    axioms = schematic(";".join(SCHEMAS[s] for s in schemas), modality)
    return LogicSpec(name, (modality,), axioms,
                     tuple((modality, FrameCondition(c)) for c in conds), strategy)


def _recognise(axioms: FormulaSet, modality: str) -> LogicSpec | None:
    candidates = [*ROSTER, *(f"Km({k})" for k in range(1, _MAX_RECOGNISED_M + 1))]
    for name in candidates:
        spec = builtin(name, modality)
        if spec.axioms == axioms:
            return spec
    return None


def parse_logic(text: str, modality: str = "a") -> LogicSpec:
    """Parse a roster name, ``BASE+axioms`` or a bare axiom list for ``modality``.

    Axiom sets equal to a roster entry inherit its frame conditions and
    default strategy; anything else is a user logic without conditions
    (usable for filtration, rejected by the bounded search) unless
    conditions are attached with ``@``.
    """
    text = text.strip()
    conds_text = None
    if "@" in text:
        text, conds_text = (s.strip() for s in text.split("@", 1))
    if text in ROSTER or _KM.fullmatch(text):
        spec = builtin(text, modality)
    else:
        base, extra = "K", text
        if "+" in text:
            head, tail = text.split("+", 1)
            if head.strip() in ROSTER or _KM.fullmatch(head.strip()):
                base, extra = head.strip(), tail
        axioms = builtin(base, modality).axioms | schematic(extra, modality)
        spec = _recognise(axioms, modality)
        if spec is None:
            spec = LogicSpec(text, (modality,), axioms, None, "search", builtin=False)
        else:
            spec = replace(spec, name=text)
    if conds_text is not None:
        conds = tuple((modality, FrameCondition.parse(c)) for c in conds_text.split("&") if c.strip())
        spec = replace(spec, frame_conditions=conds, builtin=False)
    return spec


def parse_assignments(text: str, default_modalities: tuple[str, ...] = ()) -> list[LogicSpec]:
    """``a:K5,b:S4`` -> one spec per modality; a bare logic applies to every default modality."""
    specs = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        m = re.match(r"([a-z][a-z0-9_]*)\s*:(.*)$", item)
        if m and not re.fullmatch(r"p\d+", m.group(1)):
            specs.append(parse_logic(m.group(2), m.group(1)))
        else:
            if not default_modalities:
                raise ValueError(f"logic {item!r} needs a modality, e.g. a:{item}")
            specs.extend(parse_logic(item, a) for a in default_modalities)
    return specs
