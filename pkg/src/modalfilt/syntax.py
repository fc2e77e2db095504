"""Formulas and test-free programs with converse.

Formulas are stored over the primitive basis ``false``, ``p_i``, ``->`` and
``<e>``; negation, conjunction, disjunction, ``true`` and boxes are built by
the helper constructors below and recovered again by the printer.

Concrete ASCII grammar::

    formula := "false" | "true" | VAR | "!" formula | formula "&" formula
             | formula "|" formula | formula "->" formula
             | "<" prog ">" formula | "[" prog "]" formula | "(" formula ")"
    prog    := NAME | prog ";" prog | prog "|" prog | prog "^+" | prog "^-"
             | "(" prog ")"

Precedence is ``!``/modal prefixes > ``&`` > ``|`` > ``->`` (right
associative); inside programs postfix operators > ``;`` > ``|``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
import typing
from typing import Iterable, Iterator, Mapping

from .errors import ParseError, UnknownModality

# ---------------------------------------------------------------- programs


@dataclass(frozen=True, slots=True)
class Atom:
    name: str


@dataclass(frozen=True, slots=True)
class Union:
    left: Program
    right: Program


@dataclass(frozen=True, slots=True)
class Comp:
    left: Program
    right: Program


@dataclass(frozen=True, slots=True)
class TransClos:
    body: Program


@dataclass(frozen=True, slots=True)
class Converse:
    body: Program


Program = typing.Union[Atom, Union, Comp, TransClos, Converse]

# ---------------------------------------------------------------- formulas


@dataclass(frozen=True, slots=True)
class Bot:
    pass


@dataclass(frozen=True, slots=True)
class Var:
    index: int


@dataclass(frozen=True, slots=True)
class Imp:
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Diamond:
    program: Program
    body: Formula


Formula = typing.Union[Bot, Var, Imp, Diamond]

BOT = Bot()
TOP = Imp(BOT, BOT)


def Not(f: Formula) -> Formula:
    return Imp(f, BOT)


def And(a: Formula, b: Formula) -> Formula:
    return Not(Imp(a, Not(b)))


def Or(a: Formula, b: Formula) -> Formula:
    return Imp(Not(a), b)


def Box(program: Program | str, f: Formula) -> Formula:
    return Not(Diamond(_prog(program), Not(f)))


def Dia(program: Program | str, f: Formula, times: int = 1) -> Formula:
    """``<program>`` applied ``times`` times."""
    program = _prog(program)
    for _ in range(times):
        f = Diamond(program, f)
    return f


def conj(fs: Iterable[Formula]) -> Formula:
    out = None
    for f in fs:
        out = f if out is None else And(out, f)
    return TOP if out is None else out


def disj(fs: Iterable[Formula]) -> Formula:
    out = None
    for f in fs:
        out = f if out is None else Or(out, f)
    return BOT if out is None else out


def _prog(p: Program | str) -> Program:
    return Atom(p) if isinstance(p, str) else p


# ------------------------------------------------------ structural helpers


def program_atoms(e: Program) -> set[str]:
    match e:
        case Atom(name):
            return {name}
        case Union(l, r) | Comp(l, r):
            return program_atoms(l) | program_atoms(r)
        case TransClos(b) | Converse(b):
            return program_atoms(b)
    raise TypeError(e)


def program_depth(e: Program) -> int:
    match e:
        case Atom():
            return 0
        case Union(l, r) | Comp(l, r):
            return 1 + max(program_depth(l), program_depth(r))
        case TransClos(b) | Converse(b):
            return 1 + program_depth(b)
    raise TypeError(e)


def subterms(f: Formula) -> Iterator[Formula]:
    """Pre-order walk over every subformula occurrence."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, Imp):
            stack.append(g.right)
            stack.append(g.left)
        elif isinstance(g, Diamond):
            stack.append(g.body)


def variables(f: Formula) -> set[int]:
    return {g.index for g in subterms(f) if isinstance(g, Var)}


def modalities(f: Formula) -> set[str]:
    out: set[str] = set()
    for g in subterms(f):
        if isinstance(g, Diamond):
            out |= program_atoms(g.program)
    return out


def size(f: Formula) -> int:
    return sum(1 for _ in subterms(f))


def is_atomic_modal(f: Formula) -> bool:
    """True when every diamond in ``f`` is labelled by an atomic program."""
    return all(isinstance(g.program, Atom) for g in subterms(f) if isinstance(g, Diamond))


# ------------------------------------------------------------ formula sets


class FormulaSet:
    """Finite duplicate-free collection of formulas, kept in insertion order."""

    __slots__ = ("_items", "_members")

    def __init__(self, formulas: Iterable[Formula] = ()):
        items: list[Formula] = []
        seen: set[Formula] = set()
        for f in formulas:
            if f not in seen:
                seen.add(f)
                items.append(f)
        self._items = tuple(items)
        self._members = frozenset(seen)

    def __iter__(self) -> Iterator[Formula]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, f: object) -> bool:
        return f in self._members

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FormulaSet):
            return NotImplemented
        return self._members == other._members

    def __hash__(self) -> int:
        return hash(self._members)

    def __or__(self, other: Iterable[Formula]) -> FormulaSet:
        return FormulaSet((*self._items, *other))

    def __repr__(self) -> str:
        return "{" + ", ".join(map(to_text, self._items)) + "}"

    def closure(self) -> FormulaSet:
        out: list[Formula] = []
        for f in self._items:
            out.extend(sub_closure(f))
        return FormulaSet(out)

    def is_sub_closed(self) -> bool:
        return all(g in self._members for f in self._items for g in subterms(f))

    def variables(self) -> set[int]:
        return set().union(*(variables(f) for f in self._items))

    def modalities(self) -> set[str]:
        return set().union(*(modalities(f) for f in self._items))

    def diamonds(self, modality: str) -> list[Formula]:
        """Bodies ``psi`` of the members ``<modality>psi``."""
        return [f.body for f in self._items
                if isinstance(f, Diamond) and f.program == Atom(modality)]

    def canonical(self) -> tuple[Formula, ...]:
        """Deterministic order: by size, then by printed form."""
        return tuple(sorted(self._items, key=lambda f: (size(f), to_text(f))))


def sub_closure(f: Formula) -> FormulaSet:
    """Sub(f): every subformula of ``f`` in the primitive basis."""
    return FormulaSet(subterms(f))


# ------------------------------------------------------------ substitution


def substitute(f: Formula, sigma: Mapping[int, Formula]) -> Formula:
    """Simultaneous substitution of formulas for variables."""
    memo: dict[int, Formula] = {}

    def go(g: Formula) -> Formula:
        key = id(g)
        if key in memo:
            return memo[key]
        match g:
            case Var(i):
                out = sigma.get(i, g)
            case Imp(l, r):
                out = Imp(go(l), go(r))
            case Diamond(e, b):
                out = Diamond(e, go(b))
            case _:
                out = g
        memo[key] = out
        return out

    return go(f)


def rename_program(e: Program, renaming: Mapping[str, str]) -> Program:
    match e:
        case Atom(name):
            if name not in renaming:
                raise UnknownModality(name)
            return Atom(renaming[name])
        case Union(l, r):
            return Union(rename_program(l, renaming), rename_program(r, renaming))
        case Comp(l, r):
            return Comp(rename_program(l, renaming), rename_program(r, renaming))
        case TransClos(b):
            return TransClos(rename_program(b, renaming))
        case Converse(b):
            return Converse(rename_program(b, renaming))
    raise TypeError(e)


def shift_alphabet(f: Formula, renaming: Mapping[str, str]) -> Formula:
    """Rename every program atom of ``f``; raises for atoms missing from the map."""
    used = modalities(f)
    targets = [renaming[a] for a in used if a in renaming]
    if len(set(targets)) != len(targets):
        raise ValueError("renaming is not injective on the atoms of the formula")
    memo: dict[int, Formula] = {}

    def go(g: Formula) -> Formula:
        key = id(g)
        if key in memo:
            return memo[key]
        match g:
            case Imp(l, r):
                out = Imp(go(l), go(r))
            case Diamond(e, b):
                out = Diamond(rename_program(e, renaming), go(b))
            case _:
                out = g
        memo[key] = out
        return out

    return go(f)


# ---------------------------------------------------------------- printing

_IMP, _OR, _AND, _UNARY = 1, 2, 3, 4


def program_text(e: Program, level: int = 0) -> str:
    # levels: 0 union, 1 composition, 2 postfix
    match e:
        case Atom(name):
            return name
        case Union(l, r):
            s = f"{program_text(l, 0)}|{program_text(r, 1)}"
            return f"({s})" if level > 0 else s
        case Comp(l, r):
            s = f"{program_text(l, 1)};{program_text(r, 2)}"
            return f"({s})" if level > 1 else s
        case TransClos(b):
            return f"{program_text(b, 2)}^+"
        case Converse(b):
            return f"{program_text(b, 2)}^-"
    raise TypeError(e)


def to_text(f: Formula, level: int = 0) -> str:
    """Print ``f`` in the concrete grammar, folding derived connectives back."""
    match f:
        case Bot():
            return "false"
        case Var(i):
            return f"p{i}"
        case Imp(Bot(), Bot()):
            return "true"
        case Imp(Imp(a, Imp(b, Bot())), Bot()):
            s = f"{to_text(a, _AND)} & {to_text(b, _UNARY)}"
            return f"({s})" if level > _AND else s
        case Imp(Diamond(e, Imp(b, Bot())), Bot()):
            return f"[{program_text(e)}]{to_text(b, _UNARY)}"
        case Imp(a, Bot()):
            return f"!{to_text(a, _UNARY)}"
        case Imp(Imp(a, Bot()), b):
            s = f"{to_text(a, _OR)} | {to_text(b, _AND)}"
            return f"({s})" if level > _OR else s
        case Imp(a, b):
            s = f"{to_text(a, _OR)} -> {to_text(b, _IMP)}"
            return f"({s})" if level > _IMP else s
        case Diamond(e, b):
            return f"<{program_text(e)}>{to_text(b, _UNARY)}"
    raise TypeError(f)


# ----------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(->|\^\+|\^-|[()<>\[\]!&|;])|([a-z][a-z0-9_]*))")
_VAR = re.compile(r"p(\d+)")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(1) if m.group(1) else m.start(2)
        tokens.append((m.group(1) or m.group(2), start))
        pos = m.end()
    tokens.append(("", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, alphabet: Iterable[str] | None):
        self.tokens = _tokenize(text)
        self.i = 0
        self.alphabet = None if alphabet is None else set(alphabet)

    @property
    def tok(self) -> str:
        return self.tokens[self.i][0]

    @property
    def pos(self) -> int:
        return self.tokens[self.i][1]

    def expect(self, tok: str) -> None:
        if self.tok != tok:
            found = repr(self.tok) if self.tok else "end of input"
            raise ParseError(f"expected {tok!r}, found {found}", self.pos)
        self.i += 1

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.tok == "->":
            self.i += 1
            return Imp(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.tok == "|":
            self.i += 1
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.tok == "&":
            self.i += 1
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        tok = self.tok
        if tok == "!":
            self.i += 1
            return Not(self.unary())
        if tok == "<":
            self.i += 1
            e = self.program()
            self.expect(">")
            return Diamond(e, self.unary())
        if tok == "[":
            self.i += 1
            e = self.program()
            self.expect("]")
            return Box(e, self.unary())
        if tok == "(":
            self.i += 1
            f = self.formula()
            self.expect(")")
            return f
        if tok == "true":
            self.i += 1
            return TOP
        if tok == "false":
            self.i += 1
            return BOT
        m = _VAR.fullmatch(tok)
        if m:
            self.i += 1
            return Var(int(m.group(1)))
        found = repr(tok) if tok else "end of input"
        raise ParseError(f"expected a formula, found {found}", self.pos)

    def program(self) -> Program:
        e = self.composition()
        while self.tok == "|":
            self.i += 1
            e = Union(e, self.composition())
        return e

    def composition(self) -> Program:
        e = self.postfix()
        while self.tok == ";":
            self.i += 1
            e = Comp(e, self.postfix())
        return e

    def postfix(self) -> Program:
        e = self.program_atom()
        while self.tok in ("^+", "^-"):
            e = TransClos(e) if self.tok == "^+" else Converse(e)
            self.i += 1
        return e

    def program_atom(self) -> Program:
        tok = self.tok
        if tok == "(":
            self.i += 1
            e = self.program()
            self.expect(")")
            return e
        if tok and tok[0].isalpha() and not _VAR.fullmatch(tok) and tok not in ("true", "false"):
            if self.alphabet is not None and tok not in self.alphabet:
                raise UnknownModality(tok)
            self.i += 1
            return Atom(tok)
        found = repr(tok) if tok else "end of input"
        raise ParseError(f"expected a program, found {found}", self.pos)


def parse_formula(text: str, alphabet: Iterable[str] | None = None) -> Formula:
    """Parse ``text``; when ``alphabet`` is given, program atoms must belong to it."""
    p = _Parser(text, alphabet)
    f = p.formula()
    if p.tok:
        raise ParseError(f"unexpected {p.tok!r}", p.pos)
    return f


def parse_program(text: str, alphabet: Iterable[str] | None = None) -> Program:
    p = _Parser(text, alphabet)
    e = p.program()
    if p.tok:
        raise ParseError(f"unexpected {p.tok!r}", p.pos)
    return e


def parse_formula_set(lines: Iterable[str], alphabet: Iterable[str] | None = None) -> FormulaSet:
    """One formula per line; blank lines and ``#`` comments are skipped."""
    alphabet = None if alphabet is None else list(alphabet)
    out = []
    for line in lines:
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(parse_formula(line, alphabet))
    return FormulaSet(out)
