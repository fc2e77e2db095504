import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import formulas
from modalfilt.errors import ParseError, UnknownModality
from modalfilt.syntax import (
    Atom, BOT, Box, Comp, Converse, Diamond, FormulaSet, Imp, Not, Or, TOP, TransClos, Union,
    Var, And, Dia, parse_formula, parse_formula_set, parse_program, shift_alphabet, size,
    sub_closure, substitute, to_text,
)

A = Atom("a")


def test_parse_diamond():
    assert parse_formula("<a>p1", ["a"]) == Diamond(A, Var(1))


def test_parse_converse_box_shape():
    f = parse_formula("p0 -> [a^-]<a>p0", ["a"])
    assert f == Imp(Var(0), Box(Converse(A), Diamond(A, Var(0))))


def test_unbalanced_bracket_offset():
    with pytest.raises(ParseError) as err:
        parse_formula("<a", ["a"])
    assert err.value.offset == 2


def test_unknown_modality():
    with pytest.raises(UnknownModality):
        parse_formula("<b>p0", ["a"])


def test_precedence():
    p, q, r = Var(0), Var(1), Var(2)
    assert parse_formula("!p0 & p1 | p2 -> p0 -> p1") == Imp(Or(And(Not(p), q), r), Imp(p, q))
    assert parse_formula("<a>p0 & p1", ["a"]) == And(Diamond(A, p), q)


def test_program_precedence():
    b = Atom("b")
    assert parse_program("a;b|a^+^-") == Union(Comp(A, b), Converse(TransClos(A)))
    assert parse_program("a;(b|a)") == Comp(A, Union(b, A))


def test_constants():
    assert parse_formula("false") == BOT
    assert parse_formula("true") == TOP
    assert to_text(TOP) == "true"


def test_formula_set_skips_comments():
    fs = parse_formula_set(["# gamma", "", "p0", "p0", "<a>p2"], ["a"])
    assert list(fs) == [Var(0), Diamond(A, Var(2))]


def test_sub_closure_examples():
    assert sub_closure(Var(0)) == FormulaSet([Var(0)])
    f = Imp(Var(0), Diamond(A, Var(1)))
    assert sub_closure(f) == FormulaSet([f, Var(0), Diamond(A, Var(1)), Var(1)])
    gamma = parse_formula_set(["p0", "p1", "p2", "<a>p2"], ["a"])
    assert gamma.is_sub_closed()
    assert gamma.closure() == gamma


def test_substitute_examples():
    r = Var(2)
    k5 = parse_formula("<a>p0 -> [a]<a>p0", ["a"])
    assert substitute(k5, {0: r}) == parse_formula("<a>p2 -> [a]<a>p2", ["a"])
    assert substitute(Var(0), {}) == Var(0)
    km = Imp(Dia("a", Var(0), 3), Dia("a", Var(0)))
    assert substitute(km, {0: r}) == Imp(Dia("a", r, 3), Dia("a", r))


def test_substitution_is_simultaneous():
    f = Imp(Var(0), Var(1))
    assert substitute(f, {0: Var(1), 1: Var(0)}) == Imp(Var(1), Var(0))


def test_shift_examples():
    k5 = parse_formula("<a>p0 -> [a]<a>p0", ["a"])
    assert shift_alphabet(k5, {"a": "b"}) == parse_formula("<b>p0 -> [b]<b>p0", ["b"])
    assert shift_alphabet(Var(0), {"a": "b"}) == Var(0)
    f = parse_formula("<a;b>p0", ["a", "b"])
    assert shift_alphabet(f, {"a": "c", "b": "d"}) == parse_formula("<c;d>p0", ["c", "d"])


def test_shift_errors():
    f = parse_formula("<a;b>p0", ["a", "b"])
    with pytest.raises(ValueError):
        shift_alphabet(f, {"a": "c"})
    with pytest.raises(ValueError):
        shift_alphabet(f, {"a": "c", "b": "c"})


@given(formulas())
def test_round_trip(f):
    assert parse_formula(to_text(f), ["a", "b"]) == f


@given(formulas())
def test_sub_closure_idempotent_and_bounded(f):
    c = sub_closure(f)
    assert c.is_sub_closed()
    assert c.closure() == c
    assert len(c) <= size(f)


@given(formulas(), formulas())
def test_sub_closure_monotone(f, g):
    whole = sub_closure(Imp(f, g))
    assert all(h in whole for h in sub_closure(f))
    assert all(h in whole for h in sub_closure(g))


@given(formulas())
def test_identity_shift(f):
    assert shift_alphabet(f, {"a": "a", "b": "b"}) == f


@given(st.text(alphabet="p01<>[]a!&|-();^+ ", max_size=12))
def test_parser_never_crashes_unexpectedly(text):
    try:
        parse_formula(text, ["a"])
    except (ParseError, UnknownModality):
        pass
