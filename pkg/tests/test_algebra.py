import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import formulas, models
from modalfilt.algebra import definable_algebra, fails_under, model_validates, validate
from modalfilt.errors import CapExceeded
from modalfilt.kripke import Model, truth_set
from modalfilt.syntax import Dia, Imp, Var, parse_formula

KM3 = Imp(Dia("a", Var(0), 3), Dia("a", Var(0)))


def naive_carrier(model, vars):
    """Fixpoint of rounds applying every operation to every pair of current sets."""
    n = model.n
    full = frozenset(range(n))
    sets = {frozenset(), full}
    sets |= {frozenset(x for x in range(n) if model.valuation.get(p, 0) >> x & 1) for p in vars}
    pairs = {a: oracles.pairs_of(model, a) for a in model.alphabet}
    while True:
        nxt = set(sets)
        for s in sets:
            nxt.add(full - s)
            for a, r in pairs.items():
                nxt.add(frozenset(x for x, y in r if y in s))
        for s, t in itertools.product(sets, repeat=2):
            nxt.add(s & t)
        if nxt == sets:
            return {sum(1 << x for x in s) for s in sets}
        sets = nxt


def test_two_element_algebra():
    m = Model.build(["s"], {"a": []}, {0: [0]})
    assert definable_algebra(m).elements() == [0, 1]


def test_e1_contains_preimage(e1):
    alg = definable_algebra(e1, [0, 1, 2])
    z, u = 1 << 3, 1 << 4
    assert alg.diamond("a", u) == z
    assert z in alg


def test_no_generators():
    m = Model.build(3, {"a": [(0, 1)]})
    alg = definable_algebra(m, [])
    assert set(alg.elements()) == naive_carrier(m, [])
    assert {0, 0b111} <= set(alg.elements())


def test_e1_validates_km3(e1):
    assert model_validates(e1, [KM3])


def test_e1_chain_quotient_fails_km3():
    chain = Model.build(["[x]", "[y]", "[z]", "[u]"], {"a": [(0, 1), (1, 2), (2, 3)]},
                        {0: [0], 1: [1], 2: [3]})
    v = validate(chain, [KM3])
    assert not v.ok
    assert v.assignment == {0: 1 << 3}
    assert fails_under(chain, KM3, {0: 1 << 3})


def test_empty_axioms(e1):
    assert model_validates(e1, [])


def test_cap_is_reported(e1):
    with pytest.raises(CapExceeded) as err:
        validate(e1, [KM3], cap=3)
    assert err.value.reached == 32


@given(models(max_states=5, n_vars=2))
def test_carrier_matches_naive_closure(m):
    assert set(definable_algebra(m).elements()) == naive_carrier(m, [0, 1])


@given(models(max_states=5, n_vars=2), formulas(n_vars=2, compound=False))
def test_truth_sets_are_carrier_members(m, f):
    assert truth_set(m, f) in definable_algebra(m)


@given(models(max_states=4, atoms=("a",), n_vars=2), st.sampled_from([
    "<a><a><a>p0 -> <a>p0", "<a>p0 -> [a]<a>p0", "p0 -> <a>p0", "<a><a>p0 -> <a>p0 | p0",
    "<a>(p0 & p1) -> <a>p0 & [a]p1",
]))
def test_validates_matches_carrier_substitution(m, text):
    ax = parse_formula(text, ["a"])
    vs = sorted(v for v in range(2) if f"p{v}" in text)
    carrier = sorted(naive_carrier(m, [0, 1]))
    expected = all(oracles.globally(m, ax, dict(zip(vs, combo)))
                   for combo in itertools.product(carrier, repeat=len(vs)))
    assert model_validates(m, [ax]) == expected


@given(models(max_states=4, atoms=("a",), n_vars=2), st.data())
def test_subalgebra_monotonicity(m, data):
    ax = parse_formula("<a><a>p0 -> <a>p0 | p0", ["a"])
    if not model_validates(m, [ax]):
        return
    elems = definable_algebra(m).elements()
    new_val = {p: data.draw(st.sampled_from(elems)) for p in range(2)}
    assert model_validates(m.with_valuation(new_val), [ax])
