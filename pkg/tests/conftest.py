import sys
from pathlib import Path

import pytest
from hypothesis import settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from modalfilt.kripke import Model
from modalfilt.syntax import (
    Atom, BOT, Comp, Converse, Diamond, Imp, TransClos, Union, Var, parse_formula_set,
)

settings.register_profile("default", max_examples=150, deadline=None)
settings.load_profile("default")

DATA = Path(__file__).parent / "data"

E1_NAMES = ["x", "y", "y'", "z", "u"]


@pytest.fixture
def e1():
    return Model.build(E1_NAMES, {"a": [(0, 1), (2, 3), (3, 4)]}, {0: [0], 1: [1, 2], 2: [4]})


@pytest.fixture
def e1_gamma():
    return parse_formula_set(["p0", "p1", "p2", "<a>p2"], ["a"])


def programs(atoms=("a", "b")):
    return st.recursive(
        st.sampled_from(atoms).map(Atom),
        lambda sub: st.one_of(
            st.builds(Union, sub, sub), st.builds(Comp, sub, sub),
            st.builds(TransClos, sub), st.builds(Converse, sub)),
        max_leaves=4)


def formulas(atoms=("a", "b"), n_vars=3, compound=True):
    progs = programs(atoms) if compound else st.sampled_from(atoms).map(Atom)
    leaves = st.one_of(st.just(BOT), st.integers(0, n_vars - 1).map(Var))
    return st.recursive(
        leaves,
        lambda sub: st.one_of(st.builds(Imp, sub, sub),
                              st.builds(Diamond, progs, sub)),
        max_leaves=8)


@st.composite
def models(draw, max_states=5, atoms=("a", "b"), n_vars=3):
    n = draw(st.integers(1, max_states))
    cell = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
    rels = {a: draw(st.lists(cell, max_size=n * n)) for a in atoms}
    val = {p: draw(st.lists(st.integers(0, n - 1), max_size=n)) for p in range(n_vars)}
    return Model.build(n, rels, val)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
