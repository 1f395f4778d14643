import itertools

import hypothesis.strategies as st
import pytest
from hypothesis import given, settings

from bracketforge.core import (
    BracketKind,
    BruteForceCapError,
    Symbol,
    all_falsified,
    alphabet,
    contains_transition,
    enumerate_satisfying,
    falsified_at,
    falsified_axiom,
    force_mates,
    format_assignment,
    from_pairs,
    is_well_formed_pairing,
    locally_consistent,
    parse_assignment,
    satisfies_a1,
)

K = BracketKind


def S(kind, p):
    return Symbol(K[kind], p)


def bracket_string(text):
    """Turn '[r [b ]b ]r' style text into symbols with pointers from a stack match."""
    toks = text.split()
    out = [None] * len(toks)
    stack = []
    for i, tok in enumerate(toks, start=1):
        ch, col = tok[0], tok[1].upper()
        if ch == "[":
            stack.append((i, col))
        else:
            j, c = stack.pop()
            assert c == col
            out[j - 1] = S("O" + col, i)
            out[i - 1] = S("C" + col, j)
    assert not stack
    return tuple(out)


# -- falsified_axiom ---------------------------------------------------------

def test_n1_open_red_violates_a1():
    inst = falsified_axiom((S("OR", 1),))
    assert inst.axiom == 1 and inst.indices == (1,)


def test_single_matched_pair_is_clean():
    rho = from_pairs(6, {3: S("OR", 5), 5: S("CR", 3)})
    assert falsified_axiom(rho) is None


def test_red_close_then_trivial_blue_hits_a4():
    rho = from_pairs(3, {1: S("OR", 2), 2: S("CR", 1), 3: S("TB", 3)})
    inst = falsified_axiom(rho)
    assert inst.axiom == 4 and inst.indices == (2, 3)


def test_crossing_pairs_hit_a3():
    rho = from_pairs(4, {1: S("OR", 3), 2: S("OB", 4), 3: S("CR", 1), 4: S("CB", 2)})
    assert any(a.axiom == 3 and a.indices == (1, 2, 3, 4) for a in all_falsified(rho))


def test_self_pointing_open_hits_a2():
    rho = from_pairs(3, {2: S("OR", 2)})
    assert falsified_axiom(rho).axiom == 2


def test_one_sided_pointer_hits_a2():
    rho = from_pairs(3, {1: S("OR", 3), 3: S("CR", 2)})
    assert 2 in {a.axiom for a in all_falsified(rho)}


# -- enumerate_satisfying ----------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_no_string_satisfies_all_axioms(n):
    count, found = enumerate_satisfying(n)
    assert count == 0 and found == []


@pytest.mark.parametrize("n", [1, 2, 3])
def test_enumeration_matches_plain_product(n):
    # independent oracle: every (6n)^n string, checked with the full scan
    naive = sum(1 for s in itertools.product(alphabet(n), repeat=n) if not all_falsified(s))
    assert naive == enumerate_satisfying(n)[0] == 0


def test_a1_to_a3_alone_are_satisfiable():
    s = bracket_string("[r ]r [b ]b")
    assert not all_falsified(s, axioms=(1, 2, 3))
    assert all_falsified(s, axioms=(4,))


def test_enumeration_cap():
    with pytest.raises(BruteForceCapError):
        enumerate_satisfying(9)


# -- contains_transition / well-formedness -----------------------------------

def test_example_string_transition():
    s = bracket_string(
        "[r [b [r ]r ]b [r ]r ]r [r ]r [r [b [r [b ]b [b ]b ]r ]b ]r "
        "[b [r [b [b ]b ]b ]r ]b [b [b ]b [b ]b ]b"
    )
    assert is_well_formed_pairing(s) and satisfies_a1(s)
    assert contains_transition(s) == 20


def test_two_trivial_reds_have_no_transition():
    assert contains_transition((S("TR", 1), S("TR", 2))) is None


def test_trivial_red_then_trivial_blue():
    assert contains_transition((S("TR", 1), S("TB", 2))) == 1


def test_well_formed_examples():
    assert is_well_formed_pairing((S("OR", 2), S("CR", 1)))
    assert not is_well_formed_pairing((S("OR", 3), S("OB", 4), S("CR", 1), S("CB", 2)))
    assert not is_well_formed_pairing((S("OR", 2), S("CB", 1)))


def test_well_formed_needs_full_string():
    with pytest.raises(ValueError):
        is_well_formed_pairing((S("TR", 1), None))


# -- text format -------------------------------------------------------------

def test_text_round_trip():
    rho = from_pairs(4, {1: S("OR", 4), 4: S("CR", 1), 2: S("TB", 2)})
    text = format_assignment(rho)
    assert text == "OR:4 TB:2 * CR:1"
    assert parse_assignment(text) == rho


@pytest.mark.parametrize("bad", ["XX:1", "OR:9", "OR", "OR:x"])
def test_text_rejects_bad_tokens(bad):
    with pytest.raises(ValueError):
        parse_assignment(f"* {bad} *")


# -- properties --------------------------------------------------------------

def partial_assignments(max_n=5):
    def build(n):
        cell = st.one_of(st.none(), st.builds(Symbol, st.sampled_from(list(K)), st.integers(1, n)))
        return st.lists(cell, min_size=n, max_size=n).map(tuple)

    return st.integers(1, max_n).flatmap(build)


@given(partial_assignments())
@settings(max_examples=300, deadline=None)
def test_falsified_at_agrees_with_full_scan(rho):
    insts = all_falsified(rho)
    for i in range(1, len(rho) + 1):
        expect = any(i in a.indices for a in insts)
        assert falsified_at(rho, i) == expect


@given(partial_assignments(), st.data())
@settings(max_examples=200, deadline=None)
def test_falsification_is_monotone(rho, data):
    # extending a falsified state never repairs it
    if falsified_axiom(rho) is None:
        return
    holes = [i for i, s in enumerate(rho) if s is None]
    ext = list(rho)
    for i in holes:
        ext[i] = data.draw(st.sampled_from(alphabet(len(rho))))
    assert falsified_axiom(tuple(ext)) is not None


@given(partial_assignments(4))
@settings(max_examples=200, deadline=None)
def test_locally_consistent_means_forced_mates_are_clean(rho):
    forced = force_mates(rho)
    if locally_consistent(rho):
        assert forced is not None and not all_falsified(forced, axioms=(1, 2, 3))
    elif forced is not None:
        assert all_falsified(forced, axioms=(1, 2, 3))
