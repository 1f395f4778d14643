import random

import networkx as nx
import pytest
from conftest import paper_dag, paper_refutation, wide_formula

from bracketforge.cnf import Cnf, Encoding
from bracketforge.core import BracketKind, Symbol, alphabet
from bracketforge.proofs import (
    Node,
    ProofBuilder,
    ProofDag,
    ProofError,
    ResParseError,
    check_refutation,
    depths,
    metrics,
    mutate,
    res_read,
    res_write,
)
from bracketforge.statedag import StateDag, StateDagError, StateNode, check_state_dag, state_dag_to_resolution

CONTRADICTION = Cnf(1, [(1,), (-1,)])
TRIVIAL = ProofDag([Node((1,)), Node((-1,)), Node((), (1, 2), 1)])


def naive_check(f, p):
    """Set-based re-implementation of the resolution rule."""
    axioms = {frozenset(c) for c in f.clauses}
    for k, nd in enumerate(p.nodes, start=1):
        c = frozenset(nd.clause)
        if len(c) != len(nd.clause) or any(-l in c for l in c):
            return False
        if list(nd.clause) != sorted(nd.clause, key=lambda l: (abs(l), l)):
            return False
        if not nd.parents:
            if c not in axioms:
                return False
            continue
        a, b = nd.parents
        if not (1 <= a < k and 1 <= b < k):
            return False
        ca, cb = set(p.nodes[a - 1].clause), set(p.nodes[b - 1].clause)
        x = nd.pivot
        if x not in ca or -x not in cb:
            return False
        res = (ca - {x}) | (cb - {-x})
        if any(-l in res for l in res) or res != c:
            return False
    return bool(p.nodes) and not p.nodes[-1].clause


def nx_depth(p):
    g = nx.DiGraph()
    g.add_nodes_from(range(1, len(p) + 1))
    for k, nd in enumerate(p.nodes, start=1):
        for q in nd.parents:
            g.add_edge(q, k)
    return nx.dag_longest_path_length(g)


# -- checker -------------------------------------------------------------------

def test_trivial_refutation_metrics():
    m = check_refutation(CONTRADICTION, TRIVIAL)
    assert m.as_dict() == {"size": 3, "width": 1, "index_width": 1, "depth": 1}


def test_missing_literal_in_resolvent():
    f = Cnf(2, [(1, 2), (-1, 2), (-2,)])
    p = ProofDag([Node((1, 2)), Node((-1, 2)), Node((), (1, 2), 1)])
    with pytest.raises(ProofError) as exc:
        check_refutation(f, p)
    assert exc.value.node == 3


@pytest.mark.parametrize(
    "nodes, bad",
    [
        ([Node((1,)), Node((-1,)), Node((), (2, 1), 1)], 3),
        ([Node((1,)), Node((-1,)), Node((), (1, 3), 1)], 3),
        ([Node((1,)), Node((2,)), Node((), (1, 2), 1)], 2),
        ([Node((1,)), Node((-1,))], 2),
        ([Node((1,)), Node((-1,)), Node((), (1, 2), 2)], 3),
    ],
)
def test_checker_pinpoints_node(nodes, bad):
    with pytest.raises(ProofError) as exc:
        check_refutation(Cnf(2, [(1,), (-1,)]), ProofDag(nodes))
    assert exc.value.node == bad


def test_empty_proof_rejected():
    with pytest.raises(ProofError):
        check_refutation(CONTRADICTION, ProofDag())


def test_builder_reuses_clauses_and_skips_missing_pivots():
    b = ProofBuilder()
    x = b.axiom((1, 2))
    assert b.axiom((2, 1)) == x
    y = b.axiom((-1,))
    z = b.resolve(x, y, 1)
    assert b.clause(z) == (2,)
    assert b.resolve(z, y, 1) == z


# -- RES format ----------------------------------------------------------------

def test_res_trivial_text():
    assert res_write(TRIVIAL) == b"a 1 0\na -1 0\nr 1 2 1 0\n"
    assert res_read(res_write(TRIVIAL)) == TRIVIAL


def test_res_truncated_file():
    with pytest.raises(ResParseError) as exc:
        res_read("a 1 0\na -1 0\nr 1 2 1")
    assert exc.value.line == 3


@pytest.mark.parametrize("text", ["a 1\n", "q 1 0\n", "r 1 2 0\n", "a 1 x 0\n", "\n", "a 1 0 2 0\n"])
def test_res_parse_errors(text):
    with pytest.raises(ResParseError):
        res_read(text)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_res_round_trip_generated(n):
    p = paper_refutation(n)
    data = res_write(p)
    assert res_read(data) == p
    assert res_write(res_read(data)) == data


# -- depth: two-algorithm agreement --------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_depth_matches_networkx(n):
    p = paper_refutation(n)
    assert metrics(p).depth == nx_depth(p)
    assert max(depths(p)) == nx_depth(p)


# -- mutation harness ----------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3])
def test_mutants_rejected_and_oracle_agrees(n):
    f, p = wide_formula(n), paper_refutation(n)
    assert naive_check(f, p)
    rng = random.Random(n)
    for _ in range(200):
        q, what = mutate(p, rng, f.num_vars)
        assert q != p
        assert not naive_check(f, q), what
        with pytest.raises(ProofError):
            check_refutation(f, q)


# -- state DAGs ----------------------------------------------------------------

def n1_dag():
    root = StateNode((None,), 1)
    d = StateDag(1, [root])
    for sym in alphabet(1):
        d.nodes.append(StateNode((sym,)))
        root.children[sym] = len(d.nodes) - 1
    return d


def test_n1_dag_accepted():
    m = check_state_dag(1, n1_dag())
    assert (m.size, m.index_width, m.depth) == (7, 1, 1)


def test_n1_dag_translation():
    p = state_dag_to_resolution(1, n1_dag())
    check_refutation(wide_formula(1), p)


def test_missing_branch_reported():
    d = n1_dag()
    del d.nodes[0].children[Symbol(BracketKind.TR, 1)]
    with pytest.raises(StateDagError, match="missing response branch"):
        check_state_dag(1, d)


def test_leaf_must_falsify():
    d = StateDag(2, [StateNode((None, None))])
    with pytest.raises(StateDagError, match="does not falsify"):
        check_state_dag(2, d)


def test_memory_bound_enforced():
    with pytest.raises(StateDagError, match="exceeds"):
        check_state_dag(3, paper_dag(3), memory_bound=1)


def test_edge_must_be_sub_assignment():
    d = n1_dag()
    tr = Symbol(BracketKind.TR, 1)
    d.nodes[0].children[tr] = d.nodes[0].children[Symbol(BracketKind.TB, 1)]
    with pytest.raises(StateDagError, match="sub-assignment"):
        check_state_dag(1, d)


def test_cycle_detected():
    d = StateDag(2, [StateNode((None, None), 1)])
    for sym in alphabet(2):
        d.nodes[0].children[sym] = 0
    with pytest.raises(StateDagError, match="cycle"):
        check_state_dag(2, d)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_translation_preserves_index_width(n):
    d = paper_dag(n)
    dm = check_state_dag(n, d)
    pm = check_refutation(wide_formula(n), paper_refutation(n))
    assert pm.index_width == dm.index_width
    assert pm.width <= Encoding(n).m * dm.index_width
