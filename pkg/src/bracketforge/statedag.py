"""Game-state DAGs and their translation into wide resolution refutations.

A StateDag node is a partial assignment. An internal node queries an index i
and has one edge per symbol of Sigma; the target of edge sigma must be a
sub-assignment of the node's state with i set to sigma. Leaves falsify an
axiom instance.

The translation labels each node with a clause contained in the negation of
its state (under the bit encoding). A query is eliminated bit by bit with a
complete resolution tree over the m variables of block i: the leaves of the
tree are the child clauses (one per codeword) and the garbage clauses of the
wide formula (one per unused code).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .cnf import Encoding
from .core import alphabet, extends, falsified_axiom, support
from .formulas import axiom_clause
from .proofs import ProofBuilder, ProofDag, ProofMetrics, bit_tree


class StateDagError(ValueError):
    def __init__(self, node: int, msg: str):
        super().__init__(f"state node {node}: {msg}")
        self.node = node


@dataclass
class StateNode:
    state: tuple
    query: Optional[int] = None  # None for leaves
    children: dict = field(default_factory=dict)  # Symbol -> node id

    @property
    def is_leaf(self) -> bool:
        return self.query is None


@dataclass
class StateDag:
    n: int
    nodes: list[StateNode] = field(default_factory=list)
    root: int = 0

    def __len__(self):
        return len(self.nodes)

    def node_memory(self, v: int) -> int:
        nd = self.nodes[v]
        supp = set(support(nd.state))
        if nd.query is not None:
            supp.add(nd.query)
        return len(supp)

    def internal_count(self) -> int:
        return sum(not nd.is_leaf for nd in self.nodes)


def _topological(d: StateDag) -> list[int]:
    """Children-first order of the nodes reachable from the root; raises on cycles."""
    order: list[int] = []
    color = [0] * len(d.nodes)  # 0 new, 1 on stack, 2 done
    stack = [(d.root, iter(sorted(set(d.nodes[d.root].children.values()))))]
    color[d.root] = 1
    while stack:
        v, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            stack.pop()
            color[v] = 2
            order.append(v)
            continue
        if not 0 <= nxt < len(d.nodes):
            raise StateDagError(v, f"edge to unknown node {nxt}")
        if color[nxt] == 1:
            raise StateDagError(v, f"cycle through node {nxt}")
        if color[nxt] == 0:
            color[nxt] = 1
            stack.append((nxt, iter(sorted(set(d.nodes[nxt].children.values())))))
    return order


def check_state_dag(n: int, d: StateDag, memory_bound: Optional[int] = None) -> ProofMetrics:
    """Validate d; size counts nodes, width and index-width are the maximal
    support (query included), depth counts edges on the longest path."""
    if d.n != n:
        raise StateDagError(d.root, f"DAG is over n={d.n}, expected {n}")
    if not d.nodes:
        raise StateDagError(0, "empty DAG")
    if any(s is not None for s in d.nodes[d.root].state):
        raise StateDagError(d.root, "root state is not empty")
    sigma = alphabet(n)
    order = _topological(d)
    depth = {}
    iw = 0
    for v in order:
        nd = d.nodes[v]
        if len(nd.state) != n:
            raise StateDagError(v, "state has the wrong length")
        mem = d.node_memory(v)
        if memory_bound is not None and mem > memory_bound:
            raise StateDagError(v, f"support {mem} exceeds declared bound {memory_bound}")
        iw = max(iw, mem)
        if nd.is_leaf:
            if falsified_axiom(nd.state) is None:
                raise StateDagError(v, "leaf does not falsify an axiom")
            depth[v] = 0
            continue
        i = nd.query
        if not 1 <= i <= n:
            raise StateDagError(v, f"query index {i} outside [1, {n}]")
        base = list(nd.state)
        for sym in sigma:
            if sym not in nd.children:
                raise StateDagError(v, f"missing response branch {sym}")
            base[i - 1] = sym
            if not extends(d.nodes[nd.children[sym]].state, base):
                raise StateDagError(v, f"branch {sym} leads to a state that is not a sub-assignment")
        depth[v] = 1 + max(depth[c] for c in nd.children.values())
    return ProofMetrics(len(order), iw, iw, depth[d.root])


def state_dag_to_resolution(n: int, d: StateDag, enc: Optional[Encoding] = None) -> ProofDag:
    """Refutation of gen_bracket_wide(n) whose clauses negate DAG states."""
    enc = enc or Encoding(n)
    b = ProofBuilder()
    label: dict[int, int] = {}
    for v in _topological(d):
        nd = d.nodes[v]
        if nd.is_leaf:
            inst = falsified_axiom(nd.state)
            if inst is None:
                raise StateDagError(v, "leaf does not falsify an axiom")
            label[v] = b.axiom(axiom_clause(enc, inst.axiom, inst.indices, nd.state))
            continue
        i = nd.query

        def leaf(code: int, nd=nd, i=i) -> int:
            sym = enc.decode(code)
            if sym is None:
                return b.axiom(enc.forbid({i: code}))
            return label[nd.children[sym]]

        label[v] = bit_tree(b, enc.block_vars(i), leaf)
    sink = label[d.root]
    if b.clause(sink):
        raise StateDagError(d.root, f"root clause {b.clause(sink)} is not empty")
    return b.finish(sink)
