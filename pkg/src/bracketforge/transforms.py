"""Proof transformations.

wide_to_narrow
    Translates a refutation of the wide formula into one of the extension
    (narrow) formula. A wide clause D is represented by the positive clause
    tau(D) holding one y_{D_j} for each block j of D, where D_j is the part
    of D on block j.

narrow_to_strategy
    Turns a narrow refutation back into a prover for the Sigma-game. The
    prover walks from the empty clause toward an axiom, keeping a state rho
    under which the current clause is false (a y_C counts as true, false or
    undetermined according to C restricted by rho).

lift_refutation
    Lifts a refutation of F to one of F composed with the indexing gadget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .cnf import Clause, Cnf, Encoding, ExtVar, make_clause
from .formulas import (
    GadgetLayout,
    IndexGadgetSpec,
    NarrowSupport,
    compose_with_index_gadget,
    gen_bracket_narrow,
    gen_bracket_wide,
    narrow_ids,
    split_by_block,
)
from .game import Forget, GameView, ProverStrategy, Query
from .proofs import ProofBuilder, ProofDag, bit_tree, check_refutation


class TransformError(ValueError):
    pass


# -- wide -> narrow --------------------------------------------------------

class _Keys:
    """Maps extension keys to variable ids, recording what is used."""

    def __init__(self, ids: Optional[dict] = None):
        self.fixed = ids
        self.provisional: dict = {}
        self.support = NarrowSupport()

    def var(self, key: Clause) -> int:
        self.support.add_key(key)
        if self.fixed is not None:
            if key not in self.fixed:
                raise TransformError(f"extension key {key} missing from the target formula")
            return self.fixed[key]
        return self.provisional.setdefault(key, len(self.provisional) + 1)

    def decomposition(self, d: Clause, a: Clause, b: Clause) -> None:
        self.support.add_decomposition(d, a, b)


def _tau(keys: _Keys, clause: Clause, m: int) -> list[int]:
    return [keys.var(part) for part in split_by_block(clause, m).values()]


class _WideToNarrow:
    def __init__(self, wide_proof: ProofDag, m: int, keys: _Keys):
        self.p = wide_proof
        self.m = m
        self.keys = keys
        self.b = ProofBuilder()

    # small derivations -----------------------------------------------------

    def _split(self, node: int, key: Clause, first: Clause) -> int:
        """node contains +y_key; replace it by y_first v y_rest."""
        rest = tuple(l for l in key if l not in first)
        if not rest:
            return node
        self.keys.decomposition(key, first, rest)
        yd, ya, yb = self.keys.var(key), self.keys.var(first), self.keys.var(rest)
        ax = self.b.axiom((-yd, ya, yb))
        return self.b.resolve(node, ax, yd)

    def _expand_axiom(self, d: Clause) -> int:
        node = self.b.axiom((self.keys.var(d),))
        parts = list(split_by_block(d, self.m).values())
        cur = d
        for part in parts[:-1]:
            node = self._split(node, cur, part)
            cur = tuple(l for l in cur if l not in part)
        return node

    def _absorb(self, node: int, small: Clause, big: Clause) -> int:
        """node contains +y_small with small a proper subset of big; turn it into y_big."""
        other = tuple(l for l in big if l not in small)
        self.keys.decomposition(big, small, other)
        ys, yb = self.keys.var(small), self.keys.var(big)
        return self.b.resolve(node, self.b.axiom((-ys, yb)), ys)

    def _merge(self, node: int, a: Clause, bpart: Clause) -> int:
        """node contains y_a and y_bpart from one block; leave y_{a u bpart}."""
        if a == bpart:
            return node
        union = make_clause(set(a) | set(bpart))
        if union == a:
            return self._absorb(node, bpart, a)
        if union == bpart:
            return self._absorb(node, a, bpart)
        self.keys.decomposition(union, a, bpart)
        node = self._absorb(node, a, union)
        return self._absorb(node, bpart, union)

    # main ----------------------------------------------------------------------

    def run(self) -> int:
        label: list[int] = []
        m = self.m
        for nd in self.p.nodes:
            if nd.is_axiom:
                label.append(self._expand_axiom(nd.clause))
                continue
            p1, p2 = (self.p.node(q) for q in nd.parents)
            x = nd.pivot
            blk = (x - 1) // m + 1
            n1, n2 = label[nd.parents[0] - 1], label[nd.parents[1] - 1]
            part1 = split_by_block(p1.clause, m)[blk]
            part2 = split_by_block(p2.clause, m)[blk]
            n1 = self._split(n1, part1, (x,))
            n2 = self._split(n2, part2, (-x,))
            yx, ynx = self.keys.var((x,)), self.keys.var((-x,))
            excl = self.b.axiom((-yx, -ynx))
            half = self.b.resolve(n1, excl, yx)
            node = self.b.resolve(n2, half, ynx)
            rest1 = split_by_block(tuple(l for l in p1.clause if l != x), m)
            rest2 = split_by_block(tuple(l for l in p2.clause if l != -x), m)
            for j in sorted(set(rest1) & set(rest2)):
                node = self._merge(node, rest1[j], rest2[j])
            label.append(node)
        return label[-1]


@dataclass
class NarrowResult:
    proof: ProofDag
    formula: Cnf
    support: NarrowSupport


def wide_to_narrow(
    p: ProofDag,
    n: int,
    k: int = 4,
    wide: Optional[Cnf] = None,
    target: Optional[Cnf] = None,
) -> NarrowResult:
    """Narrow refutation of gen_bracket_narrow(n, k) in support mode (or of
    `target`, e.g. a full-mode formula, when given)."""
    m = Encoding(n).m
    first = _Keys()
    sink = _WideToNarrow(p, m, first).run()
    if first.provisional and max(len(split_by_block(key, m)) for key in first.provisional) > k:
        raise TransformError(f"proof needs extension keys of index-width above {k}")
    del sink
    if target is None:
        target = gen_bracket_narrow(n, k, "support", support=first.support, wide=wide)
    keys = _Keys(narrow_ids(target))
    tr = _WideToNarrow(p, m, keys)
    sink = tr.run()
    if tr.b.clause(sink):
        raise TransformError(f"translated sink {tr.b.clause(sink)} is not empty")
    return NarrowResult(tr.b.finish(sink), target, keys.support)


# -- narrow -> strategy ----------------------------------------------------

class ProverStuck(RuntimeError):
    pass


class NarrowProofProver(ProverStrategy):
    """Walks a narrow refutation from the sink toward an axiom."""

    name = "fromproof"

    def __init__(self, p: ProofDag, f: Cnf, n: int, check: bool = True):
        if check:
            check_refutation(f, p)
            wide = gen_bracket_wide(n)
            for c in f.clauses:
                if len(c) == 1 and c[0] > 0 and isinstance(f.meta.get(c[0]), ExtVar):
                    if not wide.contains(f.meta[c[0]].key):
                        raise TransformError(f"axiom y_{f.meta[c[0]].key} is not a wide clause for n={n}")
        self.p = p
        self.n = n
        self.enc = Encoding(n)
        self.keys = {v: meta.key for v, meta in f.meta.items() if isinstance(meta, ExtVar)}
        self.node = len(p.nodes)
        self.pending: Optional[int] = None  # pivot variable being evaluated

    def fingerprint(self):
        return (self.node, self.pending)

    def _value(self, view: GameView, key: Clause) -> Optional[bool]:
        """Truth value of the wide clause `key` under the view (None if open)."""
        m = self.enc.m
        undecided = False
        for l in key:
            i, bit = (abs(l) - 1) // m + 1, (abs(l) - 1) % m
            s = view.get(i)
            if s is None:
                undecided = True
                continue
            val = (self.enc.encode(s) >> bit) & 1
            if val == (l > 0):
                return True
        return None if undecided else False

    def _needed(self, view: GameView) -> set[int]:
        m = self.enc.m
        need: set[int] = set()
        for lit in self.p.node(self.node).clause:
            key = self.keys[abs(lit)]
            if lit > 0:
                need.update((abs(l) - 1) // m + 1 for l in key)
            else:
                for l in key:
                    i = (abs(l) - 1) // m + 1
                    s = view.get(i)
                    if s is not None and ((self.enc.encode(s) >> ((abs(l) - 1) % m)) & 1) == (l > 0):
                        need.add(i)
                        break
        return need

    def next_move(self, view: GameView):
        while True:
            nd = self.p.node(self.node)
            if self.pending is None:
                if nd.is_axiom:
                    raise ProverStuck(f"reached axiom node {self.node} without a falsified axiom")
                self.pending = nd.pivot
            key = self.keys[self.pending]
            val = self._value(view, key)
            if val is None:
                m = self.enc.m
                for l in key:
                    i = (abs(l) - 1) // m + 1
                    if view.get(i) is None:
                        return Query(i)
            # y true: the parent with the negative pivot literal is falsified
            self.node = nd.parents[1] if val else nd.parents[0]
            self.pending = None
            extra = set(view.support()) - self._needed(view)
            if extra:
                return Forget(frozenset(extra))


def narrow_to_strategy(p: ProofDag, f: Cnf, n: int) -> NarrowProofProver:
    return NarrowProofProver(p, f, n)


# -- lifting -----------------------------------------------------------------

LIFT_CONSTANT = 3  # size(lifted) <= size(p) * t^(LIFT_CONSTANT * width(p))


@dataclass
class LiftResult:
    proof: ProofDag
    formula: Cnf
    exponent: float  # measured c with size(lifted) = size(p) * t^(c * width(p))
    constant: int = LIFT_CONSTANT


def lift_estimate(p: ProofDag, spec: IndexGadgetSpec) -> int:
    t = spec.t
    per = t + 2 * (1 << spec.selector_bits)
    return sum(per * t ** len(nd.clause) for nd in p.nodes)


def lift_refutation(
    p: ProofDag,
    f: Cnf,
    spec: IndexGadgetSpec,
    lifted: Optional[Cnf] = None,
    budget: Optional[int] = None,
) -> LiftResult:
    from .cnf import BudgetError, default_clause_budget

    budget = default_clause_budget() if budget is None else budget
    est = lift_estimate(p, spec)
    if est > budget:
        raise BudgetError(f"lifted refutation t={spec.t}", est, budget)
    lifted = lifted if lifted is not None else compose_with_index_gadget(f, spec, budget)
    lay = GadgetLayout(f.num_vars, spec)
    t = spec.t
    b = ProofBuilder()
    memo: dict = {}

    def sel_bits(v: int) -> list[int]:
        return [lay.sel(v, k) for k in range(1, lay.b + 1)]

    def lifted_node(u: int, choice: dict) -> int:
        nd = p.node(u)
        ch = tuple(choice[abs(l)] for l in nd.clause)
        key = (u, ch)
        if key in memo:
            return memo[key]
        if nd.is_axiom:
            res = b.axiom(lay.lifted_clause(nd.clause, ch))
        else:
            z = nd.pivot

            def leaf(code: int) -> int:
                if code >= t:
                    return b.axiom(lay.not_selected(z, code + 1))
                ext = dict(choice)
                ext[z] = code + 1
                n1 = lifted_node(nd.parents[0], ext)
                n2 = lifted_node(nd.parents[1], ext)
                return b.resolve(n1, n2, lay.tab(z, code + 1))

            res = bit_tree(b, sel_bits(z), leaf)
        memo[key] = res
        return res

    sink = lifted_node(len(p.nodes), {})
    if b.clause(sink):
        raise TransformError(f"lifted sink {b.clause(sink)} is not empty")
    out = b.finish(sink)
    w = max(1, max(len(nd.clause) for nd in p.nodes))
    expo = math.log(len(out) / len(p)) / (w * math.log(t)) if len(out) > len(p) else 0.0
    return LiftResult(out, lifted, expo)
