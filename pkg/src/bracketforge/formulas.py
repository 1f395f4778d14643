"""Generators for the wide formula, its 3-CNF extension encoding, and
composition with the indexing gadget."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .cnf import BudgetError, Cnf, Clause, Encoding, ExtVar, GadgetVar, default_clause_budget, make_clause
from .core import (
    BracketKind,
    BLUE_START,
    RED_END,
    Symbol,
    a1_end_ok,
    a1_start_ok,
    a2_pair_violated,
)


# -- wide formula ----------------------------------------------------------

def wide_clause_estimate(n: int) -> int:
    enc_size = 6 * n
    m = max(1, math.ceil(math.log2(enc_size)))
    pairs = n * (n - 1) // 2
    quads = math.comb(n, 4)
    return (
        8 * n
        + 4 * n
        + pairs * 2 * 6 * enc_size
        + quads * 6 ** 4
        + max(0, n - 1) * 4 * n * n
        + n * ((1 << m) - enc_size)
    )


def violating_tuples(n: int, axiom: int, indices: tuple[int, ...]) -> Iterator[tuple[Symbol, ...]]:
    """Every symbol tuple on `indices` that falsifies the given instance."""
    sigma = [Symbol(k, p) for k in BracketKind for p in range(1, n + 1)]
    if axiom == 1:
        (i,) = indices
        for s in sigma:
            bad = (i == 1 and not a1_start_ok(s)) or (i == n and not a1_end_ok(s))
            if bad:
                yield (s,)
    elif axiom == 2 and len(indices) == 1:
        (i,) = indices
        for k in (BracketKind.OR, BracketKind.OB, BracketKind.CR, BracketKind.CB):
            yield (Symbol(k, i),)
    elif axiom == 2:
        i, j = indices
        seen = set()
        for si in sigma:
            for sj in sigma:
                if (si.pointer == j or sj.pointer == i) and (si, sj) not in seen:
                    if a2_pair_violated(i, si, j, sj):
                        seen.add((si, sj))
                        yield (si, sj)
    elif axiom == 3:
        i, k, j, l = indices
        for kinds in itertools.product(BracketKind, repeat=4):
            yield (Symbol(kinds[0], j), Symbol(kinds[1], l), Symbol(kinds[2], i), Symbol(kinds[3], k))
    elif axiom == 4:
        for a in sorted(RED_END):
            for b in sorted(BLUE_START):
                for p in range(1, n + 1):
                    for q in range(1, n + 1):
                        yield (Symbol(a, p), Symbol(b, q))
    else:
        raise ValueError(f"unknown axiom {axiom}")


def instances(n: int) -> Iterator[tuple[int, tuple[int, ...]]]:
    """Axiom instances in canonical (axiom, indices) order."""
    yield from sorted({(1, (1,)), (1, (n,))})
    for i in range(1, n + 1):
        yield (2, (i,))
    for i, j in itertools.combinations(range(1, n + 1), 2):
        yield (2, (i, j))
    for quad in itertools.combinations(range(1, n + 1), 4):
        yield (3, quad)
    for i in range(1, n):
        yield (4, (i, i + 1))


def gen_bracket_wide(
    n: int,
    encoding: Optional[Encoding] = None,
    budget: Optional[int] = None,
    axioms: tuple[int, ...] = (1, 2, 3, 4),
) -> Cnf:
    """CNF over n*m variables: one clause per violating block assignment of
    each axiom instance, plus clauses excluding non-codewords per block.
    `axioms` selects a sub-formula (the codeword clauses are always kept)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    enc = encoding or Encoding(n)
    budget = default_clause_budget() if budget is None else budget
    est = wide_clause_estimate(n)
    if est > budget:
        raise BudgetError(f"wide formula n={n}", est, budget)
    clauses: dict[Clause, None] = {}
    for i in range(1, n + 1):
        for code in range(len(enc.symbols), 1 << enc.m):
            clauses[enc.forbid({i: code})] = None
    for axiom, idx in instances(n):
        if axiom not in axioms:
            continue
        for tup in violating_tuples(n, axiom, idx):
            clauses[enc.forbid({i: enc.encode(s) for i, s in zip(idx, tup)})] = None
    return Cnf(n * enc.m, list(clauses), enc.block_meta())


def axiom_clause(enc: Encoding, axiom: int, indices: tuple[int, ...], rho) -> Clause:
    """The wide clause that `rho` falsifies for a falsified instance."""
    return enc.forbid({i: enc.encode(rho[i - 1]) for i in indices})


# -- narrow (extension) formula --------------------------------------------

def clause_blocks(key: Clause, m: int) -> frozenset[int]:
    return frozenset((abs(l) - 1) // m + 1 for l in key)


def split_by_block(key: Clause, m: int) -> dict[int, Clause]:
    parts: dict[int, list[int]] = {}
    for l in key:
        parts.setdefault((abs(l) - 1) // m + 1, []).append(l)
    return {b: make_clause(ls) for b, ls in sorted(parts.items())}


def key_order(key: Clause) -> tuple:
    return (len(key), tuple((abs(l), l) for l in key))


@dataclass
class NarrowSupport:
    """Extension variables and OR-decompositions to materialise.

    A decomposition (D, A, B) stands for y_D <-> (y_A v y_B) with D = A u B;
    A and B are stored in canonical order.
    """

    keys: set = field(default_factory=set)
    decompositions: set = field(default_factory=set)

    def add_key(self, key: Clause) -> None:
        self.keys.add(key)

    def add_decomposition(self, d: Clause, a: Clause, b: Clause) -> tuple:
        if key_order(b) < key_order(a):
            a, b = b, a
        if set(a) | set(b) != set(d) or not a or not b or a == d or b == d:
            raise ValueError(f"not a proper decomposition: {d} = {a} v {b}")
        self.decompositions.add((d, a, b))
        self.keys.update((d, a, b))
        return (d, a, b)

    def materialised(self) -> list[Clause]:
        keys = set(self.keys)
        for key in list(keys):
            if len(key) == 1:
                keys.add((-key[0],))
        return sorted(keys, key=key_order)


def _full_support(n: int, m: int, k: int, budget: int) -> NarrowSupport:
    nvars = n * m
    # every clause of index-width <= k: per block a non-empty partial
    # assignment of its m bits (3^m - 1 choices)
    per_block = 3 ** m - 1
    est_keys = sum(math.comb(n, r) * per_block ** r for r in range(1, min(k, n) + 1))
    est_decomp = sum(math.comb(n, r) * (3 ** m) ** r for r in range(1, min(k, n) + 1))
    est = est_keys + 3 * est_decomp
    if est > budget:
        raise BudgetError(f"full narrow formula n={n} (extension variables ~{est_keys})", est, budget)
    sup = NarrowSupport()
    keys = []
    for r in range(1, nvars + 1):
        for combo in itertools.combinations(range(1, nvars + 1), r):
            for signs in itertools.product((1, -1), repeat=r):
                key = make_clause(v * s for v, s in zip(combo, signs))
                if len(clause_blocks(key, m)) <= k:
                    keys.append(key)
    for key in keys:
        sup.add_key(key)
        lits_d = list(key)
        r = len(lits_d)
        # each literal goes to A only, B only, or both; unordered, both proper
        for assign in itertools.product((0, 1, 2), repeat=r):
            a = tuple(l for l, s in zip(lits_d, assign) if s in (0, 2))
            b = tuple(l for l, s in zip(lits_d, assign) if s in (1, 2))
            if a and b and a != key and b != key and key_order(a) <= key_order(b):
                sup.add_decomposition(key, a, b)
    return sup


def gen_bracket_narrow(
    n: int,
    k: int = 4,
    mode: str = "support",
    support: Optional[NarrowSupport] = None,
    wide: Optional[Cnf] = None,
    budget: Optional[int] = None,
) -> Cnf:
    """3-CNF extension encoding of the wide formula.

    mode="full" introduces y_D for every clause of index-width <= k and every
    OR-decomposition (tiny n only). mode="support" materialises exactly the
    keys and decompositions in `support`, giving a sub-formula of the full
    encoding that is enough to check refutations using only those axioms.
    """
    enc = Encoding(n)
    budget = default_clause_budget() if budget is None else budget
    if mode == "full":
        support = _full_support(n, enc.m, k, budget)
    elif mode != "support":
        raise ValueError(f"unknown mode {mode!r}")
    if support is None:
        raise ValueError("support mode needs a NarrowSupport")
    wide = wide if wide is not None else gen_bracket_wide(n, enc, budget)
    keys = support.materialised()
    for key in keys:
        if len(clause_blocks(key, enc.m)) > k:
            raise ValueError(f"extension key {key} has index-width above {k}")
    ids = {key: v for v, key in enumerate(keys, start=1)}
    clauses: dict[Clause, None] = {}
    for key in keys:
        if wide.contains(key):
            clauses[(ids[key],)] = None
    for key in keys:
        if len(key) == 1 and key[0] > 0:
            y, ny = ids[key], ids[(-key[0],)]
            clauses[make_clause((y, ny))] = None
            clauses[make_clause((-y, -ny))] = None
    for d, a, b in sorted(support.decompositions, key=lambda t: tuple(map(key_order, t))):
        yd, ya, yb = ids[d], ids[a], ids[b]
        clauses[make_clause((-yd, ya, yb))] = None
        clauses[make_clause((-ya, yd))] = None
        clauses[make_clause((-yb, yd))] = None
    meta = {v: ExtVar(key) for key, v in ids.items()}
    return Cnf(len(keys), list(clauses), meta)


def narrow_ids(f: Cnf) -> dict[Clause, int]:
    return {meta.key: v for v, meta in f.meta.items() if isinstance(meta, ExtVar)}


def or_equivalence_clauses(yd: int, ya: int, yb: int) -> list[Clause]:
    return [make_clause((-yd, ya, yb)), make_clause((-ya, yd)), make_clause((-yb, yd))]


# -- indexing gadget -------------------------------------------------------

@dataclass(frozen=True)
class IndexGadgetSpec:
    t: int

    def __post_init__(self):
        if self.t < 2:
            raise ValueError("gadget fan-in t must be >= 2")

    @property
    def selector_bits(self) -> int:
        return max(1, math.ceil(math.log2(self.t)))


def index_gadget(x: int, y: tuple[int, ...]) -> int:
    """Ind_t(x, y) = y_x with x in [t] (1-based)."""
    return y[x - 1]


class GadgetLayout:
    """Variable numbering of F o Ind_t^n: per original variable, the
    selector bits followed by the t table bits."""

    def __init__(self, num_original: int, spec: IndexGadgetSpec):
        self.num_original = num_original
        self.spec = spec
        self.b = spec.selector_bits
        self.stride = self.b + spec.t

    @property
    def num_vars(self) -> int:
        return self.num_original * self.stride

    def sel(self, v: int, bit: int) -> int:
        return (v - 1) * self.stride + bit

    def tab(self, v: int, j: int) -> int:
        return (v - 1) * self.stride + self.b + j

    def not_selected(self, v: int, s: int) -> list[int]:
        """Literals whose disjunction says 'selector of v is not s'."""
        code = s - 1
        return [-self.sel(v, b) if (code >> (b - 1)) & 1 else self.sel(v, b) for b in range(1, self.b + 1)]

    def garbage_clauses(self, v: int) -> list[Clause]:
        out = []
        for code in range(self.spec.t, 1 << self.b):
            out.append(make_clause(self.not_selected(v, code + 1)))
        return out

    def lifted_clause(self, clause: Clause, choice: tuple[int, ...]) -> Clause:
        lits = []
        for l, s in zip(clause, choice):
            v = abs(l)
            lits.extend(self.not_selected(v, s))
            lits.append(self.tab(v, s) if l > 0 else -self.tab(v, s))
        return make_clause(lits)

    def meta(self) -> dict:
        out = {}
        for v in range(1, self.num_original + 1):
            for b in range(1, self.b + 1):
                out[self.sel(v, b)] = GadgetVar(v, "sel", b)
            for j in range(1, self.spec.t + 1):
                out[self.tab(v, j)] = GadgetVar(v, "tab", j)
        return out


def compose_with_index_gadget(f: Cnf, spec: IndexGadgetSpec, budget: Optional[int] = None) -> Cnf:
    """Substitute z_v -> Ind_t(x_v, y_v); each clause expands over all
    selector choices for its variables."""
    budget = default_clause_budget() if budget is None else budget
    est = sum(spec.t ** len(c) for c in f.clauses) + f.num_vars * (1 << spec.selector_bits)
    if est > budget:
        raise BudgetError(f"lifted formula t={spec.t}", est, budget)
    lay = GadgetLayout(f.num_vars, spec)
    clauses: dict[Clause, None] = {}
    for v in range(1, f.num_vars + 1):
        for c in lay.garbage_clauses(v):
            clauses[c] = None
    for c in f.clauses:
        for choice in itertools.product(range(1, spec.t + 1), repeat=len(c)):
            clauses[lay.lifted_clause(c, choice)] = None
    return Cnf(lay.num_vars, list(clauses), lay.meta())
