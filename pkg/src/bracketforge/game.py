"""Prover-adversary game over Sigma-strings.

The engine owns the state rho; strategies only see a read-only GameView.
Every round is exactly one prover move: a query (answered by the adversary
in the same round) or a forget. Memory is checked after the move resolves.
"""

from __future__ import annotations

import copy
import json
import random
import sys
from dataclasses import dataclass, field
from typing import Callable, Hashable, Optional, Union

from .core import (
    AxiomInstance,
    BracketKind,
    Color,
    Shape,
    Symbol,
    alphabet,
    falsified_at,
    a1_end_ok,
    a1_start_ok,
    falsified_axiom,
    locally_consistent,
    mate_symbol,
)


@dataclass(frozen=True)
class Query:
    index: int


@dataclass(frozen=True)
class Forget:
    indices: frozenset


@dataclass(frozen=True)
class Answer:
    symbol: Symbol


Move = Union[Query, Forget]


class StrategyError(RuntimeError):
    def __init__(self, strategy: str, msg: str):
        super().__init__(f"{strategy}: {msg}")
        self.strategy = strategy


class GameView:
    """Read-only window on the engine's state."""

    __slots__ = ("_rho", "_supp")

    def __init__(self, rho: list, supp: set):
        self._rho = rho
        self._supp = supp

    @property
    def n(self) -> int:
        return len(self._rho)

    def get(self, i: int) -> Optional[Symbol]:
        return self._rho[i - 1]

    def support(self) -> list[int]:
        return sorted(self._supp)

    def memory(self) -> int:
        return len(self._supp)

    def assignment(self) -> tuple:
        return tuple(self._rho)


def view_of(rho) -> GameView:
    rho = list(rho)
    return GameView(rho, {i + 1 for i, s in enumerate(rho) if s is not None})


class ProverStrategy:
    name = "prover"

    def next_move(self, view: GameView) -> Move:
        raise NotImplementedError

    def fingerprint(self) -> Hashable:
        """Hashable summary of private state (None for memoryless provers)."""
        return None


class AdversaryStrategy:
    name = "adversary"

    def answer(self, view: GameView, index: int) -> Symbol:
        raise NotImplementedError

    def observe_forget(self, view: GameView, indices: frozenset) -> None:
        pass


# -- transcripts -----------------------------------------------------------

PROVER_WIN = "prover-win"
MEMORY_VIOLATION = "memory-violation"
ROUND_CAP = "round-cap"


@dataclass
class Transcript:
    n: int
    w: int
    moves: list = field(default_factory=list)  # ("Q", i) / ("A", sym) / ("F", [..])
    memory: list = field(default_factory=list)  # memory after each round
    result: str = ""
    terminal: Optional[AxiomInstance] = None
    final: tuple = ()

    @property
    def rounds(self) -> int:
        return len(self.memory)

    @property
    def max_memory(self) -> int:
        return max(self.memory, default=0)

    def to_json(self) -> dict:
        moves = []
        for tag, val in self.moves:
            if tag == "A":
                moves.append({"answer": str(val)})
            elif tag == "Q":
                moves.append({"query": val})
            else:
                moves.append({"forget": sorted(val)})
        out = {
            "n": self.n,
            "w": self.w,
            "rounds": self.rounds,
            "result": self.result,
            "moves": moves,
            "memory": self.memory,
        }
        if self.terminal is not None:
            out["terminal"] = {"axiom": self.terminal.name, "indices": list(self.terminal.indices)}
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))


def default_round_cap(n: int) -> int:
    return 10 * n ** 3


def play(
    n: int,
    prover: ProverStrategy,
    adversary: AdversaryStrategy,
    memory_cap: int,
    round_cap: Optional[int] = None,
    on_round: Optional[Callable[[int, GameView, Move], None]] = None,
) -> Transcript:
    if memory_cap < 1:
        raise ValueError("memory cap must be >= 1")
    round_cap = default_round_cap(n) if round_cap is None else round_cap
    if round_cap < 1:
        raise ValueError("round cap must be >= 1")
    rho: list = [None] * n
    supp: set = set()
    view = GameView(rho, supp)
    tr = Transcript(n, memory_cap)
    for rnd in range(1, round_cap + 1):
        move = prover.next_move(view)
        if isinstance(move, Query):
            i = move.index
            if not isinstance(i, int) or not 1 <= i <= n:
                raise StrategyError(getattr(prover, "name", "prover"), f"query index {i!r} outside [1, {n}]")
            rho[i - 1] = None
            supp.discard(i)
            sym = adversary.answer(view, i)
            if (
                not isinstance(sym, Symbol)
                or not isinstance(sym.kind, BracketKind)
                or not 1 <= sym.pointer <= n
            ):
                raise StrategyError(getattr(adversary, "name", "adversary"), f"invalid answer {sym!r}")
            rho[i - 1] = sym
            supp.add(i)
            tr.moves.append(("Q", i))
            tr.moves.append(("A", sym))
            tr.memory.append(len(supp))
            if on_round is not None:
                on_round(rnd, view, move)
            if len(supp) > memory_cap:
                tr.result = MEMORY_VIOLATION
                break
            if falsified_at(rho, i):
                tr.result = PROVER_WIN
                tr.terminal = falsified_axiom(rho)
                break
        elif isinstance(move, Forget):
            idx = frozenset(move.indices)
            if any(not isinstance(i, int) or not 1 <= i <= n for i in idx):
                raise StrategyError(getattr(prover, "name", "prover"), f"forget set {sorted(idx)} outside [1, {n}]")
            for i in idx:
                rho[i - 1] = None
                supp.discard(i)
            adversary.observe_forget(view, idx)
            tr.moves.append(("F", idx))
            tr.memory.append(len(supp))
            if on_round is not None:
                on_round(rnd, view, move)
        else:
            raise StrategyError(getattr(prover, "name", "prover"), f"malformed move {move!r}")
    else:
        tr.result = ROUND_CAP
    tr.final = tuple(rho)
    return tr


def replay(tr: Transcript) -> None:
    """Re-execute the move list; raise AssertionError on any inconsistency."""
    rho: list = [None] * tr.n
    mem = []
    it = iter(tr.moves)
    for tag, val in it:
        if tag == "Q":
            a_tag, sym = next(it)
            assert a_tag == "A", "answer must follow a query"
            rho[val - 1] = sym
        elif tag == "F":
            for i in val:
                rho[i - 1] = None
        else:
            raise AssertionError(f"unexpected move tag {tag}")
        mem.append(sum(s is not None for s in rho))
    assert mem == tr.memory, "memory sizes disagree with replay"
    assert tuple(rho) == tr.final, "final state disagrees with replay"
    if tr.result == PROVER_WIN:
        assert falsified_axiom(rho) == tr.terminal, "terminal axiom disagrees"


# -- adversaries -----------------------------------------------------------

def consistent_candidates_bruteforce(view: GameView, i: int) -> list[Symbol]:
    """Answers for index i after which forcing every dangling pointer to its
    mate falsifies no A1-A3 instance (reference implementation)."""
    rho = list(view.assignment())
    out = []
    for sym in alphabet(len(rho)):
        rho[i - 1] = sym
        if locally_consistent(rho):
            out.append(sym)
    return out


def _forced_pairs(view: GameView, skip: int) -> list[tuple[int, int]]:
    pairs = set()
    for k in view.support():
        if k == skip:
            continue
        p = view.get(k).pointer
        if p != k and p != skip:
            pairs.add((min(k, p), max(k, p)))
    return sorted(pairs)


def _crosses(a: int, b: int, pairs: list[tuple[int, int]]) -> bool:
    return any((a < c < b < d) or (c < a < d < b) for c, d in pairs)


def consistent_candidates(view: GameView, i: int) -> list[Symbol]:
    """Same set as consistent_candidates_bruteforce, computed structurally.

    Assumes the state without index i is itself locally consistent.
    """
    n = view.n
    supp = [k for k in view.support() if k != i]
    pointing = [k for k in supp if view.get(k).pointer == i]
    if len(pointing) >= 2:
        return []
    forced = _forced_pairs(view, i)
    if pointing:
        (k,) = pointing
        sym = mate_symbol(k, view.get(k))
        if sym is None:
            return []
        if (i == 1 and not a1_start_ok(sym)) or (i == n and not a1_end_ok(sym)):
            return []
        a, b = min(i, k), max(i, k)
        if _crosses(a, b, [pr for pr in forced if pr != (a, b)]):
            return []
        return [sym]
    targets = {view.get(k).pointer for k in supp}
    blocked = set(supp) | targets
    out = [Symbol(BracketKind.TR, i), Symbol(BracketKind.TB, i)]
    for j in range(1, n + 1):
        if j == i or j in blocked or _crosses(min(i, j), max(i, j), forced):
            continue
        shape = Shape.OPEN if j > i else Shape.CLOSE
        for color in _COLORS:
            sym = Symbol(BracketKind.make(shape, color), j)
            mate = mate_symbol(i, sym)
            if (j == 1 and not a1_start_ok(mate)) or (j == n and not a1_end_ok(mate)):
                continue
            out.append(sym)
    if i == 1:
        out = [s for s in out if a1_start_ok(s)]
    if i == n:
        out = [s for s in out if a1_end_ok(s)]
    return sorted(out)


_COLORS = (Color.RED, Color.BLUE)


class RandomConsistentAdversary(AdversaryStrategy):
    """Uniform over answers that falsify none of A1-A3 (uniform over all of
    Sigma when every answer does)."""

    def __init__(self, seed: int):
        self.seed = seed
        self.name = f"random:{seed}"
        self.rng = random.Random(seed)

    def answer(self, view: GameView, index: int) -> Symbol:
        cands = consistent_candidates(view, index)
        if not cands:
            cands = alphabet(view.n)
        return cands[self.rng.randrange(len(cands))]


def random_consistent_adversary(seed: int) -> RandomConsistentAdversary:
    return RandomConsistentAdversary(seed)


class ScriptedAdversary(AdversaryStrategy):
    """Answers from a fixed {index: symbol} table (tests and fixtures)."""

    name = "scripted"

    def __init__(self, table: dict[int, Symbol]):
        self.table = dict(table)

    def answer(self, view: GameView, index: int) -> Symbol:
        return self.table[index]


# -- exhaustive play -------------------------------------------------------

@dataclass
class ExhaustiveResult:
    all_won: bool
    max_memory: int
    leaves: int
    losses: list = field(default_factory=list)


class NondeterministicProver(RuntimeError):
    pass


def _run_to_query(prover: ProverStrategy, rho: list, memory_cap: int, max_steps: int) -> tuple[Optional[int], list]:
    supp = {k + 1 for k, s in enumerate(rho) if s is not None}
    view = GameView(rho, supp)
    for _ in range(max_steps):
        mv = prover.next_move(view)
        if isinstance(mv, Forget):
            for k in mv.indices:
                rho[k - 1] = None
                supp.discard(k)
            continue
        if isinstance(mv, Query):
            return mv.index, rho
        raise StrategyError(getattr(prover, "name", "prover"), f"malformed move {mv!r}")
    return None, rho


def exhaustive_play(n: int, prover: ProverStrategy, memory_cap: int, max_steps: int = 10_000) -> ExhaustiveResult:
    """Play the prover against every adversary (all 6n answers per query)."""
    res = ExhaustiveResult(True, 0, 0)
    sigma = alphabet(n)
    seen: set = set()

    def rec(pv: ProverStrategy, rho: list, depth: int) -> None:
        i, rho = _run_to_query(pv, rho, memory_cap, max_steps)
        if i is None:
            res.all_won = False
            res.losses.append(("stalled", tuple(rho)))
            return
        key = (tuple(rho), i, pv.fingerprint())
        if key in seen:
            return
        seen.add(key)
        for sym in sigma:
            nxt = list(rho)
            nxt[i - 1] = sym
            mem = sum(s is not None for s in nxt)
            res.max_memory = max(res.max_memory, mem)
            if mem > memory_cap:
                res.all_won = False
                res.losses.append(("memory", tuple(nxt)))
                continue
            if falsified_at(nxt, i):
                res.leaves += 1
                continue
            if depth > max_steps:
                res.all_won = False
                res.losses.append(("depth", tuple(nxt)))
                continue
            rec(copy.deepcopy(pv), nxt, depth + 1)

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20_000))
    try:
        rec(copy.deepcopy(prover), [None] * n, 0)
    finally:
        sys.setrecursionlimit(old)
    return res


# -- state DAG extraction --------------------------------------------------

class ExtractionBudgetError(RuntimeError):
    pass


DEFAULT_NODE_BUDGET = 2_000_000


def extract_state_dag(
    n: int,
    prover: ProverStrategy,
    memory_cap: int,
    node_budget: int = DEFAULT_NODE_BUDGET,
    max_forgets: int = 10_000,
):
    """Reachable-state DAG of a deterministic prover against all adversaries.

    Internal nodes are keyed by (state, prover fingerprint) at the moment the
    prover issues a query; leaves are keyed by their falsified state.
    """
    from .statedag import StateDag, StateNode

    dag = StateDag(n)
    sigma = alphabet(n)
    internal: dict = {}
    leaves: dict = {}
    on_path: set = set()

    def new_node(node: StateNode) -> int:
        if len(dag.nodes) >= node_budget:
            raise ExtractionBudgetError(f"more than {node_budget} states")
        dag.nodes.append(node)
        return len(dag.nodes) - 1

    def visit(pv: ProverStrategy, rho: list) -> int:
        i, rho = _run_to_query(pv, rho, memory_cap, max_forgets)
        if i is None:
            raise StrategyError(getattr(pv, "name", "prover"), "forgets without ever querying")
        if not 1 <= i <= n:
            raise StrategyError(getattr(pv, "name", "prover"), f"query index {i} outside [1, {n}]")
        state = tuple(rho)
        key = (state, pv.fingerprint())
        if key in internal:
            v = internal[key]
            if dag.nodes[v].query != i:
                raise NondeterministicProver(f"state {key!r} queried both {dag.nodes[v].query} and {i}")
            if v in on_path:
                raise StrategyError(getattr(pv, "name", "prover"), "prover revisits a state on the same play")
            return v
        v = new_node(StateNode(state, i))
        internal[key] = v
        on_path.add(v)
        base = list(state)
        base[i - 1] = None
        for sym in sigma:
            nxt = list(base)
            nxt[i - 1] = sym
            mem = sum(s is not None for s in nxt)
            if mem > memory_cap:
                raise StrategyError(getattr(pv, "name", "prover"), f"memory {mem} exceeds cap {memory_cap}")
            if falsified_at(nxt, i):
                t = tuple(nxt)
                if t not in leaves:
                    leaves[t] = new_node(StateNode(t))
                dag.nodes[v].children[sym] = leaves[t]
            else:
                dag.nodes[v].children[sym] = visit(copy.deepcopy(pv), nxt)
        on_path.discard(v)
        return v

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 50_000))
    try:
        dag.root = visit(copy.deepcopy(prover), [None] * n)
    finally:
        sys.setrecursionlimit(old)
    if any(s is not None for s in dag.nodes[dag.root].state):
        # prover forgot into a non-empty root: impossible, rho starts empty
        raise StrategyError(getattr(prover, "name", "prover"), "non-empty root state")
    return dag
