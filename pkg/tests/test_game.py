import random

import hypothesis.strategies as st
import pytest
from conftest import paper_dag
from hypothesis import given, settings

from bracketforge.core import BracketKind, Symbol, alphabet, locally_consistent
from bracketforge.game import (
    MEMORY_VIOLATION,
    PROVER_WIN,
    ROUND_CAP,
    AdversaryStrategy,
    Forget,
    NondeterministicProver,
    ProverStrategy,
    Query,
    RandomConsistentAdversary,
    ScriptedAdversary,
    StrategyError,
    Transcript,
    consistent_candidates,
    consistent_candidates_bruteforce,
    exhaustive_play,
    extract_state_dag,
    play,
    replay,
    view_of,
)
from bracketforge.prover import PaperProver, RandomProver, paper_prover
from bracketforge.statedag import check_state_dag


class FixedQueries(ProverStrategy):
    def __init__(self, moves):
        self.moves = list(moves)
        self.k = 0

    def fingerprint(self):
        return self.k

    def next_move(self, view):
        mv = self.moves[self.k % len(self.moves)]
        self.k += 1
        return mv


# -- engine ------------------------------------------------------------------

def test_n1_first_query_wins():
    for sym in alphabet(1):
        tr = play(1, FixedQueries([Query(1)]), ScriptedAdversary({1: sym}), 1)
        assert tr.result == PROVER_WIN and tr.rounds == 1
        assert tr.terminal.axiom == 1


def test_paper_prover_beats_random_adversary_n64():
    tr = play(64, paper_prover(64), RandomConsistentAdversary(7), 64)
    assert tr.result == PROVER_WIN
    assert tr.max_memory <= 64
    replay(tr)


def test_memory_violation_detected():
    tr = play(4, FixedQueries([Query(2), Query(3)]), ScriptedAdversary({2: Symbol(BracketKind.TR, 2), 3: Symbol(BracketKind.TR, 3)}), 1)
    assert tr.result == MEMORY_VIOLATION and tr.rounds == 2


def test_round_cap():
    tr = play(4, FixedQueries([Query(2), Forget(frozenset({2}))]), ScriptedAdversary({2: Symbol(BracketKind.TR, 2)}), 2, round_cap=10)
    assert tr.result == ROUND_CAP and tr.rounds == 10


def test_forget_is_a_round():
    tr = play(4, FixedQueries([Query(2), Forget(frozenset({2}))]), ScriptedAdversary({2: Symbol(BracketKind.TR, 2)}), 2, round_cap=2)
    assert tr.memory == [1, 0]
    assert tr.moves[-1] == ("F", frozenset({2}))


@pytest.mark.parametrize("move", [Query(0), Query(5), Forget(frozenset({9})), "bogus"])
def test_illegal_prover_moves(move):
    with pytest.raises(StrategyError):
        play(4, FixedQueries([move]), ScriptedAdversary({}), 4)


def test_illegal_answer():
    with pytest.raises(StrategyError):
        play(3, FixedQueries([Query(1)]), ScriptedAdversary({1: Symbol(BracketKind.TR, 7)}), 3)


def test_requery_clears_before_answer():
    seen = []

    class Spy(AdversaryStrategy):
        def answer(self, view, index):
            seen.append(view.get(index))
            return Symbol(BracketKind.TR, index)

    play(4, FixedQueries([Query(2), Query(2)]), Spy(), 4, round_cap=2)
    assert seen == [None, None]


def test_transcript_json_shape():
    tr = play(8, PaperProver(), RandomConsistentAdversary(3), 8)
    js = tr.to_json()
    assert set(js) >= {"n", "w", "rounds", "result", "moves", "memory"}
    assert js["rounds"] == len(js["memory"]) >= 1
    assert tr.dumps() == Transcript(**tr.__dict__).dumps()


@pytest.mark.parametrize("seed", range(5))
def test_play_is_deterministic(seed):
    a = play(32, PaperProver(), RandomConsistentAdversary(seed), 32)
    b = play(32, PaperProver(), RandomConsistentAdversary(seed), 32)
    assert a.dumps() == b.dumps()
    replay(a)


def test_distinct_seeds_give_distinct_transcripts():
    dumps = {play(64, PaperProver(), RandomConsistentAdversary(s), 64).dumps() for s in range(20)}
    assert len(dumps) >= 15


def test_replay_catches_tampering():
    tr = play(16, PaperProver(), RandomConsistentAdversary(1), 16)
    tr.memory[0] += 1
    with pytest.raises(AssertionError):
        replay(tr)


# -- consistent candidates ---------------------------------------------------

def consistent_states(max_n=7):
    """Random locally consistent states reached by answering random queries
    with random consistent symbols."""

    @st.composite
    def build(draw):
        n = draw(st.integers(1, max_n))
        rho = [None] * n
        for _ in range(draw(st.integers(0, n))):
            i = draw(st.integers(1, n))
            rho[i - 1] = None
            cands = consistent_candidates_bruteforce(view_of(rho), i)
            if not cands:
                break
            rho[i - 1] = draw(st.sampled_from(cands))
        for i in draw(st.lists(st.integers(1, n), max_size=2)):
            rho[i - 1] = None
        return tuple(rho)

    return build()


@given(consistent_states(), st.data())
@settings(max_examples=300, deadline=None)
def test_candidates_match_bruteforce(rho, data):
    i = data.draw(st.integers(1, len(rho)))
    state = list(rho)
    state[i - 1] = None
    if not locally_consistent(state):
        return
    view = view_of(state)
    assert consistent_candidates(view, i) == consistent_candidates_bruteforce(view, i)


@given(st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_random_adversary_stays_consistent(seed):
    # against random queries the adversary never falsifies A1-A3 on its own
    n = 10
    states = []
    tr = play(n, RandomProver(seed, n), RandomConsistentAdversary(seed), n, round_cap=60,
              on_round=lambda r, view, mv: states.append(view.assignment()))
    assert all(locally_consistent(s) for s in states)
    if tr.result == PROVER_WIN:
        assert tr.terminal.axiom == 4


# -- exhaustive play and extraction ------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_paper_prover_exhaustive(n):
    res = exhaustive_play(n, PaperProver(), n)
    assert res.all_won and res.max_memory <= n


def test_n1_extraction_shape():
    d = extract_state_dag(1, PaperProver(), 1)
    assert d.internal_count() == 1
    root = d.nodes[d.root]
    assert len(root.children) == 6
    assert len(d.nodes) == 7


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_extracted_dag_checks(n):
    d = paper_dag(n)
    m = check_state_dag(n, d)
    assert m.index_width == exhaustive_play(n, PaperProver(), n).max_memory


class DagWalker(AdversaryStrategy):
    """Plays random answers while following the extracted DAG."""

    def __init__(self, dag, seed):
        self.dag = dag
        self.cur = dag.root
        self.rng = random.Random(seed)
        self.hit_leaf = False

    def answer(self, view, index):
        nd = self.dag.nodes[self.cur]
        assert nd.query == index
        expect = list(nd.state)
        expect[index - 1] = None
        assert tuple(expect) == view.assignment()
        sym = self.rng.choice(alphabet(view.n))
        self.cur = nd.children[sym]
        self.hit_leaf = self.dag.nodes[self.cur].is_leaf
        return sym


@pytest.mark.parametrize("n", [3, 4, 5])
def test_dag_agrees_with_play(n):
    d = paper_dag(n)
    for seed in range(100):
        walker = DagWalker(d, seed)
        tr = play(n, PaperProver(), walker, n)
        assert tr.result == PROVER_WIN
        assert walker.hit_leaf


def test_nondeterministic_prover_detected():
    class Flaky(ProverStrategy):
        calls = 0

        def next_move(self, view):
            Flaky.calls += 1
            return Query(1 + Flaky.calls % 2)

    with pytest.raises((NondeterministicProver, StrategyError)):
        extract_state_dag(2, Flaky(), 2)


def test_extraction_memory_cap():
    with pytest.raises(StrategyError):
        extract_state_dag(4, PaperProver(), 1)


# -- provers -------------------------------------------------------------------

@pytest.mark.parametrize("n", [5, 6])
def test_paper_prover_exhaustive_larger(n):
    res = exhaustive_play(n, PaperProver(), n)
    assert res.all_won


@pytest.mark.parametrize("seed", range(5))
def test_random_prover_respects_cap(seed):
    tr = play(50, RandomProver(seed, 4), RandomConsistentAdversary(seed), 4, round_cap=500)
    assert tr.result != MEMORY_VIOLATION
    assert tr.max_memory <= 4


def test_paper_prover_memory_grows_slowly():
    worst = {}
    for n in (16, 64, 256):
        worst[n] = max(play(n, PaperProver(), RandomConsistentAdversary(s), n).max_memory for s in range(30))
    assert worst[16] <= worst[64] <= worst[256] <= 8 * 8 + 8
