import io
import json
from fractions import Fraction

import pytest

from bracketforge.adversary import AdversaryParams, PaperAdversary, paper_adversary
from bracketforge.configuration import BracketPair, RED, check_container
from bracketforge.core import BracketKind, Symbol
from bracketforge.game import MEMORY_VIOLATION, PROVER_WIN, Forget, ProverStrategy, Query, play
from bracketforge.prover import PaperProver, RandomProver


class Script(ProverStrategy):
    def __init__(self, moves):
        self.moves = list(moves)

    def next_move(self, view):
        return self.moves.pop(0)


# -- parameters ----------------------------------------------------------------

@pytest.mark.parametrize(
    "n, w, eps, l0, d",
    [
        (4096, 4, Fraction(1, 8), 0, 2),
        (4096, 16, Fraction(1, 8), 0, 2),
        (4096, 4, Fraction(1, 3), 2, 16),
        (4096, 8, Fraction(1, 3), 1, 16),
        (2 ** 16, 2, Fraction(1, 2), 8, 256),
        (1000, 10, Fraction(1, 3), 1, 10),
    ],
)
def test_parameters_exact(n, w, eps, l0, d):
    p = AdversaryParams(n, w, eps)
    assert (p.l0, p.d) == (l0, d)
    assert p.schedule_rounds == d ** l0


@pytest.mark.parametrize("kw", [dict(n=0, w=4), dict(n=8, w=1), dict(n=8, w=4, eps=Fraction(3, 2))])
def test_parameters_validated(kw):
    with pytest.raises(ValueError):
        AdversaryParams(**kw)


# -- single rounds -------------------------------------------------------------

def test_uncovered_query_left_of_middle_is_trivial_red():
    adv = PaperAdversary(AdversaryParams(64, 4, Fraction(1, 8)))
    tr = play(64, Script([Query(10)]), adv, 4, round_cap=1)
    assert tr.moves[1] == ("A", Symbol(BracketKind.TR, 10))
    assert BracketPair(10, 10, RED) in adv.C


def test_uncovered_query_right_of_middle_is_trivial_blue():
    adv = PaperAdversary(AdversaryParams(64, 4, Fraction(1, 8)))
    tr = play(64, Script([Query(40)]), adv, 4, round_cap=1)
    assert tr.moves[1] == ("A", Symbol(BracketKind.TB, 40))


def test_covered_query_answers_from_completion():
    adv = PaperAdversary(AdversaryParams(64, 8, Fraction(1, 8)))
    adv.C = frozenset({BracketPair(5, 9, RED)})
    tr = play(64, Script([Query(5)]), adv, 8, round_cap=1)
    assert tr.moves[1] == ("A", Symbol(BracketKind.OR, 9))


def test_forget_shrinks_to_minimal_container():
    adv = PaperAdversary(AdversaryParams(64, 8, Fraction(1, 8)), check=True)
    moves = [Query(3), Query(60), Forget(frozenset({3}))]
    play(64, Script(moves), adv, 8, round_cap=3)
    assert [(p.left, p.right) for p in adv.C] == [(60, 60)]
    assert adv.stats.container_violations == []


# -- whole games ---------------------------------------------------------------

def test_small_cap_paper_prover_n64():
    params = AdversaryParams(64, 3, Fraction(1, 8))
    adv = PaperAdversary(params, check=True)
    tr = play(64, PaperProver(), adv, 3, round_cap=1000)
    assert tr.result == MEMORY_VIOLATION or tr.rounds >= params.schedule_rounds


@pytest.mark.parametrize("w", [4, 8])
def test_random_provers_keep_container_invariant(w):
    n = 512
    for seed in range(2):
        adv = PaperAdversary(AdversaryParams(n, w, Fraction(1, 8)), check=True)
        bad = []
        play(n, RandomProver(seed, w), adv, w, round_cap=150,
             on_round=lambda r, view, mv: bad.extend(check_container(adv.C, view.assignment())))
        assert bad == []
        assert adv.stats.buffer_violations == []
        assert adv.stats.failures == []


def test_recursive_schedule_runs_to_completion():
    # eps = 1/3 gives a genuine recursion (l0 = 2, d = 16, 256 rounds)
    params = AdversaryParams(4096, 4, Fraction(1, 3))
    adv = PaperAdversary(params, check=True)
    tr = play(4096, RandomProver(0, 4), adv, 4, round_cap=params.schedule_rounds + 5)
    st = adv.stats
    assert st.failures == []
    assert st.schedule_done_round == params.schedule_rounds
    assert st.container_violations == [] and st.buffer_violations == []
    assert st.cover_violations == []
    assert tr.rounds == params.schedule_rounds + 5


def test_failure_is_recorded_not_hidden():
    # the paper prover with a generous cap eventually shrinks the separating
    # interval below the extended-play minimum; the adversary must say so
    adv = PaperAdversary(AdversaryParams(4096, 16, Fraction(1, 8)))
    tr = play(4096, PaperProver(), adv, 16, round_cap=500)
    assert tr.result == PROVER_WIN
    assert adv.stats.first_failure_round is not None
    assert adv.stats.first_failure_round > adv.params.schedule_rounds
    assert adv.stats.failures[0].level == "ext"


def test_trace_lines():
    buf = io.StringIO()
    adv = paper_adversary(AdversaryParams(256, 4, Fraction(1, 8)), trace=buf)
    tr = play(256, RandomProver(1, 4), adv, 4, round_cap=20)
    lines = [json.loads(l) for l in buf.getvalue().splitlines()]
    assert len(lines) == tr.rounds
    assert {"round", "move", "level", "interval", "container", "buffer_violations"} <= set(lines[0])
    assert [l["round"] for l in lines] == list(range(1, tr.rounds + 1))


def test_adversary_is_deterministic():
    runs = []
    for _ in range(2):
        adv = PaperAdversary(AdversaryParams(1024, 8, Fraction(1, 8)))
        runs.append(play(1024, RandomProver(3, 8), adv, 8, round_cap=200).dumps())
    assert runs[0] == runs[1]
