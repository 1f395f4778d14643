from functools import lru_cache

from bracketforge.formulas import gen_bracket_wide
from bracketforge.game import extract_state_dag
from bracketforge.prover import PaperProver
from bracketforge.statedag import state_dag_to_resolution


@lru_cache(maxsize=None)
def wide_formula(n):
    return gen_bracket_wide(n)


@lru_cache(maxsize=None)
def paper_dag(n):
    return extract_state_dag(n, PaperProver(), n)


@lru_cache(maxsize=None)
def paper_refutation(n):
    return state_dag_to_resolution(n, paper_dag(n))
