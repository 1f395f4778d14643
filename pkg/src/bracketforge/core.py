"""Colored, pointered bracket strings and the axiom system over them.

Strings live in Sigma^n where Sigma = {six bracket kinds} x [n]. Indices are
1-based everywhere. A partial assignment is a tuple of length n holding a
Symbol or None; full strings are partial assignments with no None entries.

Axioms:
  A1  s_1 is a red opener (trivial or open), s_n is a blue closer.
  A2  pointers define pairs: p(s_i)=j implies p(s_j)=i; a self-paired symbol
      is trivial; a pair i<j is open/close of one colour.
  A3  no crossing pairs i < i' < j < j'.
  A4  no red right-end immediately followed by a blue left-end.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence


class Color(enum.Enum):
    RED = "red"
    BLUE = "blue"


class Shape(enum.Enum):
    TRIVIAL = "trivial"
    OPEN = "open"
    CLOSE = "close"


class BracketKind(enum.IntEnum):
    # Order fixes the canonical encoding: TR < TB < OR < OB < CR < CB.
    TR = 0
    TB = 1
    OR = 2
    OB = 3
    CR = 4
    CB = 5

    @property
    def color(self) -> Color:
        return Color.RED if self in (BracketKind.TR, BracketKind.OR, BracketKind.CR) else Color.BLUE

    @property
    def shape(self) -> Shape:
        if self <= BracketKind.TB:
            return Shape.TRIVIAL
        if self <= BracketKind.OB:
            return Shape.OPEN
        return Shape.CLOSE

    @classmethod
    def make(cls, shape: Shape, color: Color) -> "BracketKind":
        return _KIND_BY[(shape, color)]


_KIND_BY = {(k.shape, k.color): k for k in BracketKind}

# Kinds that end a red region / start a blue region (A4 forbids red-end then blue-start).
RED_END = frozenset({BracketKind.CR, BracketKind.TR})
BLUE_START = frozenset({BracketKind.OB, BracketKind.TB})


class Symbol(NamedTuple):
    kind: BracketKind
    pointer: int

    def __str__(self) -> str:
        return f"{self.kind.name}:{self.pointer}"


Assignment = tuple  # tuple[Optional[Symbol], ...] of length n


def alphabet(n: int) -> list[Symbol]:
    """All 6n symbols in canonical order (kind, then pointer)."""
    return [Symbol(k, p) for k in BracketKind for p in range(1, n + 1)]


def empty(n: int) -> Assignment:
    return (None,) * n


def from_pairs(n: int, cells: dict[int, Symbol]) -> Assignment:
    """Build an assignment from {index: symbol} with 1-based indices."""
    rho = [None] * n
    for i, sym in cells.items():
        if not 1 <= i <= n:
            raise ValueError(f"index {i} outside [1, {n}]")
        if not 1 <= sym.pointer <= n:
            raise ValueError(f"pointer {sym.pointer} outside [1, {n}]")
        rho[i - 1] = Symbol(BracketKind(sym.kind), sym.pointer)
    return tuple(rho)


def support(rho: Sequence[Optional[Symbol]]) -> list[int]:
    return [i + 1 for i, s in enumerate(rho) if s is not None]


def extends(small: Sequence[Optional[Symbol]], big: Sequence[Optional[Symbol]]) -> bool:
    """True iff every assignment of `small` also appears in `big`."""
    return all(s is None or s == b for s, b in zip(small, big))


# -- text format -----------------------------------------------------------

def format_assignment(rho: Sequence[Optional[Symbol]]) -> str:
    return " ".join("*" if s is None else str(s) for s in rho)


def parse_assignment(text: str) -> Assignment:
    tokens = text.split()
    n = len(tokens)
    cells: dict[int, Symbol] = {}
    for i, tok in enumerate(tokens, start=1):
        if tok == "*":
            continue
        try:
            name, ptr = tok.split(":")
            cells[i] = Symbol(BracketKind[name], int(ptr))
        except (KeyError, ValueError):
            raise ValueError(f"bad symbol token {tok!r} at position {i}") from None
    return from_pairs(n, cells)


# -- axioms ----------------------------------------------------------------

@dataclass(frozen=True, order=True)
class AxiomInstance:
    axiom: int  # 1..4
    indices: tuple[int, ...]
    description: str = ""

    @property
    def name(self) -> str:
        return f"A{self.axiom}"


def a1_start_ok(sym: Symbol) -> bool:
    return sym.kind in (BracketKind.TR, BracketKind.OR)


def a1_end_ok(sym: Symbol) -> bool:
    return sym.kind in (BracketKind.TB, BracketKind.CB)


def a2_single_violated(i: int, si: Symbol) -> bool:
    return si.pointer == i and si.kind.shape is not Shape.TRIVIAL


def a2_pair_violated(i: int, si: Symbol, j: int, sj: Symbol) -> bool:
    """Instance over i < j. Only pointers between i and j are relevant."""
    if si.pointer != j and sj.pointer != i:
        return False
    if si.pointer != j or sj.pointer != i:
        return True
    return not (
        si.kind.shape is Shape.OPEN
        and sj.kind.shape is Shape.CLOSE
        and si.kind.color is sj.kind.color
    )


def a4_violated(si: Symbol, sj: Symbol) -> bool:
    return si.kind in RED_END and sj.kind in BLUE_START


def matched_pairs(rho: Sequence[Optional[Symbol]], indices: Iterable[int] | None = None) -> list[tuple[int, int]]:
    """Mutually pointing non-self pairs (i, j), i < j, among assigned indices."""
    out = []
    idx = support(rho) if indices is None else indices
    for i in idx:
        s = rho[i - 1]
        j = s.pointer
        if j > i:
            t = rho[j - 1]
            if t is not None and t.pointer == i:
                out.append((i, j))
    return out


def _crossings(pairs: list[tuple[int, int]]) -> Iterator[tuple[int, int, int, int]]:
    for (i, j), (k, l) in itertools.combinations(pairs, 2):
        if i > k:
            i, j, k, l = k, l, i, j
        if i < k < j < l:
            yield (i, k, j, l)


def all_falsified(rho: Sequence[Optional[Symbol]], axioms: Iterable[int] = (1, 2, 3, 4)) -> list[AxiomInstance]:
    """Every falsified instance (all mentioned indices assigned), sorted."""
    n = len(rho)
    axioms = set(axioms)
    supp = support(rho)
    found: set[AxiomInstance] = set()
    if 1 in axioms:
        if rho[0] is not None and not a1_start_ok(rho[0]):
            found.add(AxiomInstance(1, (1,), "first symbol is not a red opener"))
        if rho[n - 1] is not None and not a1_end_ok(rho[n - 1]):
            found.add(AxiomInstance(1, (n,), "last symbol is not a blue closer"))
    if 2 in axioms:
        for i in supp:
            s = rho[i - 1]
            if a2_single_violated(i, s):
                found.add(AxiomInstance(2, (i,), "non-trivial bracket paired with itself"))
            j = s.pointer
            if j != i and rho[j - 1] is not None:
                a, b = min(i, j), max(i, j)
                if a2_pair_violated(a, rho[a - 1], b, rho[b - 1]):
                    found.add(AxiomInstance(2, (a, b), "pointers do not form a matching pair"))
    if 3 in axioms:
        for quad in _crossings(matched_pairs(rho, supp)):
            found.add(AxiomInstance(3, quad, "crossing bracket pairs"))
    if 4 in axioms:
        for i in supp:
            if i < n and rho[i] is not None and a4_violated(rho[i - 1], rho[i]):
                found.add(AxiomInstance(4, (i, i + 1), "red/blue transition"))
    return sorted(found, key=lambda a: (a.axiom, a.indices))


def falsified_axiom(rho: Sequence[Optional[Symbol]]) -> Optional[AxiomInstance]:
    """Lowest-id, then lexicographically smallest, falsified instance or None."""
    found = all_falsified(rho)
    return found[0] if found else None


def falsified_at(rho: Sequence[Optional[Symbol]], i: int, axioms: Iterable[int] = (1, 2, 3, 4)) -> bool:
    """True iff some falsified instance mentions index i.

    Cheaper than a full scan; used after a single index changes in a state
    known to be consistent beforehand.
    """
    n = len(rho)
    s = rho[i - 1]
    if s is None:
        return False
    axioms = set(axioms)
    if 1 in axioms:
        if i == 1 and not a1_start_ok(s):
            return True
        if i == n and not a1_end_ok(s):
            return True
    if 2 in axioms or 3 in axioms:
        if 2 in axioms and a2_single_violated(i, s):
            return True
        j = s.pointer
        if 2 in axioms:
            if j != i and rho[j - 1] is not None:
                a, b = min(i, j), max(i, j)
                if a2_pair_violated(a, rho[a - 1], b, rho[b - 1]):
                    return True
            for k, t in enumerate(rho, start=1):
                if t is not None and t.pointer == i and k != i and k != j:
                    return True
        if 3 in axioms and j != i:
            t = rho[j - 1]
            if t is not None and t.pointer == i:
                a, b = min(i, j), max(i, j)
                for c, d in matched_pairs(rho):
                    if (a < c < b < d) or (c < a < d < b):
                        return True
    if 4 in axioms:
        if i > 1 and rho[i - 2] is not None and a4_violated(rho[i - 2], s):
            return True
        if i < n and rho[i] is not None and a4_violated(s, rho[i]):
            return True
    return False


def contains_transition(s: Sequence[Symbol]) -> Optional[int]:
    """Smallest i with (b(s_i), b(s_{i+1})) forbidden by A4."""
    for i in range(1, len(s)):
        if a4_violated(s[i - 1], s[i]):
            return i
    return None


def is_well_formed_pairing(s: Sequence[Symbol]) -> bool:
    if any(x is None for x in s):
        raise ValueError("string is not fully assigned")
    return not all_falsified(s, axioms=(2, 3))


def satisfies_a1(s: Sequence[Symbol]) -> bool:
    return a1_start_ok(s[0]) and a1_end_ok(s[-1])


# -- exhaustive oracle -----------------------------------------------------

class BruteForceCapError(ValueError):
    pass


DEFAULT_ENUM_CAP = 5


def enumerate_satisfying(n: int, cap: int = DEFAULT_ENUM_CAP) -> tuple[int, list[Assignment]]:
    """Exact count and list of full strings satisfying A1-A4.

    Depth-first over positions, cutting any prefix that already falsifies an
    instance. Falsification is monotone under extension, so the count equals
    that of plain enumeration over (6n)^n strings.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > cap:
        raise BruteForceCapError(f"n={n} exceeds brute-force cap {cap} ((6n)^n = {(6 * n) ** n} strings)")
    sigma = alphabet(n)
    rho: list[Optional[Symbol]] = [None] * n
    models: list[Assignment] = []

    def rec(pos: int) -> None:
        if pos > n:
            models.append(tuple(rho))
            return
        for sym in sigma:
            rho[pos - 1] = sym
            if not falsified_at(rho, pos):
                rec(pos + 1)
        rho[pos - 1] = None

    rec(1)
    return len(models), models


def mate_symbol(i: int, sym: Symbol) -> Optional[Symbol]:
    """The symbol index sym.pointer must carry to pair with (i, sym)."""
    j = sym.pointer
    if j == i or sym.kind.shape is Shape.TRIVIAL:
        return None
    if sym.kind.shape is Shape.OPEN and j > i:
        return Symbol(BracketKind.make(Shape.CLOSE, sym.kind.color), i)
    if sym.kind.shape is Shape.CLOSE and j < i:
        return Symbol(BracketKind.make(Shape.OPEN, sym.kind.color), i)
    return None


def force_mates(rho: Sequence[Optional[Symbol]]) -> Optional[Assignment]:
    """Fill every unassigned pointer target with the forced mate symbol.

    Returns None when some assigned symbol cannot be paired (wrong direction,
    trivial symbol pointing elsewhere, or two symbols pointing at the same
    free index).
    """
    out = list(rho)
    for i in support(rho):
        s = rho[i - 1]
        j = s.pointer
        if j == i or rho[j - 1] is not None:
            continue
        mate = mate_symbol(i, s)
        if mate is None or out[j - 1] is not None:
            return None
        out[j - 1] = mate
    return tuple(out)


def locally_consistent(rho: Sequence[Optional[Symbol]]) -> bool:
    """rho with forced mates filled in falsifies no A1-A3 instance."""
    full = force_mates(rho)
    return full is not None and not all_falsified(full, axioms=(1, 2, 3))
