"""Configurations of bracket pairs: area, completion, containers, Move.

A configuration is a set of BracketPairs whose induced partial assignment
falsifies nothing and assigns both ends of every pair. Pairs are value
objects (left, right, colour); a trivial pair has left == right.
"""

from __future__ import annotations

import sys
from typing import Iterable, NamedTuple, Optional, Sequence

from .core import (
    BLUE_START as _BLUE_START,
    RED_END as _RED_END,
    BracketKind,
    Color,
    Shape,
    Symbol,
    a4_violated,
    all_falsified,
    force_mates,
    support,
)


class BracketPair(NamedTuple):
    left: int
    right: int
    color: Color

    @property
    def trivial(self) -> bool:
        return self.left == self.right

    def area(self) -> range:
        return range(self.left, self.right + 1)

    def contains(self, other: "BracketPair") -> bool:
        return self.left <= other.left and other.right <= self.right

    def symbols(self) -> list[tuple[int, Symbol]]:
        if self.trivial:
            return [(self.left, Symbol(BracketKind.make(Shape.TRIVIAL, self.color), self.left))]
        return [
            (self.left, Symbol(BracketKind.make(Shape.OPEN, self.color), self.right)),
            (self.right, Symbol(BracketKind.make(Shape.CLOSE, self.color), self.left)),
        ]

    def __str__(self) -> str:
        c = "r" if self.color is Color.RED else "b"
        return f"{c}[{self.left},{self.right}]"


RED, BLUE = Color.RED, Color.BLUE
Configuration = frozenset  # of BracketPair


class ConfigurationError(ValueError):
    pass


class DominationError(ValueError):
    """No closed configuration extends both inputs."""


class MoveError(ValueError):
    pass


def pair_key(p: BracketPair) -> tuple:
    return (p.left, p.right, p.color.value)


def sorted_pairs(pairs: Iterable[BracketPair]) -> list[BracketPair]:
    return sorted(pairs, key=pair_key)


def pairs_of_assignment(rho: Sequence[Optional[Symbol]]) -> frozenset:
    """The complete pairs of an assignment (incomplete ones are ignored)."""
    out = set()
    for i in support(rho):
        s = rho[i - 1]
        j = s.pointer
        if s.kind.shape is Shape.TRIVIAL and j == i:
            out.add(BracketPair(i, i, s.kind.color))
        elif s.kind.shape is Shape.OPEN and j > i and rho[j - 1] is not None and rho[j - 1].pointer == i:
            out.add(BracketPair(i, j, s.kind.color))
    return frozenset(out)


def assignment(pairs: Iterable[BracketPair], n: int) -> tuple:
    rho: list = [None] * n
    for p in pairs:
        if not (1 <= p.left <= p.right <= n):
            raise ConfigurationError(f"pair {p} outside [1, {n}]")
        for i, sym in p.symbols():
            if rho[i - 1] is not None and rho[i - 1] != sym:
                raise ConfigurationError(f"pairs disagree at index {i}")
            rho[i - 1] = sym
    return tuple(rho)


def is_configuration(pairs: Iterable[BracketPair], n: int) -> bool:
    try:
        rho = assignment(pairs, n)
    except ConfigurationError:
        return False
    return not all_falsified(rho)


def area_intervals(pairs: Iterable[BracketPair]) -> list[tuple[int, int]]:
    """area(C) as sorted disjoint maximal intervals."""
    out: list[list[int]] = []
    for p in sorted(pairs, key=pair_key):
        if out and p.left <= out[-1][1] + 1:
            out[-1][1] = max(out[-1][1], p.right)
        else:
            out.append([p.left, p.right])
    return [(a, b) for a, b in out]


def area_size(pairs: Iterable[BracketPair]) -> int:
    return sum(b - a + 1 for a, b in area_intervals(pairs))


def covered(pairs: Iterable[BracketPair], i: int) -> bool:
    return any(p.left <= i <= p.right for p in pairs)


def top_level(pairs: Iterable[BracketPair]) -> list[BracketPair]:
    ps = list(pairs)
    return sorted_pairs(p for p in ps if not any(q != p and q.contains(p) for q in ps))


def uncovered_runs(pairs: Iterable[BracketPair], interval: tuple[int, int]) -> list[tuple[int, int]]:
    a, b = interval
    runs = []
    start = a
    for x, y in area_intervals(pairs):
        if y < a or x > b:
            continue
        if x > start:
            runs.append((start, x - 1))
        start = max(start, y + 1)
    if start <= b:
        runs.append((start, b))
    return runs


def largest_uncovered(pairs: Iterable[BracketPair], interval: tuple[int, int]) -> Optional[tuple[int, int]]:
    """Largest sub-interval with no covered index; ties go to the leftmost."""
    best = None
    for r in uncovered_runs(pairs, interval):
        if best is None or r[1] - r[0] > best[1] - best[0]:
            best = r
    return best


def is_monotone(pairs: Iterable[BracketPair]) -> bool:
    return separating_interval(pairs, None) is not None


def separating_interval(pairs: Iterable[BracketPair], n: Optional[int]) -> Optional[tuple[int, int]]:
    """Maximal uncovered interval between the red and the blue top-level
    pairs (None when the configuration is not monotone)."""
    top = top_level(pairs)
    reds = [p for p in top if p.color is RED]
    blues = [p for p in top if p.color is BLUE]
    lo = max((p.right for p in reds), default=0) + 1
    hi = min((p.left for p in blues), default=(n if n is not None else 10**18) + 1) - 1
    if lo > hi:
        return None
    return (lo, hi)


# -- completion --------------------------------------------------------------

HOLE_STACK_CAP = 4


def _fill_segment(full: list, l: int, r: int) -> None:
    """Fill the unassigned interior of the top-level pair [l, r] in place.

    Depth-first over positions with memoised dead states (position, stack,
    previous kind). Holes prefer a trivial pair of the innermost enclosing
    colour, then the other trivial colour, then closing a hole-opened pair,
    then opening a new one (at most HOLE_STACK_CAP hole-opened pairs deep).
    """
    color_of_top = full[l - 1].kind.color
    dead: set = set()
    choice: dict[int, BracketKind] = {}

    def options(i: int, stack: tuple, prev: BracketKind):
        inner = stack[-1][1] if stack else color_of_top
        other = BLUE if inner is RED else RED
        opts = [BracketKind.make(Shape.TRIVIAL, inner), BracketKind.make(Shape.TRIVIAL, other)]
        if stack and stack[-1][0] == "h":
            opts.append(BracketKind.make(Shape.CLOSE, stack[-1][1]))
        if sum(1 for e in stack if e[0] == "h") < HOLE_STACK_CAP:
            opts.append(BracketKind.make(Shape.OPEN, inner))
            opts.append(BracketKind.make(Shape.OPEN, other))
        return opts

    def step(i: int, stack: tuple, kind: BracketKind, sym: Optional[Symbol]) -> Optional[tuple]:
        if kind.shape is Shape.TRIVIAL:
            if sym is not None and sym.pointer != i:
                return None
            return stack
        if kind.shape is Shape.OPEN:
            if sym is None:
                return stack + (("h", kind.color),)
            if not i < sym.pointer < r:
                return None
            return stack + (("f", kind.color, sym.pointer),)
        if not stack:
            return None
        top = stack[-1]
        if sym is None:
            return stack[:-1] if top[0] == "h" and top[1] is kind.color else None
        if top[0] == "f" and top[1] is kind.color and top[2] == i:
            return stack[:-1]
        return None

    def rec(i: int, stack: tuple, prev: BracketKind) -> bool:
        if i == r:
            return not stack and not a4_violated(Symbol(prev, 0), full[r - 1])
        key = (i, stack, prev)
        if key in dead:
            return False
        sym = full[i - 1]
        kinds = [sym.kind] if sym is not None else options(i, stack, prev)
        for kind in kinds:
            if prev in _RED_END and kind in _BLUE_START:
                continue
            nxt = step(i, stack, kind, sym)
            if nxt is None:
                continue
            choice[i] = kind
            if rec(i + 1, nxt, kind):
                return True
        dead.add(key)
        return False

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 4 * (r - l) + 1000))
    try:
        ok = rec(l + 1, (), full[l - 1].kind)
    finally:
        sys.setrecursionlimit(old)
    if not ok:
        raise DominationError(f"no consistent filling inside [{l}, {r}]")
    opened: list[int] = []
    for i in range(l + 1, r):
        if full[i - 1] is not None:
            continue
        kind = choice[i]
        if kind.shape is Shape.TRIVIAL:
            full[i - 1] = Symbol(kind, i)
        elif kind.shape is Shape.OPEN:
            opened.append(i)
            full[i - 1] = Symbol(kind, 0)  # pointer set when closed
        else:
            j = opened.pop()
            full[j - 1] = Symbol(full[j - 1].kind, i)
            full[i - 1] = Symbol(kind, j)
        # forced opens never enter `opened`: their mates are assigned


def complete_configuration(pairs: Iterable[BracketPair], rho: Sequence[Optional[Symbol]]) -> tuple:
    """Canonical closed configuration C' extending the pairs and rho.

    Returns C' as a partial assignment over area(C). Raises DominationError
    when rho is not covered or no completion exists.
    """
    n = len(rho)
    pairs = list(pairs)
    try:
        base = list(assignment(pairs, n))
    except ConfigurationError as e:
        raise DominationError(str(e)) from None
    for i in support(rho):
        if not covered(pairs, i):
            raise DominationError(f"index {i} is assigned but not covered")
        if base[i - 1] is not None and base[i - 1] != rho[i - 1]:
            raise DominationError(f"index {i} disagrees with the configuration")
        base[i - 1] = rho[i - 1]
    forced = force_mates(base)
    if forced is None:
        raise DominationError("some assigned bracket cannot be paired")
    full = list(forced)
    for i in support(full):
        if not covered(pairs, i):
            raise DominationError(f"forced mate at {i} falls outside the area")
    for p in top_level(pairs):
        if not p.trivial:
            _fill_segment(full, p.left, p.right)
    out = tuple(full)
    if all_falsified(out) or force_mates(out) != out:
        raise DominationError("completion is inconsistent")
    return out


def dominates(pairs: Iterable[BracketPair], rho: Sequence[Optional[Symbol]]) -> bool:
    try:
        complete_configuration(pairs, rho)
    except DominationError:
        return False
    return True


def minimal_dominating(pairs: Iterable[BracketPair], rho: Sequence[Optional[Symbol]]) -> frozenset:
    """Greedy left-to-right removal of pairs while domination survives,
    repeated until nothing can be removed."""
    cur = set(pairs)
    changed = True
    while changed:
        changed = False
        for p in sorted_pairs(cur):
            trial = cur - {p}
            if dominates(trial, rho):
                cur = trial
                changed = True
    return frozenset(cur)


def check_container(pairs: Iterable[BracketPair], rho: Sequence[Optional[Symbol]]) -> list[str]:
    """Empty list when pairs form a container of rho; otherwise violations."""
    n = len(rho)
    pairs = frozenset(pairs)
    problems = []
    if not is_configuration(pairs, n):
        problems.append("not a configuration")
        return problems
    if not dominates(pairs, (None,) * n):
        problems.append("not locally consistent")
    if not is_monotone(pairs):
        problems.append("not monotone")
    if not dominates(pairs, rho):
        problems.append("does not dominate the state")
    else:
        for p in sorted_pairs(pairs):
            if dominates(pairs - {p}, rho):
                problems.append(f"not minimal: {p} is redundant")
                break
    if len(pairs) > len(support(rho)):
        problems.append(f"{len(pairs)} pairs for a support of {len(support(rho))}")
    return problems


# -- Move and buffers -----------------------------------------------------

def move(pairs: Iterable[BracketPair], interval: tuple[int, int], n: int) -> frozenset:
    """Replace red pairs right of the interval and blue pairs left of it by
    minimally enclosing pairs of the opposite colour, merging overlaps."""
    a, b = interval
    pairs = frozenset(pairs)
    wrong = [p for p in pairs if (p.color is RED and p.left > b) or (p.color is BLUE and p.right < a)]
    if not wrong:
        return pairs
    new: list[BracketPair] = []
    for p in wrong:
        if p.left - 1 < 1 or p.right + 1 > n:
            raise MoveError(f"no pair strictly encloses {p} inside [1, {n}]")
        new.append(BracketPair(p.left - 1, p.right + 1, BLUE if p.color is RED else RED))
    merged = True
    while merged:
        merged = False
        new.sort(key=pair_key)
        for k in range(len(new) - 1):
            p, q = new[k], new[k + 1]
            if q.left <= p.right:
                if p.color is not q.color:
                    raise MoveError(f"overlapping replacement pairs {p} and {q} differ in colour")
                new[k : k + 2] = [BracketPair(p.left, max(p.right, q.right), p.color)]
                merged = True
                break
    keep = pairs - frozenset(wrong)
    for p in new:
        for q in keep:
            if p.left <= q.right and q.left <= p.right:
                raise MoveError(f"replacement pair {p} overlaps {q}")
    return keep | frozenset(new)


def buffer_check(pairs: Iterable[BracketPair], interval: tuple[int, int], s: int) -> bool:
    """True iff every pair inside [1, a+s] is trivial red and every pair
    inside [b-s, n] is trivial blue."""
    a, b = interval
    for p in pairs:
        if p.right <= a + s and not (p.trivial and p.color is RED):
            return False
        if p.left >= b - s and not (p.trivial and p.color is BLUE):
            return False
    return True
