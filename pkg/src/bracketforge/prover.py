"""The logarithmic-memory prover.

The prover keeps a stack of frames (R, B, M): R is a red pair to the left
of a blue pair B, and M is the pair found in the gap between them. It
queries the middle of the gap (and the mate of a non-trivial answer) to
learn M. When M is blue and encloses R, or red and encloses B, M is handed
back to the parent frame. Otherwise a child frame searches the narrower gap
(R, M) or (M, B). Pairs never leave the stack except by being returned, so
the stack height bounds the memory, and each child gap is at most half of
its parent's.

Everything not held by a stack pair is forgotten after each structural
change. The final answers always sit next to each other: a red end right
before a blue start, which falsifies A4 unless the adversary gave up an
A1-A3 violation first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

from .core import Color, Shape
from .game import Forget, GameView, ProverStrategy, Query


class Pair(NamedTuple):
    left: int
    right: int
    color: Color

    def encloses(self, other: "Pair") -> bool:
        return self.left < other.left and other.right < self.right


@dataclass
class Frame:
    R: Pair
    B: Pair
    M: Optional[Pair] = None

    def key(self):
        return (self.R, self.B, self.M)


class ProverStuck(RuntimeError):
    pass


def read_pair(view: GameView, i: int) -> Optional[Pair]:
    """The pair at index i if both of its ends are assigned."""
    s = view.get(i)
    if s is None:
        return None
    if s.kind.shape is Shape.TRIVIAL:
        return Pair(i, i, s.kind.color)
    j = s.pointer
    if view.get(j) is None:
        return None
    return Pair(min(i, j), max(i, j), s.kind.color)


def _goal(frame: Frame, x: Pair) -> bool:
    if x.color is Color.BLUE:
        return x.encloses(frame.R)
    return x.encloses(frame.B)


class PaperProver(ProverStrategy):
    """Deterministic state machine; fingerprint() captures all of its state."""

    name = "paper"

    def __init__(self):
        self.phase = "init_r"
        self.awaiting: Optional[int] = None
        self.r0: Optional[Pair] = None
        self.stack: list[Frame] = []

    def fingerprint(self):
        return (self.phase, self.awaiting, self.r0, tuple(f.key() for f in self.stack))

    def stack_height(self) -> int:
        return len(self.stack)

    def _live(self) -> set[int]:
        live = set()
        pairs = [self.r0] if self.r0 is not None else []
        for f in self.stack:
            pairs.extend(p for p in (f.R, f.B, f.M) if p is not None)
        for p in pairs:
            live.update((p.left, p.right))
        if self.awaiting is not None:
            live.add(self.awaiting)
        return live

    def _offer(self, x: Pair) -> None:
        while True:
            if not self.stack:
                raise ProverStuck("pair returned past the root frame")
            top = self.stack[-1]
            if _goal(top, x):
                self.stack.pop()
                continue
            top.M = x
            if x.color is Color.BLUE:
                self.stack.append(Frame(top.R, x))
            else:
                self.stack.append(Frame(x, top.B))
            return

    def _got_pair(self, p: Pair) -> None:
        if self.phase == "init_r":
            self.r0 = p
            self.phase = "init_b"
        elif self.phase == "init_b":
            self.stack = [Frame(self.r0, p)]
            self.r0 = None
            self.phase = "run"
        else:
            self._offer(p)

    def next_move(self, view: GameView):
        n = view.n
        while True:
            if self.awaiting is not None:
                i = self.awaiting
                s = view.get(i)
                if s is None:
                    return Query(i)
                p = read_pair(view, i)
                if p is None:
                    return Query(s.pointer)
                self.awaiting = None
                self._got_pair(p)
            extra = set(view.support()) - self._live()
            if extra:
                return Forget(frozenset(extra))
            if self.phase == "init_r":
                target = 1
            elif self.phase == "init_b":
                target = n
            else:
                top = self.stack[-1]
                lo, hi = top.R.right, top.B.left
                if hi - lo < 2:
                    raise ProverStuck(f"empty gap between {top.R} and {top.B}")
                target = (lo + hi) // 2
            self.awaiting = target
            if view.get(target) is None:
                return Query(target)
            # already known (a stack pair end or a partial pair): re-enter loop


class RandomProver(ProverStrategy):
    """Queries uniformly random indices and forgets random symbols so that
    the state never exceeds memory w (a fuzzing opponent)."""

    def __init__(self, seed: int, w: int):
        import random

        self.seed = seed
        self.w = w
        self.name = f"random:{seed}"
        self.rng = random.Random(seed)

    def fingerprint(self):
        return self.rng.getstate()

    def next_move(self, view: GameView):
        supp = view.support()
        if len(supp) >= self.w:
            k = self.rng.randint(1, len(supp))
            return Forget(frozenset(self.rng.sample(supp, k)))
        return Query(self.rng.randint(1, view.n))


def paper_prover(n: Optional[int] = None) -> PaperProver:
    """The logarithmic-memory prover (it needs no parameters; n is accepted
    for symmetry with the other factories)."""
    return PaperProver()
