"""The container-maintaining adversary.

The recursion is written as a generator: each PlayRound suspends until the
engine reports the prover's next move (a query or a forget) and then
resumes. Between rounds the adversary keeps a configuration C that should
be a container of the game state; with checking enabled every round is
verified with check_container.

When the recursion returns (after d^l0 rounds) or fails, the adversary
keeps answering by PlayRound with the current separating interval
("extended play"). Failures are recorded, never hidden.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, TextIO

from .configuration import (
    BLUE,
    RED,
    BracketPair,
    DominationError,
    MoveError,
    area_intervals,
    buffer_check,
    check_container,
    complete_configuration,
    covered,
    largest_uncovered,
    minimal_dominating,
    move,
    separating_interval,
    sorted_pairs,
)
from .core import BracketKind, Symbol
from .game import AdversaryStrategy, GameView, consistent_candidates

EXTENDED_MIN_INTERVAL = 10


def _int_root_floor(x: int, q: int) -> int:
    """Largest d with d**q <= x."""
    d = int(round(x ** (1.0 / q)))
    while d ** q > x:
        d -= 1
    while (d + 1) ** q <= x:
        d += 1
    return d


@dataclass(frozen=True)
class AdversaryParams:
    n: int
    w: int
    eps: Fraction = Fraction(1, 8)

    def __post_init__(self):
        object.__setattr__(self, "eps", Fraction(self.eps).limit_denominator(10_000))
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.w < 2:
            raise ValueError("w must be >= 2")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")

    @property
    def l0(self) -> int:
        """floor(eps * log n / log w), computed exactly: max l with w^l <= n^eps."""
        p, q = self.eps.numerator, self.eps.denominator
        l, target = 0, self.n ** p
        while self.w ** ((l + 1) * q) <= target:
            l += 1
        return l

    @property
    def d(self) -> int:
        """floor(n^eps), computed exactly."""
        return _int_root_floor(self.n ** self.eps.numerator, self.eps.denominator)

    def threshold(self, level: int) -> float:
        return self.n / (4 * self.w) ** level

    def c(self, level: int) -> int:
        return 4 * self.d * self.w - (self.l0 - level)

    def A(self, level: int) -> int:
        a = 3 * self.d
        for _ in range(self.l0 - level):
            a = self.w * (a + 3 * self.d)
        return a

    @property
    def schedule_rounds(self) -> int:
        return self.d ** self.l0


class AdversaryFailure(Exception):
    def __init__(self, level, size: int, reason: str):
        super().__init__(f"FAILURE at level {level}: |I| = {size} ({reason})")
        self.level = level
        self.size = size
        self.reason = reason


@dataclass
class Failure:
    round: int
    level: object
    size: int
    reason: str


@dataclass
class AdversaryStats:
    rounds: int = 0
    container_checks: int = 0
    container_violations: list = field(default_factory=list)
    buffer_checks: int = 0
    buffer_violations: list = field(default_factory=list)
    cover_checks: int = 0
    cover_violations: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    schedule_done_round: Optional[int] = None

    @property
    def first_failure_round(self) -> Optional[int]:
        return self.failures[0].round if self.failures else None


def container_hash(pairs) -> str:
    text = ";".join(str(p) for p in sorted_pairs(pairs))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


class PaperAdversary(AdversaryStrategy):
    def __init__(self, params: AdversaryParams, check: bool = False, trace: Optional[TextIO] = None):
        self.params = params
        self.name = f"paper:eps={params.eps}"
        self.check = check
        self.trace = trace
        self.C: frozenset = frozenset()
        self.stats = AdversaryStats()
        self.failed = False
        self._event = None
        self._reply: Optional[Symbol] = None
        self._level = None
        self._interval = (1, params.n)
        self._gen = self._run()
        next(self._gen)

    # engine hooks --------------------------------------------------------------

    def answer(self, view: GameView, index: int) -> Symbol:
        self._event = ("Q", index, view)
        self._gen.send(None)
        return self._reply

    def observe_forget(self, view: GameView, indices: frozenset) -> None:
        self._event = ("F", indices, view)
        self._gen.send(None)

    # schedule ----------------------------------------------------------------

    def _fail(self, exc: AdversaryFailure) -> None:
        self.failed = True
        self.stats.failures.append(Failure(self.stats.rounds, exc.level, exc.size, exc.reason))

    def _run(self):
        p = self.params
        try:
            yield from self._adversary((1, p.n), 0)
            self.stats.schedule_done_round = self.stats.rounds
        except AdversaryFailure as exc:
            self._fail(exc)
        while True:
            interval = separating_interval(self.C, p.n)
            if not self.failed:
                if interval is None:
                    self._fail(AdversaryFailure("ext", 0, "configuration is not monotone"))
                elif interval[1] - interval[0] + 1 < EXTENDED_MIN_INTERVAL:
                    self._fail(AdversaryFailure("ext", interval[1] - interval[0] + 1, "separating interval too small"))
            yield from self._play_round(interval or (1, p.n), "ext")

    def _adversary(self, interval: tuple[int, int], level: int):
        p = self.params
        size = interval[1] - interval[0] + 1
        if size < p.threshold(level):
            raise AdversaryFailure(level, size, f"below n/(4w)^{level} = {p.threshold(level):.2f}")
        if level == p.l0:
            yield from self._play_round(interval, level)
            return
        c_entry = self.C
        for i in range(p.d):
            if self.check:
                self._cover_check(interval, level, i)
            tilde_i = largest_uncovered(self.C, interval)
            if tilde_i is None:
                raise AdversaryFailure(level, 0, "interval fully covered")
            try:
                self.C = move(self.C, tilde_i, p.n)
            except MoveError as e:
                raise AdversaryFailure(level, tilde_i[1] - tilde_i[0] + 1, str(e)) from None
            c_i = self.C
            sub = largest_uncovered(self.C, tilde_i)
            if sub is None:
                raise AdversaryFailure(level + 1, 0, "moved interval fully covered")
            yield from self._adversary(sub, level + 1)
            self._buffer(self.C - c_i, sub, p.c(level + 1), level + 1)
            self._buffer(self.C - c_entry, interval, p.c(level), level)

    def _cover_check(self, interval, level, i) -> None:
        a, b = interval
        cov = sum(max(0, min(y, b) - max(x, a) + 1) for x, y in area_intervals(self.C))
        bound = self.params.w * (self.params.A(level + 1) + 3 * i)
        self.stats.cover_checks += 1
        if cov > bound:
            self.stats.cover_violations.append((self.stats.rounds, level, i, cov, bound))

    def _buffer(self, pairs, interval, s, level) -> None:
        if not self.check or self.failed:
            return
        self.stats.buffer_checks += 1
        if not buffer_check(pairs, interval, s):
            self.stats.buffer_violations.append((self.stats.rounds, level, interval, s))

    def _play_round(self, interval: tuple[int, int], level):
        self._level, self._interval = level, interval
        before = self.C
        yield
        kind, arg, view = self._event
        self.stats.rounds += 1
        rho = view.assignment()
        if kind == "F":
            try:
                self.C = minimal_dominating(self.C, rho)
            except DominationError:
                pass
        else:
            self._reply = self._answer(arg, rho, interval)
        if level != "ext":
            self._buffer(self.C - before, interval, self.params.c(level), level)
        if self.check and not self.failed:
            state = list(rho)
            if kind == "Q":
                state[arg - 1] = self._reply
            self.stats.container_checks += 1
            problems = check_container(self.C, tuple(state))
            if problems:
                self.stats.container_violations.append((self.stats.rounds, problems))
        if self.trace is not None:
            self._emit(kind, arg, level, interval)

    def _answer(self, i: int, rho: tuple, interval: tuple[int, int]) -> Symbol:
        a, b = interval
        if covered(self.C, i):
            try:
                full = complete_configuration(self.C, rho)
                return full[i - 1]
            except DominationError:
                # only reachable after a failure: fall back to a consistent answer
                if not self.failed:
                    self._fail(AdversaryFailure(self._level, b - a + 1, "container lost domination"))
                cands = consistent_candidates_tuple(rho, i)
                return cands[0] if cands else Symbol(BracketKind.TR, i)
        if i < (a + b) / 2:
            self.C = self.C | {BracketPair(i, i, RED)}
            return Symbol(BracketKind.TR, i)
        self.C = self.C | {BracketPair(i, i, BLUE)}
        return Symbol(BracketKind.TB, i)

    def _emit(self, kind, arg, level, interval) -> None:
        rec = {
            "round": self.stats.rounds,
            "move": "query" if kind == "Q" else "forget",
            "level": level,
            "interval": list(interval),
            "container": container_hash(self.C),
            "pairs": len(self.C),
            "buffer_violations": len(self.stats.buffer_violations),
            "failed": self.failed,
        }
        if kind == "Q":
            rec["index"] = arg
            rec["answer"] = str(self._reply)
        self.trace.write(json.dumps(rec, sort_keys=True) + "\n")


def consistent_candidates_tuple(rho: tuple, i: int) -> list[Symbol]:
    from .game import view_of

    state = list(rho)
    state[i - 1] = None
    return consistent_candidates(view_of(state), i)


def paper_adversary(params: AdversaryParams, check: bool = False, trace: Optional[TextIO] = None) -> PaperAdversary:
    return PaperAdversary(params, check=check, trace=trace)
