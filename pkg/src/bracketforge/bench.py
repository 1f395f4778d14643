"""Experiment harness: capped games against the paper adversary and
uncapped memory measurements against random adversaries."""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .adversary import AdversaryParams, PaperAdversary
from .game import PROVER_WIN, RandomConsistentAdversary, play
from .prover import PaperProver, RandomProver

CSV_HEADER = ["n", "w", "prover", "adversary", "rounds", "max_memory", "status", "ms"]


@dataclass
class ExperimentConfig:
    n: list = field(default_factory=lambda: [256, 1024, 4096])
    w: list = field(default_factory=lambda: [4, 8, 16])
    eps: str = "1/8"
    seeds: list = field(default_factory=lambda: [0, 1, 2])
    round_cap: int = 2000
    memory_n: list = field(default_factory=lambda: [8, 16, 32, 64, 128, 256])
    memory_seeds: int = 100
    check: bool = False
    timing: bool = False

    def validate(self) -> None:
        for name in ("n", "w", "seeds", "memory_n"):
            if not getattr(self, name):
                raise ValueError(f"config list {name!r} is empty")
        if self.round_cap < 1 or self.memory_seeds < 1:
            raise ValueError("round cap and memory seeds must be positive")
        if any(w < 2 for w in self.w):
            raise ValueError("memory caps must be >= 2")
        Fraction(self.eps)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class ResultRow:
    n: int
    w: int
    prover: str
    adversary: str
    rounds: int
    max_memory: int
    status: str
    ms: int

    def sort_key(self):
        return (self.n, self.w, self.prover, self.adversary)


@dataclass
class BenchResult:
    rows: list
    summary: dict

    def csv_text(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(CSV_HEADER)
        for r in sorted(self.rows, key=ResultRow.sort_key):
            wr.writerow([r.n, r.w, r.prover, r.adversary, r.rounds, r.max_memory, r.status, r.ms])
        return buf.getvalue()


def survived(row: ResultRow, round_cap: int) -> int:
    """Rounds the adversary holds out: the game length when the prover wins,
    the whole round cap otherwise (a memory violation is a prover loss)."""
    return row.rounds if row.status.split(";")[0] == PROVER_WIN else round_cap


def run_bench(cfg: ExperimentConfig) -> BenchResult:
    cfg.validate()
    eps = Fraction(cfg.eps)
    rows: list[ResultRow] = []
    failures_in_regime = []

    def timed(fn):
        t = time.perf_counter()
        out = fn()
        return out, (int((time.perf_counter() - t) * 1000) if cfg.timing else 0)

    for n in cfg.n:
        for w in cfg.w:
            params = AdversaryParams(n, w, eps)
            provers = [("paper", PaperProver)] + [
                (f"random:{s}", (lambda s=s: RandomProver(s, w))) for s in cfg.seeds
            ]
            for pname, make in provers:
                adv = PaperAdversary(params, check=cfg.check)
                tr, ms = timed(lambda: play(n, make(), adv, w, cfg.round_cap))
                status = tr.result
                fr = adv.stats.first_failure_round
                if fr is not None:
                    status += f";failure@{fr}"
                    if fr <= params.schedule_rounds:
                        failures_in_regime.append((n, w, pname, fr))
                if cfg.check and (adv.stats.container_violations or adv.stats.buffer_violations):
                    status += ";invariant-violation"
                rows.append(ResultRow(n, w, pname, adv.name, tr.rounds, tr.max_memory, status, ms))

    for n in cfg.memory_n:
        worst, worst_rounds, total_ms = 0, 0, 0
        wins = 0
        for s in range(cfg.memory_seeds):
            tr, ms = timed(lambda: play(n, PaperProver(), RandomConsistentAdversary(s), n))
            worst = max(worst, tr.max_memory)
            worst_rounds = max(worst_rounds, tr.rounds)
            total_ms += ms
            wins += tr.result == PROVER_WIN
        status = PROVER_WIN if wins == cfg.memory_seeds else f"lost:{cfg.memory_seeds - wins}"
        rows.append(
            ResultRow(n, n, "paper", f"random:0-{cfg.memory_seeds - 1}", worst_rounds, worst, status, total_ms)
        )

    summary = _summary(cfg, rows, failures_in_regime)
    return BenchResult(rows, summary)


def _summary(cfg: ExperimentConfig, rows: list, failures_in_regime: list) -> dict:
    eps = Fraction(cfg.eps)
    mem_rows = sorted((r for r in rows if r.adversary.startswith("random:")), key=lambda r: r.n)
    ratios = {r.n: r.max_memory / math.log2(r.n) for r in mem_rows if r.n > 1}
    fit = None
    if len(mem_rows) >= 2:
        xs = [math.log2(r.n) for r in mem_rows]
        ys = [r.max_memory for r in mem_rows]
        slope, intercept = statistics.linear_regression(xs, ys)
        fit = {"slope": round(slope, 4), "intercept": round(intercept, 4)}
    game_rows = [r for r in rows if r.adversary.startswith("paper")]
    surv: dict = {}
    for r in game_rows:
        key = (r.n, r.w)
        surv[key] = min(surv.get(key, cfg.round_cap), survived(r, cfg.round_cap))
    monotone = True
    for n in cfg.n:
        seq = [surv[(n, w)] for w in sorted(cfg.w)]
        monotone &= all(a >= b for a, b in zip(seq, seq[1:]))
    return {
        "memory_over_log2n": {str(k): round(v, 4) for k, v in ratios.items()},
        "memory_fit": fit,
        "rounds_survived": {f"{n},{w}": v for (n, w), v in sorted(surv.items())},
        "schedule_rounds": {
            f"{n},{w}": AdversaryParams(n, w, eps).schedule_rounds for n in cfg.n for w in cfg.w
        },
        "rounds_nonincreasing_in_w": monotone,
        "failures_in_regime": [list(f) for f in failures_in_regime],
    }
