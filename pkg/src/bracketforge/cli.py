"""Command-line entry point: gen, play, check, convert, bench, oracle.

Proofs and formulas are only ever written to files; stdout carries JSON
(counts, metrics, transcripts, summaries) so it stays machine readable.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .adversary import AdversaryParams, PaperAdversary
from .bench import ExperimentConfig, run_bench
from .cnf import BudgetError, Cnf, DimacsError, ExtVar, brute_force_sat, dimacs_read, dimacs_write
from .core import enumerate_satisfying
from .formulas import (
    IndexGadgetSpec,
    compose_with_index_gadget,
    gen_bracket_narrow,
    gen_bracket_wide,
)
from .game import ExtractionBudgetError, RandomConsistentAdversary, extract_state_dag, play
from .proofs import ProofError, ResParseError, check_refutation, res_read, res_write
from .prover import PaperProver, RandomProver
from .statedag import state_dag_to_resolution
from .transforms import TransformError, lift_refutation, narrow_to_strategy, wide_to_narrow

EXIT_OK, EXIT_FAIL, EXIT_BUDGET = 0, 1, 2


def _emit(obj) -> None:
    print(json.dumps(obj, separators=(",", ":"), sort_keys=False))


def _metrics_json(m) -> dict:
    return {"size": m.size, "width": m.width, "index_width": m.index_width, "depth": m.depth}


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _is_wide(f: Cnf) -> bool:
    return bool(f.meta) and not any(isinstance(m, ExtVar) for m in f.meta.values())


# -- gen ---------------------------------------------------------------------

def cmd_gen(args) -> int:
    budget = args.budget_clauses
    if args.mode == "wide":
        f = gen_bracket_wide(args.n, budget=budget)
    elif args.mode == "narrow":
        wide = gen_bracket_wide(args.n, budget=budget)
        if args.support_from:
            p = res_read(Path(args.support_from).read_bytes())
            f = wide_to_narrow(p, args.n, args.k, wide=wide).formula
        else:
            f = gen_bracket_narrow(args.n, args.k, "full", wide=wide, budget=budget)
    else:
        if args.t is None:
            raise SystemExit("gen: --mode lifted needs --t")
        wide = gen_bracket_wide(args.n, budget=budget)
        f = compose_with_index_gadget(wide, IndexGadgetSpec(args.t), budget)
    Path(args.out).write_bytes(dimacs_write(f))
    out = {"mode": args.mode, "n": args.n, "variables": f.num_vars, "clauses": len(f.clauses), "out": args.out}
    if args.proof_out:
        if args.mode != "wide":
            raise SystemExit("gen: --proof-out is only available for --mode wide")
        dag = extract_state_dag(args.n, PaperProver(), args.n)
        p = state_dag_to_resolution(args.n, dag)
        Path(args.proof_out).write_bytes(res_write(p))
        out["proof"] = _metrics_json(check_refutation(f, p))
    _emit(out)
    return EXIT_OK


# -- play --------------------------------------------------------------------

def _make_prover(spec: str, n: int, w: int, cnf_path):
    if spec == "paper":
        return PaperProver()
    if spec.startswith("random:"):
        return RandomProver(int(spec.split(":", 1)[1]), w)
    if spec.startswith("fromproof:"):
        p = res_read(Path(spec.split(":", 1)[1]).read_bytes())
        if cnf_path:
            f = dimacs_read(Path(cnf_path).read_bytes())
        else:
            f = gen_bracket_wide(n)
        if _is_wide(f):
            check_refutation(f, p)
            res = wide_to_narrow(p, n, wide=f)
            p, f = res.proof, res.formula
        return narrow_to_strategy(p, f, n)
    raise SystemExit(f"play: unknown prover {spec!r}")


def _make_adversary(spec: str, n: int, w: int, eps: Fraction, check: bool, trace):
    if spec == "paper":
        return PaperAdversary(AdversaryParams(n, w, eps), check=check, trace=trace)
    if spec.startswith("random:"):
        return RandomConsistentAdversary(int(spec.split(":", 1)[1]))
    raise SystemExit(f"play: unknown adversary {spec!r}")


def cmd_play(args) -> int:
    w = args.w if args.w is not None else args.n
    trace = open(args.trace, "w") if args.trace else None
    try:
        prover = _make_prover(args.prover, args.n, w, args.cnf)
        adv = _make_adversary(args.adversary, args.n, w, Fraction(args.eps), args.check, trace)
        tr = play(args.n, prover, adv, w, args.rounds)
    finally:
        if trace is not None:
            trace.close()
    out = tr.to_json()
    if isinstance(adv, PaperAdversary):
        st = adv.stats
        out["adversary"] = {
            "schedule_rounds": adv.params.schedule_rounds,
            "first_failure_round": st.first_failure_round,
            "container_violations": len(st.container_violations),
            "buffer_violations": len(st.buffer_violations),
        }
    if args.out:
        Path(args.out).write_text(json.dumps(out, separators=(",", ":")) + "\n")
    _emit(out)
    return EXIT_OK if tr.result == "prover-win" else EXIT_FAIL


# -- check / convert ---------------------------------------------------------

def cmd_check(args) -> int:
    f = dimacs_read(Path(args.cnf).read_bytes())
    p = res_read(Path(args.proof).read_bytes())
    try:
        m = check_refutation(f, p)
    except ProofError as e:
        _emit({"accepted": False, "node": e.node, "error": str(e)})
        return EXIT_FAIL
    _emit(_metrics_json(m))
    return EXIT_OK


def cmd_convert(args) -> int:
    p = res_read(Path(args.proof).read_bytes())
    f = dimacs_read(Path(args.cnf).read_bytes()) if args.cnf else gen_bracket_wide(args.n)
    check_refutation(f, p)
    if args.direction == "wide2narrow":
        res = wide_to_narrow(p, args.n, args.k, wide=f)
        q, g = res.proof, res.formula
    else:
        if args.t is None:
            raise SystemExit("convert: --direction lift needs --t")
        res = lift_refutation(p, f, IndexGadgetSpec(args.t), budget=args.budget_clauses)
        q, g = res.proof, res.formula
    m = check_refutation(g, q)
    Path(args.out).write_bytes(res_write(q))
    if args.out_cnf:
        Path(args.out_cnf).write_bytes(dimacs_write(g))
    out = _metrics_json(m)
    if args.direction == "lift":
        out["exponent"] = round(res.exponent, 4)
    _emit(out)
    return EXIT_OK


# -- bench / oracle ----------------------------------------------------------

def cmd_bench(args) -> int:
    cfg = ExperimentConfig.from_json(Path(args.config).read_text()) if args.config else ExperimentConfig()
    for name in ("n", "w", "seeds", "memory_n"):
        val = getattr(args, name)
        if val is not None:
            setattr(cfg, name, val)
    for name in ("eps", "round_cap", "memory_seeds"):
        val = getattr(args, name)
        if val is not None:
            setattr(cfg, name, val)
    cfg.check = cfg.check or args.check
    cfg.timing = cfg.timing or args.timing
    try:
        cfg.validate()
    except ValueError as e:
        raise SystemExit(f"bench: invalid config: {e}")
    result = run_bench(cfg)
    Path(args.out).write_text(result.csv_text())
    _emit(result.summary)
    return EXIT_FAIL if result.summary["failures_in_regime"] else EXIT_OK


def cmd_oracle(args) -> int:
    report = {"satisfying_strings": {}, "wide_unsat": {}}
    ok = True
    for n in range(1, args.max_n + 1):
        count, _ = enumerate_satisfying(n, cap=args.max_n)
        report["satisfying_strings"][str(n)] = count
        ok &= count == 0
    for n in range(1, min(args.max_n, 3) + 1):
        sat = brute_force_sat(gen_bracket_wide(n)) is not None
        report["wide_unsat"][str(n)] = not sat
        ok &= not sat
    report["ok"] = ok
    _emit(report)
    return EXIT_OK if ok else EXIT_FAIL


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bracketforge", description="Bracket formulas, the prover-adversary game and resolution proofs.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a DIMACS formula")
    g.add_argument("--n", type=_positive, required=True)
    g.add_argument("--mode", choices=["wide", "narrow", "lifted"], default="wide")
    g.add_argument("--t", type=int, help="gadget fan-in (lifted mode)")
    g.add_argument("--k", type=int, default=4, help="index-width bound (narrow mode)")
    g.add_argument("--support-from", help="wide RES proof whose extension keys define the narrow formula")
    g.add_argument("--budget-clauses", type=_positive)
    g.add_argument("--out", default="formula.dimacs")
    g.add_argument("--proof-out", help="also write the prover's refutation (wide mode, small n)")
    g.set_defaults(func=cmd_gen)

    p = sub.add_parser("play", help="play one game and print the transcript")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--w", type=_positive, help="memory cap (default n)")
    p.add_argument("--prover", default="paper", help="paper | random:<seed> | fromproof:<res>")
    p.add_argument("--cnf", help="formula the fromproof refutation refutes (default: wide formula)")
    p.add_argument("--adversary", default="paper", help="paper | random:<seed>")
    p.add_argument("--rounds", type=_positive, help="round cap (default 10 n^3)")
    p.add_argument("--eps", default="1/8")
    p.add_argument("--check", action="store_true", help="verify adversary invariants every round")
    p.add_argument("--trace", help="write adversary JSON lines here")
    p.add_argument("--out", help="also write the transcript JSON here")
    p.set_defaults(func=cmd_play)

    c = sub.add_parser("check", help="check a refutation and print its metrics")
    c.add_argument("--cnf", required=True)
    c.add_argument("--proof", required=True)
    c.set_defaults(func=cmd_check)

    v = sub.add_parser("convert", help="translate a wide refutation")
    v.add_argument("--direction", choices=["wide2narrow", "lift"], required=True)
    v.add_argument("--n", type=_positive, required=True)
    v.add_argument("--proof", required=True)
    v.add_argument("--cnf", help="formula of the input proof (default: wide formula)")
    v.add_argument("--t", type=int)
    v.add_argument("--k", type=int, default=4)
    v.add_argument("--budget-clauses", type=_positive)
    v.add_argument("--out", required=True, help="output RES file")
    v.add_argument("--out-cnf", help="also write the target formula")
    v.set_defaults(func=cmd_convert)

    b = sub.add_parser("bench", help="run the experiment grid")
    b.add_argument("--config", help="JSON config; flags override its fields")
    b.add_argument("--n", type=_positive, nargs="+")
    b.add_argument("--w", type=_positive, nargs="+")
    b.add_argument("--seeds", type=int, nargs="+")
    b.add_argument("--memory-n", type=_positive, nargs="+")
    b.add_argument("--memory-seeds", type=_positive)
    b.add_argument("--eps")
    b.add_argument("--round-cap", type=_positive)
    b.add_argument("--check", action="store_true")
    b.add_argument("--timing", action="store_true", help="fill the ms column (breaks byte-reproducibility)")
    b.add_argument("--out", default="bench.csv")
    b.set_defaults(func=cmd_bench)

    o = sub.add_parser("oracle", help="run the brute-force oracles")
    o.add_argument("--max-n", type=int, default=4)
    o.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (BudgetError, ExtractionBudgetError) as e:
        print(f"bracketforge: budget refused: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (ProofError, TransformError) as e:
        node = getattr(e, "node", None)
        _emit({"accepted": False, "node": node, "error": str(e)})
        return EXIT_FAIL
    except (DimacsError, ResParseError, OSError, ValueError) as e:
        print(f"bracketforge: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
