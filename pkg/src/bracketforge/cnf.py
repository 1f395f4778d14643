"""Binary CNF model with per-variable block metadata, DIMACS I/O, brute force."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence, Union


from .core import Symbol, alphabet

Clause = tuple  # sorted tuple[int, ...] of non-zero literals


class BudgetError(RuntimeError):
    """A generator refused to build something larger than its budget."""

    def __init__(self, what: str, estimate: int, budget: int):
        super().__init__(f"{what}: estimated {estimate} exceeds budget {budget}")
        self.estimate = estimate
        self.budget = budget


class DimacsError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def default_clause_budget() -> int:
    """Clause budget, scaled from BRACKETFORGE_BUDGET_MB when set."""
    mb = os.environ.get("BRACKETFORGE_BUDGET_MB")
    if mb:
        # roughly 400 bytes per stored clause
        return max(1, int(float(mb) * 1024 * 1024 / 400))
    return 2_000_000


def make_clause(lits: Iterable[int]) -> Clause:
    c = tuple(sorted(set(lits), key=lambda l: (abs(l), l)))
    for a, b in zip(c, c[1:]):
        if a == -b:
            raise ValueError(f"tautological clause {c}")
    if any(l == 0 for l in c):
        raise ValueError("literal 0 is not allowed")
    return c


# -- variable metadata -----------------------------------------------------

@dataclass(frozen=True)
class BlockBit:
    index: int  # string index in [n]
    bit: int  # bit position in [m]

    def tag(self) -> str:
        return f"block {self.index} {self.bit}"


@dataclass(frozen=True)
class ExtVar:
    key: Clause  # canonical literal tuple of the wide clause D

    def tag(self) -> str:
        return "ext " + (",".join(map(str, self.key)) if self.key else "-")


@dataclass(frozen=True)
class GadgetVar:
    original: int
    role: str  # "sel" or "tab"
    position: int

    def tag(self) -> str:
        return f"gadget {self.original} {self.role} {self.position}"


VarMeta = Union[BlockBit, ExtVar, GadgetVar]


def parse_tag(text: str) -> VarMeta:
    parts = text.split()
    if parts[0] == "block" and len(parts) == 3:
        return BlockBit(int(parts[1]), int(parts[2]))
    if parts[0] == "ext" and len(parts) == 2:
        key = () if parts[1] == "-" else tuple(int(x) for x in parts[1].split(","))
        return ExtVar(key)
    if parts[0] == "gadget" and len(parts) == 4 and parts[2] in ("sel", "tab"):
        return GadgetVar(int(parts[1]), parts[2], int(parts[3]))
    raise ValueError(f"unknown meta tag {text!r}")


def block_of(meta: Optional[VarMeta], var: int) -> tuple:
    """Block key used for index-width: string index for wide variables,
    original variable for gadget variables, the variable itself otherwise."""
    if isinstance(meta, BlockBit):
        return ("i", meta.index)
    if isinstance(meta, GadgetVar):
        return ("g", meta.original)
    return ("v", var)


@dataclass
class Cnf:
    num_vars: int
    clauses: list[Clause] = field(default_factory=list)
    meta: dict[int, VarMeta] = field(default_factory=dict)

    def __post_init__(self):
        self._index: Optional[set] = None

    def __eq__(self, other):
        if not isinstance(other, Cnf):
            return NotImplemented
        return (self.num_vars, self.clauses, self.meta) == (other.num_vars, other.clauses, other.meta)

    def contains(self, clause: Clause) -> bool:
        if self._index is None or len(self._index) != len(self.clauses):
            self._index = set(self.clauses)
        return clause in self._index

    def clause_index_width(self, clause: Clause) -> int:
        return len({block_of(self.meta.get(abs(l)), abs(l)) for l in clause})

    def width(self) -> int:
        return max((len(c) for c in self.clauses), default=0)

    def index_width(self) -> int:
        return max((self.clause_index_width(c) for c in self.clauses), default=0)


# -- encoding of Sigma into bits -------------------------------------------

class Encoding:
    """Canonical injective map Sigma -> {0,1}^m, m = ceil(log2(6n)).

    Symbols are numbered in canonical (kind, pointer) order; bit b (1-based)
    of a code is (code >> (b-1)) & 1.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = n
        self.symbols = alphabet(n)
        self.m = max(1, math.ceil(math.log2(len(self.symbols))))
        self._code = {s: c for c, s in enumerate(self.symbols)}

    def encode(self, sym: Symbol) -> int:
        return self._code[sym]

    def decode(self, code: int) -> Optional[Symbol]:
        """None for garbage codes."""
        return self.symbols[code] if 0 <= code < len(self.symbols) else None

    def bits(self, code: int) -> tuple[int, ...]:
        return tuple((code >> b) & 1 for b in range(self.m))

    def var(self, index: int, bit: int) -> int:
        return (index - 1) * self.m + bit

    def block_vars(self, index: int) -> list[int]:
        return [self.var(index, b) for b in range(1, self.m + 1)]

    def literals_true(self, index: int, code: int) -> list[int]:
        """Literals that hold exactly when block `index` carries `code`."""
        return [v if (code >> b) & 1 else -v for b, v in enumerate(self.block_vars(index))]

    def forbid(self, assignment: dict[int, int]) -> Clause:
        """Clause false exactly on the given {index: code} block values."""
        lits = []
        for index in sorted(assignment):
            lits.extend(-l for l in self.literals_true(index, assignment[index]))
        return make_clause(lits)

    def block_meta(self) -> dict[int, VarMeta]:
        return {self.var(i, b): BlockBit(i, b) for i in range(1, self.n + 1) for b in range(1, self.m + 1)}

    def string_model(self, s: Sequence[Symbol]) -> list[bool]:
        """Full assignment (index 0 unused) that is the bit image of s."""
        model = [False] * (self.n * self.m + 1)
        for i, sym in enumerate(s, start=1):
            for l in self.literals_true(i, self.encode(sym)):
                model[abs(l)] = l > 0
        return model

    def decode_model(self, model: Sequence[bool]) -> list[Optional[Symbol]]:
        out = []
        for i in range(1, self.n + 1):
            code = sum(1 << (b - 1) for b in range(1, self.m + 1) if model[self.var(i, b)])
            out.append(self.decode(code))
        return out


# -- DIMACS ----------------------------------------------------------------

def dimacs_write(f: Cnf) -> bytes:
    lines = [f"c meta {v} {f.meta[v].tag()}" for v in sorted(f.meta)]
    lines.append(f"p cnf {f.num_vars} {len(f.clauses)}")
    lines.extend(" ".join(map(str, c + (0,))) for c in f.clauses)
    return ("\n".join(lines) + "\n").encode()


def dimacs_read(data: Union[bytes, str]) -> Cnf:
    text = data.decode() if isinstance(data, bytes) else data
    header: Optional[tuple[int, int]] = None
    meta: dict[int, VarMeta] = {}
    clauses: list[Clause] = []
    pending: list[int] = []
    lineno = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            parts = line.split(maxsplit=3)
            if len(parts) >= 2 and parts[1] == "meta":
                if len(parts) < 4:
                    raise DimacsError(lineno, "truncated meta line")
                try:
                    meta[int(parts[2])] = parse_tag(parts[3])
                except ValueError as e:
                    raise DimacsError(lineno, str(e)) from None
            continue
        if line.startswith("p"):
            parts = line.split()
            if header is not None:
                raise DimacsError(lineno, "duplicate header")
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(lineno, f"malformed header {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise DimacsError(lineno, f"malformed header {line!r}") from None
            if header[0] < 0 or header[1] < 0:
                raise DimacsError(lineno, "negative counts in header")
            continue
        if header is None:
            raise DimacsError(lineno, "clause before header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(lineno, f"bad literal {tok!r}") from None
            if lit == 0:
                try:
                    clauses.append(make_clause(pending))
                except ValueError as e:
                    raise DimacsError(lineno, str(e)) from None
                pending = []
            else:
                if abs(lit) > header[0]:
                    raise DimacsError(lineno, f"literal {lit} exceeds variable count {header[0]}")
                pending.append(lit)
    if header is None:
        raise DimacsError(lineno + 1, "missing header")
    if pending:
        raise DimacsError(lineno, "unterminated clause at end of file")
    if len(clauses) != header[1]:
        raise DimacsError(lineno, f"header announces {header[1]} clauses, found {len(clauses)}")
    return Cnf(header[0], clauses, meta)


# -- brute force -----------------------------------------------------------

DEFAULT_VAR_CAP = 48
DEFAULT_NODE_CAP = 5_000_000


def _decision_order(f: Cnf) -> list[int]:
    """Variables in id order, gadget selector bits first."""
    def rank(v):
        m = f.meta.get(v)
        return (0 if isinstance(m, GadgetVar) and m.role == "sel" else 1, v)
    return sorted(range(1, f.num_vars + 1), key=rank)


def brute_force_sat(
    f: Cnf,
    var_cap: int = DEFAULT_VAR_CAP,
    node_cap: int = DEFAULT_NODE_CAP,
) -> Optional[dict[int, bool]]:
    """Exact satisfiability by exhaustive enumeration of assignments.

    Variables are fixed one at a time in a static order. After each choice
    satisfied clauses are dropped and false literals removed; a branch stops
    when a clause becomes empty (no extension satisfies f) or when no clause
    is left (every extension does). Variables no remaining clause mentions
    are skipped, since both of their values behave the same. The answer is
    the same as that of plain 2^V enumeration.
    """
    nv = f.num_vars
    if nv > var_cap:
        raise BudgetError("brute force variables", nv, var_cap)
    if any(len(c) == 0 for c in f.clauses):
        return None
    order = _decision_order(f)
    model: dict[int, bool] = {v: False for v in range(1, nv + 1)}
    nodes = 0

    def rec(clauses: list, pos: int) -> bool:
        nonlocal nodes
        if not clauses:
            return True
        nodes += 1
        if nodes > node_cap:
            raise BudgetError("brute force search nodes", nodes, node_cap)
        mentioned = {abs(l) for c in clauses for l in c}
        while order[pos] not in mentioned:
            pos += 1
        v = order[pos]
        for val in (False, True):
            true_lit = v if val else -v
            nxt = []
            for c in clauses:
                if true_lit in c:
                    continue
                if -true_lit in c:
                    c = tuple(l for l in c if l != -true_lit)
                    if not c:
                        break
                nxt.append(c)
            else:
                model[v] = val
                if rec(nxt, pos + 1):
                    return True
        model[v] = False
        return False

    return dict(model) if rec(list(f.clauses), 0) else None


def enumerate_models(f: Cnf, var_cap: int = 24) -> Iterator[dict[int, bool]]:
    """Every model of f, by the same simplifying enumeration as
    brute_force_sat; variables left unconstrained are expanded both ways."""
    nv = f.num_vars
    if nv > var_cap:
        raise BudgetError("model enumeration variables", nv, var_cap)
    order = _decision_order(f)
    model: dict[int, bool] = {}

    def rec(clauses: list, pos: int):
        if pos == len(order):
            if not clauses:
                yield dict(model)
            return
        v = order[pos]
        for val in (False, True):
            true_lit = v if val else -v
            nxt = []
            for c in clauses:
                if true_lit in c:
                    continue
                if -true_lit in c:
                    c = tuple(l for l in c if l != -true_lit)
                    if not c:
                        break
                nxt.append(c)
            else:
                model[v] = val
                yield from rec(nxt, pos + 1)
        model.pop(v, None)

    if any(len(c) == 0 for c in f.clauses):
        return
    yield from rec(list(f.clauses), 0)


def evaluate(f: Cnf, model: Sequence[bool] | dict[int, bool]) -> bool:
    def val(l):
        return model[abs(l)] if l > 0 else not model[abs(l)]
    return all(any(val(l) for l in c) for c in f.clauses)
