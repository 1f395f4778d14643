"""Resolution proof DAGs: model, checker, metrics and the RES text format.

RES format, one node per line, node ids implicit (1-based line order):

    a <lits> 0                 axiom
    r <p1> <p2> <pivot> <lits> 0   resolvent of p1 (pivot positive) and p2
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .cnf import Cnf, Clause, block_of, make_clause


class ProofError(ValueError):
    def __init__(self, node: int, msg: str):
        super().__init__(f"node {node}: {msg}")
        self.node = node


class ResParseError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


@dataclass(frozen=True)
class Node:
    clause: Clause
    parents: tuple[int, ...] = ()  # 1-based ids; empty for axioms
    pivot: int = 0

    @property
    def is_axiom(self) -> bool:
        return not self.parents


@dataclass
class ProofDag:
    nodes: list[Node] = field(default_factory=list)

    def __len__(self):
        return len(self.nodes)

    def node(self, i: int) -> Node:
        return self.nodes[i - 1]


@dataclass(frozen=True)
class ProofMetrics:
    size: int
    width: int
    index_width: int
    depth: int

    def as_dict(self) -> dict:
        return {"size": self.size, "width": self.width, "index_width": self.index_width, "depth": self.depth}


def resolve(c1: Clause, c2: Clause, pivot: int) -> Clause:
    if pivot not in c1:
        raise ValueError(f"pivot {pivot} not positive in first parent")
    if -pivot not in c2:
        raise ValueError(f"pivot {pivot} not negative in second parent")
    return make_clause([l for l in c1 if l != pivot] + [l for l in c2 if l != -pivot])


def depths(p: ProofDag) -> list[int]:
    """Longest path length from an axiom to each node (axioms at 0)."""
    d = [0] * len(p.nodes)
    for k, nd in enumerate(p.nodes):
        if nd.parents:
            d[k] = 1 + max(d[q - 1] for q in nd.parents)
    return d


def metrics(p: ProofDag, meta: Optional[dict] = None) -> ProofMetrics:
    meta = meta or {}
    width = max((len(nd.clause) for nd in p.nodes), default=0)
    iw = max((len({block_of(meta.get(abs(l)), abs(l)) for l in nd.clause}) for nd in p.nodes), default=0)
    dep = depths(p)
    return ProofMetrics(len(p.nodes), width, iw, dep[-1] if dep else 0)


def check_refutation(f: Cnf, p: ProofDag) -> ProofMetrics:
    """Verify every step of p against f; the last node must be empty."""
    if not p.nodes:
        raise ProofError(0, "empty proof")
    for k, nd in enumerate(p.nodes, start=1):
        c = nd.clause
        if list(c) != sorted(set(c), key=lambda l: (abs(l), l)) or any(l == 0 for l in c):
            raise ProofError(k, "clause is not a sorted duplicate-free literal list")
        if any(a == -b for a, b in zip(c, c[1:])):
            raise ProofError(k, "tautological clause")
        if nd.is_axiom:
            if not f.contains(c):
                raise ProofError(k, f"axiom {c} is not a clause of the formula")
            continue
        if len(nd.parents) != 2:
            raise ProofError(k, "resolution needs exactly two parents")
        for q in nd.parents:
            if not 1 <= q < k:
                raise ProofError(k, f"parent {q} does not precede the node")
        c1, c2 = p.node(nd.parents[0]).clause, p.node(nd.parents[1]).clause
        if nd.pivot <= 0:
            raise ProofError(k, "pivot must be a positive variable id")
        try:
            expect = resolve(c1, c2, nd.pivot)
        except ValueError as e:
            raise ProofError(k, str(e)) from None
        if expect != c:
            raise ProofError(k, f"wrong resolvent: expected {expect}, found {c}")
    if p.nodes[-1].clause:
        raise ProofError(len(p.nodes), "final clause is not empty")
    return metrics(p, f.meta)


class ProofBuilder:
    """Appends nodes with clause-level deduplication.

    Each distinct clause appears at most once, so node ids can be used as
    clause handles.
    """

    def __init__(self):
        self.proof = ProofDag()
        self._by_clause: dict[Clause, int] = {}

    def clause(self, i: int) -> Clause:
        return self.proof.nodes[i - 1].clause

    def axiom(self, clause) -> int:
        clause = make_clause(clause)
        if clause in self._by_clause:
            return self._by_clause[clause]
        self.proof.nodes.append(Node(clause))
        self._by_clause[clause] = len(self.proof.nodes)
        return len(self.proof.nodes)

    def resolve(self, pos: int, neg: int, var: int) -> int:
        """Resolve on var; if either side lacks its pivot literal, reuse it
        (it already subsumes the resolvent)."""
        c1, c2 = self.clause(pos), self.clause(neg)
        if var not in c1:
            return pos
        if -var not in c2:
            return neg
        clause = resolve(c1, c2, var)
        if clause in self._by_clause:
            return self._by_clause[clause]
        self.proof.nodes.append(Node(clause, (pos, neg), var))
        self._by_clause[clause] = len(self.proof.nodes)
        return len(self.proof.nodes)

    def finish(self, sink: int) -> ProofDag:
        """Truncate to the nodes the sink depends on, renumbering."""
        keep = set()
        stack = [sink]
        while stack:
            k = stack.pop()
            if k in keep:
                continue
            keep.add(k)
            stack.extend(self.proof.nodes[k - 1].parents)
        order = sorted(keep)
        renum = {old: new for new, old in enumerate(order, start=1)}
        out = ProofDag()
        for old in order:
            nd = self.proof.nodes[old - 1]
            out.nodes.append(Node(nd.clause, tuple(renum[q] for q in nd.parents), nd.pivot))
        return out


def bit_tree(builder: ProofBuilder, bits: list[int], leaf) -> int:
    """Eliminate the variables `bits` by a complete binary resolution tree.

    leaf(code) returns the node id for the full pattern `code` (bit b of code
    is the value of bits[b]); the node's clause may mention bits only with
    the sign they have under `code` (i.e. falsified by it).
    """
    def rec(depth: int, prefix: int) -> int:
        if depth < 0:
            return leaf(prefix)
        var = bits[depth]
        zero = rec(depth - 1, prefix)
        one = rec(depth - 1, prefix | (1 << depth))
        # under var=0 the branch clause may contain +var; under var=1, -var
        return builder.resolve(zero, one, var)

    return rec(len(bits) - 1, 0)


# -- RES format ------------------------------------------------------------

def res_write(p: ProofDag) -> bytes:
    lines = []
    for nd in p.nodes:
        lits = " ".join(map(str, nd.clause + (0,)))
        if nd.is_axiom:
            lines.append(f"a {lits}")
        else:
            lines.append(f"r {nd.parents[0]} {nd.parents[1]} {nd.pivot} {lits}")
    return ("\n".join(lines) + "\n").encode() if lines else b""


def res_read(data: Union[bytes, str]) -> ProofDag:
    text = data.decode() if isinstance(data, bytes) else data
    p = ProofDag()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    elif lines:
        raise ResParseError(len(lines), "truncated file: last line not terminated")
    for lineno, line in enumerate(lines, start=1):
        toks = line.split()
        if not toks:
            raise ResParseError(lineno, "empty line")
        try:
            nums = [int(t) for t in toks[1:]]
        except ValueError:
            raise ResParseError(lineno, f"non-integer token in {line!r}") from None
        if not nums or nums[-1] != 0 or 0 in nums[:-1] and toks[0] == "a":
            raise ResParseError(lineno, "clause must end with a single 0")
        if toks[0] == "a":
            lits = nums[:-1]
            parents, pivot = (), 0
        elif toks[0] == "r":
            if len(nums) < 4:
                raise ResParseError(lineno, "resolution line needs p1 p2 pivot and a clause")
            parents, pivot, lits = (nums[0], nums[1]), nums[2], nums[3:-1]
            if 0 in lits:
                raise ResParseError(lineno, "clause must end with a single 0")
        else:
            raise ResParseError(lineno, f"unknown rule {toks[0]!r}")
        p.nodes.append(Node(tuple(lits), parents, pivot))
    return p


# -- mutation harness --------------------------------------------------------

MUTATIONS = ("flip", "drop", "insert", "parent", "swap", "pivot")


def mutate(p: ProofDag, rng, num_vars: int) -> tuple[ProofDag, str]:
    """One random single edit of a literal, a parent or a pivot.

    The edit always changes the proof; whether the result is still a valid
    refutation is for the checker to decide.
    """
    while True:
        kind = rng.choice(MUTATIONS)
        k = rng.randrange(len(p.nodes))
        nd = p.nodes[k]
        lits = list(nd.clause)
        if kind == "flip" and lits:
            j = rng.randrange(len(lits))
            lits[j] = -lits[j]
            new = Node(tuple(lits), nd.parents, nd.pivot)
        elif kind == "drop" and lits:
            del lits[rng.randrange(len(lits))]
            new = Node(tuple(lits), nd.parents, nd.pivot)
        elif kind == "insert":
            free = [v for v in range(1, num_vars + 1) if v not in {abs(l) for l in lits}]
            if not free:
                continue
            lits.append(rng.choice(free) * rng.choice((1, -1)))
            new = Node(tuple(sorted(lits, key=lambda l: (abs(l), l))), nd.parents, nd.pivot)
        elif kind == "parent" and nd.parents and k >= 2:
            side = rng.randrange(2)
            choices = [q for q in range(1, k + 1) if q != nd.parents[side]]
            ps = list(nd.parents)
            ps[side] = rng.choice(choices)
            new = Node(nd.clause, tuple(ps), nd.pivot)
        elif kind == "swap" and nd.parents:
            new = Node(nd.clause, nd.parents[::-1], nd.pivot)
        elif kind == "pivot" and nd.parents and num_vars > 1:
            new = Node(nd.clause, nd.parents, rng.choice([v for v in range(1, num_vars + 1) if v != nd.pivot]))
        else:
            continue
        out = ProofDag(list(p.nodes))
        out.nodes[k] = new
        return out, f"{kind}@{k + 1}"
