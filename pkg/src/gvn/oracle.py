"""Brute-force Herbrand equivalence, used to check the analysis.

Every entry-to-point path is executed symbolically with uninterpreted
operators.  Two expressions are Herbrand-equal at a point when they evaluate
to the same term on every path reaching it.  Nothing here shares code with
the pool algorithms; the checks only *read* the pools produced by
:func:`gvn.analysis.run_gvn`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Union

from .ir import BinOp, Const, Expression, FlowGraph, Var, back_edges, is_acyclic
from .pool import ValueExpr, ValueNumbers, ensure_operand, lookup, value_exp

DEFAULT_PATH_BUDGET = 10_000
DEFAULT_EXPANSION_BUDGET = 5_000


class OracleBudgetError(RuntimeError):
    pass


class Point(NamedTuple):
    node: str
    side: str  # "in" | "out"

    def __str__(self) -> str:
        return f"{self.side.upper()}({self.node})"


# -- symbolic terms ------------------------------------------------------------

class Term:
    """Immutable symbolic value: ``initial(v)``, ``literal(c)`` or
    ``apply(op, l, r)``.  Equality is structural; the hash is cached."""

    __slots__ = ("kind", "value", "left", "right", "_hash")

    def __init__(self, kind: str, value, left: "Term | None" = None, right: "Term | None" = None):
        self.kind = kind
        self.value = value
        self.left = left
        self.right = right
        self._hash = hash((kind, value, left, right))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Term) or self._hash != other._hash:
            return False
        return (
            self.kind == other.kind
            and self.value == other.value
            and self.left == other.left
            and self.right == other.right
        )

    def __str__(self) -> str:
        if self.kind == "init":
            return f"{self.value}₀"
        if self.kind == "lit":
            return str(self.value)
        return f"({self.left} {self.value} {self.right})"

    __repr__ = __str__


class TermFactory:
    """Hash-conses terms so equal terms built by one factory are identical."""

    def __init__(self):
        self._table: dict[tuple, Term] = {}

    def _make(self, kind, value, left=None, right=None) -> Term:
        key = (kind, value, left, right)
        t = self._table.get(key)
        if t is None:
            t = self._table[key] = Term(kind, value, left, right)
        return t

    def initial(self, name: str) -> Term:
        return self._make("init", name)

    def literal(self, value: int) -> Term:
        return self._make("lit", value)

    def apply(self, op: str, left: Term, right: Term) -> Term:
        return self._make("app", op, left, right)


@dataclass(frozen=True)
class PathState:
    env: dict

    def read(self, name: str, terms: TermFactory) -> Term:
        t = self.env.get(name)
        return t if t is not None else terms.initial(name)


@dataclass(frozen=True)
class Apply:
    """Nested expression, as represented by a value expression."""

    op: str
    left: "OracleExpr"
    right: "OracleExpr"

    def __str__(self) -> str:
        def side(e):
            return f"({e})" if isinstance(e, (Apply, BinOp)) else str(e)
        return f"{side(self.left)} {self.op} {side(self.right)}"


OracleExpr = Union[Var, Const, BinOp, Apply]


def evaluate(e: OracleExpr, state: PathState, terms: TermFactory) -> Term:
    if isinstance(e, Var):
        return state.read(e.name, terms)
    if isinstance(e, Const):
        return terms.literal(e.value)
    return terms.apply(e.op, evaluate(e.left, state, terms), evaluate(e.right, state, terms))


# -- path enumeration ----------------------------------------------------------

def collect_states(g: FlowGraph, unroll: int = 3, budget: int = DEFAULT_PATH_BUDGET,
                   terms: TermFactory | None = None) -> dict[Point, list[PathState]]:
    """Path states at the input and output of every node.

    Walks every path from entry, following each back edge at most
    ``unroll`` times along one path.
    """
    if terms is None:
        terms = TermFactory()
    succ = g.successors()
    nodes = g.node_map()
    loops = back_edges(g)
    states: dict[Point, list[PathState]] = {}
    for n in g.nodes:
        states[Point(n.id, "in")] = []
        states[Point(n.id, "out")] = []

    stack = [(g.entry, {}, {})]
    while stack:
        node_id, env, used = stack.pop()
        at_in = states[Point(node_id, "in")]
        at_in.append(PathState(env))
        if len(at_in) > budget:
            raise OracleBudgetError(f"more than {budget} paths reach {Point(node_id, 'in')}")
        for s in nodes[node_id].stmts:
            value = evaluate(s.rhs, PathState(env), terms)
            env = dict(env)
            env[s.target] = value
        states[Point(node_id, "out")].append(PathState(env))
        for b in reversed(succ[node_id]):
            edge = (node_id, b)
            if edge in loops:
                if used.get(edge, 0) >= unroll:
                    continue
                stack.append((b, env, {**used, edge: used.get(edge, 0) + 1}))
            else:
                stack.append((b, env, used))
    return states


def enumerate_paths(g: FlowGraph, point: Point, unroll: int = 3,
                    budget: int = DEFAULT_PATH_BUDGET) -> list[PathState]:
    return collect_states(g, unroll, budget)[Point(*point)]


def final_states(g: FlowGraph, variables: Iterable[str], unroll: int = 3,
                 budget: int = DEFAULT_PATH_BUDGET) -> list[dict[str, Term]]:
    """Per-path value of each of ``variables`` at the exit node's output."""
    terms = TermFactory()
    states = collect_states(g, unroll, budget, terms)[Point(g.exit, "out")]
    names = list(variables)
    return [{v: s.read(v, terms) for v in names} for s in states]


# -- Herbrand partitions -------------------------------------------------------

@dataclass(frozen=True)
class HerbrandPartition:
    point: Point
    classes: tuple[frozenset, ...]

    def class_of(self, item) -> frozenset:
        for c in self.classes:
            if item in c:
                return c
        raise KeyError(item)

    def equivalent(self, a, b) -> bool:
        return b in self.class_of(a)


def universe(g: FlowGraph) -> list[Expression]:
    """Variables, constants and binary expressions occurring in ``g``."""
    return [Var(v) for v in g.variables()] + [Const(c) for c in g.constants()] + g.binary_expressions()


def _sort_key(e) -> tuple:
    order = {Var: 0, Const: 1, BinOp: 2, Apply: 3}
    return (order[type(e)], str(e))


def _partition(items, states, terms) -> tuple[frozenset, ...]:
    groups: dict[tuple, list] = {}
    for item in items:
        vector = tuple(evaluate(item, s, terms) for s in states)
        groups.setdefault(vector, []).append(item)
    classes = [frozenset(c) for c in groups.values()]
    return tuple(sorted(classes, key=lambda c: min(_sort_key(e) for e in c)))


def herbrand_partition(g: FlowGraph, point: Point, unroll: int = 3,
                       budget: int = DEFAULT_PATH_BUDGET) -> HerbrandPartition:
    terms = TermFactory()
    states = collect_states(g, unroll, budget, terms)[Point(*point)]
    return HerbrandPartition(Point(*point), _partition(universe(g), states, terms))


# -- checks against the analysis ----------------------------------------------

@dataclass(frozen=True)
class Finding:
    """A violated (soundness) or missed (completeness) equivalence."""

    point: Point
    a: str
    b: str
    terms_a: tuple[str, ...]
    terms_b: tuple[str, ...]
    kind: str

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "point": str(self.point),
            "pair": [self.a, self.b],
            "paths": [{"a": ta, "b": tb} for ta, tb in zip(self.terms_a, self.terms_b)],
        }

    def __str__(self) -> str:
        return f"{self.kind} at {self.point}: {self.a} vs {self.b}"


def _pool_at(r, point: Point):
    return (r.ein if point.side == "in" else r.eout)[point.node]


def _points(g: FlowGraph) -> list[Point]:
    return [Point(n.id, side) for n in g.nodes for side in ("in", "out")]


def represented_expressions(pool, vn: int, depth: int = 2, budget: int = DEFAULT_EXPANSION_BUDGET) -> list[OracleExpr]:
    """Program expressions a class stands for, nesting at most ``depth``
    operators."""
    atoms = sorted((m for m in pool.members(vn) if not isinstance(m, ValueExpr)), key=_sort_key)
    out: list[OracleExpr] = list(atoms)
    ve = pool.value_expression(vn)
    if depth > 0 and ve is not None:
        lefts = represented_expressions(pool, ve.left, depth - 1, budget)
        rights = represented_expressions(pool, ve.right, depth - 1, budget)
        if len(lefts) * len(rights) > budget:
            raise OracleBudgetError(f"class v{vn} stands for more than {budget} expressions")
        for l, r in itertools.product(lefts, rights):
            if isinstance(l, (Var, Const)) and isinstance(r, (Var, Const)):
                out.append(BinOp(l, ve.op, r))
            else:
                out.append(Apply(ve.op, l, r))
    return out


def check_soundness(g: FlowGraph, r, unroll: int = 3, budget: int = DEFAULT_PATH_BUDGET) -> list[Finding]:
    """Every pair of expressions the analysis puts in one class must be
    Herbrand-equal on every enumerated path."""
    terms = TermFactory()
    states = collect_states(g, unroll, budget, terms)
    findings = []
    for point in _points(g):
        pool = _pool_at(r, point)
        paths = states[point]
        if pool.is_top or not paths:
            continue
        for vn in pool.value_numbers():
            exprs = represented_expressions(pool, vn)
            if len(exprs) < 2:
                continue
            first = exprs[0]
            ref = tuple(evaluate(first, s, terms) for s in paths)
            for e in exprs[1:]:
                vec = tuple(evaluate(e, s, terms) for s in paths)
                if vec != ref:
                    findings.append(Finding(point, str(first), str(e), tuple(map(str, ref)),
                                            tuple(map(str, vec)), "violation"))
    return findings


def _co_classified(pool, a: Expression, b: Expression) -> bool:
    scratch = pool
    numbers = ValueNumbers(max(pool.value_numbers(), default=0) + 1)
    for e in (a, b):
        if isinstance(e, BinOp):
            for o in e.operands:
                scratch, _ = ensure_operand(scratch, o, numbers)
    ka = value_exp(scratch, a) if isinstance(a, BinOp) else a
    kb = value_exp(scratch, b) if isinstance(b, BinOp) else b
    if isinstance(a, BinOp) and isinstance(b, BinOp):
        return ka == kb
    va, vb = lookup(scratch, ka), lookup(scratch, kb)
    return va is not None and va == vb


def check_completeness_acyclic(g: FlowGraph, r, budget: int = DEFAULT_PATH_BUDGET) -> list[Finding]:
    """Every Herbrand-equal pair of program variables, constants and binary
    program expressions must be co-classified by the analysis."""
    if not is_acyclic(g):
        raise ValueError("completeness is only checked on acyclic graphs")
    terms = TermFactory()
    states = collect_states(g, 0, budget, terms)
    items = universe(g)
    findings = []
    for point in _points(g):
        pool = _pool_at(r, point)
        paths = states[point]
        if pool.is_top or not paths:
            continue
        for cls in _partition(items, paths, terms):
            for a, b in itertools.combinations(sorted(cls, key=_sort_key), 2):
                if not _co_classified(pool, a, b):
                    ta = tuple(str(evaluate(a, s, terms)) for s in paths)
                    tb = tuple(str(evaluate(b, s, terms)) for s in paths)
                    findings.append(Finding(point, str(a), str(b), ta, tb, "missed"))
    return findings
