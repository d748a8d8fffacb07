"""Seeded random flow graphs for exercising the analysis against the oracle."""

from __future__ import annotations

import random

from .analysis import pool_meet, transfer
from .ir import BinOp, Const, FlowGraph, Node, Statement, Var
from .pool import EMPTY, TOP, ExpressionPool, ValueNumbers

VAR_NAMES = "abcdefgh"
MAX_VARS = 8
MAX_NODES = 16


class _Builder:
    def __init__(self, rng: random.Random, nvars: int):
        self.rng = rng
        self.vars = list(VAR_NAMES[:nvars])
        self.history: list[BinOp] = []
        self.nodes: list[Node] = [Node("entry")]
        self.edges: list[tuple[str, str]] = []
        self.count = 0

    def operand(self):
        if self.rng.random() < 0.15:
            return Const(self.rng.randint(0, 2))
        return Var(self.rng.choice(self.vars))

    def expression(self):
        rng = self.rng
        roll = rng.random()
        if self.history and roll < 0.45:
            return rng.choice(self.history)
        if roll < 0.6:
            return self.operand()
        e = BinOp(self.operand(), rng.choice("++**-/"), self.operand())
        self.history.append(e)
        return e

    def statement(self, target: str | None = None) -> Statement:
        target = target or self.rng.choice(self.vars)
        return Statement(target, self.expression())

    def node(self, stmts, prefix="n") -> str:
        self.count += 1
        node_id = f"{prefix}{self.count}"
        self.nodes.append(Node(node_id, tuple(stmts)))
        return node_id

    def chain(self, tail: str, k: int) -> str:
        for _ in range(k):
            stmts = [self.statement()]
            if self.rng.random() < 0.15:
                stmts.append(self.statement())
            n = self.node(stmts)
            self.edges.append((tail, n))
            tail = n
        return tail

    def diamond(self, tail: str, left: int, right: int) -> str:
        """Two arms joining at a fresh empty node; both arms define one
        shared variable, usually differently."""
        rng = self.rng
        shared = rng.choice(self.vars)
        ends = []
        for size in (left, right):
            if size == 0:
                ends.append(tail)
                continue
            end = tail
            for i in range(size):
                stmt = self.statement(shared if i == size - 1 else None)
                n = self.node([stmt])
                self.edges.append((end, n))
                end = n
            ends.append(end)
        join = self.node([], prefix="j")
        for end in ends:
            self.edges.append((end, join))
        return join

    def finish(self, tail: str, name: str) -> FlowGraph:
        self.nodes.append(Node("exit"))
        self.edges.append((tail, "exit"))
        return FlowGraph(name, tuple(self.nodes), tuple(self.edges), "entry", "exit")


def _split(rng: random.Random, total: int, parts: int) -> list[int]:
    cuts = sorted(rng.randint(0, total) for _ in range(parts - 1))
    bounds = [0] + cuts + [total]
    return [b - a for a, b in zip(bounds, bounds[1:])]


def random_program(seed: int, vars: int = 4, nodes: int = 8, diamonds: int = 1) -> FlowGraph:
    """Acyclic graph with ``nodes`` statement nodes over ``vars`` variables,
    containing ``diamonds`` sequential if/else diamonds."""
    if not 1 <= vars <= MAX_VARS or not 1 <= nodes <= MAX_NODES:
        raise ValueError("random_program supports vars <= 8 and nodes <= 16")
    if diamonds < 0 or 2 * diamonds > nodes:
        raise ValueError("each diamond needs at least two statement nodes")
    rng = random.Random(seed)
    b = _Builder(rng, vars)
    arms_total = rng.randint(2 * diamonds, nodes) if diamonds else 0
    straight = _split(rng, nodes - arms_total, diamonds + 1)
    arms = _split(rng, arms_total - 2 * diamonds, max(diamonds, 1)) if diamonds else []

    tail = b.chain("entry", straight[0])
    for i in range(diamonds):
        size = 2 + arms[i]
        left = rng.randint(0, size) if rng.random() < 0.2 else rng.randint(1, size - 1)
        tail = b.diamond(tail, left, size - left)
        tail = b.chain(tail, straight[i + 1])
    return b.finish(tail, f"rand{seed}")


def random_loop_program(seed: int, vars: int = 4, nodes: int = 8) -> FlowGraph:
    """Single natural loop: prefix, header, body with a back edge, suffix."""
    if not 1 <= vars <= MAX_VARS or not 3 <= nodes <= MAX_NODES:
        raise ValueError("random_loop_program supports vars <= 8 and 3 <= nodes <= 16")
    rng = random.Random(seed)
    b = _Builder(rng, vars)
    body = rng.randint(1, nodes - 2)
    pre, post = _split(rng, nodes - body, 2)
    tail = b.chain("entry", pre)
    header = b.node([], prefix="h")
    b.edges.append((tail, header))
    counter = rng.choice(b.vars)
    last = b.chain(header, body - 1)
    step = BinOp(Var(counter), "+", Const(1))
    end = b.node([Statement(counter, step)])
    b.edges.append((last, end))
    b.edges.append((end, header))
    tail = b.chain(header, post)
    return b.finish(tail, f"loop{seed}")


def random_pool_family(seed: int, size: int = 3, numbers: ValueNumbers | None = None,
                       top_rate: float = 0.05) -> list[ExpressionPool]:
    """``size`` valid pools sharing a common history, as produced by the
    analysis at sibling program points: a shared straight-line prefix, then
    a private suffix per pool, sometimes passed through a confluence."""
    rng = random.Random(seed)
    if numbers is None:
        numbers = ValueNumbers()
    b = _Builder(rng, rng.randint(2, 6))

    def run(pool, k):
        for _ in range(k):
            stmt = b.statement()
            if stmt.target in stmt.uses():
                continue
            pool = transfer(Node("s", (stmt,)), pool, numbers)
        return pool

    base = run(EMPTY, rng.randint(0, 6))
    family = []
    for _ in range(size):
        if rng.random() < top_rate:
            family.append(TOP)
            continue
        pool = run(base, rng.randint(0, 5))
        if rng.random() < 0.3:
            pool = run(pool_meet(pool, run(base, rng.randint(1, 4)), numbers), rng.randint(0, 2))
        family.append(pool)
    return family
