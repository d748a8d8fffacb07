"""Global value numbering over a normalized flow graph.

``transfer`` applies one assignment to a pool, ``pool_meet`` combines the
pools arriving at a confluence point, and ``run_gvn`` iterates both in
reverse postorder until no node's output pool changes (up to renaming of
value numbers).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Iterable

from .ir import BinOp, FlowGraph, Node, Var, operands_of, reverse_postorder
from .pool import (
    EMPTY,
    TOP,
    ExpressionPool,
    ValueExpr,
    ValueNumbers,
    add_member,
    check_invariants,
    delete_singletons,
    ensure_operand,
    lookup,
    pools_equivalent,
    remove_variable,
    value_exp,
    with_class,
)

Observer = Callable[[int, str, ExpressionPool, ExpressionPool], None]


class NonConvergenceError(RuntimeError):
    def __init__(self, sweeps: int, previous: dict, last: dict):
        super().__init__(f"no fixpoint after {sweeps} sweeps")
        self.sweeps = sweeps
        self.previous = previous
        self.last = last


def _numbers_after(*pools: ExpressionPool) -> ValueNumbers:
    top = max((max(p.value_numbers(), default=0) for p in pools if not p.is_top), default=0)
    return ValueNumbers(top + 1)


# -- transfer ------------------------------------------------------------------

def transfer(node: Node, ein: ExpressionPool, numbers: ValueNumbers | None = None) -> ExpressionPool:
    stmt = node.stmt
    if ein.is_top or stmt is None:
        return ein
    if stmt.target in stmt.uses():
        raise ValueError(f"node {node.id}: target occurs in its right-hand side; normalize first")
    if numbers is None:
        numbers = _numbers_after(ein)
    pool = delete_singletons(remove_variable(ein, stmt.target))
    for o in operands_of(stmt.rhs):
        pool, _ = ensure_operand(pool, o, numbers)
    e = value_exp(pool, stmt.rhs)
    vn = lookup(pool, e)
    x = Var(stmt.target)
    if vn is not None:
        pool = add_member(pool, vn, x)
    else:
        pool = with_class(pool, numbers.fresh(), {x, e})
    return pool


# -- confluence ----------------------------------------------------------------

@dataclass
class MeetContext:
    """State of one ``pool_meet``: the two inputs, the classes built so far,
    and the result for every value-number pair already intersected."""

    left: ExpressionPool
    right: ExpressionPool
    numbers: ValueNumbers
    memo: dict[tuple[int, int], int | None] = field(default_factory=dict)
    active: set[tuple[int, int]] = field(default_factory=set)
    out: dict[int, set] = field(default_factory=dict)


def class_meet(ctx: MeetContext, vi: int, vj: int) -> int | None:
    """Intersect class ``vi`` of the left pool with class ``vj`` of the right.

    Returns the value number of the resulting class in ``ctx.out``, or None
    when the classes share nothing.
    """
    key = (vi, vj)
    if key in ctx.memo:
        return ctx.memo[key]
    if key in ctx.active:
        return None
    ctx.active.add(key)
    ci, cj = ctx.left.members(vi), ctx.right.members(vj)
    members: set = {m for m in ci & cj if not isinstance(m, ValueExpr)}
    ve_i, ve_j = ctx.left.value_expression(vi), ctx.right.value_expression(vj)
    if ve_i is not None and ve_j is not None and ve_i.op == ve_j.op:
        k1 = class_meet(ctx, ve_i.left, ve_j.left)
        k2 = class_meet(ctx, ve_i.right, ve_j.right) if k1 is not None else None
        if k1 is not None and k2 is not None:
            members.add(ValueExpr(k1, ve_i.op, k2))
    result = None
    if members:
        # A value number present on both sides names the same class lineage.
        result = vi if vi == vj else ctx.numbers.fresh()
        ctx.out[result] = members
    ctx.active.discard(key)
    ctx.memo[key] = result
    return result


def _may_meet(ctx: MeetContext, vi: int, vj: int) -> bool:
    ci, cj = ctx.left.members(vi), ctx.right.members(vj)
    if not ci.isdisjoint(cj):
        return True
    ve_i, ve_j = ctx.left.value_expression(vi), ctx.right.value_expression(vj)
    return ve_i is not None and ve_j is not None and ve_i.op == ve_j.op


def pool_meet(ei: ExpressionPool, ej: ExpressionPool, numbers: ValueNumbers | None = None) -> ExpressionPool:
    if ei.is_top:
        return ej
    if ej.is_top:
        return ei
    if numbers is None:
        numbers = _numbers_after(ei, ej)
    ctx = MeetContext(ei, ej, numbers)
    for vi in ei.value_numbers():
        for vj in ej.value_numbers():
            if _may_meet(ctx, vi, vj):
                class_meet(ctx, vi, vj)
    result = delete_singletons(ExpressionPool(ctx.out))
    check_invariants(result)
    return result


def meet_many(pools: Iterable[ExpressionPool], numbers: ValueNumbers | None = None) -> ExpressionPool:
    pools = list(pools)
    if not pools:
        raise ValueError("meet of no pools")
    if numbers is None:
        numbers = _numbers_after(*pools)
    return reduce(lambda a, b: pool_meet(a, b, numbers), pools)


# -- fixpoint ------------------------------------------------------------------

@dataclass(frozen=True)
class AnalysisResult:
    ein: dict[str, ExpressionPool]
    eout: dict[str, ExpressionPool]
    sweeps: int
    order: tuple[str, ...]
    numbers: ValueNumbers = field(repr=False, compare=False)
    converged: bool = True


def default_max_sweeps(g: FlowGraph) -> int:
    return 4 * len(g.nodes) + 8


def _sweep(g, order, preds, nodes, ein, eout, numbers, index, observer) -> bool:
    changed = False
    for n in order:
        if n == g.entry:
            continue
        new_in = meet_many([eout[p] for p in preds[n]], numbers)
        new_out = transfer(nodes[n], new_in, numbers)
        if not pools_equivalent(new_out, eout[n]):
            changed = True
        ein[n], eout[n] = new_in, new_out
        if observer is not None:
            observer(index, n, new_in, new_out)
    return changed


def run_gvn(g: FlowGraph, max_sweeps: int | None = None, observer: Observer | None = None) -> AnalysisResult:
    if not g.is_normalized():
        raise ValueError("run_gvn needs a normalized graph")
    if max_sweeps is None:
        max_sweeps = default_max_sweeps(g)
    order = reverse_postorder(g)
    preds = g.predecessors()
    nodes = g.node_map()
    numbers = ValueNumbers()
    ein = {n.id: TOP for n in g.nodes}
    eout = dict(ein)
    ein[g.entry] = eout[g.entry] = EMPTY

    sweeps = 0
    previous = dict(eout)
    while True:
        if sweeps == max_sweeps:
            raise NonConvergenceError(sweeps, previous, dict(eout))
        previous = dict(eout)
        sweeps += 1
        if not _sweep(g, order, preds, nodes, ein, eout, numbers, sweeps, observer):
            break
    return AnalysisResult(ein, eout, sweeps, tuple(order), numbers)


def extra_sweep(g: FlowGraph, result: AnalysisResult) -> list[str]:
    """Run one more sweep from ``result``; return nodes whose pools changed."""
    ein, eout = dict(result.ein), dict(result.eout)
    _sweep(g, result.order, g.predecessors(), g.node_map(), ein, eout, result.numbers, result.sweeps + 1, None)
    return [
        n for n in result.order
        if not (pools_equivalent(ein[n], result.ein[n]) and pools_equivalent(eout[n], result.eout[n]))
    ]


def binary_value_expression(pool: ExpressionPool, e: BinOp, numbers: ValueNumbers) -> tuple[ExpressionPool, ValueExpr]:
    """Value expression of ``e``, extending a scratch copy of ``pool`` with
    classes for operands it has never seen."""
    for o in e.operands:
        pool, _ = ensure_operand(pool, o, numbers)
    return pool, value_exp(pool, e)
