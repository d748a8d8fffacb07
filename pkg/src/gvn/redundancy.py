"""Redundancy verdicts from fixpoint pools, and witness-based rewriting."""

from __future__ import annotations

from dataclasses import dataclass, field

from .analysis import AnalysisResult, binary_value_expression
from .ir import TEMP_PREFIX, BinOp, Expression, FlowGraph, Statement, Var, replace_statement, validate
from .pool import ValueNumbers, lookup

REDUNDANT = "redundant"
NOVEL = "novel"
COPY = "copy"
UNREACHABLE = "unreachable"


@dataclass(frozen=True)
class RedundancyVerdict:
    node: str
    target: str
    expr: Expression
    kind: str
    redundant: bool
    vn: int | None = None
    witnesses: tuple[str, ...] = ()
    origin: str | None = None

    @property
    def statement(self) -> str:
        return f"{self.target} = {self.expr}"

    def to_json(self) -> dict:
        return {
            "node": self.node,
            "origin": self.origin or self.node,
            "stmt": self.statement,
            "kind": self.kind,
            "vn": None if self.vn is None else f"v{self.vn}",
            "witnesses": list(self.witnesses),
        }

    def __str__(self) -> str:
        vn = f" v{self.vn}" if self.vn is not None else ""
        wit = ", ".join(self.witnesses) if self.witnesses else "-"
        return f"{self.node}: {self.statement}  {self.kind}{vn}  witnesses: {wit}"


@dataclass(frozen=True)
class RedundancyReport:
    verdicts: tuple[RedundancyVerdict, ...]
    counts: dict[str, int] = field(default_factory=dict)

    def redundant(self) -> list[RedundancyVerdict]:
        return [v for v in self.verdicts if v.kind == REDUNDANT]

    def verdict(self, node: str) -> RedundancyVerdict:
        for v in self.verdicts:
            if v.node == node:
                return v
        raise KeyError(node)


def detect(g: FlowGraph, r: AnalysisResult) -> RedundancyReport:
    if not r.converged:
        raise ValueError("redundancy detection needs a converged analysis")
    # Scratch classes for never-seen operands must not collide with real ones.
    numbers = ValueNumbers(r.numbers.last + 1)
    verdicts = []
    for node in g.nodes:
        stmt = node.stmt
        if stmt is None:
            continue
        ein = r.ein[node.id]
        common = dict(node=node.id, target=stmt.target, expr=stmt.rhs, origin=node.origin)
        if ein.is_top:
            verdicts.append(RedundancyVerdict(kind=UNREACHABLE, redundant=False, **common))
            continue
        if isinstance(stmt.rhs, BinOp):
            _, ve = binary_value_expression(ein, stmt.rhs, numbers)
            vn = lookup(ein, ve)
            kind = REDUNDANT if vn is not None else NOVEL
        else:
            vn = lookup(ein, stmt.rhs)
            kind = COPY
        witnesses = ()
        if vn is not None:
            witnesses = tuple(sorted(m.name for m in ein.members(vn) if isinstance(m, Var)))
        verdicts.append(RedundancyVerdict(kind=kind, redundant=vn is not None, vn=vn, witnesses=witnesses, **common))
    counts = {k: sum(v.kind == k for v in verdicts) for k in (REDUNDANT, NOVEL, COPY, UNREACHABLE)}
    return RedundancyReport(tuple(verdicts), counts)


def rewrite_witness(v: RedundancyVerdict) -> str | None:
    """Variable a redundant computation can be replaced by, if any.

    Normalization temporaries are skipped since they vanish when the graph is
    folded back to source form; so is the target itself.
    """
    if v.kind != REDUNDANT:
        return None
    for w in v.witnesses:
        if w != v.target and not w.startswith(TEMP_PREFIX):
            return w
    return None


def eliminate(g: FlowGraph, rep: RedundancyReport) -> FlowGraph:
    out = g
    for v in rep.verdicts:
        w = rewrite_witness(v)
        if w is not None:
            out = replace_statement(out, v.node, Statement(v.target, Var(w)))
    errors = [d for d in validate(out) if d.severity == "error"]
    if errors:
        raise AssertionError(f"rewritten graph is invalid: {errors}")
    return out
