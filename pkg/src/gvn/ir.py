"""Three-address-code flow graphs: data types, text format, normalization.

The text format is line oriented::

    graph fig1
    node n0
    node n1 { c = a + b; e = c + z }
    edge n0 -> n1
    entry n0
    exit n1

A source node may hold several statements; :func:`normalize` splits them so
that every node carries at most one assignment.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass
from typing import Iterable, Union

OPERATORS = ("+", "-", "*", "/")
TEMP_PREFIX = "__t"
INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

_VAR_RE = re.compile(r"[a-z][a-z0-9_]*\Z")
_ID_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, col {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class Const:
    value: int

    def __str__(self) -> str:
        return str(self.value)


Operand = Union[Var, Const]


@dataclass(frozen=True)
class BinOp:
    left: Operand
    op: str
    right: Operand

    def __post_init__(self):
        if self.op not in OPERATORS:
            raise ValueError(f"unknown operator {self.op!r}")

    @property
    def operands(self) -> tuple[Operand, Operand]:
        return (self.left, self.right)

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"


Expression = Union[Var, Const, BinOp]


def operands_of(e: Expression) -> tuple[Operand, ...]:
    if isinstance(e, BinOp):
        return e.operands
    return (e,)


@dataclass(frozen=True)
class Statement:
    target: str
    rhs: Expression

    def uses(self) -> set[str]:
        return {o.name for o in operands_of(self.rhs) if isinstance(o, Var)}

    def __str__(self) -> str:
        return f"{self.target} = {self.rhs}"


@dataclass(frozen=True)
class Node:
    id: str
    stmts: tuple[Statement, ...] = ()
    # Source node this one was split from; None for nodes straight from source.
    origin: str | None = None

    @property
    def stmt(self) -> Statement | None:
        if len(self.stmts) > 1:
            raise ValueError(f"node {self.id} holds {len(self.stmts)} statements; normalize first")
        return self.stmts[0] if self.stmts else None

    @property
    def source_id(self) -> str:
        return self.origin if self.origin is not None else self.id


@dataclass(frozen=True)
class FlowGraph:
    name: str
    nodes: tuple[Node, ...]
    edges: tuple[tuple[str, str], ...]
    entry: str
    exit: str

    def __post_init__(self):
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate node id")
        known = set(ids)
        for a, b in self.edges:
            if a not in known or b not in known:
                raise ValueError(f"unknown node id in edge {a} -> {b}")
        for end in (self.entry, self.exit):
            if end not in known:
                raise ValueError(f"unknown node id {end}")

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def node_map(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    def successors(self) -> dict[str, list[str]]:
        succ: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for a, b in self.edges:
            succ[a].append(b)
        return succ

    def predecessors(self) -> dict[str, list[str]]:
        pred: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for a, b in self.edges:
            pred[b].append(a)
        return pred

    def variables(self) -> list[str]:
        names = set()
        for n in self.nodes:
            for s in n.stmts:
                names.add(s.target)
                names |= s.uses()
        return sorted(names)

    def constants(self) -> list[int]:
        values = set()
        for n in self.nodes:
            for s in n.stmts:
                values |= {o.value for o in operands_of(s.rhs) if isinstance(o, Const)}
        return sorted(values)

    def binary_expressions(self) -> list[BinOp]:
        """Distinct binary right-hand sides, in order of first occurrence."""
        seen: dict[BinOp, None] = {}
        for n in self.nodes:
            for s in n.stmts:
                if isinstance(s.rhs, BinOp):
                    seen.setdefault(s.rhs)
        return list(seen)

    def is_normalized(self) -> bool:
        return all(
            len(n.stmts) <= 1 and all(s.target not in s.uses() for s in n.stmts)
            for n in self.nodes
        )


# -- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>[-+*/=]))")


def _tokenize_stmt(text: str, line: int, col0: int) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[0]!r}", line, col0 + pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), col0 + m.start(kind)))
        pos = m.end()
    return tokens


def _check_var(name: str, line: int, col: int, allow_temps: bool) -> str:
    if name.startswith(TEMP_PREFIX) and allow_temps:
        return name
    if not _VAR_RE.match(name):
        if name.startswith(TEMP_PREFIX):
            raise ParseError(f"identifier {name!r} uses the reserved prefix {TEMP_PREFIX!r}", line, col)
        raise ParseError(f"invalid variable name {name!r}", line, col)
    return name


def parse_statement(text: str, line: int = 1, col0: int = 1, allow_temps: bool = False) -> Statement:
    tokens = _tokenize_stmt(text, line, col0)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def fail(msg):
        tok = peek()
        raise ParseError(msg, line, tok[2] if tok else col0 + len(text))

    def atom() -> Operand:
        nonlocal pos
        tok = peek()
        if tok is None:
            fail("expected variable or integer")
        kind, text_, col = tok
        if kind == "sym" and text_ == "-":
            nxt = tokens[pos + 1] if pos + 1 < len(tokens) else None
            if nxt is None or nxt[0] != "int":
                fail("expected integer after '-'")
            pos += 2
            return _const(-int(nxt[1]), line, col)
        if kind == "int":
            pos += 1
            return _const(int(text_), line, col)
        if kind == "name":
            pos += 1
            return Var(_check_var(text_, line, col, allow_temps))
        fail("expected variable or integer")

    tok = peek()
    if tok is None or tok[0] != "name":
        fail("expected assignment target")
    target = _check_var(tok[1], line, tok[2], allow_temps)
    pos += 1
    tok = peek()
    if tok is None or tok[1] != "=":
        fail("expected '='")
    pos += 1
    left = atom()
    tok = peek()
    if tok is None:
        return Statement(target, left)
    if tok[0] != "sym" or tok[1] not in OPERATORS:
        fail("expected operator")
    op = tok[1]
    pos += 1
    right = atom()
    if peek() is not None:
        fail("unexpected trailing input")
    return Statement(target, BinOp(left, op, right))


def _const(value: int, line: int, col: int) -> Const:
    if not INT64_MIN <= value <= INT64_MAX:
        raise ParseError("integer literal out of 64-bit range", line, col)
    return Const(value)


_NODE_RE = re.compile(r"node\s+(?P<id>\S+)\s*(?:\{(?P<body>.*)\})?\s*\Z")
_EDGE_RE = re.compile(r"edge\s+(?P<a>\S+)\s*->\s*(?P<b>\S+)\s*\Z")


def parse_program(text: str, allow_temps: bool = False) -> FlowGraph:
    name = None
    nodes: list[Node] = []
    node_lines: dict[str, int] = {}
    edges: list[tuple[str, str, int]] = []
    entry = exit_ = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.lstrip()
        if not stripped:
            continue
        indent = len(line) - len(stripped)
        keyword = stripped.split(None, 1)[0]
        if keyword == "graph":
            parts = stripped.split()
            if len(parts) != 2:
                raise ParseError("expected 'graph <name>'", lineno, indent + 1)
            if name is not None:
                raise ParseError("duplicate graph declaration", lineno, indent + 1)
            name = parts[1]
        elif keyword == "node":
            m = _NODE_RE.match(stripped)
            if not m:
                raise ParseError("expected 'node <id>' or 'node <id> { stmts }'", lineno, indent + 1)
            node_id = m.group("id")
            if not _ID_RE.match(node_id):
                raise ParseError(f"invalid node id {node_id!r}", lineno, indent + m.start("id") + 1)
            if node_id in node_lines:
                raise ParseError(f"duplicate node id {node_id!r}", lineno, indent + m.start("id") + 1)
            stmts = []
            body = m.group("body")
            if body is not None:
                offset = indent + m.start("body") + 1
                for chunk in body.split(";"):
                    if chunk.strip():
                        stmts.append(parse_statement(chunk, lineno, offset, allow_temps))
                    offset += len(chunk) + 1
            node_lines[node_id] = lineno
            nodes.append(Node(node_id, tuple(stmts)))
        elif keyword == "edge":
            m = _EDGE_RE.match(stripped)
            if not m:
                raise ParseError("expected 'edge <id> -> <id>'", lineno, indent + 1)
            edges.append((m.group("a"), m.group("b"), lineno))
        elif keyword in ("entry", "exit"):
            parts = stripped.split()
            if len(parts) != 2:
                raise ParseError(f"expected '{keyword} <id>'", lineno, indent + 1)
            if (entry if keyword == "entry" else exit_) is not None:
                raise ParseError(f"duplicate {keyword} declaration", lineno, indent + 1)
            if keyword == "entry":
                entry = (parts[1], lineno)
            else:
                exit_ = (parts[1], lineno)
        else:
            raise ParseError(f"unknown declaration {keyword!r}", lineno, indent + 1)

    last = len(text.splitlines()) + 1
    for a, b, lineno in edges:
        for end in (a, b):
            if end not in node_lines:
                raise ParseError(f"unknown node id {end!r}", lineno)
    if entry is None:
        raise ParseError("missing entry declaration", last)
    if exit_ is None:
        raise ParseError("missing exit declaration", last)
    for end, lineno in (entry, exit_):
        if end not in node_lines:
            raise ParseError(f"unknown node id {end!r}", lineno)
    return FlowGraph(
        name=name or "main",
        nodes=tuple(nodes),
        edges=tuple((a, b) for a, b, _ in edges),
        entry=entry[0],
        exit=exit_[0],
    )


def render_program(g: FlowGraph) -> str:
    out = [f"graph {g.name}"]
    for n in g.nodes:
        if n.stmts:
            out.append(f"node {n.id} {{ {'; '.join(map(str, n.stmts))} }}")
        else:
            out.append(f"node {n.id}")
    out.extend(f"edge {a} -> {b}" for a, b in g.edges)
    out.append(f"entry {g.entry}")
    out.append(f"exit {g.exit}")
    return "\n".join(out) + "\n"


# -- normalization -----------------------------------------------------------

def _split_self_reference(stmts: Iterable[Statement], fresh) -> list[Statement]:
    out = []
    for s in stmts:
        if s.target in s.uses():
            t = fresh()
            out.append(Statement(t, s.rhs))
            out.append(Statement(s.target, Var(t)))
        else:
            out.append(s)
    return out


def normalize(g: FlowGraph) -> FlowGraph:
    """Split nodes to one statement each and break ``x = x op y`` into
    ``t = x op y; x = t`` with a fresh temporary ``t``.

    The first piece of a split node keeps the source id, later pieces are
    ``<id>.1``, ``<id>.2``...; all pieces record the source id as ``origin``.
    """
    used = set(g.variables())
    counter = 0

    def fresh() -> str:
        nonlocal counter
        while f"{TEMP_PREFIX}{counter}" in used:
            counter += 1
        name = f"{TEMP_PREFIX}{counter}"
        used.add(name)
        return name

    nodes: list[Node] = []
    last_piece: dict[str, str] = {}
    chain_edges: list[tuple[str, str]] = []
    for n in g.nodes:
        stmts = _split_self_reference(n.stmts, fresh)
        if len(stmts) <= 1 and tuple(stmts) == n.stmts:
            nodes.append(n)
            last_piece[n.id] = n.id
            continue
        origin = n.source_id
        ids = [n.id] + [f"{n.id}.{k}" for k in range(1, len(stmts))]
        for node_id, s in zip(ids, stmts):
            nodes.append(Node(node_id, (s,), origin))
        chain_edges.extend(zip(ids, ids[1:]))
        last_piece[n.id] = ids[-1]

    edges = tuple(chain_edges) + tuple((last_piece[a], b) for a, b in g.edges)
    return FlowGraph(g.name, tuple(nodes), edges, g.entry, last_piece[g.exit])


def denormalize(g: FlowGraph) -> FlowGraph:
    """Fold split chains back into their source nodes.

    Inverse of :func:`normalize` for graphs whose chains are intact; pairs
    ``__tK = e; x = __tK`` collapse back to ``x = e``.
    """
    groups: dict[str, list[Node]] = {}
    for n in g.nodes:
        groups.setdefault(n.source_id, []).append(n)
    piece_of = {n.id: n.source_id for n in g.nodes}

    nodes = []
    for n in g.nodes:
        if n.origin is None or n.id == n.origin:
            pieces = groups[n.source_id]
            stmts = [s for p in pieces for s in p.stmts]
            nodes.append(Node(n.source_id, tuple(_collapse_temps(stmts))))
    edges = []
    for a, b in g.edges:
        sa, sb = piece_of[a], piece_of[b]
        if b != sb:
            # Chain edge between pieces of one source node.
            continue
        edges.append((sa, sb))
    return FlowGraph(g.name, tuple(nodes), tuple(edges), piece_of[g.entry], piece_of[g.exit])


def _collapse_temps(stmts: list[Statement]) -> list[Statement]:
    out: list[Statement] = []
    for s in stmts:
        prev = out[-1] if out else None
        if (
            prev is not None
            and prev.target.startswith(TEMP_PREFIX)
            and s.rhs == Var(prev.target)
        ):
            out[-1] = Statement(s.target, prev.rhs)
        else:
            out.append(s)
    return out


# -- validation and ordering -------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    node: str | None = None

    def __str__(self) -> str:
        where = f" [{self.node}]" if self.node else ""
        return f"{self.severity}{where}: {self.message}"


def _reach(start: str, adj: dict[str, list[str]]) -> set[str]:
    seen = {start}
    stack = [start]
    while stack:
        for b in adj[stack.pop()]:
            if b not in seen:
                seen.add(b)
                stack.append(b)
    return seen


def validate(g: FlowGraph) -> list[Diagnostic]:
    diags = []
    preds = g.predecessors()
    if preds[g.entry]:
        diags.append(Diagnostic("error", "entry node has incoming edges", g.entry))
    if g.node(g.entry).stmts:
        diags.append(Diagnostic("error", "entry node must be empty", g.entry))
    forward = _reach(g.entry, g.successors())
    backward = _reach(g.exit, preds)
    for n in g.nodes:
        if n.id not in forward:
            diags.append(Diagnostic("warning", "node is unreachable from entry", n.id))
        elif n.id not in backward:
            diags.append(Diagnostic("warning", "node cannot reach exit", n.id))
    return diags


def reverse_postorder(g: FlowGraph) -> list[str]:
    succ = g.successors()
    order: list[str] = []
    seen = {g.entry}
    stack = [(g.entry, iter(succ[g.entry]))]
    while stack:
        node, it = stack[-1]
        for b in it:
            if b not in seen:
                seen.add(b)
                stack.append((b, iter(succ[b])))
                break
        else:
            stack.pop()
            order.append(node)
    order.reverse()
    return order


def back_edges(g: FlowGraph) -> set[tuple[str, str]]:
    """Edges closing a cycle in the depth-first search from entry."""
    succ = g.successors()
    result = set()
    on_stack = {g.entry}
    seen = {g.entry}
    stack = [(g.entry, iter(succ[g.entry]))]
    while stack:
        node, it = stack[-1]
        for b in it:
            if b in on_stack:
                result.add((node, b))
            elif b not in seen:
                seen.add(b)
                on_stack.add(b)
                stack.append((b, iter(succ[b])))
                break
        else:
            stack.pop()
            on_stack.discard(node)
    return result


def is_acyclic(g: FlowGraph) -> bool:
    reachable = _reach(g.entry, g.successors())
    sub = [(a, b) for a, b in g.edges if a in reachable]
    indeg = {n: 0 for n in reachable}
    for _, b in sub:
        indeg[b] += 1
    ready = [n for n, d in indeg.items() if d == 0]
    count = 0
    succ = g.successors()
    while ready:
        n = ready.pop()
        count += 1
        for b in succ[n]:
            indeg[b] -= 1
            if indeg[b] == 0:
                ready.append(b)
    return count == len(reachable)


def replace_statement(g: FlowGraph, node_id: str, stmt: Statement) -> FlowGraph:
    nodes = tuple(
        dataclasses.replace(n, stmts=(stmt,)) if n.id == node_id else n for n in g.nodes
    )
    return dataclasses.replace(g, nodes=nodes)
