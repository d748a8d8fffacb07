"""Expression pools: value-numbered partitions of expressions.

A pool maps value numbers (plain ``int`` ids, shown as ``v1, v2, ...``) to
classes of members.  A member is a program variable, a constant, or a
:class:`ValueExpr` whose operands are value numbers of other classes in the
same pool.  Pools are immutable; every operation returns a new one.
"""

from __future__ import annotations

import itertools
import re
import threading
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

from .ir import OPERATORS, BinOp, Const, Expression, Operand, Var


class PoolInvariantError(AssertionError):
    """A pool violates the partition/closure/acyclicity invariants."""


class MissingOperandClass(KeyError):
    pass


@dataclass(frozen=True)
class ValueExpr:
    left: int
    op: str
    right: int

    def __str__(self) -> str:
        return f"v{self.left}{self.op}v{self.right}"


Member = Union[Var, Const, ValueExpr]


class ValueNumbers:
    """Per-run source of fresh value numbers."""

    def __init__(self, start: int = 1):
        self._count = itertools.count(start)
        self._lock = threading.Lock()
        self.last = start - 1

    def fresh(self) -> int:
        with self._lock:
            self.last = next(self._count)
            return self.last


class ExpressionPool:
    __slots__ = ("_classes", "_index", "_canon")

    def __init__(self, classes: Mapping[int, frozenset[Member]] | None):
        self._canon = None
        if classes is None:
            self._classes = None
            self._index = None
            return
        self._classes = {vn: frozenset(ms) for vn, ms in classes.items()}
        self._index: dict[Member, int] = {}
        for vn, members in self._classes.items():
            if sum(isinstance(m, ValueExpr) for m in members) > 1:
                raise PoolInvariantError(f"class v{vn} holds more than one value expression")
            for m in members:
                if m in self._index:
                    raise PoolInvariantError(f"{m} occurs in v{self._index[m]} and v{vn}")
                self._index[m] = vn

    @property
    def is_top(self) -> bool:
        return self._classes is None

    def _partition(self) -> dict[int, frozenset[Member]]:
        if self._classes is None:
            raise TypeError("operation undefined on the top pool")
        return self._classes

    def classes(self) -> dict[int, frozenset[Member]]:
        return dict(self._partition())

    def items(self) -> Iterator[tuple[int, frozenset[Member]]]:
        return iter(self._partition().items())

    def members(self, vn: int) -> frozenset[Member]:
        return self._partition()[vn]

    def value_numbers(self) -> list[int]:
        return sorted(self._partition())

    def value_expression(self, vn: int) -> ValueExpr | None:
        for m in self._partition()[vn]:
            if isinstance(m, ValueExpr):
                return m
        return None

    def __contains__(self, vn: int) -> bool:
        return vn in self._partition()

    def __len__(self) -> int:
        return len(self._partition())

    def __repr__(self) -> str:
        return f"ExpressionPool({render_pool(self, ascii=True)})"


TOP = ExpressionPool(None)
EMPTY = ExpressionPool({})


def lookup(pool: ExpressionPool, m: Member) -> int | None:
    pool._partition()
    return pool._index.get(m)


def value_exp(pool: ExpressionPool, e: Expression) -> Member:
    if not isinstance(e, BinOp):
        return e
    left, right = lookup(pool, e.left), lookup(pool, e.right)
    if left is None or right is None:
        missing = e.left if left is None else e.right
        raise MissingOperandClass(f"operand {missing} has no class")
    return ValueExpr(left, e.op, right)


def with_class(pool: ExpressionPool, vn: int, members) -> ExpressionPool:
    classes = pool.classes()
    classes[vn] = frozenset(members)
    return ExpressionPool(classes)


def add_member(pool: ExpressionPool, vn: int, m: Member) -> ExpressionPool:
    return with_class(pool, vn, pool.members(vn) | {m})


def ensure_operand(pool: ExpressionPool, o: Operand, numbers: ValueNumbers) -> tuple[ExpressionPool, int]:
    vn = lookup(pool, o)
    if vn is not None:
        return pool, vn
    vn = numbers.fresh()
    return with_class(pool, vn, {o}), vn


def remove_variable(pool: ExpressionPool, x: str) -> ExpressionPool:
    vn = lookup(pool, Var(x))
    if vn is None:
        return pool
    return with_class(pool, vn, pool.members(vn) - {Var(x)})


def delete_singletons(pool: ExpressionPool) -> ExpressionPool:
    """Drop classes left with no members, and every value expression that
    names a dropped class, until nothing changes."""
    classes = pool.classes()
    dead = {vn for vn, ms in classes.items() if not ms}
    if not dead:
        return pool
    while dead:
        for vn in dead:
            del classes[vn]
        for vn, ms in classes.items():
            stale = {m for m in ms if isinstance(m, ValueExpr) and (m.left in dead or m.right in dead)}
            if stale:
                classes[vn] = ms - stale
        dead = {vn for vn, ms in classes.items() if not ms}
    return ExpressionPool(classes)


def check_invariants(pool: ExpressionPool) -> None:
    if pool.is_top:
        return
    for vn, ms in pool.items():
        if not ms:
            raise PoolInvariantError(f"class v{vn} is a bare value number")
        for m in ms:
            if isinstance(m, ValueExpr):
                for ref in (m.left, m.right):
                    if ref not in pool:
                        raise PoolInvariantError(f"class v{vn} refers to missing class v{ref}")
    canonicalize(pool)


# -- canonical form ------------------------------------------------------------

def _class_key(pool: ExpressionPool, vn: int, memo: dict, active: set) -> tuple:
    if vn in memo:
        return memo[vn]
    if vn in active:
        raise PoolInvariantError(f"cyclic value-number reference through v{vn}")
    active.add(vn)
    keys = []
    for m in pool.members(vn):
        if isinstance(m, Var):
            keys.append((0, m.name))
        elif isinstance(m, Const):
            keys.append((1, m.value))
        else:
            keys.append((2, m.op, _class_key(pool, m.left, memo, active), _class_key(pool, m.right, memo, active)))
    active.discard(vn)
    memo[vn] = key = tuple(sorted(keys))
    return key


def _class_keys(pool: ExpressionPool) -> dict[int, tuple]:
    memo: dict[int, tuple] = {}
    for vn in pool.value_numbers():
        _class_key(pool, vn, memo, set())
    return memo


def canonicalize(pool: ExpressionPool):
    """Encoding of ``pool`` that ignores which value numbers were used."""
    if pool._canon is None:
        if pool.is_top:
            pool._canon = "TOP"
        else:
            pool._canon = tuple(sorted(_class_keys(pool).values()))
    return pool._canon


def pools_equivalent(a: ExpressionPool, b: ExpressionPool) -> bool:
    return canonicalize(a) == canonicalize(b)


# -- text ---------------------------------------------------------------------

def _member_order(m: Member):
    if isinstance(m, Var):
        return (0, m.name)
    if isinstance(m, Const):
        return (1, m.value)
    return (2, m.left, m.op, m.right)


def class_strings(pool: ExpressionPool) -> list[list[str]]:
    """Classes as lists of strings, value number first, in canonical order."""
    keys = _class_keys(pool)
    out = []
    for vn in sorted(keys, key=lambda v: keys[v]):
        members = sorted(pool.members(vn), key=_member_order)
        out.append([f"v{vn}"] + [str(m) for m in members])
    return out


def render_pool(pool: ExpressionPool, ascii: bool = False) -> str:
    if pool.is_top:
        return "TOP" if ascii else "⊤"
    return "{" + ", ".join("[" + ", ".join(c) + "]" for c in class_strings(pool)) + "}"


_CLASS_RE = re.compile(r"\[([^\]]*)\]")
_VE_RE = re.compile(r"v(\d+)\s*([-+*/])\s*v(\d+)\Z")


def parse_pool(text: str) -> ExpressionPool:
    """Read the display form, e.g. ``{[v1, a, x], [v3, v1+v2, z]}``."""
    text = text.strip()
    if text in ("TOP", "⊤"):
        return TOP
    if not (text.startswith("{") and text.endswith("}")):
        raise ValueError(f"not a pool: {text!r}")
    classes: dict[int, set] = {}
    for body in _CLASS_RE.findall(text):
        items = [t.strip() for t in body.split(",")]
        if not re.fullmatch(r"v\d+", items[0]):
            raise ValueError(f"class must start with its value number: [{body}]")
        vn = int(items[0][1:])
        members = set()
        for item in items[1:]:
            m = _VE_RE.match(item)
            if m:
                if m.group(2) not in OPERATORS:
                    raise ValueError(item)
                members.add(ValueExpr(int(m.group(1)), m.group(2), int(m.group(3))))
            elif re.fullmatch(r"-?\d+", item):
                members.add(Const(int(item)))
            else:
                members.add(Var(item))
        if vn in classes:
            raise ValueError(f"duplicate value number v{vn}")
        classes[vn] = members
    return ExpressionPool(classes)
