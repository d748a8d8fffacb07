from pathlib import Path

from gvn.ir import normalize, parse_program

FIXTURES = Path(__file__).parent / "fixtures"


def fixture(name, normalized=True):
    g = parse_program((FIXTURES / name).read_text())
    return normalize(g) if normalized else g


def straight_line(*stmts, normalized=True):
    """entry -> s1 -> ... -> sk -> exit, one statement per node."""
    lines = ["graph line", "node entry"]
    lines += [f"node s{i} {{ {s} }}" for i, s in enumerate(stmts, 1)]
    lines.append("node exit")
    names = ["entry"] + [f"s{i}" for i in range(1, len(stmts) + 1)] + ["exit"]
    lines += [f"edge {a} -> {b}" for a, b in zip(names, names[1:])]
    lines += ["entry entry", "exit exit"]
    g = parse_program("\n".join(lines) + "\n")
    return normalize(g) if normalized else g


def rename(pool, mapping):
    """Apply a value-number renaming to class ids and value-expression operands."""
    from gvn.pool import ExpressionPool, ValueExpr

    def member(m):
        if isinstance(m, ValueExpr):
            return ValueExpr(mapping[m.left], m.op, mapping[m.right])
        return m

    return ExpressionPool({mapping[vn]: {member(m) for m in ms} for vn, ms in pool.items()})
