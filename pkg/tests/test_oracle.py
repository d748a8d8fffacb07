import pytest
from hypothesis import given, settings, strategies as st

from gvn.analysis import AnalysisResult, run_gvn
from gvn.corpus import random_loop_program, random_program
from gvn.ir import BinOp, Const, Var, normalize, parse_program, validate
from gvn.oracle import (
    Apply,
    OracleBudgetError,
    Point,
    TermFactory,
    check_completeness_acyclic,
    check_soundness,
    enumerate_paths,
    herbrand_partition,
    represented_expressions,
    universe,
)
from gvn.pool import ExpressionPool, ValueExpr, lookup, parse_pool

from .helpers import fixture, straight_line

# Seeds of random_program(seed, 4, 8, 1) whose fixpoint has a confluence class
# holding a value expression but no variable.
WITNESSLESS_SEEDS = (3, 5, 9)


def test_straight_line_single_path():
    g = straight_line("c = a + b")
    (state,) = enumerate_paths(g, Point("s1", "out"))
    t = TermFactory()
    assert state.env["c"] == t.apply("+", t.initial("a"), t.initial("b"))
    assert state.read("a", t) == t.initial("a")


def test_diamond_has_two_paths():
    g = fixture("fig1.gvn")
    states = enumerate_paths(g, Point("merge", "in"), unroll=0)
    assert len(states) == 2
    assert len(enumerate_paths(g, Point("merge", "in"), unroll=5)) == 2
    t = TermFactory()
    zs = {str(s.read("z", t)) for s in states}
    assert zs == {"(x₀ + y₀)", "z₀"}


def test_unroll_bounds_loop_paths():
    g = fixture("loop.gvn")
    for k in range(4):
        assert len(enumerate_paths(g, Point("exit", "in"), unroll=k)) == k + 1


def test_terms_are_interned():
    t = TermFactory()
    a = t.apply("+", t.initial("x"), t.literal(1))
    b = t.apply("+", t.initial("x"), t.literal(1))
    assert a is b and hash(a) == hash(b)
    assert a != t.apply("+", t.literal(1), t.initial("x"))


def test_partition_after_recomputation():
    g = straight_line("a = x + y", "b = x + y")
    part = herbrand_partition(g, Point("s2", "out"))
    assert part.class_of(Var("a")) == {Var("a"), Var("b"), BinOp(Var("x"), "+", Var("y"))}
    assert not part.equivalent(Var("x"), Var("y"))


def test_partition_at_fig1_merge():
    g = fixture("fig1.gvn")
    part = herbrand_partition(g, Point("merge", "in"))
    assert part.class_of(Var("x")) == {Var("x")}
    assert part.class_of(Var("y")) == {Var("y")}
    assert not part.equivalent(Var("z"), Var("s"))
    ab = BinOp(Var("a"), "+", Var("b"))
    assert ab in universe(g)
    assert part.class_of(ab) == {ab}


def test_partition_at_entry_is_discrete():
    g = fixture("fig2.gvn")
    part = herbrand_partition(g, Point("entry", "out"))
    assert all(len(c) == 1 for c in part.classes if not any(isinstance(e, BinOp) for e in c))
    assert not part.equivalent(Var("a"), Var("x"))


def test_represented_expressions():
    pool = parse_pool("{[v1, a, x], [v2, y], [v3, v1+v2, z], [v4, v3*v3]}")
    assert set(represented_expressions(pool, 3)) == {
        Var("z"), BinOp(Var("a"), "+", Var("y")), BinOp(Var("x"), "+", Var("y"))
    }
    deep = represented_expressions(pool, 4)
    assert Apply("*", Var("z"), BinOp(Var("x"), "+", Var("y"))) in deep
    assert len(deep) == 9
    assert represented_expressions(pool, 4, depth=0) == []
    with pytest.raises(OracleBudgetError):
        represented_expressions(pool, 4, budget=3)


def test_soundness_on_figures_and_loop():
    for name in ("fig1.gvn", "fig2.gvn"):
        g = fixture(name)
        assert check_soundness(g, run_gvn(g)) == []
    g = fixture("loop.gvn")
    assert check_soundness(g, run_gvn(g), unroll=3) == []


def _merge_classes(pool, keep, drop):
    def redirect(m):
        if isinstance(m, ValueExpr):
            left, right = (keep if o == drop else o for o in (m.left, m.right))
            return ValueExpr(left, m.op, right)
        return m

    classes = {vn: {redirect(m) for m in ms} for vn, ms in pool.items()}
    classes[keep] |= classes.pop(drop)
    return ExpressionPool(classes)


def test_corrupted_pool_is_caught():
    g = fixture("fig2.gvn")
    r = run_gvn(g)
    merge = r.ein["merge"]
    bad = _merge_classes(merge, lookup(merge, Var("x")), lookup(merge, Var("y")))
    corrupted = AnalysisResult({**r.ein, "merge": bad}, r.eout, r.sweeps, r.order, r.numbers)
    found = check_soundness(g, corrupted)
    assert found and all(f.kind == "violation" for f in found)
    assert {f.point for f in found} == {Point("merge", "in")}
    doc = found[0].to_json()
    assert doc["point"] == "IN(merge)" and len(doc["paths"]) == 2


def test_completeness_examples():
    for g in (fixture("cse.gvn"), fixture("fig1.gvn"), fixture("fig2.gvn"), straight_line("a = x + y", "b = x + y")):
        assert check_completeness_acyclic(g, run_gvn(g)) == []


def test_dropped_equivalence_is_a_miss():
    g = fixture("cse.gvn")
    r = run_gvn(g)
    weak = parse_pool("{[v1, x], [v2, y], [v3, v1+v2, a]}")
    broken = AnalysisResult(r.ein, {**r.eout, "n2": weak}, r.sweeps, r.order, r.numbers)
    found = check_completeness_acyclic(g, broken)
    assert found and {f.point for f in found} == {Point("n2", "out")}
    assert any({f.a, f.b} == {"a", "b"} for f in found)


def test_completeness_refuses_loops():
    g = fixture("loop.gvn")
    with pytest.raises(ValueError):
        check_completeness_acyclic(g, run_gvn(g))


def test_path_budget():
    lines = ["node entry"]
    prev = "entry"
    edges = []
    for i in range(14):
        lines += [f"node l{i} {{ a = b }}", f"node r{i} {{ a = c }}", f"node j{i}"]
        edges += [(prev, f"l{i}"), (prev, f"r{i}"), (f"l{i}", f"j{i}"), (f"r{i}", f"j{i}")]
        prev = f"j{i}"
    lines.append("node exit")
    edges.append((prev, "exit"))
    lines += [f"edge {a} -> {b}" for a, b in edges] + ["entry entry", "exit exit"]
    g = parse_program("\n".join(lines) + "\n")
    with pytest.raises(OracleBudgetError, match="10000"):
        enumerate_paths(g, Point("exit", "in"))
    assert len(enumerate_paths(g, Point("exit", "in"), budget=2**14)) == 2**14


def test_random_program_deterministic_and_valid():
    assert random_program(1, 4, 8, 1) == random_program(1, 4, 8, 1)
    assert random_program(1, 4, 8, 1) != random_program(2, 4, 8, 1)
    for seed in range(50):
        g = random_program(seed, 4, 8, 1)
        assert [d for d in validate(g)] == []
        assert sum(1 for n in g.nodes if n.stmts) == 8
    with pytest.raises(ValueError):
        random_program(0, 9, 8, 1)
    with pytest.raises(ValueError):
        random_program(0, 4, 17, 1)


def test_corpus_covers_witnessless_confluence_classes():
    for seed in WITNESSLESS_SEEDS:
        g = normalize(random_program(seed, 4, 8, 1))
        r = run_gvn(g)
        preds = g.predecessors()
        joins = [n.id for n in g.nodes if len(preds[n.id]) > 1]
        assert any(
            pool.value_expression(vn) is not None and not any(isinstance(m, Var) for m in pool.members(vn))
            for pool in (r.ein[j] for j in joins)
            for vn in pool.value_numbers()
        ), seed


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 8), st.integers(2, 16), st.integers(1, 3))
def test_random_acyclic_exact_agreement(seed, nvars, nodes, diamonds):
    diamonds = min(diamonds, nodes // 2)
    g = normalize(random_program(seed, nvars, nodes, diamonds))
    r = run_gvn(g)
    assert check_soundness(g, r) == []
    assert check_completeness_acyclic(g, r) == []


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 8), st.integers(3, 16))
def test_random_loops_sound(seed, nvars, nodes):
    g = normalize(random_loop_program(seed, nvars, nodes))
    assert check_soundness(g, run_gvn(g), unroll=3) == []


def test_constants_in_universe():
    g = straight_line("a = 1", "b = 1", "c = a + 0")
    assert Const(1) in universe(g) and Const(0) in universe(g)
    part = herbrand_partition(g, Point("s3", "out"))
    assert part.class_of(Const(1)) == {Const(1), Var("a"), Var("b")}
    assert check_completeness_acyclic(g, run_gvn(g)) == []
