import dataclasses

import pytest
from hypothesis import given, settings, strategies as st

from gvn.analysis import run_gvn
from gvn.corpus import random_program
from gvn.ir import Statement, Var, normalize, parse_statement
from gvn.oracle import final_states
from gvn.pool import ValueExpr, lookup
from gvn.redundancy import COPY, NOVEL, REDUNDANT, UNREACHABLE, detect, eliminate, rewrite_witness

from .helpers import fixture, straight_line


def analyzed(g):
    r = run_gvn(g)
    return r, detect(g, r)


def test_fig2_merge_recomputations_are_redundant():
    g = fixture("fig2.gvn")
    r, rep = analyzed(g)
    g_stmt, h_stmt = rep.verdict("merge"), rep.verdict("merge.1")
    assert (g_stmt.statement, h_stmt.statement) == ("g = x + y", "h = g + z")
    assert g_stmt.kind == h_stmt.kind == REDUNDANT
    merge = r.ein["merge"]
    x, y, z = (lookup(merge, Var(v)) for v in "xyz")
    assert merge.value_expression(g_stmt.vn) == ValueExpr(x, "+", y)
    assert merge.value_expression(h_stmt.vn) == ValueExpr(g_stmt.vn, "+", z)
    # Nothing on the merge path holds either value in a variable.
    assert g_stmt.witnesses == () and h_stmt.witnesses == ()
    assert rep.counts == {REDUNDANT: 2, NOVEL: 4, COPY: 4, UNREACHABLE: 0}
    assert {v.node for v in rep.redundant()} == {"merge", "merge.1"}


def test_cse_witness():
    g = fixture("cse.gvn")
    _, rep = analyzed(g)
    v = rep.verdict("n2")
    assert v.kind == REDUNDANT and v.witnesses == ("a",)
    assert rep.verdict("n1").kind == NOVEL
    out = eliminate(g, rep)
    assert out.node("n2").stmt == Statement("b", Var("a"))
    assert out.node("n1") == g.node("n1")


def test_verdict_json_and_text():
    g = fixture("cse.gvn")
    _, rep = analyzed(g)
    v = rep.verdict("n2")
    assert v.to_json() == {"node": "n2", "origin": "n2", "stmt": "b = x + y", "kind": "redundant",
                           "vn": f"v{v.vn}", "witnesses": ["a"]}
    assert str(v) == f"n2: b = x + y  redundant v{v.vn}  witnesses: a"


def test_copy_statements_are_not_redundancies():
    g = straight_line("a = x", "b = x", "c = 4")
    _, rep = analyzed(g)
    assert [v.kind for v in rep.verdicts] == [COPY, COPY, COPY]
    assert rep.verdict("s2").witnesses == ("a", "x")
    assert rep.verdict("s3").vn is None
    assert rewrite_witness(rep.verdict("s2")) is None
    assert eliminate(g, rep) == g


def test_fig2_eliminate_is_identity():
    g = fixture("fig2.gvn")
    _, rep = analyzed(g)
    assert eliminate(g, rep) == g


def test_witness_skips_target_and_temps():
    g = straight_line("a = x + y", "a = x + y")
    _, rep = analyzed(g)
    v = rep.verdict("s2")
    assert v.kind == REDUNDANT and v.witnesses == ("a",)
    assert rewrite_witness(v) is None
    g = normalize(straight_line("x = x + y", "z = x", normalized=False))
    _, rep = analyzed(g)
    assert all(rewrite_witness(v) is None or not rewrite_witness(v).startswith("__t") for v in rep.verdicts)


def test_unreachable_verdict():
    from gvn.ir import parse_program
    g = parse_program("node e\nnode dead { q = a + b }\nnode t\nedge e -> t\nedge dead -> t\nentry e\nexit t\n")
    _, rep = analyzed(g)
    assert rep.verdict("dead").kind == UNREACHABLE and not rep.verdict("dead").redundant


def test_unconverged_results_refused():
    g = fixture("cse.gvn")
    r = dataclasses.replace(run_gvn(g), converged=False)
    with pytest.raises(ValueError):
        detect(g, r)


def test_detect_does_not_touch_pools():
    g = fixture("fig2.gvn")
    r = run_gvn(g)
    before = {n: p.classes() for n, p in r.ein.items() if not p.is_top}
    detect(g, r)
    assert before == {n: p.classes() for n, p in r.ein.items() if not p.is_top}


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 8), st.integers(2, 16))
def test_elimination_preserves_paths_and_is_idempotent(seed, nvars, nodes):
    g = normalize(random_program(seed, nvars, nodes, 1))
    _, rep = analyzed(g)
    out = eliminate(g, rep)
    names = g.variables()
    assert final_states(g, names) == final_states(out, names)
    _, again = analyzed(out)
    assert eliminate(out, again) == out


def test_elimination_rewrites_only_redundant_binops():
    g = normalize(straight_line("a = x + y", "b = a * z", "c = x + y", "d = c * z"))
    _, rep = analyzed(g)
    out = eliminate(g, rep)
    assert out.node("s3").stmt == parse_statement("c = a")
    assert out.node("s4").stmt == parse_statement("d = b")
