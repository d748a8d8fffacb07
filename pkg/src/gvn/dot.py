"""GraphViz rendering of flow graphs, optionally annotated with EIN pools."""

from __future__ import annotations

from .analysis import AnalysisResult
from .ir import FlowGraph
from .pool import render_pool


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(g: FlowGraph, result: AnalysisResult | None = None, ascii: bool = False) -> str:
    lines = [f"digraph {_quote(g.name)} {{", "  node [shape=box, fontname=monospace];"]
    for n in g.nodes:
        label = [n.id]
        label.extend(str(s) for s in n.stmts)
        if result is not None:
            label.append("EIN: " + render_pool(result.ein[n.id], ascii=ascii))
        text = "\\l".join(_quote(x)[1:-1] for x in label) + "\\l"
        lines.append(f"  {_quote(n.id)} [label=\"{text}\"];")
    for a, b in g.edges:
        lines.append(f"  {_quote(a)} -> {_quote(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
