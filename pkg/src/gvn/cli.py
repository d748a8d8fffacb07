"""Command-line driver.

Exit codes: 0 clean, 1 findings (redundancies with ``--fail-on-redundant``,
or oracle violations/misses from ``check``), 2 input error, 3 oracle budget
exceeded, 4 no fixpoint within the sweep cap.

JSON output of ``analyze``::

    {"graph": str, "sweeps": int,
     "pools": [{"node": str, "ein": POOL, "eout": POOL}],
     "verdicts": [{"node", "origin", "stmt", "kind", "vn", "witnesses"}],
     "counts": {"redundant": int, "novel": int, "copy": int, "unreachable": int}}

where POOL is ``"TOP"`` (``"⊤"`` without ``--ascii``) or a list of classes,
each a list of member strings with the value number first.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .analysis import AnalysisResult, NonConvergenceError, run_gvn
from .dot import to_dot
from .ir import FlowGraph, ParseError, denormalize, is_acyclic, normalize, parse_program, render_program, validate
from .oracle import OracleBudgetError, check_completeness_acyclic, check_soundness
from .pool import ExpressionPool, class_strings, render_pool
from .redundancy import RedundancyReport, detect, eliminate

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3
EXIT_NONCONVERGENCE = 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    command: str
    input: str
    format: str = "text"
    trace: bool = False
    max_sweeps: int | None = None
    unroll: int = 3
    ascii: bool = False
    fail_on_redundant: bool = False


def _pool_json(pool: ExpressionPool, ascii: bool):
    if pool.is_top:
        return render_pool(pool, ascii)
    return class_strings(pool)


def load(cfg: RunConfig) -> tuple[FlowGraph, FlowGraph]:
    """Source graph and its normalized form."""
    try:
        with open(cfg.input, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise CliError(f"{cfg.input}: {exc.strerror}", EXIT_INPUT)
    try:
        source = parse_program(text)
    except ParseError as exc:
        raise CliError(f"{cfg.input}:{exc.line}:{exc.column}: {exc.message}", EXIT_INPUT)
    diags = validate(source)
    for d in diags:
        print(f"{cfg.input}: {d}", file=sys.stderr)
    if any(d.severity == "error" for d in diags):
        raise CliError(f"{cfg.input}: invalid flow graph", EXIT_INPUT)
    return source, normalize(source)


def analyze_graph(g: FlowGraph, cfg: RunConfig, trace: list | None = None) -> AnalysisResult:
    observer = None
    if trace is not None:
        def observer(sweep, node, ein, eout):
            trace.append((sweep, node, ein, eout))
    try:
        return run_gvn(g, cfg.max_sweeps, observer)
    except NonConvergenceError as exc:
        lines = [str(exc)]
        for n in exc.last:
            lines.append(f"  {n}: {render_pool(exc.previous[n], True)} -> {render_pool(exc.last[n], True)}")
        raise CliError("\n".join(lines), EXIT_NONCONVERGENCE)


def _report_lines(rep: RedundancyReport) -> list[str]:
    lines = ["verdicts"]
    lines.extend(f"  {v}" for v in rep.verdicts)
    c = rep.counts
    lines.append(
        f"summary: {c['redundant']} redundant, {c['novel']} novel, "
        f"{c['copy']} copies, {c['unreachable']} unreachable"
    )
    return lines


def _report_json(rep: RedundancyReport) -> dict:
    return {"verdicts": [v.to_json() for v in rep.verdicts], "counts": dict(rep.counts)}


def cmd_analyze(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    _, g = load(cfg)
    trace = [] if cfg.trace else None
    r = analyze_graph(g, cfg, trace)
    rep = detect(g, r)
    if cfg.format == "json":
        doc = {
            "graph": g.name,
            "sweeps": r.sweeps,
            "pools": [
                {"node": n.id, "ein": _pool_json(r.ein[n.id], cfg.ascii), "eout": _pool_json(r.eout[n.id], cfg.ascii)}
                for n in g.nodes
            ],
            **_report_json(rep),
        }
        if trace is not None:
            doc["trace"] = [
                {"sweep": s, "node": n, "ein": _pool_json(i, cfg.ascii), "eout": _pool_json(o, cfg.ascii)}
                for s, n, i, o in trace
            ]
        json.dump(doc, out, indent=2, ensure_ascii=False)
        out.write("\n")
    else:
        lines = []
        if trace is not None:
            for s, n, i, o in trace:
                lines.append(f"sweep {s} {n}: in {render_pool(i, cfg.ascii)} out {render_pool(o, cfg.ascii)}")
        lines.append(f"graph {g.name}")
        lines.append(f"sweeps {r.sweeps}")
        for n in g.nodes:
            stmt = f"  # {n.stmt}" if n.stmt else ""
            lines.append(f"node {n.id}{stmt}")
            lines.append(f"  EIN:  {render_pool(r.ein[n.id], cfg.ascii)}")
            lines.append(f"  EOUT: {render_pool(r.eout[n.id], cfg.ascii)}")
        lines.extend(_report_lines(rep))
        out.write("\n".join(lines) + "\n")
    if cfg.fail_on_redundant and rep.counts["redundant"]:
        return EXIT_FINDINGS
    return EXIT_OK


def cmd_check(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    _, g = load(cfg)
    r = analyze_graph(g, cfg)
    acyclic = is_acyclic(g)
    try:
        violations = check_soundness(g, r, cfg.unroll)
        misses = check_completeness_acyclic(g, r) if acyclic else None
    except OracleBudgetError as exc:
        raise CliError(f"{cfg.input}: oracle budget exceeded: {exc}", EXIT_BUDGET)
    if cfg.format == "json":
        doc = {
            "graph": g.name,
            "unroll": cfg.unroll,
            "soundness": [f.to_json() for f in violations],
            "completeness": None if misses is None else [f.to_json() for f in misses],
        }
        json.dump(doc, out, indent=2, ensure_ascii=False)
        out.write("\n")
    else:
        lines = [f"graph {g.name}", f"soundness (unroll {cfg.unroll}): {len(violations)} violation(s)"]
        lines.extend(f"  {f}" for f in violations)
        if misses is None:
            lines.append("completeness: skipped (graph has a loop)")
        else:
            lines.append(f"completeness: {len(misses)} missed equivalence(s)")
            lines.extend(f"  {f}" for f in misses)
        out.write("\n".join(lines) + "\n")
    return EXIT_FINDINGS if violations or misses else EXIT_OK


def cmd_eliminate(cfg: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    _, g = load(cfg)
    r = analyze_graph(g, cfg)
    rep = detect(g, r)
    rewritten = eliminate(g, rep)
    out.write(render_program(denormalize(rewritten)))
    if cfg.format == "json":
        json.dump(_report_json(rep), err, indent=2, ensure_ascii=False)
        err.write("\n")
    else:
        err.write("\n".join(_report_lines(rep)) + "\n")
    if cfg.fail_on_redundant and rep.counts["redundant"]:
        return EXIT_FINDINGS
    return EXIT_OK


def cmd_dump_cfg(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    _, g = load(cfg)
    r = analyze_graph(g, cfg)
    out.write(to_dot(g, r, ascii=cfg.ascii))
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "check": cmd_check,
    "eliminate": cmd_eliminate,
    "dump-cfg": cmd_dump_cfg,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gvn", description="Global value numbering over three-address flow graphs.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("input", help="flow-graph source file")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--trace", action="store_true", help="print pools after every node of every sweep")
    parser.add_argument("--max-sweeps", type=int, default=None, metavar="N")
    parser.add_argument("--unroll", type=int, default=3, metavar="K", help="back-edge bound for oracle paths")
    parser.add_argument("--ascii", action="store_true", help="write TOP instead of the top glyph")
    parser.add_argument("--fail-on-redundant", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.max_sweeps is not None and args.max_sweeps < 1:
        print("gvn: --max-sweeps must be positive", file=sys.stderr)
        return EXIT_INPUT
    if args.unroll < 0:
        print("gvn: --unroll must be non-negative", file=sys.stderr)
        return EXIT_INPUT
    cfg = RunConfig(
        command=args.command,
        input=args.input,
        format=args.format,
        trace=args.trace,
        max_sweeps=args.max_sweeps,
        unroll=args.unroll,
        ascii=args.ascii,
        fail_on_redundant=args.fail_on_redundant,
    )
    try:
        return COMMANDS[cfg.command](cfg)
    except CliError as exc:
        print(f"gvn: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
