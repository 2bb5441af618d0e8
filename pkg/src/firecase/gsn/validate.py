"""Structural validation of argument graphs against the notation rules.

Validation never raises; it returns findings so a report can show every
problem at once. Errors are notation violations (illegal edge kinds,
support cycles, undeveloped markers on non-goals, no root claim); warnings
flag arguments that are legal but incomplete (goals with no support that
are neither undeveloped nor away, extra root candidates, and, when the
caller supplies the set of bound evidence ids, solutions with no evidence).
"""

from __future__ import annotations

from typing import Collection

from firecase.findings import Finding, _Collector
from firecase.gsn.model import ArgumentGraph, EdgeKind, NodeKind

_SUPPORT_SOURCES = {NodeKind.GOAL, NodeKind.STRATEGY}
_SUPPORT_TARGETS = {NodeKind.GOAL, NodeKind.STRATEGY, NodeKind.SOLUTION}
_CONTEXT_SOURCES = {NodeKind.GOAL, NodeKind.STRATEGY}
_CONTEXT_TARGETS = {NodeKind.CONTEXT, NodeKind.ASSUMPTION, NodeKind.JUSTIFICATION}


def _support_cycle(graph: ArgumentGraph) -> list[str] | None:
    """First SupportedBy cycle found, as a node id path, or None."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n.id: WHITE for n in graph.nodes}
    stack_path: list[str] = []

    def visit(node_id: str) -> list[str] | None:
        color[node_id] = GREY
        stack_path.append(node_id)
        for edge in graph.outgoing(node_id, EdgeKind.SUPPORTED_BY):
            if color[edge.target] == GREY:
                start = stack_path.index(edge.target)
                return stack_path[start:] + [edge.target]
            if color[edge.target] == WHITE:
                found = visit(edge.target)
                if found is not None:
                    return found
        stack_path.pop()
        color[node_id] = BLACK
        return None

    for node in graph.nodes:
        if color[node.id] == WHITE:
            found = visit(node.id)
            if found is not None:
                return found
    return None


def validate_argument(
    graph: ArgumentGraph, *, bound_evidence: Collection[str] | None = None
) -> list[Finding]:
    """Check one graph; returns findings sorted errors-first.

    ``bound_evidence`` is the set of node ids that have evidence bound
    (supplied by the case assembler); when given, unbound Solution nodes
    produce a warning. Without it solutions are not checked, since binding
    is a property of a project, not of the argument text.
    """
    out = _Collector()

    for edge in graph.edges:
        source = graph.node(edge.source)
        target = graph.node(edge.target)
        if edge.kind is EdgeKind.SUPPORTED_BY:
            if source.kind not in _SUPPORT_SOURCES:
                out.error(
                    "edge-kind",
                    edge.source,
                    f"SupportedBy source must be a goal or strategy, not a {source.kind}",
                )
            if target.kind not in _SUPPORT_TARGETS:
                out.error(
                    "edge-kind",
                    edge.target,
                    f"SupportedBy target must be a goal, strategy or solution, not a {target.kind}",
                )
        else:
            if source.kind not in _CONTEXT_SOURCES:
                out.error(
                    "edge-kind",
                    edge.source,
                    f"InContextOf source must be a goal or strategy, not a {source.kind}",
                )
            if target.kind not in _CONTEXT_TARGETS:
                out.error(
                    "edge-kind",
                    edge.target,
                    f"InContextOf target must be a context, assumption or justification, "
                    f"not a {target.kind}",
                )

    cycle = _support_cycle(graph)
    if cycle is not None:
        out.error("cycle", cycle[0], "SupportedBy cycle: " + " -> ".join(cycle))

    for node in graph.nodes:
        if node.undeveloped and node.kind is not NodeKind.GOAL:
            out.error(
                "undeveloped-kind",
                node.id,
                f"only goals may be marked undeveloped; {node.id} is a {node.kind}",
            )

    candidates = graph.root_candidates()
    if graph.root is None or not candidates:
        out.error("no-root", graph.graph_id, "no goal without incoming SupportedBy edge")
    else:
        # Goals referenced as an ACP's confidence argument are anchored at
        # that ACP (post-merge the reference is a node id), so they are not
        # stray roots.
        anchored = {a.confidence_argument for a in graph.acps if a.confidence_argument}
        extras = [n.id for n in candidates if n.id != graph.root and n.id not in anchored]
        for node_id in extras:
            out.warning(
                "multiple-roots",
                node_id,
                f"goal has no incoming SupportedBy edge but is not the root ({graph.root})",
            )

    for node in graph.nodes:
        if node.kind is NodeKind.GOAL:
            if node.undeveloped or node.away is not None:
                continue
            if not graph.outgoing(node.id, EdgeKind.SUPPORTED_BY):
                out.warning(
                    "unsupported-goal",
                    node.id,
                    "goal has no supporting argument and is not marked undeveloped or away",
                )
        elif node.kind is NodeKind.STRATEGY:
            if not graph.outgoing(node.id, EdgeKind.SUPPORTED_BY):
                out.warning("unsupported-strategy", node.id, "strategy has no supporting goals")

    if bound_evidence is not None:
        bound = set(bound_evidence)
        for node in graph.solutions():
            if node.id not in bound and node.evidence_id is None:
                out.warning("unbound-solution", node.id, "solution has no evidence bound to it")

    return out.sorted()
