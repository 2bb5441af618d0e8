"""Graphviz DOT rendering for argument graphs.

The output is plain DOT text; no graphviz binding is required to produce
it. The shape mapping approximates the published notation with stock
graphviz shapes (documented in the README):

    goal           box
    strategy       parallelogram
    solution       circle
    context        box, rounded
    assumption     ellipse, statement suffixed with "A"
    justification  ellipse, statement suffixed with "J"

Undeveloped goals are drawn dashed; away goals get a double border plus an
``[away: fragment]`` label line. SupportedBy edges carry a solid arrowhead,
InContextOf edges a hollow one, and edges with an assurance claim point are
drawn with a square tail decoration labelled with the ACP id. Output is
deterministic: nodes sorted by id, then edges, with a fixed attribute
order, so identical graphs render to identical bytes.
"""

from __future__ import annotations

from firecase.findings import Severity
from firecase.gsn.model import ArgumentGraph, EdgeKind, NodeKind
from firecase.gsn.validate import validate_argument

_SHAPES = {
    NodeKind.GOAL: ("box", None),
    NodeKind.STRATEGY: ("parallelogram", None),
    NodeKind.SOLUTION: ("circle", None),
    NodeKind.CONTEXT: ("box", "rounded"),
    NodeKind.ASSUMPTION: ("ellipse", None),
    NodeKind.JUSTIFICATION: ("ellipse", None),
}
_MARKERS = {NodeKind.ASSUMPTION: "A", NodeKind.JUSTIFICATION: "J"}


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")


class RenderError(ValueError):
    """Raised when asked to render an argument that fails validation."""


def render_dot(graph: ArgumentGraph) -> str:
    """Render to DOT text. Refuses graphs with validation errors."""
    problems = [f for f in validate_argument(graph) if f.severity is Severity.ERROR]
    if problems:
        listed = "; ".join(str(f) for f in problems[:3])
        more = "" if len(problems) <= 3 else f" (+{len(problems) - 3} more)"
        raise RenderError(f"graph {graph.graph_id!r} has validation errors: {listed}{more}")

    lines = [
        f'digraph "{_escape(graph.graph_id)}" {{',
        "  rankdir=TB;",
        '  node [fontname="Helvetica" fontsize=10];',
        '  edge [fontname="Helvetica" fontsize=9];',
    ]

    for node in sorted(graph.nodes, key=lambda n: n.id):
        shape, style = _SHAPES[node.kind]
        label_lines = [node.id, node.statement]
        if node.kind in _MARKERS:
            label_lines.append(_MARKERS[node.kind])
        if node.away is not None:
            label_lines.append(f"[away: {node.away}]")
        attrs = [f'label="{_escape(chr(10).join(label_lines))}"', f"shape={shape}"]
        styles = [style] if style else []
        if node.undeveloped:
            styles.append("dashed")
        if styles:
            attrs.append(f'style="{",".join(styles)}"')
        if node.away is not None:
            attrs.append("peripheries=2")
        lines.append(f'  "{_escape(node.id)}" [{" ".join(attrs)}];')

    def edge_sort_key(edge):
        return (edge.kind is not EdgeKind.SUPPORTED_BY, edge.source, edge.target)

    for edge in sorted(graph.edges, key=edge_sort_key):
        attrs = ["arrowhead=normal" if edge.kind is EdgeKind.SUPPORTED_BY else "arrowhead=empty"]
        acps = graph.acps_on(edge.source, edge.target)
        if acps:
            attrs.extend(["dir=both", "arrowtail=box"])
            label = ", ".join(a.id for a in acps)
            attrs.append(f'taillabel="{_escape(label)}"')
        lines.append(f'  "{_escape(edge.source)}" -> "{_escape(edge.target)}" [{" ".join(attrs)}];')

    lines.append("}")
    return "\n".join(lines) + "\n"
