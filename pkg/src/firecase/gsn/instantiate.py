"""Instantiation of argument patterns.

A pattern is an ordinary :class:`ArgumentGraph` whose statements may
contain ``{placeholder}`` markers. Instantiation substitutes text for every
placeholder and may additionally bind evidence artifact ids to Solution
nodes. Binding keys are classified by name: a key that matches a node id is
an evidence binding (the node must be a Solution); any other key must match
a placeholder. Unknown keys and uncovered placeholders are errors, so a
typo cannot silently produce a half-instantiated argument.
"""

from __future__ import annotations

import re
from typing import Mapping

from firecase.gsn.model import ArgumentGraph, NodeKind

_PLACEHOLDER_RE = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


class InstantiationError(ValueError):
    pass


def placeholders(graph: ArgumentGraph) -> set[str]:
    """All placeholder names appearing in the graph's statements."""
    found: set[str] = set()
    for node in graph.nodes:
        found.update(_PLACEHOLDER_RE.findall(node.statement))
    return found


def instantiate_pattern(
    template: ArgumentGraph,
    bindings: Mapping[str, str],
    *,
    graph_id: str | None = None,
) -> ArgumentGraph:
    """Substitute placeholders and bind evidence ids; returns a new graph."""
    node_ids = set(template.nodes_by_id)
    wanted = placeholders(template)

    text_bindings: dict[str, str] = {}
    evidence_bindings: dict[str, str] = {}
    for key, value in bindings.items():
        if key in node_ids:
            node = template.node(key)
            if node.kind is not NodeKind.SOLUTION:
                raise InstantiationError(
                    f"evidence id bound to non-Solution node {key!r} ({node.kind})"
                )
            evidence_bindings[key] = value
        elif key in wanted:
            text_bindings[key] = value
        else:
            raise InstantiationError(f"binding {key!r} matches no node id and no placeholder")

    missing = sorted(wanted - set(text_bindings))
    if missing:
        raise InstantiationError(f"missing binding for placeholder {missing[0]!r}")

    def substitute(statement: str) -> str:
        return _PLACEHOLDER_RE.sub(lambda m: text_bindings[m.group(1)], statement)

    new_nodes = []
    for node in template.nodes:
        node = node.with_statement(substitute(node.statement))
        if node.id in evidence_bindings:
            node = node.with_evidence(evidence_bindings[node.id])
        new_nodes.append(node)

    return ArgumentGraph(
        graph_id=graph_id if graph_id is not None else f"{template.graph_id}-instance",
        nodes=tuple(new_nodes),
        edges=template.edges,
        acps=template.acps,
        root=template.root,
    )
