"""Merging argument fragments into one assembled case graph.

Fragments reference each other two ways:

* an away goal (``[away=<fragment-id>]``) claims its development lives in
  another fragment;
* an ACP's ``[confidence=<fragment-id>]`` names the fragment that argues
  confidence in the claim the ACP guards.

Merge semantics: an away goal whose id equals the referenced fragment's
root id is unified with that root (the stub is dropped; the referenced
fragment supplies the full node, and edges keep resolving because the id
is unchanged). An away goal with a different id is kept and gains a
SupportedBy edge to the referenced fragment's root. Away references to
fragments not present in the merge stay as away leaves. ACP confidence
references to merged fragments are rewritten from fragment id to that
fragment's root node id so they resolve in-graph; the link stays ACP
metadata rather than becoming a synthetic SupportedBy edge.
"""

from __future__ import annotations

from typing import Mapping

from firecase.gsn.model import (
    ArgumentGraph,
    AssuranceClaimPoint,
    EdgeKind,
    GsnEdge,
    GsnNode,
)


class MergeError(ValueError):
    pass


def merge_fragments(
    fragments: Mapping[str, ArgumentGraph],
    *,
    root_fragment: str,
    graph_id: str = "assembled-case",
) -> ArgumentGraph:
    """Merge fragments (keyed by the id their peers use to reference them).

    The merged root is ``root_fragment``'s root. Node and ACP ids must be
    unique across fragments after away-goal unification.
    """
    if root_fragment not in fragments:
        raise MergeError(f"root fragment {root_fragment!r} not among fragments")

    roots: dict[str, str] = {}
    for key, fragment in fragments.items():
        if fragment.root is None:
            raise MergeError(f"fragment {key!r} has no root goal")
        roots[key] = fragment.root

    ordered = [root_fragment] + [k for k in fragments if k != root_fragment]

    nodes: list[GsnNode] = []
    owners: dict[str, str] = {}
    extra_edges: list[GsnEdge] = []
    for key in ordered:
        for node in fragments[key].nodes:
            unify = (
                node.away is not None
                and node.away in fragments
                and roots[node.away] == node.id
            )
            if unify:
                # The referenced fragment provides the full node under the
                # same id; this stub only marked the cross-reference.
                continue
            if node.id in owners:
                raise MergeError(
                    f"node id {node.id!r} appears in fragments "
                    f"{owners[node.id]!r} and {key!r}"
                )
            owners[node.id] = key
            nodes.append(node)
            if node.away is not None and node.away in fragments:
                extra_edges.append(GsnEdge(node.id, roots[node.away], EdgeKind.SUPPORTED_BY))

    edges: list[GsnEdge] = []
    seen_edges: set[tuple[str, str, str]] = set()
    for key in ordered:
        for edge in fragments[key].edges:
            if edge.key() not in seen_edges:
                seen_edges.add(edge.key())
                edges.append(edge)
    for edge in extra_edges:
        if edge.key() not in seen_edges:
            seen_edges.add(edge.key())
            edges.append(edge)

    acps: list[AssuranceClaimPoint] = []
    seen_acps: dict[str, str] = {}
    for key in ordered:
        for acp in fragments[key].acps:
            if acp.id in seen_acps:
                raise MergeError(
                    f"ACP id {acp.id!r} appears in fragments "
                    f"{seen_acps[acp.id]!r} and {key!r}"
                )
            seen_acps[acp.id] = key
            ref = acp.confidence_argument
            if ref is not None and ref in fragments:
                ref = roots[ref]
            acps.append(
                AssuranceClaimPoint(
                    id=acp.id, source=acp.source, target=acp.target, confidence_argument=ref
                )
            )

    return ArgumentGraph(
        graph_id=graph_id,
        nodes=tuple(nodes),
        edges=tuple(edges),
        acps=tuple(acps),
        root=roots[root_fragment],
    )
