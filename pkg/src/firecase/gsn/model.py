"""Core data model for Goal Structuring Notation argument graphs.

An argument is a directed graph of typed nodes (goals, strategies,
solutions, contexts, assumptions, justifications) connected by SupportedBy
and InContextOf edges, plus assurance claim points (ACPs) attached to
edges. Graphs are immutable; structural integrity (unique ids, resolvable
edge endpoints, ACPs on declared edges) is enforced at construction, while
notation rules (edge kind legality, acyclicity, undeveloped usage) are the
job of :func:`firecase.gsn.validate.validate_argument`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Iterable


class NodeKind(Enum):
    GOAL = "goal"
    STRATEGY = "strategy"
    SOLUTION = "solution"
    CONTEXT = "context"
    ASSUMPTION = "assumption"
    JUSTIFICATION = "justification"

    def __str__(self) -> str:
        return self.value


class EdgeKind(Enum):
    SUPPORTED_BY = "support"
    IN_CONTEXT_OF = "incontext"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class GsnNode:
    """One argument element.

    ``away`` names another argument fragment that develops this node
    elsewhere (GSN away goal); ``evidence_id`` is set on Solution nodes
    once an evidence artifact has been bound to them; ``paraphrase``
    marks statements whose wording is a transcription rather than a
    verbatim quote of the source argument.
    """

    id: str
    kind: NodeKind
    statement: str
    undeveloped: bool = False
    away: str | None = None
    paraphrase: bool = False
    evidence_id: str | None = None

    def with_statement(self, statement: str) -> GsnNode:
        return replace(self, statement=statement)

    def with_evidence(self, evidence_id: str) -> GsnNode:
        return replace(self, evidence_id=evidence_id)


@dataclass(frozen=True, slots=True)
class GsnEdge:
    source: str
    target: str
    kind: EdgeKind

    def key(self) -> tuple[str, str, str]:
        return (self.source, self.target, self.kind.value)


@dataclass(frozen=True, slots=True)
class AssuranceClaimPoint:
    """An assurance claim point attached to one edge of the argument.

    ``confidence_argument`` names the argument that addresses the ACP. In a
    standalone fragment it is a fragment id; after merging it is rewritten
    to the node id of that fragment's root, so it resolves in-graph.
    """

    id: str
    source: str
    target: str
    confidence_argument: str | None = None


class GraphIntegrityError(ValueError):
    """Raised when a graph is structurally unsound (not merely invalid GSN)."""


@dataclass(frozen=True)
class ArgumentGraph:
    """An immutable GSN argument graph.

    ``root`` is the id of the top-level claim, normally inferred by the
    parser as the first-declared Goal with no incoming SupportedBy edge.
    """

    graph_id: str
    nodes: tuple[GsnNode, ...]
    edges: tuple[GsnEdge, ...] = ()
    acps: tuple[AssuranceClaimPoint, ...] = ()
    root: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "acps", tuple(self.acps))
        seen: set[str] = set()
        for node in self.nodes:
            if node.id in seen:
                raise GraphIntegrityError(f"duplicate node id {node.id!r}")
            seen.add(node.id)
        for edge in self.edges:
            for endpoint in (edge.source, edge.target):
                if endpoint not in seen:
                    raise GraphIntegrityError(
                        f"edge {edge.source} -> {edge.target} references unknown node id {endpoint!r}"
                    )
        edge_pairs = {(e.source, e.target) for e in self.edges}
        acp_ids: set[str] = set()
        for acp in self.acps:
            if acp.id in acp_ids:
                raise GraphIntegrityError(f"duplicate ACP id {acp.id!r}")
            acp_ids.add(acp.id)
            if (acp.source, acp.target) not in edge_pairs:
                raise GraphIntegrityError(
                    f"ACP {acp.id} attached to undeclared edge {acp.source} -> {acp.target}"
                )
        if self.root is not None:
            root_node = next((n for n in self.nodes if n.id == self.root), None)
            if root_node is None:
                raise GraphIntegrityError(f"root {self.root!r} is not a node in the graph")
            if root_node.kind is not NodeKind.GOAL:
                raise GraphIntegrityError(f"root {self.root!r} is a {root_node.kind}, not a goal")

    @cached_property
    def nodes_by_id(self) -> dict[str, GsnNode]:
        return {n.id: n for n in self.nodes}

    def node(self, node_id: str) -> GsnNode:
        try:
            return self.nodes_by_id[node_id]
        except KeyError:
            raise KeyError(f"no node {node_id!r} in graph {self.graph_id!r}") from None

    @cached_property
    def _outgoing(self) -> dict[str, tuple[GsnEdge, ...]]:
        out: dict[str, list[GsnEdge]] = {n.id: [] for n in self.nodes}
        for edge in self.edges:
            out[edge.source].append(edge)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def _incoming(self) -> dict[str, tuple[GsnEdge, ...]]:
        inc: dict[str, list[GsnEdge]] = {n.id: [] for n in self.nodes}
        for edge in self.edges:
            inc[edge.target].append(edge)
        return {k: tuple(v) for k, v in inc.items()}

    def outgoing(self, node_id: str, kind: EdgeKind | None = None) -> tuple[GsnEdge, ...]:
        edges = self._outgoing.get(node_id, ())
        if kind is None:
            return edges
        return tuple(e for e in edges if e.kind is kind)

    def incoming(self, node_id: str, kind: EdgeKind | None = None) -> tuple[GsnEdge, ...]:
        edges = self._incoming.get(node_id, ())
        if kind is None:
            return edges
        return tuple(e for e in edges if e.kind is kind)

    def acps_on(self, source: str, target: str) -> tuple[AssuranceClaimPoint, ...]:
        return tuple(a for a in self.acps if a.source == source and a.target == target)

    def root_candidates(self) -> tuple[GsnNode, ...]:
        """Goals with no incoming SupportedBy edge, in declaration order."""
        return tuple(
            n
            for n in self.nodes
            if n.kind is NodeKind.GOAL and not self.incoming(n.id, EdgeKind.SUPPORTED_BY)
        )

    def solutions(self) -> tuple[GsnNode, ...]:
        return tuple(n for n in self.nodes if n.kind is NodeKind.SOLUTION)

    def with_root(self, root: str | None) -> ArgumentGraph:
        return ArgumentGraph(self.graph_id, self.nodes, self.edges, self.acps, root)


def infer_root(nodes: Iterable[GsnNode], edges: Iterable[GsnEdge]) -> str | None:
    """First-declared Goal with no incoming SupportedBy edge, if any."""
    supported = {e.target for e in edges if e.kind is EdgeKind.SUPPORTED_BY}
    for node in nodes:
        if node.kind is NodeKind.GOAL and node.id not in supported:
            return node.id
    return None
