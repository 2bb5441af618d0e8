"""Line-oriented DSL for writing argument fragments as plain text.

One statement per line; blank lines and ``#`` comment lines are ignored.

Node statements::

    goal G1 "top claim" [undeveloped] [away=other-fragment] [paraphrase]
    strategy S1 "argument over X"
    solution Sn1 "test results"
    context C1 "operating environment"
    assumption A1 "hazard list is complete"
    justification J1 "threshold choice"

Edge and ACP statements::

    support G1 -> S1
    incontext G1 -> C1
    acp ACP1 on G1 -> C1 [confidence=other-fragment]

Statements are double-quoted with ``\\"`` and ``\\\\`` escapes. Node ids may
not repeat; edges and ACPs may reference nodes declared on any line (the
file is resolved as a whole, so order does not matter). The graph id is not
part of the text; callers pass it in (the corpus loader and CLI use the
file stem).
"""

from __future__ import annotations

import re

from firecase.gsn.model import (
    ArgumentGraph,
    AssuranceClaimPoint,
    EdgeKind,
    GsnEdge,
    GsnNode,
    NodeKind,
    infer_root,
)

_NODE_KEYWORDS = {kind.value: kind for kind in NodeKind}
_EDGE_KEYWORDS = {kind.value: kind for kind in EdgeKind}
_IDENT_RE = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_.:-]*")
_NODE_ATTRS = {"undeveloped", "paraphrase", "away"}
_ACP_ATTRS = {"confidence"}


class DslError(ValueError):
    """A parse or resolution error, with a 1-based line and column."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.reason = message


class _Cursor:
    """Single-line scanner tracking the column for error messages."""

    def __init__(self, text: str, line_no: int):
        self.text = text
        self.line_no = line_no
        self.pos = 0

    def fail(self, message: str) -> DslError:
        return DslError(message, self.line_no, self.pos + 1)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def expect_end(self) -> None:
        if not self.at_end():
            raise self.fail(f"unexpected trailing text {self.text[self.pos:]!r}")

    def read_ident(self, what: str) -> str:
        self.skip_ws()
        match = _IDENT_RE.match(self.text, self.pos)
        if match is None:
            raise self.fail(f"expected {what}")
        self.pos = match.end()
        return match.group(0)

    def expect_literal(self, literal: str) -> None:
        self.skip_ws()
        if not self.text.startswith(literal, self.pos):
            raise self.fail(f"expected {literal!r}")
        self.pos += len(literal)

    def read_string(self) -> str:
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != '"':
            raise self.fail("expected quoted statement")
        self.pos += 1
        out: list[str] = []
        while True:
            if self.pos >= len(self.text):
                raise self.fail("unterminated string")
            ch = self.text[self.pos]
            if ch == "\\":
                if self.pos + 1 >= len(self.text):
                    raise self.fail("unterminated escape")
                nxt = self.text[self.pos + 1]
                if nxt not in ('"', "\\"):
                    raise self.fail(f"unknown escape \\{nxt}")
                out.append(nxt)
                self.pos += 2
            elif ch == '"':
                self.pos += 1
                return "".join(out)
            else:
                out.append(ch)
                self.pos += 1

    def read_attrs(self, allowed: set[str]) -> dict[str, str | bool]:
        attrs: dict[str, str | bool] = {}
        while True:
            self.skip_ws()
            if self.pos >= len(self.text) or self.text[self.pos] != "[":
                return attrs
            self.pos += 1
            name = self.read_ident("attribute name")
            if name not in allowed:
                raise self.fail(f"unknown attribute {name!r}")
            if name in attrs:
                raise self.fail(f"duplicate attribute {name!r}")
            self.skip_ws()
            if self.pos < len(self.text) and self.text[self.pos] == "=":
                self.pos += 1
                attrs[name] = self.read_ident(f"value for attribute {name!r}")
            else:
                attrs[name] = True
            self.expect_literal("]")


def parse_argument(source: str, graph_id: str = "argument") -> ArgumentGraph:
    """Parse DSL text into an :class:`ArgumentGraph`.

    The root is inferred as the first-declared Goal with no incoming
    SupportedBy edge (``None`` if there is no such goal; validation turns
    that into an error). Raises :class:`DslError` on syntax problems,
    duplicate ids, and references to undeclared nodes or edges.
    """
    nodes: list[GsnNode] = []
    node_lines: dict[str, int] = {}
    edges: list[GsnEdge] = []
    edge_decls: list[tuple[GsnEdge, _Cursor]] = []
    acp_decls: list[tuple[AssuranceClaimPoint, _Cursor]] = []

    for line_no, raw in enumerate(source.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        cur = _Cursor(raw.rstrip(), line_no)
        keyword = cur.read_ident("statement keyword")
        if keyword in _NODE_KEYWORDS:
            node_id = cur.read_ident("node id")
            statement = cur.read_string()
            attrs = cur.read_attrs(_NODE_ATTRS)
            cur.expect_end()
            if node_id in node_lines:
                raise DslError(
                    f"duplicate node id {node_id!r} (first declared on line {node_lines[node_id]})",
                    line_no,
                )
            node_lines[node_id] = line_no
            nodes.append(
                GsnNode(
                    id=node_id,
                    kind=_NODE_KEYWORDS[keyword],
                    statement=statement,
                    undeveloped=bool(attrs.get("undeveloped", False)),
                    away=attrs.get("away"),  # type: ignore[arg-type]
                    paraphrase=bool(attrs.get("paraphrase", False)),
                )
            )
        elif keyword in _EDGE_KEYWORDS:
            source_id = cur.read_ident("source node id")
            cur.expect_literal("->")
            target_id = cur.read_ident("target node id")
            cur.expect_end()
            edge_decls.append((GsnEdge(source_id, target_id, _EDGE_KEYWORDS[keyword]), cur))
        elif keyword == "acp":
            acp_id = cur.read_ident("ACP id")
            cur.expect_literal("on")
            source_id = cur.read_ident("source node id")
            cur.expect_literal("->")
            target_id = cur.read_ident("target node id")
            attrs = cur.read_attrs(_ACP_ATTRS)
            cur.expect_end()
            acp_decls.append(
                (
                    AssuranceClaimPoint(
                        id=acp_id,
                        source=source_id,
                        target=target_id,
                        confidence_argument=attrs.get("confidence"),  # type: ignore[arg-type]
                    ),
                    cur,
                )
            )
        else:
            cur.pos = 0
            raise cur.fail(f"unknown statement keyword {keyword!r}")

    declared = set(node_lines)
    for edge, cur in edge_decls:
        for endpoint in (edge.source, edge.target):
            if endpoint not in declared:
                raise DslError(f"edge references unknown node id {endpoint!r}", cur.line_no)
        edges.append(edge)
    edge_pairs = {(e.source, e.target) for e in edges}
    acps: list[AssuranceClaimPoint] = []
    acp_ids: set[str] = set()
    for acp, cur in acp_decls:
        if acp.id in acp_ids:
            raise DslError(f"duplicate ACP id {acp.id!r}", cur.line_no)
        acp_ids.add(acp.id)
        if (acp.source, acp.target) not in edge_pairs:
            raise DslError(
                f"ACP {acp.id} attached to undeclared edge {acp.source} -> {acp.target}",
                cur.line_no,
            )
        acps.append(acp)

    return ArgumentGraph(
        graph_id=graph_id,
        nodes=tuple(nodes),
        edges=tuple(edges),
        acps=tuple(acps),
        root=infer_root(nodes, edges),
    )


def _quote(statement: str) -> str:
    return '"' + statement.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _node_line(node: GsnNode) -> str:
    parts = [node.kind.value, node.id, _quote(node.statement)]
    if node.away is not None:
        parts.append(f"[away={node.away}]")
    if node.undeveloped:
        parts.append("[undeveloped]")
    if node.paraphrase:
        parts.append("[paraphrase]")
    return " ".join(parts)


def to_dsl(graph: ArgumentGraph) -> str:
    """Serialize a graph to canonical DSL text.

    Canonical means deterministic: the root goal first, remaining nodes
    sorted by id, then SupportedBy edges, InContextOf edges, and ACPs, each
    sorted. ``parse_argument(to_dsl(g), g.graph_id)`` reproduces ``g`` up
    to declaration order; evidence bindings are not part of the text (they
    live in project manifests).
    """
    lines: list[str] = []
    ordered = sorted(graph.nodes, key=lambda n: n.id)
    if graph.root is not None:
        ordered.sort(key=lambda n: n.id != graph.root)
    for node in ordered:
        lines.append(_node_line(node))
    for kind in (EdgeKind.SUPPORTED_BY, EdgeKind.IN_CONTEXT_OF):
        for edge in sorted(
            (e for e in graph.edges if e.kind is kind), key=lambda e: (e.source, e.target)
        ):
            lines.append(f"{kind.value} {edge.source} -> {edge.target}")
    for acp in sorted(graph.acps, key=lambda a: a.id):
        line = f"acp {acp.id} on {acp.source} -> {acp.target}"
        if acp.confidence_argument is not None:
            line += f" [confidence={acp.confidence_argument}]"
        lines.append(line)
    return "\n".join(lines) + "\n"
