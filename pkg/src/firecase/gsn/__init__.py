"""Goal Structuring Notation: model, DSL, validation, rendering, assembly."""

from __future__ import annotations

from firecase.gsn.dsl import DslError, parse_argument, to_dsl
from firecase.gsn.fragments import (
    CORE_FRAGMENT_IDS,
    FRAGMENT_IDS,
    corpus_path,
    load_corpus,
    load_fragment,
)
from firecase.gsn.instantiate import InstantiationError, instantiate_pattern, placeholders
from firecase.gsn.merge import MergeError, merge_fragments
from firecase.gsn.model import (
    ArgumentGraph,
    AssuranceClaimPoint,
    EdgeKind,
    GraphIntegrityError,
    GsnEdge,
    GsnNode,
    NodeKind,
    infer_root,
)
from firecase.gsn.render import RenderError, render_dot
from firecase.gsn.validate import validate_argument

__all__ = [
    "ArgumentGraph",
    "AssuranceClaimPoint",
    "CORE_FRAGMENT_IDS",
    "DslError",
    "EdgeKind",
    "FRAGMENT_IDS",
    "GraphIntegrityError",
    "GsnEdge",
    "GsnNode",
    "InstantiationError",
    "MergeError",
    "NodeKind",
    "RenderError",
    "corpus_path",
    "infer_root",
    "instantiate_pattern",
    "load_corpus",
    "load_fragment",
    "merge_fragments",
    "parse_argument",
    "placeholders",
    "render_dot",
    "to_dsl",
    "validate_argument",
]
