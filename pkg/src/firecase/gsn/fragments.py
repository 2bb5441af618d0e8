"""Loader for the argument fragments shipped with the package.

The corpus covers the six stages of the assurance process for the wildfire
alert ML component: scoping, ML safety requirements, data, learning,
verification, and a deployment skeleton. Fragment ids are the file stems
(``ml-scoping`` ... ``ml-deployment``); away-goal and ACP confidence
references inside the files use those ids.
"""

from __future__ import annotations

from importlib import resources

from firecase.gsn.dsl import parse_argument
from firecase.gsn.model import ArgumentGraph

FRAGMENT_IDS = (
    "ml-scoping",
    "ml-requirements",
    "ml-data",
    "ml-learning",
    "ml-verification",
    "ml-deployment",
)

# The five fragments of the core case; the deployment skeleton is optional.
CORE_FRAGMENT_IDS = FRAGMENT_IDS[:-1]


def corpus_path(fragment_id: str):
    if fragment_id not in FRAGMENT_IDS:
        raise KeyError(f"no corpus fragment {fragment_id!r}; known: {', '.join(FRAGMENT_IDS)}")
    return resources.files("firecase.gsn") / "corpus" / f"{fragment_id}.gsn"


def load_fragment(fragment_id: str) -> ArgumentGraph:
    text = corpus_path(fragment_id).read_text(encoding="utf-8")
    return parse_argument(text, graph_id=fragment_id)


def load_corpus(include_deployment: bool = True) -> dict[str, ArgumentGraph]:
    ids = FRAGMENT_IDS if include_deployment else CORE_FRAGMENT_IDS
    return {fragment_id: load_fragment(fragment_id) for fragment_id in ids}
