from __future__ import annotations

import pytest

from firecase.gsn import (
    InstantiationError,
    instantiate_pattern,
    parse_argument,
    placeholders,
)

PATTERN = """
goal G1 "The {component} satisfies {requirement}"
strategy S1 "Argue over the {requirement} test campaign"
solution Sn1 "Test results for {component}"
support G1 -> S1
support S1 -> Sn1
"""


@pytest.fixture()
def pattern():
    return parse_argument(PATTERN, "pattern")


class TestPlaceholders:
    def test_discovered_across_nodes(self, pattern):
        assert placeholders(pattern) == {"component", "requirement"}

    def test_no_placeholders_in_plain_graph(self):
        assert placeholders(parse_argument('goal G1 "plain"')) == set()


class TestInstantiation:
    def test_substitutes_every_occurrence(self, pattern):
        g = instantiate_pattern(pattern, {"component": "detector", "requirement": "MLSR2"})
        assert g.node("G1").statement == "The detector satisfies MLSR2"
        assert g.node("S1").statement == "Argue over the MLSR2 test campaign"
        assert g.node("Sn1").statement == "Test results for detector"

    def test_structure_preserved(self, pattern):
        g = instantiate_pattern(pattern, {"component": "x", "requirement": "y"})
        assert g.edges == pattern.edges
        assert g.root == pattern.root

    def test_default_instance_graph_id(self, pattern):
        g = instantiate_pattern(pattern, {"component": "x", "requirement": "y"})
        assert g.graph_id == "pattern-instance"
        named = instantiate_pattern(
            pattern, {"component": "x", "requirement": "y"}, graph_id="case-1"
        )
        assert named.graph_id == "case-1"

    def test_evidence_binding_by_node_id(self, pattern):
        g = instantiate_pattern(
            pattern,
            {"component": "x", "requirement": "y", "Sn1": "ev-1234"},
        )
        assert g.node("Sn1").evidence_id == "ev-1234"
        assert g.node("G1").evidence_id is None

    def test_template_not_mutated(self, pattern):
        instantiate_pattern(pattern, {"component": "x", "requirement": "y", "Sn1": "ev-1"})
        assert pattern.node("Sn1").evidence_id is None
        assert "{component}" in pattern.node("G1").statement


class TestErrors:
    def test_missing_placeholder(self, pattern):
        with pytest.raises(InstantiationError, match="missing binding.*'requirement'"):
            instantiate_pattern(pattern, {"component": "x"})

    def test_unknown_key(self, pattern):
        with pytest.raises(InstantiationError, match="matches no node id and no placeholder"):
            instantiate_pattern(
                pattern, {"component": "x", "requirement": "y", "typo": "z"}
            )

    def test_evidence_on_non_solution(self, pattern):
        with pytest.raises(InstantiationError, match="non-Solution"):
            instantiate_pattern(pattern, {"component": "x", "requirement": "y", "G1": "ev-1"})
