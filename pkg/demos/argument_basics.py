"""
Parsing, validating and rendering GSN arguments
===============================================

Walks the argument layer bottom-up: a tiny hand-written argument, the
built-in fragment corpus, and the merged safety case.
"""

from firecase.gsn import (
    CORE_FRAGMENT_IDS,
    load_corpus,
    merge_fragments,
    parse_argument,
    render_dot,
    validate_argument,
)

# A GSN argument is plain text, one declaration per line. Claims are
# goals, reasoning steps are strategies, evidence pointers are solutions.
SOURCE = """\
goal G1 "The detector satisfies its safety requirements in the defined context"
strategy S1 "Argue over each quantified requirement"
goal G2 "Missed-fire rate stays within the tolerated bound" [undeveloped]
goal G3 "False-alarm rate stays within the tolerated bound"
solution Sn1 "Verification campaign results"
context C1 "Operating context: daylight, cloud cover below 80 percent"
support G1 -> S1
support S1 -> G2
support S1 -> G3
support G3 -> Sn1
incontext G1 -> C1
"""

graph = parse_argument(SOURCE, graph_id="demo")
print(f"parsed {len(graph.nodes)} nodes, {len(graph.edges)} edges, root {graph.root}")

# Validation returns findings rather than raising. Passing the set of
# evidence-bound solution ids turns on the unbound-solution check; with
# nothing bound, Sn1 is flagged.
for finding in validate_argument(graph, bound_evidence=set()):
    print(f"  {finding}")

findings = validate_argument(graph, bound_evidence={"Sn1"})
print(f"with Sn1 bound: {len(findings)} findings")

# The package ships six ready-made fragments, one per assurance stage.
corpus = load_corpus()
for fragment_id, fragment in corpus.items():
    errors = [f for f in validate_argument(fragment) if f.severity.value == "error"]
    print(f"{fragment_id}: {len(fragment.nodes)} nodes, {len(errors)} errors")

# merge_fragments stitches them into one case: away-goals in one fragment
# unify with the real goals they reference in another. The root fragment
# supplies the top-level claim.
merged = merge_fragments(
    {fid: corpus[fid] for fid in CORE_FRAGMENT_IDS}, root_fragment="ml-scoping"
)
solutions = merged.solutions()
print(f"merged core case: {len(merged.nodes)} nodes, {len(solutions)} solutions")

# DOT output is deterministic; pipe it to Graphviz to get the diagram.
dot = render_dot(merged)
print(f"DOT render: {len(dot.splitlines())} lines, starts {dot.splitlines()[0]!r}")
