"""
Assembling an evidence-linked safety case end to end
====================================================

Builds the bundled fixture project (synthetic datasets, generated
evidence, a populated registry and manifest), assembles the case, and
emits the report bundle. Then breaks one evidence file to show the
fail-closed behaviour.
"""

import tempfile
from pathlib import Path

from firecase.assemble import AssemblyError, assemble_case, emit_report, load_project
from firecase.fixture import build_fixture_project

workdir = Path(tempfile.mkdtemp(prefix="firecase-demo-"))

# The fixture project regenerates everything from a seed: datasets,
# evaluation reports, campaign results, pass logs, the registry and the
# project manifest. Identical seeds give byte-identical artifacts.
manifest = build_fixture_project(workdir)
print(f"project at {manifest}")

project = load_project(manifest)
print(f"{len(project.fragments)} fragments, {len(project.bindings)} bindings")

# Assembly re-validates every fragment, re-hashes every bound file, and
# merges the fragments into one argument. Any gap is an error, not a
# degraded case.
case = assemble_case(project)
print(f"status: {case.status}, {len(case.graph.nodes)} nodes in the merged argument")

out = workdir / "report"
for path in emit_report(case, out):
    print(f"  wrote {path.relative_to(workdir)}")

# Fail-closed check: flip one byte of a bound artifact and reassemble.
target = workdir / "artifacts" / "campaign.json"
raw = bytearray(target.read_bytes())
raw[-2] ^= 0x01
target.write_bytes(bytes(raw))

try:
    assemble_case(load_project(manifest))
except AssemblyError as exc:
    print(f"tampering detected: {exc}")
