"""
Running the verification campaign
=================================

Builds a synthetic verification catalog (one tile per land x size x cloud
case), runs the threshold baseline detector over it, and prints per-case
MLSR verdicts. Then sabotages the detector to show how failures surface.
"""

import tempfile
from pathlib import Path

from firecase.detector import baseline_spec, fixture_spec
from firecase.synthetic import build_verification_catalog, shifted_fixture_masks
from firecase.verification import build_case_matrix, coverage_report, run_campaign

workdir = Path(tempfile.mkdtemp(prefix="firecase-demo-"))
catalog = build_verification_catalog(workdir / "verif", seed=3)

# The case matrix is derived from catalog metadata, not from the files:
# a case is present when at least one tile carries its labels.
matrix = build_case_matrix(catalog)
coverage = coverage_report(matrix)
print(f"{coverage['cases_present']}/{coverage['combinations_total']} cases present")

# Baseline run. The bundled detector is a calibrated SWIR threshold rule.
result = run_campaign(matrix, baseline_spec(), catalog)
print(result.findings_text())
print(f"baseline campaign passed: {result.passed}")

# A detector with an alignment bug: feed back the truth masks shifted
# 7 px down-track. Every boundary offset becomes 7, violating the 6 px
# bound, so MLSR1 fails on every fire case (and the overlap loss drags
# detection down with it).
shifted = shifted_fixture_masks(catalog, workdir / "shifted", shift_px=7)
sabotaged = run_campaign(matrix, fixture_spec(shifted), catalog)
failed = [r for r in sabotaged.results if r.mlsr1.value == "Fail"]
print(f"with a 7 px shift: {len(failed)} cases fail MLSR1, passed={sabotaged.passed}")
print(sabotaged.findings_text())
