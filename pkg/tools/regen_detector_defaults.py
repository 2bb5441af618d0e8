#!/usr/bin/env python3
"""Regenerate src/firecase/data/detector_defaults.json.

The shipped baseline thresholds are measured, not invented: they are the
margin midpoints between the synthetic background and fire populations on
a fixed-seed calibration suite. Rerun this after changing the synthetic
population envelopes. A test recomputes the same calibration and fails
if the shipped file drifts from the generator.
"""

from __future__ import annotations

import json
from pathlib import Path

from firecase.synthetic import calibrate_baseline, calibration_suite

SEED = 20260821

OUT = Path(__file__).resolve().parent.parent / "src" / "firecase" / "data" / "detector_defaults.json"


def main() -> None:
    params = calibrate_baseline(calibration_suite(SEED))
    payload = {
        "schema_version": 1,
        "calibration_seed": SEED,
        "swir2_min": params.swir2_min,
        "ratio_min": params.ratio_min,
        "saturation_min": params.saturation_min,
        "epsilon": params.epsilon,
    }
    OUT.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {OUT}")
    for key, value in payload.items():
        print(f"  {key}: {value}")


if __name__ == "__main__":
    main()
