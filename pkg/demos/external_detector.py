"""
Hosting an external detector process
====================================

The campaign runner does not care what a detector is made of: anything
that speaks the line-delimited JSON wire protocol over stdin/stdout can
be verified. This demo writes a minimal child detector to disk, hosts
it, and runs it over a few tiles.
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

from firecase.detector import external_spec, run_batch
from firecase.synthetic import FirePlan, FirePopulation, synth_tile

workdir = Path(tempfile.mkdtemp(prefix="firecase-demo-"))

# A complete external detector in ~30 lines: handshake, then one request
# per line, one response per line. This one predicts fire wherever SWIR2
# exceeds a fixed cut, writing its mask next to the input tile.
CHILD = '''\
import json, sys
from firecase.raster import FireMask, read_tile, write_mask

hello = json.loads(sys.stdin.readline())
assert hello == {"hello": 1}
print(json.dumps({"hello": 1, "name": "demo-threshold", "version": "1"}), flush=True)

for line in sys.stdin:
    req = json.loads(line)
    try:
        tile_path = req["tile"]
        tile = read_tile(tile_path)
        mask = FireMask((tile.bands[2] >= 1.2).astype("uint8"))
        out = tile_path.rsplit(".", 1)[0] + ".pred.fmk"
        write_mask(mask, out)
        print(json.dumps({"id": req["id"], "mask": out}), flush=True)
    except Exception as exc:
        print(json.dumps({"id": req["id"], "error": str(exc)}), flush=True)
'''

child_path = workdir / "child.py"
child_path.write_text(CHILD, encoding="utf-8")

# Host it like any other detector. The session is serial: one request in
# flight, timeouts and crashes surface as ExternalDetectorError.
spec = external_spec([sys.executable, str(child_path)])

rng = np.random.default_rng(5)
tiles = []
for i in range(4):
    plan = FirePlan(row=10, col=10, height=3, width=3, population=FirePopulation.HOT)
    fires = [plan] if i % 2 == 0 else []
    tile, _ = synth_tile("Grassland", rng=rng, tile_id=f"demo_{i}", fires=fires)
    tiles.append(tile)

for output in run_batch(spec, tiles):
    fire_px = int(output.mask.values.sum())
    print(
        f"{output.tile_id}: {fire_px} fire px from "
        f"{output.detector_version} in {output.wall_time_ms:.1f} ms"
    )
