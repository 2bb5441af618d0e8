"""
Scene tiling and segmentation metrics
=====================================
"""

import numpy as np

from firecase.metrics import (
    MaskClass,
    PassCounts,
    discrete_detections,
    format_pct,
    iou,
    pass_rates,
    score_masks,
)
from firecase.raster import FireMask, Scene, assemble_masks, tile_grid, tile_mask, tile_scene

rng = np.random.default_rng(7)

# A capture is a 3-band reflectance cube (Blue, SWIR-1, SWIR-2). The
# on-board pipeline never sees the whole scene at once: it runs on
# fixed-size tiles, zero-padded at the right and bottom edges.
scene = Scene(bands=rng.random((3, 1600, 2000), dtype=np.float32))
cols, rows = tile_grid(scene.width, scene.height, tile_size=48)
tiles = tile_scene(scene, tile_size=48)
print(f"{scene.width}x{scene.height} scene -> {cols}x{rows} grid = {len(tiles)} tiles")

# Masks tile with the same layout, and assemble_masks undoes the cut.
# The round trip is exact: padding is discarded, coverage is checked.
truth = FireMask((rng.random((1600, 2000)) < 0.001).astype(np.uint8))
rebuilt = assemble_masks(tile_mask(truth, tile_size=48), (truth.height, truth.width))
print(f"tile/assemble round trip exact: {bool((rebuilt.values == truth.values).all())}")

# Per-sample scoring is plain set arithmetic over pixels.
pred = np.zeros((48, 48), dtype=np.uint8)
ref = np.zeros((48, 48), dtype=np.uint8)
pred[10:14, 10:14] = 1  # predicted fire, 4x4
ref[11:15, 11:15] = 1   # true fire, shifted one pixel
scores = score_masks(FireMask(pred), FireMask(ref))
print(f"fire IoU {scores.fire_iou:.3f}, non-fire IoU {scores.nonfire_iou:.5f}")
print(f"fire-class IoU direct: {iou(FireMask(pred), FireMask(ref), MaskClass.FIRE):.3f}")

# Discrete detections are 8-connected components of predicted fire, the
# unit integration tests count.
multi = np.zeros((48, 48), dtype=np.uint8)
multi[2:5, 2:5] = 1
multi[20:22, 30:35] = 1
multi[40, 40] = 1
components = discrete_detections(FireMask(multi))
print(f"{components.count} discrete detections")
for comp in components.components:
    print(f"  component of {comp.size} px at centroid {comp.centroid}")

# Campaign-level rates come from detection counts. FN% and FP% are
# percentages of actual fires and of raised detections respectively.
counts = PassCounts(detections=921, false_negatives=4, false_positives=27)
rates = pass_rates(counts)
print(f"FN {format_pct(rates.fn_pct)}%  FP {format_pct(rates.fp_pct)}%")
