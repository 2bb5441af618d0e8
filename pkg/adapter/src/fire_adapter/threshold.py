"""The parity threshold rule.

A pixel is fire iff SWIR2 >= saturation_min, or SWIR2 >= swir2_min and
the SWIR2/SWIR1 band ratio >= ratio_min. Saturated hot cores pass the
first clause even when the ratio is unreliable. The defaults are the
host package's published calibrated values; parity means evaluating the
same expression over the same float32 data, so the masks match bit for
bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# band order in FTL1 files
BLUE, SWIR1, SWIR2 = 0, 1, 2


@dataclass(frozen=True)
class ThresholdParams:
    swir2_min: float = 0.634305
    ratio_min: float = 1.626264
    saturation_min: float = 1.850677
    epsilon: float = 1e-6

    def __post_init__(self) -> None:
        for name in ("swir2_min", "ratio_min", "saturation_min", "epsilon"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


def predict(bands: np.ndarray, params: ThresholdParams = ThresholdParams()) -> np.ndarray:
    """Fire mask for one tile; uint8 (height, width)."""
    swir1 = bands[SWIR1]
    swir2 = bands[SWIR2]
    ratio = swir2 / (swir1 + params.epsilon)
    fire = (swir2 >= params.saturation_min) | (
        (swir2 >= params.swir2_min) & (ratio >= params.ratio_min)
    )
    return fire.astype(np.uint8)
