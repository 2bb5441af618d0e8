"""Reference detector process for the firecase external-detector protocol.

Speaks line-delimited JSON over stdin/stdout, reads FTL1 tiles, writes
FMK1 masks. Two modes: ``ParityThreshold`` reproduces the host package's
baseline threshold rule bit-exactly; ``LoadedModel`` hands each tile to a
user-supplied predict function loaded from a Python file.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from fire_adapter.threshold import ThresholdParams

__version__ = "0.1.0"


class AdapterError(Exception):
    """Configuration or model-loading failure."""


class Mode(Enum):
    PARITY_THRESHOLD = "ParityThreshold"
    LOADED_MODEL = "LoadedModel"


@dataclass(frozen=True)
class AdapterConfig:
    mode: Mode = Mode.PARITY_THRESHOLD
    threshold: ThresholdParams = ThresholdParams()
    model_path: Path | None = None

    def __post_init__(self) -> None:
        if self.mode is Mode.LOADED_MODEL and self.model_path is None:
            raise AdapterError("LoadedModel mode needs a model path")
        if self.mode is Mode.PARITY_THRESHOLD and self.model_path is not None:
            raise AdapterError("ParityThreshold mode takes no model path")
