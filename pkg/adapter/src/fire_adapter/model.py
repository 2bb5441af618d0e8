"""LoadedModel mode: inference code supplied as a Python file.

The file is treated as opaque by everything except this loader: it must
define ``predict(bands) -> mask`` taking the float32 (3, H, W) array and
returning an (H, W) array of zeros and ones. No training machinery ships
here; whatever produced the model is out of scope.
"""

from __future__ import annotations

import importlib.util
from pathlib import Path
from typing import Callable, Protocol

import numpy as np

from fire_adapter import AdapterError


class Predictor(Protocol):
    def __call__(self, bands: np.ndarray) -> np.ndarray: ...


def load_model(path: str | Path) -> Predictor:
    path = Path(path)
    if not path.is_file():
        raise AdapterError(f"model file {path} does not exist")
    spec = importlib.util.spec_from_file_location("fire_adapter_loaded_model", path)
    if spec is None or spec.loader is None:
        raise AdapterError(f"cannot load model from {path}")
    module = importlib.util.module_from_spec(spec)
    try:
        spec.loader.exec_module(module)
    except Exception as exc:
        raise AdapterError(f"model file {path} failed to import: {exc}") from exc
    predict = getattr(module, "predict", None)
    if not callable(predict):
        raise AdapterError(f"model file {path} does not define a predict() callable")
    return _checked(predict)


def _checked(predict: Callable[[np.ndarray], np.ndarray]) -> Predictor:
    def run(bands: np.ndarray) -> np.ndarray:
        out = np.asarray(predict(bands))
        if out.shape != bands.shape[1:]:
            raise AdapterError(
                f"model returned shape {out.shape}, tile is {bands.shape[1:]}"
            )
        if out.dtype == bool:
            return out.astype(np.uint8)
        if not np.isin(out, (0, 1)).all():
            raise AdapterError("model mask values must be 0 or 1")
        return out.astype(np.uint8)

    return run
