"""The request loop.

Handshake first: the host opens with ``{"hello": 1}`` and the adapter
answers with its name and version. After that, every input line is a
request and produces exactly one response line: ``{"id", "mask"}`` on
success, ``{"id", "error"}`` on failure. Request-level problems (missing
tile file, malformed request, model exceptions) never kill the process;
only a broken handshake or closed stdin ends the loop.

Masks are written next to the tile as ``<tile stem>.pred.fmk`` and
reported by that relative name, which the host resolves against the
tile's directory.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Any, IO

import numpy as np

from fire_adapter import AdapterConfig, Mode, __version__
from fire_adapter.io import read_tile, write_mask
from fire_adapter.model import Predictor, load_model
from fire_adapter.threshold import predict as threshold_predict

PROTOCOL_HELLO = 1
ADAPTER_NAME = "fire-adapter"


def make_predictor(config: AdapterConfig) -> Predictor:
    if config.mode is Mode.LOADED_MODEL:
        assert config.model_path is not None
        return load_model(config.model_path)
    params = config.threshold

    def run(bands: np.ndarray) -> np.ndarray:
        return threshold_predict(bands, params)

    return run


def handle_request(line: str, predictor: Predictor) -> dict[str, Any]:
    """One request line to one response object. Never raises."""
    try:
        request = json.loads(line)
    except json.JSONDecodeError:
        return {"id": None, "error": f"request is not valid JSON: {line.strip()!r}"}
    if not isinstance(request, dict):
        return {"id": None, "error": "request must be a JSON object"}
    request_id = request.get("id")
    tile_field = request.get("tile")
    if not isinstance(tile_field, str):
        return {"id": request_id, "error": "request has no tile path"}
    try:
        tile_path = Path(tile_field)
        bands = read_tile(tile_path)
        mask = predictor(bands)
        mask_name = tile_path.stem + ".pred.fmk"
        write_mask(tile_path.parent / mask_name, mask)
        return {"id": request_id, "mask": mask_name}
    except Exception as exc:  # per-request containment: reply, stay alive
        return {"id": request_id, "error": str(exc)}


def serve(config: AdapterConfig, stdin: IO[str] = sys.stdin, stdout: IO[str] = sys.stdout) -> int:
    """Run the protocol until stdin closes. Returns a process exit code."""
    # fail fast on an unloadable model rather than erroring every request
    predictor = make_predictor(config)

    opening = stdin.readline()
    if not opening:
        print("no handshake received", file=sys.stderr)
        return 2
    try:
        hello = json.loads(opening)
    except json.JSONDecodeError:
        print(f"handshake is not JSON: {opening.strip()!r}", file=sys.stderr)
        return 2
    if not (isinstance(hello, dict) and hello.get("hello") == PROTOCOL_HELLO):
        print(f"unsupported handshake: {opening.strip()!r}", file=sys.stderr)
        return 2

    _reply(stdout, {"hello": PROTOCOL_HELLO, "name": ADAPTER_NAME, "version": __version__})
    for line in stdin:
        if not line.strip():
            continue
        _reply(stdout, handle_request(line, predictor))
    return 0


def _reply(stdout: IO[str], payload: dict[str, Any]) -> None:
    stdout.write(json.dumps(payload) + "\n")
    stdout.flush()
