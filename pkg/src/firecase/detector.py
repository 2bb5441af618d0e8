"""Pluggable per-tile fire detectors and the external-process protocol.

Three detector kinds share one interface:

* ``BaselineThreshold`` — a configurable spectral threshold rule. A pixel is
  fire iff ``SWIR2 >= saturation_min`` OR (``SWIR2 >= swir2_min`` AND
  ``SWIR2/(SWIR1+epsilon) >= ratio_min``). The first clause catches
  saturated hot cores whose band ratio is unreliable; the second catches
  moderate fires by their SWIR2 excess over SWIR1. Default thresholds are
  calibrated on the synthetic fixture suite (see ``detector_defaults.json``
  and ``tools/regen_detector_defaults.py``), since the underlying published
  labelling conditions are cited but not numerically specified.
* ``Fixture`` — returns stored masks by tile id; the oracle detector used
  in campaign tests.
* ``External`` — hosts a child process speaking the wire protocol below;
  the seam where a learned model (or any other language) plugs in.

Wire protocol (UTF-8, one JSON object per line):

* handshake: host sends ``{"hello": 1}``; child replies
  ``{"hello": 1, "name": <str>, "version": <str>}``.
* request: ``{"id": <int>, "tile": "<path to FTL1 file>"}``.
* response: ``{"id": <int>, "mask": "<path to FMK1 file>"}`` on success or
  ``{"id": <int>, "error": "<message>"}``. The id must echo the request.
  A relative mask path resolves against the tile's directory (the
  convention is to write ``<tile stem>.pred.fmk`` next to the tile).

The host is a serial session: one request in flight per process. Timeouts
and child exits surface as :class:`ExternalDetectorError` with captured
stderr attached.
"""

from __future__ import annotations

import json
import queue
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from firecase.raster import CANONICAL_TILE_SIZE, FireMask, MultiSpectralTile, read_mask, write_tile

PROTOCOL_HELLO = 1
DEFAULT_TIMEOUT_S = 30.0
DEFAULTS_RESOURCE = "detector_defaults.json"


class DetectorError(Exception):
    """Any detector failure the caller can act on."""


class ExternalDetectorError(DetectorError):
    """External process failed; carries the child's captured stderr."""

    def __init__(self, message: str, stderr: str = ""):
        tail = stderr.strip()
        if tail:
            message = f"{message}\n--- detector stderr ---\n{tail}"
        super().__init__(message)
        self.stderr = stderr


class DetectorKind(Enum):
    BASELINE_THRESHOLD = "BaselineThreshold"
    FIXTURE = "Fixture"
    EXTERNAL = "External"


@dataclass(frozen=True, slots=True)
class BaselineParams:
    """Thresholds for the baseline rule; all in reflectance units."""

    swir2_min: float
    ratio_min: float
    saturation_min: float
    epsilon: float = 1e-6

    def __post_init__(self) -> None:
        for name in ("swir2_min", "ratio_min", "saturation_min"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")


@dataclass(frozen=True, slots=True)
class ExternalConfig:
    command: tuple[str, ...]
    cwd: str | None = None
    timeout_s: float = DEFAULT_TIMEOUT_S

    def __post_init__(self) -> None:
        object.__setattr__(self, "command", tuple(self.command))
        if not self.command:
            raise ValueError("external command must not be empty")
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be > 0")


@dataclass(frozen=True)
class DetectorSpec:
    """Exactly one kind's parameters populated, matching ``kind``."""

    kind: DetectorKind
    baseline: BaselineParams | None = None
    fixture: Mapping[str, Path] | None = None
    external: ExternalConfig | None = None

    def __post_init__(self) -> None:
        populated = {
            DetectorKind.BASELINE_THRESHOLD: self.baseline,
            DetectorKind.FIXTURE: self.fixture,
            DetectorKind.EXTERNAL: self.external,
        }
        given = [k for k, v in populated.items() if v is not None]
        if given != [self.kind]:
            names = ", ".join(k.value for k in given) or "none"
            raise ValueError(f"spec kind is {self.kind.value} but parameters given for: {names}")
        if self.fixture is not None:
            object.__setattr__(
                self, "fixture", {str(k): Path(v) for k, v in self.fixture.items()}
            )


@dataclass(frozen=True, slots=True)
class DetectionOutput:
    tile_id: str
    mask: FireMask
    detector_version: str
    wall_time_ms: float


def default_baseline_params() -> BaselineParams:
    """The calibrated thresholds shipped with the package."""
    payload = json.loads(
        (resources.files("firecase") / "data" / DEFAULTS_RESOURCE).read_text(encoding="utf-8")
    )
    return BaselineParams(
        swir2_min=payload["swir2_min"],
        ratio_min=payload["ratio_min"],
        saturation_min=payload["saturation_min"],
        epsilon=payload["epsilon"],
    )


def baseline_spec(params: BaselineParams | None = None) -> DetectorSpec:
    return DetectorSpec(
        kind=DetectorKind.BASELINE_THRESHOLD,
        baseline=params if params is not None else default_baseline_params(),
    )


def fixture_spec(masks: Mapping[str, Path]) -> DetectorSpec:
    return DetectorSpec(kind=DetectorKind.FIXTURE, fixture=dict(masks))


def external_spec(
    command: Sequence[str], *, cwd: str | None = None, timeout_s: float = DEFAULT_TIMEOUT_S
) -> DetectorSpec:
    return DetectorSpec(
        kind=DetectorKind.EXTERNAL,
        external=ExternalConfig(command=tuple(command), cwd=cwd, timeout_s=timeout_s),
    )


def spec_from_json(payload: Mapping[str, Any]) -> DetectorSpec:
    """Build a spec from the JSON form used in project manifests."""
    try:
        kind = DetectorKind(payload["kind"])
    except ValueError:
        known = ", ".join(k.value for k in DetectorKind)
        raise DetectorError(
            f"unknown detector kind {payload['kind']!r}; known kinds: {known}"
        ) from None
    if kind is DetectorKind.BASELINE_THRESHOLD:
        raw = payload.get("baseline")
        if raw is None:
            return baseline_spec()
        return baseline_spec(
            BaselineParams(
                swir2_min=raw["swir2_min"],
                ratio_min=raw["ratio_min"],
                saturation_min=raw["saturation_min"],
                epsilon=raw.get("epsilon", 1e-6),
            )
        )
    if kind is DetectorKind.FIXTURE:
        return fixture_spec({k: Path(v) for k, v in payload["fixture"].items()})
    raw = payload["external"]
    return external_spec(
        raw["command"],
        cwd=raw.get("cwd"),
        timeout_s=raw.get("timeout_s", DEFAULT_TIMEOUT_S),
    )


def baseline_predicate(tile: MultiSpectralTile, params: BaselineParams) -> np.ndarray:
    """The threshold rule, vectorized; returns a boolean (H, W) array."""
    swir2 = tile.band("SWIR2")
    swir1 = tile.band("SWIR1")
    ratio = swir2 / (swir1 + params.epsilon)
    return (swir2 >= params.saturation_min) | (
        (swir2 >= params.swir2_min) & (ratio >= params.ratio_min)
    )


def _require_canonical(tile: MultiSpectralTile) -> None:
    if not tile.is_canonical:
        raise DetectorError(
            f"tile {tile.tile_id!r} is {tile.width}x{tile.height}, "
            f"not canonical {CANONICAL_TILE_SIZE}x{CANONICAL_TILE_SIZE}"
        )


def _run_baseline(params: BaselineParams, tile: MultiSpectralTile) -> DetectionOutput:
    _require_canonical(tile)
    start = time.perf_counter()
    mask = FireMask(baseline_predicate(tile, params))
    elapsed = (time.perf_counter() - start) * 1000.0
    return DetectionOutput(tile.tile_id, mask, "baseline-threshold/1", elapsed)


def _run_fixture(masks: Mapping[str, Path], tile: MultiSpectralTile) -> DetectionOutput:
    start = time.perf_counter()
    path = masks.get(tile.tile_id)
    if path is None:
        raise DetectorError(f"fixture detector has no mask for tile {tile.tile_id!r}")
    mask = read_mask(path)
    if mask.values.shape != (tile.height, tile.width):
        raise DetectorError(
            f"fixture mask for {tile.tile_id!r} is {mask.values.shape}, "
            f"tile is {(tile.height, tile.width)}"
        )
    elapsed = (time.perf_counter() - start) * 1000.0
    return DetectionOutput(tile.tile_id, mask, "fixture/1", elapsed)


class _StreamPump(threading.Thread):
    """Drains a child stream so the child never blocks on a full pipe."""

    def __init__(self, stream, sink: queue.Queue | None = None):
        super().__init__(daemon=True)
        self.stream = stream
        self.sink = sink
        self.captured: list[str] = []

    def run(self) -> None:
        for line in self.stream:
            if self.sink is not None:
                self.sink.put(line)
            else:
                self.captured.append(line)
        if self.sink is not None:
            self.sink.put(None)  # EOF marker


class ExternalDetectorSession:
    """One child process, one serial request stream. Use as a context manager."""

    def __init__(self, config: ExternalConfig):
        self.config = config
        self._next_id = 0
        self._exchange = tempfile.TemporaryDirectory(prefix="detector-exchange-")
        try:
            self._proc = subprocess.Popen(
                list(config.command),
                cwd=config.cwd,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            self._exchange.cleanup()
            raise ExternalDetectorError(f"could not start detector: {exc}") from exc
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._stdout_pump = _StreamPump(self._proc.stdout, self._lines)
        self._stderr_pump = _StreamPump(self._proc.stderr)
        self._stdout_pump.start()
        self._stderr_pump.start()
        try:
            self.name, self.version = self._handshake()
        except Exception:
            self.close()
            raise

    # -- plumbing ---------------------------------------------------------

    def _stderr_text(self) -> str:
        return "".join(self._stderr_pump.captured)

    def _send(self, payload: dict) -> None:
        if self._proc.stdin is None or self._proc.poll() is not None:
            raise ExternalDetectorError(
                f"detector process exited with code {self._proc.returncode}",
                self._stderr_text(),
            )
        try:
            self._proc.stdin.write(json.dumps(payload) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ExternalDetectorError(
                f"could not write to detector: {exc}", self._stderr_text()
            ) from exc

    def _read_object(self) -> dict:
        try:
            line = self._lines.get(timeout=self.config.timeout_s)
        except queue.Empty:
            raise ExternalDetectorError(
                f"detector did not respond within {self.config.timeout_s} s",
                self._stderr_text(),
            ) from None
        if line is None:
            self._proc.wait(timeout=5)
            raise ExternalDetectorError(
                f"detector closed its output (exit code {self._proc.returncode})",
                self._stderr_text(),
            )
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ExternalDetectorError(
                f"detector wrote a non-JSON line: {line.strip()!r}", self._stderr_text()
            ) from exc
        if not isinstance(obj, dict):
            raise ExternalDetectorError(
                f"detector wrote a non-object line: {line.strip()!r}", self._stderr_text()
            )
        return obj

    def _handshake(self) -> tuple[str, str]:
        self._send({"hello": PROTOCOL_HELLO})
        reply = self._read_object()
        if reply.get("hello") != PROTOCOL_HELLO:
            raise ExternalDetectorError(f"bad handshake reply: {reply!r}", self._stderr_text())
        name = reply.get("name")
        version = reply.get("version")
        if not isinstance(name, str) or not isinstance(version, str):
            raise ExternalDetectorError(
                f"handshake reply missing name/version: {reply!r}", self._stderr_text()
            )
        return name, version

    # -- API ----------------------------------------------------------------

    @property
    def detector_version(self) -> str:
        return f"{self.name}/{self.version}"

    def detect(self, tile: MultiSpectralTile) -> DetectionOutput:
        _require_canonical(tile)
        start = time.perf_counter()
        request_id = self._next_id
        self._next_id += 1
        tile_path = Path(self._exchange.name) / f"{request_id:06d}_{tile.tile_id}.ftl"
        write_tile(tile, tile_path)
        self._send({"id": request_id, "tile": str(tile_path)})
        reply = self._read_object()
        if reply.get("id") != request_id:
            raise ExternalDetectorError(
                f"response id {reply.get('id')!r} does not echo request id {request_id}",
                self._stderr_text(),
            )
        if "error" in reply:
            raise ExternalDetectorError(
                f"detector error for tile {tile.tile_id!r}: {reply['error']}",
                self._stderr_text(),
            )
        mask_field = reply.get("mask")
        if not isinstance(mask_field, str):
            raise ExternalDetectorError(
                f"response has neither mask nor error: {reply!r}", self._stderr_text()
            )
        mask_path = Path(mask_field)
        if not mask_path.is_absolute():
            mask_path = tile_path.parent / mask_path
        try:
            mask = read_mask(mask_path)
        except (OSError, ValueError) as exc:
            raise ExternalDetectorError(
                f"could not read mask {mask_path}: {exc}", self._stderr_text()
            ) from exc
        if mask.values.shape != (tile.height, tile.width):
            raise ExternalDetectorError(
                f"mask for {tile.tile_id!r} is {mask.values.shape}, "
                f"tile is {(tile.height, tile.width)}",
                self._stderr_text(),
            )
        elapsed = (time.perf_counter() - start) * 1000.0
        return DetectionOutput(tile.tile_id, mask, self.detector_version, elapsed)

    def close(self) -> None:
        proc = self._proc
        if proc.stdin is not None:
            try:
                proc.stdin.close()
            except OSError:
                pass
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait(timeout=5)
        self._stdout_pump.join(timeout=5)
        self._stderr_pump.join(timeout=5)
        self._exchange.cleanup()

    def __enter__(self) -> ExternalDetectorSession:
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def run_detector(spec: DetectorSpec, tile: MultiSpectralTile) -> DetectionOutput:
    """Run one tile through the detector described by ``spec``."""
    if spec.kind is DetectorKind.BASELINE_THRESHOLD:
        assert spec.baseline is not None
        return _run_baseline(spec.baseline, tile)
    if spec.kind is DetectorKind.FIXTURE:
        assert spec.fixture is not None
        return _run_fixture(spec.fixture, tile)
    assert spec.external is not None
    with ExternalDetectorSession(spec.external) as session:
        return session.detect(tile)


def run_batch(spec: DetectorSpec, tiles: Sequence[MultiSpectralTile]) -> list[DetectionOutput]:
    """Run many tiles; outputs in input order.

    The external detector amortizes one child process over the whole batch.
    The first fatal error aborts the batch; partial results are discarded
    (the exception propagates).
    """
    if spec.kind is DetectorKind.EXTERNAL:
        assert spec.external is not None
        if not tiles:
            return []
        with ExternalDetectorSession(spec.external) as session:
            return [session.detect(tile) for tile in tiles]
    return [run_detector(spec, tile) for tile in tiles]
