"""Constellation pass simulator: revisit timing, alerts, response times.

Flat-strip geometry: each pass sweeps a straight swath along the x axis of
a rectangular region of interest at constant ground speed; the
groundstation sits at the far (trailing) edge, so every alert captured
during a pass is downlinked when the satellite reaches the end of the
region, within the same pass. No Earth curvature, precession, or orbit
propagation: the latency questions this module answers depend only on
revisit, footprint, and groundstation-position arithmetic.

The detector inside the simulator is a stochastic outcome model
(per-fire detection probability, per-frame false-positive probability),
not pixel inference; pixel accuracy lives in the metrics and campaign
modules. One ``random.Random(seed)`` is threaded through frames in order,
giving a replayable draw sequence.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from firecase.findings import Finding, Severity

EARTH_RADIUS_GROUND_KM = 6371.0  # mean radius: ground-track speed
EARTH_RADIUS_EQ_KM = 6378.137  # equatorial: Kepler cross-check
MU_EARTH_KM3_S2 = 398600.4418

MINUTES_PER_MONTH = 30 * 24 * 60


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class ConstellationConfig:
    n_sats: int = 8
    orbit_period_min: float = 94.0
    swath_along_km: float = 32.5
    swath_across_km: float = 19.6
    altitude_km: float = 450.0

    def __post_init__(self) -> None:
        if self.n_sats < 1:
            raise SimulationError(f"n_sats must be at least 1, got {self.n_sats}")
        if self.orbit_period_min <= 0:
            raise SimulationError(f"orbit period must be positive, got {self.orbit_period_min}")
        if self.swath_along_km <= 0 or self.swath_across_km <= 0:
            raise SimulationError("swath dimensions must be positive")

    @property
    def ground_speed_km_s(self) -> float:
        return 2 * math.pi * EARTH_RADIUS_GROUND_KM / (self.orbit_period_min * 60.0)

    @property
    def ground_speed_km_min(self) -> float:
        return self.ground_speed_km_s * 60.0

    def to_json(self) -> dict[str, Any]:
        return {
            "n_sats": self.n_sats,
            "orbit_period_min": self.orbit_period_min,
            "swath_along_km": self.swath_along_km,
            "swath_across_km": self.swath_across_km,
            "altitude_km": self.altitude_km,
        }


def revisit_time(config: ConstellationConfig) -> float:
    """Minutes between successive passes; even phasing makes it constant."""
    return config.orbit_period_min / config.n_sats


def worst_case_response(revisit_min: float, processing_and_downlink_min: float) -> float:
    """Worst case: the fire starts immediately after a pass, so it waits a
    full revisit before capture, then the reporting latency."""
    if revisit_min < 0 or processing_and_downlink_min < 0:
        raise SimulationError("durations must be non-negative")
    return revisit_min + processing_and_downlink_min


def kepler_period_min(altitude_km: float = 450.0) -> float:
    a = EARTH_RADIUS_EQ_KM + altitude_km
    return 2 * math.pi * math.sqrt(a**3 / MU_EARTH_KM3_S2) / 60.0


def check_period(config: ConstellationConfig, *, tolerance: float = 0.05) -> list[Finding]:
    """Cross-check the configured period against the Kepler-derived one."""
    expected = kepler_period_min(config.altitude_km)
    deviation = abs(config.orbit_period_min - expected) / expected
    if deviation > tolerance:
        return [
            Finding(
                Severity.WARNING,
                "period-mismatch",
                "constellation",
                f"configured period {config.orbit_period_min:.1f} min deviates "
                f"{deviation:.1%} from the Kepler period {expected:.1f} min "
                f"at {config.altitude_km:.0f} km",
            )
        ]
    return []


@dataclass(frozen=True)
class RegionOfInterest:
    along_km: float
    across_km: float

    def __post_init__(self) -> None:
        if self.along_km < 0 or self.across_km < 0:
            raise SimulationError("region dimensions must be non-negative")

    @property
    def groundstation_km(self) -> tuple[float, float]:
        # far end with respect to the direction of travel (+x)
        return (self.along_km, self.across_km / 2.0)

    def contains(self, x_km: float, y_km: float) -> bool:
        return 0.0 <= x_km <= self.along_km and 0.0 <= y_km <= self.across_km

    def to_json(self) -> dict[str, Any]:
        return {"along_km": self.along_km, "across_km": self.across_km}


@dataclass(frozen=True)
class FireEvent:
    x_km: float
    y_km: float
    start_time_min: float = 0.0
    observable: bool = True

    def to_json(self) -> dict[str, Any]:
        return {
            "x_km": self.x_km,
            "y_km": self.y_km,
            "start_time_min": self.start_time_min,
            "observable": self.observable,
        }


@dataclass(frozen=True)
class OutcomeModel:
    detection_probability: float = 1.0
    false_positive_rate_per_frame: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.detection_probability <= 1.0:
            raise SimulationError("detection probability must be in [0, 1]")
        if not 0.0 <= self.false_positive_rate_per_frame <= 1.0:
            raise SimulationError("false-positive rate must be in [0, 1]")

    def to_json(self) -> dict[str, Any]:
        return {
            "detection_probability": self.detection_probability,
            "false_positive_rate_per_frame": self.false_positive_rate_per_frame,
        }


@dataclass(frozen=True)
class Alert:
    kind: str  # "fire" | "false-positive"
    x_km: float
    y_km: float
    capture_time_min: float
    downlink_time_min: float
    response_time_min: float | None  # None for false positives
    fire_index: int | None

    def __post_init__(self) -> None:
        if self.downlink_time_min < self.capture_time_min:
            raise SimulationError("downlink cannot precede capture")

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "x_km": self.x_km,
            "y_km": self.y_km,
            "capture_time_min": self.capture_time_min,
            "downlink_time_min": self.downlink_time_min,
            "response_time_min": self.response_time_min,
            "fire_index": self.fire_index,
        }


def frames_per_pass(config: ConstellationConfig, roi: RegionOfInterest) -> int:
    if roi.along_km == 0:
        return 0
    return math.ceil(roi.along_km / config.swath_along_km)


def frames_per_month(config: ConstellationConfig, roi: RegionOfInterest) -> int:
    """Frame captures per 30-day month: whole passes times frames per pass."""
    passes = math.floor(MINUTES_PER_MONTH / revisit_time(config))
    return passes * frames_per_pass(config, roi)


def uncovered_fraction(config: ConstellationConfig, roi: RegionOfInterest) -> float:
    """Across-track RoI fraction a single swath never sees."""
    if roi.across_km == 0:
        return 0.0
    return max(0.0, 1.0 - config.swath_across_km / roi.across_km)


def simulate_pass(
    config: ConstellationConfig,
    roi: RegionOfInterest,
    fires: Sequence[FireEvent],
    outcome_model: OutcomeModel,
    seed: int = 0,
    *,
    pass_start_min: float = 0.0,
    pass_index: int = 0,
    rng: random.Random | None = None,
) -> tuple[list[Alert], list[dict[str, Any]]]:
    """One sweep along the region; returns alerts and the event log.

    Frames tile the track in order; per frame the draw order is fixed
    (one false-positive draw, then one detection draw per eligible fire in
    input order), so a seeded run is replayable draw by draw.
    """
    for i, fire in enumerate(fires):
        if not roi.contains(fire.x_km, fire.y_km):
            raise SimulationError(
                f"fire {i} at ({fire.x_km}, {fire.y_km}) km is outside the region"
            )
    if rng is None:
        rng = random.Random(seed)

    v = config.ground_speed_km_min
    n_frames = frames_per_pass(config, roi)
    downlink_time = pass_start_min + roi.along_km / v

    events: list[dict[str, Any]] = [
        {
            "event": "pass-start",
            "pass_index": pass_index,
            "start_min": pass_start_min,
            "frames": n_frames,
        }
    ]
    alerts: list[Alert] = []

    def frame_of(x_km: float) -> int:
        return min(int(x_km / config.swath_along_km), n_frames - 1)

    for frame in range(n_frames):
        x0 = frame * config.swath_along_km
        x1 = min(x0 + config.swath_along_km, roi.along_km)
        events.append(
            {
                "event": "frame",
                "pass_index": pass_index,
                "frame": frame,
                "x0_km": x0,
                "x1_km": x1,
            }
        )
        if rng.random() < outcome_model.false_positive_rate_per_frame:
            x_fp = (x0 + x1) / 2.0
            capture = pass_start_min + x_fp / v
            alerts.append(
                Alert(
                    kind="false-positive",
                    x_km=x_fp,
                    y_km=min(config.swath_across_km, roi.across_km) / 2.0,
                    capture_time_min=capture,
                    downlink_time_min=downlink_time,
                    response_time_min=None,
                    fire_index=None,
                )
            )
            events.append(
                {
                    "event": "false-positive",
                    "pass_index": pass_index,
                    "frame": frame,
                    "capture_min": capture,
                }
            )
        for i, fire in enumerate(fires):
            if frame_of(fire.x_km) != frame:
                continue
            capture = pass_start_min + fire.x_km / v
            if not fire.observable:
                continue
            if fire.y_km > config.swath_across_km:
                continue  # outside the covered strip
            if fire.start_time_min > capture:
                continue  # not burning yet when imaged
            if rng.random() < outcome_model.detection_probability:
                alerts.append(
                    Alert(
                        kind="fire",
                        x_km=fire.x_km,
                        y_km=fire.y_km,
                        capture_time_min=capture,
                        downlink_time_min=downlink_time,
                        response_time_min=downlink_time - fire.start_time_min,
                        fire_index=i,
                    )
                )
                events.append(
                    {
                        "event": "detection",
                        "pass_index": pass_index,
                        "frame": frame,
                        "fire_index": i,
                        "capture_min": capture,
                    }
                )
    events.append(
        {
            "event": "pass-end",
            "pass_index": pass_index,
            "downlink_min": downlink_time,
            "alerts": len(alerts),
        }
    )
    return alerts, events


@dataclass(frozen=True)
class Scenario:
    constellation: ConstellationConfig = ConstellationConfig()
    roi: RegionOfInterest = RegionOfInterest(325.0, 19.6)
    fires: tuple[FireEvent, ...] = ()
    outcome_model: OutcomeModel = OutcomeModel()
    seed: int = 0
    passes: int = 1

    def __post_init__(self) -> None:
        if self.passes < 1:
            raise SimulationError("scenario needs at least one pass")

    def to_json(self) -> dict[str, Any]:
        return {
            "schema_version": 1,
            "constellation": self.constellation.to_json(),
            "roi": self.roi.to_json(),
            "fires": [f.to_json() for f in self.fires],
            "outcome_model": self.outcome_model.to_json(),
            "seed": self.seed,
            "passes": self.passes,
        }


def load_scenario(source: str | Path | Mapping[str, Any]) -> Scenario:
    if isinstance(source, (str, Path)):
        payload = json.loads(Path(source).read_text(encoding="utf-8"))
    else:
        payload = dict(source)
    version = payload.get("schema_version")
    if version != 1:
        raise SimulationError(f"unsupported scenario schema_version {version!r}")
    return Scenario(
        constellation=ConstellationConfig(**payload.get("constellation", {})),
        roi=RegionOfInterest(**payload.get("roi", {"along_km": 325.0, "across_km": 19.6})),
        fires=tuple(FireEvent(**f) for f in payload.get("fires", [])),
        outcome_model=OutcomeModel(**payload.get("outcome_model", {})),
        seed=int(payload.get("seed", 0)),
        passes=int(payload.get("passes", 1)),
    )


@dataclass(frozen=True)
class ScenarioResult:
    scenario: Scenario
    alerts: tuple[Alert, ...]
    events: tuple[Mapping[str, Any], ...]

    @property
    def fire_alerts(self) -> tuple[Alert, ...]:
        return tuple(a for a in self.alerts if a.kind == "fire")

    @property
    def false_positive_count(self) -> int:
        return sum(1 for a in self.alerts if a.kind == "false-positive")

    def first_alerts(self) -> dict[int, Alert]:
        first: dict[int, Alert] = {}
        for alert in self.fire_alerts:
            assert alert.fire_index is not None
            if alert.fire_index not in first:
                first[alert.fire_index] = alert
        return first

    @property
    def undetected_fires(self) -> tuple[int, ...]:
        detected = set(self.first_alerts())
        return tuple(i for i in range(len(self.scenario.fires)) if i not in detected)

    def response_times_min(self) -> list[float]:
        first = self.first_alerts()
        return [first[i].response_time_min for i in sorted(first)]

    def response_percentiles(self) -> dict[str, float | None]:
        times = self.response_times_min()
        if not times:
            return {"p50": None, "p90": None, "p95": None, "max": None}
        arr = np.asarray(times)
        return {
            "p50": float(np.percentile(arr, 50)),
            "p90": float(np.percentile(arr, 90)),
            "p95": float(np.percentile(arr, 95)),
            "max": float(arr.max()),
        }

    def summary_json(self) -> dict[str, Any]:
        return {
            "schema_version": 1,
            "passes": self.scenario.passes,
            "revisit_min": revisit_time(self.scenario.constellation),
            "frames_per_pass": frames_per_pass(self.scenario.constellation, self.scenario.roi),
            "frames_per_month": frames_per_month(self.scenario.constellation, self.scenario.roi),
            "uncovered_roi_fraction": uncovered_fraction(
                self.scenario.constellation, self.scenario.roi
            ),
            "fires": len(self.scenario.fires),
            "fire_alerts": len(self.fire_alerts),
            "false_positives": self.false_positive_count,
            "undetected_fires": list(self.undetected_fires),
            "response_percentiles_min": self.response_percentiles(),
        }

    def summary_csv(self) -> str:
        pct = self.response_percentiles()
        lines = ["metric,value"]
        lines.append(f"passes,{self.scenario.passes}")
        lines.append(f"fires,{len(self.scenario.fires)}")
        lines.append(f"fire_alerts,{len(self.fire_alerts)}")
        lines.append(f"false_positives,{self.false_positive_count}")
        lines.append(f"undetected_fires,{len(self.undetected_fires)}")
        for key in ("p50", "p90", "p95", "max"):
            value = pct[key]
            lines.append(f"response_{key}_min,{'' if value is None else value}")
        return "\n".join(lines) + "\n"


def simulate_scenario(scenario: Scenario) -> ScenarioResult:
    """Run ``passes`` consecutive passes, one revisit interval apart.

    A single seeded generator is threaded through the passes, so the whole
    scenario is one replayable draw sequence.
    """
    rng = random.Random(scenario.seed)
    gap = revisit_time(scenario.constellation)
    alerts: list[Alert] = []
    events: list[Mapping[str, Any]] = []
    for k in range(scenario.passes):
        pass_alerts, pass_events = simulate_pass(
            scenario.constellation,
            scenario.roi,
            scenario.fires,
            scenario.outcome_model,
            pass_start_min=k * gap,
            pass_index=k,
            rng=rng,
        )
        alerts.extend(pass_alerts)
        events.extend(pass_events)
    return ScenarioResult(scenario, tuple(alerts), tuple(events))


def write_pass_log(events: Iterable[Mapping[str, Any]], path: str | Path) -> None:
    """JSON-lines event stream with stable key order; byte-deterministic."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for event in events:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
