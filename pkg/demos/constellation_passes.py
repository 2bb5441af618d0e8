"""
Constellation revisit and alert-latency simulation
==================================================
"""

import json

from firecase.simulate import (
    ConstellationConfig,
    FireEvent,
    RegionOfInterest,
    Scenario,
    check_period,
    frames_per_month,
    kepler_period_min,
    revisit_time,
    simulate_scenario,
    worst_case_response,
)

# The latency argument in two lines of arithmetic. A polar daily-revisit
# service responds in up to 51 hours; an 8-satellite constellation on a
# 94-minute orbit revisits every 11.75 minutes.
print(f"2-day revisit + 3 h reporting: {worst_case_response(2880.0, 180.0) / 60:.0f} h worst case")

config = ConstellationConfig()
print(f"{config.n_sats} sats, {config.orbit_period_min} min orbit: revisit {revisit_time(config)} min")

# Sanity check the configured period against Kepler at the altitude.
print(f"Kepler period at {config.altitude_km} km: {kepler_period_min(config.altitude_km):.1f} min")
print(f"period findings: {check_period(config)}")

roi = RegionOfInterest(along_km=325.0, across_km=19.6)
print(f"frames per month over the region: {frames_per_month(config, roi)}")

# Event simulation: fires ignite in the region, each pass sweeps the
# strip, captures become alerts once the satellite reaches the
# groundstation at the far end of the strip.
scenario = Scenario(
    constellation=config,
    roi=roi,
    fires=(FireEvent(x_km=40.0, y_km=10.0), FireEvent(x_km=300.0, y_km=5.0)),
    seed=42,
    passes=3,
)
result = simulate_scenario(scenario)

for alert in result.fire_alerts:
    print(
        f"fire {alert.fire_index} captured t={alert.capture_time_min:.1f} min, "
        f"downlinked t={alert.downlink_time_min:.1f} min, "
        f"response {alert.response_time_min:.1f} min"
    )

print(json.dumps(result.summary_json()["response_percentiles_min"], indent=2))
