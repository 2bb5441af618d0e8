"""Cross-package parity: the host package's baseline detector is the
oracle, and the adapter must reproduce it bit for bit over the full
fixture corpus, through the real wire protocol."""

import sys
import time

import numpy as np
import pytest

from firecase.detector import (
    BaselineParams,
    baseline_spec,
    default_baseline_params,
    external_spec,
    run_batch,
    run_detector,
)
from firecase.synthetic import build_development_catalog, build_verification_catalog

from fire_adapter.threshold import ThresholdParams
from conftest import RawAdapter

ADAPTER_CMD = (sys.executable, "-m", "fire_adapter.cli")
PARITY_BUDGET_S = 30.0


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    """Every tile of the shared fixture corpus: development + verification."""
    root = tmp_path_factory.mktemp("corpus")
    dev = build_development_catalog(root / "dev", seed=97)
    ver = build_verification_catalog(root / "ver", seed=98)
    tiles = [entry.load_tile() for entry in dev] + [entry.load_tile() for entry in ver]
    assert len(tiles) > 1800
    return tiles


def test_default_params_match_primary():
    ours = ThresholdParams()
    primary = default_baseline_params()
    assert ours.swir2_min == primary.swir2_min
    assert ours.ratio_min == primary.ratio_min
    assert ours.saturation_min == primary.saturation_min
    assert ours.epsilon == primary.epsilon


def test_full_corpus_parity_within_budget(corpus):
    start = time.perf_counter()
    got = run_batch(external_spec(ADAPTER_CMD), corpus)
    elapsed = time.perf_counter() - start

    want = run_batch(baseline_spec(), corpus)
    assert got[0].detector_version == "fire-adapter/0.1.0"
    mismatched = [
        g.tile_id
        for g, w in zip(got, want)
        if not np.array_equal(g.mask.values, w.mask.values)
    ]
    assert mismatched == []
    assert elapsed < PARITY_BUDGET_S, f"wire-protocol pass took {elapsed:.1f} s"


def test_explicit_params_parity(corpus):
    params = BaselineParams(swir2_min=0.8, ratio_min=1.2, saturation_min=1.4, epsilon=1e-5)
    spec = external_spec(
        ADAPTER_CMD
        + (
            "--swir2-min", "0.8",
            "--ratio-min", "1.2",
            "--saturation-min", "1.4",
            "--epsilon", "1e-5",
        )
    )
    sample = corpus[::40]
    got = run_batch(spec, sample)
    want = run_batch(baseline_spec(params), sample)
    for g, w in zip(got, want):
        assert np.array_equal(g.mask.values, w.mask.values), g.tile_id


def test_handshake_and_error_handling_on_the_wire(corpus, tmp_path):
    """One session: handshake, a good request, a failing request, another
    good request; masks on the good ones match the oracle bit for bit."""
    from fire_adapter.io import read_mask as adapter_read_mask
    from firecase.raster import write_tile as host_write_tile

    tile = corpus[0]
    tile_path = tmp_path / "parity.ftl"
    host_write_tile(tile, tile_path)
    oracle = run_detector(baseline_spec(), tile).mask.values

    with RawAdapter() as raw:
        hello = raw.handshake()
        assert hello == {"hello": 1, "name": "fire-adapter", "version": "0.1.0"}

        raw.send({"id": 0, "tile": str(tile_path)})
        first = raw.recv()
        assert first["id"] == 0 and first["mask"] == "parity.pred.fmk"
        assert np.array_equal(adapter_read_mask(tmp_path / "parity.pred.fmk"), oracle)

        raw.send({"id": 1, "tile": str(tmp_path / "absent.ftl")})
        failed = raw.recv()
        assert failed["id"] == 1 and "error" in failed

        raw.send({"id": 2, "tile": str(tile_path)})
        second = raw.recv()
        assert second["id"] == 2 and "mask" in second
        assert np.array_equal(adapter_read_mask(tmp_path / "parity.pred.fmk"), oracle)
