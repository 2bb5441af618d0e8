from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from firecase.raster import FireMask


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260821)


def random_mask(rng: np.random.Generator, height: int, width: int, p: float = 0.3) -> FireMask:
    return FireMask((rng.random((height, width)) < p).astype(np.uint8))


@pytest.fixture(scope="session")
def small_requirements():
    """Canonical requirements with the taxonomy gutted to 4 combinations."""
    import dataclasses

    from firecase.requirements import load_canonical_requirements

    rs = load_canonical_requirements()
    keep = {
        "LandType": 2,
        "FireSize": 1,
        "FireIntensity": 1,
        "Clouds": 2,
        "TimeOfDay": 1,
        "TimeOfYear": 1,
    }
    dims = []
    for dim in rs.dimensions:
        want = keep[dim.name.value]
        in_ctx = [c for c in dim.classes if c.in_context][:want]
        rest = [c for c in dim.classes if c not in in_ctx]
        out = [dataclasses.replace(c, in_context=False) for c in rest]
        dims.append(dataclasses.replace(dim, classes=tuple(in_ctx + out)))
    return dataclasses.replace(rs, dimensions=tuple(dims))


@pytest.fixture(scope="session")
def small_catalog(tmp_path_factory, small_requirements):
    """A development catalog fully covering the gutted taxonomy."""
    from firecase.synthetic import build_development_catalog

    root = tmp_path_factory.mktemp("smallcat")
    catalog = build_development_catalog(
        root, seed=13, requirements=small_requirements, no_fire_per_split=1
    )
    return catalog, small_requirements
