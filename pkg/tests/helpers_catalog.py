"""Hand-rolled tiny catalogs for exercising single DR violations."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from firecase.raster import (
    DatasetCatalog,
    FireMask,
    MultiSpectralTile,
    Provenance,
    Split,
    TileMetadata,
    catalog_dataset,
    write_catalog_metadata,
    write_mask,
    write_tile,
)

NOMINAL_LABELS = {
    "LandType": "Grassland",
    "FireSize": "30x30m<=Small-medium<60x60m",
    "FireIntensity": "Medium >Schroeder conditions",
    "Clouds": "None",
    "TimeOfDay": "Midday 12-14",
    "TimeOfYear": "Summer",
}


def build_tiny_catalog(
    root: Path,
    *,
    land_type: str = "Grassland",
    nadir: bool = True,
    tile_size: int = 48,
    fire_only: bool = False,
    n_fire: int = 2,
    n_nofire: int = 1,
    provenance: Provenance | None = None,
) -> DatasetCatalog:
    root = Path(root)
    (root / "tiles").mkdir(parents=True, exist_ok=True)
    (root / "masks").mkdir(parents=True, exist_ok=True)
    if fire_only:
        n_nofire = 0
    records = []
    rng = np.random.default_rng(0)

    def add(tile_id: str, has_fire: bool) -> None:
        bands = rng.uniform(0.05, 0.3, (3, tile_size, tile_size)).astype(np.float32)
        write_tile(MultiSpectralTile(tile_id, bands), root / "tiles" / f"{tile_id}.ftl")
        values = np.zeros((tile_size, tile_size), dtype=np.uint8)
        if has_fire:
            values[10:12, 10:12] = 1
        write_mask(FireMask(values), root / "masks" / f"{tile_id}.fmk")
        labels = dict(NOMINAL_LABELS, LandType=land_type)
        records.append(
            TileMetadata(
                tile_id=tile_id,
                class_labels=labels,
                has_fire=has_fire,
                split=Split.DEVELOPMENT,
                provenance=provenance if provenance is not None else Provenance(),
                nadir_representative=nadir,
            )
        )

    for i in range(n_fire):
        add(f"fire_{i:03d}", True)
    for i in range(n_nofire):
        add(f"nofire_{i:03d}", False)
    write_catalog_metadata(records, root)
    return catalog_dataset(root)
