"""Raster data model: multispectral tiles, fire masks, scenes, tiling.

Tiles are 3-band (Blue, SWIR1, SWIR2) float32 reflectance rasters; the
canonical model-input size is 48x48. Scenes are larger rasters of the same
band layout that get tiled for inference and reassembled afterwards. Masks
are per-pixel binary fire labels. All pixel arrays are numpy, shaped
``(bands, height, width)`` for imagery and ``(height, width)`` for masks,
and are frozen (writeable=False) on construction.

Tiling uses one rule everywhere: ``ceil(width/ts) * ceil(height/ts)``
non-overlapping tiles in row-major order, edge tiles zero-padded to full
size. A 2000x1600 scene at 48 px therefore yields 42*34 = 1428 tiles.

File formats (little-endian):

* tile: magic ``FTL1``, u32 width, u32 height, u32 bands (= 3), then
  float32 values band-major, row-major within each band;
* mask: magic ``FMK1``, u32 width, u32 height, then one byte per pixel,
  each 0 or 1, row-major.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

BAND_ORDER = ("Blue", "SWIR1", "SWIR2")
CANONICAL_TILE_SIZE = 48
DEFAULT_GROUND_RESOLUTION_M = 30.0

TILE_MAGIC = b"FTL1"
MASK_MAGIC = b"FMK1"
_TILE_HEADER = struct.Struct("<4sIII")
_MASK_HEADER = struct.Struct("<4sII")


class RasterFormatError(ValueError):
    """A tile/mask file violates the binary format."""


def _freeze(array: np.ndarray, dtype) -> np.ndarray:
    # Always copy so freezing never flips the writeable flag on caller data.
    array = np.array(array, dtype=dtype, order="C", copy=True)
    array.setflags(write=False)
    return array


def _check_reflectance(bands: np.ndarray, what: str) -> None:
    if bands.ndim != 3 or bands.shape[0] != len(BAND_ORDER):
        raise ValueError(f"{what} must have shape (3, height, width), got {bands.shape}")
    if bands.shape[1] < 1 or bands.shape[2] < 1:
        raise ValueError(f"{what} must be at least 1x1, got {bands.shape}")
    if not np.isfinite(bands).all():
        raise ValueError(f"{what} contains non-finite reflectance values")
    if (bands < 0).any():
        raise ValueError(f"{what} contains negative reflectance values")


@dataclass(frozen=True)
class MultiSpectralTile:
    """One 3-band reflectance tile, band order per :data:`BAND_ORDER`."""

    tile_id: str
    bands: np.ndarray
    origin: tuple[int, int] = (0, 0)
    ground_resolution_m_per_px: float = DEFAULT_GROUND_RESOLUTION_M

    def __post_init__(self) -> None:
        bands = _freeze(self.bands, np.float32)
        _check_reflectance(bands, f"tile {self.tile_id!r}")
        object.__setattr__(self, "bands", bands)
        object.__setattr__(self, "origin", (int(self.origin[0]), int(self.origin[1])))
        if self.ground_resolution_m_per_px <= 0:
            raise ValueError("ground resolution must be positive")

    @property
    def height(self) -> int:
        return self.bands.shape[1]

    @property
    def width(self) -> int:
        return self.bands.shape[2]

    @property
    def is_canonical(self) -> bool:
        return self.height == CANONICAL_TILE_SIZE and self.width == CANONICAL_TILE_SIZE

    def band(self, name: str) -> np.ndarray:
        return self.bands[BAND_ORDER.index(name)]


@dataclass(frozen=True)
class FireMask:
    """Per-pixel binary fire labels, 1 = fire."""

    values: np.ndarray

    def __post_init__(self) -> None:
        raw = np.asarray(self.values)
        if raw.dtype == bool:
            raw = raw.astype(np.uint8)
        if not np.issubdtype(raw.dtype, np.integer):
            raise ValueError(f"mask values must be integer or bool, got dtype {raw.dtype}")
        if raw.size and (raw.min() < 0 or raw.max() > 1):
            raise ValueError("mask values must be 0 or 1")
        values = _freeze(raw, np.uint8)
        if values.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {values.shape}")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError(f"mask must be at least 1x1, got {values.shape}")
        object.__setattr__(self, "values", values)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def has_fire(self) -> bool:
        return bool(self.values.any())

    @property
    def fire_pixel_count(self) -> int:
        return int(self.values.sum())


@dataclass(frozen=True)
class Scene:
    """A full capture: same band layout as tiles, plus a geo anchor."""

    bands: np.ndarray
    anchor_lat: float = 0.0
    anchor_lon: float = 0.0
    ground_resolution_m_per_px: float = DEFAULT_GROUND_RESOLUTION_M

    def __post_init__(self) -> None:
        bands = _freeze(self.bands, np.float32)
        _check_reflectance(bands, "scene")
        object.__setattr__(self, "bands", bands)
        if self.ground_resolution_m_per_px <= 0:
            raise ValueError("ground resolution must be positive")

    @property
    def height(self) -> int:
        return self.bands.shape[1]

    @property
    def width(self) -> int:
        return self.bands.shape[2]


def tile_grid(width: int, height: int, tile_size: int) -> tuple[int, int]:
    """(columns, rows) of the tiling grid under the ceil-pad rule."""
    return (math.ceil(width / tile_size), math.ceil(height / tile_size))


def tile_scene(
    scene: Scene, tile_size: int = CANONICAL_TILE_SIZE, *, id_prefix: str = "tile"
) -> list[MultiSpectralTile]:
    """Cut a scene into non-overlapping tiles, row-major, zero-padded edges.

    Emits exactly ``ceil(width/ts) * ceil(height/ts)`` tiles; each records
    its pixel origin (row, col) in the scene.
    """
    if tile_size < 1:
        raise ValueError(f"tile_size must be >= 1, got {tile_size}")
    cols, rows = tile_grid(scene.width, scene.height, tile_size)
    tiles: list[MultiSpectralTile] = []
    for ri in range(rows):
        for ci in range(cols):
            r0, c0 = ri * tile_size, ci * tile_size
            r1, c1 = min(r0 + tile_size, scene.height), min(c0 + tile_size, scene.width)
            block = np.zeros((len(BAND_ORDER), tile_size, tile_size), dtype=np.float32)
            block[:, : r1 - r0, : c1 - c0] = scene.bands[:, r0:r1, c0:c1]
            tiles.append(
                MultiSpectralTile(
                    tile_id=f"{id_prefix}_r{ri:03d}_c{ci:03d}",
                    bands=block,
                    origin=(r0, c0),
                    ground_resolution_m_per_px=scene.ground_resolution_m_per_px,
                )
            )
    return tiles


def tile_mask(mask: FireMask, tile_size: int = CANONICAL_TILE_SIZE) -> list[tuple[tuple[int, int], FireMask]]:
    """Cut a scene-sized mask with the same layout tile_scene uses.

    Returns (origin, tile mask) pairs suitable for assemble_masks; handy
    for building truth fixtures that line up with tiled scenes.
    """
    if tile_size < 1:
        raise ValueError(f"tile_size must be >= 1, got {tile_size}")
    cols, rows = tile_grid(mask.width, mask.height, tile_size)
    pieces: list[tuple[tuple[int, int], FireMask]] = []
    for ri in range(rows):
        for ci in range(cols):
            r0, c0 = ri * tile_size, ci * tile_size
            r1, c1 = min(r0 + tile_size, mask.height), min(c0 + tile_size, mask.width)
            block = np.zeros((tile_size, tile_size), dtype=np.uint8)
            block[: r1 - r0, : c1 - c0] = mask.values[r0:r1, c0:c1]
            pieces.append(((r0, c0), FireMask(block)))
    return pieces


class CoverageError(ValueError):
    """Tile masks do not cover the scene exactly once."""


def assemble_masks(
    tiles: Iterable[tuple[tuple[int, int], FireMask]], scene_shape: tuple[int, int]
) -> FireMask:
    """Reassemble per-tile masks into one scene mask.

    ``scene_shape`` is (height, width). Tile extents beyond the scene are
    padding and are discarded; every in-scene pixel must be written exactly
    once, otherwise a :class:`CoverageError` is raised.
    """
    height, width = scene_shape
    if height < 1 or width < 1:
        raise ValueError(f"scene shape must be at least 1x1, got {scene_shape}")
    out = np.zeros((height, width), dtype=np.uint8)
    covered = np.zeros((height, width), dtype=bool)
    for (r0, c0), mask in tiles:
        if r0 < 0 or c0 < 0:
            raise CoverageError(f"tile origin ({r0}, {c0}) is negative")
        if r0 >= height or c0 >= width:
            raise CoverageError(f"tile origin ({r0}, {c0}) lies outside the scene")
        r1, c1 = min(r0 + mask.height, height), min(c0 + mask.width, width)
        region = covered[r0:r1, c0:c1]
        if region.any():
            raise CoverageError(f"overlapping coverage in tile at origin ({r0}, {c0})")
        covered[r0:r1, c0:c1] = True
        out[r0:r1, c0:c1] = mask.values[: r1 - r0, : c1 - c0]
    if not covered.all():
        missing = int((~covered).sum())
        raise CoverageError(f"{missing} scene pixels not covered by any tile")
    return FireMask(out)


def write_tile(tile: MultiSpectralTile, path: str | Path) -> None:
    payload = _TILE_HEADER.pack(TILE_MAGIC, tile.width, tile.height, len(BAND_ORDER))
    Path(path).write_bytes(payload + tile.bands.astype("<f4").tobytes())


def _read_exact(data: bytes, offset: int, count: int, path: Path, what: str) -> bytes:
    if len(data) < offset + count:
        raise RasterFormatError(f"{path}: truncated file while reading {what}")
    return data[offset : offset + count]


def read_tile_header(path: str | Path) -> tuple[int, int, int]:
    """(width, height, bands) from a tile file without reading pixels."""
    path = Path(path)
    with path.open("rb") as fh:
        header = fh.read(_TILE_HEADER.size)
    if len(header) < _TILE_HEADER.size:
        raise RasterFormatError(f"{path}: truncated file while reading header")
    magic, width, height, bands = _TILE_HEADER.unpack(header)
    if magic != TILE_MAGIC:
        raise RasterFormatError(f"{path}: bad magic {magic!r}, expected {TILE_MAGIC!r}")
    return width, height, bands


def read_tile(
    path: str | Path,
    *,
    tile_id: str | None = None,
    origin: tuple[int, int] = (0, 0),
    ground_resolution_m_per_px: float = DEFAULT_GROUND_RESOLUTION_M,
) -> MultiSpectralTile:
    """Read a tile file. Identity fields are not stored in the format, so
    tile_id defaults to the file stem and origin/resolution to arguments."""
    path = Path(path)
    data = path.read_bytes()
    header = _read_exact(data, 0, _TILE_HEADER.size, path, "header")
    magic, width, height, bands = _TILE_HEADER.unpack(header)
    if magic != TILE_MAGIC:
        raise RasterFormatError(f"{path}: bad magic {magic!r}, expected {TILE_MAGIC!r}")
    if bands != len(BAND_ORDER):
        raise RasterFormatError(f"{path}: expected {len(BAND_ORDER)} bands, file declares {bands}")
    if width < 1 or height < 1:
        raise RasterFormatError(f"{path}: degenerate dimensions {width}x{height}")
    count = bands * height * width
    raw = _read_exact(data, _TILE_HEADER.size, count * 4, path, "pixel data")
    if len(data) != _TILE_HEADER.size + count * 4:
        raise RasterFormatError(f"{path}: trailing bytes after pixel data")
    values = np.frombuffer(raw, dtype="<f4").reshape(bands, height, width)
    try:
        return MultiSpectralTile(
            tile_id=tile_id if tile_id is not None else path.stem,
            bands=values,
            origin=origin,
            ground_resolution_m_per_px=ground_resolution_m_per_px,
        )
    except ValueError as exc:
        raise RasterFormatError(f"{path}: {exc}") from exc


def write_mask(mask: FireMask, path: str | Path) -> None:
    payload = _MASK_HEADER.pack(MASK_MAGIC, mask.width, mask.height)
    Path(path).write_bytes(payload + mask.values.tobytes())


def read_mask(path: str | Path) -> FireMask:
    path = Path(path)
    data = path.read_bytes()
    header = _read_exact(data, 0, _MASK_HEADER.size, path, "header")
    magic, width, height = _MASK_HEADER.unpack(header)
    if magic != MASK_MAGIC:
        raise RasterFormatError(f"{path}: bad magic {magic!r}, expected {MASK_MAGIC!r}")
    if width < 1 or height < 1:
        raise RasterFormatError(f"{path}: degenerate dimensions {width}x{height}")
    raw = _read_exact(data, _MASK_HEADER.size, width * height, path, "mask data")
    if len(data) != _MASK_HEADER.size + width * height:
        raise RasterFormatError(f"{path}: trailing bytes after mask data")
    values = np.frombuffer(raw, dtype=np.uint8).reshape(height, width)
    if (values > 1).any():
        offender = int(values[values > 1][0])
        raise RasterFormatError(f"{path}: mask byte {offender} is not 0 or 1")
    return FireMask(values)


class Split(Enum):
    DEVELOPMENT = "Development"
    INTERNAL_TEST_1 = "InternalTest1"
    INTERNAL_TEST_2 = "InternalTest2"
    VERIFICATION = "Verification"


class FireSizeBucket(Enum):
    """Verification fire-size category (coarser than the robustness classes)."""

    NONE = "None"
    SMALL_LT30M = "Small_lt30m"
    LARGE_GT100M = "Large_gt100m"


class CloudBucket(Enum):
    """Verification cloud-cover category."""

    NONE = "None"
    LOW_LT10PCT = "Low_lt10pct"
    HIGH_GT50PCT = "High_gt50pct"


@dataclass(frozen=True, slots=True)
class Provenance:
    source: str | None = None
    labeler_team: str | None = None
    collected_by_dev_team: bool | None = None


@dataclass(frozen=True)
class TileMetadata:
    """Catalog record for one tile; class labels follow the taxonomy."""

    tile_id: str
    class_labels: Mapping[str, str]
    has_fire: bool
    split: Split
    provenance: Provenance = Provenance()
    nadir_representative: bool = True
    fire_size_bucket: FireSizeBucket | None = None
    cloud_bucket: CloudBucket | None = None
    ground_resolution_m_per_px: float = DEFAULT_GROUND_RESOLUTION_M

    def __post_init__(self) -> None:
        object.__setattr__(self, "class_labels", dict(self.class_labels))


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    meta: TileMetadata
    tile_path: Path
    mask_path: Path | None
    width: int
    height: int
    bands: int

    @property
    def is_canonical(self) -> bool:
        return (
            self.width == CANONICAL_TILE_SIZE
            and self.height == CANONICAL_TILE_SIZE
            and self.bands == len(BAND_ORDER)
        )

    def load_tile(self) -> MultiSpectralTile:
        return read_tile(
            self.tile_path,
            tile_id=self.meta.tile_id,
            ground_resolution_m_per_px=self.meta.ground_resolution_m_per_px,
        )

    def load_truth(self) -> FireMask:
        if self.mask_path is None:
            raise CatalogError(f"tile {self.meta.tile_id!r} has no truth mask")
        return read_mask(self.mask_path)


@dataclass(frozen=True)
class DatasetCatalog:
    root: Path
    entries: Mapping[str, CatalogEntry]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", dict(self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries.values())

    def entry(self, tile_id: str) -> CatalogEntry:
        try:
            return self.entries[tile_id]
        except KeyError:
            raise CatalogError(f"no tile {tile_id!r} in catalog {self.root}") from None

    def split_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for entry in self.entries.values():
            counts[entry.meta.split.value] = counts.get(entry.meta.split.value, 0) + 1
        return counts

    def in_split(self, split: Split) -> list[CatalogEntry]:
        return [e for e in self.entries.values() if e.meta.split is split]


def _parse_metadata_record(raw: Any, taxonomy_labels: Mapping[str, set[str]]) -> TileMetadata:
    if not isinstance(raw, dict):
        raise CatalogError(f"metadata record must be an object, got {type(raw).__name__}")
    for required in ("tile_id", "class_labels", "has_fire", "split"):
        if required not in raw:
            raise CatalogError(f"metadata record missing field {required!r}")
    tile_id = raw["tile_id"]
    labels = raw["class_labels"]
    if not isinstance(labels, dict):
        raise CatalogError(f"tile {tile_id!r}: class_labels must be an object")
    for dim_name, known in taxonomy_labels.items():
        if dim_name not in labels:
            raise CatalogError(f"tile {tile_id!r}: no class label for dimension {dim_name!r}")
        if labels[dim_name] not in known:
            raise CatalogError(
                f"tile {tile_id!r}: unknown class {labels[dim_name]!r} for dimension {dim_name!r}"
            )
    unknown_dims = set(labels) - set(taxonomy_labels)
    if unknown_dims:
        raise CatalogError(f"tile {tile_id!r}: unknown dimension {sorted(unknown_dims)[0]!r}")
    try:
        split = Split(raw["split"])
    except ValueError:
        raise CatalogError(f"tile {tile_id!r}: unknown split {raw['split']!r}") from None
    prov_raw = raw.get("provenance", {})
    if not isinstance(prov_raw, dict):
        raise CatalogError(f"tile {tile_id!r}: provenance must be an object")
    provenance = Provenance(
        source=prov_raw.get("source"),
        labeler_team=prov_raw.get("labeler_team"),
        collected_by_dev_team=prov_raw.get("collected_by_dev_team"),
    )

    def bucket(field_name: str, enum_cls):
        value = raw.get(field_name)
        if value is None:
            return None
        try:
            return enum_cls(value)
        except ValueError:
            raise CatalogError(f"tile {tile_id!r}: unknown {field_name} {value!r}") from None

    return TileMetadata(
        tile_id=tile_id,
        class_labels=labels,
        has_fire=bool(raw["has_fire"]),
        split=split,
        provenance=provenance,
        nadir_representative=bool(raw.get("nadir_representative", True)),
        fire_size_bucket=bucket("fire_size_bucket", FireSizeBucket),
        cloud_bucket=bucket("cloud_bucket", CloudBucket),
        ground_resolution_m_per_px=float(
            raw.get("ground_resolution_m_per_px", DEFAULT_GROUND_RESOLUTION_M)
        ),
    )


def metadata_to_record(meta: TileMetadata) -> dict[str, Any]:
    """Inverse of the metadata parser, for writing catalogs."""
    record: dict[str, Any] = {
        "tile_id": meta.tile_id,
        "class_labels": dict(meta.class_labels),
        "has_fire": meta.has_fire,
        "split": meta.split.value,
        "provenance": {
            "source": meta.provenance.source,
            "labeler_team": meta.provenance.labeler_team,
            "collected_by_dev_team": meta.provenance.collected_by_dev_team,
        },
        "nadir_representative": meta.nadir_representative,
        "ground_resolution_m_per_px": meta.ground_resolution_m_per_px,
    }
    if meta.fire_size_bucket is not None:
        record["fire_size_bucket"] = meta.fire_size_bucket.value
    if meta.cloud_bucket is not None:
        record["cloud_bucket"] = meta.cloud_bucket.value
    return record


def catalog_dataset(root: str | Path, taxonomy=None) -> DatasetCatalog:
    """Catalog a dataset directory.

    Layout: ``<root>/metadata.json`` (array of records), tiles under
    ``<root>/tiles/<tile_id>.ftl``, optional truth masks under
    ``<root>/masks/<tile_id>.fmk``. Every tile file must have a metadata
    record and vice versa; class labels must name classes in the taxonomy
    (default: the canonical requirement set's dimensions).
    """
    from firecase.requirements import RequirementSet, load_canonical_requirements

    root = Path(root)
    if taxonomy is None:
        taxonomy = load_canonical_requirements()
    if isinstance(taxonomy, RequirementSet):
        taxonomy_labels = {d.name.value: set(d.labels()) for d in taxonomy.dimensions}
    else:
        taxonomy_labels = {name: set(labels) for name, labels in dict(taxonomy).items()}

    meta_path = root / "metadata.json"
    tiles_dir = root / "tiles"
    masks_dir = root / "masks"
    records: list[TileMetadata] = []
    if meta_path.exists():
        try:
            payload = json.loads(meta_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CatalogError(f"{meta_path}: not valid JSON: {exc}") from exc
        if not isinstance(payload, list):
            raise CatalogError(f"{meta_path}: expected a JSON array of records")
        for raw in payload:
            records.append(_parse_metadata_record(raw, taxonomy_labels))

    by_id: dict[str, TileMetadata] = {}
    for meta in records:
        if meta.tile_id in by_id:
            raise CatalogError(f"duplicate metadata for tile {meta.tile_id!r}")
        by_id[meta.tile_id] = meta

    on_disk = sorted(tiles_dir.glob("*.ftl")) if tiles_dir.is_dir() else []
    disk_ids = {p.stem for p in on_disk}
    for path in on_disk:
        if path.stem not in by_id:
            raise CatalogError(f"tile file {path.name} has no metadata record")
    for tile_id in by_id:
        if tile_id not in disk_ids:
            raise CatalogError(f"metadata names tile {tile_id!r} but tiles/{tile_id}.ftl is missing")

    entries: dict[str, CatalogEntry] = {}
    for tile_id, meta in by_id.items():
        tile_path = tiles_dir / f"{tile_id}.ftl"
        width, height, bands = read_tile_header(tile_path)
        mask_path = masks_dir / f"{tile_id}.fmk"
        entries[tile_id] = CatalogEntry(
            meta=meta,
            tile_path=tile_path,
            mask_path=mask_path if mask_path.exists() else None,
            width=width,
            height=height,
            bands=bands,
        )
    return DatasetCatalog(root=root, entries=entries)


def write_catalog_metadata(records: Iterable[TileMetadata], root: str | Path) -> Path:
    """Write ``metadata.json`` for a dataset directory being constructed."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    path = root / "metadata.json"
    payload = [metadata_to_record(m) for m in records]
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
