"""Grid data model and bit-exact I/O.

Holds the height map, transmitter/receiver configuration, and radio fields,
plus the RGF1 binary grid format shared by every tool in the package.

Conventions:
  - pixel (i, j) means row i, column j; its center sits at
    ((j + 0.5) * resolution, (i + 0.5) * resolution) in meters
  - pathloss is stored as signed dB (negative values)
  - NaN anywhere is a validation error, never silently propagated

RGF1 format (little-endian):
  magic 'R''G''F''1' | u8 unit tag (0=meters, 1=dB, 2=normalized01) |
  u32 width | u32 height | u32 depth | f32 resolution |
  width*height*depth float32, row-major within a slice, slices outermost.
The 21-byte header is followed by 4 bytes per value.  Values are float32 on
disk; grids built from float32 data round-trip bit-exactly.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

MAGIC = b"RGF1"
UNIT_METERS = "meters"
UNIT_DB = "dB"
UNIT_NORM01 = "normalized01"

_UNIT_TAGS = {UNIT_METERS: 0, UNIT_DB: 1, UNIT_NORM01: 2}
_TAG_UNITS = {v: k for k, v in _UNIT_TAGS.items()}

NORM_LO_DB = -47.0
NORM_HI_DB = -169.0


class GridFormatError(ValueError):
    """Malformed RGF1 payload: bad magic, bad tag, or truncated data."""


class ValidationError(ValueError):
    """A grid or configuration violates its invariants."""


def _check_finite(values: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(values)):
        raise ValidationError(f"{what} contains NaN or infinite values")


@dataclass(frozen=True)
class HeightMap:
    """2D grid of building heights in meters; the source of all blockage."""

    values: np.ndarray  # (height_px, width_px), meters
    resolution: float  # meters per pixel

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValidationError("height map must be 2D")
        _check_finite(values, "height map")
        if np.any(values < 0):
            raise ValidationError("building heights must be >= 0")
        if not self.resolution > 0:
            raise ValidationError("resolution must be positive")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def height_px(self) -> int:
        return self.values.shape[0]

    @property
    def width_px(self) -> int:
        return self.values.shape[1]

    @property
    def extent(self) -> tuple[float, float]:
        """(x_max, y_max) in meters."""
        return self.width_px * self.resolution, self.height_px * self.resolution


@dataclass(frozen=True)
class TxConfig:
    """Transmitter position and link-budget parameters."""

    x: float  # meters
    y: float  # meters
    z: float  # meters above ground
    f: float  # carrier frequency, Hz
    p_tx: float = 23.0  # transmit power, dBm
    w: float = 10e6  # bandwidth, Hz
    nf: float = 5.0  # noise figure, dB
    d0: float = 1.0  # near-field reference distance, meters

    def __post_init__(self):
        if not self.f > 0:
            raise ValidationError("carrier frequency must be positive")
        if not self.w > 0:
            raise ValidationError("bandwidth must be positive")
        if not self.d0 > 0:
            raise ValidationError("reference distance d0 must be positive")
        if self.z < 0:
            raise ValidationError("transmitter height must be >= 0")
        for name in ("x", "y", "z", "f", "p_tx", "w", "nf", "d0"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValidationError(f"tx parameter {name} must be finite")

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)


@dataclass(frozen=True)
class RxConfig:
    """Receiver-height slicing: z_rx is the center of the height range."""

    z_rx: float = 1.5  # meters
    n_z: int = 1
    dz: float = 1.0  # slice spacing, meters

    def __post_init__(self):
        if self.n_z < 1:
            raise ValidationError("n_z must be >= 1")
        if self.n_z > 1 and not self.dz > 0:
            raise ValidationError("dz must be positive when n_z > 1")

    def slice_heights(self) -> np.ndarray:
        """z of each slice, centered on z_rx."""
        offsets = np.arange(self.n_z, dtype=np.float64) - (self.n_z - 1) / 2.0
        return self.z_rx + offsets * self.dz


@dataclass(frozen=True)
class RadioField:
    """Pathloss values over (n_z, height_px, width_px), dB or normalized."""

    values: np.ndarray
    unit: str
    resolution: float = 1.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 2:
            values = values[np.newaxis, :, :]
        if values.ndim != 3:
            raise ValidationError("radio field must be 2D or 3D")
        _check_finite(values, "radio field")
        if self.unit not in (UNIT_DB, UNIT_NORM01):
            raise ValidationError(f"unknown field unit {self.unit!r}")
        if self.unit == UNIT_NORM01 and (np.any(values < 0) or np.any(values > 1)):
            raise ValidationError("normalized field has values outside [0, 1]")
        if not self.resolution > 0:
            raise ValidationError("resolution must be positive")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_z(self) -> int:
        return self.values.shape[0]

    @property
    def height_px(self) -> int:
        return self.values.shape[1]

    @property
    def width_px(self) -> int:
        return self.values.shape[2]

    def slice(self, k: int = 0) -> np.ndarray:
        return self.values[k]


@dataclass(frozen=True)
class Scene:
    """Environment input: height map + transmitter + receiver configuration."""

    heightmap: HeightMap
    tx: TxConfig
    rx: RxConfig = field(default_factory=RxConfig)

    def __post_init__(self):
        x_max, y_max = self.heightmap.extent
        if not (0 <= self.tx.x < x_max and 0 <= self.tx.y < y_max):
            raise ValidationError(
                f"transmitter ({self.tx.x}, {self.tx.y}) outside map extent "
                f"[0, {x_max}) x [0, {y_max})"
            )

    def with_tx(self, **kwargs) -> "Scene":
        return Scene(self.heightmap, replace(self.tx, **kwargs), self.rx)


def rasterize_tx(scene: Scene) -> RadioField:
    """Single-channel mask: 1 at the pixel containing the transmitter."""
    h = scene.heightmap
    j = int(scene.tx.x / h.resolution)
    i = int(scene.tx.y / h.resolution)
    mask = np.zeros((1, h.height_px, h.width_px), dtype=np.float64)
    mask[0, i, j] = 1.0
    return RadioField(mask, UNIT_NORM01, h.resolution)


def normalize_db(
    fld: RadioField, lo: float = NORM_LO_DB, hi: float = NORM_HI_DB
) -> RadioField:
    """Min-max map from dB to [0, 1]: lo -> 1, hi -> 0, clamped outside."""
    if lo == hi:
        raise ValidationError("degenerate normalization range: lo == hi")
    if fld.unit != UNIT_DB:
        raise ValidationError("normalize_db expects a dB field")
    v = np.clip((fld.values - hi) / (lo - hi), 0.0, 1.0)
    return RadioField(v, UNIT_NORM01, fld.resolution)


def denormalize_db(
    fld: RadioField, lo: float = NORM_LO_DB, hi: float = NORM_HI_DB
) -> RadioField:
    """Inverse of normalize_db within the clamp range."""
    if lo == hi:
        raise ValidationError("degenerate normalization range: lo == hi")
    if fld.unit != UNIT_NORM01:
        raise ValidationError("denormalize_db expects a normalized field")
    v = hi + fld.values * (lo - hi)
    return RadioField(v, UNIT_DB, fld.resolution)


def save_grid(grid: HeightMap | RadioField, path: str | Path) -> None:
    """Write a grid in RGF1 format; load_grid inverts it bit-exactly."""
    if isinstance(grid, HeightMap):
        tag = _UNIT_TAGS[UNIT_METERS]
        values = grid.values[np.newaxis, :, :]
    elif isinstance(grid, RadioField):
        tag = _UNIT_TAGS[grid.unit]
        values = grid.values
    else:
        raise TypeError(f"cannot save {type(grid).__name__} as a grid")
    depth, height, width = values.shape
    header = MAGIC + struct.pack(
        "<BIIIf", tag, width, height, depth, float(grid.resolution)
    )
    payload = values.astype("<f4").tobytes()
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(header + payload)
    tmp.replace(path)


def load_grid(path: str | Path) -> HeightMap | RadioField:
    """Read an RGF1 grid; the unit tag decides HeightMap vs RadioField."""
    raw = Path(path).read_bytes()
    if len(raw) < 21:
        raise GridFormatError(f"{path}: file shorter than the 21-byte header")
    if raw[:4] != MAGIC:
        raise GridFormatError(f"{path}: bad magic {raw[:4]!r}, expected {MAGIC!r}")
    tag, width, height, depth, resolution = struct.unpack("<BIIIf", raw[4:21])
    if tag not in _TAG_UNITS:
        raise GridFormatError(f"{path}: unknown unit tag {tag}")
    n = width * height * depth
    expected = 21 + 4 * n
    if len(raw) != expected:
        raise GridFormatError(
            f"{path}: payload length {len(raw) - 21} bytes, expected {4 * n}"
        )
    values = np.frombuffer(raw, dtype="<f4", offset=21).astype(np.float64)
    values = values.reshape(depth, height, width)
    unit = _TAG_UNITS[tag]
    if unit == UNIT_METERS:
        if depth != 1:
            raise GridFormatError(f"{path}: height map must have depth 1, got {depth}")
        return HeightMap(values[0], float(resolution))
    return RadioField(values, unit, float(resolution))


def grid_from_csv(
    path: str | Path, unit: str = UNIT_DB, resolution: float = 1.0
) -> HeightMap | RadioField:
    """Import a dense grid from CSV with header ``x,y,z,value``.

    x is the column index, y the row index, z the slice index.  Every cell
    of the implied (z, y, x) box must be present exactly once.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header] != ["x", "y", "z", "value"]:
            raise GridFormatError(f"{path}: expected CSV header 'x,y,z,value'")
        rows = [(int(r[0]), int(r[1]), int(r[2]), float(r[3])) for r in reader]
    if not rows:
        raise GridFormatError(f"{path}: no data rows")
    xs, ys, zs, vals = zip(*rows)
    width, height, depth = max(xs) + 1, max(ys) + 1, max(zs) + 1
    if len(rows) != width * height * depth:
        raise GridFormatError(
            f"{path}: {len(rows)} rows do not fill a {width}x{height}x{depth} grid"
        )
    values = np.full((depth, height, width), np.nan)
    values[np.array(zs), np.array(ys), np.array(xs)] = vals
    if np.any(np.isnan(values)):
        raise GridFormatError(f"{path}: duplicate or missing cells")
    if unit == UNIT_METERS:
        if depth != 1:
            raise GridFormatError(f"{path}: height map must have depth 1")
        return HeightMap(values[0], resolution)
    return RadioField(values, unit, resolution)


def grid_to_csv(grid: HeightMap | RadioField, path: str | Path) -> None:
    """Export a grid as ``x,y,z,value`` CSV ('.' decimal, locale-free)."""
    values = grid.values[np.newaxis] if isinstance(grid, HeightMap) else grid.values
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "z", "value"])
        for z in range(values.shape[0]):
            for y in range(values.shape[1]):
                for x in range(values.shape[2]):
                    writer.writerow([x, y, z, repr(float(values[z, y, x]))])
