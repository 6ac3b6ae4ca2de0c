"""Procedural scenes and pseudo ground-truth fields for desk-scale runs.

Cities are axis-aligned rectangular buildings placed without overlap, fully
deterministic from the seed.  Pseudo ground truth is the anchor map plus
optional gaussian smoothing and log-normal (dB-domain) noise, clamped to a
dataset pathloss range when asked.  Three preset layouts reproduce the
qualitative propagation regimes used in the entropy-map analysis: an edge
transmitter behind obstacle rows, an urban canyon, and sparse obstacles.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.ndimage import gaussian_filter

from .grids import HeightMap, RadioField, RxConfig, Scene, TxConfig, UNIT_DB
from .propagation import anchor_map

# pathloss range (top, bottom) and building height envelopes per dataset
PATHLOSS_RANGES = {
    "radiomapseer": (-47.0, -147.0),
    "radiomap3dseer": (-75.0, -111.0),
    "urbanradio3d": (-92.0, -169.0),
}
HEIGHT_RANGES = {
    "radiomapseer": (25.0, 25.0),
    "radiomap3dseer": (6.6, 19.8),
    "urbanradio3d": (6.6, 19.8),
}


class GenerationError(RuntimeError):
    """Placement could not satisfy the constraints within bounded retries."""


@dataclass(frozen=True)
class CityParams:
    side_px: int = 256
    resolution: float = 1.0
    n_buildings: int = 12
    height_range: tuple[float, float] = (6.6, 19.8)
    footprint_range: tuple[int, int] = (16, 48)  # pixels per building side
    seed: int = 0

    def __post_init__(self):
        if self.side_px < 1 or self.resolution <= 0:
            raise ValueError("side_px must be >= 1 and resolution positive")
        lo, hi = self.height_range
        if lo < 0 or hi < lo:
            raise ValueError(f"bad height range {self.height_range}")
        flo, fhi = self.footprint_range
        if flo < 1 or fhi < flo or fhi > self.side_px:
            raise ValueError(f"bad footprint range {self.footprint_range}")
        if self.n_buildings < 0:
            raise ValueError("n_buildings must be >= 0")


def dataset_profile(name: str, **overrides) -> CityParams:
    """CityParams emulating a published dataset's height envelope."""
    key = name.lower()
    if key not in HEIGHT_RANGES:
        raise ValueError(f"unknown dataset profile {name!r}")
    return replace(CityParams(height_range=HEIGHT_RANGES[key]), **overrides)


def gen_city(params: CityParams, max_tries: int = 200) -> HeightMap:
    """Non-overlapping rectangular buildings, deterministic from the seed."""
    rng = np.random.default_rng(params.seed)
    heights = np.zeros((params.side_px, params.side_px), dtype=np.float64)
    occupied = np.zeros_like(heights, dtype=bool)
    flo, fhi = params.footprint_range
    hlo, hhi = params.height_range
    for b in range(params.n_buildings):
        for _ in range(max_tries):
            w = int(rng.integers(flo, fhi + 1))
            h = int(rng.integers(flo, fhi + 1))
            r = int(rng.integers(0, params.side_px - h + 1))
            c = int(rng.integers(0, params.side_px - w + 1))
            if not occupied[r: r + h, c: c + w].any():
                heights[r: r + h, c: c + w] = rng.uniform(hlo, hhi)
                occupied[r: r + h, c: c + w] = True
                break
        else:
            raise GenerationError(
                f"could not place building {b + 1}/{params.n_buildings} "
                f"after {max_tries} tries (seed {params.seed})"
            )
    return HeightMap(heights, params.resolution)


def _open_pixel(rng: np.random.Generator, heights: np.ndarray) -> tuple[int, int]:
    free = np.flatnonzero(heights.ravel() == 0)
    if free.size == 0:
        raise GenerationError("no building-free pixel available for the transmitter")
    flat = int(free[rng.integers(free.size)])
    return flat // heights.shape[1], flat % heights.shape[1]


def gen_scene(
    params: CityParams,
    tx: TxConfig | None = None,
    rx: RxConfig | None = None,
    f: float = 5.9e9,
    z_tx: float = 1.5,
) -> Scene:
    """City plus transmitter; the tx pixel is never covered by a building."""
    heightmap = gen_city(params)
    if tx is None:
        rng = np.random.default_rng(params.seed + 1)
        i, j = _open_pixel(rng, heightmap.values)
        res = params.resolution
        tx = TxConfig(x=(j + 0.5) * res, y=(i + 0.5) * res, z=z_tx, f=f)
    return Scene(heightmap, tx, rx or RxConfig())


def gen_field(
    scene: Scene,
    noise_sigma: float = 0.0,
    seed: int = 0,
    smooth_sigma: float = 0.0,
    clamp: tuple[float, float] | None = None,
) -> RadioField:
    """Pseudo ground truth: anchor map + smoothing + seeded dB noise.

    With noise_sigma=0 and smooth_sigma=0 the result is exactly the anchor
    map at every receiver slice.  clamp=(top, bottom) clips to a dataset's
    pathloss range.
    """
    rng = np.random.default_rng(seed)
    slices = []
    for z in scene.rx.slice_heights():
        v = anchor_map(scene, z=z).slice(0)
        if smooth_sigma > 0:
            v = gaussian_filter(v, sigma=smooth_sigma, mode="nearest")
        if noise_sigma > 0:
            v = v + rng.normal(0.0, noise_sigma, size=v.shape)
        slices.append(v)
    values = np.stack(slices)
    if clamp is not None:
        top, bottom = max(clamp), min(clamp)
        values = np.clip(values, bottom, top)
    return RadioField(values, UNIT_DB, scene.heightmap.resolution)


# ---------------------------------------------------------------------------
# propagation-regime presets


def _paint(heights: np.ndarray, r0: int, r1: int, c0: int, c1: int, h: float) -> None:
    heights[r0:r1, c0:c1] = h


def preset_edge_tx(seed: int = 0, side_px: int = 256, resolution: float = 1.0) -> Scene:
    """Transmitter at the map edge behind staggered obstacle rows."""
    rng = np.random.default_rng(seed)
    heights = np.zeros((side_px, side_px))
    for k in range(3):
        c0 = side_px // 4 + k * side_px // 5
        for r0 in range(side_px // 8 + (k % 2) * side_px // 6, side_px - side_px // 8, side_px // 4):
            _paint(heights, r0, r0 + side_px // 8, c0, c0 + side_px // 10, rng.uniform(10, 20))
    tx = TxConfig(
        x=resolution * side_px * 0.03,
        y=resolution * side_px * (0.3 + 0.4 * rng.random()),
        z=1.5,
        f=5.9e9,
    )
    return Scene(HeightMap(heights, resolution), tx)


def preset_urban_canyon(seed: int = 0, side_px: int = 256, resolution: float = 1.0) -> Scene:
    """Parallel slabs forming street canyons with crossing corridors."""
    rng = np.random.default_rng(seed)
    heights = np.zeros((side_px, side_px))
    slab = side_px // 10
    street = side_px // 16
    cross = side_px // 2 + int(rng.integers(-side_px // 8, side_px // 8))
    for c0 in range(street, side_px - slab, slab + street):
        _paint(heights, side_px // 16, side_px - side_px // 16, c0, c0 + slab, rng.uniform(12, 20))
        heights[cross: cross + street, c0: c0 + slab] = 0.0
    tx = TxConfig(
        x=resolution * street * 0.5,
        y=resolution * side_px * 0.5,
        z=1.5,
        f=5.9e9,
    )
    return Scene(HeightMap(heights, resolution), tx)


def preset_sparse(seed: int = 0, side_px: int = 256, resolution: float = 1.0) -> Scene:
    """A handful of small isolated obstacles."""
    params = CityParams(
        side_px=side_px,
        resolution=resolution,
        n_buildings=4,
        height_range=(8.0, 15.0),
        footprint_range=(max(2, side_px // 16), max(3, side_px // 10)),
        seed=seed,
    )
    return gen_scene(params)


def _dihedral(heights: np.ndarray, tx_x: float, tx_y: float, side: float, k: int):
    if k & 1:
        heights = heights[:, ::-1]
        tx_x = side - tx_x
    if k & 2:
        heights = heights[::-1, :]
        tx_y = side - tx_y
    if k & 4:
        heights = heights.T
        tx_x, tx_y = tx_y, tx_x
    return heights.copy(), tx_x, tx_y


def preset_serpentine(seed: int = 0, side_px: int = 48, resolution: float = 1.0) -> Scene:
    """Maximal-detour regime: one serpentine street carved through a solid block.

    The map is a 3x3 patch layout (use patch_px = side_px // 3) filled with
    tall buildings except for a two-pixel corridor snaking through every
    patch center, so propagation from the corner transmitter has to follow
    the single street.  The corridor straddles each patch-center line, which
    keeps the center-to-center rays clear under all eight map orientations;
    the seed picks the orientation and the rooftop texture.
    """
    if side_px % 6:
        raise ValueError(f"serpentine preset needs side_px divisible by 6, got {side_px}")
    rng = np.random.default_rng(seed)
    pp = side_px // 3
    half = pp // 2
    heights = rng.uniform(30.0, 80.0, (side_px, side_px))

    def carve_h(prow):
        y = prow * pp + half
        heights[y - 1: y + 1, :] = 0.0

    def carve_v(pcol, prow0, prow1):
        x = pcol * pp + half
        heights[prow0 * pp + half - 1: prow1 * pp + half + 1, x - 1: x + 1] = 0.0

    carve_h(0)
    carve_h(1)
    carve_h(2)
    carve_v(2, 0, 1)
    carve_v(0, 1, 2)
    hm, tx_x, tx_y = _dihedral(
        heights, half * resolution, half * resolution, side_px * resolution, seed % 8
    )
    tx = TxConfig(tx_x, tx_y, 1.5, 5.9e9)
    return Scene(HeightMap(hm * 1.0, resolution), tx)


PRESETS = {
    "edge": preset_edge_tx,
    "canyon": preset_urban_canyon,
    "sparse": preset_sparse,
    "serpentine": preset_serpentine,
}
