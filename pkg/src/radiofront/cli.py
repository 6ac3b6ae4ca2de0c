"""Command-line front end.

Subcommands: anchor, order, entropy, metrics, synth, selftest.  Every run is
deterministic given identical inputs and --seed; grid/order/trace writers
replace files atomically.  Option precedence is CLI flag > config file >
built-in default, where the config file is flat ``key=value`` text given by
--config or the RADIOFRONT_CONFIG environment variable.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .grids import (
    HeightMap,
    RadioField,
    RxConfig,
    Scene,
    TxConfig,
    UNIT_DB,
    denormalize_db,
    grid_from_csv,
    grid_to_csv,
    load_grid,
    normalize_db,
    save_grid,
)
from .propagation import anchor_map, anchor_volume
from .ordering import (
    OrderParams,
    PatchGrid,
    alternative_order,
    bruteforce_costs,
    hilbert_order,
    load_order,
    prior_pl_order,
    raster_order,
    save_costs_csv,
    save_order,
    subsample_order,
    true_pl_order,
    verify_predecessor_containment,
    wavefront_order,
    zcurve_order,
)
from .entropy import delta_h_map, entropy_profile, load_trace
from .metrics import GradLossConfig, grad3d_loss, nmse, psnr, rmse_db, ssim
from .synth import CityParams, PATHLOSS_RANGES, PRESETS, gen_field, gen_scene

CONFIG_ENV = "RADIOFRONT_CONFIG"

GEOMETRIC_ORDERS = {
    "raster": raster_order,
    "hilbert": hilbert_order,
    "zcurve": zcurve_order,
    "subsample": subsample_order,
    "alternative": alternative_order,
}


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    tmp.replace(path)


def _load_config(path: str | None) -> dict:
    config_path = path or os.environ.get(CONFIG_ENV)
    if not config_path:
        return {}
    out = {}
    for line in Path(config_path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"config line without '=': {line!r}")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _load_any_grid(path: str, csv_unit: str = UNIT_DB):
    if path.endswith(".csv"):
        return grid_from_csv(path, unit=csv_unit)
    return load_grid(path)


def _read_manifest(path: str) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def _scene_from_args(args) -> Scene:
    manifest = _read_manifest(args.manifest) if getattr(args, "manifest", None) else {}

    def pick(flag_value, key, default, cast=float):
        if flag_value is not None:
            return flag_value
        if key in manifest:
            return cast(manifest[key])
        return default

    hm_path = args.heightmap or manifest.get("heightmap")
    if hm_path is None:
        raise ValueError("a height map is required (--heightmap or a manifest)")
    if getattr(args, "manifest", None) and not os.path.isabs(hm_path) and args.heightmap is None:
        hm_path = str(Path(args.manifest).parent / hm_path)
    grid = _load_any_grid(hm_path, csv_unit="meters")
    if not isinstance(grid, HeightMap):
        raise ValueError(f"{hm_path} does not contain a height map")
    tx_x = pick(args.tx_x, "tx_x", None)
    tx_y = pick(args.tx_y, "tx_y", None)
    if tx_x is None or tx_y is None:
        raise ValueError("transmitter position required (--tx-x/--tx-y or a manifest)")
    tx = TxConfig(
        x=tx_x,
        y=tx_y,
        z=pick(args.tx_z, "tx_z", 1.5),
        f=pick(args.freq, "freq", 5.9e9),
        p_tx=pick(args.power, "power", 23.0),
        w=pick(args.bandwidth, "bandwidth", 10e6),
        nf=pick(args.noise_figure, "noise_figure", 5.0),
        d0=pick(args.d0, "d0", 1.0),
    )
    rx = RxConfig(
        z_rx=pick(args.z_rx, "z_rx", 1.5),
        n_z=int(pick(args.n_z, "n_z", 1, int)),
        dz=pick(args.dz, "dz", 1.0),
    )
    return Scene(grid, tx, rx)


def _add_scene_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--manifest", help="scene manifest (key=value) from `synth`")
    p.add_argument("--heightmap", help="RGF1 or CSV building height map")
    p.add_argument("--tx-x", type=float, help="transmitter x, meters")
    p.add_argument("--tx-y", type=float, help="transmitter y, meters")
    p.add_argument("--tx-z", type=float, help="transmitter height, meters")
    p.add_argument("--freq", type=float, help="carrier frequency, Hz")
    p.add_argument("--power", type=float, help="transmit power, dBm")
    p.add_argument("--bandwidth", type=float, help="bandwidth, Hz")
    p.add_argument("--noise-figure", type=float, help="noise figure, dB")
    p.add_argument("--d0", type=float, help="near-field reference distance, m")
    p.add_argument("--z-rx", type=float, help="receiver height center, m")
    p.add_argument("--n-z", type=int, help="number of receiver height slices")
    p.add_argument("--dz", type=float, help="height slice spacing, m")


def cmd_anchor(args) -> int:
    scene = _scene_from_args(args)
    anchor = anchor_volume(scene) if args.volume else anchor_map(scene)
    save_grid(anchor, args.out)
    if args.csv:
        grid_to_csv(anchor, args.csv)
    print(f"anchor: wrote {args.out} ({anchor.n_z}x{anchor.height_px}x{anchor.width_px} dB)")
    return 0


def cmd_order(args) -> int:
    scene = _scene_from_args(args)
    patches = PatchGrid.for_scene(scene, patch_px=args.patch_px)
    params = OrderParams(args.alpha_los, args.alpha_nlos, args.beta_clamp)
    kind = args.kind.lower()
    costs = None
    if kind == "wavefront":
        order, costs = wavefront_order(scene, patches, params)
    elif kind == "priorpl":
        order = prior_pl_order(anchor_map(scene), patches)
    elif kind == "truepl":
        if not args.field:
            raise ValueError("--field is required for the truePL order")
        fld = _load_any_grid(args.field)
        if not isinstance(fld, RadioField):
            raise ValueError(f"{args.field} does not contain a radio field")
        order = true_pl_order(fld, patches)
    elif kind in GEOMETRIC_ORDERS:
        order = GEOMETRIC_ORDERS[kind](patches.n_side)
    else:
        raise ValueError(f"unknown order kind {args.kind!r}")

    save_order(order, args.out)
    if args.cost_csv:
        if costs is None:
            _, costs = wavefront_order(scene, patches, params)
        save_costs_csv(costs, args.cost_csv)
    status = 0
    if args.verify:
        if costs is None:
            _, costs = wavefront_order(scene, patches, params)
        report = verify_predecessor_containment(order, costs)
        print(f"containment: holds={report.holds} violations={len(report.violations)}")
        if patches.n_patches <= 1024:
            bf = bruteforce_costs(scene, patches, params)
            gap = float(np.max(np.abs(bf.d - costs.d) / (1.0 + costs.d)))
            ok = gap <= 1e-12
            print(f"oracle: bellman-ford max relative gap {gap:.3e} ({'ok' if ok else 'FAIL'})")
            if not ok:
                status = 1
        if kind == "wavefront" and not report.holds:
            status = 1
    print(f"order: wrote {args.out} (kind={order.kind}, N={len(order)})")
    return status


def cmd_entropy(args) -> int:
    orders = [load_order(p) for p in args.order] if args.order else [None] * len(args.trace)
    if len(orders) not in (1, len(args.trace)):
        raise ValueError("give one --order per --trace, or a single shared one")
    if len(orders) == 1:
        orders = orders * len(args.trace)
    traces = [load_trace(t, o) for t, o in zip(args.trace, orders)]
    prof = entropy_profile(traces, base2=args.base2)
    unit = "bits" if args.base2 else "nats"
    if args.profile_csv:
        lines = ["step,mean,std"]
        for n, (m, s) in enumerate(zip(prof.mean, prof.std)):
            lines.append(f"{n},{float(m)!r},{float(s)!r}")
        _atomic_write_text(Path(args.profile_csv), "\n".join(lines) + "\n")
    print(f"entropy: H_bar = {prof.overall_mean:.4f} {unit} over {len(traces)} trace(s)")
    if args.trace_b:
        if not (args.order and args.order_b):
            raise ValueError("delta map needs --order and --order-b")
        trace_b = load_trace(args.trace_b, load_order(args.order_b))
        dh = delta_h_map(traces[0], trace_b, base2=args.base2)
        if args.delta_out:
            save_grid(RadioField(dh.grid[np.newaxis], UNIT_DB), args.delta_out)
        print(f"delta-H: mean={dh.mean:.4f} variance={dh.variance:.4f}")
    return 0


def cmd_metrics(args) -> int:
    pred = _load_any_grid(args.pred)
    gt = _load_any_grid(args.gt)
    if not isinstance(pred, RadioField) or not isinstance(gt, RadioField):
        raise ValueError("metrics needs two radio fields")
    lo, hi = args.norm_lo, args.norm_hi
    if pred.unit == UNIT_DB:
        pred_db, gt_db = pred, gt
        pred01, gt01 = normalize_db(pred, lo, hi), normalize_db(gt, lo, hi)
    else:
        pred01, gt01 = pred, gt
        pred_db, gt_db = denormalize_db(pred, lo, hi), denormalize_db(gt, lo, hi)
    cfg = GradLossConfig(
        scales=tuple(int(s) for s in args.scales.split(",")),
        lambda_z=args.lambda_z,
    )
    grad = grad3d_loss(pred01, gt01, cfg)
    values = {
        "nmse": nmse(pred01, gt01),
        "rmse_db": rmse_db(pred_db, gt_db),
        "ssim": ssim(pred01, gt01),
        "psnr": psnr(pred01, gt01),
        "grad_total": grad.total,
    }
    header = ",".join(values)
    row = ",".join("inf" if math.isinf(v) else repr(float(v)) for v in values.values())
    _atomic_write_text(Path(args.report), header + "\n" + row + "\n")
    if args.per_slice:
        lines = ["slice,nmse,rmse_db,psnr"]
        for k in range(pred01.n_z):
            p_k = RadioField(pred01.values[k][np.newaxis], pred01.unit)
            g_k = RadioField(gt01.values[k][np.newaxis], gt01.unit)
            pdb_k = RadioField(pred_db.values[k][np.newaxis], UNIT_DB)
            gdb_k = RadioField(gt_db.values[k][np.newaxis], UNIT_DB)
            k_psnr = psnr(p_k, g_k)
            lines.append(
                f"{k},{nmse(p_k, g_k)!r},{rmse_db(pdb_k, gdb_k)!r},"
                f"{'inf' if math.isinf(k_psnr) else repr(k_psnr)}"
            )
        _atomic_write_text(Path(args.per_slice), "\n".join(lines) + "\n")
    print("metrics: " + " ".join(f"{k}={v:.4g}" for k, v in values.items()))
    return 0


def _synth_one(args, seed: int, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    rx = RxConfig(z_rx=args.z_rx or 1.5, n_z=args.n_z or 1, dz=args.dz or 1.0)
    if args.preset:
        scene = PRESETS[args.preset](seed=seed, side_px=args.side_px, resolution=args.resolution)
        scene = Scene(scene.heightmap, scene.tx, rx)
    else:
        h_lo, h_hi = (float(v) for v in args.height_range.split(","))
        f_lo, f_hi = (int(v) for v in args.footprint_range.split(","))
        params = CityParams(
            side_px=args.side_px,
            resolution=args.resolution,
            n_buildings=args.n_buildings,
            height_range=(h_lo, h_hi),
            footprint_range=(f_lo, f_hi),
            seed=seed,
        )
        scene = gen_scene(params, rx=rx, f=args.freq or 5.9e9)
    clamp = PATHLOSS_RANGES[args.clamp_profile] if args.clamp_profile else None
    fld = gen_field(
        scene,
        noise_sigma=args.noise_sigma,
        seed=seed,
        smooth_sigma=args.smooth_sigma,
        clamp=clamp,
    )
    save_grid(scene.heightmap, out_dir / "heightmap.rgf")
    save_grid(fld, out_dir / "field.rgf")
    manifest = {
        "seed": seed,
        "heightmap": "heightmap.rgf",
        "field": "field.rgf",
        "tx_x": scene.tx.x,
        "tx_y": scene.tx.y,
        "tx_z": scene.tx.z,
        "freq": scene.tx.f,
        "power": scene.tx.p_tx,
        "bandwidth": scene.tx.w,
        "noise_figure": scene.tx.nf,
        "d0": scene.tx.d0,
        "z_rx": rx.z_rx,
        "n_z": rx.n_z,
        "dz": rx.dz,
    }
    text = "\n".join(
        f"{k}={float(v)!r}" if isinstance(v, float) else f"{k}={v}"
        for k, v in manifest.items()
    )
    _atomic_write_text(out_dir / "scene.txt", text + "\n")


def cmd_synth(args) -> int:
    base = Path(args.out_dir)
    jobs = []
    for k in range(args.count):
        seed = args.seed + k
        out_dir = base / f"scene_{k:03d}" if args.count > 1 else base
        jobs.append((seed, out_dir))
    if args.jobs > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            list(pool.map(lambda sj: _synth_one(args, *sj), jobs))
    else:
        for seed, out_dir in jobs:
            _synth_one(args, seed, out_dir)
    print(f"synth: wrote {len(jobs)} scene(s) under {base}")
    return 0


# ---------------------------------------------------------------------------
# selftest


def _suite_ordering(rng) -> None:
    from .grids import HeightMap

    for _ in range(5):
        heights = (rng.random((32, 32)) < 0.25) * rng.uniform(5, 30, (32, 32))
        scene = Scene(
            HeightMap(heights, 1.0),
            TxConfig(rng.uniform(0, 32), rng.uniform(0, 32), 1.5, 5.9e9),
        )
        patches = PatchGrid.for_scene(scene, patch_px=4)
        order, costs = wavefront_order(scene, patches)
        bf = bruteforce_costs(scene, patches)
        if np.max(np.abs(bf.d - costs.d) / (1.0 + costs.d)) > 1e-12:
            raise AssertionError("dijkstra and bellman-ford costs disagree")
        if not verify_predecessor_containment(order, costs).holds:
            raise AssertionError("wavefront order lost predecessor containment")


def _suite_entropy(rng) -> None:
    from .entropy import JointDist, exact_conditional_entropies

    p = rng.random((2, 2, 2, 2))
    joint = JointDist(p / p.sum())
    totals = [
        exact_conditional_entropies(joint, rng.permutation(4)).sum() for _ in range(10)
    ]
    if max(totals) - min(totals) > 1e-9:
        raise AssertionError("chain-rule invariance violated")


def _suite_rope(rng) -> None:
    from .rope import RopeConfig, rope_rotate_3d

    cfg = RopeConfig.from_head_dim(24)
    for _ in range(100):
        q = rng.normal(size=24)
        k = rng.normal(size=24)
        p1 = rng.integers(-32, 32, size=3)
        p2 = rng.integers(-32, 32, size=3)
        rq = rope_rotate_3d(q, *p1, cfg)
        if abs(np.linalg.norm(rq) - np.linalg.norm(q)) > 1e-12:
            raise AssertionError("rotation does not preserve norm")
        lhs = rq @ rope_rotate_3d(k, *p2, cfg)
        rhs = q @ rope_rotate_3d(k, *(p2 - p1), cfg)
        if abs(lhs - rhs) > 1e-9:
            raise AssertionError("relative-position identity violated")


def cmd_selftest(args) -> int:
    suites = {
        "ordering": _suite_ordering,
        "entropy": _suite_entropy,
        "rope": _suite_rope,
    }
    failed = []
    for name, suite in suites.items():
        rng = np.random.default_rng(args.seed)
        try:
            if args.inject_fault == name:
                raise AssertionError("injected fault")
            suite(rng)
        except AssertionError as exc:
            failed.append(name)
            print(f"FAIL {name}: {exc}")
        else:
            print(f"PASS {name}")
    if failed:
        print(f"selftest: FAILED suites: {', '.join(failed)}")
        return 1
    print("selftest: all suites passed")
    return 0


# ---------------------------------------------------------------------------
# parser

_SUBPARSERS: dict[str, argparse.ArgumentParser] = {}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radiofront",
        description="physics-guided radio-map toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help=f"key=value config file (or ${CONFIG_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("anchor", help="compute the pathloss anchor map")
    _add_scene_options(p)
    p.add_argument("--out", required=True, help="output RGF1 path")
    p.add_argument("--csv", help="also export x,y,z,value CSV")
    p.add_argument("--volume", action="store_true", help="evaluate every rx slice")
    p.set_defaults(func=cmd_anchor)

    p = sub.add_parser("order", help="construct a generation order")
    _add_scene_options(p)
    p.add_argument(
        "--kind",
        default="wavefront",
        help="wavefront|priorpl|truepl|raster|hilbert|zcurve|subsample|alternative",
    )
    p.add_argument("--patch-px", type=int, default=16, help="pixels per patch side")
    p.add_argument("--alpha-los", type=float, default=2.0)
    p.add_argument("--alpha-nlos", type=float, default=2.0)
    p.add_argument("--beta-clamp", type=float, default=1e-6)
    p.add_argument("--field", help="ground-truth RGF1 field (for --kind truepl)")
    p.add_argument("--out", required=True, help="output order file (JSON)")
    p.add_argument("--cost-csv", help="dump patch_index,D,pred CSV")
    p.add_argument("--verify", action="store_true", help="run containment + oracle checks")
    p.set_defaults(func=cmd_order)

    p = sub.add_parser("entropy", help="entropy profile and delta-H map from traces")
    p.add_argument("--trace", action="append", required=True, help="LTR1 trace (repeatable)")
    p.add_argument("--order", action="append", help="order file per trace")
    p.add_argument("--profile-csv", help="write step,mean,std CSV")
    p.add_argument("--trace-b", help="second trace for the delta-H map")
    p.add_argument("--order-b", help="order file for --trace-b")
    p.add_argument("--delta-out", help="write the per-patch delta grid as RGF1")
    p.add_argument("--base2", action="store_true", help="report bits instead of nats")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("metrics", help="compare predicted and ground-truth fields")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--report", required=True, help="one-line CSV report path")
    p.add_argument("--per-slice", help="per-slice breakdown CSV")
    p.add_argument("--norm-lo", type=float, default=-47.0, help="dB mapped to 1.0")
    p.add_argument("--norm-hi", type=float, default=-169.0, help="dB mapped to 0.0")
    p.add_argument("--scales", default="1,2,4", help="gradient-loss pooling factors")
    p.add_argument("--lambda-z", type=float, default=0.5)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("synth", help="generate synthetic scenes and fields")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--preset", choices=sorted(PRESETS), help="edge|canyon|sparse layout")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1, help="number of scenes")
    p.add_argument("--jobs", type=int, default=1, help="parallel scene workers")
    p.add_argument("--side-px", type=int, default=256)
    p.add_argument("--resolution", type=float, default=1.0)
    p.add_argument("--n-buildings", type=int, default=12)
    p.add_argument("--height-range", default="6.6,19.8")
    p.add_argument("--footprint-range", default="16,48")
    p.add_argument("--freq", type=float, default=5.9e9)
    p.add_argument("--z-rx", type=float, default=1.5)
    p.add_argument("--n-z", type=int, default=1)
    p.add_argument("--dz", type=float, default=1.0)
    p.add_argument("--noise-sigma", type=float, default=0.0, help="dB noise std")
    p.add_argument("--smooth-sigma", type=float, default=0.0, help="gaussian blur, px")
    p.add_argument("--clamp-profile", choices=sorted(PATHLOSS_RANGES), help="clip range")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("selftest", help="run the built-in oracle suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject-fault", help="test hook: force the named suite to fail")
    p.set_defaults(func=cmd_selftest)

    _SUBPARSERS.clear()
    _SUBPARSERS.update(sub.choices)
    return parser


def _apply_config(argv) -> None:
    """Config-file values become subcommand defaults; explicit flags win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    config = _load_config(known.config)
    if not config:
        return
    for sub_parser in _SUBPARSERS.values():
        defaults = {}
        for action in sub_parser._actions:
            if action.dest in config:
                value = config[action.dest]
                defaults[action.dest] = action.type(value) if action.type else value
        if defaults:
            sub_parser.set_defaults(**defaults)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config(argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
