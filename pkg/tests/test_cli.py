"""End-to-end runs of every subcommand through the console entry point."""

import numpy as np
import pytest

from radiofront import (
    HeightMap,
    LogitTrace,
    RadioField,
    UNIT_DB,
    load_grid,
    load_order,
    raster_order,
    save_grid,
    save_order,
    save_trace,
)
from radiofront.cli import main


@pytest.fixture
def city(tmp_path):
    rng = np.random.default_rng(1)
    heights = (rng.random((32, 32)) < 0.2) * rng.uniform(5, 25, (32, 32))
    path = tmp_path / "city.rgf"
    save_grid(HeightMap(heights, 1.0), path)
    return path


def tx_flags(city):
    return [
        "--heightmap", str(city),
        "--tx-x", "5.5", "--tx-y", "9.5",
        "--freq", "5.9e9",
    ]


class TestAnchorCommand:
    def test_writes_anchor(self, tmp_path, city, capsys):
        out = tmp_path / "anchor.rgf"
        csv_out = tmp_path / "anchor.csv"
        rc = main(["anchor", *tx_flags(city), "--out", str(out), "--csv", str(csv_out)])
        assert rc == 0
        anchor = load_grid(out)
        assert anchor.unit == UNIT_DB
        assert anchor.height_px == 32
        assert csv_out.read_text().startswith("x,y,z,value")

    def test_deterministic_bytes(self, tmp_path, city):
        a, b = tmp_path / "a.rgf", tmp_path / "b.rgf"
        assert main(["anchor", *tx_flags(city), "--out", str(a)]) == 0
        assert main(["anchor", *tx_flags(city), "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_missing_tx_fails(self, tmp_path, city, capsys):
        rc = main(["anchor", "--heightmap", str(city), "--out", str(tmp_path / "x.rgf")])
        assert rc == 1
        assert "transmitter" in capsys.readouterr().err

    def test_volume_has_slices(self, tmp_path, city):
        out = tmp_path / "vol.rgf"
        rc = main(["anchor", *tx_flags(city), "--n-z", "3", "--volume", "--out", str(out)])
        assert rc == 0
        assert load_grid(out).n_z == 3

    def test_csv_heightmap_input(self, tmp_path):
        from radiofront import grid_to_csv

        hm = HeightMap(np.zeros((16, 16)), 1.0)
        csv_in = tmp_path / "city.csv"
        grid_to_csv(hm, csv_in)
        out = tmp_path / "a.rgf"
        rc = main(
            [
                "anchor", "--heightmap", str(csv_in),
                "--tx-x", "3.5", "--tx-y", "3.5", "--freq", "5.9e9",
                "--out", str(out),
            ]
        )
        assert rc == 0
        assert load_grid(out).height_px == 16


class TestOrderCommand:
    def test_wavefront_with_verify(self, tmp_path, city, capsys):
        out = tmp_path / "order.json"
        costs = tmp_path / "costs.csv"
        rc = main(
            [
                "order", *tx_flags(city),
                "--kind", "wavefront", "--patch-px", "8",
                "--out", str(out), "--cost-csv", str(costs), "--verify",
            ]
        )
        assert rc == 0
        captured = capsys.readouterr().out
        assert "containment: holds=True" in captured
        assert "oracle: bellman-ford" in captured
        order = load_order(out)
        assert order.kind == "wavefront" and len(order) == 16
        lines = costs.read_text().splitlines()
        assert lines[0] == "patch_index,D,pred"
        idx, d, pred = lines[1].split(",")
        assert idx == "0" and float(d) >= 0.0 and int(pred) >= -1

    def test_geometric_kinds(self, tmp_path, city):
        for kind in ("raster", "hilbert", "zcurve", "subsample", "alternative"):
            out = tmp_path / f"{kind}.json"
            rc = main(["order", *tx_flags(city), "--kind", kind, "--patch-px", "8", "--out", str(out)])
            assert rc == 0
            assert load_order(out).kind == kind

    def test_truepl_needs_field(self, tmp_path, city, capsys):
        rc = main(["order", *tx_flags(city), "--kind", "truepl", "--out", str(tmp_path / "o.json")])
        assert rc == 1
        assert "--field" in capsys.readouterr().err

    def test_unknown_kind(self, tmp_path, city, capsys):
        rc = main(["order", *tx_flags(city), "--kind", "spiral", "--out", str(tmp_path / "o.json")])
        assert rc == 1


class TestEntropyCommand:
    def make_traces(self, tmp_path):
        rng = np.random.default_rng(3)
        order = raster_order(4)
        t_a = tmp_path / "a.ltr"
        t_b = tmp_path / "b.ltr"
        o_path = tmp_path / "o.json"
        save_trace(LogitTrace(rng.normal(size=(16, 32)).astype(np.float32)), t_a)
        save_trace(LogitTrace(rng.normal(size=(16, 32)).astype(np.float32)), t_b)
        save_order(order, o_path)
        return t_a, t_b, o_path

    def test_profile_and_delta(self, tmp_path, capsys):
        t_a, t_b, o_path = self.make_traces(tmp_path)
        profile = tmp_path / "profile.csv"
        delta = tmp_path / "dh.rgf"
        rc = main(
            [
                "entropy",
                "--trace", str(t_a), "--order", str(o_path),
                "--trace-b", str(t_b), "--order-b", str(o_path),
                "--profile-csv", str(profile), "--delta-out", str(delta),
            ]
        )
        assert rc == 0
        lines = profile.read_text().splitlines()
        assert lines[0] == "step,mean,std"
        assert len(lines) == 17
        grid = load_grid(delta)
        assert grid.height_px == 4 and grid.width_px == 4


class TestMetricsCommand:
    def test_report(self, tmp_path, capsys):
        rng = np.random.default_rng(5)
        gt = rng.uniform(-140, -60, size=(1, 16, 16))
        pred = gt + rng.normal(0, 2, size=gt.shape)
        p_gt, p_pred = tmp_path / "gt.rgf", tmp_path / "pred.rgf"
        save_grid(RadioField(gt, UNIT_DB), p_gt)
        save_grid(RadioField(pred, UNIT_DB), p_pred)
        report = tmp_path / "report.csv"
        rc = main(["metrics", "--pred", str(p_pred), "--gt", str(p_gt), "--report", str(report)])
        assert rc == 0
        header, row = report.read_text().splitlines()
        assert header == "nmse,rmse_db,ssim,psnr,grad_total"
        values = dict(zip(header.split(","), (float(v) for v in row.split(","))))
        assert values["nmse"] > 0 and values["rmse_db"] > 0

    def test_normalized_inputs(self, tmp_path):
        rng = np.random.default_rng(8)
        from radiofront import UNIT_NORM01

        gt = rng.uniform(0, 1, size=(1, 16, 16))
        pred = np.clip(gt + rng.normal(0, 0.05, gt.shape), 0, 1)
        p_gt, p_pred = tmp_path / "gt.rgf", tmp_path / "pred.rgf"
        save_grid(RadioField(gt, UNIT_NORM01), p_gt)
        save_grid(RadioField(pred, UNIT_NORM01), p_pred)
        report = tmp_path / "r.csv"
        rc = main(["metrics", "--pred", str(p_pred), "--gt", str(p_gt), "--report", str(report)])
        assert rc == 0
        row = report.read_text().splitlines()[1].split(",")
        assert float(row[1]) > 0  # rmse computed via denormalization

    def test_identical_fields(self, tmp_path):
        g = np.random.default_rng(6).uniform(-140, -60, size=(2, 16, 16))
        p_gt = tmp_path / "gt.rgf"
        save_grid(RadioField(g, UNIT_DB), p_gt)
        report = tmp_path / "report.csv"
        per_slice = tmp_path / "slices.csv"
        rc = main(
            [
                "metrics", "--pred", str(p_gt), "--gt", str(p_gt),
                "--report", str(report), "--per-slice", str(per_slice),
            ]
        )
        assert rc == 0
        row = report.read_text().splitlines()[1].split(",")
        assert float(row[0]) == 0.0  # nmse
        assert row[3] == "inf"  # psnr sentinel
        assert len(per_slice.read_text().splitlines()) == 3


class TestSynthCommand:
    def test_single_scene(self, tmp_path):
        out = tmp_path / "scene"
        rc = main(
            [
                "synth", "--out-dir", str(out), "--seed", "4",
                "--side-px", "32", "--n-buildings", "3",
                "--footprint-range", "3,6", "--noise-sigma", "2.0",
                "--clamp-profile", "radiomapseer",
            ]
        )
        assert rc == 0
        hm = load_grid(out / "heightmap.rgf")
        fld = load_grid(out / "field.rgf")
        assert isinstance(hm, HeightMap)
        assert fld.values.min() >= -147.0 and fld.values.max() <= -47.0
        manifest = (out / "scene.txt").read_text()
        assert "tx_x=" in manifest and "heightmap=heightmap.rgf" in manifest

    def test_batch_deterministic(self, tmp_path):
        args = [
            "synth", "--seed", "7", "--count", "3",
            "--side-px", "32", "--n-buildings", "2", "--footprint-range", "3,6",
        ]
        rc = main(args + ["--out-dir", str(tmp_path / "serial")])
        assert rc == 0
        rc = main(args + ["--out-dir", str(tmp_path / "parallel"), "--jobs", "3"])
        assert rc == 0
        for k in range(3):
            a = (tmp_path / "serial" / f"scene_{k:03d}" / "field.rgf").read_bytes()
            b = (tmp_path / "parallel" / f"scene_{k:03d}" / "field.rgf").read_bytes()
            assert a == b

    def test_manifest_feeds_anchor_and_order(self, tmp_path):
        out = tmp_path / "scene"
        assert main(
            [
                "synth", "--out-dir", str(out), "--seed", "2",
                "--side-px", "32", "--n-buildings", "2", "--footprint-range", "3,6",
            ]
        ) == 0
        rc = main(
            [
                "anchor", "--manifest", str(out / "scene.txt"),
                "--out", str(tmp_path / "anchor.rgf"),
            ]
        )
        assert rc == 0
        rc = main(
            [
                "order", "--manifest", str(out / "scene.txt"),
                "--kind", "truepl", "--field", str(out / "field.rgf"),
                "--patch-px", "8", "--out", str(tmp_path / "o.json"),
            ]
        )
        assert rc == 0


class TestSelftestCommand:
    def test_all_suites_pass(self, capsys):
        assert main(["selftest"]) == 0
        out = capsys.readouterr().out
        for suite in ("ordering", "entropy", "rope"):
            assert f"PASS {suite}" in out

    def test_injected_fault(self, capsys):
        assert main(["selftest", "--inject-fault", "entropy"]) == 1
        out = capsys.readouterr().out
        assert "FAIL entropy" in out


class TestConfigPrecedence:
    def test_config_file_overrides_default_but_not_flag(self, tmp_path, city):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("patch_px=8\nkind=raster\n")
        out1 = tmp_path / "o1.json"
        rc = main(["--config", str(cfg), "order", *tx_flags(city), "--out", str(out1)])
        assert rc == 0
        order = load_order(out1)
        assert order.kind == "raster" and len(order) == 16  # config applied
        out2 = tmp_path / "o2.json"
        rc = main(
            ["--config", str(cfg), "order", *tx_flags(city), "--kind", "hilbert", "--out", str(out2)]
        )
        assert rc == 0
        assert load_order(out2).kind == "hilbert"  # flag wins

    def test_env_var_config(self, tmp_path, city, monkeypatch):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("patch_px=4\n")
        monkeypatch.setenv("RADIOFRONT_CONFIG", str(cfg))
        out = tmp_path / "o.json"
        assert main(["order", *tx_flags(city), "--kind", "raster", "--out", str(out)]) == 0
        assert len(load_order(out)) == 64
