"""End-to-end command line behavior, driven in-process through main()."""

import json
import subprocess
import sys

import numpy as np
import pytest

from fsr3d import load_mask, load_volume, read_report, save_mask, save_volume
from fsr3d.cli import main


def write_clip(path, frames=8, height=24, width=24, seed=0):
    rng = np.random.default_rng(seed)
    vol = rng.uniform(10, 245, (frames, height, width))
    save_volume(vol, path)
    return load_volume(path)


def payload(path):
    return path.read_bytes()


class TestSample:
    def test_outputs_and_manifest(self, tmp_path):
        clip = tmp_path / "clip.gray8"
        write_clip(clip)
        out = tmp_path / "out"
        assert main(["sample", "--input", str(clip), "--out-dir", str(out),
                     "--density", "25", "--mode", "dynamic", "--seed", "5"]) == 0
        mask = load_mask(out / "clip_mask.gray8")
        assert mask.shape == (8, 24, 24)
        assert (mask.sum(axis=(1, 2)) == 24 * 24 // 4).all()
        sampled = load_volume(out / "clip_sampled.gray8")
        assert ((sampled == 0) | (mask != 0)).all()
        manifest = json.loads((out / "clip_sample_manifest.json").read_text())
        assert manifest["seed"] == 5
        assert manifest["schedule"]["period"] == 4
        assert manifest["input"]["sha256"]

    def test_half_density_schedule_in_manifest(self, tmp_path):
        clip = tmp_path / "clip.gray8"
        write_clip(clip)
        out = tmp_path / "out"
        assert main(["sample", "--input", str(clip), "--out-dir", str(out),
                     "--density", "50", "--schedule-seed", "3"]) == 0
        manifest = json.loads((out / "clip_sample_manifest.json").read_text())
        assert manifest["schedule"]["period"] == 6
        assert sorted(map(tuple, manifest["schedule"]["frame_sets"])) == [
            (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]

    def test_deterministic_bytes(self, tmp_path):
        clip = tmp_path / "clip.gray8"
        write_clip(clip)
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["sample", "--input", str(clip), "--out-dir", str(out),
                         "--seed", "9"]) == 0
        for name in ("clip_sampled.gray8", "clip_mask.gray8", "clip_labels.gray8"):
            assert payload(a / name) == payload(b / name)

    def test_dry_run_touches_nothing(self, tmp_path, capsys):
        out = tmp_path / "out"
        rc = main(["sample", "--input", str(tmp_path / "absent.gray8"),
                   "--out-dir", str(out), "--density", "75", "--dry-run"])
        assert rc == 0
        info = json.loads(capsys.readouterr().out)
        assert info["schedule_period"] == 4
        assert [len(s) for s in info["frame_sets"]] == [3, 3, 3, 3]
        assert not out.exists()


class TestReconstruct:
    def test_full_mask_round_trips_bytes(self, tmp_path):
        clip = tmp_path / "clip.gray8"
        write_clip(clip, frames=4, height=8, width=8)
        mask = tmp_path / "mask.gray8"
        save_mask(np.ones((4, 8, 8), dtype=np.uint8), mask)
        out = tmp_path / "recon.gray8"
        assert main(["reconstruct", "--input", str(clip), "--mask", str(mask),
                     "--output", str(out), "--iterations", "5"]) == 0
        assert payload(out) == payload(clip)
        manifest = json.loads((tmp_path / "recon_manifest.json").read_text())
        assert manifest["config"]["iterations"] == 5
        assert "iterations=5" in manifest["config_fingerprint"]
        assert manifest["runtime_s"] > 0

    def test_flags_override_config_file(self, tmp_path):
        clip = tmp_path / "clip.gray8"
        write_clip(clip, frames=4, height=8, width=8)
        mask = tmp_path / "mask.gray8"
        save_mask(np.ones((4, 8, 8), dtype=np.uint8), mask)
        cfg = tmp_path / "run.cfg"
        cfg.write_text("tau = 8\niterations = 7\n")
        out = tmp_path / "recon.gray8"
        assert main(["reconstruct", "--input", str(clip), "--mask", str(mask),
                     "--output", str(out), "--config", str(cfg),
                     "--tau", "2.0"]) == 0
        manifest = json.loads((tmp_path / "recon_manifest.json").read_text())
        assert manifest["config"]["tau"] == 2.0
        assert manifest["config"]["iterations"] == 7

    def test_missing_mask_is_io_error(self, tmp_path, capsys):
        clip = tmp_path / "clip.gray8"
        write_clip(clip, frames=4, height=8, width=8)
        rc = main(["reconstruct", "--input", str(clip),
                   "--mask", str(tmp_path / "nope.gray8"),
                   "--output", str(tmp_path / "o.gray8")])
        assert rc == 2
        assert "nope.gray8" in capsys.readouterr().err

    def test_shape_mismatch_is_io_error(self, tmp_path):
        clip = tmp_path / "clip.gray8"
        write_clip(clip, frames=4, height=8, width=8)
        mask = tmp_path / "mask.gray8"
        save_mask(np.ones((4, 8, 10), dtype=np.uint8), mask)
        rc = main(["reconstruct", "--input", str(clip), "--mask", str(mask),
                   "--output", str(tmp_path / "o.gray8")])
        assert rc == 2

    def test_empty_mask_is_algorithmic_abort(self, tmp_path, capsys):
        clip = tmp_path / "clip.gray8"
        write_clip(clip, frames=4, height=8, width=8)
        mask = tmp_path / "mask.gray8"
        save_mask(np.zeros((4, 8, 8), dtype=np.uint8), mask)
        rc = main(["reconstruct", "--input", str(clip), "--mask", str(mask),
                   "--output", str(tmp_path / "o.gray8")])
        assert rc == 3
        assert "abort" in capsys.readouterr().err

    def test_bad_config_file_is_usage_error(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("warp = 9\n")
        rc = main(["reconstruct", "--input", "x", "--mask", "y",
                   "--output", "z", "--config", str(cfg)])
        assert rc == 1

    def test_dry_run_prints_resolved_config(self, tmp_path, capsys):
        out = tmp_path / "o.gray8"
        rc = main(["reconstruct", "--input", "a", "--mask", "b",
                   "--output", str(out), "--iterations", "9", "--dry-run"])
        assert rc == 0
        info = json.loads(capsys.readouterr().out)
        assert "iterations=9" in info["config"]
        assert not out.exists()


class TestEvaluate:
    def test_identical_reports_inf(self, tmp_path, capsys):
        ref = tmp_path / "ref.gray8"
        write_clip(ref, frames=8, height=36, width=36)
        csv = tmp_path / "r.csv"
        rc = main(["evaluate", "--reference", str(ref), "--test", str(ref),
                   "--temporal-border", "3", "--csv", str(csv)])
        assert rc == 0
        assert "PSNR INF dB" in capsys.readouterr().out
        row = read_report(csv)[0]
        assert row.psnr_db == np.inf
        assert row.sequence == "ref"

    def test_unit_offset_value(self, tmp_path, capsys):
        ref = tmp_path / "ref.gray8"
        test = tmp_path / "test.gray8"
        save_volume(np.full((8, 36, 36), 100.0), ref)
        save_volume(np.full((8, 36, 36), 101.0), test)
        rc = main(["evaluate", "--reference", str(ref), "--test", str(test),
                   "--temporal-border", "3"])
        assert rc == 0
        assert "PSNR 48.13 dB" in capsys.readouterr().out

    def test_shape_mismatch(self, tmp_path):
        ref = tmp_path / "ref.gray8"
        other = tmp_path / "other.gray8"
        write_clip(ref, frames=8, height=36, width=36)
        write_clip(other, frames=8, height=36, width=40)
        rc = main(["evaluate", "--reference", str(ref), "--test", str(other)])
        assert rc == 2


class TestPipeline:
    def run_pipeline(self, tmp_path, out_name, extra=()):
        clip = tmp_path / "clip.gray8"
        if not clip.exists():
            write_clip(clip)
        out = tmp_path / out_name
        rc = main(["pipeline", "--input", str(clip), "--out-dir", str(out),
                   "--density", "25", "--mode", "static", "--mode", "dynamic",
                   "--baseline", "--spatial-border", "6", "--temporal-border", "2",
                   "--iterations", "15", *extra])
        assert rc == 0
        return out

    def test_rows_and_outputs(self, tmp_path):
        out = self.run_pipeline(tmp_path, "out")
        rows = read_report(out / "report.csv")
        assert [(r.sequence, r.mode) for r in rows] == [
            ("clip", "static"), ("clip/baseline", "static"),
            ("clip", "dynamic"), ("clip/baseline", "dynamic")]
        assert all(r.density == 25 for r in rows)
        assert all(r.runtime_s is None for r in rows)
        for mode in ("static", "dynamic"):
            for kind in ("sampled", "mask", "recon"):
                assert (out / f"clip_{mode}_{kind}.gray8").exists()
        manifest = json.loads((out / "clip_pipeline_manifest.json").read_text())
        assert set(manifest["runtime_s"]) == {"static", "dynamic"}

    def test_byte_deterministic_across_runs_and_threads(self, tmp_path):
        a = self.run_pipeline(tmp_path, "a")
        b = self.run_pipeline(tmp_path, "b")
        c = self.run_pipeline(tmp_path, "c", extra=("--threads", "2"))
        assert payload(a / "report.csv") == payload(b / "report.csv")
        assert payload(a / "report.csv") == payload(c / "report.csv")
        for mode in ("static", "dynamic"):
            name = f"clip_{mode}_recon.gray8"
            assert payload(a / name) == payload(b / name)
            assert payload(a / name) == payload(c / name)

    def test_dry_run(self, tmp_path, capsys):
        out = tmp_path / "out"
        rc = main(["pipeline", "--input", "missing.gray8", "--out-dir", str(out),
                   "--dry-run"])
        assert rc == 0
        info = json.loads(capsys.readouterr().out)
        assert info["modes"] == ["dynamic"]
        assert not out.exists()


class TestParsing:
    def test_no_arguments_is_usage_error(self):
        assert main([]) == 1

    def test_unknown_density_is_usage_error(self, tmp_path):
        assert main(["sample", "--input", "x", "--out-dir", str(tmp_path),
                     "--density", "30"]) == 1

    def test_unknown_flag_is_usage_error(self):
        assert main(["evaluate", "--reference", "a", "--test", "b",
                     "--sharpen"]) == 1

    def test_version_exits_clean(self, capsys):
        assert main(["--version"]) == 0
        assert "fsr3d 0.1.0" in capsys.readouterr().out

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "fsr3d", "--version"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "fsr3d 0.1.0" in proc.stdout
