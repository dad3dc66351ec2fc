import struct

import pytest

from mdkit.capture import write_capture
from mdkit.cli import EXIT_CAPTURE, EXIT_CONFIG, EXIT_NO_SIGNATURE, EXIT_OK, main
from mdkit.config import AdcLayout, load_config
from mdkit.pipeline import run_pipeline, sweep, sweep_csv
from mdkit.radar_model import md_max_spread, synth_scene

from _helpers import point, table1

SMALL = """
[radar]
start_frequency_hz = 77e9
chirp_rate_hz_per_s = 10e12
chirp_duration_s = 102.4e-6
chirp_repetition_interval_s = 104.43e-6
sample_rate_hz = 5e6
num_chirps = {chirps}

[target]
range_m = 20
num_blades = 3
blade_length_m = {blade}
rotation_rpm = 12000

[scene]
snr_db = {snr}
blade_body_ratio_db = -6
seed = 4

[pipeline]
mode = {mode}
{extra}
"""


def small_config(tmp_path, mode="proposed", chirps=16, blade=0.06, extra="", name="run.cfg", snr=5):
    path = tmp_path / name
    path.write_text(SMALL.format(mode=mode, chirps=chirps, blade=blade, extra=extra, snr=snr))
    return path


# --- library runs ------------------------------------------------------------------

@pytest.mark.parametrize("mode, files", [
    ("simulate", {"rd_map_pre.csv", "spectrogram.csv", "manifest.cfg"}),
    ("stmdse", {"rd_map_pre.csv", "spectrogram.csv", "manifest.cfg"}),
    ("ftmdse_raw", {"rd_map_pre.csv", "rd_map_post.csv", "spectrogram.csv", "manifest.cfg"}),
    ("proposed", {"rd_map_pre.csv", "rd_map_post.csv", "imf_stats.csv", "spectrogram.csv",
                  "manifest.cfg"}),
])
def test_each_mode_runs(tmp_path, mode, files):
    # a long blade with no noise so the proposed mode finds a signature
    config = load_config(small_config(tmp_path, mode, blade=0.5, snr="inf"))
    result = run_pipeline(config, tmp_path / "out")
    assert result.ok
    assert set(result.files) == files
    assert all(p.exists() for p in result.files.values())
    assert result.peak[0] == pytest.approx(config.radar.beat_frequency(20.0),
                                           abs=config.radar.range_bin_width_hz)


def test_proposed_result_contents(tmp_path):
    config = load_config(small_config(tmp_path, blade=0.5, snr="inf"))
    result = run_pipeline(config, write=False)
    assert result.files == {} and result.ok
    assert len(result.stats) == len(result.decomposition.imfs)
    assert result.stats[0].selected
    assert result.signature.shape == result.stream.samples.shape
    assert result.derived["expected_spread_hz"] == pytest.approx(md_max_spread(config.radar, config.target))
    assert result.derived["filter_range_cutoff_hz"] == pytest.approx(result.derived["expected_spread_hz"] / 2)


def test_range_cutoff_override_applied(tmp_path):
    config = load_config(small_config(tmp_path, extra="range_cutoff_hz = 80e3"))
    result = run_pipeline(config, write=False)
    assert result.rd_filter.range_cutoff_hz == pytest.approx(80e3)
    assert result.derived["filter_range_cutoff_hz"] == pytest.approx(80e3)


def test_csv_headers(tmp_path):
    result = run_pipeline(load_config(small_config(tmp_path, blade=0.5, snr="inf")), tmp_path / "out")
    head = result.files["rd_map_pre.csv"].read_text().splitlines()
    assert head[0].startswith("doppler_hz\\range_hz,")
    assert len(head) == 1 + 16 and len(head[0].split(",")) == 1 + 512
    stats = result.files["imf_stats.csv"].read_text().splitlines()
    assert stats[0] == "imf,mean_inst_freq_hz,freq_deviation_hz,std_inst_freq_hz,num_samples,selected"
    assert result.files["spectrogram.csv"].read_text().startswith("time_s\\freq_hz,")


def test_manifest_rerun_is_byte_identical(tmp_path):
    first = run_pipeline(load_config(small_config(tmp_path)), tmp_path / "a")
    again = run_pipeline(load_config(first.files["manifest.cfg"]), tmp_path / "b")
    assert set(first.files) == set(again.files)
    for name in first.files:
        if name.endswith(".csv"):
            assert first.files[name].read_bytes() == again.files[name].read_bytes(), name


def test_zero_spread_gives_no_signature(tmp_path):
    config = load_config(small_config(tmp_path, blade=0.0))
    result = run_pipeline(config, tmp_path / "out")
    assert result.status == "no_signature" and not result.ok
    assert "spectrogram.csv" not in result.files
    assert "rd_map_pre.csv" in result.files


def test_capture_run(tmp_path):
    p = table1(8)
    write_capture(tmp_path / "c.bin", synth_scene(p, point(body=0.5)), AdcLayout(8, 512))
    cfg = small_config(tmp_path, mode="simulate", chirps=8).read_text()
    cfg = cfg.split("[target]")[0] + "[capture]\npath = c.bin\n\n[pipeline]\nmode = simulate\n"
    (tmp_path / "cap.cfg").write_text(cfg)
    result = run_pipeline(load_config(tmp_path / "cap.cfg"), write=False)
    assert result.peak[0] == pytest.approx(p.beat_frequency(20.0), abs=p.range_bin_width_hz)


# --- sweep ---------------------------------------------------------------------------

def test_sweep_rows(tmp_path):
    config = load_config("table1.cfg")
    rows = sweep(config, "rotation_rpm", [600, 12000])
    assert rows[1]["spread_hz"] == pytest.approx(md_max_spread(config.radar, config.target))
    assert rows[0]["spread_hz"] == pytest.approx(rows[1]["spread_hz"] / 20)
    assert not rows[0]["slow_time_aliased"] and rows[1]["slow_time_aliased"]
    text = sweep_csv(rows)
    assert text.splitlines()[0].startswith("rotation_rpm,spread_hz,slow_time_aliased")
    assert len(text.splitlines()) == 3


# --- command line ----------------------------------------------------------------------

def test_cli_run_ok(tmp_path, capsys):
    code = main(["run", "--config", str(small_config(tmp_path, "simulate")), "--out", str(tmp_path / "o")])
    assert code == EXIT_OK
    assert "spectrogram.csv" in capsys.readouterr().out


def test_cli_pipeline_and_seed_override(tmp_path):
    code = main(["run", "--config", str(small_config(tmp_path)), "--pipeline", "ftmdse-raw",
                 "--seed", "9", "--out", str(tmp_path / "o")])
    assert code == EXIT_OK
    manifest = load_config(tmp_path / "o" / "manifest.cfg")
    assert manifest.pipeline == "ftmdse_raw" and manifest.seed == 9


def test_cli_no_signature_exit(tmp_path, capsys):
    code = main(["run", "--config", str(small_config(tmp_path, blade=0.0)), "--out", str(tmp_path / "o")])
    assert code == EXIT_NO_SIGNATURE
    assert "no signature" in capsys.readouterr().err


def test_cli_config_error_exit(tmp_path, capsys):
    bad = small_config(tmp_path).read_text().replace("chirp_duration_s = 102.4e-6", "chirp_duration_s = 2e-4")
    (tmp_path / "bad.cfg").write_text(bad)
    assert main(["run", "--config", str(tmp_path / "bad.cfg")]) == EXIT_CONFIG
    assert "chirp_repetition_interval_s" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG


def _layout_cfg(tmp_path, chirps=4):
    path = tmp_path / "layout.cfg"
    text = SMALL.format(mode="simulate", chirps=chirps, blade=0.06, extra="", snr=5).split("[target]")[0]
    path.write_text(text + f"[capture]\nnum_chirps = {chirps}\n")
    return path


def test_cli_inspect_capture(tmp_path, capsys):
    p = table1(4)
    write_capture(tmp_path / "c.bin", synth_scene(p, point(body=0.5)), AdcLayout(4, 512))
    assert main(["inspect-capture", str(tmp_path / "c.bin"), "--layout", str(_layout_cfg(tmp_path))]) == EXIT_OK
    out = dict(line.split(": ", 1) for line in capsys.readouterr().out.splitlines())
    assert out["chirps"] == "4" and out["samples_per_chirp"] == "512"
    assert float(out["rd_peak_range_m"]) == pytest.approx(20.0, abs=p.range_from_beat(p.range_bin_width_hz))


def test_cli_capture_size_error(tmp_path, capsys):
    (tmp_path / "short.bin").write_bytes(struct.pack("<4h", 1, 2, 3, 4))
    code = main(["inspect-capture", str(tmp_path / "short.bin"), "--layout", str(_layout_cfg(tmp_path))])
    assert code == EXIT_CAPTURE
    assert "expected 8192 bytes" in capsys.readouterr().err
    assert main(["inspect-capture", str(tmp_path / "none.bin"), "--layout",
                 str(_layout_cfg(tmp_path))]) == EXIT_CAPTURE


def test_cli_sweep(tmp_path, capsys):
    code = main(["sweep", "--config", "table1.cfg", "--param", "rotation_rpm",
                 "--values", "600,6000,12000", "--out", str(tmp_path)])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert out == (tmp_path / "sweep.csv").read_text()
    assert len(out.splitlines()) == 4


def test_cli_rejects_bad_sweep_values():
    with pytest.raises(SystemExit):
        main(["sweep", "--config", "table1.cfg", "--param", "rotation_rpm", "--values", "a,b"])
