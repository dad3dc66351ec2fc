"""End-to-end runs: scene or capture in, CSV exports and a manifest out.

Pipelines:

``simulate``
    Synthesize the scene; export its RD map and the spectrogram of the
    linearly fitted fast-time stream (no filtering).
``stmdse``
    Slow-time spectrogram at one range bin (the alias-limited baseline).
``ftmdse_raw``
    RD filtering, optional body demodulation, chirps appended without
    bridging the idle gap.
``proposed``
    RD filtering, linear fitting, complex EMD, IMF selection and
    reconstruction.
"""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .assembly import (FastTimeStream, append_raw, append_with_linear_fit, ftmdse_demodulate,
                       stmdse_extract, strongest_range_bin)
from .capture import atomic_write_bytes, read_adc_capture
from .config import ConfigError, RunConfig, dump_config
from .emd import Decomposition, ImfStats, NoSignatureError, cemd_decompose, reconstruct, select_imfs
from .radar_model import ChirpMatrix, alias_report, md_max_spread, rpm_to_rad_s, synth_scene
from .rd_filter import GaussianRDFilter, apply_filter, design_filter
from .spectral import RDMap, Spectrogram, inverse_rd, rd_map, rd_peak, spectrogram

logger = logging.getLogger(__name__)

STATUS_OK = "ok"
STATUS_NO_SIGNATURE = "no_signature"


@dataclass
class PipelineResult:
    """Everything a run produced, in memory and on disk."""

    config: RunConfig
    status: str
    message: str = ""
    files: dict[str, Path] = field(default_factory=dict)
    derived: dict = field(default_factory=dict)
    chirps: ChirpMatrix | None = None
    rd_pre: RDMap | None = None
    rd_post: RDMap | None = None
    peak: tuple[float, float] | None = None
    rd_filter: GaussianRDFilter | None = None
    stream: FastTimeStream | None = None
    slow_time: np.ndarray | None = None
    decomposition: Decomposition | None = None
    stats: list[ImfStats] = field(default_factory=list)
    signature: np.ndarray | None = None
    spectrogram: Spectrogram | None = None

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


def load_chirps(config: RunConfig) -> ChirpMatrix:
    """Synthesize the configured scene or read the configured capture."""
    if config.capture_path is not None:
        return read_adc_capture(config.capture_path, config.capture_layout, config.radar)
    return synth_scene(config.radar, config.target, config.snr_db,
                       config.blade_body_ratio_db, config.seed)


def expected_spread(config: RunConfig) -> float:
    """Configured spread, else the closed-form value for the configured target."""
    if config.expected_spread_hz is not None:
        return config.expected_spread_hz
    if config.target is None:
        raise ConfigError("pipeline.expected_spread_hz is required when running from a capture")
    return md_max_spread(config.radar, config.target)


def filter_centre(config: RunConfig, peak: tuple[float, float]) -> tuple[float, float]:
    """RD-map peak, with any configured range/velocity replacing the estimate."""
    range_hz, doppler_hz = peak
    if config.target_range_m is not None:
        range_hz = config.radar.beat_frequency(config.target_range_m)
    if config.target_velocity_mps is not None:
        doppler_hz = config.radar.doppler_frequency(config.target_velocity_mps)
    return range_hz, doppler_hz


def derived_constants(config: RunConfig) -> dict:
    p = config.radar
    d = {
        "package_version": __version__,
        "samples_per_chirp": p.samples_per_chirp,
        "idle_samples": p.idle_samples,
        "idle_samples_exact": (p.chirp_repetition_interval - p.chirp_duration) * p.sample_rate,
        "chirp_repetition_frequency_hz": p.chirp_repetition_frequency,
        "bandwidth_hz": p.bandwidth,
        "wavelength_m": p.wavelength,
        "range_bin_size_m": p.range_bin_size,
        "range_bin_width_hz": p.range_bin_width_hz,
        "doppler_bin_width_hz": p.doppler_bin_width_hz,
    }
    if config.target is not None:
        t = config.target
        report = alias_report(p, t)
        d.update({
            "target_range_frequency_hz": p.beat_frequency(t.range),
            "target_doppler_frequency_hz": p.doppler_frequency(t.radial_velocity),
            "max_spread_hz": report.spread_hz,
            "slow_time_aliased": report.slow_time_aliased,
            "range_spread": report.range_spread,
            "doppler_spread": report.doppler_spread,
            "fast_time_ok": report.fast_time_ok,
        })
    return d


def _log_rounding(config: RunConfig) -> None:
    p = config.radar
    exact_n = p.chirp_duration * p.sample_rate
    exact_q = (p.chirp_repetition_interval - p.chirp_duration) * p.sample_rate
    if abs(exact_n - p.samples_per_chirp) > 1e-6:
        logger.warning("chirp holds %.4f samples, rounded to N=%d", exact_n, p.samples_per_chirp)
    if abs(exact_q - p.idle_samples) > 1e-6:
        logger.warning("idle time holds %.4f samples, rounded to Q=%d", exact_q, p.idle_samples)


def _matrix_csv(values: np.ndarray, row_axis: np.ndarray, col_axis: np.ndarray, corner: str) -> bytes:
    buf = io.StringIO()
    buf.write(corner + "," + ",".join(f"{v:.9e}" for v in col_axis) + "\n")
    np.savetxt(buf, np.column_stack([row_axis, values]), fmt="%.9e", delimiter=",")
    return buf.getvalue().encode("ascii")


def _stats_csv(stats: list[ImfStats]) -> bytes:
    lines = ["imf,mean_inst_freq_hz,freq_deviation_hz,std_inst_freq_hz,num_samples,selected"]
    for s in stats:
        lines.append(f"{s.index},{s.mean_inst_freq:.9e},{s.freq_deviation:.9e},"
                     f"{s.std_inst_freq:.9e},{s.num_samples},{'true' if s.selected else 'false'}")
    return ("\n".join(lines) + "\n").encode("ascii")


class _Writer:
    def __init__(self, out_dir: Path, result: PipelineResult):
        self.out_dir = out_dir
        self.result = result

    def write(self, name: str, data: bytes) -> None:
        path = self.out_dir / name
        atomic_write_bytes(path, data)
        self.result.files[name] = path

    def rd(self, name: str, rdmap: RDMap) -> None:
        self.write(name, _matrix_csv(rdmap.magnitude, rdmap.doppler_axis, rdmap.range_axis,
                                     "doppler_hz\\range_hz"))

    def spec(self, spec: Spectrogram) -> None:
        self.write("spectrogram.csv", _matrix_csv(spec.magnitude_db, spec.frame_times,
                                                  spec.freq_axis, "time_s\\freq_hz"))


def run_pipeline(config: RunConfig, output_dir=None, write: bool = True) -> PipelineResult:
    """Run the configured pipeline and (optionally) export its products.

    An empty IMF selection is not raised: the result comes back with status
    ``"no_signature"``, the RD maps and IMF statistics are still exported, and
    no spectrogram is written.
    """
    out_dir = Path(output_dir) if output_dir is not None else config.output_dir
    if output_dir is not None:
        config = replace(config, output_dir=out_dir)
    _log_rounding(config)

    result = PipelineResult(config=config, status=STATUS_OK)
    result.derived = derived_constants(config)
    writer = _Writer(out_dir, result) if write else None
    p = config.radar
    st = config.stft_config

    chirps = load_chirps(config)
    p = chirps.params
    result.chirps = chirps
    result.rd_pre = rd_map(chirps)
    range_hz, doppler_hz, _ = rd_peak(result.rd_pre)
    result.peak = (range_hz, doppler_hz)
    result.derived.update({"peak_range_hz": range_hz, "peak_doppler_hz": doppler_hz})
    if writer:
        writer.rd("rd_map_pre.csv", result.rd_pre)

    mode = config.pipeline
    if mode == "simulate":
        result.stream = append_with_linear_fit(chirps)
        result.spectrogram = spectrogram(result.stream.samples, p.sample_rate, st.window_length,
                                         st.overlap_fraction, st.pad_factor,
                                         times=result.stream.sample_times)

    elif mode == "stmdse":
        range_bin = config.range_bin if config.range_bin is not None else strongest_range_bin(chirps)
        result.derived["range_bin"] = range_bin
        result.slow_time = stmdse_extract(chirps, range_bin)
        times = np.arange(chirps.num_chirps) * p.chirp_repetition_interval
        result.spectrogram = spectrogram(result.slow_time, p.chirp_repetition_frequency,
                                         min(st.slow_window_length, chirps.num_chirps),
                                         st.overlap_fraction, st.pad_factor, times=times,
                                         centered=True)

    else:
        spread = expected_spread(config)
        centre = filter_centre(config, result.peak)
        result.rd_filter = design_filter(centre, spread, p)
        if config.range_cutoff_hz is not None:
            result.rd_filter = replace(result.rd_filter,
                                       sigma_range=config.range_cutoff_hz / math.sqrt(math.log(2.0)))
        result.rd_post = apply_filter(result.rd_pre, result.rd_filter)
        filtered = inverse_rd(result.rd_post)
        result.derived.update({
            "expected_spread_hz": spread,
            "filter_centre_range_hz": centre[0],
            "filter_centre_doppler_hz": centre[1],
            "filter_range_cutoff_hz": result.rd_filter.range_cutoff_hz,
            "filter_doppler_all_pass": result.rd_filter.doppler_all_pass,
        })
        if writer:
            writer.rd("rd_map_post.csv", result.rd_post)

        if mode == "ftmdse_raw":
            if config.demodulate:
                velocity = config.radar.velocity_from_doppler(centre[1])
                filtered = ftmdse_demodulate(filtered, p.range_from_beat(centre[0]), velocity)
            result.stream = append_raw(filtered)
            result.spectrogram = spectrogram(result.stream.samples, p.sample_rate, st.window_length,
                                             st.overlap_fraction, st.pad_factor,
                                             times=result.stream.sample_times)
        else:
            result.stream = append_with_linear_fit(filtered)
            _decompose_and_select(config, result, centre[0], spread)
            if writer:
                writer.write("imf_stats.csv", _stats_csv(result.stats))
            if result.ok:
                result.spectrogram = spectrogram(result.signature, p.sample_rate, st.window_length,
                                                 st.overlap_fraction, st.pad_factor,
                                                 times=result.stream.sample_times)

    result.derived["status"] = result.status
    if writer:
        if result.spectrogram is not None:
            writer.spec(result.spectrogram)
        writer.write("manifest.cfg", dump_config(config, result.derived).encode("utf-8"))
    return result


def _decompose_and_select(config: RunConfig, result: PipelineResult, range_hz: float,
                          spread: float) -> None:
    p = config.radar
    stream = result.stream
    if not spread > 0:
        result.status = STATUS_NO_SIGNATURE
        result.message = "no signature found: expected micro-Doppler spread is zero"
        return
    result.decomposition = cemd_decompose(stream.samples, config.sift)
    result.stats = select_imfs(result.decomposition, range_hz, spread, p.sample_rate,
                               stream.interp_mask, config.amplitude_floor)
    result.derived["selected_imfs"] = ",".join(str(s.index) for s in result.stats if s.selected) or "none"
    try:
        result.signature = reconstruct(result.decomposition, result.stats)
    except NoSignatureError as exc:
        result.status = STATUS_NO_SIGNATURE
        result.message = str(exc)


SWEEP_PARAMS = {
    "rotation_rpm": lambda t, v: replace(t, rotation_rate=rpm_to_rad_s(v)),
    "blade_length_m": lambda t, v: replace(t, blade_length=v),
    "radial_velocity_mps": lambda t, v: replace(t, radial_velocity=v),
    "range_m": lambda t, v: replace(t, range=v),
}


def sweep(config: RunConfig, param: str, values) -> list[dict]:
    """Closed-form spread and alias flags as one target parameter varies."""
    if config.target is None:
        raise ConfigError("sweep needs a [target] section")
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"sweep parameter must be one of {', '.join(SWEEP_PARAMS)}, got {param!r}")
    rows = []
    for value in values:
        target = SWEEP_PARAMS[param](config.target, float(value))
        report = alias_report(config.radar, target)
        rows.append({
            param: float(value),
            "spread_hz": report.spread_hz,
            "slow_time_aliased": report.slow_time_aliased,
            "range_spread": report.range_spread,
            "doppler_spread": report.doppler_spread,
            "fast_time_ok": report.fast_time_ok,
            "slow_time_excess_hz": report.slow_time_excess_hz,
            "range_spread_excess_hz": report.range_spread_excess_hz,
            "doppler_spread_excess_hz": report.doppler_spread_excess_hz,
            "fast_time_excess_hz": report.fast_time_excess_hz,
        })
    return rows


def sweep_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    keys = list(rows[0])

    def fmt(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        return f"{v:.9e}" if isinstance(v, float) and not math.isnan(v) else str(v)

    lines = [",".join(keys)] + [",".join(fmt(r[k]) for k in keys) for r in rows]
    return "\n".join(lines) + "\n"
