"""Run configuration: ``[section]`` / ``key = value`` files.

Bundled configurations can be referenced by bare name (``table1.cfg``).
Relative capture paths resolve against the directory of the config file;
the output directory resolves against the working directory.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .emd import SiftConfig
from .radar_model import RadarParams, RotorTarget, evenly_spaced_offsets, rpm_to_rad_s

PIPELINES = ("simulate", "stmdse", "ftmdse_raw", "proposed")
SECTIONS = ("radar", "target", "scene", "pipeline", "stft", "sift", "selection", "capture", "derived")


class ConfigError(ValueError):
    """Invalid or incomplete configuration; the message names the field."""


@dataclass(frozen=True)
class AdcLayout:
    """Binary capture layout.

    Samples are interleaved (I, Q) pairs, or (Q, I) with ``iq_order="QI"``,
    stored chirp-major as signed integers of ``sample_bytes`` bytes.
    """

    num_chirps: int
    samples_per_chirp: int
    iq_order: str = "IQ"
    sample_bytes: int = 2
    byte_order: str = "little"

    def __post_init__(self):
        if self.num_chirps < 1:
            raise ConfigError(f"capture.num_chirps must be >= 1, got {self.num_chirps}")
        if self.samples_per_chirp < 1:
            raise ConfigError(f"capture.samples_per_chirp must be >= 1, got {self.samples_per_chirp}")
        if self.iq_order not in ("IQ", "QI"):
            raise ConfigError(f"capture.iq_order must be IQ or QI, got {self.iq_order!r}")
        if self.sample_bytes not in (2, 4):
            raise ConfigError(f"capture.sample_bytes must be 2 or 4, got {self.sample_bytes}")
        if self.byte_order not in ("little", "big"):
            raise ConfigError(f"capture.byte_order must be little or big, got {self.byte_order!r}")

    @property
    def expected_bytes(self) -> int:
        return self.num_chirps * self.samples_per_chirp * 2 * self.sample_bytes


@dataclass(frozen=True)
class StftConfig:
    window_length: int
    overlap_fraction: float = 0.9
    pad_factor: int = 1
    slow_window_length: int = 32


@dataclass(frozen=True)
class RunConfig:
    radar: RadarParams
    target: RotorTarget | None = None
    snr_db: float | None = None
    blade_body_ratio_db: float | None = None
    seed: int | None = None
    pipeline: str = "proposed"
    expected_spread_hz: float | None = None
    target_range_m: float | None = None
    target_velocity_mps: float | None = None
    range_bin: int | None = None
    demodulate: bool = False
    range_cutoff_hz: float | None = None
    stft: StftConfig | None = None
    sift: SiftConfig = field(default_factory=SiftConfig)
    amplitude_floor: float = 0.1
    capture_path: Path | None = None
    capture_layout: AdcLayout | None = None
    output_dir: Path = Path("mdkit_out")

    @property
    def stft_config(self) -> StftConfig:
        return self.stft if self.stft is not None else StftConfig(self.radar.samples_per_chirp)


def resolve_config_path(path) -> Path:
    """Return ``path`` if it exists, else the bundled file of that name."""
    p = Path(path)
    if p.exists():
        return p
    bundled = resources.files("mdkit") / "data" / p.name
    if p.parent == Path(".") and bundled.is_file():
        return Path(str(bundled))
    raise ConfigError(f"config file not found: {path}")


class _Section:
    """Typed accessors over one parser section, tracking the field name for errors."""

    def __init__(self, parser: configparser.ConfigParser, name: str):
        self.name = name
        self.data = parser[name] if parser.has_section(name) else {}

    def has(self, key: str) -> bool:
        return key in self.data and self.data[key].strip() != ""

    def _raw(self, key: str, required: bool) -> str | None:
        if not self.has(key):
            if required:
                raise ConfigError(f"{self.name}.{key} is required")
            return None
        return self.data[key].strip()

    def float(self, key: str, default=None, required: bool = False) -> float | None:
        raw = self._raw(key, required)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{self.name}.{key} must be a number, got {raw!r}") from None

    def int(self, key: str, default=None, required: bool = False) -> int | None:
        raw = self._raw(key, required)
        if raw is None:
            return default
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(f"{self.name}.{key} must be an integer, got {raw!r}") from None
        if not value.is_integer():
            raise ConfigError(f"{self.name}.{key} must be an integer, got {raw!r}")
        return int(value)

    def str(self, key: str, default=None) -> str | None:
        raw = self._raw(key, False)
        return default if raw is None else raw

    def bool(self, key: str, default: bool = False) -> bool:
        raw = self._raw(key, False)
        if raw is None:
            return default
        lowered = raw.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{self.name}.{key} must be true or false, got {raw!r}")

    def floats(self, key: str) -> tuple[float, ...] | None:
        raw = self._raw(key, False)
        if raw is None:
            return None
        try:
            return tuple(float(v) for v in raw.split(",") if v.strip())
        except ValueError:
            raise ConfigError(f"{self.name}.{key} must be a comma-separated list of numbers") from None


def _positive(section: _Section, key: str, value, strict: bool = True):
    if value is None:
        return value
    if strict and not value > 0:
        raise ConfigError(f"{section.name}.{key} must be > 0, got {value}")
    if not strict and value < 0:
        raise ConfigError(f"{section.name}.{key} must be >= 0, got {value}")
    return value


def _read_radar(parser) -> RadarParams:
    s = _Section(parser, "radar")
    if not parser.has_section("radar"):
        raise ConfigError("[radar] section is required")
    values = {
        "start_frequency": ("start_frequency_hz", s.float("start_frequency_hz", required=True)),
        "chirp_rate": ("chirp_rate_hz_per_s", s.float("chirp_rate_hz_per_s", required=True)),
        "chirp_duration": ("chirp_duration_s", s.float("chirp_duration_s", required=True)),
        "chirp_repetition_interval": ("chirp_repetition_interval_s",
                                      s.float("chirp_repetition_interval_s", required=True)),
        "sample_rate": ("sample_rate_hz", s.float("sample_rate_hz", required=True)),
        "num_chirps": ("num_chirps", s.int("num_chirps", required=True)),
        "propagation_speed": ("propagation_speed_mps", s.float("propagation_speed_mps", 2.998e8)),
    }
    for key, value in values.values():
        _positive(s, key, value)
    if values["chirp_duration"][1] > values["chirp_repetition_interval"][1]:
        raise ConfigError("radar.chirp_duration_s must not exceed radar.chirp_repetition_interval_s "
                          f"({values['chirp_duration'][1]} > {values['chirp_repetition_interval'][1]})")
    try:
        return RadarParams(**{name: v for name, (_, v) in values.items()})
    except ValueError as exc:
        raise ConfigError(f"radar: {exc}") from None


def _read_target(parser) -> RotorTarget | None:
    if not parser.has_section("target"):
        return None
    s = _Section(parser, "target")
    range_m = _positive(s, "range_m", s.float("range_m", required=True))
    num_blades = s.int("num_blades", 0)
    if num_blades < 0:
        raise ConfigError(f"target.num_blades must be >= 0, got {num_blades}")
    blade_length = _positive(s, "blade_length_m", s.float("blade_length_m", 0.0), strict=False)

    if s.has("rotation_rpm") and s.has("rotation_rate_rad_s"):
        raise ConfigError("target.rotation_rpm and target.rotation_rate_rad_s are mutually exclusive")
    if s.has("rotation_rate_rad_s"):
        rate = s.float("rotation_rate_rad_s")
        _positive(s, "rotation_rate_rad_s", rate, strict=False)
    else:
        rpm = _positive(s, "rotation_rpm", s.float("rotation_rpm", 0.0), strict=False)
        rate = rpm_to_rad_s(rpm)

    if s.has("initial_offsets_deg") and s.has("initial_offsets_rad"):
        raise ConfigError("target.initial_offsets_deg and target.initial_offsets_rad are mutually exclusive")
    if s.has("initial_offsets_rad"):
        offsets = s.floats("initial_offsets_rad")
    elif s.has("initial_offsets_deg"):
        offsets = tuple(math.radians(v) for v in s.floats("initial_offsets_deg"))
    else:
        offsets = evenly_spaced_offsets(num_blades)
    if len(offsets) != num_blades:
        raise ConfigError(f"target.initial_offsets must have {num_blades} entries "
                          f"(one per blade), got {len(offsets)}")

    if s.has("elevation_deg") and s.has("elevation_rad"):
        raise ConfigError("target.elevation_deg and target.elevation_rad are mutually exclusive")
    elevation = s.float("elevation_rad") if s.has("elevation_rad") else math.radians(s.float("elevation_deg", 0.0))

    try:
        return RotorTarget(
            range=range_m,
            radial_velocity=s.float("radial_velocity_mps", 0.0),
            body_amplitude=s.float("body_amplitude", 1.0),
            blade_amplitude=s.float("blade_amplitude", 0.0),
            num_blades=num_blades,
            blade_length=blade_length,
            rotation_rate=rate,
            initial_offsets=offsets,
            elevation=elevation,
        )
    except ValueError as exc:
        raise ConfigError(f"target: {exc}") from None


def _read_layout(parser, radar: RadarParams | None) -> AdcLayout:
    s = _Section(parser, "capture")
    default_chirps = radar.num_chirps if radar is not None else None
    default_samples = radar.samples_per_chirp if radar is not None else None
    return AdcLayout(
        num_chirps=s.int("num_chirps", default_chirps, required=default_chirps is None),
        samples_per_chirp=s.int("samples_per_chirp", default_samples, required=default_samples is None),
        iq_order=s.str("iq_order", "IQ").upper(),
        sample_bytes=s.int("sample_bytes", 2),
        byte_order=s.str("byte_order", "little").lower(),
    )


def _parse(path: Path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    unknown = [name for name in parser.sections() if name not in SECTIONS]
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(unknown)}")
    return parser


def load_layout(path) -> AdcLayout:
    """Read just the ``[capture]`` layout from a config file."""
    path = resolve_config_path(path)
    parser = _parse(path)
    radar = _read_radar(parser) if parser.has_section("radar") else None
    if not parser.has_section("capture"):
        raise ConfigError(f"{path}: [capture] section is required for a layout")
    return _read_layout(parser, radar)


def load_radar(path) -> RadarParams | None:
    """The ``[radar]`` section of a config file, or None if it has none."""
    parser = _parse(resolve_config_path(path))
    return _read_radar(parser) if parser.has_section("radar") else None


def load_config(path) -> RunConfig:
    """Parse and validate a run configuration."""
    path = resolve_config_path(path)
    parser = _parse(path)
    radar = _read_radar(parser)
    target = _read_target(parser)

    cap = _Section(parser, "capture")
    capture_path = None
    layout = None
    if cap.has("path"):
        capture_path = Path(cap.str("path"))
        if not capture_path.is_absolute():
            capture_path = (path.parent / capture_path).resolve()
        if not capture_path.is_file():
            raise ConfigError(f"capture.path does not exist: {capture_path}")
        layout = _read_layout(parser, radar)
        if layout.samples_per_chirp != radar.samples_per_chirp:
            raise ConfigError(f"capture.samples_per_chirp ({layout.samples_per_chirp}) must equal "
                              f"round(chirp_duration_s * sample_rate_hz) = {radar.samples_per_chirp}")
    if (target is None) == (capture_path is None):
        raise ConfigError("exactly one of [target] or capture.path must be given")

    scene = _Section(parser, "scene")
    snr_raw = scene.str("snr_db")
    if snr_raw is None or snr_raw.lower() in ("inf", "+inf", "none", "off"):
        snr_db = None
    else:
        snr_db = scene.float("snr_db")
    ratio = scene.float("blade_body_ratio_db")
    seed = scene.int("seed")
    if seed is not None and seed < 0:
        raise ConfigError(f"scene.seed must be >= 0, got {seed}")

    pipe = _Section(parser, "pipeline")
    mode = pipe.str("mode", "proposed").replace("-", "_")
    if mode not in PIPELINES:
        raise ConfigError(f"pipeline.mode must be one of {', '.join(PIPELINES)}, got {mode!r}")
    spread = _positive(pipe, "expected_spread_hz", pipe.float("expected_spread_hz"), strict=False)
    target_range = _positive(pipe, "target_range_m", pipe.float("target_range_m"))
    range_bin = pipe.int("range_bin")
    if range_bin is not None and not 0 <= range_bin < radar.samples_per_chirp:
        raise ConfigError(f"pipeline.range_bin must lie in [0, {radar.samples_per_chirp}), got {range_bin}")

    st = _Section(parser, "stft")
    stft = StftConfig(
        window_length=_positive(st, "window_length", st.int("window_length", radar.samples_per_chirp)),
        overlap_fraction=st.float("overlap_fraction", 0.9),
        pad_factor=_positive(st, "pad_factor", st.int("pad_factor", 1)),
        slow_window_length=_positive(st, "slow_window_length", st.int("slow_window_length", 32)),
    )
    if not 0 <= stft.overlap_fraction < 1:
        raise ConfigError(f"stft.overlap_fraction must lie in [0, 1), got {stft.overlap_fraction}")

    sf = _Section(parser, "sift")
    defaults = SiftConfig()
    try:
        sift = SiftConfig(
            stop_threshold=sf.float("stop_threshold", defaults.stop_threshold),
            max_imfs=sf.int("max_imfs", defaults.max_imfs),
            num_directions=sf.int("num_directions", defaults.num_directions),
            min_extrema=sf.int("min_extrema", defaults.min_extrema),
            max_sift_iterations=sf.int("max_sift_iterations", defaults.max_sift_iterations),
        )
    except ValueError as exc:
        raise ConfigError(f"sift: {exc}") from None

    sel = _Section(parser, "selection")
    floor = _positive(sel, "amplitude_floor", sel.float("amplitude_floor", 0.1), strict=False)

    return RunConfig(
        radar=radar,
        target=target,
        snr_db=snr_db,
        blade_body_ratio_db=ratio,
        seed=seed,
        pipeline=mode,
        expected_spread_hz=spread,
        target_range_m=target_range,
        target_velocity_mps=pipe.float("target_velocity_mps"),
        range_bin=range_bin,
        demodulate=pipe.bool("demodulate", False),
        range_cutoff_hz=_positive(pipe, "range_cutoff_hz", pipe.float("range_cutoff_hz")),
        stft=stft,
        sift=sift,
        amplitude_floor=floor,
        capture_path=capture_path,
        capture_layout=layout,
        output_dir=Path(pipe.str("output_dir", "mdkit_out")),
    )


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(config: RunConfig, derived: dict | None = None) -> str:
    """Serialize ``config`` so that ``load_config`` reproduces it exactly.

    Floats are written with ``repr`` and angles in radians, so nothing is
    lost in the round trip. ``derived`` values go into a ``[derived]``
    section that the loader ignores.
    """
    r = config.radar
    lines = ["[radar]"]
    lines += [f"start_frequency_hz = {_fmt(r.start_frequency)}",
              f"chirp_rate_hz_per_s = {_fmt(r.chirp_rate)}",
              f"chirp_duration_s = {_fmt(r.chirp_duration)}",
              f"chirp_repetition_interval_s = {_fmt(r.chirp_repetition_interval)}",
              f"sample_rate_hz = {_fmt(r.sample_rate)}",
              f"num_chirps = {r.num_chirps}",
              f"propagation_speed_mps = {_fmt(r.propagation_speed)}"]
    if config.target is not None:
        t = config.target
        lines += ["", "[target]",
                  f"range_m = {_fmt(t.range)}",
                  f"radial_velocity_mps = {_fmt(t.radial_velocity)}",
                  f"body_amplitude = {_fmt(t.body_amplitude)}",
                  f"blade_amplitude = {_fmt(t.blade_amplitude)}",
                  f"num_blades = {t.num_blades}",
                  f"blade_length_m = {_fmt(t.blade_length)}",
                  f"rotation_rate_rad_s = {_fmt(t.rotation_rate)}",
                  f"initial_offsets_rad = {', '.join(_fmt(float(v)) for v in t.initial_offsets)}",
                  f"elevation_rad = {_fmt(t.elevation)}"]
    lines += ["", "[scene]",
              f"snr_db = {'inf' if config.snr_db is None else _fmt(config.snr_db)}"]
    if config.blade_body_ratio_db is not None:
        lines.append(f"blade_body_ratio_db = {_fmt(config.blade_body_ratio_db)}")
    if config.seed is not None:
        lines.append(f"seed = {config.seed}")
    lines += ["", "[pipeline]", f"mode = {config.pipeline}"]
    for key, value in (("expected_spread_hz", config.expected_spread_hz),
                       ("target_range_m", config.target_range_m),
                       ("target_velocity_mps", config.target_velocity_mps),
                       ("range_bin", config.range_bin),
                       ("range_cutoff_hz", config.range_cutoff_hz)):
        if value is not None:
            lines.append(f"{key} = {_fmt(value)}")
    lines += [f"demodulate = {_fmt(config.demodulate)}",
              f"output_dir = {config.output_dir}"]
    st = config.stft_config
    lines += ["", "[stft]",
              f"window_length = {st.window_length}",
              f"overlap_fraction = {_fmt(st.overlap_fraction)}",
              f"pad_factor = {st.pad_factor}",
              f"slow_window_length = {st.slow_window_length}"]
    sf = config.sift
    lines += ["", "[sift]",
              f"stop_threshold = {_fmt(sf.stop_threshold)}",
              f"max_imfs = {sf.max_imfs}",
              f"num_directions = {sf.num_directions}",
              f"min_extrema = {sf.min_extrema}",
              f"max_sift_iterations = {sf.max_sift_iterations}"]
    lines += ["", "[selection]", f"amplitude_floor = {_fmt(config.amplitude_floor)}"]
    if config.capture_path is not None:
        lay = config.capture_layout
        lines += ["", "[capture]",
                  f"path = {config.capture_path}",
                  f"num_chirps = {lay.num_chirps}",
                  f"samples_per_chirp = {lay.samples_per_chirp}",
                  f"iq_order = {lay.iq_order}",
                  f"sample_bytes = {lay.sample_bytes}",
                  f"byte_order = {lay.byte_order}"]
    if derived:
        lines += ["", "[derived]"]
        lines += [f"{key} = {_fmt(value)}" for key, value in derived.items()]
    return "\n".join(lines) + "\n"
