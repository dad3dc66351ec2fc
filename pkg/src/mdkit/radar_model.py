"""FMCW signal model for a body with rotating blades.

All synthesized signals use the ``+j`` phase convention

    y(t) = alpha * exp(+j * (4*pi/lambda + 4*pi*mu*t/c) * (R0 + v0*t_abs))

so a target at range ``R0`` appears at the positive beat frequency
``2*mu*R0/c`` after a standard (``exp(-j...)`` kernel) DFT.

Chirp indices are zero-based: sample ``n`` of chirp ``l`` is taken at
absolute time ``l*Tcri + n/fs``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

SPEED_OF_LIGHT = 2.998e8


def rpm_to_rad_s(rpm: float) -> float:
    return rpm * 2.0 * math.pi / 60.0


def evenly_spaced_offsets(num_blades: int, phase: float = 0.0) -> tuple[float, ...]:
    """Blade offset angles for a rotor whose blades are equally spaced."""
    return tuple(phase + 2.0 * math.pi * b / num_blades for b in range(num_blades))


@dataclass(frozen=True)
class RadarParams:
    """Chirp timing and frequency plan of the FMCW waveform.

    Attributes:
        start_frequency: f0 in Hz.
        chirp_rate: mu in Hz/s.
        chirp_duration: Tc in s.
        chirp_repetition_interval: Tcri in s (chirp plus idle time).
        sample_rate: fast-time ADC rate fs in Hz.
        num_chirps: chirps per CPI, L.
        propagation_speed: c in m/s.
    """

    start_frequency: float
    chirp_rate: float
    chirp_duration: float
    chirp_repetition_interval: float
    sample_rate: float
    num_chirps: int
    propagation_speed: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if not self.chirp_duration > 0:
            raise ValueError(f"chirp_duration must be > 0, got {self.chirp_duration}")
        if self.chirp_repetition_interval < self.chirp_duration:
            raise ValueError(
                "chirp_repetition_interval must be >= chirp_duration "
                f"(got chirp_repetition_interval={self.chirp_repetition_interval}, "
                f"chirp_duration={self.chirp_duration})"
            )
        for name in ("start_frequency", "chirp_rate", "sample_rate", "propagation_speed"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be > 0, got {value}")
        if int(self.num_chirps) != self.num_chirps or self.num_chirps < 1:
            raise ValueError(f"num_chirps must be an integer >= 1, got {self.num_chirps}")
        if self.samples_per_chirp < 1:
            raise ValueError(
                f"chirp_duration * sample_rate rounds to {self.samples_per_chirp} samples"
            )

    @property
    def bandwidth(self) -> float:
        return self.chirp_rate * self.chirp_duration

    @property
    def wavelength(self) -> float:
        return self.propagation_speed / self.start_frequency

    @property
    def samples_per_chirp(self) -> int:
        return int(round(self.chirp_duration * self.sample_rate))

    @property
    def idle_samples(self) -> int:
        return int(round((self.chirp_repetition_interval - self.chirp_duration) * self.sample_rate))

    @property
    def chirp_repetition_frequency(self) -> float:
        return 1.0 / self.chirp_repetition_interval

    @property
    def range_bin_size(self) -> float:
        return self.propagation_speed / (2.0 * self.bandwidth)

    @property
    def range_bin_width_hz(self) -> float:
        return self.sample_rate / self.samples_per_chirp

    @property
    def doppler_bin_width_hz(self) -> float:
        return self.chirp_repetition_frequency / self.num_chirps

    def fast_time(self) -> np.ndarray:
        return np.arange(self.samples_per_chirp) / self.sample_rate

    def beat_frequency(self, range_m: float) -> float:
        """Range beat frequency 2*mu*R/c."""
        return 2.0 * self.chirp_rate * range_m / self.propagation_speed

    def doppler_frequency(self, velocity: float) -> float:
        """Doppler frequency 2*v*f0/c."""
        return 2.0 * velocity * self.start_frequency / self.propagation_speed

    def range_from_beat(self, beat_hz: float) -> float:
        return beat_hz * self.propagation_speed / (2.0 * self.chirp_rate)

    def velocity_from_doppler(self, doppler_hz: float) -> float:
        return doppler_hz * self.propagation_speed / (2.0 * self.start_frequency)


@dataclass(frozen=True)
class RotorTarget:
    """Point body plus a rotor of identical rigid blades.

    ``rotation_rate`` is in rad/s. ``num_blades == 0`` is a plain point target.
    """

    range: float
    radial_velocity: float = 0.0
    body_amplitude: complex = 1.0
    blade_amplitude: complex = 0.0
    num_blades: int = 0
    blade_length: float = 0.0
    rotation_rate: float = 0.0
    initial_offsets: tuple[float, ...] = field(default_factory=tuple)
    elevation: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "initial_offsets", tuple(float(p) for p in self.initial_offsets))
        if not self.range > 0:
            raise ValueError(f"range must be > 0, got {self.range}")
        if int(self.num_blades) != self.num_blades or self.num_blades < 0:
            raise ValueError(f"num_blades must be an integer >= 0, got {self.num_blades}")
        if self.blade_length < 0:
            raise ValueError(f"blade_length must be >= 0, got {self.blade_length}")
        if self.rotation_rate < 0:
            raise ValueError(f"rotation_rate must be >= 0, got {self.rotation_rate}")
        if len(self.initial_offsets) != self.num_blades:
            raise ValueError(
                f"initial_offsets has {len(self.initial_offsets)} entries, "
                f"expected num_blades={self.num_blades}"
            )


@dataclass
class ChirpMatrix:
    """Deramped CPI: ``samples[l, n]`` is sample ``n`` of chirp ``l``."""

    samples: np.ndarray
    params: RadarParams

    @property
    def num_chirps(self) -> int:
        return self.samples.shape[0]

    @property
    def samples_per_chirp(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class AliasReport:
    """Where the micro-Doppler spread lands relative to the sampling limits.

    Each flag has a companion excess in Hz (positive means the flag is set),
    so two scenes can be ranked by how badly they violate each limit.
    """

    spread_hz: float
    slow_time_aliased: bool
    range_spread: bool
    doppler_spread: bool
    fast_time_ok: bool
    slow_time_excess_hz: float
    range_spread_excess_hz: float
    doppler_spread_excess_hz: float
    fast_time_excess_hz: float


def _chirp_index_check(params: RadarParams, chirp_index) -> None:
    idx = np.asarray(chirp_index)
    if np.any(idx < 0) or np.any(idx >= params.num_chirps):
        raise ValueError(f"chirp_index must lie in [0, {params.num_chirps})")


def _absolute_time(params: RadarParams, t, chirp_index):
    return t + chirp_index * params.chirp_repetition_interval


def _wavenumber(params: RadarParams, t):
    """4*pi/lambda + 4*pi*mu*t/c, the fast-time dependent two-way wavenumber."""
    c = params.propagation_speed
    return 4.0 * math.pi * params.start_frequency / c + 4.0 * math.pi * params.chirp_rate * t / c


def _point_response(params, range_m, velocity, amplitude, chirp_index):
    t = params.fast_time()
    t_abs = _absolute_time(params, t, chirp_index)
    return amplitude * np.exp(1j * _wavenumber(params, t) * (range_m + velocity * t_abs))


def _blade_response(params, target, blade_index, chirp_index):
    t = params.fast_time()
    t_abs = _absolute_time(params, t, chirp_index)
    k = _wavenumber(params, t)
    omega = target.rotation_rate * t_abs + target.initial_offsets[blade_index]
    half_projection = 0.5 * target.blade_length * math.cos(target.elevation) * np.cos(omega)
    phase = k * (target.range + target.radial_velocity * t_abs + half_projection)
    # np.sinc is sin(pi x)/(pi x); rescale to the unnormalized sin(x)/x
    envelope = np.sinc(k * half_projection / math.pi)
    return target.blade_length * target.blade_amplitude * np.exp(1j * phase) * envelope


def synth_point_target(params: RadarParams, range_m: float, velocity: float,
                       amplitude: complex, chirp_index: int) -> np.ndarray:
    """Deramped response of one point scatterer for a single chirp.

    The quadratic ``pi*mu*tau**2`` term is neglected.

    Raises:
        ValueError: if ``2*mu*R/c >= fs/2`` or the chirp index is out of range.
    """
    _chirp_index_check(params, chirp_index)
    beat = params.beat_frequency(range_m)
    if beat >= params.sample_rate / 2:
        raise ValueError(
            f"range {range_m} m gives beat frequency {beat:.6g} Hz >= fs/2 = {params.sample_rate / 2:.6g} Hz"
        )
    return _point_response(params, range_m, velocity, amplitude, chirp_index)


def synth_blade_response(params: RadarParams, target: RotorTarget, blade_index: int,
                         chirp_index: int) -> np.ndarray:
    """Sinc-weighted FM response of one blade integrated along its length."""
    if not 0 <= blade_index < target.num_blades:
        raise ValueError(f"blade_index must lie in [0, {target.num_blades})")
    _chirp_index_check(params, chirp_index)
    return _blade_response(params, target, blade_index, chirp_index)


def blade_amplitude_for_ratio(target: RotorTarget, ratio_db: float) -> complex:
    """Per-metre blade reflectivity whose peak response sits ``ratio_db`` below the body."""
    if target.blade_length == 0:
        return 0.0
    return target.body_amplitude * 10.0 ** (ratio_db / 20.0) / target.blade_length


def synth_scene(params: RadarParams, target: RotorTarget, snr_db: float | None = None,
                blade_body_ratio_db: float | None = None, seed: int | None = None) -> ChirpMatrix:
    """Full CPI for one rotor target plus complex white Gaussian noise.

    The SNR is body power over per-sample noise power. A blade's peak response
    (sinc at its maximum) is set ``blade_body_ratio_db`` relative to the body;
    when that ratio is None the target's own ``blade_amplitude`` is used.
    ``snr_db`` of None or +inf disables noise.
    """
    if blade_body_ratio_db is not None:
        blade_amp = blade_amplitude_for_ratio(target, blade_body_ratio_db)
        target = replace(target, blade_amplitude=blade_amp)

    chirp_index = np.arange(params.num_chirps)[:, None]
    samples = _point_response(params, target.range, target.radial_velocity,
                              target.body_amplitude, chirp_index)
    for b in range(target.num_blades):
        samples = samples + _blade_response(params, target, b, chirp_index)

    if snr_db is not None and math.isfinite(snr_db):
        rng = np.random.default_rng(seed)
        noise_power = abs(target.body_amplitude) ** 2 / 10.0 ** (snr_db / 10.0)
        scale = math.sqrt(noise_power / 2.0)
        noise = rng.standard_normal(samples.shape) + 1j * rng.standard_normal(samples.shape)
        samples = samples + scale * noise
    return ChirpMatrix(samples=samples, params=params)


def md_instantaneous_freq(params: RadarParams, target: RotorTarget, blade_index: int,
                          t, chirp_index) -> np.ndarray | float:
    """Blade instantaneous frequency (Hz) at fast time ``t`` of chirp ``chirp_index``.

    Vectorizes over ``t`` and ``chirp_index`` by broadcasting.
    """
    c = params.propagation_speed
    mu = params.chirp_rate
    t = np.asarray(t, dtype=float)
    t_abs = _absolute_time(params, t, np.asarray(chirp_index))
    omega = target.rotation_rate * t_abs + target.initial_offsets[blade_index]
    cos_b = math.cos(target.elevation)
    f = (params.beat_frequency(target.range)
         + params.doppler_frequency(target.radial_velocity)
         + (2.0 * target.blade_length * mu * cos_b / c)
         * (np.cos(omega) - t * target.rotation_rate * np.sin(omega))
         + (2.0 * mu / c) * target.radial_velocity * t_abs
         - (2.0 * target.blade_length * target.rotation_rate * cos_b / params.wavelength) * np.sin(omega))
    return f if f.ndim else float(f)


def md_max_spread(params: RadarParams, target: RotorTarget) -> float:
    """Closed-form micro-Doppler spread (2*L_B*Omega/c) * (mu*Tc + f0), in Hz."""
    return (2.0 * target.blade_length * target.rotation_rate / params.propagation_speed
            * (params.chirp_rate * params.chirp_duration + params.start_frequency))


def alias_report(params: RadarParams, target: RotorTarget) -> AliasReport:
    spread = md_max_spread(params, target)
    f_crf = params.chirp_repetition_frequency
    f_d0 = params.doppler_frequency(target.radial_velocity)
    f_r_max = params.beat_frequency(target.range) + f_d0

    slow_excess = abs(f_d0) + spread / 2 - f_crf / 2
    range_excess = spread - params.chirp_rate / params.bandwidth
    doppler_excess = spread - f_crf / params.num_chirps
    fast_excess = f_r_max + spread / 2 - params.sample_rate / 2
    return AliasReport(
        spread_hz=spread,
        slow_time_aliased=slow_excess > 0,
        range_spread=range_excess > 0,
        doppler_spread=doppler_excess > 0,
        fast_time_ok=fast_excess < 0,
        slow_time_excess_hz=slow_excess,
        range_spread_excess_hz=range_excess,
        doppler_spread_excess_hz=doppler_excess,
        fast_time_excess_hz=fast_excess,
    )
