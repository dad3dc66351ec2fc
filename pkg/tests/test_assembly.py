import math

import numpy as np
import pytest

from mdkit.assembly import (append_raw, append_with_linear_fit, ftmdse_demodulate,
                            stmdse_extract, strongest_range_bin)
from mdkit.radar_model import ChirpMatrix, RadarParams, synth_scene
from mdkit.spectral import frame_period, spectrogram

from _helpers import inst_freq, point, rotor, table1


def tiny_params(idle_samples=2):
    # N = 4, Q = idle_samples, unit sample rate
    return RadarParams(start_frequency=1.0, chirp_rate=1.0, chirp_duration=4.0,
                       chirp_repetition_interval=4.0 + idle_samples, sample_rate=1.0, num_chirps=2)


# --- slow time ---------------------------------------------------------------

def test_strongest_range_bin_is_body(params):
    assert strongest_range_bin(synth_scene(params, point())) == 137


def test_stationary_body_slow_time_is_constant(params):
    x = stmdse_extract(synth_scene(params, point()))
    assert len(x) == params.num_chirps
    np.testing.assert_allclose(x, x[0], rtol=1e-9)


def test_stmdse_range_bin_checked(params):
    with pytest.raises(ValueError):
        stmdse_extract(synth_scene(params, point()), 512)


def _slow_time_ridge(rpm):
    p = table1(1024)
    tg = rotor(rpm=rpm, body=0.0, blade=1.0)
    x = stmdse_extract(synth_scene(p, tg), 137)
    spec = spectrogram(x, p.chirp_repetition_frequency, 32, 0.9, centered=True)
    return p, tg, spec


def test_slow_rotor_flashes_stay_in_band():
    p, tg, spec = _slow_time_ridge(600)
    peak_doppler = 2 * tg.blade_length * tg.rotation_rate / p.wavelength
    assert peak_doppler < p.chirp_repetition_frequency / 2
    binw = spec.freq_axis[1] - spec.freq_axis[0]
    assert np.all(np.abs(spec.ridge()) <= peak_doppler + binw)
    assert np.all(np.abs(np.diff(spec.ridge())) < p.chirp_repetition_frequency / 2)


def test_fast_rotor_slow_time_wraps():
    p, _, spec = _slow_time_ridge(6000)
    assert np.any(np.abs(np.diff(spec.ridge())) > p.chirp_repetition_frequency / 2)


# --- demodulation ----------------------------------------------------------------

def test_demodulated_body_is_constant(params):
    out = ftmdse_demodulate(synth_scene(params, point(velocity=2.0)), 20.0, 2.0)
    np.testing.assert_allclose(out.samples, 1.0, atol=1e-9)


def test_range_error_leaves_residual_tone(params):
    delta = 0.3
    out = ftmdse_demodulate(synth_scene(params, point(20.0 + delta)), 20.0, 0.0)
    f = inst_freq(out.samples[0], params.sample_rate)
    assert np.mean(f) == pytest.approx(2 * params.chirp_rate * delta / params.propagation_speed, rel=1e-6)


def test_demodulated_rotor_centred_at_zero(params):
    cm = synth_scene(params, rotor(), None, -6.0)
    plain = append_raw(cm)
    demod = append_raw(ftmdse_demodulate(cm, 20.0, 0.0))
    a = spectrogram(plain.samples, params.sample_rate, 512, 0.9, centered=True)
    b = spectrogram(demod.samples, params.sample_rate, 512, 0.9, centered=True)
    assert np.mean(a.ridge()) == pytest.approx(params.beat_frequency(20.0), abs=params.range_bin_width_hz)
    assert abs(np.mean(b.ridge())) <= params.range_bin_width_hz


# --- raw appending -----------------------------------------------------------------

def test_raw_append_repeats_identical_rows():
    row = np.array([1, 2j, -1, 3 + 1j])
    stream = append_raw(ChirpMatrix(np.vstack([row, row]), tiny_params()))
    np.testing.assert_array_equal(stream.samples, np.concatenate([row, row]))
    assert not stream.interp_mask.any()
    assert list(stream.chirp_boundaries) == [0, 4]


def test_raw_append_length(params):
    stream = append_raw(synth_scene(params, point()))
    assert len(stream) == params.num_chirps * params.samples_per_chirp
    assert stream.sample_rate == params.sample_rate


def test_raw_append_has_boundary_excursions(params):
    stream = append_raw(synth_scene(params, point(2.0)))
    f = inst_freq(stream.samples, params.sample_rate)
    at_boundary = np.abs(f[stream.chirp_boundaries[1:] - 1])
    inside = np.abs(f[stream.chirp_boundaries[1:] - 2])
    assert np.median(at_boundary) > 5 * np.median(inside)


def test_raw_stream_period_is_chirp_duration(params):
    stream = append_raw(synth_scene(params, point()))
    spec = spectrogram(stream.samples, params.sample_rate, 64, 0.5)
    assert frame_period(spec, 50e-6, 300e-6) == pytest.approx(params.chirp_duration, rel=0.005)


# --- linear fitting ---------------------------------------------------------------

def test_linear_fit_worked_example():
    chirps = np.array([[9, 9, 9, 0], [1 + 1j, 5, 5, 5]], dtype=complex)
    stream = append_with_linear_fit(ChirpMatrix(chirps, tiny_params(2)))
    np.testing.assert_array_equal(stream.samples[4:6], [0, 0.5 + 0.5j])
    np.testing.assert_array_equal(stream.interp_mask, [0, 0, 0, 0, 1, 1, 0, 0, 0, 0])
    assert list(stream.chirp_boundaries) == [0, 6]


def test_linear_fit_lengths_and_mask(params):
    stream = append_with_linear_fit(synth_scene(params, point()))
    L, N, Q = params.num_chirps, params.samples_per_chirp, params.idle_samples
    assert len(stream) == L * N + (L - 1) * Q
    assert stream.interp_mask.sum() == (L - 1) * Q


def test_linear_fit_keeps_chirp_samples_in_order(params):
    cm = synth_scene(params, rotor(), 5.0, -6.0, seed=3)
    fit = append_with_linear_fit(cm)
    np.testing.assert_array_equal(fit.samples[~fit.interp_mask], append_raw(cm).samples)


def test_linear_fit_boundary_continuity():
    rng = np.random.default_rng(0)
    p = RadarParams(1.0, 1.0, 16.0, 21.0, 1.0, 6)
    cm = ChirpMatrix(rng.standard_normal((6, 16)) + 1j * rng.standard_normal((6, 16)), p)
    stream = append_with_linear_fit(cm)
    Q = p.idle_samples
    for l in range(5):
        gap = stream.samples[l * 21 + 16:l * 21 + 16 + Q]
        assert gap[0] == cm.samples[l, -1]
        step = gap[1] - gap[0]
        np.testing.assert_allclose(gap[0] + Q * step, cm.samples[l + 1, 0], atol=1e-12)


def test_linear_fit_without_idle_time_is_raw():
    p = RadarParams(1.0, 1.0, 8.0, 8.0, 1.0, 3)
    cm = ChirpMatrix(np.arange(24, dtype=complex).reshape(3, 8), p)
    fit, raw = append_with_linear_fit(cm), append_raw(cm)
    np.testing.assert_array_equal(fit.samples, raw.samples)
    assert not fit.interp_mask.any()


def test_sample_times(params):
    stream = append_with_linear_fit(synth_scene(params, point()))
    N, Q = params.samples_per_chirp, params.idle_samples
    k, l = 17, 9
    assert stream.sample_times[l * (N + Q) + k] == pytest.approx(
        l * params.chirp_repetition_interval + k / params.sample_rate)
    gap = stream.sample_times[N:N + Q]
    assert gap[0] == pytest.approx(N / params.sample_rate)
    assert np.all(np.diff(stream.sample_times) > 0)
    assert stream.sample_times[N + Q] == pytest.approx(params.chirp_repetition_interval)


def test_idle_segments_are_low_frequency(params):
    stream = append_with_linear_fit(synth_scene(params, point(2.0)))
    f = np.abs(inst_freq(stream.samples, params.sample_rate))
    gap = stream.interp_mask[:-1] & stream.interp_mask[1:]
    raw = append_raw(synth_scene(params, point(2.0)))
    boundary = np.abs(inst_freq(raw.samples, params.sample_rate))[raw.chirp_boundaries[1:] - 1]
    assert np.median(f[gap]) < np.median(boundary) / 5


def test_fitted_stream_period_is_repetition_interval(params):
    stream = append_with_linear_fit(synth_scene(params, point()))
    spec = spectrogram(stream.samples, params.sample_rate, 64, 0.5)
    period = frame_period(spec, 50e-6, 300e-6)
    stride = (params.samples_per_chirp + params.idle_samples) / params.sample_rate
    assert period == pytest.approx(stride, rel=0.015)
    assert abs(period - params.chirp_duration) > abs(period - stride)


def test_blade_period_on_acquisition_timeline(params):
    tg = rotor(num_blades=1, body=0.0, blade=1.0, offsets=(1.0,))
    stream = append_with_linear_fit(synth_scene(params, tg))
    spec = spectrogram(stream.samples, params.sample_rate, 512, 0.9, times=stream.sample_times)
    period = frame_period(spec, 0.5e-3, 12e-3, synchronous_period=params.chirp_repetition_interval)
    assert period == pytest.approx(2 * math.pi / tg.rotation_rate, rel=0.02)
