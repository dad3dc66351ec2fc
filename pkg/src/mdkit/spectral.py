"""Fast/slow-time DFTs, range-Doppler maps and STFT spectrograms.

Scaling: forward transforms are unnormalized, inverse transforms carry the
1/(N*L) factor (numpy's default convention).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import windows

from .radar_model import ChirpMatrix, RadarParams

DB_FLOOR = -120.0


@dataclass
class RDMap:
    """Complex range-Doppler map, rows are Doppler bins (centred), columns range bins."""

    values: np.ndarray
    range_axis: np.ndarray
    doppler_axis: np.ndarray
    params: RadarParams

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


@dataclass
class Spectrogram:
    magnitude_db: np.ndarray
    frame_times: np.ndarray
    freq_axis: np.ndarray
    window_length: int
    hop: int

    @property
    def num_frames(self) -> int:
        return self.magnitude_db.shape[0]

    def ridge(self) -> np.ndarray:
        """Frequency of the strongest bin in every frame (Hz)."""
        return self.freq_axis[np.argmax(self.magnitude_db, axis=1)]


def range_axis(params: RadarParams, n_bins: int | None = None) -> np.ndarray:
    n = params.samples_per_chirp if n_bins is None else n_bins
    return np.arange(n) * params.sample_rate / n


def doppler_axis(params: RadarParams, n_bins: int | None = None) -> np.ndarray:
    n = params.num_chirps if n_bins is None else n_bins
    return (np.arange(n) - n // 2) * params.chirp_repetition_frequency / n


def range_dft(chirps: ChirpMatrix, pad_factor: int = 1) -> np.ndarray:
    """Per-chirp DFT with a rectangular window; optional zero padding."""
    n = chirps.samples_per_chirp * pad_factor
    return np.fft.fft(chirps.samples, n=n, axis=1)


def rd_map(chirps: ChirpMatrix) -> RDMap:
    if chirps.num_chirps < 2:
        raise ValueError("rd_map needs at least two chirps")
    values = np.fft.fftshift(np.fft.fft(range_dft(chirps), axis=0), axes=0)
    return RDMap(
        values=values,
        range_axis=range_axis(chirps.params, values.shape[1]),
        doppler_axis=doppler_axis(chirps.params, values.shape[0]),
        params=chirps.params,
    )


def rd_peak(rdmap: RDMap) -> tuple[float, float, float]:
    """Global magnitude maximum as ``(range_hz, doppler_hz, magnitude)``.

    Ties go to the lowest range bin, then the lowest Doppler bin.
    """
    mag = rdmap.magnitude
    if mag.size == 0:
        raise ValueError("empty RD map")
    doppler_bins, range_bins = np.nonzero(mag == mag.max())
    order = np.lexsort((doppler_bins, range_bins))
    d, r = doppler_bins[order[0]], range_bins[order[0]]
    return float(rdmap.range_axis[r]), float(rdmap.doppler_axis[d]), float(mag[d, r])


def inverse_rd(rdmap: RDMap) -> ChirpMatrix:
    samples = np.fft.ifft2(np.fft.ifftshift(rdmap.values, axes=0))
    return ChirpMatrix(samples=samples, params=rdmap.params)


def spectrogram(signal, sample_rate: float, window_length: int, overlap_fraction: float,
                pad_factor: int = 1, times: np.ndarray | None = None,
                centered: bool = False) -> Spectrogram:
    """Hann-windowed STFT magnitude in dB.

    For complex input the frequency axis spans ``[0, sample_rate)``, or
    ``[-sample_rate/2, sample_rate/2)`` with ``centered`` (useful for
    slow-time Doppler); for real input only the one-sided half is returned.
    ``times`` optionally gives the acquisition time of every sample, in which
    case each frame is stamped with the time of its centre sample.
    """
    x = np.asarray(signal)
    window_length = int(window_length)
    if not 0 <= overlap_fraction < 1:
        raise ValueError(f"overlap_fraction must lie in [0, 1), got {overlap_fraction}")
    if window_length < 1:
        raise ValueError("window_length must be >= 1")
    if x.shape[0] < window_length:
        raise ValueError(f"signal of length {x.shape[0]} is shorter than the window ({window_length})")

    hop = max(1, int(round(window_length * (1.0 - overlap_fraction))))
    n_frames = (x.shape[0] - window_length) // hop + 1
    nfft = window_length * pad_factor
    win = windows.hann(window_length, sym=False)

    frames = np.lib.stride_tricks.sliding_window_view(x, window_length)[::hop][:n_frames]
    if np.iscomplexobj(x):
        spec = np.fft.fft(frames * win, n=nfft, axis=1)
        freqs = np.arange(nfft) * sample_rate / nfft
        if centered:
            spec = np.fft.fftshift(spec, axes=1)
            freqs = (np.arange(nfft) - nfft // 2) * sample_rate / nfft
    else:
        spec = np.fft.rfft(frames * win, n=nfft, axis=1)
        freqs = np.fft.rfftfreq(nfft, 1.0 / sample_rate)

    mag_db = 20.0 * np.log10(np.maximum(np.abs(spec), 10.0 ** (DB_FLOOR / 20.0)))
    centres = np.arange(n_frames) * hop + window_length // 2
    if times is None:
        frame_times = centres / sample_rate
    else:
        frame_times = np.asarray(times)[centres]
    return Spectrogram(magnitude_db=mag_db, frame_times=frame_times, freq_axis=freqs,
                       window_length=window_length, hop=hop)


def frame_period(spec: Spectrogram, min_period: float, max_period: float,
                 freq_band: tuple[float, float] | None = None, threshold: float = 0.8,
                 synchronous_period: float | None = None, phase_bins: int = 32) -> float:
    """Repetition period (s) of a spectrogram's time-varying content.

    Frame spectra (linear magnitude, optionally limited to ``freq_band``)
    have their mean removed, are resampled onto a uniform time grid and
    autocorrelated. The result is the shortest lag in
    ``[min_period, max_period]`` whose autocorrelation is a local maximum of
    at least ``threshold`` times the largest value in that range, refined by
    a parabolic fit. Returns NaN when no such peak exists or the spectra
    do not vary over time.

    With ``synchronous_period`` (typically Tcri) the mean is taken per phase
    class instead: frames are grouped into ``phase_bins`` classes by
    ``frame_time mod synchronous_period`` and each class's average spectrum
    is subtracted, which removes content locked to the chirp grid.
    """
    if not 0 < min_period < max_period:
        raise ValueError("need 0 < min_period < max_period")
    mag = 10.0 ** (spec.magnitude_db / 20.0)
    if freq_band is not None:
        keep = (spec.freq_axis >= freq_band[0]) & (spec.freq_axis <= freq_band[1])
        mag = mag[:, keep]
    t = spec.frame_times
    total = float(np.sum(mag**2))
    if synchronous_period is None:
        mag = mag - mag.mean(axis=0)
    else:
        phase = np.floor((t % synchronous_period) / synchronous_period * phase_bins).astype(int)
        mag = mag.copy()
        for k in np.unique(phase):
            members = phase == k
            mag[members] -= mag[members].mean(axis=0)
    if t.shape[0] < 4 or not np.sum(mag**2) > 1e-12 * total:
        return math.nan
    step = float(np.median(np.diff(t)))
    grid = np.arange(t[0], t[-1], step)
    g = np.column_stack([np.interp(grid, t, mag[:, j]) for j in range(mag.shape[1])])
    n = g.shape[0]
    spectrum = np.fft.rfft(g, n=2 * n, axis=0)
    ac = np.fft.irfft(np.abs(spectrum) ** 2, axis=0)[:n].sum(axis=1)
    ac = ac / (n - np.arange(n))
    if not ac[0] > 0:
        return math.nan
    ac = ac / ac[0]

    lo = max(1, int(math.ceil(min_period / step)))
    hi = min(n - 2, int(math.floor(max_period / step)))
    if hi <= lo:
        return math.nan
    window = ac[lo:hi + 1]
    peak = window.max()
    for k in range(lo, hi + 1):
        if ac[k] >= ac[k - 1] and ac[k] >= ac[k + 1] and ac[k] >= threshold * peak:
            denom = ac[k - 1] - 2 * ac[k] + ac[k + 1]
            shift = 0.5 * (ac[k - 1] - ac[k + 1]) / denom if denom != 0 else 0.0
            return (k + shift) * step
    return math.nan
