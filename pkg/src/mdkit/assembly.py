"""Analysis signals built from a CPI.

* slow-time extraction at one range bin (the conventional approach),
* per-sample demodulation by the body reference phase,
* fast-time appending of chirps, raw or with the idle gap bridged by a line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .radar_model import ChirpMatrix
from .spectral import range_dft


@dataclass
class FastTimeStream:
    """Chirps laid end to end at the fast-time rate.

    ``sample_times`` holds the acquisition time of each sample. For linearly
    fitted streams chirp samples sit at ``l*Tcri + k/fs`` and inserted samples
    are spread evenly across the idle interval; a raw stream has no notion of
    idle time, so its samples are simply ``j/fs``.
    """

    samples: np.ndarray
    sample_rate: float
    interp_mask: np.ndarray
    chirp_boundaries: np.ndarray
    sample_times: np.ndarray

    def __len__(self) -> int:
        return self.samples.shape[0]


def strongest_range_bin(chirps: ChirpMatrix) -> int:
    """Range bin with the largest mean magnitude across chirps."""
    return int(np.argmax(np.mean(np.abs(range_dft(chirps)), axis=0)))


def stmdse_extract(chirps: ChirpMatrix, range_bin: int | None = None) -> np.ndarray:
    """Slow-time sequence (one value per chirp) at ``range_bin``.

    Its sample rate is f_crf. Without an explicit bin the strongest one is used.
    """
    if range_bin is None:
        range_bin = strongest_range_bin(chirps)
    if not 0 <= range_bin < chirps.samples_per_chirp:
        raise ValueError(f"range_bin must lie in [0, {chirps.samples_per_chirp})")
    return range_dft(chirps)[:, range_bin]


def ftmdse_demodulate(chirps: ChirpMatrix, range_m: float, velocity: float) -> ChirpMatrix:
    """Remove the body phase so the residual signature sits at baseband."""
    p = chirps.params
    c = p.propagation_speed
    t = p.fast_time()
    t_abs = t + np.arange(chirps.num_chirps)[:, None] * p.chirp_repetition_interval
    k = 4.0 * math.pi / p.wavelength + 4.0 * math.pi * p.chirp_rate * t / c
    reference = np.exp(1j * k * (range_m + velocity * t_abs))
    return ChirpMatrix(samples=chirps.samples * np.conj(reference), params=p)


def append_raw(chirps: ChirpMatrix) -> FastTimeStream:
    L, N = chirps.samples.shape
    fs = chirps.params.sample_rate
    return FastTimeStream(
        samples=chirps.samples.reshape(-1).copy(),
        sample_rate=fs,
        interp_mask=np.zeros(L * N, dtype=bool),
        chirp_boundaries=np.arange(L) * N,
        sample_times=np.arange(L * N) / fs,
    )


def append_with_linear_fit(chirps: ChirpMatrix) -> FastTimeStream:
    """Append chirps, bridging each idle gap with Q samples on a straight line.

    Inserted sample ``n`` (``0 <= n < Q``) between chirps ``l`` and ``l+1`` is
    ``y_l[N-1] + (y_{l+1}[0] - y_l[N-1]) * n / Q``; the line starts on the last
    sample of chirp ``l`` and would reach the next chirp's first sample at
    ``n = Q``. Real and imaginary parts are interpolated independently.
    """
    p = chirps.params
    Q = p.idle_samples
    if Q < 1:
        return append_raw(chirps)
    L, N = chirps.samples.shape
    fs = p.sample_rate
    stride = N + Q
    total = L * N + (L - 1) * Q

    samples = np.empty(total, dtype=complex)
    mask = np.zeros(total, dtype=bool)
    times = np.empty(total)
    starts = np.arange(L) * stride

    chirp_pos = starts[:, None] + np.arange(N)
    samples[chirp_pos] = chirps.samples
    times[chirp_pos] = np.arange(L)[:, None] * p.chirp_repetition_interval + np.arange(N) / fs

    if L > 1:
        first = chirps.samples[:-1, -1][:, None]
        last = chirps.samples[1:, 0][:, None]
        frac = np.arange(Q) / Q
        gap_pos = starts[:-1, None] + N + np.arange(Q)
        samples[gap_pos] = first + (last - first) * frac
        mask[gap_pos] = True
        idle = p.chirp_repetition_interval - N / fs
        times[gap_pos] = (np.arange(L - 1)[:, None] * p.chirp_repetition_interval
                          + N / fs + idle * frac)

    return FastTimeStream(samples=samples, sample_rate=fs, interp_mask=mask,
                          chirp_boundaries=starts, sample_times=times)
