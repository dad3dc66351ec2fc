"""Real and complex empirical mode decomposition, IMF statistics and selection.

The complex variant builds its sifting mean from ``K`` directional envelopes:
for each direction the signal is projected onto ``exp(j*phi_k)``, and the
complex signal itself is spline-interpolated through the projection's maxima.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _envelope

logger = logging.getLogger(__name__)

SD_FLOOR = 1e-12


class NoExtremaError(ValueError):
    """The signal has too few extrema to build an envelope."""


class NoSignatureError(RuntimeError):
    """No IMF passed the selection criteria."""


@dataclass(frozen=True)
class SiftConfig:
    """Sifting controls.

    Attributes:
        stop_threshold: gamma, bound on the summed squared relative change
            between consecutive sifting iterates.
        max_imfs: stop after this many IMFs.
        num_directions: projection directions K for the complex variant.
        min_extrema: a residue with fewer extrema is not decomposed further.
        max_sift_iterations: hard cap on sifting iterations per IMF.
    """

    stop_threshold: float = 0.2
    max_imfs: int = 4
    num_directions: int = 8
    min_extrema: int = 2
    max_sift_iterations: int = 50

    def __post_init__(self):
        if not self.stop_threshold > 0:
            raise ValueError(f"stop_threshold must be > 0, got {self.stop_threshold}")
        if self.max_imfs < 1:
            raise ValueError(f"max_imfs must be >= 1, got {self.max_imfs}")
        if self.num_directions < 4:
            raise ValueError(f"num_directions must be >= 4, got {self.num_directions}")
        if self.min_extrema < 2:
            raise ValueError(f"min_extrema must be >= 2, got {self.min_extrema}")
        if self.max_sift_iterations < 1:
            raise ValueError(f"max_sift_iterations must be >= 1, got {self.max_sift_iterations}")


@dataclass
class IMF:
    values: np.ndarray
    index: int
    sift_iterations: int = 0


@dataclass
class Decomposition:
    imfs: list[IMF]
    residue: np.ndarray
    input_len: int

    def reconstruction(self) -> np.ndarray:
        return sum((imf.values for imf in self.imfs), np.zeros_like(self.residue)) + self.residue


@dataclass
class ImfStats:
    index: int
    mean_inst_freq: float
    freq_deviation: float
    std_inst_freq: float
    selected: bool
    num_samples: int = field(default=0)


def sd_criterion(previous: np.ndarray, current: np.ndarray) -> float:
    """Summed squared change relative to the current iterate, denominator floored."""
    previous = np.ascontiguousarray(previous, dtype=complex)
    current = np.ascontiguousarray(current, dtype=complex)
    return float(_envelope.sd_sum(previous, current, SD_FLOOR))


def is_imf(x: np.ndarray) -> bool:
    """Zero crossings and extrema differ by at most one."""
    n_max, n_min, n_zc = _envelope.count_extrema(np.ascontiguousarray(x, dtype=float))
    return abs(n_zc - (n_max + n_min)) <= 1


def _real_enough_extrema(x: np.ndarray, config: SiftConfig) -> bool:
    n_max, n_min, _ = _envelope.count_extrema(x)
    return n_max + n_min >= config.min_extrema and n_max >= 2 and n_min >= 2


def sift_real(signal, config: SiftConfig = SiftConfig()) -> Decomposition:
    """EMD of a real sequence.

    Each IMF is sifted until the SD criterion drops below ``stop_threshold``
    and the zero-crossing/extrema balance holds, or ``max_sift_iterations``
    is reached. Inputs shorter than 8 samples, or without enough extrema,
    come back as a bare residue.
    """
    x = np.ascontiguousarray(signal, dtype=float)
    residue = x.copy()
    imfs: list[IMF] = []
    if x.shape[0] < 8:
        return Decomposition(imfs=imfs, residue=residue, input_len=x.shape[0])

    while len(imfs) < config.max_imfs and _real_enough_extrema(residue, config):
        b = residue.copy()
        iterations = 0
        for iterations in range(1, config.max_sift_iterations + 1):
            mean, ok = _envelope.real_envelope_mean(b, 2)
            if not ok:
                iterations -= 1
                break
            b_next = b - mean
            sd = sd_criterion(b, b_next)
            b = b_next
            if sd < config.stop_threshold and is_imf(b):
                break
        else:
            if not is_imf(b):
                logger.warning("IMF %d hit max_sift_iterations without meeting the IMF criterion",
                               len(imfs) + 1)
        if iterations == 0:
            break
        imfs.append(IMF(values=b, index=len(imfs) + 1, sift_iterations=iterations))
        residue = residue - b
    return Decomposition(imfs=imfs, residue=residue, input_len=x.shape[0])


def directional_envelope_mean(b, num_directions: int = 8) -> tuple[np.ndarray, int]:
    """Mean of the directional envelopes of complex ``b`` and the number used.

    Raises:
        NoExtremaError: if no direction has at least two maxima.
    """
    b = np.ascontiguousarray(b, dtype=complex)
    total, used = _envelope.directional_envelope_sum(b, num_directions, 2)
    if used == 0:
        raise NoExtremaError("no projection direction has two or more maxima")
    return total / used, used


def cemd_intermediate(b, config: SiftConfig = SiftConfig()) -> np.ndarray:
    """One complex sifting step: ``b`` minus the mean directional envelope."""
    b = np.ascontiguousarray(b, dtype=complex)
    mean, _ = directional_envelope_mean(b, config.num_directions)
    return b - mean


def cemd_decompose(signal, config: SiftConfig = SiftConfig()) -> Decomposition:
    """Complex EMD, stopping early once ``max_imfs`` IMFs are extracted."""
    x = np.ascontiguousarray(signal, dtype=complex)
    residue = x.copy()
    imfs: list[IMF] = []
    if x.shape[0] < 8:
        return Decomposition(imfs=imfs, residue=residue, input_len=x.shape[0])

    while len(imfs) < config.max_imfs:
        if _envelope.max_directional_maxima(residue, config.num_directions) < max(config.min_extrema, 2):
            break
        b = residue.copy()
        iterations = 0
        for iterations in range(1, config.max_sift_iterations + 1):
            b_next, sd, used = _envelope.complex_sift_step(b, config.num_directions, SD_FLOOR)
            if used == 0:
                iterations -= 1
                break
            b = b_next
            if sd < config.stop_threshold:
                break
        if iterations == 0:
            break
        logger.debug("IMF %d: %d sifting iterations", len(imfs) + 1, iterations)
        imfs.append(IMF(values=b, index=len(imfs) + 1, sift_iterations=iterations))
        residue = residue - b
    return Decomposition(imfs=imfs, residue=residue, input_len=x.shape[0])


def imf_inst_freq(imf, sample_rate: float, interp_mask=None,
                  amplitude_floor: float = 0.1) -> np.ma.MaskedArray:
    """Instantaneous frequency (Hz) of a complex IMF from its unwrapped phase.

    Element ``n`` is the forward difference between samples ``n`` and
    ``n+1``. It is masked when either sample is interpolated or has magnitude
    below ``amplitude_floor`` times the median magnitude.
    """
    values = imf.values if isinstance(imf, IMF) else np.asarray(imf)
    values = np.asarray(values, dtype=complex)
    if interp_mask is None:
        interp_mask = np.zeros(values.shape[0], dtype=bool)
    interp_mask = np.asarray(interp_mask, dtype=bool)
    if interp_mask.shape[0] != values.shape[0]:
        raise ValueError(f"mask length {interp_mask.shape[0]} != signal length {values.shape[0]}")

    phase = np.unwrap(np.angle(values))
    freq = np.diff(phase) * sample_rate / (2.0 * math.pi)
    mag = np.abs(values)
    bad = interp_mask | (mag < amplitude_floor * np.median(mag))
    masked = np.ma.MaskedArray(freq, mask=bad[:-1] | bad[1:])
    if masked.count() == 0:
        logger.warning("every instantaneous-frequency sample is masked")
    return masked


def select_imfs(decomp: Decomposition, range_freq: float, spread: float, sample_rate: float,
                interp_mask=None, amplitude_floor: float = 0.1) -> list[ImfStats]:
    """Per-IMF proximity statistics and the resulting selection.

    An IMF is kept when both its mean instantaneous frequency lies within
    ``spread/2`` of ``range_freq`` and its instantaneous-frequency standard
    deviation is below ``spread/2``. IMFs whose samples are all masked get
    NaN statistics and are never selected.
    """
    if not spread > 0:
        raise ValueError(f"spread must be > 0, got {spread}")
    half = spread / 2.0
    stats = []
    for imf in decomp.imfs:
        f = imf_inst_freq(imf, sample_rate, interp_mask, amplitude_floor)
        n = int(f.count())
        if n == 0:
            stats.append(ImfStats(imf.index, math.nan, math.nan, math.nan, False, 0))
            continue
        mean = float(f.mean())
        std = float(f.std())
        dev = abs(mean - range_freq)
        stats.append(ImfStats(imf.index, mean, dev, std, dev < half and std < half, n))

    for a, b in zip(stats, stats[1:]):
        if b.mean_inst_freq > a.mean_inst_freq:
            logger.info("IMF %d mean frequency %.4g Hz exceeds IMF %d's %.4g Hz",
                        b.index, b.mean_inst_freq, a.index, a.mean_inst_freq)
    return stats


def reconstruct(decomp: Decomposition, selection: list[ImfStats]) -> np.ndarray:
    """Sum of the selected IMFs.

    Raises:
        NoSignatureError: when nothing was selected.
    """
    chosen = {s.index for s in selection if s.selected}
    if not chosen:
        raise NoSignatureError("no signature found: no IMF passed the selection criteria")
    out = np.zeros(decomp.input_len, dtype=decomp.residue.dtype)
    for imf in decomp.imfs:
        if imf.index in chosen:
            out = out + imf.values
    return out
