"""Gaussian range-Doppler filter sized from the expected micro-Doppler spread."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .radar_model import ChirpMatrix, RadarParams
from .spectral import RDMap, inverse_rd, rd_map

LN2 = math.log(2.0)


@dataclass(frozen=True)
class GaussianRDFilter:
    """Separable Gaussian window centred on the target's RD cell.

    ``sigma_doppler == inf`` means unit gain along the whole Doppler axis.
    """

    center_range_hz: float
    center_doppler_hz: float
    sigma_range: float
    sigma_doppler: float

    def __post_init__(self):
        if not self.sigma_range > 0:
            raise ValueError(f"sigma_range must be > 0, got {self.sigma_range}")
        if not self.sigma_doppler > 0:
            raise ValueError(f"sigma_doppler must be > 0, got {self.sigma_doppler}")

    @property
    def range_cutoff_hz(self) -> float:
        """3-dB cut-off, sqrt(ln 2) * sigma_range."""
        return math.sqrt(LN2) * self.sigma_range

    @property
    def doppler_all_pass(self) -> bool:
        return math.isinf(self.sigma_doppler)

    def gain(self, range_hz, doppler_hz, doppler_span: float | None = None):
        """Filter gain at the given frequencies.

        With ``doppler_span`` set (normally f_crf) the Doppler offset is wrapped
        onto ``[-span/2, span/2)``; range offsets never wrap.
        """
        dr = np.asarray(range_hz, dtype=float) - self.center_range_hz
        g = np.exp(-dr**2 / (2.0 * self.sigma_range**2))
        if self.doppler_all_pass:
            return g * np.ones_like(np.asarray(doppler_hz, dtype=float))
        dd = np.asarray(doppler_hz, dtype=float) - self.center_doppler_hz
        if doppler_span is not None:
            dd = np.mod(dd + doppler_span / 2.0, doppler_span) - doppler_span / 2.0
        return g * np.exp(-dd**2 / (2.0 * self.sigma_doppler**2))


def design_filter(peak: tuple[float, float], expected_spread: float,
                  params: RadarParams) -> GaussianRDFilter:
    """Size the filter from the expected spread.

    The range 3-dB cut-off is ``max(spread/2, range bin width)``. A spread
    wider than f_crf fills the whole Doppler axis, so the Doppler side becomes
    all-pass; otherwise its cut-off is ``max(spread/2, Doppler bin width)``.
    """
    if expected_spread < 0:
        raise ValueError(f"expected_spread must be >= 0, got {expected_spread}")
    range_hz, doppler_hz = peak[0], peak[1]
    range_cutoff = max(expected_spread / 2.0, params.range_bin_width_hz)
    if expected_spread > params.chirp_repetition_frequency:
        sigma_doppler = math.inf
    else:
        doppler_cutoff = max(expected_spread / 2.0, params.doppler_bin_width_hz)
        sigma_doppler = doppler_cutoff / math.sqrt(LN2)
    return GaussianRDFilter(
        center_range_hz=range_hz,
        center_doppler_hz=doppler_hz,
        sigma_range=range_cutoff / math.sqrt(LN2),
        sigma_doppler=sigma_doppler,
    )


def filter_from_cutoff(peak: tuple[float, float], range_cutoff_hz: float,
                       doppler_cutoff_hz: float = math.inf) -> GaussianRDFilter:
    """Build a filter directly from 3-dB cut-offs (inf means all-pass)."""
    return GaussianRDFilter(
        center_range_hz=peak[0],
        center_doppler_hz=peak[1],
        sigma_range=range_cutoff_hz / math.sqrt(LN2),
        sigma_doppler=doppler_cutoff_hz / math.sqrt(LN2),
    )


def filter_response(rdmap: RDMap, rd_filter: GaussianRDFilter) -> np.ndarray:
    """Gain evaluated on the map grid, shape ``(doppler_bins, range_bins)``."""
    return rd_filter.gain(rdmap.range_axis[None, :], rdmap.doppler_axis[:, None],
                          doppler_span=rdmap.params.chirp_repetition_frequency)


def apply_filter(rdmap: RDMap, rd_filter: GaussianRDFilter) -> RDMap:
    return replace(rdmap, values=rdmap.values * filter_response(rdmap, rd_filter))


def extract_filtered_time(chirps: ChirpMatrix, rd_filter: GaussianRDFilter) -> ChirpMatrix:
    return inverse_rd(apply_filter(rd_map(chirps), rd_filter))
