"""Raw ADC capture files.

A capture is a flat run of signed integers: for every chirp, for every
sample, the in-phase value then the quadrature value (``iq_order="QI"``
swaps the pair). Values are scaled by ``1 / 2**(bits-1)`` on reading, so
16-bit data maps onto ``[-1, 1)``.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import AdcLayout
from .radar_model import ChirpMatrix, RadarParams


class CaptureFormatError(ValueError):
    """The capture file does not match its declared layout."""


def _dtype(layout: AdcLayout) -> np.dtype:
    order = "<" if layout.byte_order == "little" else ">"
    return np.dtype(f"{order}i{layout.sample_bytes}")


def _full_scale(layout: AdcLayout) -> float:
    return float(2 ** (8 * layout.sample_bytes - 1))


def decode_capture(raw: bytes, layout: AdcLayout) -> np.ndarray:
    """Complex ``(num_chirps, samples_per_chirp)`` matrix from raw bytes."""
    if len(raw) != layout.expected_bytes:
        raise CaptureFormatError(
            f"capture size mismatch: expected {layout.expected_bytes} bytes "
            f"({layout.num_chirps} chirps x {layout.samples_per_chirp} samples x 2 x "
            f"{layout.sample_bytes} bytes), got {len(raw)}"
        )
    ints = np.frombuffer(raw, dtype=_dtype(layout)).reshape(
        layout.num_chirps, layout.samples_per_chirp, 2)
    first = ints[..., 0].astype(float)
    second = ints[..., 1].astype(float)
    i, q = (first, second) if layout.iq_order == "IQ" else (second, first)
    return (i + 1j * q) / _full_scale(layout)


def encode_capture(samples: np.ndarray, layout: AdcLayout) -> bytes:
    """Quantize a complex matrix to the layout's integer format.

    Values are rounded to the nearest integer step and clipped to the
    representable range.
    """
    samples = np.asarray(samples)
    expected = (layout.num_chirps, layout.samples_per_chirp)
    if samples.shape != expected:
        raise CaptureFormatError(f"matrix shape {samples.shape} does not match layout {expected}")
    scale = _full_scale(layout)
    lo, hi = -scale, scale - 1
    i = np.clip(np.round(samples.real * scale), lo, hi)
    q = np.clip(np.round(samples.imag * scale), lo, hi)
    pair = (i, q) if layout.iq_order == "IQ" else (q, i)
    return np.stack(pair, axis=-1).astype(_dtype(layout)).tobytes()


def read_adc_capture(path, layout: AdcLayout, params: RadarParams | None = None) -> ChirpMatrix:
    """Load a capture as a ``ChirpMatrix``.

    Without ``params`` a placeholder waveform is attached that only carries
    the sample counts (1 Hz/s chirp rate, unit sample rate); pass the real
    radar parameters for any physical processing. ``num_chirps`` of the
    attached parameters always follows the layout.
    """
    raw = Path(path).read_bytes()
    samples = decode_capture(raw, layout)
    if params is None:
        n = layout.samples_per_chirp
        params = RadarParams(start_frequency=1.0, chirp_rate=1.0, chirp_duration=float(n),
                             chirp_repetition_interval=float(n), sample_rate=1.0,
                             num_chirps=layout.num_chirps)
    else:
        if params.samples_per_chirp != layout.samples_per_chirp:
            raise CaptureFormatError(
                f"layout has {layout.samples_per_chirp} samples per chirp, radar parameters "
                f"imply {params.samples_per_chirp}")
        params = replace(params, num_chirps=layout.num_chirps)
    return ChirpMatrix(samples=samples, params=params)


def write_capture(path, chirps, layout: AdcLayout) -> None:
    """Write a matrix (or ``ChirpMatrix``) in the capture format, atomically."""
    samples = chirps.samples if isinstance(chirps, ChirpMatrix) else chirps
    data = encode_capture(samples, layout)
    atomic_write_bytes(Path(path), data)


def atomic_write_bytes(path: Path, data: bytes) -> None:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, 0o666 & ~_umask())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask
