"""Compiled envelope kernels for sifting.

Envelopes are natural cubic splines through extrema, with the two extrema
nearest each end mirrored across that end so the spline does not swing
freely at the boundaries. Knots are integer sample positions and the spline
is evaluated on every sample ``0..M-1``.
"""

import numpy as np
from numba import njit


@njit(cache=True, fastmath=True)
def _spline_accumulate(xk, yk, out):
    """Add the natural cubic spline through ``(xk, yk)`` sampled at 0..M-1 to ``out``."""
    n = xk.shape[0]
    M = out.shape[0]
    m = np.zeros_like(yk)
    if n > 2:
        cp = np.empty(n)
        dp = np.zeros_like(yk)
        for i in range(1, n - 1):
            h0 = xk[i] - xk[i - 1]
            h1 = xk[i + 1] - xk[i]
            rhs = 6.0 * ((yk[i + 1] - yk[i]) * (1.0 / h1) - (yk[i] - yk[i - 1]) * (1.0 / h0))
            diag = 2.0 * (h0 + h1)
            if i > 1:
                diag -= h0 * cp[i - 1]
                rhs -= h0 * dp[i - 1]
            inv = 1.0 / diag
            cp[i] = h1 * inv
            dp[i] = rhs * inv
        m[n - 2] = dp[n - 2]
        for i in range(n - 3, 0, -1):
            m[i] = dp[i] - cp[i] * m[i + 1]

    # per segment: y(x) = c0 + u*(c1 + u*(c2 + u*c3)) with u = x - xk[seg]
    x = 0
    for seg in range(n - 1):
        x0 = xk[seg]
        x1 = xk[seg + 1]
        if seg < n - 2:
            stop = min(M, int(np.floor(x1)) + 1)
        else:
            stop = M
        if stop <= x:
            continue
        h = x1 - x0
        c0 = yk[seg]
        c1 = (yk[seg + 1] - yk[seg]) * (1.0 / h) - h * (2.0 * m[seg] + m[seg + 1]) * (1.0 / 6.0)
        c2 = m[seg] * 0.5
        c3 = (m[seg + 1] - m[seg]) * (1.0 / (6.0 * h))
        while x < stop:
            u = x - x0
            out[x] += c0 + u * (c1 + u * (c2 + u * c3))
            x += 1
        if x >= M:
            break


@njit(cache=True)
def _mirrored_knots(idx, count, values, M):
    """Extremum positions/values padded with up to two mirrored points per end."""
    pad = 2 if count >= 2 else 1
    n = count + 2 * pad
    xk = np.empty(n)
    yk = np.empty(n, dtype=values.dtype)
    for p in range(pad):
        src = idx[pad - 1 - p]
        xk[p] = -src
        yk[p] = values[src]
    for i in range(count):
        xk[pad + i] = idx[i]
        yk[pad + i] = values[idx[i]]
    for p in range(pad):
        src = idx[count - 1 - p]
        xk[pad + count + p] = 2 * (M - 1) - src
        yk[pad + count + p] = values[src]
    return xk, yk


@njit(cache=True)
def _maxima(p, idx):
    """Fill ``idx`` with interior local maxima of ``p`` and return their count."""
    count = 0
    for i in range(1, p.shape[0] - 1):
        if p[i] > p[i - 1] and p[i] >= p[i + 1]:
            idx[count] = i
            count += 1
    return count


@njit(cache=True)
def directional_envelope_sum(b, num_directions, min_maxima):
    """Sum of the directional envelopes of complex ``b`` and how many were built.

    Direction ``k`` (1..K) projects onto ``phi_k = 2*pi*k/K``; its envelope
    interpolates ``b`` itself at the maxima of ``Re(exp(-j*phi_k) * b)``.
    Directions with fewer than ``min_maxima`` maxima are skipped.
    """
    M = b.shape[0]
    acc = np.zeros(M, dtype=np.complex128)
    proj = np.empty(M)
    idx = np.empty(M // 2 + 2, dtype=np.int64)
    used = 0
    for k in range(1, num_directions + 1):
        phi = 2.0 * np.pi * k / num_directions
        c = np.cos(phi)
        s = np.sin(phi)
        for i in range(M):
            proj[i] = b[i].real * c + b[i].imag * s
        count = _maxima(proj, idx)
        if count < min_maxima:
            continue
        xk, yk = _mirrored_knots(idx, count, b, M)
        _spline_accumulate(xk, yk, acc)
        used += 1
    return acc, used


@njit(cache=True)
def max_directional_maxima(b, num_directions):
    M = b.shape[0]
    proj = np.empty(M)
    idx = np.empty(M // 2 + 2, dtype=np.int64)
    best = 0
    for k in range(1, num_directions + 1):
        phi = 2.0 * np.pi * k / num_directions
        c = np.cos(phi)
        s = np.sin(phi)
        for i in range(M):
            proj[i] = b[i].real * c + b[i].imag * s
        count = _maxima(proj, idx)
        if count > best:
            best = count
    return best


@njit(cache=True)
def real_envelope_mean(x, min_extrema):
    """Mean of upper and lower spline envelopes; ``ok`` False if either is too sparse."""
    M = x.shape[0]
    idx = np.empty(M // 2 + 2, dtype=np.int64)
    acc = np.zeros(M)
    count = _maxima(x, idx)
    if count < min_extrema:
        return acc, False
    xk, yk = _mirrored_knots(idx, count, x, M)
    _spline_accumulate(xk, yk, acc)
    neg = -x
    count = _maxima(neg, idx)
    if count < min_extrema:
        return acc, False
    xk, yk = _mirrored_knots(idx, count, x, M)
    _spline_accumulate(xk, yk, acc)
    return acc * 0.5, True


@njit(cache=True)
def count_extrema(x):
    """(number of maxima, number of minima, number of zero crossings) of real ``x``."""
    n_max = 0
    n_min = 0
    n_zc = 0
    for i in range(1, x.shape[0] - 1):
        if x[i] > x[i - 1] and x[i] >= x[i + 1]:
            n_max += 1
        elif x[i] < x[i - 1] and x[i] <= x[i + 1]:
            n_min += 1
    for i in range(x.shape[0] - 1):
        if (x[i] < 0.0 and x[i + 1] >= 0.0) or (x[i] >= 0.0 and x[i + 1] < 0.0):
            n_zc += 1
    return n_max, n_min, n_zc


@njit(cache=True)
def sd_sum(previous, current, floor_ratio):
    """Sum of |previous - current|**2 / max(|current|**2, floor_ratio * max|current|**2)."""
    M = current.shape[0]
    peak = 0.0
    for i in range(M):
        p = current[i].real ** 2 + current[i].imag ** 2
        if p > peak:
            peak = p
    floor = floor_ratio * peak
    if not floor > 0.0:
        for i in range(M):
            if previous[i] != current[i]:
                return np.inf
        return 0.0
    total = 0.0
    for i in range(M):
        d = previous[i] - current[i]
        p = current[i].real ** 2 + current[i].imag ** 2
        total += (d.real ** 2 + d.imag ** 2) / max(p, floor)
    return total


@njit(cache=True)
def complex_sift_step(b, num_directions, floor_ratio):
    """One complex sifting iteration: (b - mean envelope, SD value, directions used)."""
    total, used = directional_envelope_sum(b, num_directions, 2)
    if used == 0:
        return b.copy(), np.inf, 0
    inv = 1.0 / used
    out = np.empty_like(b)
    for i in range(b.shape[0]):
        out[i] = b[i] - total[i] * inv
    return out, sd_sum(b, out, floor_ratio), used
