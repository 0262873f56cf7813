"""Pure-Python kernel implementations.

Interchangeable with the compiled core in animo._kernels._core: same
signatures, same float arithmetic in the same order, so results are
bit-identical. Loops run over plain lists (numpy arrays are converted
once on the way in) because element-wise indexing into ndarrays from
Python is far slower than list traversal.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def ema_filter(x: np.ndarray, alpha: float) -> np.ndarray:
    xs = np.ascontiguousarray(x, dtype=np.float64).tolist()
    n = len(xs)
    out = [0.0] * n
    if n == 0:
        return np.empty(0, dtype=np.float64)
    beta = 1.0 - alpha
    prev = xs[0]
    out[0] = prev
    for i in range(1, n):
        prev = alpha * xs[i] + beta * prev
        out[i] = prev
    return np.asarray(out, dtype=np.float64)


def arousal_values(x: np.ndarray, low: float, high: float) -> np.ndarray:
    xs = np.ascontiguousarray(x, dtype=np.float64).tolist()
    span = high - low
    out = [0.0] * len(xs)
    for i, xi in enumerate(xs):
        v = (xi - low) / span
        if v < 0.0:
            v = 0.0
        elif v > 1.0:
            v = 1.0
        out[i] = v
    return np.asarray(out, dtype=np.float64)


def band_codes(values: np.ndarray, t_low: float, t_high: float) -> np.ndarray:
    vs = np.ascontiguousarray(values, dtype=np.float64).tolist()
    out = [1] * len(vs)
    for i, v in enumerate(vs):
        if v < t_low:
            out[i] = 0
        elif v > t_high:
            out[i] = 2
    return np.asarray(out, dtype=np.uint8)


def notify_points(bands: np.ndarray, ts: np.ndarray, min_gap: float) -> np.ndarray:
    """Indices where a band change passes the notification debounce."""
    bs = np.ascontiguousarray(bands, dtype=np.uint8).tolist()
    times = np.ascontiguousarray(ts, dtype=np.float64).tolist()
    if len(bs) != len(times):
        raise ValueError("bands and ts must have equal length")
    hits: list[int] = []
    last = None
    for i in range(1, len(bs)):
        if bs[i] != bs[i - 1] and (last is None or times[i] - last >= min_gap):
            hits.append(i)
            last = times[i]
    return np.asarray(hits, dtype=np.int64)
