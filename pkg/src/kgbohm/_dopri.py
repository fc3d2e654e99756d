"""Dormand-Prince 5(4) embedded Runge-Kutta step."""

import numpy as np

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# 5th-order minus embedded 4th-order weights; last entry multiplies the FSAL stage
E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

ORDER = 5
SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


def step(f, t, y, h, k1):
    """Advance y' = f(t, y) by h from (t, y) with f(t, y) = k1.

    Returns (y_new, f(t + h, y_new), error_vector).
    """
    K = np.empty((7, y.size))
    K[0] = k1
    for s in range(1, 6):
        K[s] = f(t + C[s] * h, y + h * (A[s] @ K[:s]))
    y_new = y + h * (B @ K[:6])
    K[6] = f(t + h, y_new)
    return y_new, K[6], h * (E @ K)


def error_norm(err, y, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def step_factor(err_norm):
    if err_norm == 0.0:
        return MAX_FACTOR
    return min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * err_norm ** (-1.0 / ORDER)))


def initial_step(f, t, y, f0, direction_span, rtol, atol):
    """Starting step from the usual two-evaluation estimate (Hairer, Norsett, Wanner)."""
    scale = atol + rtol * np.abs(y)
    d0 = np.sqrt(np.mean((y / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, direction_span)
    try:
        f1 = f(t + h0, y + h0 * f0)
    except Exception:
        return h0 * 1e-3
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / ORDER)
    return min(100 * h0, h1, direction_span)
