"""Averaged velocities: trajectory means, far-field limits and density ratios.

Three routes to an observable velocity are provided:

* displacement means over a trajectory window, compared with closed forms;
* the far-field ratio  int |f|^2 k dk / int |f|^2 w dk  against the
  coarse-grained velocity of the discretized packet over growing windows;
* long-time averages of the energy and momentum densities at a fixed point,
  compared with  int |f|^2 w dk / int |f|^2 w^2/k dk.

Spatial and temporal averages of the mode bilinears are done in closed form
(sinc kernels), so no grid or time-stepping is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as sp_integrate

from .errors import DomainError, EmptyWindow, ESingularity, NodeProximity
from .trajectory import Trajectory, guidance_velocity
from .wavefield import (
    RESOLUTION_RTOL,
    PacketSpec,
    TwoModeParams,
    WaveField,
    _as_position,
    discretize_packet,
    evaluate_field,
    resolution_error,
    with_nodes,
)

NEAR_FIELD = "near_field"
OK = "ok"
MATRIX_LIMIT = 4096
MAX_UNIFORM_NODES = 1 << 22


def averaged_speed_prediction(m, omega):
    """sqrt((w - m)/(w + m)), equal to |m - w| / k on the mass shell."""
    if not (m > 0 and omega > m):
        raise DomainError(f"need omega > m > 0, got m={m}, omega={omega}")
    return math.sqrt((omega - m) / (omega + m))


# --------------------------------------------------------------------------
# trajectory means


@dataclass(frozen=True)
class AverageReport:
    window: tuple
    mean_v: np.ndarray
    predicted_v: np.ndarray | None
    abs_error: float | None
    converged: bool | None


def time_average_velocity(traj: Trajectory, window, predicted_v=None, tol=1e-3) -> AverageReport:
    """Displacement mean (x(t_hi) - x(t_lo)) / (t_hi - t_lo) over a window.

    The window is snapped to the first and last samples inside it.  When
    ``predicted_v`` is omitted and the trajectory's field is a two-mode
    field, the prediction is the signed asymptote (m - w)/k.
    """
    t_lo, t_hi = map(float, window)
    if not t_lo < t_hi:
        raise DomainError("window needs t_lo < t_hi")
    inside = [s for s in traj.samples if t_lo <= s.t <= t_hi]
    if len(inside) < 2:
        raise EmptyWindow(f"fewer than two samples in [{t_lo}, {t_hi}]")
    a, b = inside[0], inside[-1]
    mean_v = (b.x - a.x) / (b.t - a.t)
    if predicted_v is None and traj.field is not None:
        params = TwoModeParams.from_field(traj.field)
        if params is not None:
            predicted_v = -averaged_speed_prediction(params.m, params.omega)
    if predicted_v is None:
        return AverageReport((a.t, b.t), mean_v, None, None, None)
    predicted_v = np.atleast_1d(np.asarray(predicted_v, dtype=float))
    err = float(np.linalg.norm(mean_v - predicted_v))
    return AverageReport((a.t, b.t), mean_v, predicted_v, err, err < tol)


# --------------------------------------------------------------------------
# far field


def far_field_velocity_limit(spec: PacketSpec, m):
    """int |f|^2 k dk / int |f|^2 w dk on the packet's quadrature nodes."""
    k, w = spec.nodes(m)
    weight = w * spec.profile(k) ** 2
    omega = np.sqrt(m * m + k * k)
    return float(np.sum(weight * k) / np.sum(weight * omega))


def _bilinear_sum(left, right, kernel_of_diff, keys):
    """Re sum_jl conj(left_j) right_l K(keys_l - keys_j), chunked."""
    n = left.size
    total = 0.0
    for start in range(0, n, MATRIX_LIMIT):
        sl = slice(start, min(n, start + MATRIX_LIMIT))
        K = kernel_of_diff(keys[None, :] - keys[sl, None])
        total += float(np.real(np.conj(left[sl]) @ (K @ right)))
    return total


def window_densities(wf: WaveField, t, half_width):
    """Integrals of the energy and momentum densities over |x| <= half_width.

    Uses  int_{-X}^{X} exp(i (k' - k) x) dx = 2 sin((k' - k) X) / (k' - k).
    """
    if wf.spatial_dim != 1:
        raise DomainError("window averages are implemented for one spatial dimension")
    X = float(half_width)
    b = wf.amplitudes * np.exp(-1j * wf.omegas * t)
    k = wf.wavevectors[:, 0]

    def kernel(dk):
        return 2 * X * np.sinc(dk * X / np.pi)

    E_int = _bilinear_sum(b, wf.omegas * b, kernel, k)
    P_int = _bilinear_sum(b, k * b, kernel, k)
    return E_int, P_int


@dataclass(frozen=True)
class FarFieldReport:
    """Coarse-grained velocity over |x'| <= |probe_x| against the far-field ratio.

    ``local_v`` is the pointwise guidance velocity at the probe itself (NaN
    when undefined there); it is reported for reference only.
    """

    probe_x: float
    exact_v: float
    limit_v: float
    distance_in_bandwidths: float
    deviation: float
    status: str
    local_v: float


def far_field_scan(spec: PacketSpec, m, t, probes) -> list:
    probes = [float(p) for p in probes]
    if any(p == 0 for p in probes):
        raise DomainError("probes must be nonzero")
    events = [(t, s * abs(p)) for p in probes for s in (1.0, -1.0)] + [(t, 0.0)]
    wf = discretize_packet(spec, m, probes=events)
    limit = far_field_velocity_limit(spec, m)
    kappa = spec.bandwidth
    scale = wf.energy_threshold * 2
    reports = []
    for p in probes:
        dist = abs(p) * kappa
        E_int, P_int = window_densities(wf, t, abs(p))
        status = NEAR_FIELD if dist < 1 else OK
        if abs(E_int) <= scale * abs(p):
            exact, status = math.nan, "E_singularity"
        else:
            exact = P_int / E_int
        try:
            local = float(guidance_velocity(evaluate_field(wf, t, [p]))[0])
        except (NodeProximity, ESingularity):
            local = math.nan
        reports.append(FarFieldReport(p, exact, limit, dist, abs(exact - limit), status, local))
    return reports


# --------------------------------------------------------------------------
# ensemble densities


def ensemble_densities(wf: WaveField, t, x):
    """(energy density, momentum density) = (-R^2 dS/dt, R^2 grad S).

    Both are bilinears Im(phi* d phi) and stay finite at nodes.
    """
    _, j = wf.current(float(t), _as_position(x, wf.spatial_dim))
    P = j[1:]
    return float(-j[0]), (float(P[0]) if P.size == 1 else P)


def _is_uniform(values):
    if values.size < 3:
        return True
    d = np.diff(values)
    return bool(d[0] > 0 and np.ptp(d) <= 1e-9 * d[0])


def time_averaged_densities(wf: WaveField, x, T):
    """Exact means of the energy and momentum densities over t in (-T/2, T/2).

    Each mode pair contributes sinc((w' - w) T / 2).  On a uniform frequency
    grid the kernel is Toeplitz and the double sum is an FFT correlation.
    """
    if wf.spatial_dim != 1:
        raise DomainError("density averages are implemented for one spatial dimension")
    if not T > 0:
        raise DomainError("averaging span T must be positive")
    x = _as_position(x, 1)
    k = wf.wavevectors[:, 0]
    c = wf.amplitudes * np.exp(1j * k * x[0])
    order = np.argsort(wf.omegas, kind="stable")
    omegas, k, c = wf.omegas[order], k[order], c[order]

    def kernel(dw):
        return np.sinc(dw * T / (2 * np.pi))

    if wf.amplitudes.size > 64 and _is_uniform(omegas):
        step = (omegas[-1] - omegas[0]) / (omegas.size - 1)
        n = omegas.size
        size = 1 << (2 * n - 1).bit_length()
        fc = np.conj(np.fft.fft(c, size))
        lags = np.concatenate([np.arange(n), np.arange(-(n - 1), 0)])
        idx = np.concatenate([np.arange(n), np.arange(size - (n - 1), size)])
        K = kernel(lags * step)
        out = []
        for u in (omegas * c, k * c):
            corr = np.fft.ifft(fc * np.fft.fft(u, size))[idx]
            out.append(float(np.real(np.sum(K * corr))))
        return out[0], out[1]
    E_avg = _bilinear_sum(c, omegas * c, kernel, omegas)
    P_avg = _bilinear_sum(c, k * c, kernel, omegas)
    return E_avg, P_avg


@dataclass(frozen=True)
class DensityAverageReport:
    """Long-time density means against the k-space oracle.

    ``oracle_E`` and ``oracle_P`` are the integrals of |f|^2 w^2/k and
    |f|^2 w scaled by one shared least-squares ``prefactor``.
    """

    T: float
    avg_E_density: float
    avg_P_density: float
    oracle_E: float
    oracle_P: float
    ratio: float
    prefactor: float

    @property
    def oracle_ratio(self):
        return self.oracle_P / self.oracle_E


def density_oracle_integrals(spec: PacketSpec, m):
    """(int |f|^2 w^2/k dk, int |f|^2 w dk) by adaptive quadrature."""
    if not spec.support_positive:
        raise DomainError("the w^2/k weight needs support_positive packets")
    lo, hi = spec.support()
    points = [spec.k0] if spec.family == "gaussian" and lo < spec.k0 < hi else None

    def integral(fn):
        val, _ = sp_integrate.quad(fn, lo, hi, points=points, limit=400, epsabs=0.0, epsrel=1e-12)
        return val

    def f2(k):
        return float(spec.profile(k)) ** 2

    I_E = integral(lambda k: f2(k) * (m * m + k * k) / k)
    I_P = integral(lambda k: f2(k) * math.sqrt(m * m + k * k))
    return I_E, I_P


def long_time_density_average(source, m, x, T, check=True) -> DensityAverageReport:
    """Mean densities over (-T/2, T/2) at fixed x, and their ratio.

    ``source`` is a :class:`PacketSpec` (discretized on a uniform frequency
    grid with spacing pi/T so the field has no revival inside the window) or
    an explicit :class:`WaveField`, whose oracle is then its own diagonal
    (T -> infinity) limit.
    """
    if not T > 0:
        raise DomainError("averaging span T must be positive")
    if isinstance(source, PacketSpec):
        if not source.support_positive:
            raise DomainError("long-time density averages need support_positive packets")
        lo, hi = source.support()
        span = math.sqrt(m * m + hi * hi) - math.sqrt(m * m + lo * lo)
        n = max(source.n, math.ceil(span * T / math.pi))
        probes = [(0.0, float(np.ravel(x)[0]))]
        grid = with_nodes(source, n, rule="uniform_omega")
        # the frequency spacing is fixed by T; refine further only if the field needs it
        while check and n < MAX_UNIFORM_NODES and resolution_error(grid, m, probes) > RESOLUTION_RTOL:
            n *= 2
            grid = with_nodes(source, n, rule="uniform_omega")
        wf = discretize_packet(grid, m, probes=probes, check=check)
        I_E, I_P = density_oracle_integrals(source, m)
    elif isinstance(source, WaveField):
        wf = source
        w2 = np.abs(wf.amplitudes) ** 2
        k = wf.wavevectors[:, 0]
        if np.any(k <= 0):
            raise DomainError("long-time density averages need k > 0 modes")
        I_E, I_P = float(np.sum(w2 * wf.omegas)), float(np.sum(w2 * k))
    else:
        raise DomainError("source must be a PacketSpec or WaveField")
    avg_E, avg_P = time_averaged_densities(wf, x, T)
    prefactor = (avg_E * I_E + avg_P * I_P) / (I_E * I_E + I_P * I_P)
    return DensityAverageReport(
        float(T), avg_E, avg_P, prefactor * I_E, prefactor * I_P, avg_P / avg_E, prefactor
    )
