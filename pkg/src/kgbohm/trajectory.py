"""Particle worldlines under the phase-gradient guidance law.

With E = -dS/dt and P = grad S the particle velocity is v = P / E.  The
integrator is an adaptive Dormand-Prince 5(4) scheme in lab time with event
monitoring for nodes (R^2 -> 0), energy collapse (E -> 0, where v diverges)
and crossings of |v| = 1, each refined by bisection.

For the two-mode field the dynamics reduce to a scalar ODE in the beat phase
eta = (m - w) t + k x, which serves as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import _dopri
from .errors import DomainError, ESingularity, NodeProximity
from .wavefield import (
    ENERGY_RTOL,
    FieldSample,
    TwoModeParams,
    WaveField,
    _as_position,
    evaluate_field,
)

TIMELIKE = "timelike"
SPACELIKE = "spacelike"
LIGHTLIKE = "lightlike"
LIGHTLIKE_RTOL = 1e-9

COMPLETED = "completed"
NODE_HIT = "node_hit"
E_SINGULARITY = "E_singularity"
STEP_UNDERFLOW = "step_underflow"


def guidance_velocity(sample: FieldSample):
    """v_i = (dS/dx_i) / (-dS/dt) at a sampled event."""
    if sample.is_node:
        raise NodeProximity(f"R^2={sample.R2!r} at t={sample.t}")
    E = sample.E
    if abs(sample.R2 * E) <= sample.energy_threshold:
        raise ESingularity(f"E={E!r} at t={sample.t}")
    return sample.P / E


def classify_causal(E, P, rtol=LIGHTLIKE_RTOL):
    """Causal character of the four-momentum -d_mu S = (E, -P)."""
    P = np.atleast_1d(np.asarray(P, dtype=float))
    p2 = float(np.dot(P, P))
    gap = E * E - p2
    if abs(gap) <= rtol * (E * E + p2):
        return LIGHTLIKE
    return TIMELIKE if gap > 0 else SPACELIKE


@dataclass(frozen=True)
class GuidanceState:
    t: float
    x: np.ndarray
    v: np.ndarray
    E: float
    P: np.ndarray
    R2: float
    Msq: float
    causal_class: str

    @property
    def speed(self):
        return float(np.linalg.norm(self.v))


def guidance_state(wf: WaveField, t, x) -> GuidanceState:
    s = evaluate_field(wf, t, x)
    v = guidance_velocity(s)
    return GuidanceState(s.t, s.x, v, s.E, s.P, s.R2, s.Msq, classify_causal(s.E, s.P))


@dataclass(frozen=True)
class Episode:
    """Interval on which |v| > 1, with the largest-magnitude velocity seen."""

    t_start: float
    t_end: float
    v_extreme: float


@dataclass
class Trajectory:
    samples: list
    termination: str
    superluminal_episodes: list
    error_estimate: float = 0.0
    field: WaveField | None = field(default=None, repr=False)

    @property
    def t(self):
        return np.array([s.t for s in self.samples])

    @property
    def x(self):
        return np.array([s.x for s in self.samples])

    @property
    def v(self):
        return np.array([s.v for s in self.samples])

    def in_episode(self, sample: GuidanceState):
        if not sample.speed > 1:
            return False
        return any(ep.t_start <= sample.t <= ep.t_end for ep in self.superluminal_episodes)


@dataclass(frozen=True)
class IntegratorOptions:
    rtol: float = 1e-9
    atol: float = 1e-12
    h_min_rel: float = 1e-14
    stride: float | None = None
    stride_rel: float = 1e-2
    max_steps: int = 2_000_000

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise DomainError("integrator tolerances must be positive")
        if self.stride is not None and not self.stride > 0:
            raise DomainError("output stride must be positive")


class _Guidance:
    """Right-hand side dx/dt = P/E using only the first-derivative current."""

    def __init__(self, wf):
        self.wf = wf
        self.eps_node = wf.node_threshold
        self.eps_E = wf.energy_threshold

    def densities(self, t, x):
        R2, j = self.wf.current(t, x)
        # j = R^2 d_mu S, so R^2 E = -j[0] and R^2 P = j[1:]
        return R2, -j[0], j[1:]

    def __call__(self, t, x):
        R2, rE, rP = self.densities(t, x)
        if not R2 > self.eps_node:
            raise NodeProximity(f"node at t={t}")
        if abs(rE) <= self.eps_E:
            raise ESingularity(f"E = 0 at t={t}")
        return rP / rE


def _bisect(g, lo, hi, glo, tol):
    """Shrink [lo, hi] around a sign change of g; g(lo) has sign of ``glo``."""
    ghi = None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        gm = g(mid)
        if (gm > 0) == (glo > 0):
            lo = mid
        else:
            hi, ghi = mid, gm
    return lo, hi, ghi


def integrate(wf: WaveField, x0, t0, t_end, options: IntegratorOptions | None = None) -> Trajectory:
    """Integrate dx/dt = P/E from (t0, x0) to t_end.

    Termination is one of ``completed``, ``node_hit``, ``E_singularity`` or
    ``step_underflow``; singular endings are recorded, not raised.  Samples
    are emitted every ``stride`` (default 1% of the span) and at every event.
    """
    opts = options or IntegratorOptions()
    t0, t_end = float(t0), float(t_end)
    if not (math.isfinite(t0) and math.isfinite(t_end)) or not t_end > t0:
        raise DomainError(f"need t_end > t0, got t0={t0}, t_end={t_end}")
    x0 = _as_position(x0, wf.spatial_dim)
    first = guidance_state(wf, t0, x0)

    rhs = _Guidance(wf)
    span = t_end - t0
    h_min = opts.h_min_rel * span
    stride = opts.stride if opts.stride is not None else opts.stride_rel * span
    event_tol = 1e-13 * max(1.0, abs(t0), abs(t_end))
    energy_scale = wf.energy_threshold / ENERGY_RTOL

    samples = [first]
    episodes = []
    open_ep = None
    if first.speed > 1:
        open_ep = [t0, float(first.v[0]) if first.v.size == 1 else first.speed]

    def extreme(v):
        return float(v[0]) if v.size == 1 else float(np.linalg.norm(v))

    def close_episode(t_b):
        nonlocal open_ep
        episodes.append(Episode(open_ep[0], t_b, open_ep[1]))
        open_ep = None

    def bump_extreme(v):
        if open_ep is not None and abs(extreme(v)) > abs(open_ep[1]):
            open_ep[1] = extreme(v)

    t, y = t0, x0.copy()
    f = first.v.copy()
    g_prev = first.speed - 1.0
    next_out = t0 + stride
    h = _dopri.initial_step(rhs, t, y, f, span, opts.rtol, opts.atol)
    err_total = 0.0
    termination = None
    steps = 0

    def advance(tau):
        return _dopri.step(rhs, t, y, tau, f)[0]

    def terminal(kind, tau_lo):
        nonlocal termination
        t_b = t + tau_lo
        y_b = advance(tau_lo) if tau_lo > 0 else y
        try:
            st = guidance_state(wf, t_b, y_b)
            if st.t > samples[-1].t:
                samples.append(st)
                bump_extreme(st.v)
        except (NodeProximity, ESingularity):
            pass
        termination = kind
        return t_b

    while termination is None:
        if t >= t_end:
            termination = COMPLETED
            break
        steps += 1
        if steps > opts.max_steps:
            termination = STEP_UNDERFLOW
            break
        hit_out = False
        if t + h >= next_out:
            h = next_out - t
            hit_out = True
        if h < h_min and not hit_out:
            _, rE, _ = rhs.densities(t, y)
            termination = E_SINGULARITY if abs(rE) <= math.sqrt(ENERGY_RTOL) * energy_scale else STEP_UNDERFLOW
            break
        try:
            y_new, f_new, err = _dopri.step(rhs, t, y, h, f)
            en = _dopri.error_norm(err, y, y_new, opts.rtol, opts.atol)
        except (NodeProximity, ESingularity):
            en = math.inf
        if not en <= 1.0:
            h *= _dopri.MIN_FACTOR if not math.isfinite(en) else _dopri.step_factor(en)
            continue

        t_new = next_out if hit_out else t + h
        R2n, rEn, _ = rhs.densities(t_new, y_new)

        if not R2n > rhs.eps_node:
            lo, _, _ = _bisect(lambda tau: rhs.densities(t + tau, advance(tau))[0] - rhs.eps_node,
                               0.0, h, 1.0, event_tol)
            end = terminal(NODE_HIT, lo)
            break
        if abs(rEn) <= rhs.eps_E:
            lo, _, _ = _bisect(lambda tau: abs(rhs.densities(t + tau, advance(tau))[1]) - rhs.eps_E,
                               0.0, h, 1.0, event_tol)
            end = terminal(E_SINGULARITY, lo)
            break

        g_new = float(np.linalg.norm(f_new)) - 1.0
        if (g_new > 0) != (g_prev > 0):
            def g(tau):
                return float(np.linalg.norm(rhs(t + tau, advance(tau)))) - 1.0
            lo, hi, ghi = _bisect(g, 0.0, h, g_prev, event_tol)
            glo = g(lo) if lo > 0 else g_prev
            tau_b = lo if ghi is None or abs(glo) <= abs(ghi) else hi
            t_b = t + tau_b
            st = guidance_state(wf, t_b, advance(tau_b))
            if samples[-1].t < t_b < t_new:
                samples.append(st)
            if g_new > 0:
                open_ep = [t_b, extreme(st.v)]
            elif open_ep is not None:
                close_episode(t_b)
        err_total += float(np.max(np.abs(err)))
        t, y, f, g_prev = t_new, y_new, f_new, g_new
        bump_extreme(f)
        if hit_out:
            samples.append(guidance_state(wf, t, y))
            next_out = t0 + stride * (round((t - t0) / stride) + 1)
            if next_out > t_end:
                next_out = t_end
            if next_out <= t:
                next_out = t_end if t < t_end else t + stride
        h *= _dopri.step_factor(en)

    if termination in (COMPLETED, STEP_UNDERFLOW) or (termination == E_SINGULARITY and samples[-1].t < t):
        if samples[-1].t < t:
            try:
                samples.append(guidance_state(wf, t, y))
                bump_extreme(samples[-1].v)
            except (NodeProximity, ESingularity):
                pass
    if open_ep is not None:
        close_episode(samples[-1].t)
    return Trajectory(samples, termination, episodes, err_total, wf)


# --------------------------------------------------------------------------
# two-mode beat-phase reduction


@dataclass(frozen=True)
class EtaState:
    eta: float
    t: float


def beat_phase(params: TwoModeParams, t, x):
    """Relative phase (m - w) t + k x of the boosted mode against the rest mode."""
    return (params.m - params.omega) * t + params.k * x


def position_from_phase(params: TwoModeParams, t, eta):
    return (eta - (params.m - params.omega) * t) / params.k


def phase_energy_density(params: TwoModeParams, eta):
    """m + A^2 w + A (m + w) cos(eta), i.e. R^2 E / N^2."""
    m, w, A = params.m, params.omega, params.A
    return m + A * A * w + A * (m + w) * np.cos(eta)


def two_mode_closed_form(params: TwoModeParams, eta):
    """(R^2, E, P, v) of the two-mode field as functions of the beat phase."""
    m, w, A, k = params.m, params.omega, params.A, params.k
    c = np.cos(eta)
    R2 = params.N ** 2 * (1 + A * A + 2 * A * c)
    D = phase_energy_density(params, eta)
    E = params.N ** 2 * D / R2
    P = params.N ** 2 * A * k * (A + c) / R2
    return R2, E, P, A * k * (A + c) / D


def _phase_singular_scale(params):
    return ENERGY_RTOL * (1 + abs(params.A)) ** 2 * params.omega


def eta_reduced_rhs(eta, params: TwoModeParams):
    """d(eta)/dt = (m - w) + k v(eta)."""
    D = phase_energy_density(params, eta)
    if abs(D) <= _phase_singular_scale(params):
        raise ESingularity(f"energy vanishes at eta={eta}")
    m, w, A, k = params.m, params.omega, params.A, params.k
    return (m - w) + k * A * k * (A + math.cos(eta)) / D


def phase_time(params: TwoModeParams, eta):
    """Antiderivative t(eta) of the beat-phase ODE, up to a constant.

    Since d(eta)/dt = m (m - w)(1 - A^2) / D(eta), integrating D gives
    t = [(m + A^2 w) eta + A (m + w) sin(eta)] / (m (m - w)(1 - A^2)).
    """
    m, w, A = params.m, params.omega, params.A
    rate = m * (m - w) * (1 - A * A)
    if rate == 0:
        raise DomainError("A = +-1 has no beat-phase motion")
    return ((m + A * A * w) * eta + A * (m + w) * np.sin(eta)) / rate


def reduced_trajectory(params: TwoModeParams, eta0, t0, t_eval, rtol=1e-12, atol=1e-12):
    """Integrate the beat-phase ODE and map back to positions.

    Returns (eta, x) arrays at ``t_eval``.  Uses scipy's DOP853, independent
    of the guidance integrator above.
    """
    t_eval = np.asarray(t_eval, dtype=float)
    sol = solve_ivp(
        lambda t, y: [eta_reduced_rhs(y[0], params)],
        (t0, float(t_eval[-1])),
        [float(eta0)],
        method="DOP853",
        t_eval=t_eval,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise ESingularity(sol.message)
    eta = sol.y[0]
    return eta, position_from_phase(params, t_eval, eta)


def mean_two_mode_velocity(params: TwoModeParams):
    """Long-time drift k A^2 / (m + A^2 w) of a circulating two-mode trajectory.

    Valid when D(eta) never vanishes (A < m/w or A > 1): eta then advances
    by 2 pi per period and the displacement per period gives this ratio.
    """
    m, w, A, k = params.m, params.omega, params.A, params.k
    return k * A * A / (m + A * A * w)


def has_energy_collapse(params: TwoModeParams):
    """True when D(eta) changes sign, so every trajectory reaches E = 0."""
    m, w, A = params.m, params.omega, abs(params.A)
    return A * (m + w) >= m + A * A * w
