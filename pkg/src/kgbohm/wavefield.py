"""Klein-Gordon solutions as finite sums of on-shell plane waves.

A field is represented exactly as

    phi(t, x) = sum_j a_j exp(-i w_j t + i k_j . x),   w_j = sqrt(m^2 + |k_j|^2),

so every spacetime derivative is available in closed form.  The polar split
phi = R exp(iS) is evaluated through node-safe bilinears: the current
Im(phi* d_mu phi) = R^2 d_mu S never needs the phase itself.

Conventions: natural units (hbar = c = 1), metric signature (+, -, -, -),
four-gradient index 0 is time.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, MassShellError, NodeProximity, UnresolvedPacket

SHELL_RTOL = 1e-12
NODE_RTOL = 1e-12
ENERGY_RTOL = 1e-10
GAUSSIAN_HALF_WIDTH = 6.0
# lower cut (in units of sigma) for gaussians restricted to k > 0
POSITIVE_FLOOR = 1e-3
RESOLUTION_RTOL = 1e-6


def mass_shell(m, k):
    """Positive frequency sqrt(m^2 + |k|^2) for a wave vector ``k``."""
    k = np.asarray(k, dtype=float)
    return math.sqrt(m * m + float(np.dot(k, k)))


@dataclass(frozen=True)
class Mode:
    """One plane-wave component: amplitude, wave vector and frequency."""

    amplitude: complex
    k: tuple
    omega: float

    @classmethod
    def on_shell(cls, amplitude, k, m):
        k = tuple(float(c) for c in np.atleast_1d(k))
        return cls(complex(amplitude), k, mass_shell(m, k))


class WaveField:
    """Immutable superposition of positive-frequency modes of mass ``m``.

    Mode data live in read-only arrays (``amplitudes``, ``wavevectors``,
    ``omegas``); :attr:`modes` rebuilds :class:`Mode` records on demand.
    """

    def __init__(self, m, modes: Sequence[Mode]):
        modes = list(modes)
        if not modes:
            raise DomainError("a WaveField needs at least one mode")
        dims = {len(md.k) for md in modes}
        if len(dims) != 1:
            raise DomainError("all modes must share one spatial dimension")
        amps = np.array([md.amplitude for md in modes], dtype=complex)
        ks = np.array([md.k for md in modes], dtype=float)
        omegas = np.array([md.omega for md in modes], dtype=float)
        self._init(m, amps, ks, omegas)

    @classmethod
    def from_arrays(cls, m, amplitudes, wavevectors):
        """Build a field from amplitudes and wave vectors; frequencies are derived."""
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        ks = np.asarray(wavevectors, dtype=float)
        if ks.ndim == 1:
            ks = ks[:, None]
        if amps.size == 0:
            raise DomainError("a WaveField needs at least one mode")
        omegas = np.sqrt(m * m + np.sum(ks * ks, axis=1))
        obj = cls.__new__(cls)
        obj._init(m, amps, ks, omegas)
        return obj

    def _init(self, m, amps, ks, omegas):
        m = float(m)
        if not (math.isfinite(m) and m > 0):
            raise DomainError(f"mass must be positive and finite, got {m}")
        if ks.ndim != 2 or ks.shape[0] != amps.size or ks.shape[1] not in (1, 2, 3):
            raise DomainError("wave vectors must have 1, 2 or 3 components")
        if not (np.all(np.isfinite(ks)) and np.all(np.isfinite(amps))):
            raise DomainError("mode data must be finite")
        if np.any(omegas <= 0):
            raise MassShellError("mode frequencies must be positive")
        shell = np.sqrt(m * m + np.sum(ks * ks, axis=1))
        bad = np.abs(omegas - shell) > SHELL_RTOL * shell
        if np.any(bad):
            j = int(np.argmax(bad))
            raise MassShellError(
                f"mode {j}: omega={omegas[j]!r} but sqrt(m^2+k^2)={shell[j]!r}"
            )
        if not np.any(amps != 0):
            raise DomainError("at least one mode needs a nonzero amplitude")
        self.m = m
        self.amplitudes = amps
        self.wavevectors = ks
        self.omegas = omegas
        for arr in (amps, ks, omegas):
            arr.setflags(write=False)
        # (n, d+1) derivative factors: d_t -> -i w, d_x -> i k
        self._factors = np.concatenate([-1j * omegas[:, None], 1j * ks], axis=1)

    @property
    def spatial_dim(self):
        return self.wavevectors.shape[1]

    @property
    def modes(self):
        return tuple(
            Mode(complex(a), tuple(k), float(w))
            for a, k, w in zip(self.amplitudes, self.wavevectors, self.omegas)
        )

    def __len__(self):
        return self.amplitudes.size

    def __repr__(self):
        return f"WaveField(m={self.m}, n_modes={len(self)}, spatial_dim={self.spatial_dim})"

    @property
    def amplitude_sum(self):
        return float(np.sum(np.abs(self.amplitudes)))

    @property
    def node_threshold(self):
        """R^2 below this value is treated as a node."""
        return NODE_RTOL * self.amplitude_sum ** 2

    @property
    def energy_threshold(self):
        """Bound on the energy density |R^2 dS/dt| below which E counts as zero."""
        return ENERGY_RTOL * self.amplitude_sum ** 2 * float(np.max(self.omegas))

    @property
    def kg_scale(self):
        k2 = np.sum(self.wavevectors ** 2, axis=1)
        return float(np.sum(np.abs(self.amplitudes) * (self.omegas ** 2 + k2 + self.m ** 2)))

    def scaled(self, factor):
        """Same field with every amplitude multiplied by the complex ``factor``."""
        return WaveField.from_arrays(self.m, self.amplitudes * complex(factor), self.wavevectors)

    def _exponentials(self, t, x):
        x = _as_position(x, self.spatial_dim)
        phase = self.wavevectors @ x - self.omegas * t
        return self.amplitudes * np.exp(1j * phase)

    def phi(self, t, x):
        return complex(np.sum(self._exponentials(t, x)))

    def current(self, t, x):
        """Return (R^2, Im(phi* d_mu phi)); the second item is R^2 d_mu S."""
        e = self._exponentials(t, x)
        phi = np.sum(e)
        dphi = e @ self._factors
        return float((phi * phi.conjugate()).real), np.imag(np.conj(phi) * dphi)


@dataclass(frozen=True)
class FieldSample:
    """Field value, derivatives and polar quantities at one event.

    ``gradS`` and ``Msq`` are NaN when the event lies within the node
    threshold (check :attr:`is_node`).
    """

    t: float
    x: np.ndarray
    phi: complex
    dphi: np.ndarray
    d2phi: np.ndarray
    R2: float
    gradS: np.ndarray
    Msq: float
    node_threshold: float = 0.0
    energy_threshold: float = 0.0

    @property
    def is_node(self):
        return not self.R2 > self.node_threshold

    @property
    def E(self):
        return -float(self.gradS[0])

    @property
    def P(self):
        return np.asarray(self.gradS[1:], dtype=float)


def _as_position(x, dim):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (dim,):
        raise DomainError(f"position must have {dim} components, got shape {x.shape}")
    return x


def _check_event(t, x):
    if not (math.isfinite(t) and np.all(np.isfinite(x))):
        raise DomainError(f"non-finite event t={t!r}, x={x!r}")


def evaluate_field(wf: WaveField, t, x) -> FieldSample:
    """Evaluate phi with exact first and second derivatives at event (t, x)."""
    t = float(t)
    x = _as_position(x, wf.spatial_dim)
    _check_event(t, x)
    e = wf._exponentials(t, x)
    c = wf._factors
    phi = complex(np.sum(e))
    dphi = e @ c
    d2phi = np.einsum("n,nm,nl->ml", e, c, c)
    R2 = (phi * phi.conjugate()).real
    eps = wf.node_threshold
    if R2 > eps:
        R2, gradS, Msq = polar_decompose(phi, dphi, d2phi, wf.m, eps_node=eps)
    else:
        gradS = np.full(wf.spatial_dim + 1, np.nan)
        Msq = math.nan
    return FieldSample(t, x, phi, dphi, d2phi, float(R2), gradS, Msq, eps, wf.energy_threshold)


def polar_decompose(phi, dphi, d2phi, m, eps_node=0.0):
    """Return (R^2, d_mu S, M^2) from phi and its first/second derivatives.

    d_mu S = Im(phi* d_mu phi) / R^2 avoids any branch of log(phi/phi*).
    M^2 = m^2 + (box R)/R with R = sqrt(phi phi*) differentiated analytically.
    """
    phi = complex(phi)
    dphi = np.asarray(dphi, dtype=complex)
    d2phi = np.asarray(d2phi, dtype=complex)
    rho = (phi * phi.conjugate()).real
    if not rho > eps_node:
        raise NodeProximity(f"R^2={rho!r} is within the node threshold {eps_node!r}")
    bil = np.conj(phi) * dphi
    gradS = bil.imag / rho
    # d_mu d_mu R / R = (|d_mu phi|^2 + Re(phi* d_mu^2 phi)) / rho - Re(phi* d_mu phi)^2 / rho^2
    diag = np.diagonal(d2phi)
    terms = (np.abs(dphi) ** 2 + (np.conj(phi) * diag).real) / rho - (bil.real / rho) ** 2
    signs = np.ones(dphi.size)
    signs[1:] = -1.0
    Msq = m * m + float(np.dot(signs, terms))
    return float(rho), gradS, Msq


def minkowski_square(four_vector):
    """v.v with signature (+, -, -, -)."""
    v = np.asarray(four_vector, dtype=float)
    return float(v[0] * v[0] - np.dot(v[1:], v[1:]))


def klein_gordon_residual(wf: WaveField, t, x):
    """|(box + m^2) phi| from analytic second derivatives."""
    s = evaluate_field(wf, t, x)
    box = s.d2phi[0, 0] - np.trace(s.d2phi[1:, 1:])
    return abs(box + wf.m ** 2 * s.phi)


def continuity_residual(wf: WaveField, t, x, h=1e-3):
    """|d_mu (R^2 d^mu S)| by second-order central differences of the current."""
    x = _as_position(x, wf.spatial_dim)
    t = float(t)
    _check_event(t, x)
    d = wf.spatial_dim
    eps = wf.node_threshold
    total = 0.0
    for mu in range(d + 1):
        shift = np.zeros(d + 1)
        shift[mu] = h
        vals = []
        for sgn in (1.0, -1.0):
            tt = t + sgn * shift[0]
            xx = x + sgn * shift[1:]
            R2, j = wf.current(tt, xx)
            if not R2 > eps:
                raise NodeProximity(f"stencil point ({tt}, {xx}) is a node")
            vals.append(j[mu])
        deriv = (vals[0] - vals[1]) / (2 * h)
        total += deriv if mu == 0 else -deriv
    return abs(total)


# --------------------------------------------------------------------------
# the two-mode 1+1 solution: N [exp(-i m t) + A exp(-i w t + i k x)]


@dataclass(frozen=True)
class TwoModeParams:
    """Rest mode plus one boosted mode with real relative amplitude ``A``."""

    m: float
    omega: float
    A: float
    N: float = 1.0

    def __post_init__(self):
        if not (self.m > 0 and math.isfinite(self.omega)):
            raise DomainError("two-mode field needs m > 0")
        if not self.omega > self.m:
            raise DomainError(f"mass shell requires omega > m, got omega={self.omega}, m={self.m}")
        if self.N == 0:
            raise DomainError("normalization N must be nonzero")

    @property
    def k(self):
        return math.sqrt(self.omega ** 2 - self.m ** 2)

    def field(self):
        modes = [
            Mode.on_shell(self.N, [0.0], self.m),
            Mode.on_shell(self.N * self.A, [self.k], self.m),
        ]
        return WaveField(self.m, modes)

    @classmethod
    def from_field(cls, wf: WaveField):
        """Recover the parameters if ``wf`` has the two-mode structure, else None."""
        if len(wf) != 2 or wf.spatial_dim != 1:
            return None
        ks = wf.wavevectors[:, 0]
        rest = np.flatnonzero(ks == 0.0)
        if rest.size != 1 or ks[1 - rest[0]] <= 0:
            return None
        a0 = wf.amplitudes[rest[0]]
        a1 = wf.amplitudes[1 - rest[0]]
        if a0 == 0:
            return None
        ratio = a1 / a0
        if abs(ratio.imag) > 1e-14 * max(1.0, abs(ratio)):
            return None
        return cls(wf.m, float(wf.omegas[1 - rest[0]]), float(ratio.real), float(abs(a0)))


PRESET = TwoModeParams(m=1.0, omega=3.0, A=2.0 / 3.0)


# --------------------------------------------------------------------------
# continuous k-space packets


@dataclass(frozen=True)
class PacketSpec:
    """A 1D k-space profile f(k) plus the quadrature used to discretize it.

    ``family`` is ``"gaussian"`` (``k0``, ``sigma``) or ``"tophat"``
    (``kmin``, ``kmax``).  ``rule`` is ``"gauss_legendre"`` (default) or
    ``"uniform_omega"`` (midpoint rule on an evenly spaced frequency grid,
    which makes the field exactly periodic in time).
    """

    family: str
    k0: float | None = None
    sigma: float | None = None
    kmin: float | None = None
    kmax: float | None = None
    n: int = 64
    rule: str = "gauss_legendre"
    support_positive: bool = False

    @classmethod
    def gaussian(cls, k0, sigma, n=64, rule="gauss_legendre", support_positive=False):
        return cls("gaussian", k0=float(k0), sigma=float(sigma), n=n, rule=rule,
                   support_positive=support_positive)

    @classmethod
    def tophat(cls, kmin, kmax, n=64, rule="gauss_legendre", support_positive=False):
        return cls("tophat", kmin=float(kmin), kmax=float(kmax), n=n, rule=rule,
                   support_positive=support_positive)

    def __post_init__(self):
        if self.family == "gaussian":
            if self.k0 is None or self.sigma is None:
                raise DomainError("gaussian packet needs k0 and sigma")
            if not (math.isfinite(self.k0) and self.sigma > 0 and math.isfinite(self.sigma)):
                raise DomainError("gaussian packet needs finite k0 and sigma > 0")
        elif self.family == "tophat":
            if self.kmin is None or self.kmax is None:
                raise DomainError("tophat packet needs kmin and kmax")
            if not (math.isfinite(self.kmin) and math.isfinite(self.kmax) and self.kmin < self.kmax):
                raise DomainError("tophat packet needs kmin < kmax")
        else:
            raise DomainError(f"unknown packet family {self.family!r}")
        if int(self.n) != self.n or self.n < 2:
            raise DomainError("quadrature needs n >= 2 nodes")
        if self.rule not in ("gauss_legendre", "uniform_omega"):
            raise DomainError(f"unknown quadrature rule {self.rule!r}")
        lo, hi = self.support()
        if not lo < hi:
            raise DomainError("packet has empty support")
        if self.support_positive and lo <= 0:
            raise DomainError("support_positive requires kmin > 0")
        if self.rule == "uniform_omega" and lo < 0 < hi:
            raise DomainError("uniform_omega needs support on one side of k = 0")

    def support(self):
        """Interval outside which f is treated as zero."""
        if self.family == "gaussian":
            lo = self.k0 - GAUSSIAN_HALF_WIDTH * self.sigma
            hi = self.k0 + GAUSSIAN_HALF_WIDTH * self.sigma
            if self.support_positive:
                lo = max(lo, POSITIVE_FLOOR * self.sigma)
            return lo, hi
        return self.kmin, self.kmax

    @property
    def bandwidth(self):
        """kappa: radius of the k-ball containing the support."""
        lo, hi = self.support()
        return max(abs(lo), abs(hi))

    def profile(self, k):
        k = np.asarray(k, dtype=float)
        lo, hi = self.support()
        inside = (k >= lo) & (k <= hi)
        if self.family == "gaussian":
            f = np.exp(-0.5 * ((k - self.k0) / self.sigma) ** 2)
        else:
            f = np.ones_like(k)
        return np.where(inside, f, 0.0)

    def nodes(self, m, n=None):
        """Quadrature nodes and weights for integrals over k."""
        n = int(self.n if n is None else n)
        lo, hi = self.support()
        if self.rule == "gauss_legendre":
            z, w = np.polynomial.legendre.leggauss(n)
            half = 0.5 * (hi - lo)
            return lo + half * (z + 1.0), half * w
        sign = 1.0 if lo >= 0 else -1.0
        w_lo = math.sqrt(m * m + min(lo * lo, hi * hi)) if lo >= 0 or hi <= 0 else m
        w_hi = math.sqrt(m * m + max(lo * lo, hi * hi))
        dw = (w_hi - w_lo) / n
        omegas = w_lo + (np.arange(n) + 0.5) * dw
        ks = sign * np.sqrt(np.maximum(omegas ** 2 - m * m, 0.0))
        # dk = (w / |k|) dw
        return ks, omegas / np.abs(ks) * dw

    def norm2(self, m):
        """Quadrature estimate of the integral of |f|^2 over k."""
        k, w = self.nodes(m)
        return float(np.sum(w * self.profile(k) ** 2))


def _packet_field(spec, m, n=None):
    k, w = spec.nodes(m, n)
    return WaveField.from_arrays(m, spec.profile(k) * w, k[:, None])


def _default_probes(spec):
    kappa = spec.bandwidth
    return [(0.0, x / kappa) for x in (0.0, 1.0, -1.0, 10.0, -10.0)]


def resolution_error(spec, m, probes=None):
    """Largest scaled change of phi and d phi at ``probes`` when n is doubled."""
    coarse = _packet_field(spec, m)
    fine = _packet_field(spec, m, 2 * spec.n)
    probes = _default_probes(spec) if probes is None else probes
    scale = fine.amplitude_sum
    dscale = scale * float(np.max(np.maximum(fine.omegas, np.abs(fine.wavevectors[:, 0]))))
    worst = 0.0
    for t, x in probes:
        xs = np.atleast_1d(float(x) if np.ndim(x) == 0 else x)
        ec, ef = coarse._exponentials(t, xs), fine._exponentials(t, xs)
        worst = max(worst, abs(np.sum(ec) - np.sum(ef)) / scale)
        worst = max(worst, float(np.max(np.abs(ec @ coarse._factors - ef @ fine._factors))) / dscale)
    return worst


def discretize_packet(spec: PacketSpec, m, probes=None, check=True) -> WaveField:
    """Replace the k-integral of a packet by a quadrature sum of plane waves.

    Mode j gets amplitude f(k_j) w_j.  With ``check`` the result is compared
    against the 2n-node discretization at ``probes`` (a list of ``(t, x)``)
    and :class:`UnresolvedPacket` is raised when they differ by more than
    ``RESOLUTION_RTOL`` relative to the field's sup bound.
    """
    if not m > 0:
        raise DomainError("mass must be positive")
    wf = _packet_field(spec, m)
    if check:
        err = resolution_error(spec, m, probes)
        if err > RESOLUTION_RTOL:
            raise UnresolvedPacket(
                f"n={spec.n} nodes do not resolve the probes (doubling changes the field by {err:.3g})"
            )
    return wf


def with_nodes(spec: PacketSpec, n: int, rule: str | None = None) -> PacketSpec:
    return dataclasses.replace(spec, n=int(n), rule=rule or spec.rule)
