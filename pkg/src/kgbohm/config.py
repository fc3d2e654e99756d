"""Line-based ``key = value`` scenario files.

Example::

    # the two-mode field
    scenario = two_mode
    m = 1
    omega = 3
    A = 0.6666666667
    x0 = 0
    t0 = 0
    t_end = 200
    integrator.rtol = 1e-10

Every key must appear in :data:`SCHEMA`; unknown or repeated keys are parse
errors.  Only ``integrator.*`` and ``outputs.*`` keys have defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, ParseError, ValidationError
from .wavefield import PacketSpec


def _float(text):
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("not finite")
    return value


def _int(text):
    return int(text)


def _bool(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _floats(text):
    return tuple(_float(p) for p in text.split(",") if p.strip())


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return parse


SCHEMA = {
    "scenario": _choice("two_mode", "packet"),
    "m": _float,
    "omega": _float,
    "A": _float,
    "packet.family": _choice("gaussian", "tophat"),
    "packet.k0": _float,
    "packet.sigma": _float,
    "packet.kmin": _float,
    "packet.kmax": _float,
    "packet.n": _int,
    "packet.rule": _choice("gauss_legendre", "uniform_omega"),
    "packet.support_positive": _bool,
    "x0": _float,
    "t0": _float,
    "t_end": _float,
    "integrator.rtol": _float,
    "integrator.atol": _float,
    "outputs.stride": _float,
    "outputs.probes": _floats,
    "outputs.window": _floats,
    "outputs.T": _float,
    "outputs.ladder": _int,
}

FAMILY_KEYS = {
    "gaussian": ("packet.k0", "packet.sigma"),
    "tophat": ("packet.kmin", "packet.kmax"),
}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    m: float
    x0: float
    t0: float
    t_end: float
    omega: float | None = None
    A: float | None = None
    packet: PacketSpec | None = None
    rtol: float = 1e-9
    atol: float = 1e-12
    stride: float | None = None
    probes: tuple | None = None
    window: tuple | None = None
    T: float | None = None
    ladder: int = 4


def parse_config(text: str) -> ScenarioConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA:
            raise ParseError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", lineno)
        if not value:
            raise ParseError(f"missing value for {key!r}", lineno)
        try:
            values[key] = SCHEMA[key](value)
        except ValueError as exc:
            raise ParseError(f"bad value for {key!r}: {exc}", lineno) from None
    return _validate(values)


def _require(values, key):
    if key not in values:
        raise ValidationError(key, "required key is missing")
    return values[key]


def _reject(values, keys, why):
    for key in keys:
        if key in values:
            raise ValidationError(key, why)


def _validate(v) -> ScenarioConfig:
    scenario = _require(v, "scenario")
    m = _require(v, "m")
    if not m > 0:
        raise ValidationError("m", "mass must be positive")
    x0, t0, t_end = (_require(v, k) for k in ("x0", "t0", "t_end"))
    if not t_end > t0:
        raise ValidationError("t_end", "must exceed t0")
    packet_keys = [k for k in SCHEMA if k.startswith("packet.")]
    omega = A = packet = None
    if scenario == "two_mode":
        _reject(v, packet_keys, "not used by scenario two_mode")
        omega, A = _require(v, "omega"), _require(v, "A")
        if not omega > m:
            raise ValidationError("omega", "mass shell requires omega > m")
    else:
        _reject(v, ("omega", "A"), "not used by scenario packet")
        family = _require(v, "packet.family")
        for key in FAMILY_KEYS[family]:
            _require(v, key)
        other = [k for fam, keys in FAMILY_KEYS.items() if fam != family for k in keys]
        _reject(v, other, f"not a parameter of the {family} family")
        params = {k.split(".", 1)[1]: v[k] for k in FAMILY_KEYS[family]}
        n = v.get("packet.n", 128)
        if n < 2:
            raise ValidationError("packet.n", "need at least 2 quadrature nodes")
        try:
            packet = PacketSpec(
                family,
                n=n,
                rule=v.get("packet.rule", "gauss_legendre"),
                support_positive=v.get("packet.support_positive", False),
                **params,
            )
        except DomainError as exc:
            raise ValidationError("packet", str(exc)) from None

    for key in ("integrator.rtol", "integrator.atol", "outputs.stride", "outputs.T"):
        if key in v and not v[key] > 0:
            raise ValidationError(key, "must be positive")
    if "outputs.ladder" in v and v["outputs.ladder"] < 1:
        raise ValidationError("outputs.ladder", "must be at least 1")
    window = v.get("outputs.window")
    if window is not None and (len(window) != 2 or not window[0] < window[1]):
        raise ValidationError("outputs.window", "expected 't_lo, t_hi' with t_lo < t_hi")
    probes = v.get("outputs.probes")
    if probes is not None and (not probes or any(p == 0 for p in probes)):
        raise ValidationError("outputs.probes", "expected a nonempty list of nonzero positions")

    return ScenarioConfig(
        scenario=scenario,
        m=m,
        x0=x0,
        t0=t0,
        t_end=t_end,
        omega=omega,
        A=A,
        packet=packet,
        rtol=v.get("integrator.rtol", 1e-9),
        atol=v.get("integrator.atol", 1e-12),
        stride=v.get("outputs.stride"),
        probes=probes,
        window=window,
        T=v.get("outputs.T"),
        ladder=v.get("outputs.ladder", 4),
    )
