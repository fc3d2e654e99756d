"""``kgbohm`` command line: trajectory, farfield, density and sweep runs.

Each command reads a scenario file (see :mod:`kgbohm.config`) and writes CSV
with ``%.17g`` numbers, a header row, and ``#`` summary lines after the data.

Exit codes: 0 success, 2 configuration error, 3 singular initial event,
4 sweep in which every scenario failed.
"""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis
from .config import ScenarioConfig, parse_config
from .errors import (
    DomainError,
    EmptyWindow,
    ESingularity,
    NodeProximity,
    ParseError,
    UnresolvedPacket,
    ValidationError,
)
from .trajectory import IntegratorOptions, has_energy_collapse, integrate, mean_two_mode_velocity
from .wavefield import TwoModeParams, discretize_packet

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SINGULAR_START = 3
EXIT_SWEEP_FAILED = 4

COMMANDS = ("trajectory", "farfield", "density")
TRAJECTORY_HEADER = "t,x,v,E,P,R2,Msq,causal_class,in_episode"
FARFIELD_HEADER = "probe_x,distance_in_bandwidths,exact_v,limit_v,deviation,status"
DENSITY_HEADER = "T,avg_E,avg_P,ratio,oracle_E,oracle_P,oracle_ratio"


class CommandError(Exception):
    def __init__(self, code, message):
        self.code = code
        super().__init__(message)


def fmt(value):
    return "%.17g" % value


def _row(*fields):
    return ",".join(f if isinstance(f, str) else fmt(f) for f in fields) + "\n"


def _field(cfg: ScenarioConfig, probes=None):
    if cfg.scenario == "two_mode":
        return TwoModeParams(cfg.m, cfg.omega, cfg.A).field()
    try:
        return discretize_packet(cfg.packet, cfg.m, probes=probes)
    except UnresolvedPacket as exc:
        raise CommandError(EXIT_CONFIG, str(exc)) from None


def run_trajectory_command(cfg: ScenarioConfig) -> str:
    wf = _field(cfg, probes=[(cfg.t0, cfg.x0)])
    opts = IntegratorOptions(rtol=cfg.rtol, atol=cfg.atol, stride=cfg.stride)
    try:
        traj = integrate(wf, [cfg.x0], cfg.t0, cfg.t_end, opts)
    except (NodeProximity, ESingularity) as exc:
        raise CommandError(EXIT_SINGULAR_START, f"initial event is singular: {exc}") from None

    out = io.StringIO()
    out.write(TRAJECTORY_HEADER + "\n")
    for s in traj.samples:
        flag = "1" if traj.in_episode(s) else "0"
        out.write(_row(s.t, s.x[0], s.v[0], s.E, s.P[0], s.R2, s.Msq, s.causal_class, flag))

    t_last = traj.samples[-1].t
    window = cfg.window or (cfg.t0 + 0.5 * (t_last - cfg.t0), t_last)
    try:
        mean_v = float(analysis.time_average_velocity(traj, window, predicted_v=0.0).mean_v[0])
    except EmptyWindow:
        mean_v = math.nan
    out.write(f"# termination={traj.termination}\n")
    out.write(f"# episodes={len(traj.superluminal_episodes)}\n")
    for ep in traj.superluminal_episodes:
        out.write(f"# episode={fmt(ep.t_start)},{fmt(ep.t_end)},{fmt(ep.v_extreme)}\n")
    out.write(f"# mean_v_window={fmt(mean_v)}\n")
    if cfg.scenario == "two_mode":
        params = TwoModeParams(cfg.m, cfg.omega, cfg.A)
        out.write(f"# eq14_prediction={fmt(analysis.averaged_speed_prediction(cfg.m, cfg.omega))}\n")
        if not has_energy_collapse(params):
            out.write(f"# circulating_mean_v={fmt(mean_two_mode_velocity(params))}\n")
    return out.getvalue()


def _packet_only(cfg, command):
    if cfg.scenario != "packet":
        raise CommandError(EXIT_CONFIG, f"{command} needs scenario = packet")


def default_probes(cfg):
    kappa = cfg.packet.bandwidth
    return tuple(d / kappa for d in np.geomspace(0.1, 100.0, 13))


def run_farfield_command(cfg: ScenarioConfig) -> str:
    _packet_only(cfg, "farfield")
    probes = cfg.probes or default_probes(cfg)
    try:
        reports = analysis.far_field_scan(cfg.packet, cfg.m, cfg.t0, probes)
    except UnresolvedPacket as exc:
        raise CommandError(EXIT_CONFIG, str(exc)) from None
    out = io.StringIO()
    out.write(FARFIELD_HEADER + "\n")
    for r in reports:
        out.write(_row(r.probe_x, r.distance_in_bandwidths, r.exact_v, r.limit_v, r.deviation, r.status))
    out.write(f"# limit_v={fmt(analysis.far_field_velocity_limit(cfg.packet, cfg.m))}\n")
    return out.getvalue()


def default_T(cfg):
    spec = cfg.packet
    width = spec.sigma if spec.family == "gaussian" else spec.kmax - spec.kmin
    return 1e4 / width


def run_density_command(cfg: ScenarioConfig) -> str:
    _packet_only(cfg, "density")
    if not cfg.packet.support_positive:
        raise CommandError(EXIT_CONFIG, "packet.support_positive: density averages need k > 0 support")
    T0 = cfg.T or default_T(cfg)
    out = io.StringIO()
    out.write(DENSITY_HEADER + "\n")
    for i in range(cfg.ladder):
        T = T0 * 2 ** i
        try:
            r = analysis.long_time_density_average(cfg.packet, cfg.m, [cfg.x0], T)
        except UnresolvedPacket as exc:
            raise CommandError(EXIT_CONFIG, str(exc)) from None
        out.write(_row(T, r.avg_E_density, r.avg_P_density, r.ratio, r.oracle_E, r.oracle_P, r.oracle_ratio))
    return out.getvalue()


RUNNERS = {
    "trajectory": run_trajectory_command,
    "farfield": run_farfield_command,
    "density": run_density_command,
}


def execute(command, config_text):
    """Run one command on config text; returns (exit_code, csv_text, message)."""
    try:
        cfg = parse_config(config_text)
        return EXIT_OK, RUNNERS[command](cfg), ""
    except (ParseError, ValidationError, DomainError) as exc:
        return EXIT_CONFIG, "", f"config error: {exc}"
    except CommandError as exc:
        return exc.code, "", str(exc)


# --------------------------------------------------------------------------
# sweeps


def parse_sweep(text, base_dir):
    """Sweep files list one ``<command> <config path>`` per line."""
    entries = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 1)
        command = parts[0]
        path = Path(parts[1].strip()) if len(parts) > 1 else None
        if path is not None and not path.is_absolute():
            path = Path(base_dir) / path
        entries.append((command, path))
    return entries


def _sweep_one(index, command, path, out_dir):
    name = f"{index:03d}_{command}.csv"
    if command not in COMMANDS or path is None:
        return index, command, path, EXIT_CONFIG, "", f"bad sweep entry {command!r}"
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        return index, command, path, EXIT_CONFIG, "", str(exc)
    code, csv_text, message = execute(command, text)
    if code == EXIT_OK:
        with open(Path(out_dir) / name, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(csv_text)
        return index, command, path, code, name, message
    return index, command, path, code, "", message


def sweep_workers():
    env = os.environ.get("KGBOHM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(4, os.cpu_count() or 1)


def run_sweep(entries, out_dir):
    """Run entries concurrently; returns (exit_code, index_csv_text)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with ThreadPoolExecutor(max_workers=sweep_workers()) as pool:
        futures = [pool.submit(_sweep_one, i, cmd, path, out_dir) for i, (cmd, path) in enumerate(entries)]
        results = [f.result() for f in futures]
    index = io.StringIO()
    index.write("index,command,config,status,output\n")
    for i, command, path, code, name, _ in results:
        index.write(f"{i},{command},{'' if path is None else path},{code},{name}\n")
    text = index.getvalue()
    (out_dir / "index.csv").write_text(text, encoding="utf-8")
    ok = any(r[3] == EXIT_OK for r in results)
    return (EXIT_OK if ok else EXIT_SWEEP_FAILED), text


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="kgbohm",
        description="Guidance-law trajectories and averaged velocities for Klein-Gordon fields.",
    )
    parser.add_argument("command", choices=COMMANDS + ("sweep",))
    parser.add_argument("--config", required=True, help="scenario file (sweep: list of '<command> <config>')")
    parser.add_argument("--out", help="output file (sweep: output directory)")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"kgbohm: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "sweep":
        base = Path(args.config).parent
        entries = parse_sweep(text, base)
        if not entries:
            print("kgbohm: sweep lists no scenarios", file=sys.stderr)
            return EXIT_SWEEP_FAILED
        out_dir = args.out or base / (Path(args.config).stem + "_out")
        code, index = run_sweep(entries, out_dir)
        sys.stdout.write(index)
        return code

    code, csv_text, message = execute(args.command, text)
    if code != EXIT_OK:
        print(f"kgbohm: {message}", file=sys.stderr)
        return code
    _emit(csv_text, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
