"""Command-line entry point: `lls-lab <subcommand> --config <path>`.

Every run produces a deterministic artifact set in the output directory
plus manifest.json listing each file with its content hash and the fully
resolved configuration.  Exit codes: 0 ok, 1 configuration, 2 numerical
instability, 3 pole guard, 4 resolution.
"""

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import snapshot
from .config import ConfigError, load_config
from .core import CurrentField, SpaceTimeField, TorusGrid
from .errors import (
    NumericalInstabilityError,
    PoleProximityError,
    ResolutionError,
)
from .generators import (
    GENERATOR_NAME,
    gaussian_band_field,
    single_mode_field,
    sphere_perturbation,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INSTABILITY = 2
EXIT_POLE = 3
EXIT_RESOLUTION = 4


class ArtifactWriter:
    """Single funnel for output files so the manifest stays complete."""

    def __init__(self, out_dir):
        self.out_dir = out_dir
        os.makedirs(out_dir, exist_ok=True)
        self.files = []

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def register(self, name):
        self.files.append(name)
        return self.path(name)

    def write_json(self, name, payload):
        with open(self.register(name), "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_csv(self, name, header, rows):
        with open(self.register(name), "w") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(repr(x) for x in row) + "\n")

    def write_report(self, base, report):
        report.write_json(self.register(base + ".json"))

    def save_snapshot(self, name, writer_func, *args):
        writer_func(self.path(name), *args)
        self.files.append(name)
        self.files.append(name + ".json")

    def finish(self, config, seed):
        manifest = {
            "generator": GENERATOR_NAME,
            "seed": seed,
            "config": config,
            "files": [],
        }
        for name in sorted(set(self.files)):
            full = self.path(name)
            digest = hashlib.sha256(open(full, "rb").read()).hexdigest()
            manifest["files"].append(
                {"path": name, "sha256": digest, "bytes": os.path.getsize(full)}
            )
        with open(self.path("manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return manifest


def _build_grid(cfg):
    g = cfg["grid"]
    return TorusGrid(g["dim"], g["points_per_axis"], g["period"])


def _build_current(cfg, grid):
    v = cfg["v"]
    if v["kind"] == "zero":
        return CurrentField.zero(grid)
    if v["kind"] == "constant":
        return CurrentField.constant(grid, np.asarray(v["value"], dtype=float))
    path = os.path.join(os.path.dirname(cfg.path), v["path"])
    return snapshot.read_current(path)


def _build_u0(cfg, grid):
    init = cfg["initial"]
    kind = init["kind"]
    if kind == "file":
        path = os.path.join(os.path.dirname(cfg.path), init["path"])
        return snapshot.read_complex_field(path)
    if kind == "single_mode":
        return single_mode_field(grid, init["mode"], init["amplitude"])
    if kind == "shell_random":
        return gaussian_band_field(
            grid,
            cfg["seed"],
            shells=init.get("shells"),
            normalize="linf",
            amplitude=init["amplitude"],
        )
    raise ConfigError([f"initial.kind: {kind!r} does not describe complex data"])


def _build_m0(cfg, grid):
    init = cfg["initial"]
    if init["kind"] == "file":
        path = os.path.join(os.path.dirname(cfg.path), init["path"])
        return snapshot.read_magnetization(path)
    if init["kind"] == "sphere_perturbation":
        return sphere_perturbation(
            grid, init["amplitude"], cfg["seed"], max_mode=init.get("max_mode", 2)
        )
    raise ConfigError([f"initial.kind: {init['kind']!r} does not describe sphere data"])


# ---------------------------------------------------------------------------
# experiment runners


def _run_simulate_lls(cfg, writer):
    from .lls import lls_evolve, states_to_csv_rows

    grid = _build_grid(cfg)
    m0 = _build_m0(cfg, grid)
    v = _build_current(cfg, grid)
    t = cfg["time"]
    states = lls_evolve(
        m0,
        v,
        cfg["eps"],
        t["dt"],
        t["t_end"],
        scheme=cfg["solver"]["scheme"],
        snapshot_every=t["store_every"],
        c_stab=cfg["solver"]["c_stab"],
    )
    writer.save_snapshot("m_initial.llsf", snapshot.write_magnetization, states[0].m)
    writer.save_snapshot("m_final.llsf", snapshot.write_magnetization, states[-1].m)
    writer.write_csv(
        "run.csv",
        ("time", "exchange_energy", "sphere_deviation", "besov_m_minus_omega"),
        states_to_csv_rows(states),
    )
    return states


def _run_simulate_gl(cfg, writer):
    from .gl import gl_march

    grid = _build_grid(cfg)
    u0 = _build_u0(cfg, grid)
    v = _build_current(cfg, grid)
    t = cfg["time"]
    traj = gl_march(
        u0,
        v,
        cfg["eps"],
        t["dt"],
        t["t_end"],
        scheme=cfg["solver"]["scheme"],
        convention=cfg["solver"]["convention"],
        blowup_cap=cfg["solver"]["blowup_cap"],
        store_every=t["store_every"],
    )
    _save_trajectory(writer, traj)
    return traj


def _save_trajectory(writer, traj):
    for j in range(traj.num_slices):
        writer.save_snapshot(
            f"slice_{j:05d}.llsf",
            snapshot.write_snapshot,
            traj.grid,
            [traj.values[j]],
        )
    writer.write_json(
        "trajectory.json",
        {"dt": traj.dt, "t0": traj.t0, "times": [float(x) for x in traj.times()]},
    )


def _run_picard(cfg, writer):
    from .gl import picard_solve

    grid = _build_grid(cfg)
    u0 = _build_u0(cfg, grid)
    v = _build_current(cfg, grid)
    t = cfg["time"]
    traj, report = picard_solve(
        u0,
        v,
        cfg["eps"],
        t["dt"],
        t["t_end"],
        max_iters=cfg["picard"]["max_iters"],
        tol=cfg["picard"]["tol"],
        convention=cfg["solver"]["convention"],
    )
    writer.write_json("picard_report.json", report.to_dict())
    writer.save_snapshot("u_final.llsf", snapshot.write_complex_field, traj.slice(-1))
    return report


def _run_check_equivalence(cfg, writer):
    from .gl import gl_residual_preflip
    from .lls import lls_evolve
    from .stereo import project_trajectory

    grid = _build_grid(cfg)
    m0 = _build_m0(cfg, grid)
    v = _build_current(cfg, grid)
    t = cfg["time"]
    states = lls_evolve(
        m0,
        v,
        cfg["eps"],
        t["dt"],
        t["t_end"],
        scheme=cfg["solver"]["scheme"],
        snapshot_every=t["store_every"],
        c_stab=cfg["solver"]["c_stab"],
    )
    u_traj = project_trajectory(states, pole_guard=cfg["solver"]["pole_guard"])
    residual = gl_residual_preflip(u_traj, v, cfg["eps"])
    writer.write_json(
        "equivalence_report.json",
        {
            "residual": residual,
            "convention": "geometric",
            "dt": t["dt"],
            "store_every": t["store_every"],
            "t_end": t["t_end"],
            "eps": cfg["eps"],
            "v_sup": v.sup_norm,
        },
    )
    return residual


def _run_norms(cfg, writer):
    from .dyadic import compute_norm_report
    from .gl import semigroup_trajectory

    grid = _build_grid(cfg)
    u0 = _build_u0(cfg, grid)
    t = cfg["time"]
    num_slices = int(round(t["t_end"] / t["dt"])) + 1
    spatial_only = all(name.startswith("besov") for name in cfg["norms"])
    if num_slices < 2 and not spatial_only:
        raise ResolutionError(
            "space-time norms need time.t_end >= time.dt to synthesize a trajectory"
        )
    if num_slices < 2:
        num_slices = 2
    traj = semigroup_trajectory(u0, cfg["eps"], t["dt"], num_slices)
    report = compute_norm_report(traj, cfg["norms"])
    writer.write_report("norm_report", report)
    report.write_shell_csv(writer.register("norm_shells.csv"))
    return report


def _run_verify(cfg, writer):
    from .estimates import (
        check_linear_estimate,
        check_nonlinear_estimate,
        check_strichartz,
        measure_contraction,
    )

    ver = cfg["verify"]
    which = ver["which"]
    k_lo, k_hi = ver["k_range"]
    k_range = list(range(k_lo, k_hi + 1))
    if which == "strichartz":
        report = check_strichartz(
            k_range, ver["eps_list"], ver["samples"], base_seed=cfg["seed"]
        )
    elif which == "linear":
        report = check_linear_estimate(
            ver["eps_list"], k_range, ver["samples"], base_seed=cfg["seed"]
        )
    elif which == "nonlinear":
        report = check_nonlinear_estimate(
            ver["eps_list"], ver["amplitudes"], ver["samples"], base_seed=cfg["seed"]
        )
    else:  # contraction
        grid = _build_grid(cfg)
        u0 = _build_u0(cfg, grid)
        u0_a = type(u0)(grid, 1.5 * u0.values, u0.representation)
        v = _build_current(cfg, grid)
        t = cfg["time"]
        report = measure_contraction(
            u0_a, u0, v, cfg["eps"], iters=4, dt=t["dt"], t_end=t["t_end"]
        )
    writer.write_json(f"ratio_report_{which}.json", report.to_dict())
    report.write_csv(writer.register(f"ratio_report_{which}.csv"))
    return report


def _run_sweep(cfg, writer):
    from .estimates import smallness_sweep

    sw = cfg["sweep"]
    report = smallness_sweep(
        sw["eps_list"],
        sw["amplitudes"],
        sw["v_amps"],
        window=sw["window"],
        num_slices=sw["num_slices"],
        base_seed=cfg["seed"],
    )
    writer.write_json("sweep_report.json", report.to_dict())
    for v_amp in sw["v_amps"]:
        report.write_phase_csv(writer.register(f"phase_v={v_amp:g}.csv"), v_amp=v_amp)
    return report


RUNNERS = {
    "simulate-lls": _run_simulate_lls,
    "simulate-gl": _run_simulate_gl,
    "picard": _run_picard,
    "check-equivalence": _run_check_equivalence,
    "norms": _run_norms,
    "verify": _run_verify,
    "sweep": _run_sweep,
}


def run(cfg, out_dir):
    """Execute a validated configuration; returns (exit_code, manifest)."""
    writer = ArtifactWriter(out_dir)
    try:
        RUNNERS[cfg.kind](cfg, writer)
    except PoleProximityError as exc:
        print(f"pole guard violation: {exc}", file=sys.stderr)
        return EXIT_POLE, None
    except NumericalInstabilityError as exc:
        print(f"numerical instability: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY, None
    except ResolutionError as exc:
        print(f"resolution error: {exc}", file=sys.stderr)
        return EXIT_RESOLUTION, None
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG, None
    manifest = writer.finish(cfg.resolved(), cfg["seed"])
    return EXIT_OK, manifest


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="lls-lab",
        description="Pseudospectral LLS / Ginzburg-Landau laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in RUNNERS:
        p = sub.add_parser(kind)
        p.add_argument("--config", required=True, help="YAML configuration file")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config key (dotted path), e.g. --set grid.points_per_axis=32",
        )
        p.add_argument("--out", default=None, help="output directory (default: ./out)")
    args = parser.parse_args(argv)

    overrides = []
    for item in args.set:
        if "=" not in item:
            print(f"config error: --set expects KEY=VALUE, got {item!r}", file=sys.stderr)
            return EXIT_CONFIG
        key, _, value = item.partition("=")
        overrides.append((key, value))

    try:
        cfg = load_config(args.config, overrides=overrides, kind=args.command)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = args.out or os.path.join(os.getcwd(), "out")
    code, _ = run(cfg, out_dir)
    return code


if __name__ == "__main__":
    sys.exit(main())
