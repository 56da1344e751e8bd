"""Command line entry point.

Exit codes: 0 success, 1 a verification check failed, 2 invalid
configuration, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from netfhn import __version__
from netfhn.config import ConfigError, load_config
from netfhn.io import (SCHEMA_VERSION, write_jumps_ndjson, write_json, write_report,
                       write_spectrum_csv, write_trajectory_csv)
from netfhn.levy import sample_jumps
from netfhn.integrator import simulate
from netfhn.spectral import decompose
from netfhn.verification import run_all

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

log = logging.getLogger("netfhn")


def _seed(args, cfg):
    return cfg.seed if args.seed is None else args.seed


def cmd_simulate(args, cfg):
    seed = _seed(args, cfg)
    problem = cfg.build_problem()
    path = sample_jumps(cfg.noise, cfg.horizon, seed, 0)
    traj = simulate(problem, cfg.scheme, path)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    traj_name, jump_name = cfg.output["trajectory"], cfg.output["jumps"]
    write_trajectory_csv(out / traj_name, problem.mesh, traj.times, traj.states)
    write_jumps_ndjson(out / jump_name, traj.jump_log)
    write_json(out / "run.json", {
        "schema_version": SCHEMA_VERSION,
        "netfhn_version": __version__,
        "seed": seed,
        "config": cfg.raw,
        "n_dofs": problem.mesh.n_dofs,
        "n_records": int(traj.times.size),
        "sup_norm_sq": traj.sup_norm_sq,
        "files": {"trajectory": traj_name, "jumps": jump_name},
        **{k: v for k, v in traj.metadata.items()},
    })
    print(f"wrote {traj.times.size} records and {len(traj.jump_log)} jumps to {out}")
    return EXIT_OK


def cmd_verify(args, cfg):
    v = cfg.verify
    paths = v["paths"] if args.paths is None else args.paths
    reports = run_all(cfg.build_problem(), cfg.scheme, seed=_seed(args, cfg), paths=paths,
                      pairs=v["pairs"], dt_list=v["dt_list"], lambda_list=v["lambda_list"],
                      convergence_paths=v["convergence_paths"], explosion_guard=v["explosion_guard"])
    for r in reports:
        print(r.summary())
    if args.out is not None:
        write_report(args.out, reports)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK


def cmd_spectrum(args, cfg):
    dec = decompose(cfg.build_generator())
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    write_spectrum_csv(out, dec.eigenvalues)
    print(f"spectral bound {dec.eigenvalues[0]:.12g}; wrote {dec.n_dofs} eigenvalues to {out}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="netfhn", description="Stochastic FitzHugh-Nagumo on networks")
    parser.add_argument("--version", action="version", version=f"netfhn {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate one path and write trajectory and jump log")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run the verification checks")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--paths", type=int, help="Monte Carlo paths (isometry uses at least 1000)")
    p.add_argument("--out", help="directory for report.json and report.txt")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("spectrum", help="write the eigenvalues of the discrete generator")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="CSV file")
    p.set_defaults(func=cmd_spectrum)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "seed", None) is not None and args.seed < 0:
        print("error: --seed must be nonnegative", file=sys.stderr)
        return EXIT_CONFIG
    if getattr(args, "paths", None) is not None and args.paths < 2:
        print("error: --paths must be at least 2", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args, cfg)
    except Exception as exc:  # noqa: BLE001 - mapped to the runtime exit code
        log.debug("runtime failure", exc_info=True)
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
