"""Batch front end: run, validate, or post-process configured experiments.

    icefront run <config.yaml> [--seed S] [--out DIR] [--threads T]
                               [--check expected.tol]
    icefront validate <config.yaml>
    icefront plotdata <run-dir>

``run`` writes the artifacts described in :mod:`icefront.artifacts` plus a
``resolved.yaml`` provenance copy and a ``manifest.json`` hashing every file.
Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 a
tolerance check missed (only when a check file is given).
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import artifacts, solver1d, solver2d, uq
from .config import RunConfig, config_hash, load_config, write_resolved
from .errors import ConfigError, IcefrontError

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_TOLERANCE = 4


def _fail(exc: IcefrontError) -> int:
    print(f"error [{exc.code}]: {exc}", file=sys.stderr)
    return EXIT_CONFIG if isinstance(exc, ConfigError) else EXIT_NUMERICAL


def _run_simulate1d(rc: RunConfig, run_dir: Path, *, audit: bool) -> dict:
    result = solver1d.run(
        rc.grid,
        rc.cfg,
        snapshots=rc.snapshots,
        lag_iterations=rc.solver.lag_iterations,
        lag_tol=rc.solver.lag_tol,
        insulated=rc.solver.insulated,
    )
    trace = solver1d.interface_trace(result)
    artifacts.write_trace(run_dir, trace)
    artifacts.write_fields_1d(run_dir, result, rc.fields)
    extra = {"final_s_phys": float(trace.s_phys[-1])}
    if audit:
        report = solver1d.energy_audit(result)
        artifacts.write_audit(run_dir, report)
        extra["max_relative_residual"] = report.max_relative_residual
    return extra


def _run_oracle(rc: RunConfig, run_dir: Path) -> dict:
    solution = solver1d.neumann_oracle(rc.cfg)
    taus = solver1d.snapshot_taus(rc.grid, rc.snapshots)
    artifacts.write_oracle(run_dir, taus, np.asarray(solution(taus), dtype=float))
    return {"similarity_coefficient": solution.lam}


def _run_simulate2d(rc: RunConfig, run_dir: Path) -> dict:
    result = solver2d.run(rc.grid, rc.cfg, snapshots=rc.snapshots)
    curve = solver2d.interface_curve(result)
    artifacts.write_curve(run_dir, curve, rc.grid.y)
    artifacts.write_modes(run_dir, curve)
    artifacts.write_fields_2d(run_dir, result, rc.fields)
    return {"final_s_phys_mean": float(curve.s_phys[-1].mean())}


def _run_uq(rc: RunConfig, run_dir: Path) -> dict:
    campaign = uq.run_uq_2d if rc.is_2d else uq.run_uq_1d
    surrogate = campaign(
        rc.spec,
        rc.cfg,
        rc.grid,
        m_samples=rc.uq.samples,
        degree=rc.uq.degree,
        seed=rc.seed,
        m_factor=rc.uq.m_factor,
        snapshots=rc.snapshots,
        threads=rc.threads,
    )
    stats = uq.statistics(
        surrogate,
        bins=rc.uq.bins,
        hist_time_index=rc.uq.hist_time,
        hist_y_index=rc.uq.hist_y,
    )
    artifacts.write_surrogate(run_dir, surrogate)
    artifacts.write_statistics(run_dir, stats)
    artifacts.write_histogram(run_dir, stats)
    artifacts.write_archive(run_dir, surrogate)
    m_samples = surrogate.archive.n_samples
    return {
        "samples": m_samples,
        "degree": rc.uq.degree,
        "basis_size": surrogate.basis.size,
        "gram_condition": surrogate.condition,
        "sample_log": uq.sample_log(rc.spec, m_samples, rc.seed),
        "sample_status": ["ok"] * m_samples,
    }


_DISPATCH = {
    "simulate1d": lambda rc, d: _run_simulate1d(rc, d, audit=False),
    "audit": lambda rc, d: _run_simulate1d(rc, d, audit=True),
    "oracle": _run_oracle,
    "simulate2d": _run_simulate2d,
    "uq1d": _run_uq,
    "uq2d": _run_uq,
}


def cmd_run(args) -> int:
    try:
        rc = load_config(args.config, overrides={"seed": args.seed,
                                                 "threads": args.threads})
    except IcefrontError as exc:
        return _fail(exc)

    if args.out is not None:
        run_dir = Path(args.out)
    elif rc.output is not None:
        run_dir = rc.output
    else:
        run_dir = Path("runs") / Path(args.config).stem
    try:
        run_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error [config]: cannot create {run_dir}: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    write_resolved(rc, run_dir / "resolved.yaml")
    cfg_hash = config_hash(rc)
    started = time.perf_counter()
    try:
        extra = _DISPATCH[rc.mode](rc, run_dir)
    except IcefrontError as exc:
        manifest = artifacts.build_manifest(
            run_dir, mode=rc.mode, cfg_hash=cfg_hash, seed=rc.seed,
            wall_time=time.perf_counter() - started,
            error={"code": exc.code, "message": str(exc)},
        )
        artifacts.write_manifest(run_dir, manifest)
        return _fail(exc)

    manifest = artifacts.build_manifest(
        run_dir, mode=rc.mode, cfg_hash=cfg_hash, seed=rc.seed,
        wall_time=time.perf_counter() - started, extra=extra,
    )
    artifacts.write_manifest(run_dir, manifest)
    print(f"run complete: {rc.mode} -> {run_dir} "
          f"({len(manifest['files'])} artifacts)")

    check_path = Path(args.check) if args.check else rc.check
    if check_path is None:
        return EXIT_OK
    try:
        checks = artifacts.load_checks(check_path)
        results = artifacts.run_checks(run_dir, checks)
    except IcefrontError as exc:
        return _fail(exc)
    for result in results:
        print(artifacts.format_check(result))
    if all(r["ok"] for r in results):
        return EXIT_OK
    print(f"{sum(not r['ok'] for r in results)} of {len(results)} checks missed",
          file=sys.stderr)
    return EXIT_TOLERANCE


def cmd_validate(args) -> int:
    try:
        rc = load_config(args.config)
    except IcefrontError as exc:
        return _fail(exc)
    from .config import resolved_yaml

    sys.stdout.write(resolved_yaml(rc))
    grid = rc.grid
    print(f"config ok: mode={rc.mode}, {grid.n_steps} steps to "
          f"tau={grid.tau_end}, hash={config_hash(rc)[:12]}")
    if rc.is_uq:
        from .uq import legendre_basis

        basis = legendre_basis(rc.spec, rc.uq.degree)
        m_samples = rc.uq.samples
        if m_samples is None:
            m_samples = rc.uq.m_factor * basis.size**2
        print(f"campaign: {m_samples} samples, basis size {basis.size}, "
              f"seed {rc.seed}")
    return EXIT_OK


def cmd_plotdata(args) -> int:
    from .reports import emit_plot_data

    try:
        paths = emit_plot_data(args.rundir)
    except IcefrontError as exc:
        return _fail(exc)
    for path in paths:
        print(path)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="icefront",
        description="Config-driven front ends for the solidification solvers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a configured experiment")
    p_run.add_argument("config", help="YAML run configuration")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the campaign seed")
    p_run.add_argument("--out", default=None, help="run directory")
    p_run.add_argument("--threads", type=int, default=None,
                       help="campaign worker count")
    p_run.add_argument("--check", default=None,
                       help="tolerance file; misses exit with status 4")
    p_run.set_defaults(fn=cmd_run)

    p_val = sub.add_parser("validate", help="validate a config and echo defaults")
    p_val.add_argument("config", help="YAML run configuration")
    p_val.set_defaults(fn=cmd_validate)

    p_plot = sub.add_parser("plotdata", help="emit plot series for a finished run")
    p_plot.add_argument("rundir", help="directory written by 'run'")
    p_plot.set_defaults(fn=cmd_plotdata)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
