"""Run artifacts: delimited result files, the run manifest, tolerance checks.

Every number is written as its shortest round-trip decimal (``repr`` of a
Python float), so artifacts reload losslessly and rerunning a pinned recipe
reproduces byte-identical files.  The manifest lists a content hash for each
file, which is how determinism is checked without diffing the files
themselves.

File layouts (header row, comma separated):

    interface.csv    tau, s_star, s_phys, L, v_est, regime
    levels.csv       tau, s_mid, s_liquid
    fields.csv       tau, then one column per grid node labelled by z
    interface2d.csv  tau, y, s_star, s_phys
    fields2d.csv     tau, y, z, phi
    modes.csv        tau, then transverse Fourier amplitude per wavenumber
    audit.csv        tau, energy, residual
    oracle.csv       tau, s_analytic
    coefficients.csv n, multi_index, tau[, y], coeff
    statistics.csv   tau[, y], mean, std, skewness, kurtosis
    histogram.csv    bin_lo, bin_hi, count
    archive.csv      m, parameter columns, tau[, y], response
"""

from __future__ import annotations

import hashlib
import json
import platform
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError
from .solver1d import AuditResult, InterfaceTrace, Run1D, classify_regime
from .solver2d import InterfaceCurve, Run2D, mode_amplitudes
from .uq import GpcSurrogate, Statistics

__all__ = [
    "fmt",
    "write_csv",
    "read_csv",
    "column",
    "write_trace",
    "write_fields_1d",
    "write_curve",
    "write_fields_2d",
    "write_modes",
    "write_audit",
    "write_oracle",
    "write_surrogate",
    "write_statistics",
    "write_histogram",
    "write_archive",
    "build_manifest",
    "write_manifest",
    "load_checks",
    "run_checks",
    "format_check",
]

MANIFEST_NAME = "manifest.json"


def fmt(value) -> str:
    """Shortest decimal that round-trips back to the same float."""
    return repr(float(value))


def write_csv(path, header, rows) -> Path:
    """Write one delimited file; floats formatted by :func:`fmt`, strings verbatim."""
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"missing artifact: {path}")
    lines = path.read_text().splitlines()
    if not lines:
        raise ConfigError(f"empty artifact: {path}")
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:]]


def column(parsed, name: str) -> np.ndarray:
    """Extract one numeric column from ``read_csv`` output."""
    header, rows = parsed
    try:
        idx = header.index(name)
    except ValueError:
        raise ConfigError(f"no column {name!r}; have {header}") from None
    return np.array([float(r[idx]) for r in rows])


# -- solver outputs ----------------------------------------------------------

def write_trace(out_dir: Path, trace: InterfaceTrace) -> list[Path]:
    regimes = classify_regime(trace)
    p1 = write_csv(
        out_dir / "interface.csv",
        ["tau", "s_star", "s_phys", "L", "v_est", "regime"],
        (
            (trace.taus[i], trace.s_star[i], trace.s_phys[i], trace.length[i],
             trace.v_est[i], str(regimes[i]))
            for i in range(trace.taus.size)
        ),
    )
    p2 = write_csv(
        out_dir / "levels.csv",
        ["tau", "s_mid", "s_liquid"],
        zip(trace.taus, trace.s_mid, trace.s_liquid),
    )
    return [p1, p2]


def write_fields_1d(out_dir: Path, result: Run1D, policy: str) -> list[Path]:
    if policy == "none":
        return []
    idxs = [result.taus.size - 1] if policy == "final" else range(result.taus.size)
    header = ["tau"] + [fmt(z) for z in result.grid.z]
    rows = ([result.taus[i], *result.phis[i]] for i in idxs)
    return [write_csv(out_dir / "fields.csv", header, rows)]


def write_curve(out_dir: Path, curve: InterfaceCurve, ys: np.ndarray) -> list[Path]:
    def rows():
        for i in range(curve.taus.size):
            for j in range(ys.size):
                yield (curve.taus[i], ys[j], curve.s_star[i, j], curve.s_phys[i, j])

    return [write_csv(out_dir / "interface2d.csv",
                      ["tau", "y", "s_star", "s_phys"], rows())]


def write_fields_2d(out_dir: Path, result: Run2D, policy: str) -> list[Path]:
    if policy == "none":
        return []
    idxs = [result.taus.size - 1] if policy == "final" else range(result.taus.size)
    ys, zs = result.grid.y, result.grid.z

    def rows():
        for i in idxs:
            for j in range(ys.size):
                for k in range(zs.size):
                    yield (result.taus[i], ys[j], zs[k], result.phis[i, j, k])

    return [write_csv(out_dir / "fields2d.csv", ["tau", "y", "z", "phi"], rows())]


def write_modes(out_dir: Path, curve: InterfaceCurve, max_mode: int = 8) -> list[Path]:
    amps = np.stack([mode_amplitudes(row) for row in curve.s_phys])
    n_modes = min(max_mode + 1, amps.shape[1])
    header = ["tau"] + [f"k{k}" for k in range(n_modes)]
    rows = ([curve.taus[i], *amps[i, :n_modes]] for i in range(curve.taus.size))
    return [write_csv(out_dir / "modes.csv", header, rows)]


def write_audit(out_dir: Path, audit: AuditResult) -> list[Path]:
    return [write_csv(out_dir / "audit.csv", ["tau", "energy", "residual"],
                      zip(audit.taus, audit.energies, audit.residuals))]


def write_oracle(out_dir: Path, taus: np.ndarray, positions: np.ndarray) -> list[Path]:
    return [write_csv(out_dir / "oracle.csv", ["tau", "s_analytic"],
                      zip(taus, positions))]


# -- campaign outputs --------------------------------------------------------

def _multi_label(midx) -> str:
    return "|".join(str(int(k)) for k in midx)


def write_surrogate(out_dir: Path, surrogate: GpcSurrogate) -> list[Path]:
    basis = surrogate.basis
    taus = surrogate.taus
    ys = surrogate.ys
    if ys is None:
        header = ["n", "multi_index", "tau", "coeff"]

        def rows():
            for n in range(basis.size):
                label = _multi_label(basis.multi_indices[n])
                for i in range(taus.size):
                    yield (str(n), label, taus[i], surrogate.coeffs[n, i])
    else:
        header = ["n", "multi_index", "tau", "y", "coeff"]

        def rows():
            for n in range(basis.size):
                label = _multi_label(basis.multi_indices[n])
                for i in range(taus.size):
                    for j in range(ys.size):
                        yield (str(n), label, taus[i], ys[j],
                               surrogate.coeffs[n, i, j])
    return [write_csv(out_dir / "coefficients.csv", header, rows())]


def write_statistics(out_dir: Path, stats: Statistics) -> list[Path]:
    if stats.ys is None:
        header = ["tau", "mean", "std", "skewness", "kurtosis"]
        rows = (
            (stats.taus[i], stats.mean[i], stats.std[i],
             stats.skewness[i], stats.kurtosis[i])
            for i in range(stats.taus.size)
        )
    else:
        header = ["tau", "y", "mean", "std", "skewness", "kurtosis"]

        def gen():
            for i in range(stats.taus.size):
                for j in range(stats.ys.size):
                    yield (stats.taus[i], stats.ys[j], stats.mean[i, j],
                           stats.std[i, j], stats.skewness[i, j],
                           stats.kurtosis[i, j])
        rows = gen()
    return [write_csv(out_dir / "statistics.csv", header, rows)]


def write_histogram(out_dir: Path, stats: Statistics) -> list[Path]:
    rows = (
        (stats.hist_edges[i], stats.hist_edges[i + 1], str(int(stats.hist_counts[i])))
        for i in range(stats.hist_counts.size)
    )
    return [write_csv(out_dir / "histogram.csv", ["bin_lo", "bin_hi", "count"], rows)]


def write_archive(out_dir: Path, surrogate: GpcSurrogate) -> list[Path]:
    archive = surrogate.archive
    names = list(surrogate.basis.names)
    taus = archive.taus
    ys = archive.ys
    if ys is None:
        header = ["m"] + names + ["tau", "response"]

        def rows():
            for m in range(archive.n_samples):
                params = archive.params[m]
                for i in range(taus.size):
                    yield (str(m), *params, taus[i], archive.responses[m, i])
    else:
        header = ["m"] + names + ["tau", "y", "response"]

        def rows():
            for m in range(archive.n_samples):
                params = archive.params[m]
                for i in range(taus.size):
                    for j in range(ys.size):
                        yield (str(m), *params, taus[i], ys[j],
                               archive.responses[m, i, j])
    return [write_csv(out_dir / "archive.csv", header, rows())]


# -- manifest ----------------------------------------------------------------

def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def build_manifest(out_dir: Path, *, mode: str, cfg_hash: str, seed,
                   wall_time: float, extra: dict | None = None,
                   error: dict | None = None) -> dict:
    """Collect the run record; hashes every file currently in the run dir."""
    out_dir = Path(out_dir)
    files = {
        p.name: _sha256(p)
        for p in sorted(out_dir.iterdir())
        if p.is_file() and p.name != MANIFEST_NAME
    }
    import numba
    import scipy

    from . import __version__

    manifest = {
        "mode": mode,
        "config_hash": cfg_hash,
        "seed": seed,
        "wall_time_s": wall_time,
        "files": files,
        "error": error,
        "versions": {
            "icefront": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "numba": numba.__version__,
        },
    }
    if extra:
        manifest.update(extra)
    return manifest


def write_manifest(out_dir: Path, manifest: dict) -> Path:
    path = Path(out_dir) / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


# -- tolerance checks --------------------------------------------------------

def load_checks(path) -> list[dict]:
    """Read a tolerance file: YAML with a top-level ``checks`` list.

    Each check selects one row of one artifact and compares one column:

        checks:
          - file: interface.csv
            where: [{column: tau, equals: 4.0}]
            column: s_phys
            expect: 1.15
            atol: 0.03

    ``where`` may be a single mapping or a list (conditions are ANDed); when
    omitted the last row is used.  Matching is exact to 1e-9.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"tolerance file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(raw, dict) or not isinstance(raw.get("checks"), list):
        raise ConfigError(f"{path}: expected a mapping with a 'checks' list")
    checks = []
    for i, entry in enumerate(raw["checks"]):
        where = f"{path}: checks[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where}: expected a mapping")
        for key in ("file", "column", "expect", "atol"):
            if key not in entry:
                raise ConfigError(f"{where}: missing {key!r}")
        conds = entry.get("where", [])
        if isinstance(conds, dict):
            conds = [conds]
        for cond in conds:
            if not isinstance(cond, dict) or "column" not in cond or "equals" not in cond:
                raise ConfigError(f"{where}: conditions need 'column' and 'equals'")
        checks.append({
            "file": str(entry["file"]),
            "where": [dict(c) for c in conds],
            "column": str(entry["column"]),
            "expect": float(entry["expect"]),
            "atol": float(entry["atol"]),
        })
    return checks


def run_checks(run_dir, checks: list[dict]) -> list[dict]:
    """Evaluate checks against a run directory; returns per-check results."""
    run_dir = Path(run_dir)
    results = []
    for check in checks:
        parsed = read_csv(run_dir / check["file"])
        mask = np.ones(len(parsed[1]), dtype=bool)
        for cond in check["where"]:
            vals = column(parsed, str(cond["column"]))
            mask &= np.abs(vals - float(cond["equals"])) <= 1e-9
        if not mask.any():
            raise ConfigError(
                f"{check['file']}: no row matches {check['where']}"
            )
        idx = np.nonzero(mask)[0][-1]
        value = float(column(parsed, check["column"])[idx])
        ok = abs(value - check["expect"]) <= check["atol"]
        results.append({**check, "value": value, "ok": bool(ok)})
    return results


def format_check(result: dict) -> str:
    status = "PASS" if result["ok"] else "FAIL"
    sel = "last row" if not result["where"] else " & ".join(
        f"{c['column']}={c['equals']}" for c in result["where"]
    )
    return (
        f"[{status}] {result['file']}:{result['column']} @ {sel}: "
        f"got {result['value']:.6g}, expect {result['expect']:.6g} "
        f"+/- {result['atol']:.3g}"
    )
