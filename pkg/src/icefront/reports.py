"""Plot-ready data emission for completed run directories.

``emit_plot_data`` inspects the resolved config of a finished run, reshapes
the delimited artifacts into plain-text series that external tools can plot
directly, and renders a quick-look PNG next to each series.  Layouts are
whitespace separated with a ``#`` header line naming the columns:

    profiles.dat   z, then one enthalpy column per snapshot time
    interface.dat  tau, front position, domain length
    curves.dat     y, then one front-curve column per snapshot time
    field.dat      enthalpy matrix of the last snapshot (rows y, columns z)
    modes.dat      tau, transverse Fourier amplitudes k0..k8
    audit.dat      tau, energy, residual
    oracle.dat     tau, analytic front position
    band.dat       tau, mean, mean-std, mean+std
    moments.dat    tau, skewness, kurtosis (per y in the 2D variants)
    hist_*.dat     bin center, count for one (tau, y) slice

All files land in ``<run-dir>/plot``.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np
import yaml

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import ConfigError  # noqa: E402
from .artifacts import column, read_csv  # noqa: E402

__all__ = ["emit_plot_data"]

_DEFAULT_BINS = 30


def _require(run_dir: Path, names: list[str]) -> None:
    missing = [n for n in names if not (run_dir / n).exists()]
    if missing:
        raise ConfigError(
            f"{run_dir} is missing artifacts {missing}; expected {names}"
        )


def _write_dat(path: Path, header: str, columns: list[np.ndarray]) -> Path:
    data = np.column_stack(columns)
    lines = ["# " + header]
    for row in data:
        lines.append(" ".join(repr(float(v)) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    return path


def _load_resolved(run_dir: Path) -> dict:
    path = run_dir / "resolved.yaml"
    if not path.exists():
        raise ConfigError(f"{run_dir} has no resolved.yaml; not a run directory?")
    resolved = yaml.safe_load(path.read_text())
    if not isinstance(resolved, dict) or "mode" not in resolved:
        raise ConfigError(f"{path} does not look like a resolved config")
    return resolved


def emit_plot_data(run_dir) -> list[Path]:
    """Write plot series and PNG quick-looks for one run; returns the paths."""
    run_dir = Path(run_dir)
    resolved = _load_resolved(run_dir)
    mode = resolved["mode"]
    plot_dir = run_dir / "plot"
    plot_dir.mkdir(exist_ok=True)
    if mode in ("simulate1d", "audit"):
        return _emit_1d(run_dir, plot_dir, audit=mode == "audit")
    if mode == "oracle":
        return _emit_oracle(run_dir, plot_dir)
    if mode == "simulate2d":
        return _emit_2d(run_dir, plot_dir)
    if mode == "uq1d":
        return _emit_uq1d(run_dir, plot_dir)
    if mode == "uq2d":
        return _emit_uq2d(run_dir, plot_dir, resolved)
    raise ConfigError(f"no plot layout for mode {mode!r}")


# -- deterministic runs ------------------------------------------------------

def _emit_1d(run_dir: Path, plot_dir: Path, *, audit: bool) -> list[Path]:
    _require(run_dir, ["interface.csv", "fields.csv"] + (["audit.csv"] if audit else []))
    out = []

    header, rows = read_csv(run_dir / "fields.csv")
    taus = np.array([float(r[0]) for r in rows])
    zs = np.array([float(h) for h in header[1:]])
    phis = np.array([[float(v) for v in r[1:]] for r in rows])
    labels = " ".join(f"phi(tau={t:g})" for t in taus)
    out.append(_write_dat(plot_dir / "profiles.dat", f"z {labels}",
                          [zs, *phis]))
    fig, ax = plt.subplots()
    shown = np.linspace(0, taus.size - 1, min(9, taus.size)).astype(int)
    for i in shown:
        ax.plot(zs, phis[i], label=f"tau={taus[i]:g}")
    ax.set_xlabel("z")
    ax.set_ylabel("enthalpy")
    ax.legend(fontsize=7)
    out.append(_save(fig, plot_dir / "profiles.png"))

    parsed = read_csv(run_dir / "interface.csv")
    t = column(parsed, "tau")
    s = column(parsed, "s_phys")
    length = column(parsed, "L")
    out.append(_write_dat(plot_dir / "interface.dat",
                          "tau s_phys L", [t, s, length]))
    fig, ax = plt.subplots()
    ax.plot(t, s, label="front")
    ax.plot(t, length, label="injection boundary")
    ax.set_xlabel("tau")
    ax.set_ylabel("position")
    ax.legend()
    out.append(_save(fig, plot_dir / "interface.png"))

    if audit:
        parsed = read_csv(run_dir / "audit.csv")
        t = column(parsed, "tau")
        energy = column(parsed, "energy")
        res = column(parsed, "residual")
        out.append(_write_dat(plot_dir / "audit.dat",
                              "tau energy residual", [t, energy, res]))
        fig, ax = plt.subplots()
        ax.plot(t[1:], np.abs(res[1:]))
        ax.set_yscale("log")
        ax.set_xlabel("tau")
        ax.set_ylabel("|budget residual|")
        out.append(_save(fig, plot_dir / "audit.png"))
    return out


def _emit_oracle(run_dir: Path, plot_dir: Path) -> list[Path]:
    _require(run_dir, ["oracle.csv"])
    parsed = read_csv(run_dir / "oracle.csv")
    t = column(parsed, "tau")
    s = column(parsed, "s_analytic")
    out = [_write_dat(plot_dir / "oracle.dat", "tau s_analytic", [t, s])]
    fig, ax = plt.subplots()
    ax.plot(t, s)
    ax.set_xlabel("tau")
    ax.set_ylabel("analytic front position")
    out.append(_save(fig, plot_dir / "oracle.png"))
    return out


def _emit_2d(run_dir: Path, plot_dir: Path) -> list[Path]:
    _require(run_dir, ["interface2d.csv", "modes.csv"])
    out = []
    parsed = read_csv(run_dir / "interface2d.csv")
    t = column(parsed, "tau")
    y = column(parsed, "y")
    s = column(parsed, "s_phys")
    taus = np.unique(t)
    ys = y[t == taus[0]]
    curves = s.reshape(taus.size, ys.size)
    labels = " ".join(f"s(tau={v:g})" for v in taus)
    out.append(_write_dat(plot_dir / "curves.dat", f"y {labels}",
                          [ys, *curves]))
    fig, ax = plt.subplots()
    shown = np.linspace(0, taus.size - 1, min(7, taus.size)).astype(int)
    for i in shown:
        ax.plot(ys, curves[i], label=f"tau={taus[i]:g}")
    ax.set_xlabel("y")
    ax.set_ylabel("front position")
    ax.legend(fontsize=7)
    out.append(_save(fig, plot_dir / "curves.png"))

    header, rows = read_csv(run_dir / "modes.csv")
    cols = [column((header, rows), h) for h in header]
    out.append(_write_dat(plot_dir / "modes.dat", " ".join(header), cols))
    fig, ax = plt.subplots()
    for k, h in enumerate(header[2:], start=1):
        ax.plot(cols[0], cols[k + 1], label=h)
    ax.set_xlabel("tau")
    ax.set_ylabel("mode amplitude")
    ax.legend(fontsize=7)
    out.append(_save(fig, plot_dir / "modes.png"))

    if (run_dir / "fields2d.csv").exists():
        parsed = read_csv(run_dir / "fields2d.csv")
        t = column(parsed, "tau")
        last = t == t.max()
        yy = np.unique(column(parsed, "y")[last])
        zz = np.unique(column(parsed, "z")[last])
        phi = column(parsed, "phi")[last].reshape(yy.size, zz.size)
        out.append(_write_dat(plot_dir / "field.dat",
                              f"rows y(0..1) columns z(0..1) tau={t.max():g}",
                              [phi[:, k] for k in range(zz.size)]))
        fig, ax = plt.subplots()
        mesh = ax.pcolormesh(zz, yy, phi, shading="nearest")
        fig.colorbar(mesh, ax=ax, label="enthalpy")
        ax.set_xlabel("z")
        ax.set_ylabel("y")
        out.append(_save(fig, plot_dir / "field.png"))
    return out


# -- campaigns ---------------------------------------------------------------

def _emit_uq1d(run_dir: Path, plot_dir: Path) -> list[Path]:
    _require(run_dir, ["statistics.csv", "histogram.csv"])
    out = []
    parsed = read_csv(run_dir / "statistics.csv")
    t = column(parsed, "tau")
    mean = column(parsed, "mean")
    std = column(parsed, "std")
    out.append(_write_dat(plot_dir / "band.dat", "tau mean lo hi",
                          [t, mean, mean - std, mean + std]))
    fig, ax = plt.subplots()
    ax.plot(t, mean, label="mean front position")
    ax.fill_between(t, mean - std, mean + std, alpha=0.3, label="+/- std")
    ax.set_xlabel("tau")
    ax.set_ylabel("front position")
    ax.legend()
    out.append(_save(fig, plot_dir / "band.png"))

    skew = column(parsed, "skewness")
    kurt = column(parsed, "kurtosis")
    out.append(_write_dat(plot_dir / "moments.dat", "tau skewness kurtosis",
                          [t, skew, kurt]))
    fig, ax = plt.subplots()
    ax.plot(t, skew, label="skewness")
    ax.plot(t, kurt, label="kurtosis")
    ax.set_xlabel("tau")
    ax.legend()
    out.append(_save(fig, plot_dir / "moments.png"))

    out.extend(_hist_files(run_dir / "histogram.csv", plot_dir, "hist"))
    return out


def _hist_files(csv_path: Path, plot_dir: Path, stem: str) -> list[Path]:
    parsed = read_csv(csv_path)
    lo = column(parsed, "bin_lo")
    hi = column(parsed, "bin_hi")
    counts = column(parsed, "count")
    centers = 0.5 * (lo + hi)
    out = [_write_dat(plot_dir / f"{stem}.dat", "bin_center count",
                      [centers, counts])]
    fig, ax = plt.subplots()
    ax.bar(centers, counts, width=hi - lo, align="center", edgecolor="black")
    ax.set_xlabel("front position")
    ax.set_ylabel("samples")
    out.append(_save(fig, plot_dir / f"{stem}.png"))
    return out


def _emit_uq2d(run_dir: Path, plot_dir: Path, resolved: dict) -> list[Path]:
    _require(run_dir, ["statistics.csv", "archive.csv"])
    out = []
    parsed = read_csv(run_dir / "statistics.csv")
    t = column(parsed, "tau")
    y = column(parsed, "y")
    taus = np.unique(t)
    ys = y[t == taus[0]]
    shape = (taus.size, ys.size)
    mean = column(parsed, "mean").reshape(shape)
    std = column(parsed, "std").reshape(shape)
    skew = column(parsed, "skewness").reshape(shape)
    kurt = column(parsed, "kurtosis").reshape(shape)

    t_slices = sorted({taus.size // 2, taus.size - 1})
    y_slices = sorted({0, ys.size // 2})
    for i in t_slices:
        tag = f"tau{taus[i]:g}".replace(".", "p")
        out.append(_write_dat(plot_dir / f"band_{tag}.dat",
                              f"y mean lo hi (tau={taus[i]:g})",
                              [ys, mean[i], mean[i] - std[i], mean[i] + std[i]]))
        out.append(_write_dat(plot_dir / f"moments_{tag}.dat",
                              f"y skewness kurtosis (tau={taus[i]:g})",
                              [ys, skew[i], kurt[i]]))
        fig, ax = plt.subplots()
        ax.plot(ys, mean[i], label="mean")
        ax.fill_between(ys, mean[i] - std[i], mean[i] + std[i], alpha=0.3,
                        label="+/- std")
        ax.set_xlabel("y")
        ax.set_ylabel(f"front position at tau={taus[i]:g}")
        ax.legend()
        out.append(_save(fig, plot_dir / f"band_{tag}.png"))

    # histograms straight from the raw archive at the default slice grid
    bins = _DEFAULT_BINS
    uq_block = resolved.get("uq") or {}
    if isinstance(uq_block.get("bins"), int):
        bins = uq_block["bins"]
    data = np.loadtxt(run_dir / "archive.csv", delimiter=",", skiprows=1)
    resp_t = data[:, -3]
    resp_y = data[:, -2]
    resp = data[:, -1]
    for i in t_slices:
        for j in y_slices:
            pick = (np.abs(resp_t - taus[i]) <= 1e-12) & \
                   (np.abs(resp_y - ys[j]) <= 1e-12)
            counts, edges = np.histogram(resp[pick], bins=bins)
            tag = (f"hist_tau{taus[i]:g}_y{ys[j]:g}").replace(".", "p")
            centers = 0.5 * (edges[:-1] + edges[1:])
            out.append(_write_dat(plot_dir / f"{tag}.dat",
                                  f"bin_center count (tau={taus[i]:g} y={ys[j]:g})",
                                  [centers, counts.astype(float)]))
            fig, ax = plt.subplots()
            ax.bar(centers, counts, width=edges[1:] - edges[:-1],
                   align="center", edgecolor="black")
            ax.set_xlabel(f"front position (tau={taus[i]:g}, y={ys[j]:g})")
            ax.set_ylabel("samples")
            out.append(_save(fig, plot_dir / f"{tag}.png"))
    return out
