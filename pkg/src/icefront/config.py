"""Config file schema for batch runs.

A run is described by one YAML document.  Top-level keys (all others are
rejected so typos fail loudly):

    mode            simulate1d | simulate2d | uq1d | uq2d | oracle | audit
    physical        dimensional parameters, converted on load
    dimensionless   direct solver parameters (exactly one of these two)
    grid            dz, dtau, tau_end, and dy for the 2D modes
    snapshots       recording cadence (defaults depend on mode)
    fields          enthalpy dump policy: none | final | all
    solver          lag_iterations, lag_tol, insulated
    random_inputs   list of {name, distribution, ...} entries (UQ modes)
    bindings        config-field -> expression map (UQ modes)
    uq              degree, samples, m_factor, bins, hist_time, hist_y
    seed            campaign seed (UQ modes, default 0)
    threads         worker count for campaign runs
    output          run directory (CLI --out overrides)
    check           tolerance file applied after the run (CLI --check overrides)

``load_config`` applies every default and returns the result together with a
normalized dictionary; writing that dictionary back out and loading it again
resolves to the identical dictionary, which is what makes a resolved config a
trustworthy provenance record.  Physical parameters never survive into the
resolved form: they are converted once and echoed under ``dimensionless``
(including the derived latent-heat group ``gamma``).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import yaml

from .errors import ConfigError
from .expressions import Expression
from .model import DimlessConfig, PhysicalParams, nondimensionalize
from .solver1d import Grid1D
from .solver2d import Grid2D, stability_check
from .uq import NormalInput, RandomInputSpec, UniformInput, legendre_basis

__all__ = [
    "MODES",
    "SolverOptions",
    "UqOptions",
    "RunConfig",
    "load_config",
    "parse_config",
    "resolved_yaml",
    "config_hash",
    "write_resolved",
]

MODES = ("simulate1d", "simulate2d", "uq1d", "uq2d", "oracle", "audit")
_2D_MODES = ("simulate2d", "uq2d")
_UQ_MODES = ("uq1d", "uq2d")
_FIELD_POLICIES = ("none", "final", "all")

_TOP_KEYS = {
    "mode", "physical", "dimensionless", "grid", "snapshots", "fields",
    "solver", "random_inputs", "bindings", "uq", "seed", "threads",
    "output", "check",
}


@dataclass(frozen=True)
class SolverOptions:
    lag_iterations: int = 1
    lag_tol: float = 1e-10
    insulated: bool = False


@dataclass(frozen=True)
class UqOptions:
    degree: int = 4
    samples: int | None = None
    m_factor: int = 2
    bins: int = 30
    hist_time: int = -1
    hist_y: int | None = None


@dataclass(frozen=True, eq=False)
class RunConfig:
    """A fully validated run description plus its normalized dictionary."""

    mode: str
    cfg: DimlessConfig
    grid: "Grid1D | Grid2D"
    snapshots: int
    fields: str
    solver: SolverOptions
    spec: RandomInputSpec | None
    uq: UqOptions | None
    seed: int | None
    threads: int
    output: Path | None
    check: Path | None
    resolved: dict

    @property
    def is_2d(self) -> bool:
        return self.mode in _2D_MODES

    @property
    def is_uq(self) -> bool:
        return self.mode in _UQ_MODES


def _expect_map(value, where: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(value).__name__}")
    return dict(value)


def _reject_unknown(block: dict, allowed, where: str) -> None:
    unknown = set(block) - set(allowed)
    if unknown:
        raise ConfigError(
            f"{where}: unknown keys {sorted(unknown)}; allowed: {sorted(allowed)}"
        )


def _as_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    return value


def _get_float(block: dict, key: str, where: str, default=None) -> float:
    if key not in block:
        if default is None:
            raise ConfigError(f"{where}: missing required key {key!r}")
        return default
    return _as_float(block[key], f"{where}.{key}")


def _parse_dimensionless(block: dict) -> DimlessConfig:
    where = "dimensionless"
    allowed = {"theta_wall", "theta_init", "beta_hat", "eta_hat",
               "length0", "gamma", "theta_melt"}
    _reject_unknown(block, allowed, where)
    for key in ("theta_wall", "theta_init", "beta_hat", "eta_hat"):
        if key not in block:
            raise ConfigError(f"{where}: missing required key {key!r}")
    eta = block["eta_hat"]
    if not isinstance(eta, str):
        eta = _as_float(eta, f"{where}.eta_hat")
    gamma = block.get("gamma")
    try:
        return DimlessConfig(
            theta_wall=_as_float(block["theta_wall"], f"{where}.theta_wall"),
            theta_init=_as_float(block["theta_init"], f"{where}.theta_init"),
            beta_hat=_as_float(block["beta_hat"], f"{where}.beta_hat"),
            eta_hat=eta,
            length0=_get_float(block, "length0", where, 1.0),
            gamma=None if gamma is None else _as_float(gamma, f"{where}.gamma"),
            theta_melt=_get_float(block, "theta_melt", where, 0.0),
        )
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_physical(block: dict) -> DimlessConfig:
    where = "physical"
    allowed = {"rho", "c", "k", "latent_heat", "T_wall", "T_init", "T_melt",
               "length0", "length_ref", "beta", "eta"}
    _reject_unknown(block, allowed, where)
    for key in ("rho", "c", "k", "latent_heat", "T_wall", "T_init", "beta", "eta"):
        if key not in block:
            raise ConfigError(f"{where}: missing required key {key!r}")
    try:
        params = PhysicalParams(
            rho=_as_float(block["rho"], f"{where}.rho"),
            c=_as_float(block["c"], f"{where}.c"),
            k=_as_float(block["k"], f"{where}.k"),
            latent_heat=_as_float(block["latent_heat"], f"{where}.latent_heat"),
            T_wall=_as_float(block["T_wall"], f"{where}.T_wall"),
            T_init=_as_float(block["T_init"], f"{where}.T_init"),
            T_melt=_get_float(block, "T_melt", where, 0.0),
            length0=_get_float(block, "length0", where, 1.0),
            length_ref=_get_float(block, "length_ref", where, 1.0),
        )
        return nondimensionalize(
            params,
            beta=_as_float(block["beta"], f"{where}.beta"),
            eta=_as_float(block["eta"], f"{where}.eta"),
        )
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_grid(block: dict, mode: str) -> "Grid1D | Grid2D":
    where = "grid"
    two_d = mode in _2D_MODES
    allowed = {"dz", "dtau", "tau_end"} | ({"dy"} if two_d else set())
    if not two_d and "dy" in block:
        raise ConfigError(f"{where}.dy only applies to the 2D modes")
    _reject_unknown(block, allowed, where)
    dz = _get_float(block, "dz", where)
    dtau = _get_float(block, "dtau", where)
    tau_end = _get_float(block, "tau_end", where)
    try:
        if two_d:
            return Grid2D(dy=_get_float(block, "dy", where), dz=dz,
                          dtau=dtau, tau_end=tau_end)
        return Grid1D(dz=dz, dtau=dtau, tau_end=tau_end)
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_solver(block: dict) -> SolverOptions:
    where = "solver"
    _reject_unknown(block, {"lag_iterations", "lag_tol", "insulated"}, where)
    lag = block.get("lag_iterations", 1)
    lag = _as_int(lag, f"{where}.lag_iterations")
    if lag < 1:
        raise ConfigError(f"{where}.lag_iterations must be >= 1, got {lag}")
    tol = _get_float(block, "lag_tol", where, 1e-10)
    insulated = block.get("insulated", False)
    if not isinstance(insulated, bool):
        raise ConfigError(f"{where}.insulated must be true or false")
    return SolverOptions(lag_iterations=lag, lag_tol=tol, insulated=insulated)


def _parse_inputs(entries, bindings) -> RandomInputSpec:
    if not isinstance(entries, list) or not entries:
        raise ConfigError("random_inputs: expected a non-empty list")
    inputs = []
    for i, entry in enumerate(entries):
        where = f"random_inputs[{i}]"
        entry = _expect_map(entry, where)
        name = entry.get("name")
        if not isinstance(name, str):
            raise ConfigError(f"{where}: missing parameter name")
        dist = entry.get("distribution")
        if dist == "uniform":
            _reject_unknown(entry, {"name", "distribution", "a", "b"}, where)
            inputs.append(UniformInput(name, _get_float(entry, "a", where),
                                       _get_float(entry, "b", where)))
        elif dist == "normal":
            _reject_unknown(entry, {"name", "distribution", "mu", "sigma"}, where)
            inputs.append(NormalInput(name, _get_float(entry, "mu", where),
                                      _get_float(entry, "sigma", where)))
        else:
            raise ConfigError(
                f"{where}: distribution must be 'uniform' or 'normal', got {dist!r}"
            )
    binding_map = {}
    for target, rule in _expect_map(bindings, "bindings").items():
        if not isinstance(rule, str):
            rule = _as_float(rule, f"bindings.{target}")
        binding_map[target] = rule
    try:
        return RandomInputSpec(tuple(inputs), binding_map)
    except ConfigError as exc:
        raise ConfigError(f"random_inputs: {exc}") from exc


def _parse_uq(block: dict) -> UqOptions:
    where = "uq"
    _reject_unknown(
        block, {"degree", "samples", "m_factor", "bins", "hist_time", "hist_y"}, where
    )
    degree = _as_int(block.get("degree", 4), f"{where}.degree")
    if degree < 0:
        raise ConfigError(f"{where}.degree must be >= 0")
    samples = block.get("samples")
    if samples is not None:
        samples = _as_int(samples, f"{where}.samples")
    m_factor = _as_int(block.get("m_factor", 2), f"{where}.m_factor")
    bins = _as_int(block.get("bins", 30), f"{where}.bins")
    hist_time = _as_int(block.get("hist_time", -1), f"{where}.hist_time")
    hist_y = block.get("hist_y")
    if hist_y is not None:
        hist_y = _as_int(hist_y, f"{where}.hist_y")
    return UqOptions(degree=degree, samples=samples, m_factor=m_factor,
                     bins=bins, hist_time=hist_time, hist_y=hist_y)


def _default_snapshots(mode: str) -> int:
    return {"uq1d": 80, "uq2d": 70}.get(mode, 400)


def parse_config(raw: dict, base_dir: Path | None = None) -> RunConfig:
    """Validate a parsed document and apply defaults.

    ``base_dir`` anchors relative ``check`` paths (the config file's own
    directory when loading from disk).
    """
    raw = _expect_map(raw, "config")
    _reject_unknown(raw, _TOP_KEYS, "config")
    mode = raw.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {list(MODES)}, got {mode!r}")

    has_phys = "physical" in raw and raw["physical"] is not None
    has_dimless = "dimensionless" in raw and raw["dimensionless"] is not None
    if has_phys == has_dimless:
        raise ConfigError("give exactly one of 'physical' or 'dimensionless'")
    if has_phys:
        cfg = _parse_physical(_expect_map(raw["physical"], "physical"))
    else:
        cfg = _parse_dimensionless(_expect_map(raw["dimensionless"], "dimensionless"))

    grid = _parse_grid(_expect_map(raw.get("grid"), "grid"), mode)
    solver = _parse_solver(_expect_map(raw.get("solver"), "solver"))

    snapshots = _as_int(raw.get("snapshots", _default_snapshots(mode)), "snapshots")
    if snapshots < 1:
        raise ConfigError(f"snapshots must be >= 1, got {snapshots}")

    fields = raw.get("fields", "final" if mode == "simulate2d" else
                     "none" if mode in _UQ_MODES or mode == "oracle" else "all")
    if fields not in _FIELD_POLICIES:
        raise ConfigError(f"fields must be one of {list(_FIELD_POLICIES)}, got {fields!r}")

    threads = _as_int(raw.get("threads", 1), "threads")
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}")

    spec = None
    uq_opts = None
    seed = raw.get("seed")
    if mode in _UQ_MODES:
        if "random_inputs" not in raw:
            raise ConfigError(f"mode {mode} requires 'random_inputs'")
        spec = _parse_inputs(raw["random_inputs"], raw.get("bindings"))
        uq_opts = _parse_uq(_expect_map(raw.get("uq"), "uq"))
        seed = 0 if seed is None else _as_int(seed, "seed")
        basis = legendre_basis(spec, uq_opts.degree)
        if uq_opts.samples is not None and uq_opts.samples < basis.size:
            raise ConfigError(
                f"uq.samples = {uq_opts.samples} is below the basis size "
                f"{basis.size}; the working rule is samples = m_factor * N**2"
            )
    else:
        for key in ("random_inputs", "bindings", "uq"):
            if key in raw and raw[key] is not None:
                raise ConfigError(f"{key!r} only applies to the UQ modes")
        if seed is not None:
            seed = _as_int(seed, "seed")

    if mode == "oracle" and cfg.beta_hat != 0.0:
        raise ConfigError(
            "oracle mode needs beta_hat = 0; the fixed-domain similarity "
            "solution has no injection"
        )
    if solver.insulated:
        if mode not in ("simulate1d", "audit"):
            raise ConfigError("solver.insulated only applies to simulate1d/audit")
        if cfg.beta_hat != 0.0:
            raise ConfigError("solver.insulated requires beta_hat = 0")

    # explicit schemes must be stable for the configured (worst known) rate;
    # UQ campaigns re-check every bound sample before running
    if mode == "simulate2d":
        stability_check(grid, cfg)

    output = raw.get("output")
    if output is not None:
        if not isinstance(output, str) or not output:
            raise ConfigError("output must be a non-empty path string")
        output = Path(output)
    check = raw.get("check")
    if check is not None:
        if not isinstance(check, str) or not check:
            raise ConfigError("check must be a path string")
        check = Path(check)
        if base_dir is not None and not check.is_absolute():
            check = base_dir / check

    # threads is an execution detail: results are schedule-independent, so it
    # is validated here but deliberately kept out of the provenance record
    resolved = _resolved_dict(mode, cfg, grid, snapshots, fields, solver, spec,
                              uq_opts, seed, raw.get("output"),
                              raw.get("check"))
    return RunConfig(
        mode=mode, cfg=cfg, grid=grid, snapshots=snapshots, fields=fields,
        solver=solver, spec=spec, uq=uq_opts, seed=seed, threads=threads,
        output=output, check=check, resolved=resolved,
    )


def _resolved_dict(mode, cfg, grid, snapshots, fields, solver, spec, uq_opts,
                   seed, output, check) -> dict:
    eta = cfg.eta_hat
    dimless = {
        "theta_wall": cfg.theta_wall,
        "theta_init": cfg.theta_init,
        "beta_hat": cfg.beta_hat,
        "eta_hat": eta.text if isinstance(eta, Expression) else eta,
        "length0": cfg.length0,
        "theta_melt": cfg.theta_melt,
    }
    if cfg.gamma is not None:
        dimless["gamma"] = cfg.gamma
    grid_block = {"dz": grid.dz, "dtau": grid.dtau, "tau_end": grid.tau_end}
    if isinstance(grid, Grid2D):
        grid_block["dy"] = grid.dy
    out = {
        "mode": mode,
        "dimensionless": dimless,
        "grid": grid_block,
        "snapshots": snapshots,
        "fields": fields,
        "solver": {
            "lag_iterations": solver.lag_iterations,
            "lag_tol": solver.lag_tol,
            "insulated": solver.insulated,
        },
    }
    if spec is not None:
        entries = []
        for u in spec.inputs:
            if isinstance(u, UniformInput):
                entries.append({"name": u.name, "distribution": "uniform",
                                "a": u.a, "b": u.b})
            else:
                entries.append({"name": u.name, "distribution": "normal",
                                "mu": u.mu, "sigma": u.sigma})
        out["random_inputs"] = entries
        out["bindings"] = {
            target: rule.text if isinstance(rule, Expression) else rule
            for target, rule in spec.bindings.items()
        }
        out["uq"] = {
            "degree": uq_opts.degree,
            "samples": uq_opts.samples,
            "m_factor": uq_opts.m_factor,
            "bins": uq_opts.bins,
            "hist_time": uq_opts.hist_time,
            "hist_y": uq_opts.hist_y,
        }
    if seed is not None:
        out["seed"] = seed
    if output is not None:
        out["output"] = output
    if check is not None:
        out["check"] = check
    return out


def load_config(path, overrides: dict | None = None) -> RunConfig:
    """Read and validate a YAML run config from disk.

    ``overrides`` replaces top-level keys before validation (how the CLI
    applies --seed/--threads and friends); an override of None is ignored.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    raw = _expect_map(raw, "config")
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value
    try:
        return parse_config(raw, base_dir=path.parent)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def resolved_yaml(rc: RunConfig) -> str:
    """Canonical YAML form of the resolved config (stable key order)."""
    return yaml.safe_dump(rc.resolved, sort_keys=True, default_flow_style=False)


def config_hash(rc: RunConfig) -> str:
    """Content hash identifying the resolved run configuration."""
    return hashlib.sha256(resolved_yaml(rc).encode()).hexdigest()


def write_resolved(rc: RunConfig, path) -> None:
    Path(path).write_text(resolved_yaml(rc))
