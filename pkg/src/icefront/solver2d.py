"""Explicit 2D enthalpy solver on the transformed unit square.

Same growing-domain transform as the 1D solver, applied in the wall-normal
direction only: x = z*L(tau) with y untouched, so the equation picks up the
1/L^2 scaling on z-diffusion and the stretching convection term while
y-diffusion keeps unit coefficient:

    dphi/dtau = (1/L^2) d2theta/dz2 + d2theta/dy2 + (beta_hat*z/L) dphi/dz

The update is forward Euler on phi with all right-hand-side terms at the old
time level (including L), second differences on theta, and the forward
(upwind) difference on phi for convection.  The injection boundary enters
through a ghost temperature beyond z = 1, obtained by discretizing the influx
condition one-sidedly under the liquid branch phi = theta + 1:

    theta_ghost = (1 - L*dz*beta_hat)*theta_N + beta_hat*(eta_hat - 1)*L*dz

and the z = 1 node is advanced with the interior stencil using theta_ghost
(and phi_ghost = theta_ghost + 1 in the convection term).  The wall column
stays pinned at the wall enthalpy.

y is periodic: rows j = 0..n_y-2 are the independent unknowns with wrapped
neighbours, and the last row duplicates row 0.  Profiles eta_hat(y) are
evaluated on [0, 1) and mirrored the same way, so a formally non-periodic
expression is solved as its periodization.

Stability guard (forward Euler):

    dtau * (2/(L_min^2 dz^2) + 2/dy^2 + beta_hat/(L_min dz)) <= 1

with L_min = L(0), the smallest (hence stiffest) domain length of the run.

Energy bookkeeping matches the 1D module, with fluxes integrated over the
periodic y direction: E(tau) = L(tau) * trapz_y trapz_z phi, and

    dE/dtau = beta_hat * integral eta_hat dy - (1/L) integral dtheta/dz|_0 dy.

Both flux terms are accumulated step by step at the old time level, the same
level the scheme itself uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import model
from .errors import BlowUpError, ConfigError, ModelError, StabilityError
from .model import DimlessConfig
from .solver1d import (
    LEVEL_LIQUID_EDGE,
    LEVEL_MID_MUSH,
    LEVEL_SOLID_EDGE,
    AuditResult,
    EnthalpyField1D,
    Grid1D,
    Run1D,
    _locate_level,
)

__all__ = [
    "Grid2D",
    "EnthalpyField2D",
    "InterfaceCurve",
    "Run2D",
    "initialize",
    "ghost_boundary",
    "stability_check",
    "step_explicit",
    "run",
    "run_explicit_1d",
    "extract_interface_curve",
    "interface_curve",
    "energy_audit",
    "mode_amplitudes",
]

_STATUS_OK = 0
_STATUS_NONFINITE = 2


@dataclass(frozen=True)
class Grid2D:
    """Uniform grid on the reference square [0, 1] x [0, 1] plus time step.

    ``dy`` and ``dz`` must divide 1 and ``dtau`` must divide ``tau_end``; the
    y endpoints are identified (periodic), so row n_y - 1 mirrors row 0.
    """

    dy: float
    dz: float
    dtau: float
    tau_end: float

    def __post_init__(self) -> None:
        if self.dy <= 0 or self.dz <= 0 or self.dtau <= 0 or self.tau_end <= 0:
            raise ConfigError("dy, dz, dtau, tau_end must all be positive")
        for name, h in (("dy", self.dy), ("dz", self.dz)):
            if abs(round(1.0 / h) * h - 1.0) > 1e-9:
                raise ConfigError(f"{name}={h} does not divide the unit interval")
        if self.n_y < 3 or self.n_z < 3:
            raise ConfigError("need at least 3 nodes per direction")
        if abs(round(self.tau_end / self.dtau) * self.dtau - self.tau_end) > 1e-9:
            raise ConfigError(
                f"dtau={self.dtau} does not divide tau_end={self.tau_end}"
            )

    @property
    def n_y(self) -> int:
        return round(1.0 / self.dy) + 1

    @property
    def n_z(self) -> int:
        return round(1.0 / self.dz) + 1

    @property
    def n_steps(self) -> int:
        return round(self.tau_end / self.dtau)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_y)

    @property
    def z(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_z)


@dataclass(frozen=True)
class EnthalpyField2D:
    """Enthalpy state phi[j, i] at one instant; axis 0 is y, axis 1 is z."""

    phi: np.ndarray
    tau: float
    cfg: DimlessConfig

    def theta(self) -> np.ndarray:
        return model.temperature_from_enthalpy(self.phi)

    def length(self) -> float:
        return model.domain_length(self.tau, self.cfg)


@dataclass(frozen=True)
class InterfaceCurve:
    """Front curve s(y) over time; rows of ``s_star`` align with ``taus``.

    Same conventions as the 1D trace: ``s_star``/``s_phys`` use the
    solid-edge crossing phi=0, with the phi=0.5 and phi=1 crossings kept as
    mush diagnostics.
    """

    taus: np.ndarray
    s_star: np.ndarray
    s_phys: np.ndarray
    length: np.ndarray
    s_mid: np.ndarray
    s_liquid: np.ndarray


@dataclass(frozen=True)
class Run2D:
    """Full 2D run output; mirrors the 1D run container."""

    grid: Grid2D
    cfg: DimlessConfig
    taus: np.ndarray
    phis: np.ndarray
    influx: np.ndarray
    wall_loss: np.ndarray

    def field(self, idx: int) -> EnthalpyField2D:
        return EnthalpyField2D(self.phis[idx].copy(), float(self.taus[idx]), self.cfg)

    @property
    def final(self) -> EnthalpyField2D:
        return self.field(len(self.taus) - 1)


@njit(cache=True)
def _advance_2d(
    phi,
    k0,
    tau0,
    dy,
    dz,
    dtau,
    n_steps,
    length0,
    beta_hat,
    eta,
    wall_phi,
):
    """Advance the explicit scheme ``n_steps`` steps from global step ``k0``.

    ``phi`` (n_y x n_z) is updated in place; ``eta[k, j]`` holds the influx
    profile at the old time level of step k.  Times are computed as
    tau0 + (k0 + k)*dtau so results do not depend on how a run is chunked.
    Returns (status, step_in_chunk, j, i, influx, wall) with status 0 = ok or
    2 = non-finite value first produced at node (j, i).
    """
    ny, nz = phi.shape
    theta = np.empty_like(phi)
    nxt = np.empty_like(phi)
    inv_dz2 = 1.0 / (dz * dz)
    inv_dy2 = 1.0 / (dy * dy)
    influx_cum = 0.0
    wall_cum = 0.0

    for k in range(n_steps):
        tau = tau0 + (k0 + k) * dtau
        length = length0 + beta_hat * tau
        kap = 1.0 / (length * length)

        for j in range(ny):
            for i in range(nz):
                v = phi[j, i]
                clip = v
                if clip < 0.0:
                    clip = 0.0
                elif clip > 1.0:
                    clip = 1.0
                theta[j, i] = v - clip

        eta_sum = 0.0
        flux_sum = 0.0
        for j in range(ny - 1):
            eta_sum += eta[k, j]
            flux_sum += theta[j, 1] - theta[j, 0]
        influx_cum += dtau * beta_hat * eta_sum * dy
        wall_cum += dtau * flux_sum * dy / (length * dz)

        for j in range(ny - 1):
            jm = ny - 2 if j == 0 else j - 1
            jp = 0 if j == ny - 2 else j + 1
            nxt[j, 0] = wall_phi
            for i in range(1, nz - 1):
                diff_z = kap * (theta[j, i - 1] - 2.0 * theta[j, i] + theta[j, i + 1]) * inv_dz2
                diff_y = (theta[jm, i] - 2.0 * theta[j, i] + theta[jp, i]) * inv_dy2
                conv = beta_hat * (i * dz) * (phi[j, i + 1] - phi[j, i]) / (length * dz)
                val = phi[j, i] + dtau * (diff_z + diff_y + conv)
                if not np.isfinite(val):
                    return _STATUS_NONFINITE, k, j, i, influx_cum, wall_cum
                nxt[j, i] = val
            i = nz - 1
            tg = (1.0 - length * dz * beta_hat) * theta[j, i] + beta_hat * (
                eta[k, j] - 1.0
            ) * length * dz
            diff_z = kap * (theta[j, i - 1] - 2.0 * theta[j, i] + tg) * inv_dz2
            diff_y = (theta[jm, i] - 2.0 * theta[j, i] + theta[jp, i]) * inv_dy2
            conv = beta_hat * (i * dz) * ((tg + 1.0) - phi[j, i]) / (length * dz)
            val = phi[j, i] + dtau * (diff_z + diff_y + conv)
            if not np.isfinite(val):
                return _STATUS_NONFINITE, k, j, i, influx_cum, wall_cum
            nxt[j, i] = val

        for j in range(ny - 1):
            for i in range(nz):
                phi[j, i] = nxt[j, i]
        for i in range(nz):
            phi[ny - 1, i] = phi[0, i]

    return _STATUS_OK, n_steps, -1, -1, influx_cum, wall_cum


def initialize(grid: Grid2D, cfg: DimlessConfig) -> EnthalpyField2D:
    """Liquid start at theta_init with the wall column pinned."""
    if cfg.theta_init <= 0:
        raise ModelError(
            f"theta_init must be positive (liquid start), got {cfg.theta_init}"
        )
    phi = np.full((grid.n_y, grid.n_z), cfg.theta_init + 1.0)
    phi[:, 0] = model.enthalpy_from_temperature(cfg.theta_wall)
    return EnthalpyField2D(phi, 0.0, cfg)


def _eta_row(cfg: DimlessConfig, grid: Grid2D, tau: float) -> np.ndarray:
    """Influx profile on the y nodes at one instant, periodically identified.

    The last entry is a copy of the first, matching the grid's row
    identification, so non-periodic expressions are wrapped consistently.
    """
    row = np.broadcast_to(
        np.asarray(model.eta_hat_values(cfg, y=grid.y, tau=tau), dtype=float),
        (grid.n_y,),
    ).copy()
    row[-1] = row[0]
    if not np.all(np.isfinite(row)):
        raise ModelError("eta_hat evaluates to a non-finite value")
    if row.min() < 1.0:
        raise ModelError(
            f"eta_hat must be >= 1 everywhere; minimum {row.min():.6g} at tau={tau}"
        )
    return row


def _eta_chunk(
    cfg: DimlessConfig, grid: Grid2D, tau0: float, k0: int, n_steps: int
) -> np.ndarray:
    """Influx profile for each old time level of a chunk of steps."""
    eta = cfg.eta_hat
    if isinstance(eta, float) or "tau" not in eta.variables:
        row = _eta_row(cfg, grid, tau0 + k0 * grid.dtau)
        return np.ascontiguousarray(np.broadcast_to(row, (n_steps, grid.n_y)))
    out = np.empty((n_steps, grid.n_y))
    for k in range(n_steps):
        out[k] = _eta_row(cfg, grid, tau0 + (k0 + k) * grid.dtau)
    return out


def ghost_boundary(
    theta_row: np.ndarray, cfg: DimlessConfig, grid: Grid2D, tau: float
) -> np.ndarray:
    """Ghost temperature just beyond z = 1, one value per y node."""
    theta_row = np.asarray(theta_row, dtype=float)
    if theta_row.shape != (grid.n_y,):
        raise ConfigError(
            f"theta_row has shape {theta_row.shape}, expected ({grid.n_y},)"
        )
    length = model.domain_length(tau, cfg)
    eta = _eta_row(cfg, grid, tau)
    coef = length * grid.dz * cfg.beta_hat
    return (1.0 - coef) * theta_row + cfg.beta_hat * (eta - 1.0) * length * grid.dz


def _stability_sum(dy2_term: float, grid, cfg: DimlessConfig) -> float:
    length_min = model.domain_length(0.0, cfg)
    return (
        2.0 / (length_min * length_min * grid.dz * grid.dz)
        + dy2_term
        + cfg.beta_hat / (length_min * grid.dz)
    )


def stability_check(
    grid: Grid2D, cfg: DimlessConfig, tau_end: float | None = None
) -> float:
    """Forward-Euler stability margin; must not exceed 1.

    The bound is evaluated at L_min = L(0), the tightest point of the run
    since the domain only grows (``tau_end`` does not move it and is accepted
    for signature symmetry only).  Raises a stability error listing the
    largest admissible dtau when violated.
    """
    rate = _stability_sum(2.0 / (grid.dy * grid.dy), grid, cfg)
    margin = grid.dtau * rate
    if margin > 1.0:
        raise StabilityError(
            f"explicit step is unstable: dtau*rate = {margin:.4g} > 1; "
            f"largest admissible dtau is {1.0 / rate:.6g}"
        )
    return margin


def _raise_blowup(step_idx: int, j: int, i: int, grid, tau0: float) -> None:
    tau = tau0 + (step_idx + 1) * grid.dtau
    raise BlowUpError(
        f"non-finite enthalpy at node (y={j * grid.dy:.6g}, z={i * grid.dz:.6g}), "
        f"step {step_idx} (tau={tau:.6g})"
    )


def step_explicit(field: EnthalpyField2D, grid: Grid2D) -> EnthalpyField2D:
    """One forward-Euler step; returns a new field at tau + dtau."""
    cfg = field.cfg
    stability_check(grid, cfg)
    phi = np.array(field.phi, dtype=float)
    if phi.shape != (grid.n_y, grid.n_z):
        raise ConfigError(f"field has shape {phi.shape}, grid expects "
                          f"({grid.n_y}, {grid.n_z})")
    eta = _eta_chunk(cfg, grid, field.tau, 0, 1)
    status, k, j, i, _, _ = _advance_2d(
        phi, 0, field.tau, grid.dy, grid.dz, grid.dtau, 1,
        cfg.length0, cfg.beta_hat, eta,
        float(model.enthalpy_from_temperature(cfg.theta_wall)),
    )
    if status == _STATUS_NONFINITE:
        _raise_blowup(k, j, i, grid, field.tau)
    return EnthalpyField2D(phi, field.tau + grid.dtau, cfg)


def run(
    grid: Grid2D,
    cfg: DimlessConfig,
    *,
    field0: EnthalpyField2D | None = None,
    snapshots: int = 400,
    record_every: int | None = None,
) -> Run2D:
    """Run the explicit scheme to tau_end, recording at the snapshot cadence.

    The state advances chunk by chunk between snapshots; chunking does not
    change the arithmetic, so results are bit-identical for any cadence.
    """
    stability_check(grid, cfg)
    if field0 is None:
        field0 = initialize(grid, cfg)
    elif field0.phi.shape != (grid.n_y, grid.n_z):
        raise ConfigError(
            f"field0 has shape {field0.phi.shape}, grid expects "
            f"({grid.n_y}, {grid.n_z})"
        )
    return _run_chunks(grid, cfg, field0, snapshots, record_every)


def _run_chunks(
    grid: Grid2D,
    cfg: DimlessConfig,
    field0: EnthalpyField2D,
    snapshots: int,
    record_every: int | None,
) -> Run2D:
    n_steps = grid.n_steps
    if record_every is None:
        if snapshots < 1:
            raise ConfigError("snapshots must be >= 1")
        record_every = max(1, math.ceil(n_steps / snapshots))
    stride = int(record_every)
    snap_steps = np.arange(stride, n_steps + 1, stride, dtype=np.int64)
    if snap_steps.size == 0 or snap_steps[-1] != n_steps:
        snap_steps = np.append(snap_steps, n_steps)

    tau0 = field0.tau
    wall_phi = float(model.enthalpy_from_temperature(cfg.theta_wall))
    phi = np.array(field0.phi, dtype=float)
    n_snap = snap_steps.size
    snaps = np.empty((n_snap, grid.n_y, grid.n_z))
    snap_taus = np.empty(n_snap)
    snap_influx = np.empty(n_snap)
    snap_wall = np.empty(n_snap)

    influx_cum = 0.0
    wall_cum = 0.0
    k_prev = 0
    for ptr, k_next in enumerate(snap_steps):
        n_chunk = int(k_next - k_prev)
        eta = _eta_chunk(cfg, grid, tau0, k_prev, n_chunk)
        status, k, j, i, d_influx, d_wall = _advance_2d(
            phi, k_prev, tau0, grid.dy, grid.dz, grid.dtau, n_chunk,
            cfg.length0, cfg.beta_hat, eta, wall_phi,
        )
        if status == _STATUS_NONFINITE:
            _raise_blowup(k_prev + k, j, i, grid, tau0)
        influx_cum += d_influx
        wall_cum += d_wall
        snaps[ptr] = phi
        snap_taus[ptr] = tau0 + int(k_next) * grid.dtau
        snap_influx[ptr] = influx_cum
        snap_wall[ptr] = wall_cum
        k_prev = int(k_next)

    taus = np.concatenate(([tau0], snap_taus))
    phis = np.concatenate([field0.phi[None, :, :], snaps])
    influx = np.concatenate(([0.0], snap_influx))
    wall_loss = np.concatenate(([0.0], snap_wall))
    return Run2D(grid, cfg, taus, phis, influx, wall_loss)


def run_explicit_1d(
    grid: Grid1D,
    cfg: DimlessConfig,
    *,
    field0: EnthalpyField1D | None = None,
    snapshots: int = 400,
    record_every: int | None = None,
) -> Run1D:
    """Explicit 1D reference run sharing the 2D stencil.

    Advances a three-row y-constant state through the 2D kernel; the
    y-difference terms vanish identically there, leaving exactly the z part
    of the scheme.  Useful for symmetry checks against full 2D runs and for
    cross-checking the implicit solver.  Returns a standard 1D run.
    """
    if not isinstance(cfg.eta_hat, float) and "y" in cfg.eta_hat.variables:
        raise ModelError("1D reference cannot use a y-dependent eta_hat")
    # the y terms vanish identically on constant rows, so only the 1D part
    # of the stability bound applies
    rate = _stability_sum(0.0, grid, cfg)
    if grid.dtau * rate > 1.0:
        raise StabilityError(
            f"explicit step is unstable: dtau*rate = {grid.dtau * rate:.4g} > 1; "
            f"largest admissible dtau is {1.0 / rate:.6g}"
        )
    grid2 = Grid2D(dy=0.5, dz=grid.dz, dtau=grid.dtau, tau_end=grid.tau_end)
    if field0 is None:
        from .solver1d import initialize as initialize_1d

        field0 = initialize_1d(grid, cfg)
    phi0 = np.tile(np.asarray(field0.phi, dtype=float), (3, 1))
    field2 = EnthalpyField2D(phi0, field0.tau, cfg)
    result2 = _run_chunks(grid2, cfg, field2, snapshots, record_every)
    return Run1D(
        grid,
        cfg,
        result2.taus,
        result2.phis[:, 0, :].copy(),
        result2.influx,
        result2.wall_loss,
    )


def extract_interface_curve(
    field: EnthalpyField2D, grid: Grid2D, level: float = LEVEL_MID_MUSH
) -> np.ndarray:
    """Front position in reference coordinates per y node."""
    phi = np.asarray(field.phi)
    return np.array([_locate_level(phi[j], grid.dz, level) for j in range(grid.n_y)])


def interface_curve(result: Run2D) -> InterfaceCurve:
    """Front curves over all snapshots of a run (all three levels)."""
    dz = result.grid.dz

    def curves(level: float) -> np.ndarray:
        return np.array(
            [
                [_locate_level(snap[j], dz, level) for j in range(snap.shape[0])]
                for snap in result.phis
            ]
        )

    s_star = curves(LEVEL_SOLID_EDGE)
    s_mid = curves(LEVEL_MID_MUSH)
    s_liquid = curves(LEVEL_LIQUID_EDGE)
    length = np.asarray(model.domain_length(result.taus, result.cfg), dtype=float)
    length = np.broadcast_to(length, result.taus.shape).copy()
    s_phys = s_star * length[:, None]
    return InterfaceCurve(result.taus.copy(), s_star, s_phys, length, s_mid, s_liquid)


def _trapz_energy_2d(phi: np.ndarray, dy: float, dz: float, length: float) -> float:
    return length * float(
        np.trapezoid(np.trapezoid(phi, dx=dz, axis=1), dx=dy, axis=0)
    )


def energy_audit(history, grid: Grid2D | None = None) -> AuditResult:
    """Energy-budget residuals between consecutive snapshots (2D analogue).

    Preferred input is a :class:`Run2D` with its exact accumulated fluxes; a
    plain list of fields (>= 2, uniform interval) uses the interval-end state
    approximation, as in the 1D audit.
    """
    if isinstance(history, Run2D):
        result = history
        g = result.grid
        lengths = np.asarray(model.domain_length(result.taus, result.cfg), dtype=float)
        lengths = np.broadcast_to(lengths, result.taus.shape)
        energies = np.array(
            [
                _trapz_energy_2d(result.phis[i], g.dy, g.dz, float(lengths[i]))
                for i in range(len(result.taus))
            ]
        )
        residuals = np.diff(energies) - (
            np.diff(result.influx) - np.diff(result.wall_loss)
        )
        return AuditResult(result.taus[1:].copy(), residuals, energies)

    fields = list(history)
    if len(fields) < 2:
        raise ConfigError("energy audit needs at least 2 snapshots")
    if grid is None:
        raise ConfigError("energy audit over raw fields needs the grid")
    taus = np.array([f.tau for f in fields])
    intervals = np.diff(taus)
    if intervals.min() <= 0 or np.ptp(intervals) > 1e-9 * intervals.max():
        raise ConfigError("snapshots must be at a uniform, increasing interval")
    cfg = fields[0].cfg
    energies = np.array(
        [
            _trapz_energy_2d(np.asarray(f.phi), grid.dy, grid.dz, f.length())
            for f in fields
        ]
    )
    residuals = np.empty(len(fields) - 1)
    for i in range(1, len(fields)):
        f = fields[i]
        theta = f.theta()
        length = f.length()
        eta = _eta_row(cfg, grid, f.tau)
        influx = cfg.beta_hat * float(np.trapezoid(eta, dx=grid.dy))
        wall = float(np.trapezoid(theta[:, 1] - theta[:, 0], dx=grid.dy)) / (
            grid.dz * length
        )
        residuals[i - 1] = energies[i] - energies[i - 1] - intervals[i - 1] * (
            influx - wall
        )
    return AuditResult(taus[1:], residuals, energies)


def mode_amplitudes(values: np.ndarray) -> np.ndarray:
    """Amplitude of each integer y-Fourier mode of a periodic nodal profile.

    The duplicated end node is dropped so the transform covers exactly one
    period; amplitudes are normalized so a profile a*cos(2 pi k y) returns a
    at mode k.  Works on a single profile or a stack (modes along the last
    axis).
    """
    vals = np.asarray(values, dtype=float)[..., :-1]
    n = vals.shape[-1]
    spec = np.abs(np.fft.rfft(vals, axis=-1)) / n
    spec[..., 1:] *= 2.0
    if n % 2 == 0 and spec.shape[-1] > 1:
        spec[..., -1] /= 2.0
    return spec
