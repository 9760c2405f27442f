"""Implicit 1D enthalpy solver on the transformed unit interval.

The growing domain 0 <= x <= L(tau) is mapped to z = x/L(tau) in [0, 1],
which adds a stretching convection term to the enthalpy equation:

    dphi/dtau = (1/L^2) d2theta/dz2 + (beta_hat*z/L) dphi/dz

Diffusion acts on the temperature theta = phi + phi_tilde(phi) and is treated
implicitly; the nonlinearity is handled by lagging phi_tilde at the previous
time level (optionally iterating the lag to a fixed point).  Convection uses
the forward difference, which is the upwind side for this term.  Each step
solves one tridiagonal system per lag iterate with the Thomas algorithm.

Rows of the system, with D = dtau/dz^2, Lam = dtau/dz, kap = 1/L^2 and L
evaluated at the new time level:

* wall row: phi_1 pinned to the wall enthalpy (Dirichlet),
* interior: (1 + 2*D*kap + conv)*phi_i - D*kap*phi_{i-1} - (D*kap + conv)*phi_{i+1}
  = D*kap*(pt_{i-1} - 2*pt_i + pt_{i+1}) + phi_i^old, conv = beta_hat*z_i*Lam/L,
* injection row: (1/(L*dz) + beta_hat)*phi_N - (1/(L*dz))*phi_{N-1}
  = (1/(L*dz))*(pt_{N-1} - pt_N) + eta_hat*beta_hat,

where pt is the lagged phi_tilde.  An "insulated" variant replaces both
boundary rows with reflective-ghost half-cell rows; those conserve the
trapezoidal total enthalpy exactly (the production rows are tracking rows and
do not), which is what the closed-system energy audit checks.

Energy bookkeeping: with E(tau) = L(tau) * trapz(phi dz), the budget is

    dE/dtau = eta_hat*beta_hat - (1/L) dtheta/dz|_{z=0}

in enthalpy*length units per dimensionless time (injected enthalpy flux minus
conduction loss through the wall).  The run loop accumulates both flux terms
step by step so audits over any snapshot interval telescope exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import erf, erfc

from . import model
from .errors import BlowUpError, ConfigError, ModelError, SingularSystemError, SolverError
from .model import DimlessConfig

__all__ = [
    "Grid1D",
    "EnthalpyField1D",
    "InterfaceTrace",
    "Run1D",
    "AuditResult",
    "initialize",
    "step",
    "run",
    "snapshot_taus",
    "extract_interface",
    "interface_levels",
    "interface_trace",
    "energy_audit",
    "neumann_lambda",
    "neumann_oracle",
    "classify_regime",
    "LEVEL_SOLID_EDGE",
    "LEVEL_MID_MUSH",
    "LEVEL_LIQUID_EDGE",
]

# The numerical mush spans a few cells, so "the" front admits two useful
# conventions.  The solid-edge crossing phi=0 (the zero level set of the
# enthalpy) is the headline position reported in traces and CSV output; the
# mid-mush crossing phi=0.5 is the unbiased front estimator and is what the
# similarity benchmark compares against.  All three levels are recorded.
LEVEL_SOLID_EDGE = 0.0
LEVEL_MID_MUSH = 0.5
LEVEL_LIQUID_EDGE = 1.0

_STATUS_OK = 0
_STATUS_SINGULAR = 1
_STATUS_NONFINITE = 2


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on the reference interval [0, 1] plus the time step.

    ``dz`` must divide 1 and ``dtau`` must divide ``tau_end`` to machine
    accuracy, so node and step counts are exact integers.
    """

    dz: float
    dtau: float
    tau_end: float

    def __post_init__(self) -> None:
        if self.dz <= 0 or self.dtau <= 0 or self.tau_end <= 0:
            raise ConfigError("dz, dtau, tau_end must all be positive")
        if abs(round(1.0 / self.dz) * self.dz - 1.0) > 1e-9:
            raise ConfigError(f"dz={self.dz} does not divide the unit interval")
        if self.n_nodes < 3:
            raise ConfigError("need at least 3 nodes")
        if abs(round(self.tau_end / self.dtau) * self.dtau - self.tau_end) > 1e-9:
            raise ConfigError(
                f"dtau={self.dtau} does not divide tau_end={self.tau_end}"
            )

    @property
    def n_nodes(self) -> int:
        return round(1.0 / self.dz) + 1

    @property
    def n_steps(self) -> int:
        return round(self.tau_end / self.dtau)

    @property
    def z(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_nodes)

    @property
    def courant(self) -> float:
        """Lam = dtau/dz."""
        return self.dtau / self.dz

    @property
    def diffusion_number(self) -> float:
        """D = dtau/dz^2."""
        return self.dtau / self.dz**2


@dataclass(frozen=True)
class EnthalpyField1D:
    """Enthalpy state at one instant; temperature is always derived."""

    phi: np.ndarray
    tau: float
    cfg: DimlessConfig

    def theta(self) -> np.ndarray:
        return model.temperature_from_enthalpy(self.phi)

    def length(self) -> float:
        return model.domain_length(self.tau, self.cfg)


@dataclass(frozen=True)
class InterfaceTrace:
    """Front position over time, in reference and physical coordinates.

    ``s_star``/``s_phys`` use the solid-edge convention (phi=0 crossing);
    ``s_mid`` and ``s_liquid`` are the phi=0.5 and phi=1 crossings in
    reference coordinates, recorded for mush-width diagnostics and for the
    similarity benchmark.
    """

    taus: np.ndarray
    s_star: np.ndarray
    s_phys: np.ndarray
    length: np.ndarray
    v_est: np.ndarray  # finite-difference dS*/dtau
    s_mid: np.ndarray
    s_liquid: np.ndarray


@dataclass(frozen=True)
class Run1D:
    """Full run output: snapshot states plus accumulated boundary fluxes.

    ``influx`` and ``wall_loss`` hold the step-by-step accumulated flux
    integrals (injected enthalpy, conduction loss through the wall) up to
    each snapshot instant, so energy audits telescope exactly.
    """

    grid: Grid1D
    cfg: DimlessConfig
    taus: np.ndarray
    phis: np.ndarray
    influx: np.ndarray
    wall_loss: np.ndarray
    insulated: bool = False

    def field(self, idx: int) -> EnthalpyField1D:
        return EnthalpyField1D(self.phis[idx].copy(), float(self.taus[idx]), self.cfg)

    @property
    def final(self) -> EnthalpyField1D:
        return self.field(len(self.taus) - 1)


@dataclass(frozen=True)
class AuditResult:
    """Energy-budget residual per audit interval (see module docstring)."""

    taus: np.ndarray  # interval end times
    residuals: np.ndarray
    energies: np.ndarray  # at snapshot instants, len = len(taus) + 1

    @property
    def max_relative_residual(self) -> float:
        scale = float(np.max(np.abs(self.energies)))
        return float(np.max(np.abs(self.residuals))) / scale


@njit(cache=True)
def _thomas(a, b, c, d, cp, dp, x):
    """Solve a tridiagonal system in place via the Thomas algorithm.

    Parameters
    ----------
    a, b, c, d : ndarray
        Sub-, main-, super-diagonal and right-hand side. ``a[0]`` and
        ``c[-1]`` are ignored.
    cp, dp, x : ndarray
        Scratch arrays and the solution output, same length.

    Returns
    -------
    int
        Row index of a vanishing pivot, or -1 on success.  The assembled
        systems are diagonally dominant, so a tiny pivot signals a
        configuration bug rather than an unlucky matrix.
    """
    n = b.shape[0]
    den = b[0]
    if abs(den) < 1e-14:
        return 0
    cp[0] = c[0] / den
    dp[0] = d[0] / den
    for i in range(1, n):
        den = b[i] - a[i] * cp[i - 1]
        if abs(den) < 1e-14:
            return i
        cp[i] = c[i] / den
        dp[i] = (d[i] - a[i] * dp[i - 1]) / den
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return -1


@njit(cache=True)
def _advance_1d(
    phi,
    tau0,
    dz,
    dtau,
    n_steps,
    length0,
    beta_hat,
    eta_arr,
    wall_phi,
    insulated,
    lag_iters,
    lag_tol,
    snap_steps,
    snaps,
    snap_taus,
    snap_influx,
    snap_wall,
):
    """Advance the implicit scheme ``n_steps`` steps, recording snapshots.

    ``phi`` is updated in place.  ``eta_arr[k]`` is the influx parameter at
    the new time level of step k.  ``snap_steps`` lists (ascending, 1-based)
    step indices at which state and accumulated fluxes are written into the
    ``snap_*`` output arrays.  Returns (status, step, node) where status is
    0 = ok, 1 = singular pivot, 2 = non-finite value.
    """
    n = phi.shape[0]
    a = np.empty(n)
    b = np.empty(n)
    c = np.empty(n)
    d = np.empty(n)
    cp = np.empty(n)
    dp = np.empty(n)
    new = np.empty(n)
    pt = np.empty(n)
    lag_src = np.empty(n)
    prev = np.empty(n)

    dnum = dtau / dz**2
    lam = dtau / dz
    influx_cum = 0.0
    wall_cum = 0.0
    ptr = 0

    for k in range(n_steps):
        tau_new = tau0 + (k + 1) * dtau
        length = length0 + beta_hat * tau_new
        kap = 1.0 / (length * length)
        dk = dnum * kap
        eta_k = eta_arr[k]

        for i in range(n):
            prev[i] = phi[i]
            lag_src[i] = phi[i]

        for it in range(lag_iters):
            for i in range(n):
                v = lag_src[i]
                pt[i] = 0.5 * (abs(1.0 - v) - abs(v) - 1.0)

            if insulated:
                b[0] = 1.0 + 2.0 * dk
                c[0] = -2.0 * dk
                d[0] = 2.0 * dk * (pt[1] - pt[0]) + prev[0]
                a[0] = 0.0
            else:
                a[0] = 0.0
                b[0] = 1.0
                c[0] = 0.0
                d[0] = wall_phi
            for i in range(1, n - 1):
                conv = beta_hat * (i * dz) * lam / length
                a[i] = -dk
                b[i] = 1.0 + 2.0 * dk + conv
                c[i] = -(dk + conv)
                d[i] = dk * (pt[i - 1] - 2.0 * pt[i] + pt[i + 1]) + prev[i]
            if insulated:
                a[n - 1] = -2.0 * dk
                b[n - 1] = 1.0 + 2.0 * dk
                c[n - 1] = 0.0
                d[n - 1] = 2.0 * dk * (pt[n - 2] - pt[n - 1]) + prev[n - 1]
            else:
                coefb = 1.0 / (length * dz)
                a[n - 1] = -coefb
                b[n - 1] = coefb + beta_hat
                c[n - 1] = 0.0
                d[n - 1] = coefb * (pt[n - 2] - pt[n - 1]) + eta_k * beta_hat

            bad = _thomas(a, b, c, d, cp, dp, new)
            if bad >= 0:
                return _STATUS_SINGULAR, k, bad

            if lag_iters > 1 and it > 0:
                change = 0.0
                for i in range(n):
                    diff = abs(new[i] - lag_src[i])
                    if diff > change:
                        change = diff
                for i in range(n):
                    lag_src[i] = new[i]
                if change < lag_tol:
                    break
            else:
                for i in range(n):
                    lag_src[i] = new[i]

        for i in range(n):
            if not np.isfinite(new[i]):
                return _STATUS_NONFINITE, k, i
            phi[i] = new[i]

        if not insulated:
            influx_cum += dtau * eta_k * beta_hat
            th0 = phi[0] + 0.5 * (abs(1.0 - phi[0]) - abs(phi[0]) - 1.0)
            th1 = phi[1] + 0.5 * (abs(1.0 - phi[1]) - abs(phi[1]) - 1.0)
            wall_cum += dtau * (th1 - th0) / (dz * length)

        if ptr < snap_steps.shape[0] and k + 1 == snap_steps[ptr]:
            for i in range(n):
                snaps[ptr, i] = phi[i]
            snap_taus[ptr] = tau_new
            snap_influx[ptr] = influx_cum
            snap_wall[ptr] = wall_cum
            ptr += 1

    return _STATUS_OK, n_steps, -1


def initialize(grid: Grid1D, cfg: DimlessConfig) -> EnthalpyField1D:
    """Initial state: liquid at theta_init everywhere, wall node pinned.

    The initial temperature must be positive (liquid); the wall node takes
    the enthalpy matching the wall temperature.
    """
    if cfg.theta_init <= 0:
        raise ModelError(
            f"theta_init must be positive (liquid start), got {cfg.theta_init}"
        )
    phi = np.full(grid.n_nodes, cfg.theta_init + 1.0)
    phi[0] = model.enthalpy_from_temperature(cfg.theta_wall)
    return EnthalpyField1D(phi, 0.0, cfg)


def _eta_steps(cfg: DimlessConfig, tau0: float, dtau: float, n_steps: int) -> np.ndarray:
    """Influx parameter at the new time level of every step."""
    eta = cfg.eta_hat
    if isinstance(eta, float):
        return np.full(n_steps, eta)
    if "y" in eta.variables:
        raise ModelError("1D solver cannot use a y-dependent eta_hat")
    unbound = eta.variables - {"tau"}
    if unbound:
        raise ModelError(
            f"eta_hat expression has unbound variables {sorted(unbound)}; "
            "random parameters must be substituted before solving"
        )
    taus = tau0 + dtau * np.arange(1, n_steps + 1)
    kwargs = {"tau": taus} if "tau" in eta.variables else {}
    vals = np.broadcast_to(np.asarray(eta(**kwargs), dtype=float), (n_steps,)).copy()
    if not np.all(np.isfinite(vals)):
        raise ModelError("eta_hat evaluates to a non-finite value")
    if vals.min() < 1.0:
        raise ModelError(f"eta_hat must be >= 1 at every step; minimum {vals.min():.6g}")
    return vals


def _wall_phi(cfg: DimlessConfig) -> float:
    return float(model.enthalpy_from_temperature(cfg.theta_wall))


def _raise_status(status: int, step_idx: int, node: int, tau0: float, dtau: float):
    if status == _STATUS_SINGULAR:
        raise SingularSystemError(
            f"tridiagonal pivot below 1e-14 at row {node}, "
            f"step {step_idx} (tau={tau0 + (step_idx + 1) * dtau:.6g})"
        )
    if status == _STATUS_NONFINITE:
        raise BlowUpError(
            f"non-finite enthalpy at node {node}, "
            f"step {step_idx} (tau={tau0 + (step_idx + 1) * dtau:.6g})"
        )


def step(
    field: EnthalpyField1D,
    grid: Grid1D,
    *,
    lag_iterations: int = 1,
    lag_tol: float = 1e-10,
    insulated: bool = False,
) -> EnthalpyField1D:
    """One implicit time step; returns a new field at tau + dtau."""
    cfg = field.cfg
    if insulated and cfg.beta_hat != 0.0:
        raise ConfigError("insulated variant requires beta_hat = 0")
    phi = np.array(field.phi, dtype=float)
    eta_arr = _eta_steps(cfg, field.tau, grid.dtau, 1)
    empty_i = np.empty(0, dtype=np.int64)
    empty_f = np.empty((0, phi.shape[0]))
    empty_1 = np.empty(0)
    status, k, node = _advance_1d(
        phi,
        field.tau,
        grid.dz,
        grid.dtau,
        1,
        cfg.length0,
        cfg.beta_hat,
        eta_arr,
        _wall_phi(cfg),
        insulated,
        max(1, int(lag_iterations)),
        lag_tol,
        empty_i,
        empty_f,
        empty_1,
        empty_1.copy(),
        empty_1.copy(),
    )
    _raise_status(status, k, node, field.tau, grid.dtau)
    return EnthalpyField1D(phi, field.tau + grid.dtau, cfg)


def _snap_steps(n_steps: int, snapshots: int, record_every: int | None) -> np.ndarray:
    """Step indices recorded by a run; the final step is always included."""
    if record_every is None:
        if snapshots < 1:
            raise ConfigError("snapshots must be >= 1")
        record_every = max(1, math.ceil(n_steps / snapshots))
    stride = int(record_every)
    steps = np.arange(stride, n_steps + 1, stride, dtype=np.int64)
    if steps.size == 0 or steps[-1] != n_steps:
        steps = np.append(steps, n_steps)
    return steps


def snapshot_taus(
    grid: Grid1D, snapshots: int = 400, record_every: int | None = None
) -> np.ndarray:
    """Times a run with this cadence would record, including tau = 0."""
    steps = _snap_steps(grid.n_steps, snapshots, record_every)
    return np.concatenate(([0.0], steps * grid.dtau))


def run(
    grid: Grid1D,
    cfg: DimlessConfig,
    *,
    field0: EnthalpyField1D | None = None,
    snapshots: int = 400,
    record_every: int | None = None,
    lag_iterations: int = 1,
    lag_tol: float = 1e-10,
    insulated: bool = False,
) -> Run1D:
    """Run the scheme to tau_end, recording at the snapshot cadence.

    The cadence defaults to every ceil(K/snapshots) steps; the initial state
    and the final step are always recorded.  Pass ``field0`` to start from a
    custom state (audit variants); otherwise the standard liquid start is
    used.
    """
    if insulated and cfg.beta_hat != 0.0:
        raise ConfigError("insulated variant requires beta_hat = 0")
    if field0 is None:
        field0 = initialize(grid, cfg)
    elif field0.phi.shape[0] != grid.n_nodes:
        raise ConfigError(
            f"field0 has {field0.phi.shape[0]} nodes, grid expects {grid.n_nodes}"
        )
    n_steps = grid.n_steps
    snap_steps = _snap_steps(n_steps, snapshots, record_every)

    phi = np.array(field0.phi, dtype=float)
    n_snap = snap_steps.size
    snaps = np.empty((n_snap, grid.n_nodes))
    snap_taus = np.empty(n_snap)
    snap_influx = np.empty(n_snap)
    snap_wall = np.empty(n_snap)
    eta_arr = _eta_steps(cfg, field0.tau, grid.dtau, n_steps)

    status, k, node = _advance_1d(
        phi,
        field0.tau,
        grid.dz,
        grid.dtau,
        n_steps,
        cfg.length0,
        cfg.beta_hat,
        eta_arr,
        _wall_phi(cfg),
        insulated,
        max(1, int(lag_iterations)),
        lag_tol,
        snap_steps,
        snaps,
        snap_taus,
        snap_influx,
        snap_wall,
    )
    _raise_status(status, k, node, field0.tau, grid.dtau)

    taus = np.concatenate(([field0.tau], snap_taus))
    phis = np.vstack([field0.phi[None, :], snaps])
    influx = np.concatenate(([0.0], snap_influx))
    wall_loss = np.concatenate(([0.0], snap_wall))
    return Run1D(grid, cfg, taus, phis, influx, wall_loss, insulated)


def _locate_level(phi: np.ndarray, dz: float, level: float) -> float:
    """First upward crossing of ``level`` scanning from the wall.

    Returns 0 when the wall node is already at/above the level (no solid) and
    1 when the whole column sits below it.
    """
    if phi[0] >= level:
        return 0.0
    above = np.nonzero(phi >= level)[0]
    if above.size == 0:
        return 1.0
    i = int(above[0])
    frac = (level - phi[i - 1]) / (phi[i] - phi[i - 1])
    return (i - 1 + frac) * dz


def extract_interface(
    field: EnthalpyField1D, grid: Grid1D, level: float = LEVEL_MID_MUSH
) -> tuple[float, float]:
    """Front position (reference, physical) at the given enthalpy level."""
    s_star = _locate_level(np.asarray(field.phi), grid.dz, level)
    return s_star, s_star * field.length()


def interface_levels(field: EnthalpyField1D, grid: Grid1D) -> dict[float, float]:
    """Mush diagnostics: crossing positions of phi = 0, 0.5 and 1."""
    phi = np.asarray(field.phi)
    return {
        level: _locate_level(phi, grid.dz, level)
        for level in (LEVEL_SOLID_EDGE, LEVEL_MID_MUSH, LEVEL_LIQUID_EDGE)
    }


def interface_trace(result: Run1D) -> InterfaceTrace:
    """Interface series over all snapshots of a run (all three levels)."""
    dz = result.grid.dz
    s_star = np.array(
        [_locate_level(row, dz, LEVEL_SOLID_EDGE) for row in result.phis]
    )
    s_mid = np.array([_locate_level(row, dz, LEVEL_MID_MUSH) for row in result.phis])
    s_liquid = np.array(
        [_locate_level(row, dz, LEVEL_LIQUID_EDGE) for row in result.phis]
    )
    length = model.domain_length(result.taus, result.cfg)
    length = np.broadcast_to(np.asarray(length, dtype=float), s_star.shape).copy()
    s_phys = s_star * length
    if len(result.taus) > 1:
        v_est = np.gradient(s_star, result.taus)
    else:
        v_est = np.zeros_like(s_star)
    return InterfaceTrace(
        result.taus.copy(), s_star, s_phys, length, v_est, s_mid, s_liquid
    )


def _trapz_energy(phi: np.ndarray, dz: float, length: float) -> float:
    return length * float(np.trapezoid(phi, dx=dz))


def energy_audit(history, grid: Grid1D | None = None) -> AuditResult:
    """Energy-budget residuals between consecutive snapshots.

    Preferred input is a :class:`Run1D`: its accumulated flux integrals make
    the audit exact per step regardless of snapshot cadence.  A plain list of
    fields (>= 2, uniform interval) is also accepted; then the flux over each
    interval is approximated from the interval-end state, which is only exact
    for closed or stationary systems.
    """
    if isinstance(history, Run1D):
        result = history
        dz = result.grid.dz
        lengths = np.asarray(model.domain_length(result.taus, result.cfg), dtype=float)
        energies = np.array(
            [
                _trapz_energy(result.phis[i], dz, float(lengths[i]))
                for i in range(len(result.taus))
            ]
        )
        d_energy = np.diff(energies)
        flux = np.diff(result.influx) - np.diff(result.wall_loss)
        residuals = d_energy - flux
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
        [_trapz_energy(np.asarray(f.phi), grid.dz, f.length()) for f in fields]
    )
    residuals = np.empty(len(fields) - 1)
    for i in range(1, len(fields)):
        f = fields[i]
        theta = f.theta()
        length = f.length()
        eta = model.eta_hat_values(cfg, tau=f.tau)
        influx = float(eta) * cfg.beta_hat
        wall = (theta[1] - theta[0]) / (grid.dz * length)
        residuals[i - 1] = energies[i] - energies[i - 1] - intervals[i - 1] * (
            influx - wall
        )
    return AuditResult(taus[1:], residuals, energies)


def neumann_lambda(theta_wall: float, theta_init: float, tol: float = 1e-12) -> float:
    """Growth coefficient of the two-phase similarity solution.

    Solves sqrt(pi)*lam*exp(lam^2) = (-theta_wall)/erf(lam) - theta_init/erfc(lam)
    by bisection until |f(lam)| <= tol.  The unit latent-heat jump of the
    nondimensionalization is built in; both phases share unit diffusivity.
    """
    if theta_wall > 0:
        raise ConfigError(f"needs a subcooled wall, got theta_wall={theta_wall}")
    if theta_init < 0:
        raise ConfigError(f"needs a liquid far field, got theta_init={theta_init}")
    if theta_wall == 0.0:
        return 0.0

    def f(lam: float) -> float:
        return (
            math.sqrt(math.pi) * lam * math.exp(lam**2)
            + theta_wall / erf(lam)
            + theta_init / erfc(lam)
        )

    lo, hi = 1e-12, 0.5
    while f(hi) < 0:
        hi *= 2.0
        if hi > 64.0:
            raise SolverError("no bracketing interval for the similarity coefficient")
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= tol:
            return mid
        if fm < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-17 * max(1.0, hi):
            break
    mid = 0.5 * (lo + hi)
    if abs(f(mid)) > tol:
        raise SolverError("similarity coefficient bisection did not converge")
    return mid


@dataclass(frozen=True)
class NeumannSolution:
    """Analytic front S(tau) = 2*lam*sqrt(tau) for the fixed-domain limit."""

    lam: float

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        out = 2.0 * self.lam * np.sqrt(tau)
        return out if out.ndim else float(out)


def neumann_oracle(cfg: DimlessConfig) -> NeumannSolution:
    """Similarity reference for the degenerate beta_hat = 0 problem.

    Only valid while the far boundary is out of reach (domain long enough
    over the compared horizon); positions returned are physical.
    """
    if cfg.beta_hat != 0.0:
        raise ConfigError(
            f"the similarity oracle needs beta_hat = 0, got {cfg.beta_hat}"
        )
    return NeumannSolution(neumann_lambda(cfg.theta_wall, cfg.theta_init))


def classify_regime(trace: InterfaceTrace) -> np.ndarray:
    """Label each instant interface- or injection-dominated.

    Compares the physical front speed with the boundary speed (recovered
    from the length series, which is linear in tau).
    """
    if len(trace.taus) < 2:
        raise ConfigError("regime classification needs at least 2 trace points")
    span = trace.taus[-1] - trace.taus[0]
    beta_hat = (trace.length[-1] - trace.length[0]) / span
    front_speed = np.gradient(trace.s_phys, trace.taus)
    return np.where(
        front_speed > beta_hat, "interface-dominated", "injection-dominated"
    )
