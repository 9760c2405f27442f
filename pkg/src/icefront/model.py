"""Problem description for solidification against a growing injection boundary.

A liquid layer occupies 0 <= x <= L(t).  The wall at x=0 is held below the
melt temperature, so a solid front grows inward while the outer boundary
x=L(t) advances as new material is injected carrying enthalpy.  The state
variable everywhere is the dimensionless volumetric enthalpy ``phi``;
temperature is always derived from it, never stored:

    theta = phi + phi_tilde(phi),   phi_tilde = 0.5*(|1 - phi| - |phi| - 1)

which evaluates to theta=phi for solid (phi < 0), theta=0 across the mushy
band (0 <= phi <= 1, latent heat being exchanged), and theta=phi-1 for liquid
(phi > 1).

Scaling conventions (all solver code works in these units):

* lengths are measured in the reference length, so ``length_ref`` never
  appears downstream; the growing domain is L(tau) = length0 + beta_hat*tau;
* temperature scale theta = c*T/latent_heat, enthalpy scale phi = H/(rho*latent_heat);
* time scale tau = t*k/(rho*c*length_ref^2).

With these, the melt temperature is exactly 0, the unit enthalpy jump across
the mush is the latent heat, and the injection condition at z = x/L(tau) = 1
reads (1/L)*dtheta/dz + beta_hat*phi = eta_hat*beta_hat.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ModelError
from .expressions import Expression, as_expression

__all__ = [
    "PhysicalParams",
    "DimlessConfig",
    "temperature_from_enthalpy",
    "enthalpy_from_temperature",
    "phi_tilde",
    "domain_length",
    "nondimensionalize",
    "redimensionalize",
    "eta_hat_values",
    "check_eta_hat",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional material properties and setup.

    Attributes
    ----------
    rho : float
        Density.
    c : float
        Specific heat capacity.
    k : float
        Thermal conductivity.
    latent_heat : float
        Specific latent heat of fusion.
    T_wall : float
        Fixed wall temperature; must be below ``T_melt``.
    T_init : float
        Initial liquid temperature; must be above ``T_melt``.
    T_melt : float
        Melt temperature.
    length0 : float
        Initial domain length.
    length_ref : float
        Reference length used by the scaling.
    """

    rho: float
    c: float
    k: float
    latent_heat: float
    T_wall: float
    T_init: float
    T_melt: float = 0.0
    length0: float = 1.0
    length_ref: float = 1.0

    def __post_init__(self) -> None:
        for name in ("rho", "c", "k", "latent_heat", "length0", "length_ref"):
            if getattr(self, name) <= 0:
                raise ModelError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.T_wall < self.T_melt < self.T_init:
            raise ModelError(
                "require T_wall < T_melt < T_init, got "
                f"{self.T_wall}, {self.T_melt}, {self.T_init}"
            )

    @property
    def time_scale(self) -> float:
        """Seconds of physical time per unit of dimensionless time."""
        return self.rho * self.c * self.length_ref**2 / self.k

    @property
    def gamma(self) -> float:
        """Latent-heat group k*latent_heat / (c*length_ref^2)."""
        return self.k * self.latent_heat / (self.c * self.length_ref**2)


@dataclass(frozen=True)
class DimlessConfig:
    """Dimensionless problem: everything the solvers need.

    ``eta_hat`` is either a number or an :class:`Expression` in ``y`` (and
    ``tau``); it must be >= 1 everywhere, meaning injected material arrives
    at or above the phase-equilibrium enthalpy.  ``beta_hat`` is the
    dimensionless growth rate of the domain.  ``theta_melt`` is pinned to 0
    by the scaling and kept as a field only so the invariant is explicit.
    """

    theta_wall: float
    theta_init: float
    beta_hat: float
    eta_hat: "Expression | float"
    length0: float = 1.0
    gamma: float | None = None
    theta_melt: float = 0.0

    def __post_init__(self) -> None:
        if self.theta_melt != 0.0:
            raise ModelError("scaling requires theta_melt == 0")
        if self.beta_hat < 0:
            raise ModelError(f"beta_hat must be >= 0, got {self.beta_hat}")
        if self.length0 <= 0:
            raise ModelError(f"length0 must be positive, got {self.length0}")
        eta = as_expression(self.eta_hat)
        object.__setattr__(self, "eta_hat", eta)
        if isinstance(eta, float) and eta < 1.0:
            raise ModelError(f"eta_hat must be >= 1, got {eta}")

    @property
    def eta_is_constant(self) -> bool:
        return isinstance(self.eta_hat, float)

    def with_values(self, **changes) -> "DimlessConfig":
        return replace(self, **changes)


def phi_tilde(phi):
    """Correction term linking enthalpy to temperature, theta = phi + phi_tilde.

    Equal to 0.5*(|1 - phi| - |phi| - 1), i.e. minus the liquid fraction
    clipped to the mushy band: 0 in solid, -phi in the mush, -1 in liquid.
    Evaluated branchwise so each piece is exact (the closed form cancels to
    -phi +- rounding inside the mush).
    """
    phi = np.asarray(phi)
    out = np.where(phi < 0.0, 0.0, np.where(phi > 1.0, -1.0, -phi))
    return out if out.ndim else float(out)


def temperature_from_enthalpy(phi):
    """Dimensionless temperature for a given dimensionless enthalpy.

    Branchwise so the mush plateau is exactly zero.
    """
    phi = np.asarray(phi)
    out = np.where(phi < 0.0, phi, np.where(phi > 1.0, phi - 1.0, 0.0))
    return out if out.ndim else float(out)


def enthalpy_from_temperature(theta):
    """Inverse relation used for boundary pins.

    The map phi -> theta is flat across the mush, so the inverse collapses
    theta=0 onto the solid edge phi=0.  Negative temperatures give the solid
    branch phi=theta, positive ones the liquid branch phi=theta+1.
    """
    theta = np.asarray(theta)
    out = np.where(theta > 0, theta + 1.0, np.where(theta < 0, theta, 0.0))
    return out if out.ndim else float(out)


def domain_length(tau, cfg: DimlessConfig):
    """Domain length L(tau) = length0 + beta_hat*tau in reference units."""
    tau = np.asarray(tau)
    out = cfg.length0 + cfg.beta_hat * tau
    return out if out.ndim else float(out)


def nondimensionalize(p: PhysicalParams, beta: float, eta: float) -> DimlessConfig:
    """Convert dimensional inputs to a :class:`DimlessConfig`.

    ``beta`` is the dimensional outer-boundary speed dL/dt and ``eta`` the
    dimensional enthalpy carried per unit volume of injected material.  The
    influx group reduces to eta_hat = eta/(rho*latent_heat); equivalently
    eta_tilde/gamma with eta_tilde = eta*k/(rho*c*length_ref^2).
    """
    if beta < 0:
        raise ModelError(f"boundary speed beta must be >= 0, got {beta}")
    scale = p.c / p.latent_heat
    return DimlessConfig(
        theta_wall=scale * p.T_wall,
        theta_init=scale * p.T_init,
        beta_hat=beta * p.time_scale / p.length_ref,
        eta_hat=eta / (p.rho * p.latent_heat),
        length0=p.length0 / p.length_ref,
        gamma=p.gamma,
        theta_melt=scale * p.T_melt,
    )


def redimensionalize(cfg: DimlessConfig, p: PhysicalParams) -> dict[str, float]:
    """Invert :func:`nondimensionalize` for scalar fields (round-trip check)."""
    if not cfg.eta_is_constant:
        raise ModelError("cannot redimensionalize an expression-valued eta_hat")
    scale = p.latent_heat / p.c
    return {
        "T_wall": cfg.theta_wall * scale,
        "T_init": cfg.theta_init * scale,
        "beta": cfg.beta_hat * p.length_ref / p.time_scale,
        "eta": cfg.eta_hat * p.rho * p.latent_heat,
        "length0": cfg.length0 * p.length_ref,
    }


def eta_hat_values(cfg: DimlessConfig, y=None, tau: float = 0.0):
    """Evaluate eta_hat at transverse positions ``y`` and time ``tau``.

    Scalars broadcast; expressions may use any subset of {y, tau}.
    """
    eta = cfg.eta_hat
    if isinstance(eta, float):
        if y is None:
            return eta
        return np.full(np.shape(y), eta)
    kwargs = {}
    if "y" in eta.variables:
        kwargs["y"] = np.asarray(y) if y is not None else 0.0
    if "tau" in eta.variables:
        kwargs["tau"] = tau
    leftover = eta.variables - kwargs.keys()
    if leftover:
        raise ModelError(
            f"eta_hat expression has unbound variables {sorted(leftover)}; "
            "random parameters must be substituted before solving"
        )
    vals = eta(**kwargs)
    if y is not None:
        vals = np.broadcast_to(np.asarray(vals, dtype=float), np.shape(y)).copy()
    return vals


def check_eta_hat(cfg: DimlessConfig, y=None, taus=(0.0,)) -> None:
    """Validate eta_hat >= 1 pointwise on the evaluation grid."""
    for tau in np.atleast_1d(taus):
        vals = np.atleast_1d(eta_hat_values(cfg, y=y, tau=float(tau)))
        if not np.all(np.isfinite(vals)):
            raise ModelError("eta_hat evaluates to a non-finite value")
        low = float(vals.min())
        if low < 1.0:
            raise ModelError(
                f"eta_hat must be >= 1 everywhere; minimum {low:.6g} at tau={tau}"
            )
