import numpy as np
import pytest

from icefront import model
from icefront.errors import ModelError
from icefront.model import (
    DimlessConfig,
    PhysicalParams,
    enthalpy_from_temperature,
    nondimensionalize,
    phi_tilde,
    redimensionalize,
    temperature_from_enthalpy,
)


def desk_params(T_wall=-10.0, T_init=2.0):
    return PhysicalParams(rho=1.0, c=2.5, k=2.0, latent_heat=100.0,
                          T_wall=T_wall, T_init=T_init)


def test_temperature_piecewise_exact():
    rng = np.random.default_rng(7)
    phi = rng.uniform(-10.0, 10.0, size=2000)
    theta = temperature_from_enthalpy(phi)
    expect = np.where(phi < 0.0, phi, np.where(phi > 1.0, phi - 1.0, 0.0))
    np.testing.assert_array_equal(theta, expect)


def test_temperature_monotone_and_lipschitz():
    phi = np.sort(np.random.default_rng(8).uniform(-10.0, 10.0, 4000))
    theta = temperature_from_enthalpy(phi)
    dtheta = np.diff(theta)
    assert (dtheta >= 0.0).all()
    assert (dtheta <= np.diff(phi) * (1 + 1e-15)).all()


def test_phase_fraction_bounded():
    phi = np.linspace(-5.0, 5.0, 1001)
    tilde = phi_tilde(phi)
    assert tilde.min() >= -1.0 and tilde.max() <= 0.0
    np.testing.assert_allclose(temperature_from_enthalpy(phi), phi + tilde)


def test_enthalpy_from_temperature_inverts_outside_mush():
    theta = np.array([-3.0, -0.5, 0.4, 2.0])
    phi = enthalpy_from_temperature(theta)
    np.testing.assert_allclose(temperature_from_enthalpy(phi), theta)
    # the mush collapses onto its solid edge
    assert enthalpy_from_temperature(0.0) == 0.0


def test_nondimensionalize_desk_scale_constants():
    p = desk_params()
    cfg = nondimensionalize(p, beta=0.0, eta=100.0)
    assert cfg.gamma == pytest.approx(80.0)
    assert cfg.theta_wall == pytest.approx(-0.25)
    assert cfg.theta_init == pytest.approx(0.05)
    assert cfg.eta_hat == pytest.approx(1.0)
    assert p.time_scale == pytest.approx(1.25)


def test_round_trip_recovers_inputs():
    p = desk_params(T_wall=-26.0)
    cfg = nondimensionalize(p, beta=0.35, eta=120.0)
    back = redimensionalize(cfg, p)
    for key, want in (("T_wall", -26.0), ("T_init", 2.0), ("beta", 0.35),
                      ("eta", 120.0), ("length0", 1.0)):
        assert abs(back[key] - want) <= 1e-12 * abs(want)


def test_domain_length_affine():
    cfg = DimlessConfig(theta_wall=-0.25, theta_init=0.05, beta_hat=0.4,
                        eta_hat=1.5, length0=0.3)
    t1, t2 = 0.7, 1.9
    grown = model.domain_length(t1 + t2, cfg) - model.domain_length(t1, cfg)
    assert grown == pytest.approx(cfg.beta_hat * t2, abs=1e-15)


@pytest.mark.parametrize("field,value", [
    ("rho", -1.0), ("c", 0.0), ("k", -2.0),
    ("latent_heat", 0.0), ("length0", -0.5), ("length_ref", 0.0),
])
def test_physical_invariants_name_offending_field(field, value):
    kwargs = dict(rho=1.0, c=2.5, k=2.0, latent_heat=100.0,
                  T_wall=-10.0, T_init=2.0)
    kwargs[field] = value
    with pytest.raises(ModelError, match=field):
        PhysicalParams(**kwargs)


def test_wall_below_melt_below_initial():
    with pytest.raises(ModelError, match="T_wall < T_melt < T_init"):
        desk_params(T_wall=1.0)
    with pytest.raises(ModelError, match="T_wall < T_melt < T_init"):
        desk_params(T_init=-1.0)


def test_eta_hat_lower_bound():
    with pytest.raises(ModelError, match="eta_hat must be >= 1"):
        DimlessConfig(theta_wall=-0.25, theta_init=0.05, beta_hat=0.2,
                      eta_hat=0.5)


def test_beta_hat_sign():
    with pytest.raises(ModelError, match="beta_hat"):
        DimlessConfig(theta_wall=-0.25, theta_init=0.05, beta_hat=-0.1,
                      eta_hat=1.5)


def test_with_values_replaces_and_revalidates():
    cfg = DimlessConfig(theta_wall=-0.25, theta_init=0.05, beta_hat=0.2,
                        eta_hat=1.5)
    cfg2 = cfg.with_values(beta_hat=0.7)
    assert cfg2.beta_hat == 0.7 and cfg.beta_hat == 0.2
    with pytest.raises(ModelError):
        cfg.with_values(eta_hat=0.2)


def test_eta_hat_expression_checked_on_grid():
    y = np.linspace(0.0, 1.0, 101)
    ok = DimlessConfig(theta_wall=-0.1, theta_init=0.1, beta_hat=0.1,
                       eta_hat="2 + cos(3*pi*y)")
    model.check_eta_hat(ok, y=y)
    dips = DimlessConfig(theta_wall=-0.1, theta_init=0.1, beta_hat=0.1,
                         eta_hat="1.5 + cos(3*pi*y)")
    with pytest.raises(ModelError, match="everywhere"):
        model.check_eta_hat(dips, y=y)


def test_eta_hat_values_broadcast():
    cfg = DimlessConfig(theta_wall=-0.1, theta_init=0.1, beta_hat=0.1,
                        eta_hat=1.5)
    y = np.linspace(0.0, 1.0, 5)
    np.testing.assert_array_equal(model.eta_hat_values(cfg, y=y),
                                  np.full(5, 1.5))
    assert model.eta_hat_values(cfg) == 1.5


def test_unbound_sample_variable_is_rejected():
    cfg = DimlessConfig(theta_wall=-0.1, theta_init=0.1, beta_hat=0.1,
                        eta_hat="1 + zeta*(1 + cos(3*pi*y))")
    with pytest.raises(ModelError, match="zeta"):
        model.eta_hat_values(cfg, y=np.linspace(0, 1, 3))
