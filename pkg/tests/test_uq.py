import math

import numpy as np
import pytest

from icefront.errors import CampaignError, ConfigError, SolverError
from icefront.expressions import Expression
from icefront.model import DimlessConfig
from icefront import solver1d as s1
from icefront import solver2d as s2
from icefront import uq


def beta_spec(a=0.2, b=0.7):
    return uq.RandomInputSpec((uq.UniformInput("beta_hat", a, b),))


def two_param_spec():
    return uq.RandomInputSpec(
        (uq.UniformInput("beta_hat", 0.2, 0.7), uq.UniformInput("eta_hat", 1.0, 1.25))
    )


# ---------------------------------------------------------------- sampling


def test_sampling_is_seed_deterministic():
    spec = uq.RandomInputSpec(
        (uq.UniformInput("beta_hat", 0.2, 0.7), uq.NormalInput("zeta", 2.0, 1.0)),
        bindings={"eta_hat": "1 + zeta**2 / 10"},
    )
    a = uq.sample_inputs(spec, 64, 7)
    b = uq.sample_inputs(spec, 64, 7)
    np.testing.assert_array_equal(a, b)
    assert a.shape == (64, 2)
    c = uq.sample_inputs(spec, 64, 8)
    assert not np.array_equal(a, c)


def test_uniform_samples_match_the_law():
    params = uq.sample_inputs(beta_spec(), 100_000, 3)
    vals = params[:, 0]
    assert vals.min() >= 0.2 and vals.max() <= 0.7
    assert abs(vals.mean() - 0.45) < 0.005


def test_normal_truncation_keeps_the_law():
    spec = uq.RandomInputSpec(
        (uq.NormalInput("zeta", 2.0, 1.0),), bindings={"eta_hat": "1 + zeta**2"}
    )
    vals = uq.sample_inputs(spec, 100_000, 5)[:, 0]
    lo, hi = spec.inputs[0].support
    assert lo == 2.0 - 4.0 and hi == 2.0 + 4.0
    assert vals.min() >= lo and vals.max() <= hi
    assert abs(vals.mean() - 2.0) < 0.02
    assert abs(vals.var() - 1.0) < 0.02  # truncation bias is ~1e-3
    log = uq.sample_log(spec, 100_000, 5)
    assert log["truncated_mass"]["zeta"] == pytest.approx(math.erfc(4 / math.sqrt(2)))
    assert log["redraws"]["zeta"] >= 0


def test_input_validation():
    with pytest.raises(ConfigError, match="a < b"):
        uq.UniformInput("beta_hat", 0.7, 0.7)
    with pytest.raises(ConfigError, match="sigma > 0"):
        uq.NormalInput("zeta", 2.0, 0.0)
    with pytest.raises(ConfigError, match="reserved"):
        uq.UniformInput("tau", 0.0, 1.0)
    with pytest.raises(ConfigError, match="identifier"):
        uq.UniformInput("2bad", 0.0, 1.0)
    with pytest.raises(ConfigError, match="duplicate"):
        uq.RandomInputSpec(
            (uq.UniformInput("beta_hat", 0.0, 1.0), uq.UniformInput("beta_hat", 1.0, 2.0))
        )
    with pytest.raises(ConfigError, match="at least one"):
        uq.RandomInputSpec(())


def test_binding_validation():
    with pytest.raises(ConfigError, match="cannot bind"):
        uq.RandomInputSpec(
            (uq.UniformInput("beta_hat", 0.2, 0.7),), bindings={"gamma": "beta_hat"}
        )
    with pytest.raises(ConfigError, match="unknown names"):
        uq.RandomInputSpec(
            (uq.UniformInput("beta_hat", 0.2, 0.7),),
            bindings={"eta_hat": "1 + omega"},
        )
    with pytest.raises(ConfigError, match="no binding"):
        # zeta is drawn but never reaches the config
        uq.RandomInputSpec((uq.UniformInput("zeta", 0.0, 1.0),))


def test_bind_config_substitutes_one_point():
    base = DimlessConfig(theta_wall=-0.25, theta_init=0.05, beta_hat=0.1, eta_hat=1.0)
    spec = beta_spec()
    cfg = spec.bind_config(base, np.array([0.4]))
    assert cfg.beta_hat == 0.4 and cfg.eta_hat == 1.0
    with pytest.raises(ConfigError, match="shape"):
        spec.bind_config(base, np.array([0.4, 0.5]))
    # a y-dependent target stays an expression after substitution
    spec2 = uq.RandomInputSpec(
        (uq.UniformInput("zeta", 1.0, 1.2),),
        bindings={"eta_hat": "1 + zeta*(1 + cos(3*pi*y))"},
    )
    cfg2 = spec2.bind_config(base, np.array([1.1]))
    assert isinstance(cfg2.eta_hat, Expression)
    assert cfg2.eta_hat.variables == {"y"}


# ---------------------------------------------------------------- basis


def test_basis_index_set_layout():
    basis = uq.legendre_basis(two_param_spec(), degree=2)
    assert basis.size == 6  # C(2+2, 2)
    expected = [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]
    assert [tuple(m) for m in basis.multi_indices] == expected
    assert basis.dims == 2
    with pytest.raises(ConfigError, match="degree"):
        uq.LegendreBasis(("a",), np.array([0.0]), np.array([1.0]), -1)
    with pytest.raises(ConfigError, match="low < high"):
        uq.LegendreBasis(("a",), np.array([1.0]), np.array([1.0]), 2)


def test_eval_basis_point_values():
    basis = uq.legendre_basis(beta_spec(0.0, 2.0), degree=2)
    # right edge maps to x = 1 where every orthonormal P_k(1) = sqrt(2k+1)
    vals = uq.eval_basis(basis, np.array([2.0]))
    np.testing.assert_allclose(vals, [1.0, math.sqrt(3), math.sqrt(5)], atol=1e-14)
    # center maps to x = 0: odd orders vanish, P2(0) = -1/2
    vals = uq.eval_basis(basis, np.array([1.0]))
    np.testing.assert_allclose(vals, [1.0, 0.0, -math.sqrt(5) / 2], atol=1e-14)
    batch = uq.eval_basis(basis, np.array([[2.0], [1.0]]))
    assert batch.shape == (2, 3)
    np.testing.assert_allclose(batch[0], [1.0, math.sqrt(3), math.sqrt(5)], atol=1e-14)
    with pytest.raises(ConfigError, match="components"):
        uq.eval_basis(basis, np.array([[1.0, 2.0]]))


def test_constant_mode_is_one_everywhere():
    basis = uq.legendre_basis(two_param_spec(), degree=3)
    pts = uq.sample_inputs(two_param_spec(), 50, 1)
    vals = uq.eval_basis(basis, pts)
    np.testing.assert_array_equal(vals[:, 0], np.ones(50))
    # at the box center every odd univariate factor vanishes
    center = np.array([0.45, 1.125])
    v = uq.eval_basis(basis, center)
    for n, midx in enumerate(basis.multi_indices):
        if any(k % 2 == 1 for k in midx):
            assert abs(v[n]) < 1e-14


def test_discrete_inner_product_basics():
    assert uq.discrete_inner_product(np.ones(4), np.ones(4)) == 1.0
    assert uq.discrete_inner_product([-1.0, 1.0], [1.0, 1.0]) == 0.0
    with pytest.raises(ConfigError, match="mismatch"):
        uq.discrete_inner_product(np.ones(3), np.ones(4))
    with pytest.raises(ConfigError, match="one-dimensional"):
        uq.discrete_inner_product(np.ones((2, 2)), np.ones((2, 2)))


def test_orthonormality_under_sampling():
    # per-entry Monte Carlo tolerance at pinned seeds; the max over the
    # whole Gram matrix sits within 3/sqrt(M) for these draws
    spec = beta_spec()
    basis = uq.legendre_basis(spec, degree=4)
    for seed in (1, 2, 5):
        params = uq.sample_inputs(spec, 2000, seed)
        phi = uq.eval_basis(basis, params)
        gram = phi.T @ phi / 2000
        assert np.abs(gram - np.eye(basis.size)).max() <= 3 / math.sqrt(2000)
    params = uq.sample_inputs(spec, 100_000, 7)
    phi = uq.eval_basis(basis, params)
    ip = uq.discrete_inner_product(phi[:, 1], phi[:, 1])
    assert abs(ip - 1.0) <= 0.02


# ---------------------------------------------------------------- fitting


def synthetic_archive(responses_of, m_samples=450, seed=11, spec=None):
    spec = spec or two_param_spec()
    params = uq.sample_inputs(spec, m_samples, seed)
    resp = np.asarray(responses_of(params), dtype=float)
    if resp.ndim == 1:
        resp = resp[:, None]
    return uq.SampleArchive(params, np.arange(resp.shape[1], dtype=float), resp), spec


def test_fit_constant_response():
    archive, spec = synthetic_archive(lambda p: np.full(p.shape[0], 3.7))
    surr = uq.fit_surrogate(archive, uq.legendre_basis(spec, degree=4))
    assert surr.coeffs[0, 0] == pytest.approx(3.7, abs=1e-10)
    assert np.abs(surr.coeffs[1:]).max() <= 1e-10
    assert surr.condition < 1e3


def test_fit_recovers_a_planted_mode():
    spec = two_param_spec()
    basis = uq.legendre_basis(spec, degree=4)
    archive, _ = synthetic_archive(
        lambda p: uq.eval_basis(basis, p)[:, 2], spec=spec
    )
    surr = uq.fit_surrogate(archive, basis)
    assert surr.coeffs[2, 0] == pytest.approx(1.0, abs=1e-10)
    mask = np.ones(basis.size, dtype=bool)
    mask[2] = False
    assert np.abs(surr.coeffs[mask, 0]).max() <= 1e-10


def test_in_span_response_is_reproduced():
    spec = two_param_spec()
    basis = uq.legendre_basis(spec, degree=4)
    rng = np.random.default_rng(9)
    c_true = rng.normal(size=basis.size)
    archive, _ = synthetic_archive(
        lambda p: uq.eval_basis(basis, p) @ c_true, spec=spec
    )
    surr = uq.fit_surrogate(archive, basis)
    np.testing.assert_allclose(surr.coeffs[:, 0], c_true, atol=1e-8)
    # every training response comes back through the surrogate
    pred = np.array(
        [uq.evaluate_surrogate(surr, row, t_index=0) for row in archive.params]
    )
    np.testing.assert_allclose(pred, archive.responses[:, 0], atol=1e-8)


def test_projection_is_idempotent():
    spec = two_param_spec()
    basis = uq.legendre_basis(spec, degree=3)
    archive, _ = synthetic_archive(
        lambda p: np.exp(p[:, 0]) + p[:, 1] ** 2, spec=spec
    )
    first = uq.fit_surrogate(archive, basis)
    replay = np.array(
        [uq.evaluate_surrogate(first, row) for row in archive.params]
    )
    second = uq.fit_surrogate(
        uq.SampleArchive(archive.params, archive.taus, replay), basis
    )
    np.testing.assert_allclose(first.coeffs, second.coeffs, atol=1e-10)


def test_fit_size_and_shape_errors():
    spec = two_param_spec()
    basis = uq.legendre_basis(spec, degree=4)
    params = uq.sample_inputs(spec, 10, 1)  # 10 < 15 coefficients
    archive = uq.SampleArchive(params, np.array([0.0]), np.zeros((10, 1)))
    with pytest.raises(ConfigError, match=r"M = c\*N\*\*2"):
        uq.fit_surrogate(archive, basis)
    with pytest.raises(ConfigError, match=r"M = c\*N\*\*2"):
        uq.sample_inputs(spec, 10, 1, basis)
    bad = uq.SampleArchive(params[:, :1], np.array([0.0]), np.zeros((10, 1)))
    with pytest.raises(ConfigError, match="parameter columns"):
        uq.fit_surrogate(bad, uq.legendre_basis(spec, degree=1))
    non_finite = uq.SampleArchive(
        uq.sample_inputs(spec, 20, 1), np.array([0.0]), np.full((20, 1), np.nan)
    )
    with pytest.raises(CampaignError, match="non-finite"):
        uq.fit_surrogate(non_finite, uq.legendre_basis(spec, degree=1))


def test_degenerate_gram_fails_loudly():
    spec = two_param_spec()
    basis = uq.legendre_basis(spec, degree=2)
    params = np.tile([[0.45, 1.125]], (basis.size * 2, 1))  # rank-one Gram
    archive = uq.SampleArchive(
        params, np.array([0.0]), np.full((basis.size * 2, 1), 1.5)
    )
    with pytest.raises(SolverError, match="condition"):
        uq.fit_surrogate(archive, basis)
    surr = uq.fit_surrogate(archive, basis, allow_pseudo_inverse=True)
    pred = uq.evaluate_surrogate(surr, params[0], t_index=0)
    assert pred == pytest.approx(1.5, abs=1e-8)


def test_evaluate_surrogate_index_handling():
    archive, spec = synthetic_archive(
        lambda p: np.column_stack([p[:, 0], 2 * p[:, 0]])
    )
    surr = uq.fit_surrogate(archive, uq.legendre_basis(spec, degree=2))
    point = archive.params[0]
    whole = uq.evaluate_surrogate(surr, point)
    assert whole.shape == (2,)
    assert uq.evaluate_surrogate(surr, point, t_index=-1) == pytest.approx(whole[1])
    with pytest.raises(ConfigError, match="time index"):
        uq.evaluate_surrogate(surr, point, t_index=2)
    with pytest.raises(ConfigError, match="no transverse axis"):
        uq.evaluate_surrogate(surr, point, t_index=0, y_index=0)


# ---------------------------------------------------------------- statistics


def test_statistics_of_a_constant_response():
    archive, spec = synthetic_archive(lambda p: np.full(p.shape[0], 2.5))
    surr = uq.fit_surrogate(archive, uq.legendre_basis(spec, degree=4))
    st = uq.statistics(surr)
    assert st.mean[0] == pytest.approx(2.5, abs=1e-10)
    assert st.std[0] <= 1e-10
    assert st.skewness[0] == 0.0 and st.kurtosis[0] == 0.0
    assert st.hist_counts.sum() == archive.n_samples
    assert np.count_nonzero(st.hist_counts) == 1


def test_statistics_of_a_symmetric_response():
    spec = uq.RandomInputSpec(
        (uq.UniformInput("beta_hat", -1.0, 1.0),)
    )
    archive, _ = synthetic_archive(
        lambda p: p[:, 0], m_samples=20_000, seed=2, spec=spec
    )
    surr = uq.fit_surrogate(archive, uq.legendre_basis(spec, degree=4))
    st = uq.statistics(surr)
    assert abs(st.skewness[0]) <= 0.05
    assert st.kurtosis[0] == pytest.approx(1.8, abs=0.1)  # uniform flatness
    assert st.mean[0] == pytest.approx(0.0, abs=0.02)
    assert st.std[0] == pytest.approx(1 / math.sqrt(3), abs=0.02)


def test_surrogate_variance_tracks_sample_variance():
    spec = two_param_spec()
    basis = uq.legendre_basis(spec, degree=4)
    m_samples = 2 * basis.size**2
    for seed in (3, 11, 2026):
        archive, _ = synthetic_archive(
            lambda p: np.exp(p[:, 0]) * (1 + 0.5 * np.sin(2 * p[:, 1])),
            m_samples=m_samples,
            seed=seed,
            spec=spec,
        )
        surr = uq.fit_surrogate(archive, basis)
        st = uq.statistics(surr)
        raw = archive.responses[:, 0]
        tol = 3 * raw.std() / math.sqrt(m_samples)
        assert abs(st.std[0] ** 2 - raw.var()) <= tol


def test_histogram_slice_selection():
    archive, spec = synthetic_archive(
        lambda p: np.column_stack([p[:, 0], 10 + p[:, 0]])
    )
    surr = uq.fit_surrogate(archive, uq.legendre_basis(spec, degree=2))
    st = uq.statistics(surr, bins=10, hist_time_index=0)
    assert st.hist_tau == 0.0 and st.hist_y is None
    assert st.hist_edges[0] >= 0.2 and st.hist_edges[-1] <= 0.7
    with pytest.raises(ConfigError, match="no transverse axis"):
        uq.statistics(surr, hist_y_index=3)
    with pytest.raises(ConfigError, match="at least one bin"):
        uq.statistics(surr, bins=0)


# ---------------------------------------------------------------- campaigns


def test_campaign_reports_the_offending_sample():
    # draws cross zero, so some bound config has a negative growth rate
    spec = uq.RandomInputSpec(
        (uq.UniformInput("xi", -0.5, 0.5),), bindings={"beta_hat": "xi"}
    )
    params = uq.sample_inputs(spec, 4, 0)
    assert (params < 0).any()
    base = DimlessConfig(theta_wall=-0.25, theta_init=0.05, beta_hat=0.1, eta_hat=1.1)
    grid = s1.Grid1D(dz=0.1, dtau=1e-3, tau_end=0.1)
    with pytest.raises(CampaignError, match="sample"):
        uq.run_uq_1d(spec, base, grid, m_samples=4, degree=1, seed=0)


def test_campaign_1d_is_thread_schedule_invariant():
    spec = beta_spec()
    base = DimlessConfig(theta_wall=-0.25, theta_init=0.05, beta_hat=0.2, eta_hat=1.1)
    grid = s1.Grid1D(dz=0.05, dtau=1e-3, tau_end=0.5)
    kw = dict(m_samples=6, degree=1, seed=3, snapshots=5)
    one = uq.run_uq_1d(spec, base, grid, threads=1, **kw)
    two = uq.run_uq_1d(spec, base, grid, threads=2, **kw)
    np.testing.assert_array_equal(one.coeffs, two.coeffs)
    np.testing.assert_array_equal(one.archive.responses, two.archive.responses)
    # archived rows are exactly what a direct solver run produces
    cfg0 = spec.bind_config(base, one.archive.params[0])
    trace = s1.interface_trace(s1.run(grid, cfg0, snapshots=5))
    np.testing.assert_array_equal(one.archive.responses[0], trace.s_phys)
    np.testing.assert_array_equal(one.taus, trace.taus)


def test_campaign_default_size_policy():
    spec = beta_spec()
    base = DimlessConfig(theta_wall=-0.25, theta_init=0.05, beta_hat=0.2, eta_hat=1.1)
    grid = s1.Grid1D(dz=0.1, dtau=2e-3, tau_end=0.2)
    surr = uq.run_uq_1d(spec, base, grid, degree=1, seed=1, snapshots=2)
    assert surr.archive.n_samples == 2 * surr.basis.size**2
    with pytest.raises(ConfigError, match="factor"):
        uq.run_uq_1d(spec, base, grid, degree=1, seed=1, m_factor=0)


def test_campaign_2d_flat_inputs_give_flat_tables():
    spec = beta_spec(0.1, 0.3)
    base = DimlessConfig(
        theta_wall=-0.1, theta_init=0.1, beta_hat=0.2, eta_hat=1.1, length0=0.5
    )
    grid = s2.Grid2D(dy=0.1, dz=0.1, dtau=5e-4, tau_end=0.1)
    surr = uq.run_uq_2d(spec, base, grid, m_samples=4, degree=1, seed=5, snapshots=4)
    assert surr.coeffs.ndim == 3 and surr.ys is not None
    # nothing in the spec depends on y, so every transverse column agrees
    spread = np.ptp(surr.coeffs, axis=2).max()
    assert spread <= 1e-8
    st = uq.statistics(surr, hist_y_index=2)
    assert np.ptp(st.mean, axis=1).max() <= 1e-8
    assert np.ptp(st.std, axis=1).max() <= 1e-8
    assert st.hist_y == pytest.approx(0.2)


def test_campaign_2d_checks_stability_before_running():
    spec = beta_spec(50.0, 60.0)  # wall advection term alone breaks the bound
    base = DimlessConfig(
        theta_wall=-0.1, theta_init=0.1, beta_hat=0.2, eta_hat=1.1, length0=0.5
    )
    grid = s2.Grid2D(dy=0.1, dz=0.1, dtau=5e-4, tau_end=0.1)
    with pytest.raises(CampaignError, match="sample 0"):
        uq.run_uq_2d(spec, base, grid, m_samples=2, degree=0, seed=1)
