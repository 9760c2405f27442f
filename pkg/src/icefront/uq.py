"""Non-intrusive propagation of random inputs through the solvers.

The pipeline is plain sampling plus regression, no solver internals involved:

1. draw M parameter samples from the declared distributions (seeded PCG64,
   one generator, inputs drawn in declaration order, so runs are repeatable);
2. bind each sample into a :class:`~icefront.model.DimlessConfig` through the
   spec's binding expressions and run the deterministic scheme;
3. collect the front position at the snapshot times into a response table and
   fit an orthonormal Legendre expansion by discrete least squares, i.e.
   solve (Phi^T Phi / M) c = Phi^T S / M with one Cholesky factorization
   shared by every time (and transverse) index;
4. read mean and variance off the coefficients (c_0 and sum of squares of the
   rest), and take skewness, kurtosis and histograms from the raw archive,
   which is kept on the surrogate for exactly that purpose.

Polynomials are orthonormal under the uniform probability weight on the
mapped box [-1, 1]^d; each input is sent there by an affine map of its
support.  Normal inputs get a bounded support by resampling anything outside
mu +/- 4 sigma (discarded mass about 6.3e-5, reported by :func:`sample_log`).
The Legendre family is kept for normal inputs too; the empirical Gram matrix
absorbs the resulting non-orthogonality, which is the point of assembling it
from the samples instead of assuming the identity.

Sample runs are independent and may execute on a thread pool, but every
reduction (response table, Gram assembly) happens in declaration order after
collection, so results are bit-identical for a given seed no matter the
schedule.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from . import solver1d, solver2d
from .errors import CampaignError, ConfigError, SolverError
from .expressions import Expression, as_expression
from .model import DimlessConfig
from .solver1d import Grid1D
from .solver2d import Grid2D

__all__ = [
    "UniformInput",
    "NormalInput",
    "RandomInputSpec",
    "LegendreBasis",
    "SampleArchive",
    "GpcSurrogate",
    "Statistics",
    "legendre_basis",
    "sample_inputs",
    "sample_log",
    "eval_basis",
    "discrete_inner_product",
    "fit_surrogate",
    "evaluate_surrogate",
    "statistics",
    "run_uq_1d",
    "run_uq_2d",
]

# Normal supports are cut at mu +/- this many sigmas before the affine map.
TRUNCATION_SIGMAS = 4.0

# Gram condition above which the least-squares fit refuses to proceed.
CONDITION_LIMIT = 1e12

# Names with fixed meaning inside binding expressions.
_RESERVED_NAMES = frozenset({"y", "tau", "pi", "sin", "cos"})

# Config fields a binding may target.  theta_melt is pinned by the scaling
# and gamma is bookkeeping, so neither may depend on a random parameter.
_BINDABLE_FIELDS = ("theta_wall", "theta_init", "beta_hat", "eta_hat", "length0")


def _check_param_name(name: str) -> None:
    if not isinstance(name, str) or not name.isidentifier():
        raise ConfigError(f"parameter name must be a valid identifier, got {name!r}")
    if name in _RESERVED_NAMES:
        raise ConfigError(
            f"parameter name {name!r} is reserved for use inside expressions"
        )


@dataclass(frozen=True)
class UniformInput:
    """Parameter distributed uniformly on [a, b]."""

    name: str
    a: float
    b: float

    def __post_init__(self) -> None:
        _check_param_name(self.name)
        if not self.b > self.a:
            raise ConfigError(
                f"uniform input {self.name!r} needs a < b, got [{self.a}, {self.b}]"
            )

    @property
    def support(self) -> tuple[float, float]:
        return (self.a, self.b)

    def draw(self, rng: np.random.Generator, size: int) -> tuple[np.ndarray, int]:
        return rng.uniform(self.a, self.b, size), 0


@dataclass(frozen=True)
class NormalInput:
    """Normally distributed parameter with the tails resampled away.

    Draws outside mu +/- TRUNCATION_SIGMAS*sigma are redrawn until inside, so
    the effective support is a bounded box and the affine map to [-1, 1] is
    well defined.  The discarded probability mass is ``truncated_mass``.
    """

    name: str
    mu: float
    sigma: float

    def __post_init__(self) -> None:
        _check_param_name(self.name)
        if not self.sigma > 0:
            raise ConfigError(
                f"normal input {self.name!r} needs sigma > 0, got {self.sigma}"
            )

    @property
    def support(self) -> tuple[float, float]:
        half = TRUNCATION_SIGMAS * self.sigma
        return (self.mu - half, self.mu + half)

    @property
    def truncated_mass(self) -> float:
        """Probability outside the truncated support of the exact normal."""
        return math.erfc(TRUNCATION_SIGMAS / math.sqrt(2.0))

    def draw(self, rng: np.random.Generator, size: int) -> tuple[np.ndarray, int]:
        vals = rng.normal(self.mu, self.sigma, size)
        lo, hi = self.support
        redraws = 0
        bad = (vals < lo) | (vals > hi)
        while bad.any():
            n_bad = int(bad.sum())
            redraws += n_bad
            vals[bad] = rng.normal(self.mu, self.sigma, n_bad)
            bad = (vals < lo) | (vals > hi)
        return vals, redraws


@dataclass(frozen=True)
class RandomInputSpec:
    """Random parameters plus the rule that puts them into a config.

    ``bindings`` maps config field names to expressions over the parameter
    names; the ``eta_hat`` target may additionally use ``y`` and ``tau``,
    which stay free until the solver evaluates them.  A parameter whose name
    is itself a config field binds as identity when no rule is given, so
    ``beta_hat ~ U(0.2, 0.7)`` needs no explicit binding at all.
    """

    inputs: tuple
    bindings: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        inputs = tuple(self.inputs)
        if not inputs:
            raise ConfigError("random input spec needs at least one parameter")
        for u in inputs:
            if not isinstance(u, (UniformInput, NormalInput)):
                raise ConfigError(f"unsupported input distribution: {u!r}")
        names = [u.name for u in inputs]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate parameter names in {names}")
        object.__setattr__(self, "inputs", inputs)

        bindings = {}
        for target, rule in dict(self.bindings).items():
            if target not in _BINDABLE_FIELDS:
                raise ConfigError(
                    f"cannot bind config field {target!r}; "
                    f"allowed targets: {list(_BINDABLE_FIELDS)}"
                )
            bindings[target] = as_expression(rule)
        for name in names:
            if name in _BINDABLE_FIELDS and name not in bindings:
                bindings[name] = Expression(name)

        used: set[str] = set()
        for target, rule in bindings.items():
            if isinstance(rule, float):
                continue
            extra = {"y", "tau"} if target == "eta_hat" else set()
            free = rule.variables - set(names) - extra
            if free:
                raise ConfigError(
                    f"binding for {target!r} uses unknown names {sorted(free)}"
                )
            used |= rule.variables & set(names)
        unused = set(names) - used
        if unused:
            raise ConfigError(
                f"parameters {sorted(unused)} appear in no binding; "
                "every random input must reach the config"
            )
        object.__setattr__(self, "bindings", bindings)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(u.name for u in self.inputs)

    @property
    def dims(self) -> int:
        return len(self.inputs)

    def bind_config(self, base: DimlessConfig, values) -> DimlessConfig:
        """Substitute one parameter point into ``base``.

        Validation of the resulting config (and of eta_hat >= 1 on the grid)
        happens in the config constructor and the solver respectively.
        """
        values = np.asarray(values, dtype=float)
        if values.shape != (self.dims,):
            raise ConfigError(
                f"expected {self.dims} parameter values, got shape {values.shape}"
            )
        point = dict(zip(self.names, map(float, values)))
        changes = {}
        for target, rule in self.bindings.items():
            if isinstance(rule, float):
                changes[target] = rule
                continue
            here = {k: v for k, v in point.items() if k in rule.variables}
            bound = rule.bind(**here)
            if bound.variables:
                changes[target] = bound
            else:
                changes[target] = float(bound())
        return base.with_values(**changes)


def _compositions(total: int, dims: int):
    # lexicographically ordered tuples of nonnegative ints summing to total
    for combo in itertools.product(range(total + 1), repeat=dims):
        if sum(combo) == total:
            yield combo


@dataclass(frozen=True, eq=False)
class LegendreBasis:
    """Orthonormal total-degree Legendre basis on a mapped parameter box.

    Multi-indices are ordered by total degree, lexicographically within each
    degree, so index 0 is always the constant.  ``lows``/``highs`` are the
    per-dimension support bounds feeding the affine map onto [-1, 1].
    """

    names: tuple[str, ...]
    lows: np.ndarray
    highs: np.ndarray
    degree: int
    multi_indices: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        names = tuple(self.names)
        lows = np.asarray(self.lows, dtype=float)
        highs = np.asarray(self.highs, dtype=float)
        if not names:
            raise ConfigError("basis needs at least one dimension")
        if lows.shape != (len(names),) or highs.shape != (len(names),):
            raise ConfigError("support bounds must match the number of names")
        if not np.all(highs > lows):
            raise ConfigError("every support needs low < high")
        if not isinstance(self.degree, int) or self.degree < 0:
            raise ConfigError(f"degree must be a nonnegative integer, got {self.degree}")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "lows", lows)
        object.__setattr__(self, "highs", highs)
        idx = []
        for total in range(self.degree + 1):
            idx.extend(_compositions(total, len(names)))
        object.__setattr__(self, "multi_indices", np.array(idx, dtype=np.int64))

    @property
    def dims(self) -> int:
        return len(self.names)

    @property
    def size(self) -> int:
        # C(degree + dims, dims)
        return self.multi_indices.shape[0]

    def map_to_reference(self, xi: np.ndarray) -> np.ndarray:
        """Affine map from parameter space onto the reference box [-1, 1]^d."""
        xi = np.asarray(xi, dtype=float)
        return 2.0 * (xi - self.lows) / (self.highs - self.lows) - 1.0


def legendre_basis(spec: RandomInputSpec, degree: int = 4) -> LegendreBasis:
    """Basis over the spec's supports; default truncation is total degree 4."""
    lows, highs = zip(*(u.support for u in spec.inputs))
    return LegendreBasis(spec.names, np.array(lows), np.array(highs), degree)


def _legendre_table(max_degree: int, x: np.ndarray) -> np.ndarray:
    """Rows sqrt(2k+1) * P_k(x) for k = 0..max_degree via the recurrence."""
    x = np.asarray(x, dtype=float)
    table = np.empty((max_degree + 1,) + x.shape)
    table[0] = 1.0
    if max_degree >= 1:
        table[1] = x
    for k in range(1, max_degree):
        table[k + 1] = ((2 * k + 1) * x * table[k] - k * table[k - 1]) / (k + 1)
    for k in range(max_degree + 1):
        table[k] *= math.sqrt(2 * k + 1)
    return table


def eval_basis(basis: LegendreBasis, xi) -> np.ndarray:
    """Basis values at one point (shape (d,) -> (N,)) or a batch ((M, d) -> (M, N))."""
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim == 1
    pts = xi[None, :] if single else xi
    if pts.ndim != 2 or pts.shape[1] != basis.dims:
        raise ConfigError(
            f"expected points with {basis.dims} components, got shape {xi.shape}"
        )
    x = basis.map_to_reference(pts)
    tables = [_legendre_table(basis.degree, x[:, j]) for j in range(basis.dims)]
    out = np.ones((pts.shape[0], basis.size))
    for n, midx in enumerate(basis.multi_indices):
        for j, k in enumerate(midx):
            if k:
                out[:, n] *= tables[j][k]
    return out[0] if single else out


def discrete_inner_product(u_values, v_values) -> float:
    """Monte Carlo inner product (1/M) sum u_m v_m over paired samples."""
    u = np.asarray(u_values, dtype=float)
    v = np.asarray(v_values, dtype=float)
    if u.ndim != 1 or v.ndim != 1:
        raise ConfigError("inner product expects one-dimensional value arrays")
    if u.shape != v.shape:
        raise ConfigError(f"length mismatch: {u.shape[0]} vs {v.shape[0]}")
    return float(u @ v / u.shape[0])


def _draw_rows(spec: RandomInputSpec, m_samples: int, seed) -> tuple[np.ndarray, dict]:
    rng = np.random.default_rng(seed)
    cols = []
    redraws = {}
    for u in spec.inputs:
        vals, n = u.draw(rng, m_samples)
        cols.append(vals)
        redraws[u.name] = n
    return np.column_stack(cols), redraws


def sample_inputs(
    spec: RandomInputSpec,
    m_samples: int,
    seed,
    basis: LegendreBasis | None = None,
) -> np.ndarray:
    """Draw the (M, d) parameter matrix; deterministic for a given seed.

    One PCG64 generator seeds the whole draw and inputs are sampled in
    declaration order, so the matrix never depends on scheduling.  Passing
    the basis enforces the sample-size floor up front.
    """
    if m_samples < 1:
        raise ConfigError(f"sample count must be >= 1, got {m_samples}")
    if basis is not None and m_samples < basis.size:
        raise ConfigError(
            f"{m_samples} samples cannot determine {basis.size} coefficients; "
            f"the working rule is M = c*N**2 with N = {basis.size}"
        )
    params, _ = _draw_rows(spec, m_samples, seed)
    return params


def sample_log(spec: RandomInputSpec, m_samples: int, seed) -> dict:
    """Draw bookkeeping for the campaign manifest.

    Reports, per input, how many out-of-support normal draws were replaced
    and the probability mass the truncation discards.
    """
    _, redraws = _draw_rows(spec, m_samples, seed)
    mass = {
        u.name: u.truncated_mass
        for u in spec.inputs
        if isinstance(u, NormalInput)
    }
    return {"redraws": redraws, "truncated_mass": mass}


@dataclass(frozen=True, eq=False)
class SampleArchive:
    """Raw campaign record: one parameter row and one response table per sample.

    ``responses`` has shape (M, n_times) for scalar-per-time responses or
    (M, n_times, n_y) for transverse curves, in which case ``ys`` holds the
    transverse nodes.
    """

    params: np.ndarray
    taus: np.ndarray
    responses: np.ndarray
    ys: np.ndarray | None = None

    def __post_init__(self) -> None:
        params = np.asarray(self.params, dtype=float)
        taus = np.asarray(self.taus, dtype=float)
        responses = np.asarray(self.responses, dtype=float)
        if params.ndim != 2:
            raise ConfigError(f"params must be (M, d), got shape {params.shape}")
        if taus.ndim != 1:
            raise ConfigError("taus must be one-dimensional")
        want = 2 if self.ys is None else 3
        if responses.ndim != want:
            raise ConfigError(
                f"responses must have {want} axes for this archive, "
                f"got shape {responses.shape}"
            )
        if responses.shape[0] != params.shape[0]:
            raise ConfigError(
                f"{params.shape[0]} parameter rows vs "
                f"{responses.shape[0]} response rows"
            )
        if responses.shape[1] != taus.shape[0]:
            raise ConfigError(
                f"{taus.shape[0]} times vs {responses.shape[1]} response columns"
            )
        ys = self.ys
        if ys is not None:
            ys = np.asarray(ys, dtype=float)
            if ys.ndim != 1 or responses.shape[2] != ys.shape[0]:
                raise ConfigError("ys must be one-dimensional matching responses")
        if not np.all(np.isfinite(params)):
            raise ConfigError("parameter matrix contains non-finite values")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "responses", responses)
        object.__setattr__(self, "ys", ys)

    @property
    def n_samples(self) -> int:
        return self.params.shape[0]


@dataclass(frozen=True, eq=False)
class GpcSurrogate:
    """Least-squares polynomial surrogate plus the archive it was fitted on.

    ``coeffs`` has shape (N, n_times) or (N, n_times, n_y) matching the
    archive; ``condition`` is the Gram condition estimate from the fit.
    """

    basis: LegendreBasis
    archive: SampleArchive
    coeffs: np.ndarray
    condition: float

    @property
    def taus(self) -> np.ndarray:
        return self.archive.taus

    @property
    def ys(self) -> np.ndarray | None:
        return self.archive.ys


def fit_surrogate(
    archive: SampleArchive,
    basis: LegendreBasis,
    *,
    allow_pseudo_inverse: bool = False,
) -> GpcSurrogate:
    """Project the archived responses onto the basis by discrete least squares.

    The Gram matrix (1/M) Phi^T Phi is assembled and factored once
    (Cholesky); every time column, and every transverse node in the curve
    case, reuses that factorization.  Ill-conditioning past CONDITION_LIMIT
    aborts unless ``allow_pseudo_inverse`` asks for a least-squares fallback.
    """
    m_samples = archive.n_samples
    if m_samples < basis.size:
        raise ConfigError(
            f"{m_samples} samples cannot determine {basis.size} coefficients; "
            f"the working rule is M = c*N**2 with N = {basis.size}"
        )
    if archive.params.shape[1] != basis.dims:
        raise ConfigError(
            f"archive has {archive.params.shape[1]} parameter columns, "
            f"basis expects {basis.dims}"
        )
    if not np.all(np.isfinite(archive.responses)):
        raise CampaignError("response table contains non-finite values")

    phi = eval_basis(basis, archive.params)
    gram = phi.T @ phi / m_samples
    condition = float(np.linalg.cond(gram))
    flat = archive.responses.reshape(m_samples, -1)
    if condition > CONDITION_LIMIT:
        if not allow_pseudo_inverse:
            raise SolverError(
                f"Gram matrix condition {condition:.3e} exceeds "
                f"{CONDITION_LIMIT:.0e}; draw more samples (M = c*N**2) or "
                "lower the degree, or opt into the pseudo-inverse fallback"
            )
        coeffs = np.linalg.lstsq(phi, flat, rcond=None)[0]
    else:
        rhs = phi.T @ flat / m_samples
        try:
            factor = cho_factor(gram)
        except LinAlgError as exc:
            raise SolverError(
                f"Gram matrix is not positive definite ({exc}); "
                "draw more samples (M = c*N**2)"
            ) from exc
        coeffs = cho_solve(factor, rhs)
    coeffs = coeffs.reshape((basis.size,) + archive.responses.shape[1:])
    return GpcSurrogate(basis, archive, coeffs, condition)


def _table_index(idx, size: int, what: str) -> int:
    try:
        idx = int(idx)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} index must be an integer, got {idx!r}") from None
    if idx < -size or idx >= size:
        raise ConfigError(f"{what} index {idx} outside fitted table of size {size}")
    return idx % size


def evaluate_surrogate(
    surrogate: GpcSurrogate,
    xi,
    t_index: int | None = None,
    y_index: int | None = None,
):
    """Surrogate prediction at parameter point ``xi``.

    With ``t_index`` (and ``y_index`` for curve surrogates) returns the
    scalar at that table entry; without, returns the whole fitted table
    contracted against the basis values.  Indices follow Python semantics
    but must stay inside the fitted tables.
    """
    values = eval_basis(surrogate.basis, np.asarray(xi, dtype=float))
    if values.ndim != 1:
        raise ConfigError("evaluate_surrogate takes a single parameter point")
    table = surrogate.coeffs
    if y_index is not None:
        if table.ndim != 3:
            raise ConfigError("this surrogate has no transverse axis")
        y_index = _table_index(y_index, table.shape[2], "transverse")
        table = table[:, :, y_index]
    if t_index is not None:
        t_index = _table_index(t_index, table.shape[1], "time")
        table = table[:, t_index]
    out = np.tensordot(values, table, axes=(0, 0))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class Statistics:
    """Moment tables over the response grid plus one histogram slice.

    ``mean``/``std`` come from the surrogate coefficients (orthonormal-basis
    identities); ``skewness``/``kurtosis`` (the raw fourth-moment ratio, 3
    for a normal) and the histogram come from the raw archive.  Tables have
    shape (n_times,) or (n_times, n_y).
    """

    taus: np.ndarray
    ys: np.ndarray | None
    mean: np.ndarray
    std: np.ndarray
    skewness: np.ndarray
    kurtosis: np.ndarray
    hist_counts: np.ndarray
    hist_edges: np.ndarray
    hist_tau: float
    hist_y: float | None


def statistics(
    surrogate: GpcSurrogate,
    *,
    bins: int = 30,
    hist_time_index: int = -1,
    hist_y_index: int | None = None,
) -> Statistics:
    """Campaign statistics; the histogram defaults to the final time slice.

    Moments of a constant response are reported as skewness 0 and kurtosis 0
    rather than dividing by a zero variance.
    """
    if bins < 1:
        raise ConfigError(f"histogram needs at least one bin, got {bins}")
    coeffs = surrogate.coeffs
    mean = coeffs[0].copy()
    std = np.sqrt(np.sum(coeffs[1:] ** 2, axis=0))

    responses = surrogate.archive.responses
    centred = responses - responses.mean(axis=0)
    m2 = np.mean(centred**2, axis=0)
    m3 = np.mean(centred**3, axis=0)
    m4 = np.mean(centred**4, axis=0)
    live = m2 > 0
    safe = np.where(live, m2, 1.0)
    skewness = np.where(live, m3 / safe**1.5, 0.0)
    kurtosis = np.where(live, m4 / safe**2, 0.0)

    t_idx = _table_index(hist_time_index, responses.shape[1], "time")
    if surrogate.ys is None:
        if hist_y_index is not None:
            raise ConfigError("this surrogate has no transverse axis")
        hist_slice = responses[:, t_idx]
        hist_y = None
    else:
        y_idx = _table_index(
            0 if hist_y_index is None else hist_y_index,
            responses.shape[2],
            "transverse",
        )
        hist_slice = responses[:, t_idx, y_idx]
        hist_y = float(surrogate.ys[y_idx])
    counts, edges = np.histogram(hist_slice, bins=bins)
    return Statistics(
        taus=surrogate.taus.copy(),
        ys=None if surrogate.ys is None else surrogate.ys.copy(),
        mean=mean,
        std=std,
        skewness=skewness,
        kurtosis=kurtosis,
        hist_counts=counts,
        hist_edges=edges,
        hist_tau=float(surrogate.taus[t_idx]),
        hist_y=hist_y,
    )


def _map_ordered(fn, count: int, threads: int) -> list:
    # reductions stay in sample order regardless of the execution schedule
    if threads <= 1:
        return [fn(m) for m in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


def _bound_configs(
    spec: RandomInputSpec, base: DimlessConfig, params: np.ndarray
) -> list[DimlessConfig]:
    configs = []
    for m, row in enumerate(params):
        try:
            configs.append(spec.bind_config(base, row))
        except Exception as exc:
            point = dict(zip(spec.names, map(float, row)))
            raise CampaignError(
                f"sample {m}: binding {point} gives an invalid config: {exc}"
            ) from exc
    return configs


def _campaign_size(
    spec: RandomInputSpec,
    degree: int,
    m_samples: int | None,
    m_factor: int,
) -> tuple[LegendreBasis, int]:
    basis = legendre_basis(spec, degree)
    if m_samples is None:
        if m_factor < 1:
            raise ConfigError(f"sample-size factor must be >= 1, got {m_factor}")
        m_samples = m_factor * basis.size**2
    return basis, int(m_samples)


def run_uq_1d(
    spec: RandomInputSpec,
    cfg: DimlessConfig,
    grid: Grid1D,
    *,
    m_samples: int | None = None,
    degree: int = 4,
    seed=0,
    m_factor: int = 2,
    snapshots: int = 80,
    threads: int = 1,
    allow_pseudo_inverse: bool = False,
) -> GpcSurrogate:
    """Propagate the random inputs through the implicit scheme.

    The response is the physical front position (solid edge, the headline
    convention) at the snapshot times, identical across samples because the
    grid and cadence are shared.  ``m_samples`` defaults to the
    ``m_factor * N**2`` policy.  Returns the fitted surrogate with the raw
    archive attached.
    """
    basis, m_samples = _campaign_size(spec, degree, m_samples, m_factor)
    params = sample_inputs(spec, m_samples, seed, basis)
    configs = _bound_configs(spec, cfg, params)

    def one(m: int) -> np.ndarray:
        try:
            result = solver1d.run(grid, configs[m], snapshots=snapshots)
            trace = solver1d.interface_trace(result)
        except Exception as exc:
            raise CampaignError(f"sample {m}: solver run failed: {exc}") from exc
        return np.stack([trace.taus, trace.s_phys])

    pairs = _map_ordered(one, m_samples, threads)
    taus = pairs[0][0]
    responses = np.stack([p[1] for p in pairs])
    archive = SampleArchive(params, taus, responses)
    return fit_surrogate(archive, basis, allow_pseudo_inverse=allow_pseudo_inverse)


def run_uq_2d(
    spec: RandomInputSpec,
    cfg: DimlessConfig,
    grid: Grid2D,
    *,
    m_samples: int | None = None,
    degree: int = 4,
    seed=0,
    m_factor: int = 2,
    snapshots: int = 70,
    threads: int = 1,
    allow_pseudo_inverse: bool = False,
) -> GpcSurrogate:
    """Propagate the random inputs through the explicit transverse scheme.

    Responses are whole interface curves, so the coefficient table gains a
    transverse axis; the Gram factorization is still built once and shared
    by every (time, node) column.  Stability of every bound config is
    checked before any run starts.
    """
    basis, m_samples = _campaign_size(spec, degree, m_samples, m_factor)
    params = sample_inputs(spec, m_samples, seed, basis)
    configs = _bound_configs(spec, cfg, params)
    for m, sample_cfg in enumerate(configs):
        try:
            solver2d.stability_check(grid, sample_cfg)
        except Exception as exc:
            raise CampaignError(f"sample {m}: {exc}") from exc

    def one(m: int):
        try:
            result = solver2d.run(grid, configs[m], snapshots=snapshots)
            curve = solver2d.interface_curve(result)
        except Exception as exc:
            raise CampaignError(f"sample {m}: solver run failed: {exc}") from exc
        return curve.taus, curve.s_phys

    pairs = _map_ordered(one, m_samples, threads)
    taus = pairs[0][0]
    responses = np.stack([p[1] for p in pairs])
    archive = SampleArchive(params, taus, responses, ys=grid.y)
    return fit_surrogate(archive, basis, allow_pseudo_inverse=allow_pseudo_inverse)
