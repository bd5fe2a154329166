"""Scripted scenarios: parallel decoherence, entanglement under restructuring,
branch exclusivity, and marginal incompatibility.

Every scenario runs one global evolution in the original particle + bath
coordinates; quantities for the alternate decomposition are obtained by
applying the (embedded) structure map to the very same states, never by a
second dynamics.  Thermal baths can be purified with ancilla modes so that
the global state stays pure; ancillas never evolve and count as part of the
environment side of every bipartition.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.stats

from . import fock_oracle as fo
from .errors import DomainError
from .gaussian import (
    GaussianState,
    cat_state,
    coherent_state,
    condition_on_coherent,
    decoherence_factor,
    embed_symplectic,
    evolve,
    log_negativity,
    product_state,
    propagator,
    purify,
    purity,
    reduce,
    thermal_state,
)
from .model import POTENTIAL_HARMONIC, ModelParams, QuadraticHamiltonian, build_qbm_hamiltonian
from .structure import StructureMap, collective_mode_map, transform_hamiltonian

ER_PRODUCT_TOL = 1e-8
ER_WITNESS_THRESHOLD = 1e-3
EXCLUSIVITY_THRESHOLD = 1e-3
THREADS_ENV_VAR = "QBM_STRUCTURES_THREADS"

PARTICLE_STATE_COHERENT = "coherent"


@dataclass(frozen=True)
class ScenarioConfig:
    """Model, initial state and sampling grid for one scenario run."""

    model: ModelParams
    times: np.ndarray
    x0: float = 0.0
    p0: float = 0.0
    particle_state: str = PARTICLE_STATE_COHERENT
    bath_temperature: float = 0.0
    purified: bool = False

    def __post_init__(self) -> None:
        times = np.array(np.asarray(self.times, dtype=float))
        if times.ndim != 1 or times.size < 1:
            raise DomainError("times must be a nonempty 1-D grid")
        if times[0] != 0.0:
            raise DomainError("times must start at 0")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise DomainError("times must be strictly increasing")
        if self.particle_state != PARTICLE_STATE_COHERENT:
            raise DomainError(f"unsupported particle state kind {self.particle_state!r}")
        if self.bath_temperature < 0:
            raise DomainError("bath temperature must be >= 0")
        times.flags.writeable = False
        object.__setattr__(self, "times", times)


@dataclass(frozen=True)
class PODReport:
    times: np.ndarray
    purity_1: np.ndarray
    purity_sp: np.ndarray
    neg_12: np.ndarray
    neg_spep: np.ndarray
    half_time_1: float
    half_time_sp: float
    recurrence_1: bool
    recurrence_sp: bool


@dataclass(frozen=True)
class ERReport:
    times: np.ndarray
    neg_12: np.ndarray
    neg_spep: np.ndarray
    witnessed: np.ndarray
    product_tol: float = ER_PRODUCT_TOL
    witness_threshold: float = ER_WITNESS_THRESHOLD


@dataclass(frozen=True)
class ExclusivityReport:
    times: np.ndarray
    neg_spep: np.ndarray
    excluding: np.ndarray
    flagged_fraction: float
    threshold: float = EXCLUSIVITY_THRESHOLD


@dataclass(frozen=True)
class IncompatibilityReport:
    time: float
    mean_1: float
    var_1: float
    mean_sp: float
    var_sp: float
    l1_distance: float


@dataclass(frozen=True)
class OracleCompareReport:
    times: np.ndarray
    delta_purity: np.ndarray
    delta_mean: np.ndarray
    delta_cov: np.ndarray
    delta_decoherence: np.ndarray
    certification_delta: float | None

    @property
    def max_abs_delta(self) -> float:
        return float(
            max(
                np.max(self.delta_purity),
                np.max(self.delta_mean),
                np.max(self.delta_cov),
                np.max(self.delta_decoherence),
            )
        )


# ---------------------------------------------------------------------------
# shared scaffolding


@dataclass(frozen=True)
class _World:
    """Everything a scenario needs: Hamiltonian, map, initial global state, embeddings."""

    config: ScenarioConfig
    hamiltonian: QuadraticHamiltonian
    smap: StructureMap
    initial: GaussianState
    n_phys: int
    n_total: int
    width_mass: float
    width_freq: float

    @property
    def lift_total(self) -> np.ndarray:
        return embed_symplectic(self.smap.lift, self.n_total, range(self.n_phys))

    def flow(self, t: float) -> np.ndarray:
        return embed_symplectic(propagator(self.hamiltonian, t), self.n_total, range(self.n_phys))

    def pure_global(self) -> bool:
        return self.config.bath_temperature == 0.0 or self.config.purified


def _prepare(cfg: ScenarioConfig, smap: StructureMap | None) -> _World:
    params = cfg.model
    H = build_qbm_hamiltonian(params)
    n = params.n_modes
    if smap is None:
        smap = collective_mode_map(H, params.masses)
    if smap.n_modes != n:
        raise DomainError("structure map mode count does not match the model")
    w_width = params.omega if params.potential == POTENTIAL_HARMONIC else 1.0
    particle = coherent_state(1, 0, cfg.x0, cfg.p0, params.m1, w_width)
    bath = thermal_state([(m, w) for m, w, _ in params.bath], cfg.bath_temperature)
    if cfg.purified:
        bath = purify(bath)
    initial = product_state(particle, bath)
    return _World(cfg, H, smap, initial, n, initial.n_modes, params.m1, w_width)


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV_VAR, "")
    if raw.strip():
        try:
            count = int(raw)
        except ValueError as exc:
            raise DomainError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}") from exc
        if count < 1:
            raise DomainError(f"{THREADS_ENV_VAR} must be >= 1")
        return count
    return os.cpu_count() or 1


def _map_times(fn, times: np.ndarray) -> list:
    """Evaluate fn over the grid, in parallel when configured; output order is the grid's."""
    workers = _thread_count()
    if workers == 1 or len(times) < 2:
        return [fn(t) for t in times]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, times))


def _first_crossing(times: np.ndarray, values: np.ndarray, threshold: float) -> float:
    """Linear-interpolated first time `values` drops below `threshold` (nan if never)."""
    below = np.nonzero(values < threshold)[0]
    if below.size == 0:
        return float("nan")
    i = int(below[0])
    if i == 0:
        return float(times[0])
    t0, t1, v0, v1 = times[i - 1], times[i], values[i - 1], values[i]
    return float(t0 + (threshold - v0) * (t1 - t0) / (v1 - v0))


def _half_time(times: np.ndarray, purities: np.ndarray) -> float:
    tail = max(1, int(np.ceil(0.2 * purities.size)))
    plateau = float(np.mean(purities[-tail:]))
    return _first_crossing(times, purities, (1.0 + plateau) / 2.0)


def _has_recurrence(values: np.ndarray, tol: float = 1e-6) -> bool:
    running_min = np.minimum.accumulate(values)
    return bool(np.any(values - running_min > tol))


# ---------------------------------------------------------------------------
# scenarios


def run_pod(cfg: ScenarioConfig, smap: StructureMap | None = None) -> PODReport:
    """Purity and entanglement of both open systems along one global evolution."""
    world = _prepare(cfg, smap)
    lift = world.lift_total

    def sample(t: float):
        state = evolve(world.initial, world.flow(t))
        alt = evolve(state, lift)
        return (
            purity(reduce(state, [0])),
            purity(reduce(alt, [0])),
            log_negativity(state, [0]),
            log_negativity(alt, [0]),
        )

    rows = np.array(_map_times(sample, cfg.times))
    p1, psp, n12, nsp = rows.T
    return PODReport(
        times=cfg.times,
        purity_1=p1,
        purity_sp=psp,
        neg_12=n12,
        neg_spep=nsp,
        half_time_1=_half_time(cfg.times, p1),
        half_time_sp=_half_time(cfg.times, psp),
        recurrence_1=_has_recurrence(p1),
        recurrence_sp=_has_recurrence(psp),
    )


def run_er_check(cfg: ScenarioConfig, smap: StructureMap | None = None) -> ERReport:
    """Entanglement across both decompositions; flags instants witnessing relativity.

    A time instant is flagged when the state is a product across one split
    (negativity below 1e-8) while entangled across the other (above 1e-3).
    Requires a pure global state (zero-temperature or purified bath).
    """
    world = _prepare(cfg, smap)
    if not world.pure_global():
        raise DomainError("entanglement check needs a pure global state; purify the bath")
    lift = world.lift_total

    def sample(t: float):
        state = evolve(world.initial, world.flow(t))
        return log_negativity(state, [0]), log_negativity(evolve(state, lift), [0])

    rows = np.array(_map_times(sample, cfg.times))
    n12, nsp = rows.T
    witnessed = ((n12 < ER_PRODUCT_TOL) & (nsp > ER_WITNESS_THRESHOLD)) | (
        (nsp < ER_PRODUCT_TOL) & (n12 > ER_WITNESS_THRESHOLD)
    )
    return ERReport(times=cfg.times, neg_12=n12, neg_spep=nsp, witnessed=witnessed)


def branch_proxy(world: _World, state: GaussianState) -> GaussianState:
    """Product-form snapshot of the evolved state in the original coordinates.

    The particle factor is the coherent state at the particle's current mean;
    the environment factor is the pure state obtained by conditioning the
    rest of the global state on that coherent projection.
    """
    n = state.n_modes
    x1, p1 = state.mean[0], state.mean[n]
    particle = coherent_state(1, 0, x1, p1, world.width_mass, world.width_freq)
    posterior = condition_on_coherent(state, 0, world.width_mass, world.width_freq)
    return product_state(particle, posterior)


def run_exclusivity(cfg: ScenarioConfig, smap: StructureMap | None = None) -> ExclusivityReport:
    """Entanglement of the instantaneous product-form branch under the alternate split.

    At each grid time the evolved global state is collapsed to its
    particle (x) environment product form (see branch_proxy); the report
    carries the alternate-split negativity of that branch and the fraction of
    instants where it exceeds 1e-3, i.e. where the branch of one
    decomposition is inconsistent with a product branch of the other.
    """
    world = _prepare(cfg, smap)
    if not world.pure_global():
        raise DomainError("branch analysis needs a pure global state; purify the bath")
    lift = world.lift_total

    def sample(t: float) -> float:
        state = evolve(world.initial, world.flow(t))
        return log_negativity(evolve(branch_proxy(world, state), lift), [0])

    neg = np.array(_map_times(sample, cfg.times))
    excluding = neg > EXCLUSIVITY_THRESHOLD
    return ExclusivityReport(
        times=cfg.times,
        neg_spep=neg,
        excluding=excluding,
        flagged_fraction=float(np.mean(excluding)),
    )


def marginal_incompatibility(
    cfg: ScenarioConfig, t: float, smap: StructureMap | None = None
) -> IncompatibilityReport:
    """L1 distance between the collective mode's position density and the relabeled particle density.

    Treating the particle's reduced position density as if it were a density
    for the collective coordinate is the forbidden move; the report
    quantifies how wrong it is.  Zero exactly when the map is the identity.
    """
    world = _prepare(cfg, smap)
    state = evolve(world.initial, world.flow(t))
    alt = evolve(state, world.lift_total)
    red1 = reduce(state, [0])
    redsp = reduce(alt, [0])
    mean_1, var_1 = float(red1.mean[0]), float(red1.cov[0, 0])
    mean_sp, var_sp = float(redsp.mean[0]), float(redsp.cov[0, 0])
    return IncompatibilityReport(
        time=float(t),
        mean_1=mean_1,
        var_1=var_1,
        mean_sp=mean_sp,
        var_sp=var_sp,
        l1_distance=gaussian_l1_distance(mean_1, var_1, mean_sp, var_sp),
    )


def gaussian_l1_distance(mean_a: float, var_a: float, mean_b: float, var_b: float) -> float:
    """Closed-form integral of |N(mean_a, var_a) - N(mean_b, var_b)| over the line.

    The densities cross at the real roots of a quadratic; the distance is the
    total variation of the CDF difference across those crossings.
    """
    if var_a <= 0 or var_b <= 0:
        raise DomainError("variances must be positive")
    scale = max(abs(mean_a), abs(mean_b), np.sqrt(var_a), np.sqrt(var_b), 1.0)
    if abs(mean_a - mean_b) < 1e-14 * scale and abs(var_a - var_b) < 1e-14 * scale**2:
        return 0.0
    a = 1.0 / var_b - 1.0 / var_a
    b = 2.0 * mean_a / var_a - 2.0 * mean_b / var_b
    c = mean_b**2 / var_b - mean_a**2 / var_a + np.log(var_b / var_a)
    if abs(a) < 1e-300:
        roots = [-c / b]
    else:
        disc = b * b - 4 * a * c
        if disc <= 0:
            roots = [-b / (2 * a)]
        else:
            sq = np.sqrt(disc)
            roots = sorted([(-b - sq) / (2 * a), (-b + sq) / (2 * a)])
    cdf_a = scipy.stats.norm.cdf(roots, loc=mean_a, scale=np.sqrt(var_a))
    cdf_b = scipy.stats.norm.cdf(roots, loc=mean_b, scale=np.sqrt(var_b))
    gaps = np.concatenate([[0.0], cdf_a - cdf_b, [0.0]])
    return float(np.sum(np.abs(np.diff(gaps))))


# ---------------------------------------------------------------------------
# oracle comparison


def run_oracle_compare(
    cfg: ScenarioConfig,
    cutoffs: int | tuple[int, ...] = 16,
    certify: bool = False,
    bump: int = 10,
) -> OracleCompareReport:
    """Compare the covariance-route results against the dense number-basis route.

    Valid for one or two bath modes with a zero-temperature bath.  Compares,
    at every grid time: particle purity, particle reduced moments, and the
    two-branch decoherence factor for branches displaced to +/- x0.  With
    certify=True the dense route is repeated with every cutoff raised by
    `bump` and the worst drift is reported (convergence certification).
    """
    params = cfg.model
    if len(params.bath) > 2:
        raise DomainError("oracle comparison is limited to at most two bath modes")
    if cfg.bath_temperature != 0.0 or cfg.purified:
        raise DomainError("oracle comparison runs with a zero-temperature, unpurified bath")
    world = _prepare(cfg, None)
    H = world.hamiltonian

    mu_plus = world.initial.mean.copy()
    mu_minus = mu_plus.copy()
    mu_minus[0] = -mu_plus[0]
    cat0 = cat_state([1 / np.sqrt(2), 1 / np.sqrt(2)], [mu_plus, mu_minus], world.initial.cov)
    env = list(range(1, world.n_total))

    def gaussian_rows():
        out = []
        for t in cfg.times:
            S = propagator(H, t)
            state = evolve(world.initial, S)
            red = reduce(state, [0])
            out.append((purity(red), red.mean, red.cov, decoherence_factor(evolve(cat0, S), env)))
        return out

    def fock_rows(space: fo.FockSpace):
        Hf = fo.build_fock_hamiltonian(params, space)
        evolver = fo.DenseEvolver(Hf)
        psi_plus = fo.gaussian_to_fock(GaussianState(mu_plus, world.initial.cov), space)
        psi_minus = fo.gaussian_to_fock(GaussianState(mu_minus, world.initial.cov), space)
        env_space = space.subspace(env)
        out = []
        for t in cfg.times:
            bp = evolver.propagate(psi_plus, t)
            bm = evolver.propagate(psi_minus, t)
            rho1 = fo.reduced_density(bp, [0])
            mean1, cov1 = fo.quadrature_moments(rho1, space.subspace([0]))
            mp = fo.mode_means(bp)
            mm = fo.mode_means(bm)
            n = space.n_modes
            idx = np.array(env + [n + i for i in env])
            rho_env = fo.reduced_density(bp, env)
            shift = fo.weyl_operator(env_space, (mm - mp)[idx])
            r = abs(np.trace(rho_env @ shift))
            out.append((fo.purity_density(rho1), mean1, cov1, r))
        return out

    space = fo.FockSpace.for_model(params, cutoffs)
    g_rows = gaussian_rows()
    f_rows = fock_rows(space)
    d_pur = np.array([abs(g[0] - f[0]) for g, f in zip(g_rows, f_rows)])
    d_mean = np.array([np.max(np.abs(g[1] - f[1])) for g, f in zip(g_rows, f_rows)])
    d_cov = np.array([np.max(np.abs(g[2] - f[2])) for g, f in zip(g_rows, f_rows)])
    d_dec = np.array([abs(g[3] - f[3]) for g, f in zip(g_rows, f_rows)])

    cert_delta = None
    if certify:
        f_big = fock_rows(space.bumped(bump))
        cert_delta = 0.0
        for small, big in zip(f_rows, f_big):
            cert_delta = max(
                cert_delta,
                abs(small[0] - big[0]),
                float(np.max(np.abs(small[1] - big[1]))),
                float(np.max(np.abs(small[2] - big[2]))),
                abs(small[3] - big[3]),
            )
    return OracleCompareReport(
        times=cfg.times,
        delta_purity=d_pur,
        delta_mean=d_mean,
        delta_cov=d_cov,
        delta_decoherence=d_dec,
        certification_delta=cert_delta,
    )
