import numpy as np
import pytest
import scipy.integrate
import scipy.stats

import qbm_structures.fock_oracle as fo
from qbm_structures import (
    DomainError,
    ModelParams,
    build_qbm_hamiltonian,
    evolve,
    identity_map,
    log_negativity,
    propagator,
    purity,
    reduce,
)
from qbm_structures.experiments import (
    ScenarioConfig,
    _prepare,
    branch_proxy,
    gaussian_l1_distance,
    marginal_incompatibility,
    run_er_check,
    run_exclusivity,
    run_oracle_compare,
    run_pod,
)
from qbm_structures.structure import collective_mode_map
from helpers import exclusivity_scenario, oracle_scenario, pod_scenario, random_model


def small_scenario(kappa=0.2, temperature=0.0, purified=False, n_times=6, t_max=4.0):
    params = ModelParams(
        m1=1.0, bath=((1.0, 1.3, kappa),), potential="harmonic", omega=1.0
    )
    return ScenarioConfig(
        model=params,
        times=np.linspace(0.0, t_max, n_times),
        x0=1.0,
        bath_temperature=temperature,
        purified=purified,
    )


# ---------------------------------------------------------------------------
# config validation


def test_times_must_start_at_zero_and_increase():
    params = ModelParams(m1=1.0, bath=((1.0, 1.0, 0.1),))
    with pytest.raises(DomainError):
        ScenarioConfig(model=params, times=np.array([1.0, 2.0]))
    with pytest.raises(DomainError):
        ScenarioConfig(model=params, times=np.array([0.0, 2.0, 1.0]))
    with pytest.raises(DomainError):
        ScenarioConfig(model=params, times=np.array([0.0]), particle_state="squeezed")


# ---------------------------------------------------------------------------
# parallel decoherence


def test_pod_decoupled_universe_keeps_purity():
    cfg = small_scenario(kappa=0.0, n_times=5)
    rep = run_pod(cfg)
    assert np.allclose(rep.purity_1, rep.purity_1[0], atol=1e-10)
    assert np.all(rep.neg_12 == 0.0)


def test_pod_coupled_run_decoheres_both_sides():
    cfg = small_scenario(kappa=0.35, temperature=1.5, purified=True, n_times=8)
    rep = run_pod(cfg)
    assert rep.purity_1[0] == pytest.approx(1.0, abs=1e-10)
    assert np.all(rep.purity_1[1:] < 1.0)
    assert np.all(rep.purity_sp < 1.0)
    assert np.all((rep.purity_1 > 0) & (rep.purity_1 <= 1 + 1e-12))
    assert np.all(rep.neg_spep >= 0.0)


def test_pod_early_time_monotone_decay():
    cfg = pod_scenario()
    shortest_period = 2 * np.pi / max(w for _, w, _ in cfg.model.bath)
    quarter = shortest_period / 4
    rep = run_pod(cfg)
    early = rep.times <= quarter + 1e-12
    assert early.sum() >= 2
    assert np.all(np.diff(rep.purity_1[early]) < 1e-9)


def test_pod_matches_fock_oracle_n2():
    # one coupled three-mode instance, all four reported quantities checked
    # against the dense number-basis route at every sampled time
    params = ModelParams(
        m1=1.0, bath=((1.0, 0.9, 0.12), (1.0, 1.4, 0.12)), potential="harmonic", omega=1.0
    )
    times = np.linspace(0.0, 3.0, 3)
    cfg = ScenarioConfig(model=params, times=times, x0=0.8)
    rep = run_pod(cfg)

    H = build_qbm_hamiltonian(params)
    comp = collective_mode_map(H, params.masses)
    space = fo.FockSpace.for_model(params, (14, 12, 12))
    U = fo.mode_transform_unitary(space, comp.lift)
    world = _prepare(cfg, None)
    psi0 = fo.gaussian_to_fock(world.initial, space)
    evolver = fo.DenseEvolver(fo.build_fock_hamiltonian(params, space))
    from qbm_structures import GaussianState

    for i, t in enumerate(times):
        ft = evolver.propagate(psi0, t)
        rho1 = fo.reduced_density(ft, [0])
        assert fo.purity_density(rho1) == pytest.approx(rep.purity_1[i], abs=1e-6)
        rho_full = np.outer(ft.amplitudes, ft.amplitudes.conj())
        assert fo.log_negativity_density(rho_full, [0], space.cutoffs) == pytest.approx(
            rep.neg_12[i], abs=1e-6
        )
        psi_alt = U @ ft.amplitudes
        psi_alt = psi_alt / np.linalg.norm(psi_alt)
        fa = fo.FockState(psi_alt, space)
        assert fo.purity_density(fo.reduced_density(fa, [0])) == pytest.approx(
            rep.purity_sp[i], abs=1e-6
        )
        # trace-norm negativity of a truncated state converges only like the
        # square root of the leaked probability, so its tolerance is coarser;
        # the densely measured covariance pins the same quantity at 1e-6
        rho_alt = np.outer(psi_alt, psi_alt.conj())
        assert fo.log_negativity_density(rho_alt, [0], space.cutoffs) == pytest.approx(
            rep.neg_spep[i], abs=5e-4
        )
        mean_f, cov_f = fo.state_moments(ft)
        lift = comp.lift
        alt_state = GaussianState(lift @ mean_f, lift @ cov_f @ lift.T)
        assert log_negativity(alt_state, [0]) == pytest.approx(rep.neg_spep[i], abs=1e-6)


# ---------------------------------------------------------------------------
# entanglement relativity


def test_er_initial_product_is_witnessed():
    cfg = small_scenario(n_times=2, t_max=1.0)
    rep = run_er_check(cfg)
    assert rep.neg_12[0] < 1e-8
    assert rep.neg_spep[0] > 1e-3
    assert bool(rep.witnessed[0])


def test_er_identity_map_gives_equal_negativities():
    cfg = small_scenario(n_times=4)
    rep = run_er_check(cfg, smap=identity_map(2))
    assert np.allclose(rep.neg_12, rep.neg_spep, atol=1e-12)
    assert not rep.witnessed.any()


def test_er_decoupled_product_stays_product():
    cfg = small_scenario(kappa=0.0, n_times=5)
    rep = run_er_check(cfg)
    assert np.all(rep.neg_12 == 0.0)


def test_er_requires_pure_global_state():
    cfg = small_scenario(temperature=1.0, purified=False, n_times=2)
    with pytest.raises(DomainError):
        run_er_check(cfg)


# ---------------------------------------------------------------------------
# exclusivity


def test_exclusivity_identity_map_never_flags():
    cfg = small_scenario(n_times=4)
    rep = run_exclusivity(cfg, smap=identity_map(2))
    assert np.all(rep.neg_spep < 1e-10)
    assert rep.flagged_fraction == 0.0


def test_exclusivity_t0_matches_er_value():
    cfg = small_scenario(n_times=2, t_max=1.0)
    er = run_er_check(cfg)
    ex = run_exclusivity(cfg)
    # at t = 0 the branch proxy is the initial product state itself
    assert ex.neg_spep[0] == pytest.approx(er.neg_spep[0], abs=1e-9)
    assert bool(ex.excluding[0])


def test_exclusivity_requires_coherent_particle_and_purity():
    cfg = small_scenario(temperature=1.0, purified=False, n_times=2)
    with pytest.raises(DomainError):
        run_exclusivity(cfg)


def test_branch_proxy_is_product_form():
    cfg = small_scenario(kappa=0.3, n_times=2, t_max=2.0)
    world = _prepare(cfg, None)
    state = evolve(world.initial, world.flow(2.0))
    proxy = branch_proxy(world, state)
    assert log_negativity(proxy, [0]) == 0.0
    assert purity(reduce(proxy, [0])) == pytest.approx(1.0, abs=1e-10)
    assert proxy.mean[0] == pytest.approx(state.mean[0])


# ---------------------------------------------------------------------------
# marginal incompatibility


def test_l1_distance_closed_form_vs_quadrature():
    # dense trapezoid handles the |f - g| kinks better than adaptive quadrature
    rng = np.random.default_rng(21)
    for _ in range(12):
        m1, m2 = rng.uniform(-2, 2, size=2)
        v1, v2 = rng.uniform(0.05, 3.0, size=2)
        closed = gaussian_l1_distance(m1, v1, m2, v2)
        lo = min(m1, m2) - 12 * max(np.sqrt(v1), np.sqrt(v2))
        hi = max(m1, m2) + 12 * max(np.sqrt(v1), np.sqrt(v2))
        grid = np.linspace(lo, hi, 2_000_001)
        diff = np.abs(
            scipy.stats.norm.pdf(grid, m1, np.sqrt(v1))
            - scipy.stats.norm.pdf(grid, m2, np.sqrt(v2))
        )
        assert closed == pytest.approx(np.trapezoid(diff, grid), abs=1e-6)


def test_l1_distance_identical_is_zero():
    assert gaussian_l1_distance(0.3, 1.2, 0.3, 1.2) == 0.0


def test_marginal_identity_map_is_zero():
    cfg = small_scenario(n_times=2)
    rep = marginal_incompatibility(cfg, 0.0, smap=identity_map(2))
    assert rep.l1_distance == 0.0


def test_marginal_generic_map_exceeds_threshold():
    rep = marginal_incompatibility(pod_scenario(), 0.0)
    assert rep.l1_distance > 0.1


def test_marginal_translation_covariance():
    # shifting both position axes by the same amount leaves the distance alone
    rep = marginal_incompatibility(small_scenario(n_times=2), 1.0)
    a = gaussian_l1_distance(rep.mean_1, rep.var_1, rep.mean_sp, rep.var_sp)
    b = gaussian_l1_distance(rep.mean_1 + 5.0, rep.var_1, rep.mean_sp + 5.0, rep.var_sp)
    assert a == pytest.approx(b, rel=1e-12)


# ---------------------------------------------------------------------------
# consistency of the two observable routes


def test_transformed_state_matches_transformed_operators():
    cfg = small_scenario(kappa=0.3, n_times=2, t_max=3.0)
    world = _prepare(cfg, None)
    comp = world.smap
    state = evolve(world.initial, world.flow(3.0))
    alt = evolve(state, world.lift_total)
    n = world.n_total
    # <X_Sp>, var(X_Sp) via transformed state vs via the row of T acting on
    # the original moments (Heisenberg route)
    row = np.zeros(2 * n)
    row[: comp.n_modes] = comp.T[0]
    assert alt.mean[0] == pytest.approx(row @ state.mean, rel=1e-8)
    assert alt.cov[0, 0] == pytest.approx(row @ state.cov @ row, rel=1e-8)


def test_threads_env_var_does_not_change_results(monkeypatch):
    cfg = small_scenario(kappa=0.25, temperature=1.0, purified=True, n_times=6)
    monkeypatch.setenv("QBM_STRUCTURES_THREADS", "1")
    serial = run_pod(cfg)
    monkeypatch.setenv("QBM_STRUCTURES_THREADS", "2")
    threaded = run_pod(cfg)
    assert np.array_equal(serial.purity_1, threaded.purity_1)
    assert np.array_equal(serial.neg_spep, threaded.neg_spep)
    monkeypatch.setenv("QBM_STRUCTURES_THREADS", "zero")
    with pytest.raises(DomainError):
        run_pod(cfg)


# ---------------------------------------------------------------------------
# oracle comparison harness


def test_oracle_compare_small_instance():
    cfg = oracle_scenario(1)
    times = np.linspace(0.0, cfg.times[-1], 6)
    cfg = ScenarioConfig(
        model=cfg.model, times=times, x0=cfg.x0, p0=cfg.p0
    )
    rep = run_oracle_compare(cfg, cutoffs=18, certify=True, bump=8)
    assert rep.max_abs_delta < 1e-6
    assert rep.certification_delta is not None and rep.certification_delta < 1e-8


def test_oracle_compare_rejects_large_or_warm_runs():
    params = ModelParams(m1=1.0, bath=((1.0, 1.0, 0.1),) * 3)
    cfg = ScenarioConfig(model=params, times=np.array([0.0, 1.0]), x0=1.0)
    with pytest.raises(DomainError):
        run_oracle_compare(cfg)
    warm = small_scenario(temperature=1.0, n_times=2)
    with pytest.raises(DomainError):
        run_oracle_compare(warm)
