"""Shared scenario builders for tests, acceptance runs and baseline recording."""

import numpy as np

from qbm_structures import BathSpec, ModelParams, discretize_bath
from qbm_structures.experiments import ScenarioConfig

POD_SEED = 42
DATA_DIR = "data"


def random_model(rng, n_bath, potential="free", sign=+1, kappa_range=(0.02, 0.1)):
    """Generic weak-coupling instance: masses/frequencies in [0.6, 1.6]."""
    bath = tuple(
        (rng.uniform(0.6, 1.6), rng.uniform(0.6, 1.6), rng.uniform(*kappa_range))
        for _ in range(n_bath)
    )
    omega = rng.uniform(0.6, 1.6) if potential == "harmonic" else None
    return ModelParams(
        m1=rng.uniform(0.6, 1.6), bath=bath, potential=potential, omega=omega, coupling_sign=sign
    )


def _generic_ohmic_bath(rng, n_modes=8, gamma=0.2, cutoff=5.0):
    base = discretize_bath(BathSpec(n_modes=n_modes, gamma=gamma, cutoff=cutoff))
    masses = 1.0 + 0.05 * rng.uniform(-1.0, 1.0, size=n_modes)
    return tuple((float(m), w, k) for m, (_, w, k) in zip(masses, base))


def pod_scenario():
    """Canonical demonstration run: 8-mode Ohmic bath, warm and purified, generic masses."""
    rng = np.random.default_rng(POD_SEED)
    bath = _generic_ohmic_bath(rng)
    params = ModelParams(m1=1.0 + 0.05 * rng.uniform(-1.0, 1.0), bath=bath)
    return ScenarioConfig(
        model=params,
        times=np.linspace(0.0, 10.0, 61),
        x0=2.0,
        bath_temperature=2.0,
        purified=True,
    )


def exclusivity_scenario():
    """Confined variant of the canonical run (stable at late times), 50-point grid."""
    rng = np.random.default_rng(POD_SEED)
    bath = _generic_ohmic_bath(rng)
    params = ModelParams(
        m1=1.0 + 0.05 * rng.uniform(-1.0, 1.0),
        bath=bath,
        potential="harmonic",
        omega=1.0,
    )
    return ScenarioConfig(
        model=params,
        times=np.linspace(0.0, 10.0, 50),
        x0=2.0,
        bath_temperature=2.0,
        purified=True,
    )


def oracle_scenario(n_bath):
    """Small instance for number-basis comparisons: T = 0, three particle periods."""
    if n_bath == 1:
        bath = ((1.0, 1.3, 0.2),)
    else:
        bath = ((1.0, 0.9, 0.15), (1.0, 1.4, 0.15))
    params = ModelParams(m1=1.0, bath=bath, potential="harmonic", omega=1.0)
    return ScenarioConfig(
        model=params,
        times=np.linspace(0.0, 3 * 2 * np.pi, 30),
        x0=1.0,
        p0=0.0,
    )
