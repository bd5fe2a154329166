"""Exact Gaussian-state machinery for quadratic Hamiltonians.

States are (mean, covariance) pairs over z = (x_1..x_n, p_1..p_n) with
sigma_ij = (1/2) <{dz_i, dz_j}> and hbar = 1, so the vacuum covariance is
I/2 and purity is 1 / (2^n sqrt(det sigma)).  Quadratic dynamics acts
exactly through symplectic matrices S(t) = exp(Omega K t): means transform
as S m, covariances as S sigma S^T.

Superpositions of two displaced copies of one pure Gaussian (cat states)
are carried as explicit branch lists; their environment-induced coherence
suppression has a closed form (see decoherence_factor).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConditioningError, DomainError
from .model import QuadraticHamiltonian, symplectic_form

UNCERTAINTY_TOL = 1e-10
PURITY_TOL = 1e-8
DET_FLOOR = 1e-300
NEGATIVITY_FLOOR = 1e-10


@dataclass(frozen=True)
class GaussianState:
    """First and second moments of a Gaussian state over (x.., p..) coordinates."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        mean = np.array(np.asarray(self.mean, dtype=float))
        cov = np.array(np.asarray(self.cov, dtype=float))
        if mean.ndim != 1 or mean.size % 2:
            raise DomainError(f"mean must have even length, got shape {mean.shape}")
        if cov.shape != (mean.size, mean.size):
            raise DomainError(f"cov shape {cov.shape} does not match mean length {mean.size}")
        sym_scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - cov.T)) > UNCERTAINTY_TOL * sym_scale:
            raise DomainError("covariance is not symmetric")
        cov = (cov + cov.T) / 2
        n = mean.size // 2
        herm = cov + 0.5j * symplectic_form(n)
        # tolerance scales with the covariance norm so that unstable (unconfined)
        # evolutions remain representable in double precision
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.linalg.eigvalsh(herm).min() < -UNCERTAINTY_TOL * scale:
            raise DomainError("covariance violates the uncertainty relation")
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2


@dataclass(frozen=True)
class CatState:
    """Two-or-more displaced copies of one pure Gaussian, in coherent superposition.

    branches are (amplitude, mean) pairs sharing the covariance `cov`; the
    amplitudes include the overlap-aware normalization (see cat_state).
    """

    branches: tuple[tuple[complex, np.ndarray], ...]
    cov: np.ndarray

    def __post_init__(self) -> None:
        if len(self.branches) < 2:
            raise DomainError("a cat state needs at least two branches")
        cov = np.array(np.asarray(self.cov, dtype=float))
        size = cov.shape[0]
        branches = []
        for amp, mean in self.branches:
            mean = np.array(np.asarray(mean, dtype=float))
            if mean.shape != (size,):
                raise DomainError("branch mean length does not match covariance")
            mean.flags.writeable = False
            branches.append((complex(amp), mean))
        base = GaussianState(np.zeros(size), cov)
        # purity tolerance grows with the covariance norm: symplectic spectra of
        # strongly squeezed covariances carry proportionally larger roundoff
        nu = symplectic_eigenvalues(base.cov)
        if np.max(np.abs(nu - 0.5)) > PURITY_TOL * max(1.0, float(np.max(np.abs(cov)))):
            raise DomainError("shared covariance of a cat state must be pure")
        object.__setattr__(self, "cov", base.cov)
        object.__setattr__(self, "branches", tuple(branches))

    @property
    def n_modes(self) -> int:
        return self.cov.shape[0] // 2

    def norm(self) -> float:
        total = 0.0j
        for a_j, mu_j in self.branches:
            for a_k, mu_k in self.branches:
                total += np.conj(a_j) * a_k * _displaced_overlap(mu_j, mu_k, self.cov)
        return float(np.sqrt(abs(total.real)))


def cat_state(weights, means, cov: np.ndarray) -> CatState:
    """Build a normalized cat: branch weights are rescaled against their pairwise overlaps.

    The returned state's amplitudes satisfy norm = 1 to 1e-10; symplectic
    evolution preserves that norm identically (overlaps depend on the means
    and covariance only through symplectic invariants).
    """
    weights = [complex(w) for w in weights]
    means = [np.asarray(m, dtype=float) for m in means]
    if len(weights) != len(means):
        raise DomainError("one weight per branch mean required")
    cov = np.asarray(cov, dtype=float)
    total = 0.0j
    for w_j, mu_j in zip(weights, means):
        for w_k, mu_k in zip(weights, means):
            total += np.conj(w_j) * w_k * _displaced_overlap(mu_j, mu_k, cov)
    scale = 1.0 / np.sqrt(total.real)
    cat = CatState(tuple((w * scale, m) for w, m in zip(weights, means)), cov)
    if abs(cat.norm() - 1.0) > 1e-10:
        raise DomainError("cat-state normalization failed (degenerate branch overlaps)")
    return cat


def _displaced_overlap(mu_a: np.ndarray, mu_b: np.ndarray, cov: np.ndarray) -> complex:
    """<a|b> for two displaced copies of one pure Gaussian (exact, incl. Weyl phase).

    Purity of cov makes det(2 cov) = 1 identically, so only the displacement
    quadratic form and the Weyl phase remain.
    """
    n = mu_a.size // 2
    omega = symplectic_form(n)
    delta = mu_b - mu_a
    quad = delta @ np.linalg.solve(2 * cov, delta)
    return complex(np.exp(-0.25 * quad) * np.exp(0.5j * (mu_a @ omega @ mu_b)))


# ---------------------------------------------------------------------------
# state constructors


def coherent_state(
    n_modes: int, mode: int, x: float, p: float, width_mass: float = 1.0, width_freq: float = 1.0
) -> GaussianState:
    """Minimum-uncertainty wavepacket at (x, p) on one mode, vacuum elsewhere.

    The packet's widths are those of the (width_mass, width_freq) oscillator
    ground state: sigma_xx = 1/(2 m w), sigma_pp = m w / 2.  Other modes get
    unit-oscillator vacuum.
    """
    if not 0 <= mode < n_modes:
        raise DomainError(f"mode {mode} out of range for {n_modes} modes")
    if width_mass <= 0 or width_freq <= 0:
        raise DomainError("width mass and frequency must be positive")
    mean = np.zeros(2 * n_modes)
    mean[mode] = x
    mean[n_modes + mode] = p
    diag = np.full(2 * n_modes, 0.5)
    mw = width_mass * width_freq
    diag[mode] = 0.5 / mw
    diag[n_modes + mode] = 0.5 * mw
    return GaussianState(mean, np.diag(diag))


def thermal_state(modes, temperature: float) -> GaussianState:
    """Product of thermal single-mode states; modes is a list of (mass, frequency).

    Widths are coth(w / 2T) times the vacuum widths (T = 0 gives the vacuum).
    """
    if temperature < 0:
        raise DomainError(f"temperature must be >= 0, got {temperature}")
    diag = []
    for m, w in modes:
        if m <= 0 or w <= 0:
            raise DomainError("mode masses and frequencies must be positive")
        coth = 1.0 if temperature == 0 else 1.0 / np.tanh(w / (2 * temperature))
        diag.append((coth / (2 * m * w), m * w * coth / 2))
    n = len(diag)
    full = np.array([d[0] for d in diag] + [d[1] for d in diag])
    return GaussianState(np.zeros(2 * n), np.diag(full))


def product_state(*states: GaussianState) -> GaussianState:
    """Tensor product: concatenated means, block-diagonal covariance."""
    n = sum(s.n_modes for s in states)
    mean = np.zeros(2 * n)
    cov = np.zeros((2 * n, 2 * n))
    at = 0
    for s in states:
        k = s.n_modes
        sl_x, sl_p = slice(at, at + k), slice(n + at, n + at + k)
        mean[sl_x], mean[sl_p] = s.mean[:k], s.mean[k:]
        cov[sl_x, sl_x] = s.cov[:k, :k]
        cov[sl_p, sl_p] = s.cov[k:, k:]
        cov[sl_x, sl_p] = s.cov[:k, k:]
        cov[sl_p, sl_x] = s.cov[k:, :k]
        at += k
    return GaussianState(mean, cov)


# ---------------------------------------------------------------------------
# spectra, purity, purification


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a covariance matrix, ascending (>= 1/2 for states)."""
    n = cov.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(symplectic_form(n) @ cov))
    return np.sort(ev)[::2]


def is_pure(state: GaussianState) -> bool:
    nu = symplectic_eigenvalues(state.cov)
    return bool(np.max(np.abs(nu - 0.5)) <= PURITY_TOL)


def purity(state: GaussianState) -> float:
    """1 / (2^n sqrt(det sigma)); 1 exactly on pure states."""
    return _purity_from_cov(state.cov)


def _purity_from_cov(cov: np.ndarray) -> float:
    n = cov.shape[0] // 2
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0 or logdet < np.log(DET_FLOOR):
        raise ConditioningError("covariance is numerically degenerate")
    return float(np.exp(-n * np.log(2.0) - 0.5 * logdet))


def williamson(cov: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Decompose cov = S diag(nu.., nu..) S^T with S symplectic, nu ascending."""
    n = cov.shape[0] // 2
    perm = np.empty(2 * n, dtype=int)
    perm[0::2] = np.arange(n)
    perm[1::2] = np.arange(n) + n
    sig = cov[np.ix_(perm, perm)]

    w, U = np.linalg.eigh(sig)
    if w.min() <= 0:
        raise ConditioningError("covariance is not positive definite")
    sqrt_sig = (U * np.sqrt(w)) @ U.T
    isqrt_sig = (U / np.sqrt(w)) @ U.T

    omega_pair = np.zeros((2 * n, 2 * n))
    for k in range(n):
        omega_pair[2 * k, 2 * k + 1] = 1.0
        omega_pair[2 * k + 1, 2 * k] = -1.0
    skew = isqrt_sig @ omega_pair @ isqrt_sig
    T, O = scipy.linalg.schur((skew - skew.T) / 2)

    nus = np.empty(n)
    for k in range(n):
        t = T[2 * k, 2 * k + 1]
        if t < 0:
            O[:, [2 * k, 2 * k + 1]] = O[:, [2 * k + 1, 2 * k]]
            t = -t
        nus[k] = 1.0 / t
    order = np.argsort(nus)
    nus = nus[order]
    col_order = np.empty(2 * n, dtype=int)
    col_order[0::2] = 2 * order
    col_order[1::2] = 2 * order + 1
    O = O[:, col_order]

    scale = np.repeat(1.0 / np.sqrt(nus), 2)
    S_pair = sqrt_sig @ O * scale
    inv_perm = np.argsort(perm)
    return S_pair[np.ix_(inv_perm, inv_perm)], nus


def purify(state: GaussianState) -> GaussianState:
    """Extend to a pure state on doubled modes whose first-half reduction is the input.

    Each normal mode of the covariance is paired with one ancilla mode in a
    two-mode squeezed state whose squeezing reproduces the mode's symplectic
    eigenvalue; pure modes get unsqueezed vacuum ancillas.
    """
    n = state.n_modes
    S_w, nus = williamson(state.cov)
    s = np.where(nus < 0.5 + 1e-12, 0.0, np.sqrt(np.maximum(nus**2 - 0.25, 0.0)))
    nus = np.where(s == 0.0, 0.5, nus)
    N = 2 * n
    big = np.diag(np.concatenate([nus, nus, nus, nus]))
    for k in range(n):
        big[k, n + k] = big[n + k, k] = s[k]
        big[N + k, N + n + k] = big[N + n + k, N + k] = -s[k]
    S_full = embed_symplectic(S_w, N, range(n))
    mean = np.zeros(2 * N)
    mean[:n] = state.mean[:n]
    mean[N : N + n] = state.mean[n:]
    return GaussianState(mean, S_full @ big @ S_full.T)


# ---------------------------------------------------------------------------
# dynamics


def propagator(H: QuadraticHamiltonian, t: float, method: str = "pade") -> np.ndarray:
    """Exact phase-space flow S(t) = exp(Omega K t).

    method "pade" uses scaling-and-squaring; "eig" diagonalizes Omega K and
    raises ConditioningError when that generator is defective (e.g. a free
    particle), where only the Pade route applies.
    """
    A = symplectic_form(H.n_modes) @ H.K
    if method == "pade":
        return scipy.linalg.expm(A * t)
    if method == "eig":
        lam, V = np.linalg.eig(A)
        cond = np.linalg.cond(V)
        if not np.isfinite(cond) or cond > 1e12:
            raise ConditioningError("generator is not diagonalizable; use the pade route")
        S = (V * np.exp(lam * t)) @ np.linalg.inv(V)
        return np.real(S)
    raise DomainError(f"unknown propagator method {method!r}")


def evolve(state, S: np.ndarray):
    """Apply a symplectic matrix: mean -> S mean, cov -> S cov S^T.

    Accepts GaussianState or CatState; cat branches share one covariance
    update and keep their amplitudes (a global symplectic is unitary, and the
    branch Weyl phases are tracked by the overlap convention).
    """
    if isinstance(state, CatState):
        if S.shape != (2 * state.n_modes,) * 2:
            raise DomainError("symplectic dimension does not match state")
        cov = S @ state.cov @ S.T
        return CatState(tuple((a, S @ m) for a, m in state.branches), cov)
    if S.shape != (2 * state.n_modes,) * 2:
        raise DomainError("symplectic dimension does not match state")
    return GaussianState(S @ state.mean, S @ state.cov @ S.T)


def embed_symplectic(S: np.ndarray, n_total: int, modes) -> np.ndarray:
    """Embed a symplectic on the given modes into n_total modes (identity elsewhere)."""
    modes = list(modes)
    k = len(modes)
    if S.shape != (2 * k, 2 * k):
        raise DomainError("symplectic dimension does not match mode count")
    idx = np.array(modes + [n_total + m for m in modes])
    out = np.eye(2 * n_total)
    out[np.ix_(idx, idx)] = S
    return out


def reduce(state: GaussianState, keep) -> GaussianState:
    """Partial trace: restrict mean and covariance to the kept modes (ascending order)."""
    keep = sorted(set(int(i) for i in keep))
    n = state.n_modes
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise DomainError(f"kept modes must be a nonempty subset of range({n})")
    idx = np.array(keep + [n + i for i in keep])
    return GaussianState(state.mean[idx], state.cov[np.ix_(idx, idx)])


def mean_energy(H: QuadraticHamiltonian, state: GaussianState) -> float:
    """<H> = (tr(K sigma) + m^T K m) / 2."""
    if H.n_modes != state.n_modes:
        raise DomainError("Hamiltonian and state mode counts differ")
    return float(0.5 * (np.trace(H.K @ state.cov) + state.mean @ H.K @ state.mean))


# ---------------------------------------------------------------------------
# entanglement and coherence diagnostics


def log_negativity(state: GaussianState, party_a) -> float:
    """Logarithmic negativity across the bipartition (party_a | rest).

    Partially transposes by flipping party_a momenta in the covariance and
    sums -log2(2 nu) over symplectic eigenvalues below 1/2.  Contributions
    under 1e-10 are treated as zero so product states report exactly 0.
    """
    party_a = sorted(set(int(i) for i in party_a))
    n = state.n_modes
    if not party_a or party_a[0] < 0 or party_a[-1] >= n or len(party_a) == n:
        raise DomainError("party_a must be a proper nonempty subset of the modes")
    flip = np.ones(2 * n)
    for i in party_a:
        flip[n + i] = -1.0
    tilde = state.cov * np.outer(flip, flip)
    nu = symplectic_eigenvalues(tilde)
    terms = -np.log2(2 * nu)
    terms[terms < NEGATIVITY_FLOOR] = 0.0
    return float(np.sum(terms[terms > 0]))


def overlap(a: GaussianState, b: GaussianState) -> complex:
    """<a|b> for pure states.

    Magnitude follows the closed form |<a|b>|^2 =
    det(sigma_a + sigma_b)^{-1/2} exp(-delta^T (sigma_a+sigma_b)^{-1} delta / 2)
    (vacuum = I/2 convention).  Phase convention: the Weyl displacement phase
    (mean_a^T Omega mean_b) / 2, exact whenever the covariances coincide; the
    residual squeezing phase is fixed to zero.
    """
    if a.n_modes != b.n_modes:
        raise DomainError("states live on different mode counts")
    if not (is_pure(a) and is_pure(b)):
        raise DomainError("overlap is defined for pure states only")
    total = a.cov + b.cov
    delta = b.mean - a.mean
    sign, logdet = np.linalg.slogdet(total)
    if sign <= 0:
        raise ConditioningError("covariance sum is numerically degenerate")
    quad = delta @ np.linalg.solve(total, delta)
    mag = np.exp(-0.25 * logdet - 0.25 * quad)
    omega = symplectic_form(a.n_modes)
    return complex(mag * np.exp(0.5j * (a.mean @ omega @ b.mean)))


def decoherence_factor(cat: CatState, env) -> float:
    """Distinguishability of the two branches' environment records, in [0, 1].

    For a pure two-branch cat the branches differ by a displacement delta;
    restricted to the env modes the branch states share a covariance sigma_E
    and differ by delta_E, and their overlap magnitude is the characteristic
    function of the reduced state at that displacement:
    r = |tr(rho_E T(delta_E))| = exp(-(Omega delta_E)^T sigma_E (Omega delta_E)/2),
    which reduces to |<eps_1|eps_2>| whenever the reductions are pure.
    """
    if len(cat.branches) != 2:
        raise DomainError("decoherence factor is defined for exactly two branches")
    env = sorted(set(int(i) for i in env))
    n = cat.n_modes
    if not env or env[0] < 0 or env[-1] >= n:
        raise DomainError(f"env modes must be a nonempty subset of range({n})")
    idx = np.array(env + [n + i for i in env])
    delta_e = (cat.branches[1][1] - cat.branches[0][1])[idx]
    sigma_e = cat.cov[np.ix_(idx, idx)]
    rotated = symplectic_form(len(env)) @ delta_e
    return float(np.exp(-0.5 * rotated @ sigma_e @ rotated))


def condition_on_coherent(
    state: GaussianState, mode: int, width_mass: float = 1.0, width_freq: float = 1.0
) -> GaussianState:
    """Posterior of the other modes after projecting `mode` onto the coherent state at its own mean.

    Standard Gaussian conditioning with a minimum-uncertainty projector of the
    given widths; projecting at the state's own mean leaves the posterior
    means unchanged.  On a pure input the posterior is pure.
    """
    n = state.n_modes
    if not 0 <= mode < n:
        raise DomainError(f"mode {mode} out of range for {n} modes")
    if n < 2:
        raise DomainError("conditioning needs at least one remaining mode")
    rest = [i for i in range(n) if i != mode]
    ia = np.array([mode, n + mode])
    ib = np.array(rest + [n + i for i in rest])
    mw = width_mass * width_freq
    proj = np.diag([0.5 / mw, 0.5 * mw])
    gain = state.cov[np.ix_(ib, ia)] @ np.linalg.inv(state.cov[np.ix_(ia, ia)] + proj)
    cov = state.cov[np.ix_(ib, ib)] - gain @ state.cov[np.ix_(ia, ib)]
    return GaussianState(state.mean[ib], (cov + cov.T) / 2)
