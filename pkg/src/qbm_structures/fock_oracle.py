"""Brute-force number-basis validator for small instances.

Everything here works on dense truncated-Fock-space matrices built from
ladder operators, with evolution by full eigendecomposition, so results are
independent of the covariance-matrix machinery they certify.  Intended for
one to three modes at per-mode cutoffs of a few tens; the total dimension is
capped to bound memory.

Each mode's basis is the eigenbasis of a reference oscillator with the
mode's mass and a basis frequency; x and p matrices carry those widths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConditioningError, DomainError
from .gaussian import GaussianState, is_pure
from .model import POTENTIAL_HARMONIC, ModelParams, symplectic_form

DEFAULT_DIM_CAP = 20_000
TRUNCATION_TOL = 1e-8


@dataclass(frozen=True)
class FockSpace:
    """Truncated number basis: per-mode cutoffs plus per-mode basis (mass, frequency)."""

    cutoffs: tuple[int, ...]
    masses: tuple[float, ...]
    frequencies: tuple[float, ...]
    cap: int = DEFAULT_DIM_CAP

    def __post_init__(self) -> None:
        cut = tuple(int(c) for c in self.cutoffs)
        if not cut or any(c < 1 for c in cut):
            raise DomainError("per-mode cutoffs must be >= 1")
        if len(self.masses) != len(cut) or len(self.frequencies) != len(cut):
            raise DomainError("need one (mass, frequency) pair per mode")
        if any(m <= 0 for m in self.masses) or any(w <= 0 for w in self.frequencies):
            raise DomainError("basis masses and frequencies must be positive")
        dim = int(np.prod(cut))
        if dim > self.cap:
            raise DomainError(f"Fock dimension {dim} exceeds the cap {self.cap}")
        object.__setattr__(self, "cutoffs", cut)
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        object.__setattr__(self, "frequencies", tuple(float(w) for w in self.frequencies))

    @classmethod
    def for_model(cls, params: ModelParams, cutoffs, cap: int = DEFAULT_DIM_CAP) -> "FockSpace":
        """Basis matched to the model: each mode uses its own mass and frequency.

        A free particle gets basis frequency 1.0 (any complete basis works;
        convergence is certified per use).
        """
        if isinstance(cutoffs, int):
            cutoffs = (cutoffs,) * params.n_modes
        w1 = params.omega if params.potential == POTENTIAL_HARMONIC else 1.0
        masses = (params.m1,) + tuple(m for m, _, _ in params.bath)
        freqs = (w1,) + tuple(w for _, w, _ in params.bath)
        return cls(tuple(cutoffs), masses, freqs, cap)

    @property
    def n_modes(self) -> int:
        return len(self.cutoffs)

    @property
    def dim(self) -> int:
        return int(np.prod(self.cutoffs))

    def bumped(self, delta: int) -> "FockSpace":
        """Same basis with every per-mode cutoff increased by delta (cap still applies)."""
        return FockSpace(tuple(c + delta for c in self.cutoffs), self.masses, self.frequencies, self.cap)

    def subspace(self, modes) -> "FockSpace":
        modes = sorted(set(int(i) for i in modes))
        return FockSpace(
            tuple(self.cutoffs[i] for i in modes),
            tuple(self.masses[i] for i in modes),
            tuple(self.frequencies[i] for i in modes),
            self.cap,
        )


@dataclass(frozen=True)
class FockState:
    """Dense complex amplitude vector over the truncated number basis."""

    amplitudes: np.ndarray
    space: FockSpace

    def __post_init__(self) -> None:
        amp = np.array(np.asarray(self.amplitudes, dtype=complex))
        if amp.shape != (self.space.dim,):
            raise DomainError(f"amplitude length {amp.shape} does not match dim {self.space.dim}")
        if abs(np.linalg.norm(amp) - 1.0) > 1e-10:
            raise DomainError("Fock amplitudes must be normalized to 1e-10")
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)


# ---------------------------------------------------------------------------
# operator construction


def _ladder(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d)), 1)


def _x_matrix(d: int, m: float, w: float) -> np.ndarray:
    a = _ladder(d)
    return (a + a.T) / np.sqrt(2 * m * w)


def _b_matrix(d: int, m: float, w: float) -> np.ndarray:
    """Real matrix B with p = i B (so p^2 = -B @ B stays real)."""
    a = _ladder(d)
    return np.sqrt(m * w / 2) * (a.T - a)


def _embed(op: np.ndarray, space: FockSpace, mode: int) -> np.ndarray:
    left = int(np.prod(space.cutoffs[:mode], initial=1))
    right = int(np.prod(space.cutoffs[mode + 1 :], initial=1))
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


def quadrature_operators(space: FockSpace) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Dense x and p operators for every mode of the space (p complex)."""
    xs, ps = [], []
    for i in range(space.n_modes):
        d, m, w = space.cutoffs[i], space.masses[i], space.frequencies[i]
        xs.append(_embed(_x_matrix(d, m, w), space, i))
        ps.append(1j * _embed(_b_matrix(d, m, w), space, i))
    return xs, ps


def build_fock_hamiltonian(params: ModelParams, space: FockSpace) -> np.ndarray:
    """Dense real-symmetric Hamiltonian of the particle + bath model, term by term."""
    if space.n_modes != params.n_modes:
        raise DomainError("space mode count does not match the model")
    masses = (params.m1,) + tuple(m for m, _, _ in params.bath)
    H = np.zeros((space.dim, space.dim))
    x_ops = []
    for i in range(space.n_modes):
        d = space.cutoffs[i]
        b = _b_matrix(d, space.masses[i], space.frequencies[i])
        H += _embed(-(b @ b) / (2 * masses[i]), space, i)
        x_ops.append(_embed(_x_matrix(d, space.masses[i], space.frequencies[i]), space, i))
    if params.potential == POTENTIAL_HARMONIC:
        H += 0.5 * params.m1 * params.omega**2 * (x_ops[0] @ x_ops[0])
    for i, (m, w, kappa) in enumerate(params.bath, start=1):
        H += 0.5 * m * w**2 * (x_ops[i] @ x_ops[i])
        H += params.coupling_sign * kappa * (x_ops[0] @ x_ops[i])
    return (H + H.T) / 2


# ---------------------------------------------------------------------------
# evolution


class DenseEvolver:
    """Eigendecompose H once, then propagate any vector to any time."""

    def __init__(self, H: np.ndarray):
        if H.shape[0] != H.shape[1]:
            raise DomainError("Hamiltonian must be square")
        if np.max(np.abs(H - np.conj(H.T))) > 1e-12:
            raise DomainError("Hamiltonian must be Hermitian to 1e-12")
        self.energies, self.vectors = np.linalg.eigh(H)

    def propagate(self, psi: FockState, t: float) -> FockState:
        coeff = self.vectors.conj().T @ psi.amplitudes
        evolved = self.vectors @ (np.exp(-1j * self.energies * t) * coeff)
        norm = np.linalg.norm(evolved)
        if abs(norm - 1.0) > 1e-10:
            raise ConditioningError("unitary evolution failed to preserve the norm")
        return FockState(evolved / norm, psi.space)


def evolve_dense(psi: FockState, H: np.ndarray, t: float) -> FockState:
    """psi(t) = exp(-i H t) psi via full eigendecomposition."""
    if H.shape != (psi.space.dim,) * 2:
        raise DomainError("Hamiltonian dimension does not match the state")
    return DenseEvolver(H).propagate(psi, t)


# ---------------------------------------------------------------------------
# reductions and diagnostics


def reduced_density(psi: FockState, keep) -> np.ndarray:
    """Partial trace of |psi><psi| onto the kept modes (trace-1 Hermitian PSD)."""
    keep = sorted(set(int(i) for i in keep))
    n = psi.space.n_modes
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise DomainError(f"kept modes must be a nonempty subset of range({n})")
    drop = [i for i in range(n) if i not in keep]
    tensor = psi.amplitudes.reshape(psi.space.cutoffs)
    tensor = np.transpose(tensor, keep + drop)
    dk = int(np.prod([psi.space.cutoffs[i] for i in keep]))
    mat = tensor.reshape(dk, -1)
    rho = mat @ mat.conj().T
    return (rho + rho.conj().T) / 2


def purity_density(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def log_negativity_density(rho: np.ndarray, party_a, dims) -> float:
    """log2 of the trace norm after partial transposition on party_a modes."""
    dims = tuple(int(d) for d in dims)
    k = len(dims)
    party_a = sorted(set(int(i) for i in party_a))
    if not party_a or party_a[0] < 0 or party_a[-1] >= k or len(party_a) == k:
        raise DomainError("party_a must be a proper nonempty subset of the modes")
    tensor = rho.reshape(dims + dims)
    for i in party_a:
        tensor = np.swapaxes(tensor, i, k + i)
    d = int(np.prod(dims))
    pt = tensor.reshape(d, d)
    return float(np.log2(np.sum(np.abs(np.linalg.eigvalsh(pt)))))


def quadrature_moments(rho: np.ndarray, space: FockSpace) -> tuple[np.ndarray, np.ndarray]:
    """Mean vector and symmetrized covariance of (x.., p..) under a density matrix."""
    xs, ps = quadrature_operators(space)
    ops = xs + ps
    n2 = len(ops)
    mean = np.array([np.real(np.trace(rho @ op)) for op in ops])
    cov = np.empty((n2, n2))
    for i in range(n2):
        for j in range(i, n2):
            sym = 0.5 * np.real(np.trace(rho @ (ops[i] @ ops[j] + ops[j] @ ops[i])))
            cov[i, j] = cov[j, i] = sym - mean[i] * mean[j]
    return mean, cov


def state_moments(psi: FockState) -> tuple[np.ndarray, np.ndarray]:
    """Full mean and symmetrized covariance of a pure state, by matrix-vector products."""
    xs, ps = quadrature_operators(psi.space)
    ops = xs + ps
    n2 = len(ops)
    applied = [op @ psi.amplitudes for op in ops]
    mean = np.array([np.real(np.vdot(psi.amplitudes, v)) for v in applied])
    cov = np.empty((n2, n2))
    for i in range(n2):
        for j in range(i, n2):
            sym = np.real(np.vdot(applied[i], applied[j]))
            cov[i, j] = cov[j, i] = sym - mean[i] * mean[j]
    return mean, cov


def mode_means(psi: FockState) -> np.ndarray:
    """Per-mode <x>, <p> via single-mode reductions (no full density matrix)."""
    n = psi.space.n_modes
    out = np.empty(2 * n)
    for i in range(n):
        rho = reduced_density(psi, [i])
        mean, _ = quadrature_moments(rho, psi.space.subspace([i]))
        out[i], out[n + i] = mean
    return out


def quadratic_operator(space: FockSpace, K: np.ndarray) -> np.ndarray:
    """Dense Weyl-ordered operator (1/2) sum K_ij sym(z_i z_j) for symmetric K."""
    n = space.n_modes
    if K.shape != (2 * n, 2 * n) or np.max(np.abs(K - K.T)) > 1e-10:
        raise DomainError("K must be a symmetric 2n x 2n matrix")
    xs, ps = quadrature_operators(space)
    ops = xs + ps
    H = np.zeros((space.dim, space.dim), dtype=complex)
    for i in range(2 * n):
        for j in range(i, 2 * n):
            if K[i, j] == 0.0:
                continue
            weight = 0.5 if i == j else 1.0
            H += weight * K[i, j] * 0.5 * (ops[i] @ ops[j] + ops[j] @ ops[i])
    return (H + H.conj().T) / 2


def mode_transform_unitary(space: FockSpace, S: np.ndarray) -> np.ndarray:
    """Dense unitary U with U^dag z U = S z for a symplectic S.

    Splits S into its polar factors (positive-symplectic times
    orthogonal-symplectic), takes the quadratic generator of each by a matrix
    logarithm, and exponentiates.  After applying U, the original tensor
    slots carry the transformed modes, so partial traces in the new
    decomposition are plain partial traces of U psi.
    """
    n = space.n_modes
    if S.shape != (2 * n, 2 * n):
        raise DomainError("symplectic dimension does not match the space")
    omega = symplectic_form(n)
    if np.max(np.abs(S @ omega @ S.T - omega)) > 1e-8:
        raise DomainError("matrix is not symplectic")
    gram = S @ S.T
    w, V = np.linalg.eigh(gram)
    if w.min() <= 0:
        raise ConditioningError("polar factor is not positive definite")
    pos = (V * np.sqrt(w)) @ V.T
    log_pos = (V * np.log(w)) @ V.T / 2
    orth = np.linalg.solve(pos, S)

    # orthogonal symplectic matrices are block encodings [[X, Y], [-Y, X]] of
    # complex unitaries u = X + iY, whose skew-Hermitian log always exists
    X, Y = orth[:n, :n], orth[:n, n:]
    if np.max(np.abs(orth[n:, :n] + Y)) > 1e-8 or np.max(np.abs(orth[n:, n:] - X)) > 1e-8:
        raise ConditioningError("polar factor is not orthogonal-symplectic")
    T, Q = scipy.linalg.schur(X + 1j * Y, output="complex")
    log_u = Q @ np.diag(np.log(np.diag(T))) @ Q.conj().T
    log_orth = np.block([[log_u.real, log_u.imag], [-log_u.imag, log_u.real]])
    if np.max(np.abs(scipy.linalg.expm(log_orth) - orth)) > 1e-8:
        raise ConditioningError("failed to take the orthogonal factor's logarithm")

    U = np.eye(space.dim, dtype=complex)
    for gen in (log_pos, log_orth):
        K = -omega @ gen
        K = (K + K.T) / 2
        w, V = np.linalg.eigh(quadratic_operator(space, K))
        U = U @ ((V * np.exp(-1j * w)) @ V.conj().T)
    return U


def weyl_operator(space: FockSpace, delta: np.ndarray) -> np.ndarray:
    """Dense displacement operator shifting means by delta = (dx.., dp..)."""
    delta = np.asarray(delta, dtype=float)
    n = space.n_modes
    if delta.shape != (2 * n,):
        raise DomainError("delta must have one (x, p) pair per mode")
    gen = np.zeros((space.dim, space.dim), dtype=complex)
    for i in range(n):
        d, m, w = space.cutoffs[i], space.masses[i], space.frequencies[i]
        gen += delta[i] * _embed(_b_matrix(d, m, w), space, i)
        gen += 1j * delta[n + i] * _embed(_x_matrix(d, m, w), space, i)
    return scipy.linalg.expm(gen)


# ---------------------------------------------------------------------------
# Gaussian -> Fock bridge


def gaussian_to_fock(state: GaussianState, space: FockSpace) -> FockState:
    """Number-basis amplitudes of a pure Gaussian product state.

    Supports states whose covariance is block-diagonal over modes (each mode
    a displaced, possibly squeezed/rotated single-mode pure Gaussian); raises
    DomainError on cross-mode correlations.  Construction per mode: the
    centered state is the ground vector of the quadratic form with matrix
    sigma^{-1}, then a dense Weyl displacement is applied.  Amplitudes are
    computed at an enlarged cutoff; if the mass left above this space's
    cutoff exceeds 1e-8 a ConditioningError is raised, otherwise the
    truncation is renormalized.
    """
    if space.n_modes != state.n_modes:
        raise DomainError("space mode count does not match the state")
    if not is_pure(state):
        raise DomainError("only pure states have a wavefunction expansion")
    n = state.n_modes
    for i in range(n):
        for j in range(i + 1, n):
            block = state.cov[np.ix_([i, n + i], [j, n + j])]
            if np.max(np.abs(block)) > 1e-12:
                raise DomainError("cross-mode correlations are not supported by this bridge")

    margin = 8
    vectors = []
    deficit = 0.0
    for i in range(n):
        d = space.cutoffs[i]
        big = d + margin
        m, w = space.masses[i], space.frequencies[i]
        sigma = state.cov[np.ix_([i, n + i], [i, n + i])]
        K = np.linalg.inv(sigma)
        x = _x_matrix(big, m, w)
        b = _b_matrix(big, m, w)
        h = 0.5 * (K[0, 0] * (x @ x) - K[1, 1] * (b @ b)) + 0.5j * K[0, 1] * (x @ b + b @ x)
        h = (h + h.conj().T) / 2
        _, vecs = np.linalg.eigh(h)
        ground = vecs[:, 0]
        pivot = np.argmax(np.abs(ground))
        ground = ground * np.exp(-1j * np.angle(ground[pivot]))
        mini = FockSpace((big,), (m,), (w,), cap=max(space.cap, big))
        shift = weyl_operator(mini, np.array([state.mean[i], state.mean[n + i]]))
        amp = shift @ ground
        deficit += float(np.sum(np.abs(amp[d:]) ** 2))
        vectors.append(amp[:d])
    if deficit > TRUNCATION_TOL:
        raise ConditioningError(
            f"truncated norm deficit {deficit:.2e} exceeds {TRUNCATION_TOL}; raise the cutoffs"
        )
    full = vectors[0]
    for v in vectors[1:]:
        full = np.kron(full, v)
    full = full / np.linalg.norm(full)
    return FockState(full, space)
