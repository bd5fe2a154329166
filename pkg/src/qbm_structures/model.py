"""Quadratic model universe: one distinguished particle bilinearly coupled to a harmonic bath.

Conventions (fixed once for the whole package):

* hbar = 1, all masses and frequencies dimensionless.
* Phase-space ordering z = (x_1 .. x_n, p_1 .. p_n) with symplectic form
  Omega = [[0, I], [-I, 0]], so [z_a, z_b] = i * Omega_ab.
* A quadratic Hamiltonian is stored as the symmetric matrix K with
  H = (1/2) z^T K z.  The bilinear particle-bath interaction
  (+/-) x_1 * sum_i kappa_i x_{2i} therefore sits in the position block as
  K[x_1, x_{2i}] = K[x_{2i}, x_1] = (+/-) kappa_i.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

SYMMETRY_TOL = 1e-12

POTENTIAL_FREE = "free"
POTENTIAL_HARMONIC = "harmonic"

GRID_LINEAR = "linear"
GRID_LOG = "log"


def symplectic_form(n_modes: int) -> np.ndarray:
    """Return the 2n x 2n symplectic form [[0, I], [-I, 0]] for the (x.., p..) ordering."""
    eye = np.eye(n_modes)
    zero = np.zeros((n_modes, n_modes))
    return np.block([[zero, eye], [-eye, zero]])


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the particle + harmonic-bath model.

    bath entries are (mass, frequency, coupling) triples, one per bath
    oscillator; coupling_sign is +1 or -1 and multiplies every coupling term.
    """

    m1: float
    bath: tuple[tuple[float, float, float], ...]
    potential: str = POTENTIAL_FREE
    omega: float | None = None
    coupling_sign: int = +1

    def __post_init__(self) -> None:
        if self.m1 <= 0:
            raise DomainError(f"m1 must be positive, got {self.m1}")
        if len(self.bath) < 1:
            raise DomainError("bath must contain at least one oscillator")
        for i, (m, w, _k) in enumerate(self.bath):
            if m <= 0:
                raise DomainError(f"bath mass {i} must be positive, got {m}")
            if w <= 0:
                raise DomainError(f"bath frequency {i} must be positive, got {w}")
        if self.potential not in (POTENTIAL_FREE, POTENTIAL_HARMONIC):
            raise DomainError(f"unknown potential kind {self.potential!r}")
        if self.potential == POTENTIAL_HARMONIC:
            if self.omega is None or self.omega <= 0:
                raise DomainError("harmonic potential requires omega > 0")
        if self.coupling_sign not in (+1, -1):
            raise DomainError(f"coupling_sign must be +1 or -1, got {self.coupling_sign}")
        object.__setattr__(self, "bath", tuple((float(m), float(w), float(k)) for m, w, k in self.bath))

    @property
    def n_modes(self) -> int:
        return 1 + len(self.bath)

    @property
    def masses(self) -> np.ndarray:
        return np.array([self.m1] + [m for m, _, _ in self.bath])


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """H = (1/2) z^T K z over z = (x_1..x_n, p_1..p_n); K symmetric 2n x 2n."""

    n_modes: int
    K: np.ndarray

    def __post_init__(self) -> None:
        K = np.asarray(self.K, dtype=float)
        if K.shape != (2 * self.n_modes, 2 * self.n_modes):
            raise DomainError(f"K has shape {K.shape}, expected {(2 * self.n_modes,) * 2}")
        if np.max(np.abs(K - K.T)) > SYMMETRY_TOL:
            raise DomainError("K is not symmetric to 1e-12")
        object.__setattr__(self, "K", _readonly(K))

    @property
    def position_block(self) -> np.ndarray:
        n = self.n_modes
        return self.K[:n, :n]

    @property
    def momentum_block(self) -> np.ndarray:
        n = self.n_modes
        return self.K[n:, n:]

    @property
    def cross_block(self) -> np.ndarray:
        """Position-momentum block (zero for untransformed models)."""
        n = self.n_modes
        return self.K[:n, n:]


@dataclass(frozen=True)
class BathSpec:
    """Recipe for sampling an Ohmic bath: n_modes frequencies in (0, cutoff]."""

    n_modes: int
    gamma: float
    cutoff: float
    scheme: str = GRID_LINEAR

    def __post_init__(self) -> None:
        if self.n_modes < 1:
            raise DomainError(f"n_modes must be >= 1, got {self.n_modes}")
        if self.gamma < 0:
            raise DomainError(f"gamma must be >= 0, got {self.gamma}")
        if self.cutoff <= 0:
            raise DomainError(f"cutoff must be positive, got {self.cutoff}")
        if self.scheme not in (GRID_LINEAR, GRID_LOG):
            raise DomainError(f"unknown grid scheme {self.scheme!r}")


def discretize_bath(spec: BathSpec, mass: float = 1.0) -> tuple[tuple[float, float, float], ...]:
    """Sample an Ohmic spectral density J(w) = mass * gamma * w on a frequency grid.

    Returns (mass, w_i, kappa_i) triples with kappa_i^2 = (2/pi) * mass * gamma
    * w_i^2 * dw_i, where dw_i is the local grid spacing.  The linear grid is
    w_i = i * cutoff / n; the log grid is geometric from cutoff/n up to cutoff.
    """
    if mass <= 0:
        raise DomainError(f"bath mass must be positive, got {mass}")
    n, lam = spec.n_modes, spec.cutoff
    if spec.scheme == GRID_LINEAR:
        omegas = lam * np.arange(1, n + 1) / n
        spacings = np.full(n, lam / n)
    else:
        omegas = np.geomspace(lam / n, lam, n)
        if n == 1:
            spacings = np.array([lam])
        else:
            spacings = np.empty(n)
            spacings[1:-1] = (omegas[2:] - omegas[:-2]) / 2
            spacings[0] = omegas[1] - omegas[0]
            spacings[-1] = omegas[-1] - omegas[-2]
    kappas = np.sqrt((2.0 / np.pi) * mass * spec.gamma * omegas**2 * spacings)
    return tuple((mass, float(w), float(k)) for w, k in zip(omegas, kappas))


def build_qbm_hamiltonian(params: ModelParams) -> QuadraticHamiltonian:
    """Assemble the K matrix of the particle + bath model from physical parameters.

    Nonzero entries: kinetic 1/m on the momentum diagonal, bath potentials
    m_i w_i^2 on the position diagonal, the particle potential (if harmonic),
    and the symmetrized coupling entries (+/-) kappa_i between x_1 and x_{2i}.
    Emits a warning when the resulting position block is indefinite (strong
    coupling), in which case evolution is still well-defined but unbounded.
    """
    n = params.n_modes
    K = np.zeros((2 * n, 2 * n))
    K[n, n] = 1.0 / params.m1
    if params.potential == POTENTIAL_HARMONIC:
        K[0, 0] = params.m1 * params.omega**2
    for i, (m, w, kappa) in enumerate(params.bath, start=1):
        K[n + i, n + i] = 1.0 / m
        K[i, i] = m * w**2
        K[0, i] = K[i, 0] = params.coupling_sign * kappa
    H = QuadraticHamiltonian(n, K)
    if np.linalg.eigvalsh(H.position_block).min() < 0:
        warnings.warn(
            "position block of the model Hamiltonian is indefinite "
            "(coupling exceeds confinement); dynamics are unbounded",
            stacklevel=2,
        )
    return H


def read_qbm_parameters(H: QuadraticHamiltonian) -> ModelParams:
    """Reconstruct ModelParams term-by-term from an untransformed model K.

    Inverse of build_qbm_hamiltonian for couplings stored with non-negative
    kappa_i; the overall sign is taken from the first nonzero coupling entry.
    Raises DomainError when K carries terms outside the model family (momentum
    cross-terms, bath-bath couplings).
    """
    n = H.n_modes
    K = H.K
    if np.any(H.cross_block != 0):
        raise DomainError("K has position-momentum terms; not an untransformed model")
    mom = H.momentum_block
    if np.any(mom - np.diag(np.diag(mom)) != 0):
        raise DomainError("momentum block has cross-terms; not an untransformed model")
    if np.any(np.diag(mom) <= 0):
        raise DomainError("momentum block must be positive on the diagonal")
    pos = H.position_block
    if np.any(pos[1:, 1:] - np.diag(np.diag(pos)[1:]) != 0):
        raise DomainError("bath-bath position couplings present; not an untransformed model")
    m1 = 1.0 / mom[0, 0]
    couplings = pos[0, 1:].copy()
    sign = +1
    nonzero = np.nonzero(couplings)[0]
    if nonzero.size and couplings[nonzero[0]] < 0:
        sign = -1
    bath = []
    for i in range(1, n):
        m = 1.0 / mom[i, i]
        cw2 = pos[i, i]
        if cw2 <= 0:
            raise DomainError(f"bath mode {i} has non-positive potential coefficient")
        bath.append((m, float(np.sqrt(cw2 / m)), sign * couplings[i - 1]))
    if pos[0, 0] > 0:
        return ModelParams(
            m1=m1,
            bath=tuple(bath),
            potential=POTENTIAL_HARMONIC,
            omega=float(np.sqrt(pos[0, 0] / m1)),
            coupling_sign=sign,
        )
    return ModelParams(m1=m1, bath=tuple(bath), coupling_sign=sign)
