"""Linear canonical transformations between decompositions of the mode space.

A StructureMap is an invertible linear change of position coordinates
x' = T x together with its canonical lift p' = T^{-T} p.  The lift
S = diag(T, T^{-T}) preserves the symplectic form exactly in exact
arithmetic; constructors check it numerically.

The two maps used throughout are the center-of-mass + relative-coordinate
split (relative coordinates taken against the distinguished particle, which
keeps the textbook reduced masses and produces the momentum-momentum
cross-couplings of the collective frame) and the normal-mode map that
decouples a quadratically coupled block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DomainError
from .model import QuadraticHamiltonian, symplectic_form

INVERTIBILITY_TOL = 1e-12
CANONICITY_TOL = 1e-10
DENSITY_TOL = 1e-12
DECOUPLING_TOL = 1e-10

SERIAL_HEADER = "# qbm-structures structure-map v1"


@dataclass(frozen=True)
class StructureMap:
    """Invertible position map x' = T x with canonical momentum lift p' = T^{-T} p."""

    T: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        T = np.array(np.asarray(self.T, dtype=float))
        if T.ndim != 2 or T.shape[0] != T.shape[1]:
            raise DomainError(f"T must be square, got shape {T.shape}")
        if len(self.labels) != T.shape[0]:
            raise DomainError("one label per new mode required")
        if abs(np.linalg.det(T)) <= INVERTIBILITY_TOL:
            raise DomainError("T is numerically singular")
        T.flags.writeable = False
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "labels", tuple(self.labels))
        Tinv = np.linalg.inv(T)
        Tinv.flags.writeable = False
        object.__setattr__(self, "_T_inv", Tinv)
        lift = self.lift
        omega = symplectic_form(self.n_modes)
        if np.max(np.abs(lift @ omega @ lift.T - omega)) > CANONICITY_TOL:
            raise DomainError("canonical lift fails symplectic-form preservation")

    @property
    def n_modes(self) -> int:
        return self.T.shape[0]

    @property
    def T_inv(self) -> np.ndarray:
        return self._T_inv  # type: ignore[attr-defined]

    @property
    def lift(self) -> np.ndarray:
        """2n x 2n symplectic matrix acting on (x.., p..) vectors."""
        n = self.n_modes
        S = np.zeros((2 * n, 2 * n))
        S[:n, :n] = self.T
        S[n:, n:] = self.T_inv.T
        return S


def identity_map(n_modes: int) -> StructureMap:
    return StructureMap(np.eye(n_modes), tuple(f"m{i}" for i in range(n_modes)))


def inverse(m: StructureMap) -> StructureMap:
    return StructureMap(m.T_inv, tuple(f"inv_{lab}" for lab in m.labels))


def compose(a: StructureMap, b: StructureMap) -> StructureMap:
    """Map applying a first, then b: x'' = T_b T_a x."""
    if a.n_modes != b.n_modes:
        raise DomainError(f"mode count mismatch: {a.n_modes} vs {b.n_modes}")
    return StructureMap(b.T @ a.T, b.labels)


def cm_relative_map(masses) -> StructureMap:
    """Center of mass plus relative coordinates against the first particle.

    Row 0 is the mass-weighted average m_i / M; row a (a = 1..N) is
    x_1 - x_{1+a}.  The lift's kinetic form then carries the reduced mass of
    each (particle, oscillator) pair on the diagonal and couples the relative
    momenta pairwise.
    """
    masses = np.asarray(masses, dtype=float)
    if masses.ndim != 1 or masses.size < 2:
        raise DomainError("need at least two masses")
    if np.any(masses <= 0):
        raise DomainError("all masses must be positive")
    n = masses.size
    T = np.zeros((n, n))
    T[0] = masses / masses.sum()
    for a in range(1, n):
        T[a, 0] = 1.0
        T[a, a] = -1.0
    labels = ("cm",) + tuple(f"rel{a}" for a in range(1, n))
    return StructureMap(T, labels)


def transform_hamiltonian(H: QuadraticHamiltonian, m: StructureMap) -> QuadraticHamiltonian:
    """Re-express H in the map's coordinates: K' = S^{-T} K S^{-1}."""
    if m.n_modes != H.n_modes:
        raise DomainError(f"mode count mismatch: map {m.n_modes}, Hamiltonian {H.n_modes}")
    n = H.n_modes
    S_inv = np.zeros((2 * n, 2 * n))
    S_inv[:n, :n] = m.T_inv
    S_inv[n:, n:] = m.T.T
    K = S_inv.T @ H.K @ S_inv
    return QuadraticHamiltonian(n, (K + K.T) / 2)


def normal_mode_map(H: QuadraticHamiltonian, block) -> StructureMap:
    """Decouple the given modes: diagonalize their position and momentum blocks jointly.

    Solves the generalized symmetric eigenproblem B v = w M v, where B is the
    block's position form and M the inverse of its (positive-definite)
    momentum form, i.e. the effective mass matrix.  The returned map acts as
    the identity outside the block; inside, the new modes have unit mass and
    potential coefficients w (squared frequencies), sorted ascending.
    Degenerate frequencies are ordered lexicographically by eigenvector
    entries after fixing the first nonzero entry of each vector positive.
    """
    block = sorted(set(int(i) for i in block))
    n = H.n_modes
    if not block or block[0] < 0 or block[-1] >= n:
        raise DomainError(f"block indices out of range for {n} modes")
    idx = np.asarray(block)
    A = H.momentum_block[np.ix_(idx, idx)]
    B = H.position_block[np.ix_(idx, idx)]
    try:
        eff_mass = np.linalg.inv(scipy.linalg.cholesky(A))
        eff_mass = eff_mass @ eff_mass.T
    except np.linalg.LinAlgError as exc:
        raise DomainError("kinetic sub-matrix of the block is not positive definite") from exc

    w, V = scipy.linalg.eigh(B, eff_mass)
    for k in range(V.shape[1]):
        col = V[:, k]
        nz = np.nonzero(np.abs(col) > 1e-12)[0]
        if nz.size and col[nz[0]] < 0:
            V[:, k] = -col
    order = _tie_broken_order(w, V)
    w, V = w[order], V[:, order]

    T = np.eye(n)
    T[np.ix_(idx, idx)] = np.linalg.inv(V)
    labels = [f"m{i}" for i in range(n)]
    for rank, i in enumerate(idx):
        labels[i] = f"nm{rank + 1}"
    return StructureMap(T, tuple(labels))


def _tie_broken_order(w: np.ndarray, V: np.ndarray) -> np.ndarray:
    order = list(np.argsort(w, kind="stable"))
    scale = max(np.max(np.abs(w)), 1.0)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and abs(w[order[j + 1]] - w[order[i]]) <= 1e-12 * scale:
            j += 1
        if j > i:
            order[i : j + 1] = sorted(order[i : j + 1], key=lambda k: tuple(np.round(V[:, k], 9)))
        i = j + 1
    return np.asarray(order)


def collective_mode_map(H: QuadraticHamiltonian, masses) -> StructureMap:
    """Full restructuring pipeline: center of mass, then normal modes of the relative block.

    The composite map sends an untransformed particle + bath model to one
    collective mode ("cm") coupled bilinearly in position to mutually
    decoupled oscillators ("nm1".."nmN"), mirroring the original form.
    """
    cm = cm_relative_map(masses)
    nm = normal_mode_map(transform_hamiltonian(H, cm), range(1, H.n_modes))
    labels = ("cm",) + tuple(f"nm{a}" for a in range(1, H.n_modes))
    return StructureMap(nm.T @ cm.T, labels)


@dataclass(frozen=True)
class IrreducibilityReport:
    """Per-row support of T and T^{-1} plus the all-entries-nonzero verdict."""

    row_density: np.ndarray
    row_density_inv: np.ndarray
    min_abs_coefficient: float
    is_irreducible: bool


def irreducibility_report(m: StructureMap, split_old, split_new) -> IrreducibilityReport:
    """Quantify whether the map mixes every old coordinate into every new one.

    split_old / split_new partition the old and new mode indices into the two
    subsystems of each decomposition (first set = the distinguished open
    system).  The map is reported irreducible when every row of T and of
    T^{-1} has all entries above 1e-12 in magnitude, so no coordinate of one
    decomposition is a function of a proper subset of the other's.
    """
    n = m.n_modes
    _check_partition(split_old, n, "split_old")
    _check_partition(split_new, n, "split_new")
    dens = (np.abs(m.T) > DENSITY_TOL).sum(axis=1) / n
    dens_inv = (np.abs(m.T_inv) > DENSITY_TOL).sum(axis=1) / n
    cross_rows = np.concatenate(
        [np.abs(m.T[list(split_new[0])].ravel()), np.abs(m.T_inv[list(split_old[0])].ravel())]
    )
    return IrreducibilityReport(
        row_density=dens,
        row_density_inv=dens_inv,
        min_abs_coefficient=float(cross_rows.min()),
        is_irreducible=bool(np.all(dens == 1.0) and np.all(dens_inv == 1.0)),
    )


def _check_partition(split, n: int, name: str) -> None:
    seen: list[int] = []
    for part in split:
        seen.extend(int(i) for i in part)
    if sorted(seen) != list(range(n)):
        raise DomainError(f"{name} does not partition the {n} mode indices")


def save_structure_map(m: StructureMap, path) -> None:
    """Write T row-major in decimal with a labelled header (round-trip exact)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(SERIAL_HEADER + "\n")
        fh.write("# labels: " + " ".join(m.labels) + "\n")
        fh.write(f"# rows: {m.n_modes} cols: {m.n_modes}\n")
        for row in m.T:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def load_structure_map(path) -> StructureMap:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != SERIAL_HEADER:
        raise DomainError(f"not a structure-map file (missing header {SERIAL_HEADER!r})")
    labels = tuple(lines[1].removeprefix("# labels: ").split())
    rows = [[float(v) for v in line.split()] for line in lines[3:] if line.strip()]
    return StructureMap(np.array(rows), labels)
