"""Dense complex linear algebra over truncated spin (x) Fock spaces.

Basis ordering convention, used by every module: the spin index is the
outer (slowest) factor, Fock indices are inner, i.e. a composite state
reshapes to ``(spin_dim, n_fock)`` or ``(spin_dim, n_fock_x, n_fock_y)``
row-major.  :func:`composite_index` is the shared index helper.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import reduce

import numpy as np

HERMITICITY_TOL = 1e-12
UNITARITY_TOL = 1e-12


class ContractViolation(ValueError):
    """An operator or state violated a declared structural contract."""


@dataclass(frozen=True)
class FockSpace:
    """Truncated single-mode Fock space with levels 0..n_max."""

    n_max: int

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")

    @property
    def dim(self) -> int:
        return self.n_max + 1


def fock_operators(n_max: int):
    """Truncated (annihilate, create, number) matrices.

    annihilate[n-1, n] = sqrt(n); create is its adjoint; number is
    diagonal 0..n_max.  Truncation corrupts [a, a^dag] = 1 only in the
    last diagonal entry.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    dim = n_max + 1
    annihilate = np.diag(np.sqrt(np.arange(1.0, dim)), k=1).astype(complex)
    create = annihilate.conj().T
    number = np.diag(np.arange(dim, dtype=float)).astype(complex)
    return annihilate, create, number


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product, outer factor first (spin, then Fock modes)."""
    return reduce(np.kron, ops)


def composite_index(dims: tuple, *indices: int) -> int:
    """Flat index of |spin, n, ...> under the row-major ordering convention."""
    return int(np.ravel_multi_index(indices, dims))


def basis_state(dim: int, index: int) -> np.ndarray:
    vec = np.zeros(dim, dtype=complex)
    vec[index] = 1.0
    return vec


def vacuum(space: FockSpace) -> np.ndarray:
    return basis_state(space.dim, 0)


def is_hermitian(op: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    scale = max(1.0, float(np.max(np.abs(op))) if op.size else 1.0)
    return float(np.max(np.abs(op - op.conj().T))) <= tol * scale


def check_unitary(op: np.ndarray, tol: float = UNITARITY_TOL) -> float:
    """Return the max-abs deviation of U^dag U from the identity."""
    dim = op.shape[0]
    return float(np.max(np.abs(op.conj().T @ op - np.eye(dim))))


def evolve_unitary(hamiltonian: np.ndarray, t: float) -> np.ndarray:
    """Propagator exp(-i H t) (hbar = 1) via Hermitian eigendecomposition.

    Exactly unitary up to roundoff; raises ContractViolation for
    non-Hermitian input.
    """
    if not is_hermitian(hamiltonian):
        raise ContractViolation("evolve_unitary requires a Hermitian matrix")
    evals, evecs = np.linalg.eigh(hamiltonian)
    phases = np.exp(-1j * evals * t)
    return (evecs * phases) @ evecs.conj().T


def coherent_state(alpha: complex, space: FockSpace) -> np.ndarray:
    """Truncated coherent state, renormalized after the cutoff.

    Warns when |alpha|^2 > n_max / 4, the regime where the truncated tail
    starts to matter.
    """
    if abs(alpha) ** 2 > space.n_max / 4.0:
        warnings.warn(
            f"coherent state with |alpha|^2 = {abs(alpha)**2:.3g} may be "
            f"poorly represented at n_max = {space.n_max}",
            stacklevel=2,
        )
    n = np.arange(space.dim)
    if alpha == 0:
        return vacuum(space)
    # alpha^n / sqrt(n!) evaluated in log space to stay finite at large n
    from scipy.special import gammaln

    log_mag = n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1.0)
    amps = np.exp(log_mag - abs(alpha) ** 2 / 2.0) * np.exp(1j * n * np.angle(alpha))
    return amps / np.linalg.norm(amps)
