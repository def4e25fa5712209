"""Full measurement-protocol simulation on the truncated composite space.

The protocol: prepare |0> (x) motional vacuum, evolve under the exact
interaction Hamiltonian, apply the pi/2 pulse(s) on the spin factor, then
read out the atomic populations (marginalizing over all Fock indices).
Evolution uses a single Hermitian eigendecomposition of H_total, so
arbitrary readout times cost one matrix-vector contraction each.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import hamiltonians as ham
from .hilbert import FockSpace, composite_index
from .params import FOURPOD, LAMBDA, InternalParams, ProtocolParams, derive_internal

PROB_SUM_TOL = 1e-10
NORM_TOL = 1e-12


@dataclass(frozen=True)
class ProbabilityTrajectory:
    """Atomic populations p_m(t); columns follow model.labels order."""

    times: np.ndarray
    probabilities: np.ndarray  # (n_times, spin_dim)
    model: ham.SystemModel

    def column(self, m: int) -> np.ndarray:
        return self.probabilities[:, self.model.label_index(m)]


def pulse_matrix(model: ham.SystemModel) -> np.ndarray:
    """Spin-only pi/2 pulse unitary.

    Lambda mapping |+-1> -> (|1> -+ |-1>)/sqrt2; four-pod mapping
    |+-1> -> (|1> +- |-1>)/sqrt2 and |+-2> -> (|2> +- |-2>)/sqrt2.
    The sign conventions are unobservable in the populations; each model
    uses the form under which the analytic post-pulse states are
    reproduced.
    """
    s = 1.0 / np.sqrt(2.0)
    if model.kind == LAMBDA:
        # basis (1, -1, 0)
        return np.array([[s, s, 0.0], [-s, s, 0.0], [0.0, 0.0, 1.0]], dtype=complex)
    # basis (-2, -1, 1, 2, 0); blocks on (-1,1) and (-2,2)
    u = np.zeros((5, 5), dtype=complex)
    for lo, hi in ((1, 2), (0, 3)):  # (|-1>,|1>) and (|-2>,|2>) index pairs
        u[lo, lo] = -s
        u[lo, hi] = s
        u[hi, lo] = s
        u[hi, hi] = s
    u[4, 4] = 1.0
    return u


def apply_pi_half(psi: np.ndarray, model: ham.SystemModel) -> np.ndarray:
    """Apply the pi/2 pulse(s) to a composite-space state."""
    fock_dim = psi.size // model.spin_dim
    if model.spin_dim * fock_dim != psi.size:
        raise ValueError(
            f"state of size {psi.size} does not factor over {model.spin_dim} spin levels"
        )
    blocks = psi.reshape(model.spin_dim, fock_dim)
    return (pulse_matrix(model) @ blocks).reshape(-1)


def evolve_populations(hset: ham.HamiltonianSet, psi0: np.ndarray,
                       times) -> np.ndarray:
    """States exp(-i H_total t)|psi0> at each time, via one eigendecomposition."""
    if abs(np.linalg.norm(psi0) - 1.0) > NORM_TOL:
        raise ValueError("psi0 must be normalized")
    times = np.asarray(times, dtype=float)
    evals, evecs = np.linalg.eigh(hset.h_total)
    coeffs = evecs.conj().T @ psi0
    phases = np.exp(-1j * np.outer(times, evals))  # (n_times, dim)
    return (phases * coeffs) @ evecs.T  # row t: evecs @ (phases_t * coeffs)


def initial_state(model: ham.SystemModel, spaces) -> np.ndarray:
    """|0> (x) vacuum(s) on the composite space."""
    dims = (model.spin_dim,) + tuple(s.dim for s in spaces)
    psi = np.zeros(int(np.prod(dims)), dtype=complex)
    psi[composite_index(dims, model.label_index(0), *((0,) * model.mode_count))] = 1.0
    return psi


def _populations(states: np.ndarray, model: ham.SystemModel) -> np.ndarray:
    nt = states.shape[0]
    blocks = states.reshape(nt, model.spin_dim, -1)
    probs = np.sum(np.abs(blocks) ** 2, axis=2)
    sums = probs.sum(axis=1)
    if np.max(np.abs(sums - 1.0)) > PROB_SUM_TOL:
        raise RuntimeError(f"population sum deviates by {np.max(np.abs(sums - 1.0)):.3e}")
    return np.clip(probs, 0.0, 1.0)


def build_set(p, n_max: int | None = None) -> ham.HamiltonianSet:
    """Construct the HamiltonianSet for either protocol from parameters."""
    ip = p if isinstance(p, InternalParams) else derive_internal(p)
    if n_max is None:
        n_max = p.run.n_max if isinstance(p, ProtocolParams) else 15
    space = FockSpace(n_max)
    if ip.kind == LAMBDA:
        return ham.build_lambda(ip, space)
    return ham.build_fourpod(ip, space, FockSpace(n_max))


def run_protocol(p, times, n_max: int | None = None) -> ProbabilityTrajectory:
    """Simulate the measurement protocol and return post-pulse populations.

    Parameters
    ----------
    p : ProtocolParams or InternalParams
        Validated protocol parameters.
    times : array-like
        Readout times in ms, ascending from 0.
    n_max : int, optional
        Fock truncation per mode (default: the run config's value).
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1-D array")
    if np.any(np.diff(times) < 0) or times[0] < 0:
        raise ValueError("times must be sorted ascending from 0")
    hset = build_set(p, n_max)
    psi0 = initial_state(hset.model, hset.spaces)
    states = evolve_populations(hset, psi0, times)
    fock_dim = states.shape[1] // hset.model.spin_dim
    pulse = pulse_matrix(hset.model)
    blocks = states.reshape(len(times), hset.model.spin_dim, fock_dim)
    pulsed = np.einsum("ij,tjk->tik", pulse, blocks).reshape(len(times), -1)
    return ProbabilityTrajectory(times, _populations(pulsed, hset.model), hset.model)


def default_times(p, n_points: int = 400, n_periods: float = 2.0) -> np.ndarray:
    """Uniform grid over ``n_periods`` effective Rabi oscillation periods."""
    ip = p if isinstance(p, InternalParams) else derive_internal(p)
    rabi = abs(ip.rabi)
    if rabi == 0:
        raise ValueError("zero effective Rabi frequency; supply explicit times")
    factor = np.sqrt(2.0) if ip.kind == LAMBDA else 2.0
    period = np.pi / (factor * rabi)
    return np.linspace(0.0, n_periods * period, n_points)


def truncation_shift(p, times, n_max: int) -> float:
    """Max-abs change of every reported probability when n_max is doubled."""
    base = run_protocol(p, times, n_max=n_max)
    fine = run_protocol(p, times, n_max=2 * n_max)
    return float(np.max(np.abs(base.probabilities - fine.probabilities)))


def analytic_trajectory(p, times) -> ProbabilityTrajectory:
    """Closed-form post-pulse populations on the same grid and column order."""
    from . import analytic

    ip = p if isinstance(p, InternalParams) else derive_internal(p)
    times = np.asarray(times, dtype=float)
    if ip.kind == LAMBDA:
        probs = analytic.probs_lambda(ip.rabi * times, ip.xi).T
        return ProbabilityTrajectory(times, probs, ham.LAMBDA3)
    probs = analytic.probs_fourpod(ip.rabi * times, ip.xi, ip.phi).T
    return ProbabilityTrajectory(times, probs, ham.FOURPOD5)
