"""Builders for the interaction Hamiltonians, effective models, and generators.

Two probe models are supported:

* three-state Lambda system coupled to one motional mode, spin basis
  ordered (1, -1, 0);
* five-state four-pod system coupled to two motional modes, spin basis
  ordered (-2, -1, 1, 2, 0).

The interaction Hamiltonian splits as H_total = H0 + H_couple + H_force
with H0 diagonal (mode energies plus spin detunings).  The adiabatic
elimination of the modes uses an anti-Hermitian generator S defined by
H_couple + H_force + [H0, S] = 0, solved exactly and elementwise over the
H0 eigenbasis; the textbook closed form (detuning-free denominators) is
kept separately for constructing the residual coupling term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import FockSpace, composite_index, fock_operators, tensor, evolve_unitary
from .params import (
    FOURPOD,
    LAMBDA,
    InternalParams,
    InvalidParameterError,
    ProtocolParams,
    derive_internal,
)


@dataclass(frozen=True)
class SystemModel:
    kind: str
    spin_dim: int
    mode_count: int
    labels: tuple  # spin quantum numbers m, in basis order

    def label_index(self, m: int) -> int:
        return self.labels.index(m)


LAMBDA3 = SystemModel(LAMBDA, 3, 1, (1, -1, 0))
FOURPOD5 = SystemModel(FOURPOD, 5, 2, (-2, -1, 1, 2, 0))


def model_for(kind: str) -> SystemModel:
    return LAMBDA3 if kind == LAMBDA else FOURPOD5


@dataclass(frozen=True)
class HamiltonianSet:
    """All pieces of one interaction model on the truncated composite space.

    ``s_generator`` solves the elimination condition exactly (None when the
    mode detuning vanishes and no generator exists).  ``h_res`` collects the
    second-order terms beyond the effective spin couplings, projected onto
    the interior Fock levels where the truncated commutator algebra is
    faithful, and referenced so its ground-state diagonal entry is zero.
    """

    model: SystemModel
    spaces: tuple
    h0: np.ndarray
    h_couple: np.ndarray
    h_force: np.ndarray
    h_total: np.ndarray
    s_generator: np.ndarray | None
    h_res: np.ndarray | None


def _spin_op(dim: int, entries) -> np.ndarray:
    op = np.zeros((dim, dim), dtype=complex)
    for (i, j), v in entries.items():
        op[i, j] = v
    return op


def _proj(dim: int, idx: int) -> np.ndarray:
    return _spin_op(dim, {(idx, idx): 1.0})


def _internal(p) -> InternalParams:
    if isinstance(p, ProtocolParams):
        return derive_internal(p)
    if isinstance(p, InternalParams):
        return p
    raise TypeError(f"expected ProtocolParams or InternalParams, got {type(p)}")


def _solve_generator(h0: np.ndarray, h_sb: np.ndarray) -> np.ndarray:
    """Anti-Hermitian S with H_sb + [H0, S] = 0, elementwise over diag(H0)."""
    energies = np.diag(h0).real
    gaps = energies[:, None] - energies[None, :]
    degenerate = np.abs(gaps) < 1e-9
    if np.max(np.abs(h_sb[degenerate])) > 1e-12:
        raise InvalidParameterError(
            "coupling connects degenerate levels of H0; no generator exists "
            "(mode detuning too close to a spin detuning multiple)"
        )
    s = np.zeros_like(h_sb)
    s[~degenerate] = -h_sb[~degenerate] / gaps[~degenerate]
    return s


def _interior_projector(model: SystemModel, spaces) -> np.ndarray:
    """Diagonal projector excluding the top Fock level of each mode."""
    keep = [np.eye(model.spin_dim)]
    for space in spaces:
        d = np.ones(space.dim)
        d[-1] = 0.0
        keep.append(np.diag(d))
    return tensor(*keep).astype(complex)


def _residual_term(model, spaces, h_sb, s_printed, coupling_spin):
    """H_res = interior projection of [H_sb, S]/2 minus the spin couplings."""
    identities = [np.eye(s.dim, dtype=complex) for s in spaces]
    k_eff = tensor(coupling_spin, *identities)
    m = 0.5 * (h_sb @ s_printed - s_printed @ h_sb) - k_eff
    proj = _interior_projector(model, spaces)
    m = proj @ m @ proj
    # reference: zero the |0, vac> diagonal entry
    dims = (model.spin_dim,) + tuple(s.dim for s in spaces)
    vac = composite_index(dims, model.label_index(0), *((0,) * model.mode_count))
    m = m - m[vac, vac] * proj
    return m


# --------------------------------------------------------------------------
# three-state Lambda model
# --------------------------------------------------------------------------

def build_lambda(p, space: FockSpace) -> HamiltonianSet:
    """Interaction Hamiltonian of the Lambda model on span{1,-1,0} x Fock.

    H0 = omega n + delta |1><1|, H_couple = g(a^dag|1><0| + a|-1><0| + h.c.),
    H_force = beta*omega*(a^dag e^{i xi} + a e^{-i xi}).
    """
    ip = _internal(p)
    if ip.kind != LAMBDA:
        raise InvalidParameterError("build_lambda requires lambda-protocol parameters")
    model = LAMBDA3
    a, adag, num = fock_operators(space.n_max)
    eye_f = np.eye(space.dim, dtype=complex)
    eye_s = np.eye(3, dtype=complex)

    up, down, ground = 0, 1, 2  # basis positions of |1>, |-1>, |0>
    t_up = _spin_op(3, {(up, ground): 1.0})      # |1><0|
    t_down = _spin_op(3, {(down, ground): 1.0})  # |-1><0|

    h0 = ip.omega * tensor(eye_s, num) + ip.delta * tensor(_proj(3, up), eye_f)
    hc = ip.g * (tensor(t_up, adag) + tensor(t_down, a))
    hc = hc + hc.conj().T
    hf = ip.force_coef * (np.exp(1j * ip.xi) * tensor(eye_s, adag)
                          + np.exp(-1j * ip.xi) * tensor(eye_s, a))
    h_total = h0 + hc + hf

    s_gen = h_res = None
    if ip.omega != 0:
        s_gen = _solve_generator(h0, hc + hf)
        s_printed = (
            (ip.g / ip.omega) * (tensor(t_down + t_up.conj().T, a)
                                 - tensor(t_down.conj().T + t_up, adag))
            + ip.beta * (np.exp(-1j * ip.xi) * tensor(eye_s, a)
                         - np.exp(1j * ip.xi) * tensor(eye_s, adag))
        )
        h_res = _residual_term(
            model, (space,), hc + hf, s_printed,
            _lambda_coupling(ip.rabi, ip.xi),
        )

    return HamiltonianSet(model, (space,), h0, hc, hf, h_total, s_gen, h_res)


def _lambda_coupling(rabi: float, xi: float) -> np.ndarray:
    """-Omega(e^{i xi}|0><1| + e^{-i xi}|0><-1| + h.c.) on (1,-1,0)."""
    h = _spin_op(3, {(2, 0): -rabi * np.exp(1j * xi),
                     (2, 1): -rabi * np.exp(-1j * xi)})
    return h + h.conj().T


def effective_lambda(p) -> np.ndarray:
    """Effective 3x3 spin Hamiltonian on the motional ground state.

    Includes the second-order light shift (delta + g^2/omega)|1><1|, which
    vanishes at the auto-compensating detuning.
    """
    ip = _internal(p)
    if ip.kind != LAMBDA:
        raise InvalidParameterError("effective_lambda requires lambda-protocol parameters")
    shift = ip.delta + ip.g**2 / ip.omega
    return _lambda_coupling(ip.rabi, ip.xi) + shift * _proj(3, 0)


# --------------------------------------------------------------------------
# five-state four-pod model
# --------------------------------------------------------------------------

def build_fourpod(p, space_x: FockSpace, space_y: FockSpace | None = None) -> HamiltonianSet:
    """Interaction Hamiltonian of the four-pod model on 5 x Fock_x x Fock_y."""
    ip = _internal(p)
    if ip.kind != FOURPOD:
        raise InvalidParameterError("build_fourpod requires fourpod-protocol parameters")
    if space_y is None:
        space_y = space_x
    model = FOURPOD5
    ax, adx, numx = fock_operators(space_x.n_max)
    ay, ady, numy = fock_operators(space_y.n_max)
    ex = np.eye(space_x.dim, dtype=complex)
    ey = np.eye(space_y.dim, dtype=complex)
    e5 = np.eye(5, dtype=complex)

    idx = {m: model.label_index(m) for m in model.labels}
    tr = lambda m1, m2: _spin_op(5, {(idx[m1], idx[m2]): 1.0})  # |m1><m2|

    h0 = (ip.omega * (tensor(e5, numx, ey) + tensor(e5, ex, numy))
          + ip.delta * tensor(_proj(5, idx[2]) + _proj(5, idx[1]) - _proj(5, idx[0]),
                              ex, ey))

    # x mode: a_x^dag couples |0><-1|, |0><-2| and |1><0|, |2><0|
    gx = tr(0, -1) + tr(0, -2) + tr(1, 0) + tr(2, 0)
    hx = ip.g * tensor(gx, adx, ey)
    hx = hx + hx.conj().T
    # y mode: same pairs with the relative minus sign and the i factor
    gy = tr(0, -1) - tr(0, -2) + tr(1, 0) - tr(2, 0)
    ahy = tensor(gy, ex, ady)
    hy = 1j * ip.g * (ahy - ahy.conj().T)

    hf = ip.force_coef_x * (np.exp(1j * ip.xi) * tensor(e5, adx, ey)
                            + np.exp(-1j * ip.xi) * tensor(e5, ax, ey)) \
       + ip.force_coef_y * (np.exp(1j * ip.xi) * tensor(e5, ex, ady)
                            + np.exp(-1j * ip.xi) * tensor(e5, ex, ay))
    h_couple = hx + hy
    h_total = h0 + h_couple + hf

    s_gen = h_res = None
    if ip.omega != 0:
        s_gen = _solve_generator(h0, h_couple + hf)
        sx = ((ip.g / ip.omega) * (tensor(gx.conj().T, ax, ey) - tensor(gx, adx, ey))
              + ip.beta_x * (np.exp(-1j * ip.xi) * tensor(e5, ax, ey)
                             - np.exp(1j * ip.xi) * tensor(e5, adx, ey)))
        sy_core = tensor(gy.conj().T, ex, ay)
        sy = (-1j * (ip.g / ip.omega) * (sy_core + sy_core.conj().T)
              + ip.beta_y * (np.exp(-1j * ip.xi) * tensor(e5, ex, ay)
                             - np.exp(1j * ip.xi) * tensor(e5, ex, ady)))
        h_res = _residual_term(
            model, (space_x, space_y), h_couple + hf, sx + sy,
            _fourpod_coupling(ip.rabi, ip.xi, ip.phi),
        )

    return HamiltonianSet(model, (space_x, space_y), h0, h_couple, hf, h_total,
                          s_gen, h_res)


def _fourpod_coupling(rabi: float, xi: float, phi: float) -> np.ndarray:
    """-Omega(e^{i phi+}|-2> + e^{i phi-}|-1> + e^{-i phi-}|1> + e^{-i phi+}|2>)<0| + h.c."""
    pp, pm = xi + phi, xi - phi
    col = {(0, 4): -rabi * np.exp(1j * pp),
           (1, 4): -rabi * np.exp(1j * pm),
           (2, 4): -rabi * np.exp(-1j * pm),
           (3, 4): -rabi * np.exp(-1j * pp)}
    h = _spin_op(5, col)
    return h + h.conj().T


def effective_fourpod(p) -> np.ndarray:
    """Effective 5x5 spin Hamiltonian on the two-mode motional ground state.

    The residual light shift (delta + 2 g^2/omega)(|1><1| + |2><2| - |0><0|)
    vanishes at the auto-compensating detuning.
    """
    ip = _internal(p)
    if ip.kind != FOURPOD:
        raise InvalidParameterError("effective_fourpod requires fourpod-protocol parameters")
    shift = ip.delta + 2.0 * ip.g**2 / ip.omega
    diag = shift * (_proj(5, 2) + _proj(5, 3) - _proj(5, 4))
    return _fourpod_coupling(ip.rabi, ip.xi, ip.phi) + diag


# --------------------------------------------------------------------------
# diagnostics and displacement
# --------------------------------------------------------------------------

def generator_residual(hset: HamiltonianSet, projected: bool = True) -> float:
    """Max-abs entry of P(H_sb + [H0, S])P, the elimination-condition defect.

    P projects out the top Fock level of each mode (the truncation
    boundary); pass ``projected=False`` to inspect the full matrix.
    """
    if hset.s_generator is None:
        raise InvalidParameterError("Hamiltonian set carries no generator")
    h_sb = hset.h_couple + hset.h_force
    res = h_sb + hset.h0 @ hset.s_generator - hset.s_generator @ hset.h0
    if projected:
        proj = _interior_projector(hset.model, hset.spaces)
        res = proj @ res @ proj
    return float(np.max(np.abs(res)))


def displacement_unitary(f_dimensionless: float, xi: float, space: FockSpace) -> np.ndarray:
    """exp(F (a^dag e^{i xi} - a e^{-i xi})); maps vacuum to the coherent
    state with alpha = F e^{i xi}."""
    import warnings

    if f_dimensionless**2 > space.n_max / 4.0:
        warnings.warn(
            f"displacement F = {f_dimensionless:.3g} risks truncation error "
            f"at n_max = {space.n_max}",
            stacklevel=2,
        )
    a, adag, _ = fock_operators(space.n_max)
    gen = f_dimensionless * (np.exp(1j * xi) * adag - np.exp(-1j * xi) * a)
    # e^G with G anti-Hermitian, via the unitary evolver on iG
    return evolve_unitary(1j * gen, 1.0)
