"""Closed-form effective-model results: resonant propagators, post-pulse
states, and their population formulas.

These are the oracles the full numerical evolution is checked against and
the smooth parameterized models the Fisher-information and estimation
machinery differentiates.  Basis orderings match :mod:`.hamiltonians`:
(1, -1, 0) for the three-state model, (-2, -1, 1, 2, 0) for the
five-state model.

Both propagators are rank-2 rotations in the span of the ground state and
a single bright superposition of the coupled excited states,
parameterized by the resonant Cayley-Klein pair (a, b) with
|a|^2 + |b|^2 = 1.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

SQRT2 = np.sqrt(2.0)


class CayleyKlein(NamedTuple):
    """Resonant propagator parameters a = cos(A/2), b = -i sin(A/2)."""

    a: complex
    b: complex


def cayley_klein(pulse_area: float) -> CayleyKlein:
    return CayleyKlein(np.cos(pulse_area / 2.0), -1j * np.sin(pulse_area / 2.0))


def _bright_state_propagator(bright: np.ndarray, ground_index: int,
                             ck: CayleyKlein) -> np.ndarray:
    """U = 1 + (a-1)(|B><B| + |0><0|) + b(|B><0| + |0><B|)."""
    dim = bright.shape[0]
    g = np.zeros(dim, dtype=complex)
    g[ground_index] = 1.0
    u = np.eye(dim, dtype=complex)
    u += (ck.a - 1.0) * (np.outer(bright, bright.conj()) + np.outer(g, g))
    u += ck.b * (np.outer(bright, g) + np.outer(g, bright.conj()))
    return u


def propagator_lambda(omega_t: float, xi: float) -> np.ndarray:
    """3x3 resonant propagator, pulse area A = 2 sqrt(2) Omega t."""
    ck = cayley_klein(2.0 * SQRT2 * omega_t)
    bright = np.array([np.exp(-1j * xi), np.exp(1j * xi), 0.0]) / SQRT2
    return _bright_state_propagator(bright, 2, ck)


def propagator_fourpod(omega_t: float, xi: float, phi: float) -> np.ndarray:
    """5x5 resonant propagator, a = cos(2 Omega t), b = -i sin(2 Omega t)."""
    ck = cayley_klein(4.0 * omega_t)
    pp, pm = xi + phi, xi - phi
    bright = np.array([np.exp(1j * pp), np.exp(1j * pm),
                       np.exp(-1j * pm), np.exp(-1j * pp), 0.0]) / 2.0
    return _bright_state_propagator(bright, 4, ck)


# --------------------------------------------------------------------------
# post-pulse states and populations
# --------------------------------------------------------------------------

def post_pulse_state_lambda(omega_t: float, xi: float) -> np.ndarray:
    """State after evolution plus the pi/2 pulse, in basis (1, -1, 0):
    sin(sqrt2 Omega t)(sin xi |-1> - i cos xi |1>) + cos(sqrt2 Omega t)|0>."""
    s, c = np.sin(SQRT2 * omega_t), np.cos(SQRT2 * omega_t)
    return np.array([-1j * s * np.cos(xi), s * np.sin(xi) + 0j, c + 0j])


def post_pulse_state_fourpod(omega_t: float, xi: float, phi: float) -> np.ndarray:
    """State after evolution plus the two pi/2 pulses, basis (-2,-1,1,2,0).

    cos(2 Omega t)|0> - (i/sqrt2) sin(2 Omega t) {cos phi+ |2> + i sin phi+ |-2>
    + cos phi- |1> + i sin phi- |-1>}, with the sin(2 Omega t) factor on the
    braced superposition restoring normalization for all arguments.
    """
    s, c = np.sin(2.0 * omega_t), np.cos(2.0 * omega_t)
    pp, pm = xi + phi, xi - phi
    f = -1j / SQRT2 * s
    return np.array([f * 1j * np.sin(pp), f * 1j * np.sin(pm),
                     f * np.cos(pm), f * np.cos(pp), c + 0j])


def probs_lambda(omega_t, xi) -> np.ndarray:
    """Populations (p_1, p_-1, p_0); broadcasts over array arguments.

    cos^2 is evaluated directly (not as 1 - sin^2) so the ground-state
    population stays strictly positive near the pulse-area optimum, where
    the Fisher sum needs the finite limiting ratio (dp)^2 / p.
    """
    theta = SQRT2 * np.asarray(omega_t)
    s2 = np.sin(theta) ** 2
    c2 = np.cos(theta) ** 2
    return np.stack(np.broadcast_arrays(
        s2 * np.cos(xi) ** 2, s2 * np.sin(xi) ** 2, c2))


def probs_fourpod(omega_t, xi, phi) -> np.ndarray:
    """Populations (p_-2, p_-1, p_1, p_2, p_0); broadcasts over arrays."""
    theta = 2.0 * np.asarray(omega_t)
    s2 = np.sin(theta) ** 2
    c2 = np.cos(theta) ** 2
    pp, pm = np.asarray(xi) + np.asarray(phi), np.asarray(xi) - np.asarray(phi)
    return np.stack(np.broadcast_arrays(
        0.5 * s2 * np.sin(pp) ** 2, 0.5 * s2 * np.sin(pm) ** 2,
        0.5 * s2 * np.cos(pm) ** 2, 0.5 * s2 * np.cos(pp) ** 2, c2))


# --------------------------------------------------------------------------
# smooth parameterized models for Fisher analysis and estimation
# --------------------------------------------------------------------------

class LambdaModel:
    """Post-pulse model at a fixed readout time, chart (Omega, xi).

    Provides populations, the state vector, and their analytic first
    derivatives; outcome order (p_1, p_-1, p_0).
    """

    names = ("Omega", "xi")
    outcomes = (1, -1, 0)

    def __init__(self, t: float):
        self.t = float(t)

    def probs(self, values) -> np.ndarray:
        om, xi = values
        return probs_lambda(om * self.t, xi)

    def dprobs(self, values) -> np.ndarray:
        om, xi = values
        th = SQRT2 * om * self.t
        s2t = np.sin(2.0 * th)  # d(sin^2)/d(theta)
        cx2, sx2 = np.cos(xi) ** 2, np.sin(xi) ** 2
        sin2 = np.sin(th) ** 2
        dth = SQRT2 * self.t
        return np.array([
            [dth * s2t * cx2, -sin2 * np.sin(2 * xi)],
            [dth * s2t * sx2, sin2 * np.sin(2 * xi)],
            [-dth * s2t, 0.0],
        ])

    def state(self, values) -> np.ndarray:
        om, xi = values
        return post_pulse_state_lambda(om * self.t, xi)

    def dstate(self, values) -> np.ndarray:
        om, xi = values
        th = SQRT2 * om * self.t
        s, c = np.sin(th), np.cos(th)
        dth = SQRT2 * self.t
        d_om = np.array([-1j * c * np.cos(xi), c * np.sin(xi) + 0j, -s + 0j]) * dth
        d_xi = np.array([1j * s * np.sin(xi), s * np.cos(xi) + 0j, 0j])
        return np.stack([d_om, d_xi], axis=1)


class FourPodModel:
    """Post-pulse model at a fixed readout time, chart (Omega, xi, phi).

    Outcome order (p_-2, p_-1, p_1, p_2, p_0).
    """

    names = ("Omega", "xi", "phi")
    outcomes = (-2, -1, 1, 2, 0)

    def __init__(self, t: float):
        self.t = float(t)

    def probs(self, values) -> np.ndarray:
        om, xi, phi = values
        return probs_fourpod(om * self.t, xi, phi)

    def dprobs(self, values) -> np.ndarray:
        om, xi, phi = values
        th = 2.0 * om * self.t
        s2, s2t = np.sin(th) ** 2, np.sin(2.0 * th)
        pp, pm = xi + phi, xi - phi
        dth = 2.0 * self.t
        # d/d(pp or pm) of the half-sin^2/cos^2 factors
        dspp, dcpp = 0.5 * s2 * np.sin(2 * pp), -0.5 * s2 * np.sin(2 * pp)
        dspm, dcpm = 0.5 * s2 * np.sin(2 * pm), -0.5 * s2 * np.sin(2 * pm)
        d_om = dth * s2t * np.array([0.5 * np.sin(pp) ** 2, 0.5 * np.sin(pm) ** 2,
                                     0.5 * np.cos(pm) ** 2, 0.5 * np.cos(pp) ** 2,
                                     -1.0])
        d_xi = np.array([dspp, dspm, dcpm, dcpp, 0.0])
        d_phi = np.array([dspp, -dspm, -dcpm, dcpp, 0.0])
        return np.stack([d_om, d_xi, d_phi], axis=1)

    def state(self, values) -> np.ndarray:
        om, xi, phi = values
        return post_pulse_state_fourpod(om * self.t, xi, phi)

    def dstate(self, values) -> np.ndarray:
        om, xi, phi = values
        th = 2.0 * om * self.t
        s, c = np.sin(th), np.cos(th)
        pp, pm = xi + phi, xi - phi
        f = -1j / SQRT2
        dth = 2.0 * self.t
        d_om = dth * np.array([f * c * 1j * np.sin(pp), f * c * 1j * np.sin(pm),
                               f * c * np.cos(pm), f * c * np.cos(pp), -s + 0j])
        base_pp = np.array([f * s * 1j * np.cos(pp), 0j, 0j,
                            -f * s * np.sin(pp), 0j])
        base_pm = np.array([0j, f * s * 1j * np.cos(pm),
                            -f * s * np.sin(pm), 0j, 0j])
        d_xi = base_pp + base_pm
        d_phi = base_pp - base_pm
        return np.stack([d_om, d_xi, d_phi], axis=1)
