"""Classical and quantum Fisher information, Cramer-Rao bounds, chart changes.

Models are objects exposing ``probs(values)`` (and, for the quantum side,
``state(values)``); when they also provide ``dprobs``/``dstate`` the
analytic derivatives are used, otherwise central finite differences with
relative step ``step`` (absolute floor 1e-9).  Plain callables are
treated as probability (or state) functions with finite differences.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

SYMMETRY_TOL = 1e-10
PSD_TOL = 1e-10
PROB_FLOOR = 1e-12
DEFAULT_STEP = 1e-6
STEP_FLOOR = 1e-9

CLASSICAL = "classical"
QUANTUM = "quantum"


class SingularModelError(ValueError):
    """An outcome has zero probability but nonvanishing derivative."""


class SingularInformationError(ValueError):
    """The information matrix is numerically singular."""

    def __init__(self, message, null_direction=None):
        self.null_direction = null_direction
        super().__init__(message)


@dataclass(frozen=True)
class ParamChart:
    """Ordered parameter labels and their values."""

    names: tuple
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if len(self.names) != len(set(self.names)):
            raise ValueError(f"duplicate parameter names in {self.names}")
        if len(self.names) != self.values.size:
            raise ValueError("chart names and values disagree in length")

    @property
    def dim(self) -> int:
        return len(self.names)


@dataclass(frozen=True)
class FisherMatrix:
    """Symmetric positive-semidefinite information matrix tagged with its chart."""

    values: np.ndarray
    chart: ParamChart
    kind: str

    def __post_init__(self):
        m = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", m)
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.T)) > SYMMETRY_TOL * scale:
            raise ValueError("information matrix is not symmetric")
        if np.min(np.linalg.eigvalsh(0.5 * (m + m.T))) < -PSD_TOL * scale:
            raise ValueError("information matrix is not positive semidefinite")


def _wrap_values(chart, values):
    return chart.values if values is None else np.asarray(values, dtype=float)


def _fd_stack(func, values, step):
    """Central-difference derivative columns of func at values."""
    cols = []
    for i in range(values.size):
        h = max(step * abs(values[i]), STEP_FLOOR)
        up = values.copy()
        dn = values.copy()
        up[i] += h
        dn[i] -= h
        cols.append((np.asarray(func(up)) - np.asarray(func(dn))) / (2.0 * h))
    return np.stack(cols, axis=1)


def _prob_derivatives(model, values, step):
    """(probs, dprobs, analytic_flag) for a model object or callable."""
    if callable(model) and not hasattr(model, "probs"):
        return np.asarray(model(values), dtype=float), _fd_stack(model, values, step), False
    p = np.asarray(model.probs(values), dtype=float)
    if hasattr(model, "dprobs"):
        return p, np.asarray(model.dprobs(values), dtype=float), True
    return p, _fd_stack(model.probs, values, step), False


def cfi_matrix(model, chart: ParamChart, values=None,
               step: float = DEFAULT_STEP) -> FisherMatrix:
    """Classical Fisher matrix I_ij = sum_n dp_i dp_j / p_n.

    With analytic derivatives, outcomes with vanishing probability enter
    through the limiting ratio (which stays finite whenever p and its
    derivative vanish at the same rate); an outcome whose probability is
    exactly zero in floating point is excluded with a warning if its
    derivative also vanishes, and raises :class:`SingularModelError`
    otherwise.  With finite differences, outcomes below the probability
    floor are excluded with a warning.
    """
    vals = _wrap_values(chart, values)
    probs, dprobs, analytic = _prob_derivatives(model, vals, step)
    p_dim = vals.size
    info = np.zeros((p_dim, p_dim))
    for n, p_n in enumerate(probs):
        grad = dprobs[n]
        if analytic:
            if p_n == 0.0:
                if np.max(np.abs(grad)) == 0.0:
                    warnings.warn(
                        f"outcome {n}: probability and derivative are exactly zero; "
                        "excluded from the information sum", stacklevel=2)
                    continue
                raise SingularModelError(
                    f"outcome {n} has zero probability but nonzero derivative")
        elif p_n < PROB_FLOOR:
            warnings.warn(
                f"outcome {n}: probability {p_n:.3g} below floor with "
                "finite-difference derivatives; excluded", stacklevel=2)
            continue
        info += np.outer(grad, grad) / p_n
    chart_at = ParamChart(chart.names, vals)
    return FisherMatrix(info, chart_at, CLASSICAL)


def _state_derivatives(model, values, step):
    if callable(model) and not hasattr(model, "state"):
        return np.asarray(model(values)), _fd_stack(model, values, step)
    psi = np.asarray(model.state(values))
    if hasattr(model, "dstate"):
        return psi, np.asarray(model.dstate(values))
    return psi, _fd_stack(model.state, values, step)


def qfi_pure(model, chart: ParamChart, values=None,
             step: float = DEFAULT_STEP) -> FisherMatrix:
    """Pure-state quantum Fisher matrix
    H_ij = 4 Re{<d_i psi|d_j psi> - <d_i psi|psi><psi|d_j psi>}."""
    vals = _wrap_values(chart, values)
    psi, dpsi = _state_derivatives(model, vals, step)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
        raise ValueError("state model output is not normalized")
    overlaps = dpsi.conj().T @ psi  # <d_i psi|psi>
    gram = dpsi.conj().T @ dpsi     # <d_i psi|d_j psi>
    h = 4.0 * np.real(gram - np.outer(overlaps, overlaps.conj()))
    h = 0.5 * (h + h.T)
    return FisherMatrix(h, ParamChart(chart.names, vals), QUANTUM)


def weak_commutativity(model, chart: ParamChart, values=None,
                       step: float = DEFAULT_STEP) -> np.ndarray:
    """Matrix Im<d_i psi|d_j psi>; all entries vanish when the symmetric
    logarithmic derivatives commute on average."""
    vals = _wrap_values(chart, values)
    _, dpsi = _state_derivatives(model, vals, step)
    return np.imag(dpsi.conj().T @ dpsi)


def condition_number(fisher: FisherMatrix) -> float:
    return float(np.linalg.cond(fisher.values))


def crb(fisher: FisherMatrix, nu: int) -> np.ndarray:
    """Covariance lower bound (nu F)^(-1) for nu independent repetitions.

    Inverted in correlation form (diagonal rescaling to unit diagonal) so
    the singularity test is invariant under per-axis unit changes, which
    can be enormous between SI-force and phase axes.
    """
    if nu < 1:
        raise ValueError(f"nu must be >= 1, got {nu}")
    m = fisher.values
    diag = np.diag(m)
    for i, d in enumerate(diag):
        if d <= 0.0:
            null = np.eye(len(diag))[i]
            raise SingularInformationError(
                f"information matrix is singular along '{fisher.chart.names[i]}'",
                null_direction=null)
    scale = 1.0 / np.sqrt(diag)
    corr = m * np.outer(scale, scale)
    evals, evecs = np.linalg.eigh(corr)
    if np.min(evals) <= 1e-12:
        null = evecs[:, int(np.argmin(evals))]
        name = fisher.chart.names[int(np.argmax(np.abs(null)))]
        raise SingularInformationError(
            f"information matrix is singular along '{name}'", null_direction=null)
    corr_inv = (evecs / evals) @ evecs.T
    return corr_inv * np.outer(scale, scale) / nu


def reparameterize(fisher: FisherMatrix, jacobian, new_chart: ParamChart) -> FisherMatrix:
    """Chart change F' = J^T F J with J_ij = d(old_i)/d(new_j)."""
    jac = np.asarray(jacobian, dtype=float)
    if jac.shape != (fisher.chart.dim, new_chart.dim):
        raise ValueError(f"jacobian shape {jac.shape} does not map charts "
                         f"{fisher.chart.names} -> {new_chart.names}")
    if abs(np.linalg.det(jac)) < 1e-300:
        raise ValueError("jacobian is singular")
    return FisherMatrix(jac.T @ fisher.values @ jac, new_chart, fisher.kind)
