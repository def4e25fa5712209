"""Grid-scan kernels for the maximum-likelihood search.

The per-replication log-likelihood scan over the parameter grid is the
hot inner loop of the covariance studies.  Two interchangeable paths:

* a numba ``@njit`` kernel that fuses the trig model evaluation with the
  scan (no large temporaries), used by default when numba imports;
* a pure-numpy fallback that precomputes a log-probability table and
  reduces it with a dot product.

Set ``IONSENSE_NO_NUMBA=1`` to force the numpy path.
``benchmarks/bench_mle.py`` compares the two end to end.
"""

from __future__ import annotations

import os

import numpy as np

SQRT2 = np.sqrt(2.0)
LOG_FLOOR = 1e-300

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


def numba_enabled() -> bool:
    return HAVE_NUMBA and os.environ.get("IONSENSE_NO_NUMBA", "") not in (
        "1", "true", "yes",
    )


# --------------------------------------------------------------------------
# numba path: fused trig + scan
# --------------------------------------------------------------------------

@njit(cache=True)
def _scan_lambda_njit(counts, times, om_grid, xi_grid):  # pragma: no cover - compiled
    n_om = om_grid.size
    n_xi = xi_grid.size
    n_t = times.size
    log_cx2 = np.empty(n_xi)
    log_sx2 = np.empty(n_xi)
    for j in range(n_xi):
        c2 = np.cos(xi_grid[j]) ** 2
        log_cx2[j] = np.log(max(c2, LOG_FLOOR))
        log_sx2[j] = np.log(max(1.0 - c2, LOG_FLOOR))
    best = -np.inf
    best_i = 0
    best_j = 0
    for i in range(n_om):
        # xi-independent pieces, accumulated over times
        base = 0.0
        w_exc = 0.0  # total weight multiplying log(sin^2 theta_t) terms
        for t in range(n_t):
            s2 = np.sin(SQRT2 * om_grid[i] * times[t]) ** 2
            log_s2 = np.log(max(s2, LOG_FLOOR))
            base += (counts[t, 0] + counts[t, 1]) * log_s2
            base += counts[t, 2] * np.log(max(1.0 - s2, LOG_FLOOR))
        c0 = 0.0
        c1 = 0.0
        for t in range(n_t):
            c0 += counts[t, 0]
            c1 += counts[t, 1]
        for j in range(n_xi):
            ll = base + c0 * log_cx2[j] + c1 * log_sx2[j]
            if ll > best:
                best = ll
                best_i = i
                best_j = j
    return best_i, best_j, best


@njit(cache=True)
def _scan_fourpod_njit(counts, times, om_grid, pp_grid, pm_grid):  # pragma: no cover
    n_om = om_grid.size
    n_pp = pp_grid.size
    n_pm = pm_grid.size
    n_t = times.size
    log_cp2 = np.empty(n_pp)
    log_sp2 = np.empty(n_pp)
    for j in range(n_pp):
        c2 = np.cos(pp_grid[j]) ** 2
        log_cp2[j] = np.log(max(c2, LOG_FLOOR))
        log_sp2[j] = np.log(max(1.0 - c2, LOG_FLOOR))
    log_cm2 = np.empty(n_pm)
    log_sm2 = np.empty(n_pm)
    for k in range(n_pm):
        c2 = np.cos(pm_grid[k]) ** 2
        log_cm2[k] = np.log(max(c2, LOG_FLOOR))
        log_sm2[k] = np.log(max(1.0 - c2, LOG_FLOOR))
    n_m2 = 0.0
    n_m1 = 0.0
    n_p1 = 0.0
    n_p2 = 0.0
    for t in range(n_t):
        n_m2 += counts[t, 0]
        n_m1 += counts[t, 1]
        n_p1 += counts[t, 2]
        n_p2 += counts[t, 3]
    log_half = np.log(0.5)
    best = -np.inf
    best_i = 0
    best_j = 0
    best_k = 0
    for i in range(n_om):
        base = (n_m2 + n_m1 + n_p1 + n_p2) * log_half
        for t in range(n_t):
            s2 = np.sin(2.0 * om_grid[i] * times[t]) ** 2
            log_s2 = np.log(max(s2, LOG_FLOOR))
            base += (counts[t, 0] + counts[t, 1] + counts[t, 2] + counts[t, 3]) * log_s2
            base += counts[t, 4] * np.log(max(1.0 - s2, LOG_FLOOR))
        for j in range(n_pp):
            partial = base + n_m2 * log_sp2[j] + n_p2 * log_cp2[j]
            for k in range(n_pm):
                ll = partial + n_m1 * log_sm2[k] + n_p1 * log_cm2[k]
                if ll > best:
                    best = ll
                    best_i = i
                    best_j = j
                    best_k = k
    return best_i, best_j, best_k, best


# --------------------------------------------------------------------------
# numpy fallback: log-probability table + dot
# --------------------------------------------------------------------------

def lambda_logprob_table(times, om_grid, xi_grid) -> np.ndarray:
    """log p_m on the grid, shape (n_times, 3, n_om, n_xi)."""
    s2 = np.sin(SQRT2 * np.multiply.outer(times, om_grid)) ** 2  # (T, n_om)
    cx2 = np.cos(xi_grid) ** 2
    sx2 = 1.0 - cx2
    table = np.empty((times.size, 3, om_grid.size, xi_grid.size))
    for t in range(times.size):
        table[t, 0] = np.outer(s2[t], cx2)
        table[t, 1] = np.outer(s2[t], sx2)
        table[t, 2] = np.broadcast_to((1.0 - s2[t])[:, None],
                                      (om_grid.size, xi_grid.size))
    return np.log(np.clip(table, LOG_FLOOR, None))


def fourpod_logprob_table(times, om_grid, pp_grid, pm_grid) -> np.ndarray:
    """log p_m on the grid, shape (n_times, 5, n_om, n_pp, n_pm)."""
    s2 = np.sin(2.0 * np.multiply.outer(times, om_grid)) ** 2  # (T, n_om)
    cp2 = np.cos(pp_grid) ** 2
    sp2 = 1.0 - cp2
    cm2 = np.cos(pm_grid) ** 2
    sm2 = 1.0 - cm2
    shape = (om_grid.size, pp_grid.size, pm_grid.size)
    table = np.empty((times.size, 5) + shape)
    for t in range(times.size):
        half = 0.5 * s2[t][:, None, None]
        table[t, 0] = half * sp2[None, :, None]
        table[t, 1] = half * sm2[None, None, :]
        table[t, 2] = half * cm2[None, None, :]
        table[t, 3] = half * cp2[None, :, None]
        table[t, 4] = np.broadcast_to((1.0 - s2[t])[:, None, None], shape)
    return np.log(np.clip(table, LOG_FLOOR, None))


class LambdaScanner:
    """Best grid point of the three-state log-likelihood for given counts."""

    def __init__(self, times, om_grid, xi_grid):
        self.times = np.asarray(times, dtype=float)
        self.om_grid = np.asarray(om_grid, dtype=float)
        self.xi_grid = np.asarray(xi_grid, dtype=float)
        self._table = None

    def scan(self, counts):
        counts = np.atleast_2d(np.asarray(counts, dtype=float))
        if numba_enabled():
            i, j, ll = _scan_lambda_njit(counts, self.times, self.om_grid, self.xi_grid)
            return np.array([self.om_grid[i], self.xi_grid[j]]), float(ll)
        if self._table is None:
            self._table = lambda_logprob_table(self.times, self.om_grid, self.xi_grid)
        ll = np.tensordot(counts, self._table, axes=([0, 1], [0, 1]))
        flat = int(np.argmax(ll))
        i, j = np.unravel_index(flat, ll.shape)
        return np.array([self.om_grid[i], self.xi_grid[j]]), float(ll[i, j])


class FourPodScanner:
    """Best grid point of the five-state log-likelihood, chart (Omega, phi+, phi-)."""

    def __init__(self, times, om_grid, pp_grid, pm_grid):
        self.times = np.asarray(times, dtype=float)
        self.om_grid = np.asarray(om_grid, dtype=float)
        self.pp_grid = np.asarray(pp_grid, dtype=float)
        self.pm_grid = np.asarray(pm_grid, dtype=float)
        self._table = None

    def scan(self, counts):
        counts = np.atleast_2d(np.asarray(counts, dtype=float))
        if numba_enabled():
            i, j, k, ll = _scan_fourpod_njit(
                counts, self.times, self.om_grid, self.pp_grid, self.pm_grid)
            return (np.array([self.om_grid[i], self.pp_grid[j], self.pm_grid[k]]),
                    float(ll))
        if self._table is None:
            self._table = fourpod_logprob_table(
                self.times, self.om_grid, self.pp_grid, self.pm_grid)
        ll = np.tensordot(counts, self._table, axes=([0, 1], [0, 1]))
        flat = int(np.argmax(ll))
        i, j, k = np.unravel_index(flat, ll.shape)
        return (np.array([self.om_grid[i], self.pp_grid[j], self.pm_grid[k]]),
                float(ll[i, j, k]))
