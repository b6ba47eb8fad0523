"""Numeric inner loops.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
version with the same signature. The active pair is picked once at import
time; set ``TREEID_DISABLE_NUMBA=1`` to force the numpy path (or when
numba is not importable it is used automatically).

Trees are passed to kernels as flat edge arrays ``(eu, ev, ew)`` of node
indices and weights, so the Laplacian is never formed densely here.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

_DISABLED = os.environ.get("TREEID_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}
USE_NUMBA = _HAVE_NUMBA and not _DISABLED
BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------

def power_columns_numpy(eu, ev, ew, n, root, m):
    """Columns ``L^k e_root`` for ``k = 0..m-1`` as an ``(m, n)`` array."""
    out = np.zeros((m, n))
    v = np.zeros(n)
    v[root] = 1.0
    for k in range(m):
        out[k] = v
        diff = v[ev] - v[eu]
        v = np.bincount(eu, weights=ew * diff, minlength=n) - np.bincount(
            ev, weights=ew * diff, minlength=n
        )
    return out


def zoh_outputs_numpy(Ad, Bd, sensor_idx, u, x0):
    """Run ``x_{k+1} = Ad x_k + Bd u_k`` and return ``x_k[sensor_idx]`` per step."""
    N = u.shape[0]
    out = np.empty((N, sensor_idx.shape[0]))
    x = x0.copy()
    for k in range(N):
        out[k] = x[sensor_idx]
        x = Ad @ x + Bd * u[k]
    return out


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if _HAVE_NUMBA:

    @numba.njit(cache=True)
    def power_columns_numba(eu, ev, ew, n, root, m):
        out = np.zeros((m, n))
        v = np.zeros(n)
        w = np.zeros(n)
        v[root] = 1.0
        ne = eu.shape[0]
        for k in range(m):
            for i in range(n):
                out[k, i] = v[i]
                w[i] = 0.0
            for e in range(ne):
                a = eu[e]
                b = ev[e]
                flow = ew[e] * (v[b] - v[a])
                w[a] += flow
                w[b] -= flow
            for i in range(n):
                v[i] = w[i]
        return out

    @numba.njit(cache=True)
    def zoh_outputs_numba(Ad, Bd, sensor_idx, u, x0):
        N = u.shape[0]
        n = x0.shape[0]
        h = sensor_idx.shape[0]
        out = np.empty((N, h))
        x = x0.copy()
        xn = np.empty(n)
        for k in range(N):
            for s in range(h):
                out[k, s] = x[sensor_idx[s]]
            for i in range(n):
                acc = Bd[i] * u[k]
                for j in range(n):
                    acc += Ad[i, j] * x[j]
                xn[i] = acc
            for i in range(n):
                x[i] = xn[i]
        return out

else:  # pragma: no cover
    power_columns_numba = power_columns_numpy
    zoh_outputs_numba = zoh_outputs_numpy


if USE_NUMBA:
    _power_columns = power_columns_numba
    _zoh_outputs = zoh_outputs_numba
else:
    _power_columns = power_columns_numpy
    _zoh_outputs = zoh_outputs_numpy


def power_columns(eu, ev, ew, n, root, m):
    return _power_columns(
        np.ascontiguousarray(eu, dtype=np.int64),
        np.ascontiguousarray(ev, dtype=np.int64),
        np.ascontiguousarray(ew, dtype=np.float64),
        int(n),
        int(root),
        int(m),
    )


def zoh_outputs(Ad, Bd, sensor_idx, u, x0):
    return _zoh_outputs(
        np.ascontiguousarray(Ad, dtype=np.float64),
        np.ascontiguousarray(Bd, dtype=np.float64),
        np.ascontiguousarray(sensor_idx, dtype=np.int64),
        np.ascontiguousarray(u, dtype=np.float64),
        np.ascontiguousarray(x0, dtype=np.float64),
    )


def warmup():
    """Trigger JIT compilation of every kernel on tiny inputs."""
    eu = np.array([0], dtype=np.int64)
    ev = np.array([1], dtype=np.int64)
    power_columns(eu, ev, np.array([1.0]), 2, 0, 2)
    zoh_outputs(np.eye(2), np.zeros(2), np.array([0]), np.zeros(2), np.zeros(2))
