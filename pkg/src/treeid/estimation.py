"""Simulation of the sampled consensus system and Markov-parameter estimation.

Sampling uses an exact zero-order hold. Estimation reads the discrete
pulse response, builds a minimal realization with the eigensystem
realization algorithm (ERA) and maps it back to continuous time with the
principal matrix logarithm; the continuous Markov parameters of that
realization do not depend on its state basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from scipy.optimize import least_squares

from . import _kernels
from .placement import place_sensors
from .recovery import RecoveredWeights, recover_weights
from .system import ConsensusSystem, MarkovSequence, build_system
from .tree import WeightedTree

RANK_RTOL = 1e-8
LOG_IMAG_TOL = 1e-6


class EstimationError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class SimulationRecord:
    """Sampled input/output record; ``y[k]`` holds one value per sensor at ``t = k dt``."""

    dt: float
    u: np.ndarray
    y: np.ndarray
    sensors: tuple[int, ...]

    @property
    def t(self) -> np.ndarray:
        return self.dt * np.arange(len(self.u))

    @property
    def steps(self) -> int:
        return len(self.u)


@dataclass(frozen=True, eq=False)
class EstimatedMarkov:
    markov: MarkovSequence
    order: int
    singular_values: np.ndarray = field(repr=False)
    stride: int = 1
    A: np.ndarray = field(default=None, repr=False)
    B: np.ndarray = field(default=None, repr=False)
    C: np.ndarray = field(default=None, repr=False)


def zoh_matrices(L: np.ndarray, B: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """``Ad = exp(dt L)`` and ``Bd = dt phi1(dt L) B`` from one exponential of the
    augmented matrix ``[[L, B], [0, 0]]``."""
    n = L.shape[0]
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = L
    M[:n, n] = B
    E = la.expm(dt * M)
    return E[:n, :n], E[:n, n]


def pulse_input(steps: int, dt: float) -> np.ndarray:
    """``u_0 = 1/dt`` and zero afterwards: unit area over the first sample."""
    u = np.zeros(steps)
    u[0] = 1.0 / dt
    return u


def simulate(
    system: ConsensusSystem,
    u,
    dt: float,
    *,
    noise_std: float = 0.0,
    rng: np.random.Generator | None = None,
    x0=None,
) -> SimulationRecord:
    """Sample ``x' = Lx + Bu`` with ``u`` held constant over each step.

    ``x0`` defaults to zero; other values are for tests. Measurement noise
    is i.i.d. Gaussian with standard deviation ``noise_std``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if noise_std < 0:
        raise ValueError("noise_std must be non-negative")
    u = np.asarray(u, dtype=float).reshape(-1)
    Ad, Bd = zoh_matrices(system.L, system.B, dt)
    x0 = np.zeros(system.n) if x0 is None else np.asarray(x0, dtype=float)
    y = _kernels.zoh_outputs(Ad, Bd, system.sensor_index, u, x0)
    if not np.all(np.isfinite(y)):
        raise EstimationError("simulation produced non-finite output")
    if noise_std > 0:
        rng = np.random.default_rng() if rng is None else rng
        y = y + rng.normal(0.0, noise_std, size=y.shape)
    return SimulationRecord(float(dt), u, y, system.sensors)


def _phi1(Z: np.ndarray) -> np.ndarray:
    """``(e^Z - I) Z^{-1}`` via the augmented exponential (no inverse needed)."""
    n = Z.shape[0]
    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = Z
    M[:n, n:] = np.eye(n)
    return la.expm(M)[:n, n:]


def _pick_stride(steps: int, blocks: int) -> int:
    # samples 1, 1+s, ..., 1+(2*blocks)*s must fit in the record
    return max(1, (steps - 2) // (2 * blocks))


def estimate_markov(
    record: SimulationRecord,
    n: int,
    *,
    horizon: int | None = None,
    stride: int | None = None,
    blocks: int | None = None,
    rank_rtol: float = RANK_RTOL,
) -> EstimatedMarkov:
    """Continuous Markov parameters from a pulse-response record.

    Parameters
    ----------
    record : SimulationRecord
        Response to :func:`pulse_input` from a zero state.
    n : int
        Upper bound on the system order.
    horizon : int, optional
        Number of Markov parameters to return (default ``2n``).
    stride : int, optional
        Take every ``stride``-th sample when forming the Hankel matrices,
        i.e. realize ``Ad^stride``. The default spreads ``ceil(1.5 n)``
        block rows and columns over the whole record, which keeps the
        sampled poles apart when ``dt`` is small.
    blocks : int, optional
        Block rows and columns of the Hankel matrix (default ``ceil(1.5 n)``).
        Larger values average out measurement noise.
    rank_rtol : float
        Singular values above ``rank_rtol * sigma_max`` count toward the order
        (capped at ``n``).
    """
    dt = record.dt
    y = np.asarray(record.y, dtype=float)
    h = y.shape[1]
    m = 2 * n if horizon is None else int(horizon)
    blocks = math.ceil(1.5 * n) if blocks is None else int(blocks)
    if blocks < 1:
        raise ValueError("blocks must be positive")
    s = _pick_stride(record.steps, blocks) if stride is None else int(stride)
    need = 1 + 2 * blocks * s
    if record.steps <= need:
        raise EstimationError(f"record of {record.steps} samples too short; need more than {need}")
    # discrete pulse response h_k = y_k for k >= 1 equals C Ad^(k-1) Bd / dt
    g = y[1 : need + 1 : s]  # g_i = C (Ad^s)^i Bd / dt
    H0 = np.empty((blocks * h, blocks))
    H1 = np.empty((blocks * h, blocks))
    for i in range(blocks):
        for j in range(blocks):
            H0[i * h : (i + 1) * h, j] = g[i + j]
            H1[i * h : (i + 1) * h, j] = g[i + j + 1]
    U, sv, Vt = np.linalg.svd(H0, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        raise EstimationError("Hankel matrix has rank 0 (no signal)")
    r = int(min(n, np.sum(sv > rank_rtol * sv[0])))
    Ur, Vr = U[:, :r], Vt[:r].T
    sq = np.sqrt(sv[:r])
    As = (Ur.T @ H1 @ Vr) / sq[:, None] / sq[None, :]
    Bp = (sq[:, None] * Vt[:r, :1]).reshape(r)
    Ch = Ur[:h] * sq[None, :]

    A = _continuous_generator(As, s * dt)
    # Bd / dt = phi1(dt A) B
    Bh = np.linalg.solve(_phi1(dt * A), Bp)
    Q = np.empty((m, h))
    v = Bh.copy()
    for j in range(m):
        Q[j] = Ch @ v
        v = A @ v
    return EstimatedMarkov(MarkovSequence(record.sensors, Q), r, sv, s, A, Bh, Ch)


def _continuous_generator(Ad: np.ndarray, T: float) -> np.ndarray:
    """Real ``A`` with ``exp(T A) = Ad``; requires a positive real spectrum."""
    lam, V = np.linalg.eig(Ad)
    if np.any(np.abs(lam.imag) > LOG_IMAG_TOL * max(1.0, np.max(np.abs(lam)))) or np.any(lam.real <= 0):
        raise EstimationError(
            f"realized sampled poles {np.round(lam, 6)} are not positive real; "
            "dt too large or data too noisy"
        )
    A = la.logm(Ad) / T
    if np.iscomplexobj(A):
        if np.max(np.abs(A.imag)) > LOG_IMAG_TOL * max(1.0, np.max(np.abs(A.real))):
            raise EstimationError("matrix logarithm is not real")
        A = A.real
    return A


@dataclass
class PipelineResult:
    """Outcome of :func:`identify_end_to_end`.

    ``recovered`` comes from the Markov route alone; ``tree`` is the final
    estimate (``recovered.tree`` refined against the raw samples when
    ``refined`` is set).
    """

    tree: WeightedTree
    recovered: RecoveredWeights
    estimate: EstimatedMarkov
    record: SimulationRecord
    sensors: tuple[int, ...]
    relative_errors: np.ndarray
    markov_errors: np.ndarray
    refined: bool

    @property
    def max_relative_error(self) -> float:
        return float(self.relative_errors.max()) if self.relative_errors.size else 0.0


def refine_output_error(tree: WeightedTree, record: SimulationRecord) -> WeightedTree:
    """Least-squares fit of the weights to the sampled outputs, started at ``tree``."""
    if not tree.edges:
        return tree
    sensors = record.sensors

    def fun(theta):
        system = build_system(tree.with_weights(np.exp(theta)), sensors)
        return (simulate(system, record.u, record.dt).y - record.y).ravel()

    theta0 = np.log(tree.weights)
    sol = least_squares(fun, theta0, xtol=1e-12, ftol=1e-12, bounds=(theta0 - 2.3, theta0 + 2.3))
    if not np.all(np.isfinite(sol.x)) or sol.cost > 0.5 * float(np.sum(fun(theta0) ** 2)):
        return tree
    return tree.with_weights(np.exp(sol.x))


def identify_end_to_end(
    tree: WeightedTree,
    *,
    dt: float = 0.01,
    steps: int = 400,
    noise_std: float = 0.0,
    seed: int = 42,
    sensors=None,
    refine: bool | None = None,
) -> PipelineResult:
    """Simulate ``tree`` with its placement, estimate Markov parameters,
    recover the weights, and compare with the true ones.

    With noise the Hankel matrix spans the whole record, and by default
    the recovered weights are then refined by output-error least squares
    (``refine=None`` means refine only when ``noise_std > 0``).
    """
    sensors = place_sensors(tree) if sensors is None else sensors
    system = build_system(tree, sensors)
    rng = np.random.default_rng(seed)
    record = simulate(system, pulse_input(steps, dt), dt, noise_std=noise_std, rng=rng)
    if noise_std > 0:
        est = estimate_markov(record, tree.n, blocks=max(math.ceil(1.5 * tree.n), (steps - 2) // 2), stride=1)
    else:
        est = estimate_markov(record, tree.n)
    rec = recover_weights(tree, system.sensors, est.markov)
    refine = noise_std > 0 if refine is None else refine
    final = refine_output_error(rec.tree, record) if refine else rec.tree
    err = np.abs(final.weights - tree.weights) / tree.weights
    merr = np.abs(rec.tree.weights - tree.weights) / tree.weights
    return PipelineResult(final, rec, est, record, system.sensors, err, merr, bool(refine))
