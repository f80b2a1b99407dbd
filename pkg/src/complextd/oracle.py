"""Ground truth for complex value functions.

* ``closed_form_values`` solves ``(I - gamma P) v = r`` by LU factorisation.
* ``matrix_series_partial`` and ``cauchy_gap`` evaluate the truncated series
  ``sum_k (gamma P)^k`` and check the geometric tail bound
  ``||A_n - A_m||_inf < beta^m / (1 - beta)`` with ``beta = |gamma| ||P||_inf``.
* ``monte_carlo_return`` averages sampled complex returns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import ComplexDiscount, discount_power
from .environments import ExplicitModel, FiniteMDP
from .errors import BoundViolation, DomainError, SingularSystemError
from .io import write_complex_table

RESIDUAL_LIMIT = 1e-9
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class LinearSystemSolution:
    v: np.ndarray
    residual: float
    condition: float

    def to_csv(self, path):
        write_complex_table(path, ["state"], [(s,) for s in range(self.v.size)], self.v)


def _fixed_zero(model: ExplicitModel) -> np.ndarray:
    """Absorbing zero-reward states, whose value is 0 for every discount."""
    diag = np.diag(model.P)
    return model.terminal & (diag == 1.0) & (model.r == 0.0)


def bellman_residual(model: ExplicitModel, d, v) -> float:
    g = complex(getattr(d, "value", d))
    v = np.asarray(v, dtype=complex)
    return float(np.max(np.abs(v - g * (model.P @ v) - model.r), initial=0.0))


def closed_form_values(model: ExplicitModel, d: ComplexDiscount) -> LinearSystemSolution:
    """Unique solution of the complex Bellman system.

    Absorbing zero-reward states are pinned at 0 and dropped from the
    system, which keeps ``|gamma| = 1`` solvable on episodic models.
    """
    g = complex(d.value)
    fixed = _fixed_zero(model)
    live = np.flatnonzero(~fixed)
    n = model.state_count
    v = np.zeros(n, dtype=complex)
    if live.size == 0:
        return LinearSystemSolution(v, 0.0, 1.0)
    P_live = model.P[np.ix_(live, live)]
    radius = float(np.max(np.abs(np.linalg.eigvals(g * P_live))))
    A = np.eye(live.size) - g * P_live
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > CONDITION_LIMIT or radius >= 1.0 - 1e-12:
        raise SingularSystemError(
            f"I - gamma P is singular or ill-conditioned: |gamma| = {abs(g):.6g}, "
            f"spectral radius of gamma P on non-absorbing states = {radius:.6g}, condition = {cond:.3g}"
        )
    lu, piv = scipy.linalg.lu_factor(A)
    v[live] = scipy.linalg.lu_solve((lu, piv), model.r[live].astype(complex))
    residual = bellman_residual(model, g, v)
    if residual >= RESIDUAL_LIMIT:
        raise SingularSystemError(f"Bellman residual {residual:.3g} exceeds {RESIDUAL_LIMIT:g}")
    return LinearSystemSolution(v, residual, cond)


def matrix_series_partial(model: ExplicitModel, d: ComplexDiscount, n: int) -> np.ndarray:
    """``sum_{k<n} (gamma P)^k r``."""
    g = complex(d.value)
    term = model.r.astype(complex)
    total = np.zeros_like(term)
    for _ in range(n):
        total += term
        term = g * (model.P @ term)
    return total


def cauchy_bound(beta: float, m: int) -> float:
    return beta ** m / (1.0 - beta)


def cauchy_gap(model: ExplicitModel, d: ComplexDiscount, m: int, n: int) -> float:
    """``||A_n - A_m||_inf`` for the partial sums ``A_n = sum_{k<n} (gamma P)^k``.

    Raises :class:`BoundViolation` if the gap is not below
    ``beta^m / (1 - beta)``.  The comparison allows one part in 1e12 for
    rounding, which matters only when ``beta^(n-m)`` is below machine epsilon.
    """
    if not (n > m >= 0):
        raise DomainError("n", f"need n > m >= 0, got m={m}, n={n}")
    g = complex(d.value)
    P_norm = float(np.max(np.abs(model.P).sum(axis=1)))
    beta = abs(g) * P_norm
    if beta >= 1.0:
        raise DomainError("gamma", f"need |gamma| * ||P|| < 1, got {beta}")
    step = g * model.P
    power = np.linalg.matrix_power(step, m) if m else np.eye(model.state_count, dtype=complex)
    diff = np.zeros_like(power)
    for _ in range(m, n):
        diff += power
        power = power @ step
    gap = float(np.max(np.abs(diff).sum(axis=1)))
    bound = cauchy_bound(beta, m)
    if not gap <= bound * (1 + 1e-12):
        raise BoundViolation(f"||A_{n} - A_{m}|| = {gap:.6g} exceeds beta^m/(1-beta) = {bound:.6g}")
    return gap


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: complex
    stderr_real: float
    stderr_imag: float
    episodes: int
    truncated: int = 0
    horizon: float = math.inf


def truncation_horizon(amplitude: float, tol: float = 1e-8) -> int:
    """Smallest H with amplitude**H below ``tol``."""
    if amplitude == 0.0:
        return 1
    return int(math.ceil(math.log(tol) / math.log(amplitude)))


def monte_carlo_return(env: FiniteMDP, policy, d: ComplexDiscount, start, episodes: int, seed,
                       horizon=None, max_steps: int = 10_000) -> MonteCarloEstimate:
    """Sample mean of the complex return from ``start`` over independent episodes.

    Episodes run in lockstep through ``env.sample_batch``.  Continuing tasks
    are cut at ``horizon`` (default: where ``|gamma|^H < 1e-8``); episodic ones
    run to termination or ``max_steps``, with cut-off episodes counted in
    ``truncated``.
    """
    if not env.episodic and d.amplitude >= 1.0:
        raise DomainError("gamma", "undiscounted continuing return is undefined")
    if horizon is None:
        horizon = max_steps if env.episodic else truncation_horizon(d.amplitude)
    rng = np.random.default_rng(seed)
    states = np.full(episodes, int(start), dtype=np.intp)
    alive = np.ones(episodes, bool) & ~env.terminal[states]
    G = np.zeros(episodes, dtype=complex)
    t = 0
    while alive.any() and t < horizon:
        idx = np.flatnonzero(alive)
        s = states[idx]
        a = policy.sample_batch(s, rng)
        s2, r, done = env.sample_batch(s, a, rng)
        G[idx] += discount_power(d, t) * r
        states[idx] = s2
        alive[idx] = ~done
        t += 1
    truncated = int(alive.sum()) if env.episodic else 0
    n = max(episodes, 1)
    se = lambda x: float(np.std(x, ddof=1) / math.sqrt(n)) if episodes > 1 else 0.0
    return MonteCarloEstimate(complex(G.mean()), se(G.real), se(G.imag), episodes, truncated, horizon)


def monte_carlo_episode_length(env: FiniteMDP, policy, start, episodes: int, seed, max_steps: int = 10_000):
    """``(mean, standard error, truncated)`` of sampled episode lengths."""
    rng = np.random.default_rng(seed)
    states = np.full(episodes, int(start), dtype=np.intp)
    lengths = np.zeros(episodes, dtype=np.int64)
    alive = ~env.terminal[states]
    t = 0
    while alive.any() and t < max_steps:
        idx = np.flatnonzero(alive)
        s2, _, done = env.sample_batch(states[idx], policy.sample_batch(states[idx], rng), rng)
        states[idx] = s2
        lengths[idx] += 1
        alive[idx] = ~done
        t += 1
    return float(lengths.mean()), float(lengths.std(ddof=1) / math.sqrt(episodes)), int(alive.sum())


def linear_td_fixed_point(model: ExplicitModel, features, d: ComplexDiscount, weights=None) -> np.ndarray:
    """Weights where expected linear TD stops moving.

    Solves ``Phi^T D (Phi - gamma P Phi) w = Phi^T D r`` with ``D`` the
    state-visit weighting (default: the stationary distribution of ``P``,
    found as its left eigenvector for eigenvalue 1).  The least-squares
    solution is returned when the feature matrix is rank deficient.
    """
    Phi = np.asarray(features, dtype=float)
    if Phi.shape[0] != model.state_count:
        raise DomainError("features", f"need one row per state ({model.state_count}), got {Phi.shape[0]}")
    if weights is None:
        vals, vecs = np.linalg.eig(model.P.T)
        mu = np.real(vecs[:, np.argmin(np.abs(vals - 1.0))])
        weights = mu / mu.sum()
    D = np.diag(np.asarray(weights, dtype=float))
    g = complex(d.value)
    A = Phi.T @ D @ (Phi - g * (model.P @ Phi))
    b = Phi.T @ D @ model.r
    return np.linalg.lstsq(A, b.astype(complex), rcond=None)[0]
