"""One-step TD learners with complex discounts.

All value functions may carry leading batch dimensions: a table with
``batch_shape=(M,)`` holds M independent tables, and passing an array of M
discounts to the update functions steps all of them on the same transition.
This is how a :class:`~complextd.core.FrequencyBank` is updated.  Initial
values are zero, which keeps members at omega and 2*pi - omega exact
conjugates and the omega = 0 member exactly real under real rewards.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import ComplexDiscount, FrequencyBank
from .errors import CoverageError, DimensionError, DomainError
from .io import write_complex_table


def _gamma(d):
    if isinstance(d, ComplexDiscount):
        return d.value
    if isinstance(d, FrequencyBank):
        return d.gammas
    return np.asarray(d, dtype=complex) if np.ndim(d) else complex(d)


class Policy:
    """Action probabilities ``probs[s, a]``.

    Rows for terminal states are ignored; every other row must be a
    distribution to within 1e-12.
    """

    def __init__(self, probs, terminal=None):
        probs = np.array(probs, dtype=float)
        if probs.ndim != 2:
            raise DomainError("probs", "must be a 2-d array (states x actions)")
        live = np.ones(probs.shape[0], bool) if terminal is None else ~np.asarray(terminal, bool)
        if np.any(probs[live] < 0) or np.max(np.abs(probs[live].sum(axis=1) - 1.0), initial=0.0) > 1e-12:
            raise DomainError("probs", "each non-terminal row must be a probability distribution")
        self.probs = probs
        self._cum = np.cumsum(probs, axis=1)
        self._cum[:, -1] = 1.0

    @classmethod
    def uniform(cls, n_states, n_actions):
        return cls(np.full((n_states, n_actions), 1.0 / n_actions))

    @property
    def n_actions(self) -> int:
        return self.probs.shape[1]

    def __call__(self, s, a) -> float:
        return float(self.probs[s, a])

    def sample(self, s, rng) -> int:
        return int(np.searchsorted(self._cum[s], rng.random(), side="right"))

    def sample_batch(self, states, rng) -> np.ndarray:
        u = rng.random(len(states))
        return (self._cum[states] <= u[:, None]).sum(axis=1)


class _Table:
    def __init__(self, values, step_size, terminal):
        if not (0 < step_size <= 1):
            raise DomainError("step_size", f"must lie in (0, 1], got {step_size}")
        self.values = values
        self.step_size = float(step_size)
        self.terminal = terminal

    @property
    def batch_shape(self) -> tuple:
        return self.values.shape[: self.values.ndim - self._core_ndim]

    def reset(self):
        self.values[...] = 0


class TabularValueFunction(_Table):
    """Complex state values ``values[..., s]``."""

    _core_ndim = 1

    def __init__(self, n_states, step_size=0.05, terminal=None, batch_shape=(), values=None):
        terminal = np.zeros(n_states, bool) if terminal is None else np.asarray(terminal, bool)
        if values is None:
            values = np.zeros(tuple(batch_shape) + (n_states,), dtype=complex)
        super().__init__(values, step_size, terminal)

    @property
    def n_states(self) -> int:
        return self.values.shape[-1]

    def __getitem__(self, s):
        return self.values[..., s]

    def member(self, j):
        return TabularValueFunction(self.n_states, self.step_size, self.terminal, values=self.values[j])

    def to_csv(self, path, omegas=None):
        write_complex_table(path, ["state"], [(s,) for s in range(self.n_states)], self.values, omegas)


class TabularActionValueFunction(_Table):
    """Complex action values ``values[..., s, a]``."""

    _core_ndim = 2

    def __init__(self, n_states, n_actions, step_size=0.05, terminal=None, batch_shape=(), values=None):
        terminal = np.zeros(n_states, bool) if terminal is None else np.asarray(terminal, bool)
        if values is None:
            values = np.zeros(tuple(batch_shape) + (n_states, n_actions), dtype=complex)
        super().__init__(values, step_size, terminal)

    @property
    def n_states(self) -> int:
        return self.values.shape[-2]

    @property
    def n_actions(self) -> int:
        return self.values.shape[-1]

    def __getitem__(self, key):
        s, a = key
        return self.values[..., s, a]

    def member(self, j):
        return TabularActionValueFunction(
            self.n_states, self.n_actions, self.step_size, self.terminal, values=self.values[j]
        )

    def to_csv(self, path, omegas=None):
        index = [(s, a) for s in range(self.n_states) for a in range(self.n_actions)]
        flat = self.values.reshape(self.batch_shape + (-1,))
        write_complex_table(path, ["state", "action"], index, flat, omegas)


class LinearValueFunction(_Table):
    """Complex weights over real features: ``v(x) = sum_i w_i x_i``."""

    _core_ndim = 1

    def __init__(self, n_features, step_size=0.1 / 6, batch_shape=(), values=None):
        if values is None:
            values = np.zeros(tuple(batch_shape) + (n_features,), dtype=complex)
        super().__init__(values, step_size, None)

    @property
    def weights(self) -> np.ndarray:
        return self.values

    @property
    def n_features(self) -> int:
        return self.values.shape[-1]

    def value(self, x) -> np.ndarray:
        x = self._check(x)
        return (self.values * x).sum(axis=-1)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_features,):
            raise DimensionError(f"feature vector has shape {x.shape}, expected ({self.n_features},)")
        return x

    def member(self, j):
        return LinearValueFunction(self.n_features, self.step_size, values=self.values[j])

    def to_csv(self, path, omegas=None):
        write_complex_table(path, ["feature"], [(i,) for i in range(self.n_features)], self.values, omegas)


def td_target(reward, next_value, d, done):
    """``reward + gamma * next_value``, bootstrapping from zero when ``done``."""
    if done:
        out = np.zeros(np.shape(next_value), dtype=complex) + reward
        return out if out.ndim else complex(out)
    return reward + _gamma(d) * next_value


def _check_live(V, s):
    if V.terminal is not None and V.terminal[s]:
        raise DomainError("state", f"{s} is terminal; terminal values stay zero")


def td_update(V: TabularValueFunction, s, target, step_size: Optional[float] = None):
    """``V(s) <- V(s) + alpha * (target - V(s))``; returns ``V``."""
    _check_live(V, s)
    alpha = V.step_size if step_size is None else step_size
    cur = V.values[..., s]
    V.values[..., s] = cur + alpha * (target - cur)
    return V


def importance_ratio(target: Policy, behavior: Policy, s, a) -> float:
    pi, mu = target(s, a), behavior(s, a)
    if mu == 0.0:
        if pi > 0.0:
            raise CoverageError(f"behavior policy never takes action {a} in state {s}")
        return 0.0
    return pi / mu


def off_policy_td_update(V: TabularValueFunction, s, target, rho, step_size: Optional[float] = None):
    """Importance-weighted TD step; ``rho == 1`` reproduces :func:`td_update` bit for bit."""
    _check_live(V, s)
    alpha = V.step_size if step_size is None else step_size
    cur = V.values[..., s]
    V.values[..., s] = cur + (alpha * rho) * (target - cur)
    return V


def state_value_from_action_values(Q: TabularActionValueFunction, s, pi: Policy):
    """``sum_a pi(s, a) Q(s, a)``."""
    return (Q.values[..., s, :] * pi.probs[s]).sum(axis=-1)


def expected_sarsa_update(Q: TabularActionValueFunction, s, a, reward, s_next, done, pi: Policy, d,
                          step_size: Optional[float] = None):
    """Step ``Q(s, a)`` toward ``reward + gamma * E_pi[Q(s', .)]``."""
    _check_live(Q, s)
    nxt = 0j if done else state_value_from_action_values(Q, s_next, pi)
    target = td_target(reward, nxt, d, done)
    alpha = Q.step_size if step_size is None else step_size
    cur = Q.values[..., s, a]
    Q.values[..., s, a] = cur + alpha * (target - cur)
    return Q


def linear_td_update(W: LinearValueFunction, x, reward, x_next, done, d, step_size: Optional[float] = None):
    """``w <- w + alpha * delta * x`` with ``delta = reward + gamma * v(x') - v(x)``."""
    x = W._check(x)
    x_next = W._check(x_next)
    nxt = 0j if done else W.value(x_next)
    delta = td_target(reward, nxt, d, done) - W.value(x)
    alpha = W.step_size if step_size is None else step_size
    W.values += alpha * np.multiply.outer(delta, x)
    return W


@dataclass(frozen=True)
class Transition:
    """One step of experience.  Linear learners read ``features``/``next_features``."""

    state: int
    action: int
    reward: float
    next_state: int
    done: bool
    features: Optional[np.ndarray] = None
    next_features: Optional[np.ndarray] = None


def bank_update(bank: FrequencyBank, tr: Transition, policy: Optional[Policy] = None,
                step_size: Optional[float] = None) -> FrequencyBank:
    """Apply one transition to every member of ``bank`` with its own discount."""
    v = bank.values
    g = bank.gammas
    if isinstance(v, TabularActionValueFunction):
        if policy is None:
            raise DomainError("policy", "Expected Sarsa banks need the evaluation policy")
        expected_sarsa_update(v, tr.state, tr.action, tr.reward, tr.next_state, tr.done, policy, g, step_size)
    elif isinstance(v, TabularValueFunction):
        nxt = v.values[..., tr.next_state]
        td_update(v, tr.state, td_target(tr.reward, nxt, g, tr.done), step_size)
    elif isinstance(v, LinearValueFunction):
        if tr.features is None or tr.next_features is None:
            raise DomainError("features", "linear banks need feature vectors on the transition")
        linear_td_update(v, tr.features, tr.reward, tr.next_features, tr.done, g, step_size)
    else:
        raise TypeError(f"unsupported value function {type(v).__name__}")
    return bank


def rollout(env, policy: Policy, start, steps: int, rng) -> tuple:
    """``(states, actions, rewards)`` of a ``steps``-long continuing trajectory.

    ``states`` has ``steps + 1`` entries.  Reaching a terminal state restarts
    from ``start``; such steps have ``next_state`` equal to the terminal one,
    and the caller can detect them through ``env.terminal``.
    """
    states = np.empty(steps + 1, dtype=np.intp)
    actions = np.empty(steps, dtype=np.intp)
    rewards = np.empty(steps)
    s = int(start)
    states[0] = s
    for t in range(steps):
        a = policy.sample(s, rng)
        s2, r, done = env.transition(s, a, rng)
        actions[t], rewards[t], states[t + 1] = a, r, s2
        s = int(start) if done else s2
    return states, actions, rewards


def annealed_td(V: TabularValueFunction, states, rewards, d, decay=0.6, burn_in=0.0) -> np.ndarray:
    """TD(0) along one trajectory with per-state step size ``visits(s)**-decay``.

    Returns the running mean of the iterates after the first ``burn_in``
    fraction of the trajectory (suffix averaging); ``burn_in=1`` returns the
    final iterate.  ``V`` holds the final iterate either way.  ``decay`` in
    (0.5, 1] gives a convergent schedule.
    """
    if not (0.5 < decay <= 1.0):
        raise DomainError("decay", f"must lie in (0.5, 1], got {decay}")
    if not (0.0 <= burn_in <= 1.0):
        raise DomainError("burn_in", f"must lie in [0, 1], got {burn_in}")
    g = _gamma(d)
    visits = np.zeros(V.n_states)
    start = min(int(burn_in * len(rewards)), max(len(rewards) - 1, 0))
    mean = V.values.copy()
    for t, r in enumerate(rewards):
        s, s2 = states[t], states[t + 1]
        done = bool(V.terminal[s2])
        visits[s] += 1
        td_update(V, s, td_target(r, V.values[..., s2], g, done), visits[s] ** -decay)
        if t >= start:
            mean += (V.values - mean) / (t - start + 1)
    return mean
