"""Finite MDPs with a sampling API for learners and an explicit model for oracles.

Every environment exposes the same surface:

* ``reset(start=None)`` / ``step(action)`` for one trajectory at a time,
* ``transition(state, action, rng)``, a pure single-step sampler,
* ``sample_batch(states, actions, rng)``, the same sampler over arrays,
* ``outcomes(state, action)``, the full ``(prob, next_state, reward)`` list.

Terminal states are absorbing: the exported model gives them a probability
one self-loop and zero reward, so episodic and continuing tasks share one
linear-system form.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoAbsorptionError


class FiniteMDP:
    """Base class.  Subclasses fill in ``state_count``, ``n_actions``,
    ``terminal`` and implement :meth:`transition` and :meth:`outcomes`."""

    state_count: int
    n_actions: int
    start_state: int = 0
    episodic: bool = True

    def __init__(self, seed=None):
        self.rng = np.random.default_rng(seed)
        self.state = None

    def action_count(self, s) -> int:
        return self.n_actions

    def is_terminal(self, s) -> bool:
        return bool(self.terminal[s])

    def _check_state(self, s):
        if not (0 <= s < self.state_count):
            raise DomainError("state", f"must lie in 0..{self.state_count - 1}, got {s}")

    def _check_action(self, a):
        if not (0 <= a < self.n_actions):
            raise DomainError("action", f"must lie in 0..{self.n_actions - 1}, got {a}")

    def reset(self, start=None) -> int:
        self.state = self.start_state if start is None else int(start)
        self._check_state(self.state)
        return self.state

    def step(self, action):
        if self.state is None:
            raise RuntimeError("step() called before reset()")
        next_state, reward, done = self.transition(self.state, action, self.rng)
        self.state = next_state
        return next_state, reward, done

    def transition(self, state, action, rng=None):
        raise NotImplementedError

    def outcomes(self, state, action):
        raise NotImplementedError

    def sample_batch(self, states, actions, rng):
        raise NotImplementedError

    def dynamics(self):
        """Dense ``(P[s, a, s'], R[s, a, s'])`` enumerated from :meth:`outcomes`."""
        n, m = self.state_count, self.n_actions
        P = np.zeros((n, m, n))
        R = np.zeros((n, m, n))
        for s in range(n):
            if self.is_terminal(s):
                P[s, :, s] = 1.0
                continue
            for a in range(m):
                for prob, s2, r in self.outcomes(s, a):
                    P[s, a, s2] += prob
                    R[s, a, s2] = r
        return P, R


class _DeterministicMDP(FiniteMDP):
    """Dynamics held in ``next_table[s, a]`` and ``reward_table[s, a]``."""

    next_table: np.ndarray
    reward_table: np.ndarray

    def transition(self, state, action, rng=None):
        self._check_state(state)
        self._check_action(action)
        if self.terminal[state]:
            raise DomainError("state", f"{state} is terminal")
        s2 = int(self.next_table[state, action])
        return s2, float(self.reward_table[state, action]), bool(self.terminal[s2])

    def outcomes(self, state, action):
        s2 = int(self.next_table[state, action])
        return [(1.0, s2, float(self.reward_table[state, action]))]

    def sample_batch(self, states, actions, rng=None):
        s2 = self.next_table[states, actions]
        return s2, self.reward_table[states, actions], self.terminal[s2]


UP, DOWN, LEFT, RIGHT = range(4)
_MOVES = ((-1, 0), (1, 0), (0, -1), (0, 1))


class CheckeredGridWorld(_DeterministicMDP):
    """5x5 checkerboard with terminal corners at the top-left and bottom-right.

    Entering a white cell pays +1, a gray cell -1, a terminal +11.  A cell is
    white when ``(row + col) % 2`` matches ``parity`` (``"even"`` -> 0,
    ``"odd"`` -> 1); the default ``"odd"`` makes the centre's four neighbours white.
    Walking into a wall leaves the agent in place and pays
    the cell's own color reward, or 0 with ``bump_reward="zero"``.
    """

    width = height = 5
    n_actions = 4
    terminal_reward = 11.0

    def __init__(self, parity="odd", bump_reward="own", seed=None):
        super().__init__(seed)
        if parity not in ("even", "odd"):
            raise DomainError("parity", f"must be 'even' or 'odd', got {parity!r}")
        if bump_reward not in ("own", "zero"):
            raise DomainError("bump_reward", f"must be 'own' or 'zero', got {bump_reward!r}")
        self.parity = parity
        self.bump_reward = bump_reward
        self.state_count = self.width * self.height
        self.start_state = self.index(2, 2)
        self.terminal = np.zeros(self.state_count, dtype=bool)
        self.terminal[[self.index(0, 0), self.index(4, 4)]] = True

        self.next_table = np.zeros((self.state_count, 4), dtype=np.intp)
        self.reward_table = np.zeros((self.state_count, 4))
        self.bump_table = np.zeros((self.state_count, 4), dtype=bool)
        for s in range(self.state_count):
            row, col = self.cell(s)
            for a, (dr, dc) in enumerate(_MOVES):
                r2, c2 = row + dr, col + dc
                bump = not (0 <= r2 < self.height and 0 <= c2 < self.width)
                if bump:
                    r2, c2 = row, col
                s2 = self.index(r2, c2)
                self.next_table[s, a] = s2
                self.bump_table[s, a] = bump
                if bump and bump_reward == "zero":
                    self.reward_table[s, a] = 0.0
                else:
                    self.reward_table[s, a] = self.entry_reward(s2)

    def index(self, row, col) -> int:
        return row * self.width + col

    def cell(self, s) -> tuple:
        return divmod(int(s), self.width)

    def is_white(self, s) -> bool:
        row, col = self.cell(s)
        return (row + col) % 2 == (0 if self.parity == "even" else 1)

    def entry_reward(self, s) -> float:
        if self.terminal[s]:
            return self.terminal_reward
        return 1.0 if self.is_white(s) else -1.0


def cgw_step(env: CheckeredGridWorld, cell, action):
    """One move on the grid in ``(row, col)`` coordinates."""
    s2, reward, done = env.transition(env.index(*cell), action)
    return env.cell(s2), reward, done


def _sin_turns(k: int, period: int) -> float:
    """sin(2*pi*k/period), exact where the angle is a multiple of pi/2."""
    k %= period
    if (2 * k) % period == 0:
        return 0.0
    if 4 * k == period:
        return 1.0
    if 4 * k == 3 * period:
        return -1.0
    return math.sin(2.0 * math.pi * k / period)


def wrw_reward(state: int) -> float:
    """cos(pi*s) + sin(pi*s/2) + sin(2*pi*s/5) + sin(pi*s/5) for s in 0..19."""
    if not (0 <= state < WavyRingWorld.size):
        raise DomainError("state", f"must lie in 0..19, got {state}")
    s = int(state)
    return (1.0 if s % 2 == 0 else -1.0) + _sin_turns(s, 4) + _sin_turns(s, 5) + _sin_turns(s, 10)


class WavyRingWorld(_DeterministicMDP):
    """20-state ring walked in one direction; leaving ``s`` pays ``wrw_reward(s)``."""

    size = 20
    n_actions = 1
    episodic = False

    def __init__(self, seed=None):
        super().__init__(seed)
        self.state_count = self.size
        self.start_state = 0
        self.terminal = np.zeros(self.size, dtype=bool)
        self.next_table = ((np.arange(self.size) + 1) % self.size).reshape(-1, 1)
        self.reward_table = np.array([[wrw_reward(s)] for s in range(self.size)])


class TabularMDP(FiniteMDP):
    """MDP given by dense arrays ``P[s, a, s']`` and ``R[s, a, s']``."""

    def __init__(self, P, R, terminal=None, start_state=0, seed=None):
        super().__init__(seed)
        P = np.asarray(P, dtype=float)
        R = np.asarray(R, dtype=float)
        if P.ndim != 3 or P.shape[0] != P.shape[2] or R.shape != P.shape:
            raise DomainError("P", f"expected matching (S, A, S) arrays, got {P.shape} and {R.shape}")
        if not np.allclose(P.sum(axis=2), 1.0, atol=1e-12, rtol=0):
            raise DomainError("P", "each P[s, a, :] must sum to 1")
        self.P, self.R = P, R
        self.state_count, self.n_actions = P.shape[0], P.shape[1]
        self.terminal = np.zeros(self.state_count, bool) if terminal is None else np.asarray(terminal, bool)
        self.episodic = bool(self.terminal.any())
        self.start_state = int(start_state)
        self._cum = np.cumsum(P, axis=2)
        self._cum[..., -1] = 1.0

    def transition(self, state, action, rng=None):
        self._check_state(state)
        self._check_action(action)
        if self.terminal[state]:
            raise DomainError("state", f"{state} is terminal")
        rng = self.rng if rng is None else rng
        s2 = int(np.searchsorted(self._cum[state, action], rng.random(), side="right"))
        return s2, float(self.R[state, action, s2]), bool(self.terminal[s2])

    def outcomes(self, state, action):
        row = self.P[state, action]
        return [(float(row[s2]), s2, float(self.R[state, action, s2])) for s2 in np.flatnonzero(row)]

    def sample_batch(self, states, actions, rng):
        u = rng.random(len(states))
        s2 = (self._cum[states, actions] <= u[:, None]).sum(axis=1)
        return s2, self.R[states, actions, s2], self.terminal[s2]


def random_tabular_mdp(n_states, n_actions, rng, concentration=3.0, reward_scale=1.0):
    """Ergodic random MDP whose reward depends only on the state being left.

    Transition rows are Dirichlet(concentration) draws, so every entry is
    positive and the chain is irreducible and aperiodic.
    """
    P = rng.dirichlet(np.full(n_states, concentration), size=(n_states, n_actions))
    r = rng.uniform(-reward_scale, reward_scale, size=n_states)
    R = np.broadcast_to(r[:, None, None], P.shape).copy()
    return TabularMDP(P, R, seed=rng.integers(2**63))


@dataclass(frozen=True)
class ExplicitModel:
    """State-to-state transition matrix and expected reward under a fixed policy."""

    P: np.ndarray
    r: np.ndarray
    terminal: np.ndarray

    def __post_init__(self):
        P = np.array(self.P, dtype=float)
        r = np.array(self.r, dtype=float)
        terminal = np.array(self.terminal, dtype=bool)
        n = P.shape[0]
        if P.shape != (n, n) or r.shape != (n,) or terminal.shape != (n,):
            raise DomainError("P", "P must be N x N with r and terminal of length N")
        if np.max(np.abs(P.sum(axis=1) - 1.0)) > 1e-12:
            raise DomainError("P", "rows must sum to 1")
        for name, arr in (("P", P), ("r", r), ("terminal", terminal)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def state_count(self) -> int:
        return self.P.shape[0]

    def to_csv(self, path):
        n = self.state_count
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["state_count", n])
            w.writerow(["state", "terminal", "reward"] + [f"p{j}" for j in range(n)])
            for s in range(n):
                w.writerow([s, int(self.terminal[s]), repr(float(self.r[s]))] + [repr(float(p)) for p in self.P[s]])

    def as_mdp(self, start_state=0, seed=None) -> TabularMDP:
        """Single-action sampler whose reward on leaving ``s`` is ``r[s]``."""
        P = self.P[:, None, :].copy()
        R = np.broadcast_to(self.r[:, None, None], P.shape).copy()
        return TabularMDP(P, R, self.terminal, start_state, seed)

    @classmethod
    def from_csv(cls, path) -> "ExplicitModel":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0][0] != "state_count":
            raise ValueError(f"{path}: missing state_count header")
        n = int(rows[0][1])
        body = rows[2:2 + n]
        if len(body) != n:
            raise ValueError(f"{path}: expected {n} state rows, found {len(body)}")
        terminal = [bool(int(row[1])) for row in body]
        r = [float(row[2]) for row in body]
        P = [[float(x) for x in row[3:3 + n]] for row in body]
        return cls(np.array(P), np.array(r), np.array(terminal))


def _policy_array(policy, env):
    probs = np.asarray(getattr(policy, "probs", policy), dtype=float)
    if probs.shape != (env.state_count, env.n_actions):
        raise DomainError("policy", f"expected shape {(env.state_count, env.n_actions)}, got {probs.shape}")
    return probs


def export_model(env: FiniteMDP, policy) -> ExplicitModel:
    """Collapse ``env`` under ``policy`` into ``(P, r)``.

    ``policy`` is a :class:`complextd.agents.Policy` or an (S, A) array.
    """
    probs = _policy_array(policy, env)
    live = ~env.terminal
    if np.any(probs[live] < 0) or np.max(np.abs(probs[live].sum(axis=1) - 1.0), initial=0.0) > 1e-9:
        raise DomainError("policy", "rows must be distributions over actions")
    T, R = env.dynamics()
    P = np.einsum("sa,sat->st", probs, T)
    r = np.einsum("sa,sat,sat->s", probs, T, R)
    for s in np.flatnonzero(env.terminal):
        P[s] = 0.0
        P[s, s] = 1.0
        r[s] = 0.0
    return ExplicitModel(P, r, env.terminal.copy())


def expected_episode_length(model: ExplicitModel, start) -> float:
    """Mean number of steps until absorption, from ``(I - Q) t = 1``."""
    n = model.state_count
    if model.terminal[start]:
        return 0.0
    P = model.P
    # states reachable from start
    seen = {int(start)}
    frontier = [int(start)]
    while frontier:
        s = frontier.pop()
        if model.terminal[s]:
            continue
        for s2 in np.flatnonzero(P[s] > 0):
            if int(s2) not in seen:
                seen.add(int(s2))
                frontier.append(int(s2))
    # states that can reach a terminal
    reach = set(np.flatnonzero(model.terminal).tolist())
    changed = True
    while changed:
        changed = False
        for s in range(n):
            if s not in reach and np.any(P[s, list(reach)] > 0):
                reach.add(s)
                changed = True
    transient = sorted(s for s in seen if not model.terminal[s])
    if not reach.issuperset(transient) or not any(model.terminal[s] for s in seen):
        raise NoAbsorptionError("no absorption: some reachable states never reach a terminal state")
    Q = P[np.ix_(transient, transient)]
    t = np.linalg.solve(np.eye(len(transient)) - Q, np.ones(len(transient)))
    return float(t[transient.index(int(start))])


def episode_length_bound(model: ExplicitModel, start) -> int:
    """Ceiling of the expected episode length, used as a reconstruction length."""
    return math.ceil(expected_episode_length(model, start) - 1e-9)
