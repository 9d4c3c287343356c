"""Shared model generators for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from adpkit import FiniteMDP


def random_stochastic(rng, rows: int, cols: int) -> np.ndarray:
    M = rng.uniform(0.05, 1.0, size=(rows, cols))
    return M / M.sum(axis=1, keepdims=True)


def random_mdp(
    rng,
    n_states: int,
    n_actions: int,
    beta: float,
    reward_range=(-1.0, 1.0),
    full_feasibility: bool = True,
) -> FiniteMDP:
    """A dense random finite decision process."""
    if full_feasibility:
        feasible = np.ones((n_states, n_actions), dtype=bool)
    else:
        feasible = rng.uniform(size=(n_states, n_actions)) < 0.7
        for x in range(n_states):
            if not feasible[x].any():
                feasible[x, rng.integers(n_actions)] = True
    reward = rng.uniform(*reward_range, size=(n_states, n_actions))
    P = np.zeros((n_states, n_actions, n_states))
    for x in range(n_states):
        for a in range(n_actions):
            if feasible[x, a]:
                P[x, a] = random_stochastic(rng, 1, n_states)[0]
    return FiniteMDP(n_states=n_states, n_actions=n_actions, feasible=feasible,
                     reward=reward, beta=beta, P=P)


def random_positive_mdp(rng, n_states, n_actions, beta, reward_range=(0.5, 2.0)):
    """Random process with strictly positive rewards (recursive-utility use)."""
    return random_mdp(rng, n_states, n_actions, beta, reward_range=reward_range)


def single_state_mdp(r: float = 1.0, beta: float = 0.5) -> FiniteMDP:
    return FiniteMDP(n_states=1, n_actions=1, feasible=np.ones((1, 1), bool),
                     reward=np.array([[r]]), beta=beta, P=np.ones((1, 1, 1)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
