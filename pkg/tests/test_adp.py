"""Solvers: sigma-values, greedy selection, Bellman steps, iteration, duality."""

import numpy as np
import pytest

from adpkit import (
    AdpError,
    AdpInstance,
    DivergenceError,
    DomainViolationError,
    NonConvergenceError,
    ValueVector,
    bellman_residual,
    bellman_step,
    dual,
    enumerate_policies,
    greedy,
    howard_iteration,
    make_mdp_adp,
    make_rs_adp,
    mdp_sigma_value_exact,
    pointwise_extremum,
    sigma_value,
    sup_distance,
    value_iteration,
)
from adpkit.models import FiniteMDP
from conftest import random_mdp, single_state_mdp


def two_state_two_action(rng):
    return random_mdp(rng, 2, 2, beta=0.9)


class TestSigmaValue:
    def test_single_state_geometric(self):
        adp = make_mdp_adp(single_state_mdp(r=1.0, beta=0.5))
        res = sigma_value(adp, np.array([0]))
        assert res.converged
        assert abs(res.value.values[0] - 2.0) < 1e-9

    def test_beta_zero_returns_reward(self, rng):
        m = random_mdp(rng, 3, 2, beta=0.0)
        adp = make_mdp_adp(m)
        sigma = np.array([1, 0, 1])
        res = sigma_value(adp, sigma)
        assert np.allclose(res.value.values, m.r_sigma(sigma), atol=1e-12)

    def test_matches_linear_solve_oracle(self, rng):
        tol = 1e-10
        for _ in range(10):
            m = two_state_two_action(rng)
            sigma = np.array([rng.integers(2), rng.integers(2)])
            exact = mdp_sigma_value_exact(m, sigma)
            res = sigma_value(make_mdp_adp(m), sigma, tol=tol)
            assert sup_distance(res.value, exact) <= 10 * tol / (1 - 0.9)

    def test_nonconvergence_raises(self):
        adp = make_mdp_adp(single_state_mdp(r=1.0, beta=0.99))
        with pytest.raises(NonConvergenceError):
            sigma_value(adp, np.array([0]), tol=1e-12, max_iter=5)

    def test_divergence_abort(self):
        # doubling map has no fixed point reachable from 0
        blow = AdpInstance(
            apply_policy=lambda s, v: ValueVector(2.0 * v.values + 1.0),
            initial_value=ValueVector(np.zeros(1)),
            n_states=1, n_actions=1, feasible=np.ones((1, 1), bool),
            decomposable=True,
        )
        with pytest.raises(DivergenceError):
            sigma_value(blow, np.array([0]))

    def test_infeasible_policy_rejected(self):
        m = FiniteMDP(
            n_states=2, n_actions=2,
            feasible=np.array([[True, False], [True, True]]),
            reward=np.zeros((2, 2)), beta=0.5,
            P=np.tile(np.array([0.5, 0.5]), (2, 2, 1)),
        )
        adp = make_mdp_adp(m)
        with pytest.raises(DomainViolationError):
            sigma_value(adp, np.array([1, 0]))


class TestGreedy:
    def _one_state(self, r0, r1):
        return FiniteMDP(
            n_states=1, n_actions=2, feasible=np.ones((1, 2), bool),
            reward=np.array([[r0, r1]]), beta=0.5,
            P=np.ones((1, 2, 1)),
        )

    def test_picks_larger_reward(self):
        adp = make_mdp_adp(self._one_state(1.0, 2.0))
        assert greedy(adp, ValueVector(np.zeros(1)), "max")[0] == 1

    def test_tie_breaks_to_first_index(self):
        adp = make_mdp_adp(self._one_state(1.0, 1.0))
        assert greedy(adp, ValueVector(np.zeros(1)), "max")[0] == 0

    def test_min_mode(self):
        adp = make_mdp_adp(self._one_state(1.0, 2.0))
        assert greedy(adp, ValueVector(np.zeros(1)), "min")[0] == 0

    def test_greedy_consistency_brute_force(self, rng):
        # apply(greedy(v), v) equals the pointwise extremum over all policies
        for _ in range(10):
            m = random_mdp(rng, 3, 2, beta=0.9, full_feasibility=False)
            adp = make_mdp_adp(m)
            v = ValueVector(rng.uniform(-5, 5, size=3))
            for mode in ("max", "min"):
                sigma = greedy(adp, v, mode)
                attained = adp.apply(sigma, v)
                everything = [adp.apply(s, v) for s in enumerate_policies(adp)]
                target = pointwise_extremum(everything, mode)
                assert np.array_equal(attained.values, target.values)

    def test_enumeration_cap(self, rng):
        m = random_mdp(rng, 4, 3, beta=0.5)
        adp = make_mdp_adp(m)
        capped = AdpInstance(
            apply_policy=adp.apply_policy, initial_value=adp.initial_value,
            n_states=4, n_actions=3, feasible=m.feasible,
            decomposable=False, policy_cap=10,
        )
        with pytest.raises(AdpError):
            greedy(capped, ValueVector(np.zeros(4)), "max")


class TestBellman:
    def test_zero_value_gives_max_reward(self, rng):
        m = random_mdp(rng, 4, 3, beta=0.9, full_feasibility=False)
        adp = make_mdp_adp(m)
        out = bellman_step(adp, ValueVector(np.zeros(4)), "max")
        expected = np.where(m.feasible, m.reward, -np.inf).max(axis=1)
        assert np.allclose(out.values, expected, atol=1e-12)

    def test_equals_enumerated_extremum(self, rng):
        m = two_state_two_action(rng)
        adp = make_mdp_adp(m)
        v = ValueVector(rng.uniform(-3, 3, size=2))
        everything = [adp.apply(s, v) for s in enumerate_policies(adp)]
        assert np.array_equal(
            bellman_step(adp, v, "max").values,
            pointwise_extremum(everything, "max").values)

    def test_risk_sensitive_constant_value(self, rng):
        m = random_mdp(rng, 3, 2, beta=0.9)
        adp = make_rs_adp(m, theta=1.5)
        c = 0.7
        out = bellman_step(adp, ValueVector(np.full(3, c)), "max")
        expected = m.reward.max(axis=1) + 0.9 * c
        assert np.allclose(out.values, expected, atol=1e-12)

    def test_residual_brute_force(self, rng):
        m = two_state_two_action(rng)
        adp = make_mdp_adp(m)
        v = ValueVector(rng.uniform(-3, 3, size=2))
        everything = np.stack([adp.apply(s, v).values for s in enumerate_policies(adp)])
        expected = np.max(np.abs(everything.max(axis=0) - v.values))
        assert bellman_residual(adp, v, "max") == pytest.approx(expected, abs=1e-15)

    def test_residual_single_state(self):
        adp = make_mdp_adp(single_state_mdp(r=1.0, beta=0.5))
        assert bellman_residual(adp, ValueVector(np.zeros(1)), "max") == pytest.approx(1.0)


class TestValueIteration:
    def test_single_state(self):
        adp = make_mdp_adp(single_state_mdp(r=1.0, beta=0.5))
        res = value_iteration(adp, "max")
        assert res.converged
        assert abs(res.value.values[0] - 2.0) < 1e-9

    def test_beta_zero_converges_fast(self, rng):
        m = random_mdp(rng, 3, 2, beta=0.0)
        res = value_iteration(make_mdp_adp(m), "max")
        assert res.iterations <= 2
        assert np.allclose(res.value.values, m.reward.max(axis=1), atol=1e-12)

    def test_contraction_rate_bound(self, rng):
        # residual after k steps <= beta^k * (initial residual) / (1 - beta)
        beta = 0.9
        m = random_mdp(rng, 3, 2, beta=beta)
        adp = make_mdp_adp(m)
        v = adp.initial_value
        res0 = bellman_residual(adp, v, "max")
        for k in range(1, 30):
            v = bellman_step(adp, v, "max")
            res_k = bellman_residual(adp, v, "max")
            assert res_k <= beta ** k * res0 / (1 - beta) + 1e-12

    def test_agrees_with_howard(self, rng):
        tol = 1e-10
        m = random_mdp(rng, 3, 2, beta=0.9)
        adp = make_mdp_adp(m)
        vi = value_iteration(adp, "max", tol=tol)
        hw = howard_iteration(adp, "max", tol=tol)
        assert sup_distance(vi.value, hw.value) <= 10 * tol / (1 - 0.9)

    def test_residual_at_converged_value_within_tol(self, rng):
        tol = 1e-10
        m = random_mdp(rng, 4, 3, beta=0.9)
        adp = make_mdp_adp(m)
        res = value_iteration(adp, "max", tol=tol)
        assert res.converged
        assert bellman_residual(adp, res.value, "max") <= tol


class TestHoward:
    def test_two_state_agreement_and_bounds(self, rng):
        tol = 1e-12
        for _ in range(10):
            m = two_state_two_action(rng)
            adp = make_mdp_adp(m)
            hw = howard_iteration(adp, "max", tol=tol)
            vi = value_iteration(adp, "max", tol=1e-12)
            assert sup_distance(hw.value, vi.value) <= 1e-9
            assert hw.iterations <= adp.n_policies  # finitely many steps
            # improvement path is monotone increasing
            for earlier, later in zip(hw.history, hw.history[1:]):
                assert np.all(earlier.values <= later.values + 1e-9)

    def test_policy_is_greedy_at_its_value(self, rng):
        m = two_state_two_action(rng)
        adp = make_mdp_adp(m)
        hw = howard_iteration(adp, "max", tol=1e-12)
        assert bellman_residual(adp, hw.value, "max") <= 1e-9
        sigma_star = greedy(adp, hw.value, "max")
        assert np.array_equal(
            adp.apply(sigma_star, hw.value).values,
            bellman_step(adp, hw.value, "max").values)


class TestDual:
    def test_involution(self, rng):
        m = two_state_two_action(rng)
        adp = make_mdp_adp(m)
        twice = dual(dual(adp))
        v = ValueVector(rng.uniform(-3, 3, size=2))
        for sigma in enumerate_policies(adp):
            assert np.array_equal(adp.apply(sigma, v).values,
                                  twice.apply(sigma, v).values)
        assert np.array_equal(greedy(adp, v, "max"), greedy(twice, v, "max"))

    def test_greedy_order_reversal(self, rng):
        m = two_state_two_action(rng)
        adp = make_mdp_adp(m)
        for _ in range(5):
            v = ValueVector(rng.uniform(-3, 3, size=2))
            assert np.array_equal(greedy(dual(adp), v, "max"), greedy(adp, v, "min"))

    def test_howard_duality(self, rng):
        m = two_state_two_action(rng)
        adp = make_mdp_adp(m)
        max_on_dual = howard_iteration(dual(adp), "max", tol=1e-12)
        min_direct = howard_iteration(adp, "min", tol=1e-12)
        assert sup_distance(max_on_dual.value, min_direct.value) <= 1e-9
        assert np.array_equal(max_on_dual.policy, min_direct.policy)

    def test_min_suite_via_dual(self, rng):
        # the min-optimality suite is the max suite on the dual
        m = two_state_two_action(rng)
        adp = make_mdp_adp(m)
        res = howard_iteration(dual(adp), "max", tol=1e-12)
        # min-value dominates no other policy value
        for sigma in enumerate_policies(adp):
            v_sig = mdp_sigma_value_exact(m, sigma)
            assert np.all(res.value.values <= v_sig.values + 1e-8)


class TestOrderPreservation:
    def test_mdp_operator_preserves_order(self, rng):
        m = random_mdp(rng, 4, 3, beta=0.9)
        adp = make_mdp_adp(m)
        for _ in range(20):
            base = rng.uniform(-5, 5, size=4)
            u = ValueVector(base)
            v = ValueVector(base + rng.uniform(1e-6, 2.0, size=4))
            for sigma in [np.zeros(4, np.int64), np.full(4, 2, np.int64)]:
                tu = adp.apply(sigma, u)
                tv = adp.apply(sigma, v)
                assert np.all(tu.values <= tv.values)
