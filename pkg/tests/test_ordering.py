"""Partial order, extrema, distances, and the stability probe."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from adpkit import (
    DimensionMismatchError,
    DomainViolationError,
    FixedPointError,
    OrderVerdict,
    ProbeVerdict,
    ValueVector,
    make_mdp_adp,
    mdp_sigma_value_exact,
    pointwise_compare,
    pointwise_extremum,
    sigma_value,
    stability_probe,
    sup_distance,
)
from conftest import random_mdp, single_state_mdp

FINITE = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


def vv(*xs):
    return ValueVector(np.array(xs, dtype=float))


class TestValueVector:
    def test_rejects_nan(self):
        with pytest.raises(DomainViolationError):
            ValueVector(np.array([1.0, np.nan]))

    def test_rejects_infinity(self):
        with pytest.raises(DomainViolationError):
            ValueVector(np.array([np.inf, 0.0]))

    def test_positivity_flag_enforced(self):
        with pytest.raises(DomainViolationError):
            ValueVector(np.array([1.0, 0.0]), positivity_required=True)
        v = ValueVector(np.array([1.0, 2.0]), positivity_required=True)
        assert v.index_count == 2

    def test_values_frozen(self):
        v = vv(1.0, 2.0)
        with pytest.raises(ValueError):
            v.values[0] = 5.0


class TestCompare:
    def test_le(self):
        assert pointwise_compare(vv(1, 2), vv(1, 3)) is OrderVerdict.LE

    def test_eq(self):
        assert pointwise_compare(vv(1, 2), vv(1, 2)) is OrderVerdict.EQ

    def test_incomparable(self):
        assert pointwise_compare(vv(1, 3), vv(2, 1)) is OrderVerdict.INCOMPARABLE

    def test_ge(self):
        assert pointwise_compare(vv(2, 3), vv(1, 3)) is OrderVerdict.GE

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            pointwise_compare(vv(1, 2), vv(1, 2, 3))

    @given(arrays(np.float64, 3, elements=FINITE))
    def test_reflexive(self, x):
        v = ValueVector(x)
        assert pointwise_compare(v, v) is OrderVerdict.EQ

    @given(arrays(np.float64, 4, elements=FINITE), arrays(np.float64, 4, elements=FINITE))
    def test_antisymmetric(self, x, y):
        u, v = ValueVector(x), ValueVector(y)
        if (pointwise_compare(u, v) in (OrderVerdict.LE, OrderVerdict.EQ)
                and pointwise_compare(v, u) in (OrderVerdict.LE, OrderVerdict.EQ)):
            assert np.array_equal(u.values, v.values)

    @given(arrays(np.float64, 3, elements=FINITE), arrays(np.float64, 3, elements=FINITE),
           arrays(np.float64, 3, elements=FINITE))
    def test_transitive(self, x, y, z):
        u, v, w = ValueVector(x), ValueVector(y), ValueVector(z)
        uv = pointwise_compare(u, v) in (OrderVerdict.LE, OrderVerdict.EQ)
        vw = pointwise_compare(v, w) in (OrderVerdict.LE, OrderVerdict.EQ)
        if uv and vw:
            assert pointwise_compare(u, w) in (OrderVerdict.LE, OrderVerdict.EQ)


class TestExtremum:
    def test_max(self):
        out = pointwise_extremum([vv(1, 3), vv(2, 1)], "max")
        assert np.array_equal(out.values, [2, 3])

    def test_min(self):
        out = pointwise_extremum([vv(1, 3), vv(2, 1)], "min")
        assert np.array_equal(out.values, [1, 1])

    def test_singleton_identity(self):
        out = pointwise_extremum([vv(5, 5)], "max")
        assert np.array_equal(out.values, [5, 5])

    def test_empty_family(self):
        with pytest.raises(ValueError):
            pointwise_extremum([], "max")

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            pointwise_extremum([vv(1), vv(1, 2)], "max")

    @settings(max_examples=50)
    @given(st.lists(arrays(np.float64, 3, elements=FINITE), min_size=1, max_size=6))
    def test_is_least_upper_bound(self, fam):
        family = [ValueVector(x) for x in fam]
        top = pointwise_extremum(family, "max")
        for member in family:
            assert np.all(member.values <= top.values)
        # any other upper bound dominates the supremum
        bound = ValueVector(np.max([f.values for f in family], axis=0) + 1.0)
        assert np.all(top.values <= bound.values)


class TestSupDistance:
    def test_simple(self):
        assert sup_distance(vv(1, 2), vv(1, 3)) == 1.0

    def test_identity(self):
        v = vv(0.3, -2.0)
        assert sup_distance(v, v) == 0.0

    def test_signed(self):
        assert sup_distance(vv(0, 0), vv(-2, 1)) == 2.0


class TestStabilityProbe:
    def test_single_state_upward(self):
        adp = make_mdp_adp(single_state_mdp(r=1.0, beta=0.5))
        fp = vv(2.0)  # geometric series 1/(1-beta)
        T = lambda v: adp.apply(np.array([0]), v)
        assert stability_probe(T, fp, vv(1.0)) is ProbeVerdict.UPWARD_OK

    def test_single_state_downward(self):
        adp = make_mdp_adp(single_state_mdp(r=1.0, beta=0.5))
        T = lambda v: adp.apply(np.array([0]), v)
        assert stability_probe(T, vv(2.0), vv(3.0)) is ProbeVerdict.DOWNWARD_OK

    def test_bad_fixed_point_rejected(self):
        adp = make_mdp_adp(single_state_mdp(r=1.0, beta=0.5))
        T = lambda v: adp.apply(np.array([0]), v)
        with pytest.raises(FixedPointError):
            stability_probe(T, vv(1.0), vv(0.5))

    def test_two_state_against_linear_solve_oracle(self, rng):
        # verdicts must agree with the exact fixed point from the linear solve
        for trial in range(20):
            m = random_mdp(rng, 2, 2, beta=0.9)
            sigma = np.array([rng.integers(2), rng.integers(2)])
            v_bar = mdp_sigma_value_exact(m, sigma)
            adp = make_mdp_adp(m)
            T = lambda v: adp.apply(sigma, v)
            # comparable sample: shift the exact fixed point by a constant
            c = rng.uniform(0.1, 3.0)
            eta = rng.uniform(0, c * (1 - 0.9) / (1 + 0.9) * 0.9, size=2)
            below = ValueVector(v_bar.values - c + eta)
            above = ValueVector(v_bar.values + c - eta)
            assert stability_probe(T, v_bar, below, fp_tol=1e-8) is ProbeVerdict.UPWARD_OK
            assert stability_probe(T, v_bar, above, fp_tol=1e-8) is ProbeVerdict.DOWNWARD_OK

    def test_incomparable_sample_not_applicable(self, rng):
        m = random_mdp(rng, 3, 2, beta=0.9)
        sigma = np.zeros(3, dtype=np.int64)
        fp = sigma_value(make_mdp_adp(m), sigma, tol=1e-12).value
        adp = make_mdp_adp(m)
        T = lambda v: adp.apply(sigma, v)
        found = False
        for _ in range(200):
            sample = ValueVector(rng.uniform(-20, 20, size=3))
            if stability_probe(T, fp, sample, fp_tol=1e-9) is ProbeVerdict.NOT_APPLICABLE:
                found = True
                break
        assert found
