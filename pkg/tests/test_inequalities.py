import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greedy_ocrs.constraints import TransversalConstraint
from greedy_ocrs.inequalities import (
    INV_E,
    ONE_MINUS_INV_E,
    claim_functions_check,
    fk,
    lemma5_check,
    transversal_bounds,
    verify_suite,
)

unit = st.floats(0.0, 1.0, allow_nan=False)


class TestLogInequality:
    def test_zero_vector(self):
        assert lemma5_check([0.0, 0.0, 0.0]) == (0.0, 0.0)

    def test_single_full_coordinate(self):
        lhs, rhs = lemma5_check([1.0])
        assert lhs == pytest.approx(math.log(0.5)) and rhs == -1.0
        assert lhs >= rhs

    def test_order_matters(self):
        # the arriving coordinate gets the weaker factor
        a, b = lemma5_check([0.9, 0.1]), lemma5_check([0.1, 0.9])
        assert a[1] == b[1] and a[0] != b[0]

    @settings(max_examples=500)
    @given(st.lists(unit, min_size=1, max_size=12))
    def test_holds(self, a):
        lhs, rhs = lemma5_check(a)
        assert lhs >= rhs - 1e-15

    @pytest.mark.parametrize("bad", [[], [1.5], [-0.1, 0.2]])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            lemma5_check(bad)


class TestClaimFunctions:
    def test_endpoints(self):
        assert claim_functions_check(0.0) == (1.0, 1.0)
        f, g = claim_functions_check(1.0)
        assert f == pytest.approx(math.e / 2) and g == pytest.approx(math.e / 2)

    def test_vectorised(self):
        f, g = claim_functions_check(np.linspace(0, 1, 1001))
        assert np.all(f >= 1) and np.all(g >= 1)
        assert np.all(np.diff(f) >= 0) and np.all(np.diff(g) >= 0)

    def test_domain(self):
        with pytest.raises(ValueError):
            claim_functions_check(1.01)


class TestFk:
    def test_one_at_right_end(self):
        assert fk(1, 1.0) == pytest.approx(ONE_MINUS_INV_E)
        assert fk(3, 1.0) == pytest.approx(ONE_MINUS_INV_E, abs=1e-12)

    def test_small_x_limit(self):
        assert fk(1, 0.0) == pytest.approx(INV_E)
        assert fk(2, 0.0) == pytest.approx(1 - (1 - INV_E) ** 2)

    def test_increasing_in_k(self):
        xs = np.linspace(0, 1, 101)
        assert np.all(fk(4, xs) >= fk(3, xs))

    @settings(max_examples=300)
    @given(st.integers(3, 40), unit)
    def test_floor_from_three(self, k, x):
        assert fk(k, x) >= ONE_MINUS_INV_E - 1e-12

    def test_rejects_k_zero(self):
        with pytest.raises(ValueError):
            fk(0, 0.5)


class TestTransversalBounds:
    def test_single_edge(self):
        g = TransversalConstraint(1, 1, ((0,),))
        b = transversal_bounds(g, [1.0], 0)
        assert b.hit_probability == pytest.approx(ONE_MINUS_INV_E)
        assert b.blocking_bound == 0.0
        assert b.lower_bound == pytest.approx(ONE_MINUS_INV_E)

    def test_matches_fk(self):
        g = TransversalConstraint(2, 3, ((0, 1, 2), (1,)))
        for u, k in ((0, 3), (1, 1)):
            assert transversal_bounds(g, [0.4, 0.3], u).lower_bound == pytest.approx(fk(k, [0.4, 0.3][u]))

    def test_zero_x(self):
        g = TransversalConstraint(1, 2, ((0, 1),))
        b = transversal_bounds(g, [0.0], 0)
        assert b.hit_probability == 1.0

    def test_bad_element(self):
        g = TransversalConstraint(1, 1, ((0,),))
        with pytest.raises(ValueError):
            transversal_bounds(g, [0.5], 1)


class TestSuite:
    def test_default_suite_passes(self):
        res = verify_suite()
        failed = [c.name for c in res.checks if not c.passed]
        assert res.passed, failed
        assert len(res.checks) >= 20

    def test_witness_only_on_failure(self):
        res = verify_suite(vectors=200, claim_step=1e-2, fk_step=1e-2, fk_max=4)
        assert all(c.witness is None for c in res.checks)
