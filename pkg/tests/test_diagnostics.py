import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import CLINICAL_Y, EX2_A, TREE_A, TREE_D
from loglinmle import (adjustment_factor, affine_closed_form_mle,
                       degrees_of_freedom, deviance, fit_multinomial,
                       gof_report, grid_search_mle, pearson_chi2,
                       tree_model_mle)
from loglinmle.errors import (BoundaryMLE, InconsistentFactor,
                              OracleResolutionExceeded, ZeroExpected)
from loglinmle.fitter import as_kernel
from loglinmle.oracles import AFFINE_DESIGN, AFFINE_KERNEL


class TestStatistics:

    def test_pearson_by_hand(self):
        assert pearson_chi2([.5, .5], [1, 3]) == pytest.approx(1.0, rel=1e-15)

    def test_deviance_by_hand(self):
        expected = 2 * (math.log(0.5) + 3 * math.log(1.5))
        assert deviance([.5, .5], [1, 3]) == pytest.approx(expected, rel=1e-14)
        assert deviance([.5, .5], [1, 3]) == pytest.approx(1.0465, abs=1e-4)

    def test_perfect_fit(self):
        y = np.array([3., 5, 2])
        assert pearson_chi2(y / y.sum(), y) == 0
        assert deviance(y / y.sum(), y) == pytest.approx(0, abs=1e-15)

    def test_zero_counts_in_deviance(self):
        assert np.isfinite(deviance([.25, .75], [0, 4]))

    def test_zero_expected(self):
        with pytest.raises(ZeroExpected):
            pearson_chi2([0, 1], [1, 1])

    def test_clinical(self):
        p = tree_model_mle(CLINICAL_Y).estimate
        assert pearson_chi2(p, CLINICAL_Y) == pytest.approx(11.85, abs=0.01)
        assert deviance(p, CLINICAL_Y) == pytest.approx(14.65, abs=0.05)

    @pytest.mark.parametrize("shape, df", [((2, 4), 2), ((3, 3), 0), ((3, 7), 4)])
    def test_df(self, shape, df):
        assert degrees_of_freedom(np.ones(shape)) == df

    def test_report_poisson_deviance_non_negative(self):
        from loglinmle import fit_poisson
        y = [1, 2, 3, 4]
        r = fit_poisson(EX2_A, y)
        rep = gof_report(r.estimate, y, EX2_A, "poisson")
        assert rep.deviance_g2 >= 0 and rep.df == 2


class TestAdjustmentFactor:

    def test_clinical_closed_form(self):
        res = tree_model_mle(CLINICAL_Y)
        z1, z3 = 308, 428
        expected = 200 * (z1 ** 2 + z1 * z3 + z3 ** 2) / z3 ** 3
        q = np.asarray(CLINICAL_Y) / 200
        assert adjustment_factor(res.estimate, q, TREE_A) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(1.0455, abs=1e-4)

    def test_identity(self):
        q = np.array([.1, .2, .3, .4])
        assert adjustment_factor(q, q, EX2_A) == 1.0

    def test_ex3(self):
        res = affine_closed_form_mle([1, 2, 3, 4])
        assert adjustment_factor(res.estimate, np.array([1, 2, 3, 4]) / 10,
                                 EX2_A) == pytest.approx(0.7196, abs=1e-4)

    def test_inconsistent(self):
        with pytest.raises(InconsistentFactor):
            adjustment_factor([.4, .1, .1, .4], [.1, .2, .3, .4], EX2_A)

    def test_sampled_counts(self):
        rng = np.random.default_rng(0)
        for y in rng.integers(1, 101, size=(200, 4)):
            res = tree_model_mle(y)
            z = res.intermediates
            n = y.sum()
            expected = n * (z["z1"] ** 2 + z["z1"] * z["z3"] + z["z3"] ** 2) / z["z3"] ** 3
            got = adjustment_factor(res.estimate, y / n, TREE_A, tol=1e-10)
            assert got == pytest.approx(expected, abs=1e-10)


class TestTreeClosedForm:

    def test_clinical(self):
        res = tree_model_mle(CLINICAL_Y)
        assert (res.intermediates["z1"], res.intermediates["z2"], res.intermediates["z3"]) \
            == (308, 120, 428)
        expected = [(308 / 428) ** 3, 308 ** 2 * 120 / 428 ** 3, 308 * 120 / 428 ** 2, 120 / 428]
        np.testing.assert_allclose(res.estimate, expected, rtol=1e-14)
        np.testing.assert_allclose(res.estimate, [0.3727, 0.1452, 0.2018, 0.2804], atol=1e-4)

    def test_ones(self):
        res = tree_model_mle([1, 1, 1, 1])
        assert res.exact == (Fraction(8, 27), Fraction(4, 27), Fraction(2, 9), Fraction(1, 3))
        assert sum(res.exact) == 1

    def test_boundary(self):
        with pytest.raises(BoundaryMLE):
            tree_model_mle([1, 0, 0, 0])

    def test_odds_constraints(self):
        rng = np.random.default_rng(1)
        D = as_kernel(TREE_D)
        for y in rng.integers(0, 50, size=(100, 4)):
            try:
                res = tree_model_mle(y)
            except BoundaryMLE:
                continue
            assert sum(res.exact) == 1
            np.testing.assert_allclose(D.log_odds(res.estimate), 0, atol=1e-10)


class TestAffineClosedForm:

    def test_reference_data(self):
        res = affine_closed_form_mle([1, 2, 3, 4])
        assert res.intermediates == {"z1": 17, "z2": 18, "z3": 15, "z4": 16}
        np.testing.assert_allclose(res.estimate, [0.6618, 0.1149, 0.1869, 0.0365], atol=1e-4)
        assert res.gamma == pytest.approx(0.7196, abs=1e-4)

    def test_ones(self):
        # z = (6, 6, 6, 6): r = (2/3, 4/27, 4/27, 1/27)
        res = affine_closed_form_mle([1, 1, 1, 1])
        assert res.exact == (Fraction(2, 3), Fraction(4, 27), Fraction(4, 27), Fraction(1, 27))

    def test_zero_cells(self):
        res = affine_closed_form_mle([0, 0, 0, 5])
        assert all(v == 10 for v in res.intermediates.values())
        assert sum(res.exact) == 1

    def test_constraints_and_common_factor(self):
        rng = np.random.default_rng(2)
        D = as_kernel(AFFINE_KERNEL)
        for y in rng.integers(0, 30, size=(100, 4)):
            if y.sum() == 0:
                continue
            res = affine_closed_form_mle(y)
            assert sum(res.exact) == 1
            np.testing.assert_allclose(D.log_odds(res.estimate),
                                       [math.log(12), math.log(9 / 8)], atol=1e-10)
            adjustment_factor(res.estimate, y / y.sum(), AFFINE_DESIGN, tol=1e-12)


class TestGridSearch:

    def test_ex2_poisson(self):
        np.testing.assert_allclose(grid_search_mle(EX2_A, [1, 2, 3, 4], "poisson"),
                                   [1.8575, 2.0805, 3.0806, 3.4504], atol=1e-3)

    def test_tree_multinomial(self):
        np.testing.assert_allclose(grid_search_mle(TREE_A, CLINICAL_Y, "multinomial"),
                                   tree_model_mle(CLINICAL_Y).estimate, atol=1e-4)

    def test_saturated(self):
        eye = np.eye(3, dtype=int).tolist()
        y = np.array([2., 5, 3])
        np.testing.assert_allclose(grid_search_mle(eye, y, "poisson"), y, rtol=1e-6)
        np.testing.assert_allclose(grid_search_mle(eye, y, "multinomial"), y / 10, atol=1e-8)

    def test_three_rows(self):
        A = [[1, 1, 0, 0, 1, 2], [0, 1, 1, 1, 0, 1], [1, 0, 0, 2, 1, 0]]
        y = [3, 4, 5, 6, 2, 1]
        fit = fit_multinomial(A, y).estimate
        np.testing.assert_allclose(grid_search_mle(A, y, "multinomial"), fit, atol=1e-6)

    def test_too_many_rows(self):
        with pytest.raises(OracleResolutionExceeded):
            grid_search_mle(np.eye(4, dtype=int).tolist(), [1, 2, 3, 4])

    def test_out_of_box(self):
        # intensity exp(12) lies outside the default log box
        with pytest.raises(OracleResolutionExceeded):
            grid_search_mle([[1]], [math.exp(12)], "poisson")
