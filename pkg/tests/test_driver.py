"""Outer smoothing loop, post-processing, and diagnostics."""

import numpy as np
import pytest

import mpecsvc as M
from mpecsvc import problem as pb
from mpecsvc.driver import (OuterConfig, classify_index_sets, cv_error,
                            eps_schedule, initial_point, near_zero_margins,
                            postprocess, run_smoothing)
from mpecsvc.driver import test_error as holdout_error
from mpecsvc.kkt import KktOperator
from mpecsvc.newton import NewtonConfig


class TestSchedule:
    def test_default_has_21_values(self):
        sched = eps_schedule(OuterConfig())
        assert len(sched) == 21
        assert sched[0] == 1.0
        assert sched[-1] <= 1e-6 < sched[-2]
        ratios = [b / a for a, b in zip(sched, sched[1:])]
        np.testing.assert_allclose(ratios, 0.5)

    def test_custom(self):
        sched = eps_schedule(OuterConfig(eps0=1.0, eps_min=0.3, kappa=0.5))
        assert sched == [1.0, 0.5, 0.25]

    def test_validation(self):
        with pytest.raises(ValueError):
            OuterConfig(eps0=1e-8, eps_min=1.0)
        with pytest.raises(ValueError):
            OuterConfig(kappa=1.0)


class TestInitialPoint:
    def test_structure(self, tiny_p):
        r = initial_point(tiny_p, 2.0)
        assert r.v[0] == 2.0
        C, zeta, z, alpha, xi = tiny_p.split_v(r.v)
        np.testing.assert_allclose(zeta, 0.5)
        np.testing.assert_allclose(alpha, 0.5)
        np.testing.assert_array_equal(r.lam, 0.0)

    def test_small_C_shrinks_alpha(self, tiny_p):
        r = initial_point(tiny_p, 0.4)
        _, _, _, alpha, _ = tiny_p.split_v(r.v)
        np.testing.assert_allclose(alpha, 0.2)

    def test_rejects_nonpositive_C(self, tiny_p):
        with pytest.raises(ValueError):
            initial_point(tiny_p, 0.0)


@pytest.fixture(scope="module")
def tiny_solution(tiny_p):
    ocfg = OuterConfig(eps0=1.0, eps_min=1e-4, kappa=0.5)
    ncfg = NewtonConfig(max_iters=100)
    return run_smoothing(tiny_p, ocfg, ncfg)


class TestSmoothingLoop:
    def test_record_count_matches_schedule(self, tiny_p, tiny_solution):
        _, report = tiny_solution
        assert report.outer_iters == len(eps_schedule(
            OuterConfig(eps0=1.0, eps_min=1e-4, kappa=0.5)))
        assert report.inner_iters_total == sum(
            rec.inner_iters for rec in report.outer_records)

    def test_converged_subproblems_satisfy_gap(self, tiny_p, tiny_solution):
        _, report = tiny_solution
        converged = [rec for rec in report.outer_records
                     if rec.status == "converged"]
        assert converged, "no subproblem converged on the tiny instance"
        for rec in converged:
            assert rec.normF <= rec.f_tol
            assert rec.max_comp_gap <= 10 * rec.f_tol
            assert rec.min_G > 0 and rec.min_H > 0

    def test_report_consistency(self, tiny_p, tiny_solution):
        v_star, report = tiny_solution
        assert report.C_raw == pytest.approx(v_star.C)
        assert report.E_cv == pytest.approx(cv_error(tiny_p, v_star))
        assert report.final_point is not None
        d = report.to_dict(dataset="x", dims={"m": tiny_p.m})
        assert d["C_raw"] == report.C_raw
        assert d["dims"]["m"] == 36

    def test_deterministic(self, tiny_p, tiny_solution):
        v_a, rep_a = tiny_solution
        ocfg = OuterConfig(eps0=1.0, eps_min=1e-4, kappa=0.5)
        v_b, rep_b = run_smoothing(tiny_p, ocfg, NewtonConfig(max_iters=100))
        np.testing.assert_array_equal(v_a.to_vector(), v_b.to_vector())
        assert rep_a.E_cv == rep_b.E_cv


class TestPostprocess:
    def test_rescales_C(self, tiny_ds, tiny_plan, tiny_p):
        v = initial_point(tiny_p, 1.2).v
        pt = pb.PrimalPoint.from_vector(tiny_p, v)
        C_hat, w = postprocess(tiny_p, pt, tiny_ds, tiny_plan)
        assert C_hat == pytest.approx(1.2 * 3 / 2)
        assert w.shape == (tiny_ds.n_features,)

    def test_test_error_empty_set(self, tiny_ds):
        assert holdout_error(tiny_ds, (), np.zeros(4)) == 0.0


class TestDiagnostics:
    def test_classify_index_sets(self, tiny_p):
        v = np.abs(np.random.default_rng(0).standard_normal(tiny_p.m + 1)) + 1.0
        sizes, listing = classify_index_sets(tiny_p, v)
        assert set(sizes) == {"I_0+", "I_+0", "I_00"}
        assert sum(sizes.values()) <= tiny_p.m
        assert all(len(listing[k]) == sizes[k] for k in sizes)

    def test_assumption2_two_path_agreement(self, tiny_p):
        ocfg = OuterConfig(eps0=1.0, eps_min=1e-3, kappa=0.5)
        _, report = run_smoothing(tiny_p, ocfg, NewtonConfig(max_iters=100))
        diag = M.assumption2_value(tiny_p, report.final_point)
        rel = abs(diag["A2_cone"] - diag["A2_cone_alt"]) / max(
            abs(diag["A2_cone"]), 1e-300)
        assert rel <= 1e-8
        # U spans null(J_v Phi): apply the constraint Jacobian to it
        op = KktOperator(tiny_p, report.final_point)
        JU = op.jac_apply(diag["U"])
        assert np.linalg.norm(JU) <= 1e-6 * max(np.linalg.norm(diag["U"]), 1.0)

    def test_near_zero_margins_flags(self, tiny_ds, tiny_plan, tiny_p):
        flagged = near_zero_margins(tiny_p, tiny_ds, tiny_plan, np.zeros(4),
                                    tol=1e-10)
        # zero weights give zero margins everywhere
        assert len(flagged) == tiny_plan.T * tiny_plan.m1
