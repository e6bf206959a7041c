"""Damped Newton subproblem solver and Armijo line search."""

import numpy as np
import pytest

from mpecsvc.driver import initial_point
from mpecsvc.kkt import KktOperator, KktPoint
from mpecsvc.newton import (LineSearchError, NewtonConfig, armijo_search,
                            solve_subproblem)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            NewtonConfig(sigma=0.5)
        with pytest.raises(ValueError):
            NewtonConfig(sigma=0.0)
        with pytest.raises(ValueError):
            NewtonConfig(rho=1.0)


class TestArmijo:
    def test_quadratic_accepts_full_step(self):
        # g(s) = 0.5*(1-s)^2 along the exact Newton direction from s=0
        cfg = NewtonConfig()
        s = armijo_search(lambda s: 0.5 * (1 - s) ** 2, 0.5, -1.0, cfg)
        assert s == 1.0

    def test_backtracks_on_overshoot(self):
        # merit rises for full step, decreases for small ones
        cfg = NewtonConfig()
        s = armijo_search(lambda s: 0.5 * (1 - s) ** 2 + 4 * s**4,
                          0.5, -1.0, cfg)
        assert 0 < s < 1.0

    def test_requires_descent(self):
        with pytest.raises(ValueError):
            armijo_search(lambda s: s, 1.0, 0.0, NewtonConfig())

    def test_exhaustion_raises(self):
        cfg = NewtonConfig(max_backtracks=5)
        with pytest.raises(LineSearchError):
            armijo_search(lambda s: 1.0 + s * 0, 0.5, -1.0, cfg)


class TestSubproblem:
    def test_already_converged_returns_immediately(self, tiny_p):
        r0 = initial_point(tiny_p, 1.0)
        cfg = NewtonConfig(f_tol=1e9)
        r, trace, status = solve_subproblem(tiny_p, 1.0, r0, cfg)
        assert status == "converged"
        assert len(trace.rows) == 0
        np.testing.assert_allclose(r.v, r0.v)

    def test_converges_on_tiny_instance(self, tiny_p):
        eps = 0.5
        r0 = initial_point(tiny_p, 1.0)
        cfg = NewtonConfig(f_tol=1e-2 * eps * eps, max_iters=100)
        r, trace, status = solve_subproblem(tiny_p, eps, r0, cfg)
        assert status == "converged"
        op = KktOperator(tiny_p, r)
        normF = np.linalg.norm(op.residual())
        assert normF <= cfg.f_tol
        # complementarity characterization at the subproblem solution
        gap = np.max(np.abs(op.G * op.H - 0.5 * eps * eps))
        assert gap <= 10 * cfg.f_tol
        assert op.G.min() > 0 and op.H.min() > 0

    def test_trace_norm_decreases(self, tiny_p):
        r0 = initial_point(tiny_p, 1.0)
        cfg = NewtonConfig(f_tol=1e-3, max_iters=50)
        _, trace, _ = solve_subproblem(tiny_p, 0.5, r0, cfg)
        norms = trace.norms
        assert len(norms) >= 1
        assert all(b < a for a, b in zip(norms, norms[1:]))
        assert trace.total_lin_iters > 0

    def test_max_iters_status(self, tiny_p):
        r0 = initial_point(tiny_p, 1.0)
        cfg = NewtonConfig(f_tol=1e-14, max_iters=1)
        _, trace, status = solve_subproblem(tiny_p, 0.5, r0, cfg)
        assert status in ("max_iters", "line_search_failure")
        assert len(trace.rows) <= 2

    def test_warm_start_continuation(self, tiny_p):
        # solve at eps=0.5, then warm-start eps=0.25: few iterations needed
        r0 = initial_point(tiny_p, 1.0)
        cfg = NewtonConfig(f_tol=1e-3, max_iters=100)
        r1, _, s1 = solve_subproblem(tiny_p, 0.5, r0, cfg)
        assert s1 == "converged"
        cfg2 = NewtonConfig(f_tol=1e-3 / 4, max_iters=100)
        r2, trace2, s2 = solve_subproblem(tiny_p, 0.25, r1, cfg2)
        assert s2 == "converged"
        cold_cfg = NewtonConfig(f_tol=1e-3 / 4, max_iters=100)
        _, trace_cold, _ = solve_subproblem(tiny_p, 0.25,
                                            initial_point(tiny_p, 1.0), cold_cfg)
        assert len(trace2.rows) <= len(trace_cold.rows)
