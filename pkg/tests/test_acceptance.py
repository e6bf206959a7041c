"""Acceptance gate: the ten headline checks, one PASS/FAIL line each.

Heavyweight fixtures (the full continuation solve and the 25-point grid
oracle on the bundled dataset) are module-scoped so the expensive work runs
once.  Each test prints a single PASS/FAIL line naming the check, then
asserts.
"""

import json
import time

import numpy as np
import pytest

import mpecsvc as M
from mpecsvc import problem as pb
from mpecsvc.driver import (OuterConfig, postprocess, run_smoothing)
from mpecsvc.driver import test_error as holdout_error
from mpecsvc.kkt import KktOperator, KktPoint, licq_probe
from mpecsvc.newton import NewtonConfig
from mpecsvc.smoothing import fb_value
from mpecsvc.svc import DualSvcConfig, grid_search, solve_l1svc_dual

from conftest import make_tiny_dataset
from test_svc import brute_force_box_qp


def report(name, ok, detail=""):
    print(f"\n{'PASS' if ok else 'FAIL'} {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def solve_result(heart_ds, heart_plan, heart_p):
    t0 = time.perf_counter()
    pt, rep = run_smoothing(heart_p, OuterConfig(), NewtonConfig(max_iters=100))
    C_hat, w = postprocess(heart_p, pt, heart_ds, heart_plan)
    E_te = holdout_error(heart_ds, heart_plan.test_indices, w)
    wall = time.perf_counter() - t0
    return {"point": pt, "report": rep, "C_hat": C_hat, "w": w,
            "E_te": E_te, "wall": wall}


@pytest.fixture(scope="module")
def grid_result(heart_ds, heart_plan):
    grid = np.logspace(-3, 3, 25)
    return grid_search(heart_ds, heart_plan, grid)


@pytest.fixture(scope="module")
def tail_trace(heart_p):
    """Warm-started subproblem at eps = 1e-2 for the convergence-rate check."""
    ocfg = OuterConfig(eps_min=2e-2)   # chain down to eps = 0.015625
    pt, rep = run_smoothing(heart_p, ocfg, NewtonConfig(max_iters=100))
    eps = 1e-2
    cfg = NewtonConfig(max_iters=100, f_tol=1e-2 * eps * eps)
    r, trace, status = M.solve_subproblem(heart_p, eps, rep.final_point, cfg)
    return trace, status, rep


def test_01_derivative_suite(heart_p):
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    eps_values = [1.0, 1e-2, 1e-4]
    worst = {"jac": 0.0, "hess": 0.0, "kkt": 0.0, "merit": 0.0, "sym": 0.0}

    def rel(got, fd):
        return float(np.linalg.norm(got - fd)
                     / max(np.linalg.norm(fd), 1e-12))

    for i in range(20):
        eps = eps_values[i % 3]
        v = rng.standard_normal(heart_p.m + 1)
        lam = rng.standard_normal(heart_p.m)
        r = KktPoint(v=v, lam=lam, eps=eps)
        op = KktOperator(heart_p, r)
        h = 1e-6

        d = rng.standard_normal(heart_p.m + 1)
        phi = lambda x: fb_value(pb.eval_G(heart_p, x),
                                 pb.eval_H(heart_p, x), eps)
        fd = (phi(v + h * d) - phi(v - h * d)) / (2 * h)
        worst["jac"] = max(worst["jac"], rel(op.jac_apply(d), fd))

        def gradL(x):
            o = KktOperator(heart_p, KktPoint(v=x, lam=lam, eps=eps))
            return heart_p.obj_grad - o.jac_t_apply(lam)

        fd = (gradL(v + h * d) - gradL(v - h * d)) / (2 * h)
        worst["hess"] = max(worst["hess"], rel(op.hess_apply(d), fd))

        dim = 2 * heart_p.m + 1
        dr = rng.standard_normal(dim)
        x0 = r.to_vector()

        def F_at(x):
            return KktOperator(
                heart_p, KktPoint.from_vector(heart_p, x, eps)).residual()

        fd = (F_at(x0 + h * dr) - F_at(x0 - h * dr)) / (2 * h)
        worst["kkt"] = max(worst["kkt"], rel(op.kkt_apply(dr), fd))

        g = M.merit_grad(heart_p, r)
        fd = (M.merit(heart_p, KktPoint.from_vector(heart_p, x0 + h * dr, eps))
              - M.merit(heart_p,
                        KktPoint.from_vector(heart_p, x0 - h * dr, eps))) / (2 * h)
        worst["merit"] = max(worst["merit"],
                             abs(float(np.dot(g, dr)) - fd) / max(abs(fd), 1e-12))

        e = rng.standard_normal(dim)
        sym = abs(float(np.dot(e, op.kkt_apply(dr)))
                  - float(np.dot(dr, op.kkt_apply(e))))
        worst["sym"] = max(worst["sym"],
                           sym / max(np.linalg.norm(dr) * np.linalg.norm(e), 1.0))

    wall = time.perf_counter() - t0
    ok = (max(worst["jac"], worst["hess"], worst["kkt"], worst["merit"]) <= 1e-5
          and worst["sym"] <= 1e-10 and wall < 60.0)
    report("derivative_suite", ok,
           f"worst rel: jac {worst['jac']:.1e} hess {worst['hess']:.1e} "
           f"kkt {worst['kkt']:.1e} merit {worst['merit']:.1e} "
           f"sym {worst['sym']:.1e} in {wall:.1f}s")


def test_02_constraint_rank_probe(heart_p, micro_p):
    rng = np.random.default_rng(1)
    worst = np.inf
    for i in range(10):
        v = np.abs(rng.standard_normal(heart_p.m + 1)) + 0.1
        for eps in (1.0, 1e-2):
            est, _ = licq_probe(heart_p, v, eps)
            worst = min(worst, est)
    dense_rel = 0.0
    for eps in (1.0, 1e-2):
        v = np.abs(rng.standard_normal(micro_p.m + 1)) + 0.1
        est, _ = licq_probe(micro_p, v, eps)
        op = KktOperator(micro_p, KktPoint(v=v, lam=np.zeros(micro_p.m),
                                           eps=eps))
        smin = np.linalg.svd(op.materialize_jacobian(), compute_uv=False)[-1]
        dense_rel = max(dense_rel, abs(est - smin) / smin)
    ok = worst > 1e-10 and dense_rel <= 1e-6
    report("constraint_rank_probe", ok,
           f"min sigma_min estimate {worst:.3e}, dense SVD rel {dense_rel:.1e}")


def test_03_subproblem_correctness(solve_result):
    recs = [r for r in solve_result["report"].outer_records
            if r.status == "converged"]
    ok = bool(recs)
    worst_gap, worst_min = 0.0, np.inf
    for rec in recs:
        worst_gap = max(worst_gap, rec.max_comp_gap / (10 * rec.f_tol))
        worst_min = min(worst_min, rec.min_G, rec.min_H)
        ok = ok and rec.max_comp_gap <= 10 * rec.f_tol \
            and rec.min_G > 0 and rec.min_H > 0
    report("subproblem_correctness", ok,
           f"{len(recs)} converged subproblems, worst gap/(10 f_tol) "
           f"{worst_gap:.2f}, min factor {worst_min:.1e}")


def test_04_quadratic_tail(tail_trace):
    trace, status, _ = tail_trace
    norms = [row.normF for row in trace.rows if row.step > 0]
    # pre-step norm of the first row is the warm-start residual; pair up
    pairs = [(a, b) for a, b in zip(norms, norms[1:]) if a < 1e-2]
    last = pairs[-3:]
    ok = len(last) >= 1 and all(b <= a ** 1.5 for a, b in last)
    detail = ", ".join(f"{a:.1e}->{b:.1e} (bound {a**1.5:.1e})"
                       for a, b in last)
    report("quadratic_tail", ok, f"status {status}; last ratios: {detail}")


def test_05_outer_loop_accounting(solve_result):
    rep = solve_result["report"]
    ok = (rep.outer_iters == 21 and 10 <= rep.outer_iters <= 30
          and rep.inner_iters_total == sum(r.inner_iters
                                           for r in rep.outer_records)
          and rep.inner_iters_total > 0)
    report("outer_loop_accounting", ok,
           f"{rep.outer_iters} subproblems, "
           f"{rep.inner_iters_total} inner iterations")


def test_06_second_order_condition(heart_p, solve_result):
    diag = M.assumption2_value(heart_p, solve_result["report"].final_point)
    two_path = abs(diag["A2_cone"] - diag["A2_cone_alt"]) / max(
        abs(diag["A2_cone"]), 1e-300)
    ok = diag["A2_paper"] > 0 and diag["A2_cone"] > 0 and two_path <= 1e-8
    report("second_order_condition", ok,
           f"A2_paper {diag['A2_paper']:.4g}, A2_cone {diag['A2_cone']:.4g}, "
           f"two-path rel {two_path:.1e}")


def test_07_end_to_end_vs_grid(solve_result, grid_result):
    rep = solve_result["report"]
    ok = (rep.E_cv <= grid_result.best_error + 5.0
          and abs(solve_result["E_te"] - 15.8) <= 10.0
          and solve_result["wall"] < 120.0)
    report("end_to_end_vs_grid", ok,
           f"E_cv {rep.E_cv:.2f}% vs grid {grid_result.best_error:.2f}%, "
           f"E_te {solve_result['E_te']:.2f}%, solve {solve_result['wall']:.1f}s")


def test_08_dual_svc_oracle():
    rng = np.random.default_rng(2)
    worst_obj, worst_kkt = 0.0, 0.0
    for i in range(20):
        n_pts = int(rng.integers(1, 6))
        n = int(rng.integers(1, 5))
        rows = rng.standard_normal((n_pts, n))
        C = float(rng.uniform(0.1, 5.0))
        res = solve_l1svc_dual(rows, C, DualSvcConfig(max_epochs=2000,
                                                      tol=1e-12))
        Q = rows @ rows.T
        obj_ref, _ = brute_force_box_qp(Q, C)
        obj = 0.5 * res.alpha @ Q @ res.alpha - res.alpha.sum()
        worst_obj = max(worst_obj, abs(obj - obj_ref))
        grad = Q @ res.alpha - 1.0
        for k in range(n_pts):
            if res.alpha[k] <= 1e-8:
                worst_kkt = max(worst_kkt, max(0.0, -grad[k]))
            elif res.alpha[k] >= C - 1e-8:
                worst_kkt = max(worst_kkt, max(0.0, grad[k]))
            else:
                worst_kkt = max(worst_kkt, abs(grad[k]))
    ok = worst_obj <= 1e-6 and worst_kkt <= 1e-6
    report("dual_svc_oracle", ok,
           f"worst objective gap {worst_obj:.1e}, worst KKT violation "
           f"{worst_kkt:.1e}")


def test_09_krylov_vs_dense():
    rng = np.random.default_rng(3)
    worst = 0.0
    for i in range(50):
        n = int(rng.integers(5, 201))
        if i % 2:
            Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
            s = rng.uniform(1.0, 2.0, n) * rng.choice([-1.0, 1.0], n)
            A = (Q * s) @ Q.T
        else:
            A = np.diag(rng.uniform(1.0, 2.0, n))
            A += 0.2 / np.sqrt(n) * rng.standard_normal((n, n))
        b = rng.standard_normal(n)
        res = M.bicgstab(lambda x: A @ x, b,
                         cfg=M.KrylovConfig(rel_tol=1e-12, abs_tol=0.0))
        x_ref = np.linalg.solve(A, b)
        worst = max(worst, float(np.linalg.norm(res.x - x_ref)
                                 / np.linalg.norm(x_ref)))
    b = rng.standard_normal(40)
    res_id = M.bicgstab(lambda x: x, b)
    exact_id = np.array_equal(res_id.x, b)
    res_sc = M.bicgstab(lambda x: 4.0 * x, b)
    exact_sc = np.allclose(res_sc.x, b / 4.0, rtol=1e-15, atol=0.0)
    ok = worst <= 1e-8 and exact_id and exact_sc
    report("krylov_vs_dense", ok,
           f"worst rel err {worst:.1e} over 50 operators; identity exact "
           f"{exact_id}, scaled identity {exact_sc}")


def test_10_determinism(tmp_path):
    from mpecsvc.cli import EXIT_OK, main
    ds = make_tiny_dataset(n_points=12, n_features=4, seed=0)
    path = tmp_path / "tiny.libsvm"
    M.write_libsvm(ds, path)
    reports = []
    for name in ("a", "b"):
        out = tmp_path / name
        code = main(["solve", "--data", str(path), "--p1", "6",
                     "--eps-min", "1e-3", "--out", str(out), "--quiet"])
        assert code == EXIT_OK
        rep = json.loads((out / "report.json").read_text())
        rep.pop("wall_ms")
        reports.append(rep)
    ok = reports[0] == reports[1]
    report("determinism", ok,
           "identical report.json modulo timing" if ok else "reports differ")
