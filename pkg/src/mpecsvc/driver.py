"""Outer smoothing loop, post-processing, metrics, and diagnostics.

The smoothing loop solves the equality-constrained subproblem for a
geometrically shrinking eps schedule, warm-starting each solve from the
previous solution.  The schedule includes the first value at or below
eps_min, so eps0=1, kappa=0.5, eps_min=1e-6 yields exactly 21 subproblems.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import problem as pb
from .kkt import KktOperator, KktPoint
from .newton import NewtonConfig, solve_subproblem
from .smoothing import fb_weights
from .svc import DualSvcConfig, solve_l1svc_dual, validation_error


@dataclass(frozen=True)
class OuterConfig:
    eps0: float = 1.0
    eps_min: float = 1e-6
    kappa: float = 0.5
    initial_C: float = 1.0

    def __post_init__(self):
        if not (self.eps0 >= self.eps_min > 0):
            raise ValueError("require eps0 >= eps_min > 0")
        if not (0.0 < self.kappa < 1.0):
            raise ValueError("kappa must lie in (0, 1)")


@dataclass
class OuterRecord:
    t: int
    eps: float
    f_tol: float
    status: str
    normF: float
    warm_normF: float
    inner_iters: int
    max_comp_gap: float     # max_i |G_i H_i - eps^2/2| at the solution
    min_G: float
    min_H: float
    trace: object           # NewtonTrace


@dataclass
class SolveReport:
    C_raw: float = 0.0
    C_hat: float = 0.0
    E_cv: float = 0.0
    E_te: float = 0.0
    A2_paper: float = 0.0
    A2_cone: float = 0.0
    index_set_sizes: dict = field(default_factory=dict)
    outer_iters: int = 0
    inner_iters_total: int = 0
    outer_records: list = field(default_factory=list)
    final_point: KktPoint | None = None
    wall_ms: float = 0.0

    def to_dict(self, dataset="", dims=None, config=None):
        return {
            "dataset": dataset,
            "dims": dims or {},
            "config": config or {},
            "C_raw": self.C_raw,
            "C_hat": self.C_hat,
            "E_cv": self.E_cv,
            "E_te": self.E_te,
            "A2_paper": self.A2_paper,
            "A2_cone": self.A2_cone,
            "index_set_sizes": self.index_set_sizes,
            "outer_iters": self.outer_iters,
            "inner_iters_total": self.inner_iters_total,
            "wall_ms": self.wall_ms,
        }


def eps_schedule(cfg):
    """Subproblem parameters eps0 * kappa^t, ending at the first <= eps_min."""
    schedule = []
    eps = cfg.eps0
    while True:
        schedule.append(eps)
        if eps <= cfg.eps_min:
            return schedule
        eps *= cfg.kappa


def initial_point(p, C0):
    """Interior starting point: every variable block at 0.5, lambda = 0."""
    if C0 <= 0:
        raise ValueError("C0 must be positive")
    v = np.empty(p.m + 1)
    v[0] = C0
    v[1:] = 0.5
    v[1 + 2 * p.n1:1 + 2 * p.n1 + p.n2] = 0.5 * min(1.0, C0)
    return KktPoint(v=v, lam=np.zeros(p.m), eps=0.0)


def run_smoothing(p, ocfg=None, ncfg=None, r0=None):
    """Algorithm: solve the eps-schedule of subproblems with warm starts.

    Returns (PrimalPoint, SolveReport); the report carries the final KktPoint
    and the per-eps trace.  A failed subproblem is recorded and the loop
    continues from its best iterate.
    """
    ocfg = ocfg or OuterConfig()
    ncfg = ncfg or NewtonConfig()
    t0 = time.perf_counter()
    r = r0.copy() if r0 is not None else initial_point(p, ocfg.initial_C)
    report = SolveReport()
    for t, eps in enumerate(eps_schedule(ocfg)):
        # solving much below the eps^2/2 complementarity scale wastes work,
        # so the tolerance is relaxed while eps is large and floors at f_tol
        f_tol = max(ncfg.f_tol, 1e-2 * eps * eps)
        sub_cfg = NewtonConfig(sigma=ncfg.sigma, rho=ncfg.rho, f_tol=f_tol,
                               max_iters=ncfg.max_iters,
                               max_backtracks=ncfg.max_backtracks,
                               reg_mu=ncfg.reg_mu, krylov=ncfg.krylov)
        r.eps = eps
        op0 = KktOperator(p, r)
        warm_normF = float(np.linalg.norm(op0.residual()))
        r, trace, status = solve_subproblem(p, eps, r, sub_cfg)
        op = KktOperator(p, r)
        normF = float(np.linalg.norm(op.residual()))
        gap = float(np.max(np.abs(op.G * op.H - 0.5 * eps * eps)))
        report.outer_records.append(OuterRecord(
            t=t, eps=eps, f_tol=f_tol, status=status, normF=normF,
            warm_normF=warm_normF, inner_iters=len(trace.rows),
            max_comp_gap=gap, min_G=float(op.G.min()), min_H=float(op.H.min()),
            trace=trace,
        ))
    report.outer_iters = len(report.outer_records)
    report.inner_iters_total = sum(rec.inner_iters for rec in report.outer_records)
    report.final_point = r
    report.C_raw = float(r.v[0])
    report.E_cv = cv_error(p, r.v)
    report.wall_ms = 1000.0 * (time.perf_counter() - t0)
    return pb.PrimalPoint.from_vector(p, r.v), report


def postprocess(p, v_star, ds, plan, svc_cfg=None):
    """Rescale C by T/(T-1) and retrain on the full cv set.

    Returns (C_hat, w) with w = sum_i alpha_i y_i x_i over the cv points.
    """
    C_raw = float(v_star.C if isinstance(v_star, pb.PrimalPoint) else v_star[0])
    C_hat = C_raw * p.T / (p.T - 1)
    rows = ds.signed_rows(plan.cv_indices)
    res = solve_l1svc_dual(rows, C_hat, svc_cfg or DualSvcConfig())
    if res.status != "converged":
        import warnings
        warnings.warn(f"baseline retraining stopped at {res.status} "
                      f"(violation {res.max_violation:.2e})")
    return C_hat, res.w


def cv_error(p, v):
    """E_cv percent = 100 * f(v) = 100 * mean(zeta)."""
    v = v.to_vector() if isinstance(v, pb.PrimalPoint) else np.asarray(v)
    return 100.0 * p.objective(v)


def test_error(ds, test_indices, w):
    """E_te percent on the hold-out set; sign(0) counts as misclassified."""
    if len(test_indices) == 0:
        return 0.0
    return 100.0 * validation_error(ds, test_indices, w)


def _cone_direction(p, op):
    """Direction U spanning the critical cone null(J_v Phi), unit C component.

    The alpha block solves a dense T*m2 system; the remaining blocks follow by
    diagonal eliminations.
    """
    w = op.weights
    n1, n2 = p.n1, p.n2
    w1G, w2G, w3G, w4G = p.split_m(w.wG)
    w1H, w2H, w3H, w4H = p.split_m(w.wH)
    BBt = (p.B @ p.B.T).toarray()
    # (W4H + W4G ((W3H)^{-1} W3G + BB^T)) U_alpha = W4H 1
    Mat = w4G[:, None] * BBt
    Mat[np.diag_indices(n2)] += w4H + w4G * (w3G / w3H)
    U_alpha = np.linalg.solve(Mat, w4H)
    ABt_Ua = p.A @ (p.B.T @ U_alpha)
    U_z = -(w1H * ABt_Ua) / (w1G * (w2G / w2H) + w1H)
    U_zeta = (w2G / w2H) * U_z
    U_xi = -(w3G * U_alpha + w3H * (BBt @ U_alpha)) / w3H
    return np.concatenate([[1.0], U_zeta, U_z, U_alpha, U_xi])


def assumption2_value(p, r_star):
    """Curvature diagnostics at a converged subproblem solution.

    Returns a dict with:
      A2_paper     v*^T hess_vv L v*
      A2_cone      U^T hess_vv L U with U the critical-cone direction
      A2_cone_alt  the same quadratic form via the G/H decomposition
                   (U^G)^T M^G U^G + (U^H)^T M^H U^H + 2 (U^G)^T M^GH U^H
    """
    op = KktOperator(p, r_star)
    v = op.v
    A2_paper = float(v @ op.hess_apply(v))
    U = _cone_direction(p, op)
    A2_cone = float(U @ op.hess_apply(U))
    UG = pb.apply_LG(p, U)
    UH = pb.apply_LH(p, U)
    c = op.curvature
    A2_alt = float(UG @ (c.mG * UG) + UH @ (c.mH * UH) + 2.0 * UG @ (c.mGH * UH))
    return {"A2_paper": A2_paper, "A2_cone": A2_cone, "A2_cone_alt": A2_alt,
            "U": U}


def classify_index_sets(p, v, tol_active=1e-6):
    """Count I_{0+}, I_{+0}, I_{00} with relative activity tolerance."""
    v = v.to_vector() if isinstance(v, pb.PrimalPoint) else np.asarray(v)
    G = pb.eval_G(p, v)
    H = pb.eval_H(p, v)
    g_zero = np.abs(G) <= tol_active * (1.0 + np.abs(G))
    h_zero = np.abs(H) <= tol_active * (1.0 + np.abs(H))
    i00 = g_zero & h_zero
    i0p = g_zero & ~h_zero
    ip0 = ~g_zero & h_zero
    listing = {
        "I_0+": np.flatnonzero(i0p),
        "I_+0": np.flatnonzero(ip0),
        "I_00": np.flatnonzero(i00),
    }
    sizes = {k: int(len(idx)) for k, idx in listing.items()}
    return sizes, listing


def near_zero_margins(p, ds, plan, w, tol=1e-10):
    """Validation points with |x_i^T w| <= tol (recorded, not enforced)."""
    flagged = []
    for t in range(plan.T):
        X = ds.to_csr(plan.folds[t])
        margins = X @ w
        for j in np.flatnonzero(np.abs(margins) <= tol):
            flagged.append((t, int(j)))
    return flagged
