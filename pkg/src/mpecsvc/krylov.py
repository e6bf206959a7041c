"""BiCGStab for arbitrary linear-operator applies (van der Vorst's recursion).

Deterministic by construction: the shadow residual is fixed to the initial
residual.  Breakdown never raises; the best iterate seen is returned with a
status the caller can act on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KrylovConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_iters: int | None = None   # defaults to 10 * dimension
    breakdown_eps: float = 1e-30
    stall_iters: int = 150         # bail out if best residual stops improving

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol < 0:
            raise ValueError("tolerances must be positive")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class KrylovResult:
    x: np.ndarray
    residual_norm: float   # true residual ||apply(x) - rhs||, recomputed
    iterations: int
    status: str            # converged | max_iters | breakdown | stalled | degraded


def bicgstab(apply, rhs, x0=None, cfg=None, precond=None):
    """Solve apply(x) = rhs; `precond` (if given) applies M^{-1}."""
    cfg = cfg or KrylovConfig()
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.shape[0]
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    M = precond if precond is not None else (lambda u: u)
    max_iters = cfg.max_iters if cfg.max_iters is not None else 10 * n

    norm_b = np.linalg.norm(rhs)
    target = max(cfg.rel_tol * norm_b, cfg.abs_tol)

    r = rhs - apply(x)
    r_hat = r.copy()
    norm_r = np.linalg.norm(r)
    best_x, best_norm = x.copy(), norm_r
    if norm_r <= target:
        return KrylovResult(x=x, residual_norm=norm_r, iterations=0,
                            status="converged")

    rho = alpha = omega = 1.0
    vv = np.zeros(n)
    pp = np.zeros(n)
    status = "max_iters"
    k = 0
    since_improved = 0
    for k in range(1, max_iters + 1):
        if since_improved >= cfg.stall_iters:
            status = "stalled"
            break
        rho_new = float(np.dot(r_hat, r))
        if abs(rho_new) < cfg.breakdown_eps:
            status = "breakdown"
            break
        beta = (rho_new / rho) * (alpha / omega)
        rho = rho_new
        pp = r + beta * (pp - omega * vv)
        phat = M(pp)
        vv = apply(phat)
        denom = float(np.dot(r_hat, vv))
        if abs(denom) < cfg.breakdown_eps:
            status = "breakdown"
            break
        alpha = rho / denom
        s = r - alpha * vv
        norm_s = np.linalg.norm(s)
        if norm_s <= target:
            x = x + alpha * phat
            norm_r = norm_s
            if norm_r < best_norm:
                best_x, best_norm = x.copy(), norm_r
            status = "converged"
            break
        shat = M(s)
        t = apply(shat)
        tt = float(np.dot(t, t))
        if tt < cfg.breakdown_eps:
            status = "breakdown"
            break
        omega = float(np.dot(t, s)) / tt
        if abs(omega) < cfg.breakdown_eps:
            status = "breakdown"
            break
        x = x + alpha * phat + omega * shat
        r = s - omega * t
        norm_r = np.linalg.norm(r)
        if norm_r < 0.999 * best_norm:
            since_improved = 0
        else:
            since_improved += 1
        if norm_r < best_norm:
            best_x, best_norm = x.copy(), norm_r
        if norm_r <= target:
            status = "converged"
            break

    if status != "converged":
        x = best_x
    true_res = float(np.linalg.norm(apply(x) - rhs))
    if status == "converged" and true_res > max(target, 1e-8 * norm_b):
        # recursive residual drifted away from the true one
        status = "degraded"
    return KrylovResult(x=x, residual_norm=true_res, iterations=k, status=status)
