"""Assembly of the cross-validation MPEC and matrix-free affine maps.

The decision variable is v = (C, zeta, z, alpha, xi) of length m+1 with
m = 2*T*(m1+m2).  The complementarity pair is G(v) = (zeta; z; alpha; xi)
and H(v) = (A B^T alpha + z; 1 - zeta; B B^T alpha - 1 + xi; C*1 - alpha),
where A and B stack the signed validation/training rows y_i x_i^T fold by
fold.  A B^T and B B^T are never formed densely: H and the linear maps below
cost O(nnz(A) + nnz(B)) per application.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class MpecProblem:
    T: int
    m1: int
    m2: int
    n: int
    A: sp.csr_matrix  # (T*m1, T*n), block-diagonal over folds
    B: sp.csr_matrix  # (T*m2, T*n), block-diagonal over folds

    @property
    def m(self):
        return 2 * self.T * (self.m1 + self.m2)

    @property
    def n1(self):
        """Size of the zeta and z blocks."""
        return self.T * self.m1

    @property
    def n2(self):
        """Size of the alpha and xi blocks."""
        return self.T * self.m2

    @property
    def bH(self):
        """Constant part of H: blocks (0; 1; -1; 0)."""
        b = np.zeros(self.m)
        b[self.n1:2 * self.n1] = 1.0
        b[2 * self.n1:2 * self.n1 + self.n2] = -1.0
        return b

    @property
    def obj_grad(self):
        """Gradient of f(v) = mean(zeta)/1: value 1/(T*m1) on the zeta block."""
        g = np.zeros(self.m + 1)
        g[1:1 + self.n1] = 1.0 / (self.T * self.m1)
        return g

    def objective(self, v):
        return float(np.dot(self.obj_grad, v))

    def split_v(self, v):
        """Split v into (C, zeta, z, alpha, xi)."""
        n1, n2 = self.n1, self.n2
        return (
            float(v[0]),
            v[1:1 + n1],
            v[1 + n1:1 + 2 * n1],
            v[1 + 2 * n1:1 + 2 * n1 + n2],
            v[1 + 2 * n1 + n2:],
        )

    def split_m(self, s):
        """Split a length-m vector into the four G/H blocks."""
        n1, n2 = self.n1, self.n2
        return s[:n1], s[n1:2 * n1], s[2 * n1:2 * n1 + n2], s[2 * n1 + n2:]


@dataclass(frozen=True)
class PrimalPoint:
    """Structured view of v = (C, zeta, z, alpha, xi)."""

    C: float
    zeta: np.ndarray
    z: np.ndarray
    alpha: np.ndarray
    xi: np.ndarray

    def to_vector(self):
        return np.concatenate([[self.C], self.zeta, self.z, self.alpha, self.xi])

    @classmethod
    def from_vector(cls, p, v):
        C, zeta, z, alpha, xi = p.split_v(np.asarray(v, dtype=float))
        return cls(C=C, zeta=zeta.copy(), z=z.copy(), alpha=alpha.copy(), xi=xi.copy())


def assemble(ds, plan):
    """Build the MpecProblem for a dataset and split plan.

    Fold t contributes A^t (validation rows of fold t) and B^t (training rows,
    i.e. the other T-1 folds in fold order).
    """
    T, m1, m2 = plan.T, plan.m1, plan.m2
    if m2 == 0:
        raise ValueError("T=1 leaves an empty training set (m2=0)")
    for f in plan.folds:
        if len(f) != m1:
            raise ValueError("folds are not of equal size")
        for i in f:
            if i < 0 or i >= len(ds):
                raise ValueError(f"fold index {i} outside dataset")
    A_blocks, B_blocks = [], []
    for t in range(T):
        A_blocks.append(ds.signed_rows(plan.folds[t]))
        train = [i for s in range(T) if s != t for i in plan.folds[s]]
        B_blocks.append(ds.signed_rows(train))
    A = sp.block_diag(A_blocks, format="csr")
    B = sp.block_diag(B_blocks, format="csr")
    return MpecProblem(T=T, m1=m1, m2=m2, n=ds.n_features, A=A, B=B)


def _as_vector(p, v):
    v = v.to_vector() if isinstance(v, PrimalPoint) else np.asarray(v, dtype=float)
    if v.shape != (p.m + 1,):
        raise ValueError(f"expected v of length {p.m + 1}, got {v.shape}")
    return v


def eval_G(p, v):
    """G(v) = (zeta; z; alpha; xi) = L^G v."""
    return _as_vector(p, v)[1:].copy()


def eval_H(p, v):
    """H(v) = L^H v + b^H, computed matrix-free."""
    v = _as_vector(p, v)
    C, zeta, z, alpha, xi = p.split_v(v)
    Bt_alpha = p.B.T @ alpha
    return np.concatenate([
        p.A @ Bt_alpha + z,
        1.0 - zeta,
        p.B @ Bt_alpha - 1.0 + xi,
        C - alpha,
    ])


def apply_LG(p, d):
    """L^G d for d of length m+1 (drops the C component)."""
    return d[1:]


def apply_LG_T(p, s):
    """(L^G)^T s for s of length m."""
    out = np.empty(p.m + 1)
    out[0] = 0.0
    out[1:] = s
    return out


def apply_LH(p, d):
    """L^H d (the linear part of H) for d of length m+1."""
    dC, dzeta, dz, dalpha, dxi = p.split_v(d)
    Bt = p.B.T @ dalpha
    return np.concatenate([
        p.A @ Bt + dz,
        -dzeta,
        p.B @ Bt + dxi,
        dC - dalpha,
    ])


def apply_LH_T(p, s):
    """(L^H)^T s for s of length m."""
    s1, s2, s3, s4 = p.split_m(s)
    out = np.empty(p.m + 1)
    out[0] = s4.sum()
    n1, n2 = p.n1, p.n2
    out[1:1 + n1] = -s2
    out[1 + n1:1 + 2 * n1] = s1
    out[1 + 2 * n1:1 + 2 * n1 + n2] = p.B @ (p.A.T @ s1) + p.B @ (p.B.T @ s3) - s4
    out[1 + 2 * n1 + n2:] = s3
    return out


def materialize_LG(p):
    """Explicit sparse L^G."""
    cached = getattr(p, "_LG_cache", None)
    if cached is not None:
        return cached
    out = sp.hstack(
        [sp.csr_matrix((p.m, 1)), sp.identity(p.m, format="csr")], format="csr"
    )
    object.__setattr__(p, "_LG_cache", out)
    return out


def materialize_LH(p, max_m=4000):
    """Explicit sparse L^H (contains dense B B^T blocks; guarded by max_m)."""
    if p.m > max_m:
        raise ValueError(f"refusing to materialize L^H for m={p.m} > {max_m}")
    cached = getattr(p, "_LH_cache", None)
    if cached is not None:
        return cached
    n1, n2 = p.n1, p.n2
    I1 = sp.identity(n1)
    I2 = sp.identity(n2)
    Z = sp.csr_matrix
    ABt = p.A @ p.B.T
    BBt = p.B @ p.B.T
    ones = np.ones((n2, 1))
    rows = [
        [Z((n1, 1)), Z((n1, n1)), I1, ABt, Z((n1, n2))],
        [Z((n1, 1)), -I1, Z((n1, n1)), Z((n1, n2)), Z((n1, n2))],
        [Z((n2, 1)), Z((n2, n1)), Z((n2, n1)), BBt, I2],
        [sp.csr_matrix(ones), Z((n2, n1)), Z((n2, n1)), -I2, Z((n2, n2))],
    ]
    out = sp.bmat(rows, format="csr")
    object.__setattr__(p, "_LH_cache", out)
    return out


def sparsity_stats(p):
    """Dimension and nnz bookkeeping (for --dump-problem)."""
    return {
        "T": p.T,
        "m1": p.m1,
        "m2": p.m2,
        "n": p.n,
        "m": p.m,
        "n_vars": p.m + 1,
        "nnz_A": int(p.A.nnz),
        "nnz_B": int(p.B.nnz),
    }
