"""Conjugate gradient on the normal equations (CGLS).

Used for the block pseudoinverse applications in the block-projection methods
and as the high-precision reference for minimum-norm least-squares solutions.
Starting from a zero guess the returned iterate is the minimum-norm solution,
which is what block pseudoinverse semantics require. The stopping measure is
the normal-equations residual ||M.T (rhs - M w)||, which stays well defined
for inconsistent subproblems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SubsolverError, UsageError
from .linalg import DenseMatrix


@dataclass
class CglsConfig:
    """Tolerance on the relative normal-equations residual and iteration budget.

    ``max_iters`` defaults to 2 * min(rows, cols) + 10 for the subproblem at
    hand when left unset.
    """

    rel_tol: float = 1e-12
    max_iters: int | None = None

    def __post_init__(self):
        if self.rel_tol <= 0.0:
            raise UsageError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_iters is not None and self.max_iters < 1:
            raise UsageError(f"max_iters must be at least 1, got {self.max_iters}")


def cgls(matrix, rhs, cfg: CglsConfig | None = None) -> np.ndarray:
    """Minimum-norm least-squares solution of ``matrix @ w ~ rhs`` from a zero guess.

    Returns ``w`` with ``||M.T (rhs - M w)|| <= rel_tol * ||M.T rhs||``. Raises
    SubsolverError with iteration diagnostics when the budget is exhausted.
    """
    m_arr = matrix.entries if isinstance(matrix, DenseMatrix) else np.asarray(matrix, dtype=float)
    if m_arr.ndim != 2:
        raise UsageError(f"expected a matrix, got shape {m_arr.shape}")
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (m_arr.shape[0],):
        raise UsageError(f"rhs must have length {m_arr.shape[0]}, got shape {rhs.shape}")
    if not np.any(m_arr):
        raise UsageError("cgls requires a nonzero matrix")
    cfg = cfg or CglsConfig()
    max_iters = cfg.max_iters
    if max_iters is None:
        max_iters = 2 * min(m_arr.shape) + 10

    w = np.zeros(m_arr.shape[1])
    s = rhs.copy()
    q = m_arr.T @ s
    base = float(np.linalg.norm(q))
    if base == 0.0:
        return w  # rhs is orthogonal to the column space; zero is optimal
    target = cfg.rel_tol * base
    # Below this the normal-equations residual is rounding noise relative to the
    # current residual's scale; no further progress is possible in float64.
    frob = float(np.sqrt((m_arr * m_arr).sum()))
    floor_eps = 4.0 * np.finfo(float).eps
    p = q.copy()
    gamma = float(q @ q)
    for it in range(max_iters):
        q_norm = float(np.sqrt(gamma))
        if q_norm <= target or q_norm <= floor_eps * frob * float(np.linalg.norm(s)):
            return w
        t = m_arr @ p
        t_sq = float(t @ t)
        if t_sq == 0.0:
            return w  # search direction exhausted; w is optimal in range(M.T)
        alpha = gamma / t_sq
        w += alpha * p
        s -= alpha * t
        q = m_arr.T @ s
        gamma_new = float(q @ q)
        p = q + (gamma_new / gamma) * p
        gamma = gamma_new
    q_norm = float(np.sqrt(gamma))
    if q_norm <= target or q_norm <= floor_eps * frob * float(np.linalg.norm(s)):
        return w
    raise SubsolverError(
        f"cgls did not reach rel_tol={cfg.rel_tol:g} within {max_iters} iterations "
        f"(normal-equations residual {q_norm:.3e}, target {target:.3e})",
        iterations=max_iters,
        residual=q_norm,
    )
