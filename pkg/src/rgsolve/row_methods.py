"""Row-action methods: Kaczmarz, RGRK, RGDR, GBK, and RBK.

Each step enforces the projection condition that the aggregated constraint
direction is orthogonal to the new residual. The residual is maintained by the
cheap recursion ``r -= weight * A @ d`` and recomputed from scratch every 100
iterations and at termination to bound drift. The row-aggregate update never
forms ``A @ A.T``: the direction ``d = A.T @ eta`` is assembled from the
selected rows only, and ``A @ d`` is a plain matvec, keeping memory at O(m*n).

Row methods converge to the least-norm solution of consistent systems when
started in the row space; on inconsistent systems they stall, which the driver
reports as a distinct termination reason.
"""

from __future__ import annotations

import time

import numpy as np

from .cgls import CglsConfig, cgls
from .errors import RgsolveError, StalledError, UsageError
from .linalg import DenseMatrix, as_vector
from .selection import SelectionConfig, gbk_set, make_partition, relaxed_greedy_set, row_losses
from .state import SolveReport, SolveState, StepOutcome, StepRecord, StopRule

ROW_METHODS = ("kaczmarz", "rgrk", "rgdr", "gbk", "rbk")

# A run is declared stalled when the best RSE fails to improve by this relative
# amount over 10*m consecutive iterations.
_STALL_IMPROVEMENT = 1e-3
_REFRESH_EVERY = 100
_DRIFT_REL = 1e-8


def kaczmarz_step(state: SolveState, a: DenseMatrix, b: np.ndarray, i: int) -> StepOutcome:
    """Project the iterate onto the hyperplane of row ``i``."""
    sq = float(a.row_sqnorms[i])
    if sq <= 0.0:
        raise UsageError(f"zero row {i} cannot drive a projection step")
    residual_i = float(state.r[i])
    if residual_i != 0.0:
        delta = residual_i / sq
        state.x += delta * a.entries[i]
        state.r -= delta * a.matvec(a.entries[i])
    state.k += 1
    state.last_set_size = 1
    return StepOutcome(state, 1.0 / sq, converged=(residual_i == 0.0))


def rgdr_step(state: SolveState, a: DenseMatrix, b: np.ndarray, indices: np.ndarray) -> StepOutcome:
    """Aggregate the selected rows, weighted by their residuals, into one projection.

    With eta the residual masked to ``indices``, the update is
    ``x += (eta.T r / ||A.T eta||^2) A.T eta`` and the residual follows the
    matching recursion. Raises StalledError when ``A.T eta`` vanishes, which
    means the selected residual lies outside the range of A.
    """
    indices = np.asarray(indices, dtype=int)
    if indices.size == 0:
        raise UsageError("empty index set")
    r_sel = state.r[indices]
    g1 = float(r_sel @ r_sel)
    if g1 <= 0.0:
        state.k += 1
        state.last_set_size = int(indices.size)
        return StepOutcome(state, 0.0, converged=True)
    direction = a.entries[indices].T @ r_sel
    g2 = float(direction @ direction)
    if g2 <= 0.0:
        raise StalledError("row method stalled on inconsistent system")
    weight = g1 / g2
    state.x += weight * direction
    state.r -= weight * a.matvec(direction)
    state.k += 1
    state.last_set_size = int(indices.size)
    return StepOutcome(state, weight)


def rgrk_step(
    state: SolveState,
    a: DenseMatrix,
    b: np.ndarray,
    indices: np.ndarray,
    rng: np.random.Generator,
) -> StepOutcome:
    """Sample one row from the selected set with probability proportional to its
    squared residual, then apply the single-row projection."""
    indices = np.asarray(indices, dtype=int)
    if indices.size == 0:
        raise UsageError("empty index set")
    weights = state.r[indices] ** 2
    total = float(weights.sum())
    if total <= 0.0:
        raise UsageError("residual restricted to the selected set is zero")
    i = int(indices[rng.choice(indices.size, p=weights / total)])
    outcome = kaczmarz_step(state, a, b, i)
    state.last_set_size = int(indices.size)
    return outcome


def block_project_step(
    state: SolveState,
    a: DenseMatrix,
    b: np.ndarray,
    indices: np.ndarray,
    cgls_cfg: CglsConfig | None = None,
) -> StepOutcome:
    """Project the iterate orthogonally onto the solution set of the selected rows.

    The block pseudoinverse is applied through CGLS (minimum-norm correction);
    the residual is recomputed in full afterwards rather than by recursion.
    """
    indices = np.asarray(indices, dtype=int)
    if indices.size == 0:
        raise UsageError("empty index set")
    sub = a.entries[indices]
    correction = cgls(sub, b[indices] - sub @ state.x, cgls_cfg)
    state.x += correction
    state.r = b - a.matvec(state.x)
    state.k += 1
    state.last_set_size = int(indices.size)
    return StepOutcome(state, 1.0)


def _params_for(method: str, config: SelectionConfig) -> dict:
    if method in ("rgdr", "rgrk"):
        return {"theta": config.theta1}
    if method == "gbk":
        return {"eta1": config.eta1}
    if method == "rbk":
        return {"block_size": config.block_size}
    return {}


def _refresh_row_state(state: SolveState, a: DenseMatrix, b: np.ndarray) -> None:
    fresh = b - a.matvec(state.x)
    scale = max(1.0, float(np.linalg.norm(b)) + float(np.linalg.norm(fresh)))
    drift = float(np.linalg.norm(fresh - state.r))
    if drift > _DRIFT_REL * scale:
        raise RgsolveError(
            f"residual recursion drifted beyond tolerance ({drift:.3e} vs scale {scale:.3e})"
        )
    state.r = fresh


def run_row_method(
    method: str,
    a: DenseMatrix,
    b,
    *,
    config: SelectionConfig | None = None,
    stop: StopRule | None = None,
    x0=None,
    x_star=None,
    seed: int | None = None,
    cgls_cfg: CglsConfig | None = None,
    record_steps: bool = False,
) -> SolveReport:
    """Iterate the chosen row method until the stop rule fires.

    The relative solution error (RSE) is ||x_k - x*|| / ||x_0 - x*|| with
    ``x_star`` the least-norm solution; when not supplied it is computed once
    by the CGLS reference at tolerance 1e-12. The default start is the zero
    vector, which lies in the row space as the least-norm guarantee requires.
    """
    if method not in ROW_METHODS:
        raise UsageError(f"unknown row method {method!r}; expected one of {ROW_METHODS}")
    config = config if config is not None else SelectionConfig()
    stop = stop if stop is not None else StopRule()
    rng = np.random.default_rng(seed)
    b = as_vector(b, a.m, "b")
    x = np.zeros(a.n) if x0 is None else as_vector(x0, a.n, "x0").copy()
    if x_star is None:
        x_star = cgls(a, b, CglsConfig(rel_tol=1e-12))
    else:
        x_star = as_vector(x_star, a.n, "x_star")
    params = _params_for(method, config)

    denom = float(np.linalg.norm(x - x_star))
    if denom == 0.0:
        return SolveReport(method, params, seed, 0, 0.0, [0.0], [], [0.0], 0.0,
                           "converged", x_final=x, step_records=[] if record_steps else None)

    state = SolveState(x=x, r=b - a.matvec(x))
    partition = make_partition(a.m, config.block_size) if method == "rbk" else None
    rse = 1.0
    rse_trace = [1.0]
    set_sizes: list[int] = []
    iter_seconds = [0.0]
    records: list[StepRecord] | None = [] if record_steps else None
    best_rse = rse
    since_best = 0
    stall_window = 10 * a.m
    reason = "max_iters"

    start = time.perf_counter()
    while True:
        if rse < stop.rse_tol:
            reason = "converged"
            break
        if state.k >= stop.max_iters:
            reason = "max_iters"
            break
        if since_best >= stall_window:
            reason = "stalled"
            break
        if state.k and state.k % _REFRESH_EVERY == 0:
            _refresh_row_state(state, a, b)

        err_before = float(np.dot(state.x - x_star, state.x - x_star)) if record_steps else 0.0
        profile = None
        try:
            if method == "kaczmarz":
                selected = np.array([state.k % a.m])
                kaczmarz_step(state, a, b, int(selected[0]))
            elif method in ("rgrk", "rgdr"):
                profile = row_losses(a, state.r, config.zero_tol)
                if profile.max_loss <= 0.0:
                    reason = _zero_loss_reason(state, a, b, x_star, denom, stop)
                    break
                selected = relaxed_greedy_set(profile, config.theta1)
                if method == "rgdr":
                    rgdr_step(state, a, b, selected)
                else:
                    rgrk_step(state, a, b, selected, rng)
            elif method == "gbk":
                profile = row_losses(a, state.r, config.zero_tol)
                if profile.max_loss <= 0.0:
                    reason = _zero_loss_reason(state, a, b, x_star, denom, stop)
                    break
                selected = gbk_set(profile, config.eta1)
                block_project_step(state, a, b, selected, cgls_cfg)
            else:  # rbk
                selected = partition[int(rng.integers(len(partition)))]
                block_project_step(state, a, b, selected, cgls_cfg)
        except StalledError:
            reason = "stalled"
            break

        rse = float(np.linalg.norm(state.x - x_star) / denom)
        rse_trace.append(rse)
        set_sizes.append(int(selected.size))
        iter_seconds.append(time.perf_counter() - start)
        if record_steps:
            zero_mass = (
                float(a.row_sqnorms[profile.zero_set].sum()) if profile is not None else 0.0
            )
            records.append(StepRecord(
                k=state.k - 1,
                indices=np.array(selected, dtype=int),
                set_energy=float(a.row_sqnorms[selected].sum()),
                zero_mass=zero_mass,
                err_sq_before=err_before,
                err_sq_after=float(np.dot(state.x - x_star, state.x - x_star)),
            ))
        if rse < best_rse * (1.0 - _STALL_IMPROVEMENT):
            best_rse = rse
            since_best = 0
        else:
            since_best += 1

    wall = time.perf_counter() - start
    state.r = b - a.matvec(state.x)  # recompute at termination
    return SolveReport(
        method=method,
        params=params,
        seed=seed,
        iterations=state.k,
        final_rse=rse_trace[-1],
        rse_trace=rse_trace,
        set_size_trace=set_sizes,
        iter_seconds=iter_seconds,
        wall_seconds=wall,
        termination_reason=reason,
        x_final=state.x.copy(),
        step_records=records,
    )


def _zero_loss_reason(state, a, b, x_star, denom, stop) -> str:
    """The residual hit exact zero: converged if the iterate reached x*, else stalled."""
    state.r = b - a.matvec(state.x)
    rse = float(np.linalg.norm(state.x - x_star) / denom)
    return "converged" if rse < stop.rse_tol else "stalled"
