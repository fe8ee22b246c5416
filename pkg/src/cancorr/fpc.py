"""Fixed-point (iterative soft-thresholding) solver for l1-penalized
least squares with one subproblem per target column:

    min_w  0.5 * ||a.T @ w - t_i||_2^2 + lambda_i * ||w||_1

The design ``a`` is d x n (samples per column), targets are n x l, and
solutions are d x l.  Iterates follow

    w <- S(w - tau * a @ (a.T @ w - t), tau * lambda)

with S the soft-thresholding operator, starting from w = 0.  Optional
continuation solves a decreasing lambda schedule with warm starts, and
Barzilai-Borwein steps replace the fixed step when enabled.  Columns are
independent: the vectorized sweep below updates each column exactly as a
sequential per-column solve would.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, NumericalFailure
from .matops import as_matrix, thin_svd

BB_STEP_FLOOR = 1e-8


def soft_threshold(w, nu):
    """Shrinkage operator sign(w) * max(|w| - nu, 0), elementwise."""
    if np.any(np.asarray(nu) < 0):
        raise InvalidInput("soft_threshold requires nu >= 0")
    w = np.asarray(w, dtype=float)
    # adding 0.0 turns the -0.0 produced by sign() into a clean zero
    out = np.sign(w) * np.maximum(np.abs(w) - nu, 0.0) + 0.0
    return float(out) if out.ndim == 0 else out


def max_lambda(a, t):
    """Smallest regularizer for which w = 0 is optimal: ||a @ t||_inf."""
    a = as_matrix(a, "a")
    t = np.asarray(t, dtype=float)
    if t.ndim == 2 and t.shape[1] == 1:
        t = t[:, 0]
    if t.ndim != 1 or t.shape[0] != a.shape[1]:
        raise InvalidInput(
            f"target must be a length-{a.shape[1]} column, got shape {t.shape}"
        )
    return float(np.abs(a @ t).max())


def default_step(a):
    """Step 1 / lambda_max(a @ a.T), strictly inside the stable interval."""
    svd = thin_svd(a)
    if svd.numeric_rank == 0:
        raise InvalidInput("design matrix is zero")
    return 1.0 / float(svd.singular_values[0] ** 2)


@dataclass(frozen=True)
class L1LsProblem:
    """One l1-penalized least-squares instance per target column.

    ``a`` is the d x n design, ``targets`` n x l, ``lambdas`` one positive
    regularizer per column (a scalar broadcasts).
    """

    a: np.ndarray
    targets: np.ndarray
    lambdas: np.ndarray

    def __post_init__(self):
        a = as_matrix(self.a, "a")
        t = as_matrix(self.targets, "targets")
        if t.shape[0] != a.shape[1]:
            raise InvalidInput(
                f"targets must have {a.shape[1]} rows to match the design, got {t.shape[0]}"
            )
        lam = np.broadcast_to(np.asarray(self.lambdas, dtype=float), (t.shape[1],)).copy()
        if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
            raise InvalidInput("all lambdas must be positive and finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "targets", t)
        object.__setattr__(self, "lambdas", lam)


@dataclass(frozen=True)
class FpcConfig:
    """Solver settings.  ``step=None`` means automatic (1 / lambda_max)."""

    step: float | None = None
    xtol: float = 1e-5
    max_iters: int = 10000
    use_bb_steps: bool = True
    continuation_stages: int = 4
    continuation_factor: float = 4.0
    track_objectives: bool = False

    def __post_init__(self):
        if self.step is not None and self.step <= 0:
            raise InvalidInput("explicit step must be positive")
        if self.xtol <= 0:
            raise InvalidInput("xtol must be positive")
        if self.max_iters < 1:
            raise InvalidInput("max_iters must be at least 1")
        if self.continuation_stages < 1:
            raise InvalidInput("continuation_stages must be at least 1")
        if self.continuation_factor <= 1:
            raise InvalidInput("continuation_factor must exceed 1")


@dataclass
class FpcResult:
    """Solver output; arrays have one column (or entry) per target."""

    solution: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    final_gradient: np.ndarray
    objective: np.ndarray
    objective_history: list = field(default_factory=list)


def _column_residuals(g, w, lam):
    """Subgradient optimality violation per column.

    For nonzero entries |g + lambda * sign(w)|, for zero entries
    max(|g| - lambda, 0); the column residual is the max over entries.
    """
    on_support = np.abs(g + lam[None, :] * np.sign(w))
    off_support = np.maximum(np.abs(g) - lam[None, :], 0.0)
    return np.where(w != 0.0, on_support, off_support).max(axis=0)


def optimality_residual(problem, w):
    """Optimality violation of ``w`` for each column of the problem.

    Zero iff the column is an exact minimizer.
    """
    w = as_matrix(w, "w")
    a, t = problem.a, problem.targets
    if w.shape != (a.shape[0], t.shape[1]):
        raise InvalidInput(
            f"w must have shape {(a.shape[0], t.shape[1])}, got {w.shape}"
        )
    g = a @ (a.T @ w - t)
    return _column_residuals(g, w, problem.lambdas)


def fpc_solve(problem, config=None):
    """Solve every column of ``problem`` by fixed-point iteration.

    A column is converged when the relative change
    ||w_new - w||_2 / max(||w||_2, 1) drops below ``xtol`` and, in the
    final continuation stage, the optimality residual is at most
    1e-4 * (1 + ||t_i||_2).  Thresholded entries are stored as exact
    zeros.
    """
    if config is None:
        config = FpcConfig()
    a, targets, lambdas = problem.a, problem.targets, problem.lambdas
    d, _ = a.shape
    n_cols = targets.shape[1]

    svd = thin_svd(a)
    if svd.numeric_rank == 0:
        raise InvalidInput("design matrix is zero")
    lam_max_gram = float(svd.singular_values[0] ** 2)
    if config.step is None:
        tau0 = 1.0 / lam_max_gram
    else:
        if not 0.0 < config.step < 2.0 / lam_max_gram:
            raise InvalidInput(
                f"step {config.step} outside (0, {2.0 / lam_max_gram:.6e})"
            )
        tau0 = config.step
    bb_cap = 1.999 / lam_max_gram
    check_descent = __debug__ and not config.use_bb_steps and config.step is None

    w = np.zeros((d, n_cols))
    iterations = np.zeros(n_cols, dtype=int)
    converged = np.zeros(n_cols, dtype=bool)
    final_gradient = np.full((d, n_cols), np.nan)
    have_gradient = np.zeros(n_cols, dtype=bool)
    exhausted = np.zeros(n_cols, dtype=bool)
    residual_tol = 1e-4 * (1.0 + np.linalg.norm(targets, axis=0))
    history = []
    last_objective = np.full(n_cols, np.inf)

    stages = config.continuation_stages
    for stage in range(stages):
        lam_stage = lambdas * config.continuation_factor ** (stages - 1 - stage)
        final_stage = stage == stages - 1
        active = np.flatnonzero(~exhausted)
        rel_change = np.full(n_cols, np.inf)
        step = np.full(n_cols, tau0)
        g_prev = np.zeros((d, n_cols))
        s_prev = np.zeros((d, n_cols))
        first_iter = np.ones(n_cols, dtype=bool)
        obj_prev = np.full(n_cols, np.inf)

        while active.size:
            wa = w[:, active]
            resid = a.T @ wa - targets[:, active]
            g = a @ resid

            if config.track_objectives or check_descent:
                obj = 0.5 * np.einsum("ij,ij->j", resid, resid) + lam_stage[
                    active
                ] * np.abs(wa).sum(axis=0)
                if check_descent:
                    ok = obj <= obj_prev[active] + 1e-12 * np.maximum(
                        1.0, np.abs(obj_prev[active])
                    )
                    assert np.all(ok), "objective increased with the fixed default step"
                obj_prev[active] = obj
                if config.track_objectives:
                    last_objective[active] = obj
                    history.append(last_objective.copy())

            # stop columns whose last update moved less than xtol; they
            # count as converged only if the iterate also passes the
            # subgradient optimality check
            done = rel_change[active] < config.xtol
            if np.any(done):
                cols = active[done]
                if final_stage:
                    res = _column_residuals(g[:, done], wa[:, done], lam_stage[cols])
                    converged[cols] = res <= residual_tol[cols]
                final_gradient[:, cols] = g[:, done]
                have_gradient[cols] = final_stage
                keep = ~done
                active = active[keep]
                if active.size == 0:
                    break
                wa = wa[:, keep]
                g = g[:, keep]

            if config.use_bb_steps:
                bb = np.full(active.size, tau0)
                old = ~first_iter[active]
                if np.any(old):
                    s = s_prev[:, active[old]]
                    dg = g[:, old] - g_prev[:, active[old]]
                    num = np.einsum("ij,ij->j", s, s)
                    den = np.einsum("ij,ij->j", s, dg)
                    with np.errstate(divide="ignore", invalid="ignore"):
                        ratio = np.where(den > 0, num / np.maximum(den, 1e-300), bb_cap)
                    bb[old] = np.clip(ratio, BB_STEP_FLOOR, bb_cap)
                step[active] = bb

            tau = step[active]
            w_new = soft_threshold(wa - g * tau[None, :], tau * lam_stage[active])
            if not np.all(np.isfinite(w_new)):
                bad = active[~np.all(np.isfinite(w_new), axis=0)]
                raise NumericalFailure(f"non-finite iterate in column(s) {bad.tolist()}")

            delta = w_new - wa
            rel_change[active] = np.linalg.norm(delta, axis=0) / np.maximum(
                np.linalg.norm(wa, axis=0), 1.0
            )
            s_prev[:, active] = delta
            g_prev[:, active] = g
            first_iter[active] = False
            w[:, active] = w_new
            iterations[active] += 1

            over = iterations[active] >= config.max_iters
            if np.any(over):
                exhausted[active[over]] = True
                active = active[~over]

    # gradients for columns that never passed the final-stage gate
    missing = np.flatnonzero(~have_gradient)
    if missing.size:
        final_gradient[:, missing] = a @ (a.T @ w[:, missing] - targets[:, missing])

    resid = a.T @ w - targets
    objective = 0.5 * np.einsum("ij,ij->j", resid, resid) + lambdas * np.abs(w).sum(
        axis=0
    )
    return FpcResult(
        solution=w,
        iterations=iterations,
        converged=converged,
        final_gradient=final_gradient,
        objective=objective,
        objective_history=history,
    )
