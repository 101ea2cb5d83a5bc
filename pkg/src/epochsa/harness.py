"""Monte-Carlo experiment engine.

Runs repeated independent solver trials across a budget grid, aggregates
excess risk with confidence intervals, compares empirical means against the
closed-form guarantees as one-sided inequalities with a three-standard-error
allowance, and fits convergence-rate exponents.

Trials are embarrassingly parallel; each owns a private generator derived
from ``(base_seed, budget, trial_index)``, so results are bit-identical
regardless of worker count or completion order. ``EPOCHSA_THREADS`` caps the
process pool (default: machine parallelism).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import bounds
from .problems import Problem
from .solvers import BaseSolver, resolve_start
from .validation import check_positive_int

#: Allowance in standard errors for the one-sided bound checks.
SE_ALLOWANCE = 3.0


@dataclass(frozen=True)
class TrialResult:
    """Excess-risk trajectory of one solved trial."""

    budget: int
    trial: int
    epoch_excess: np.ndarray
    final_excess: float
    final_dist_sq: float
    gradients: int
    epochs: int
    degenerate: bool


@dataclass(frozen=True)
class ExperimentPlan:
    """A problem, a solver prototype, and the Monte-Carlo sweep to run."""

    problem: Problem
    solver: BaseSolver
    budget_grid: list
    trials: int
    base_seed: int

    def __post_init__(self):
        check_positive_int(self.trials, "trials")
        grid = [check_positive_int(T, "budget") for T in self.budget_grid]
        if any(cur >= nxt for cur, nxt in zip(grid, grid[1:])):
            raise ValueError("budget_grid must be strictly increasing")
        object.__setattr__(self, "budget_grid", grid)


def trial_seed(base_seed: int, budget: int, trial: int) -> np.random.SeedSequence:
    """Deterministic per-trial stream key; distinct for distinct (budget, trial)."""
    # SeedSequence entropy words must be nonnegative; fold signed seeds in.
    return np.random.SeedSequence(
        entropy=(int(base_seed) & (2**64 - 1), int(budget), int(trial))
    )


def _run_one(problem: Problem, solver: BaseSolver, budget: int, trial: int, base_seed: int) -> TrialResult:
    params = dict(solver.get_params(), budget=budget, random_state=None)
    fitted = type(solver)(**params).fit(problem, rng=np.random.default_rng(trial_seed(base_seed, budget, trial)))
    trace = fitted.trace_
    f_star = problem.constants.F_star
    w_star = problem.w_star
    epoch_excess = np.array([problem.risk(w) - f_star for w in trace.epoch_iterates])
    delta = trace.final - w_star
    return TrialResult(
        budget=budget,
        trial=trial,
        epoch_excess=epoch_excess,
        final_excess=problem.risk(trace.final) - f_star,
        final_dist_sq=float(delta @ delta),
        gradients=trace.gradients_consumed,
        epochs=trace.num_epochs,
        degenerate=trace.degenerate,
    )


def _run_chunk(args) -> list:
    problem, solver, tasks, base_seed = args
    return [_run_one(problem, solver, T, j, base_seed) for (T, j) in tasks]


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("EPOCHSA_THREADS")
    if env is not None:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_trials(plan: ExperimentPlan, workers: int | None = None) -> dict:
    """All (budget, trial) solves of the plan, keyed by budget.

    The returned lists are ordered by trial index. A failing trial propagates
    and aborts the whole run; partial results would silently skew the means.
    """
    tasks = [(T, j) for T in plan.budget_grid for j in range(plan.trials)]
    n_workers = _worker_count(workers)
    flat: list[TrialResult] = []
    if n_workers == 1 or len(tasks) < 4:
        flat = [_run_one(plan.problem, plan.solver, T, j, plan.base_seed) for (T, j) in tasks]
    else:
        n_chunks = min(len(tasks), 4 * n_workers)
        chunks = [
            (plan.problem, plan.solver, tasks[i::n_chunks], plan.base_seed)
            for i in range(n_chunks)
        ]
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            for part in pool.map(_run_chunk, chunks):
                flat.extend(part)
    out: dict[int, list[TrialResult]] = {T: [] for T in plan.budget_grid}
    for res in flat:
        out[res.budget].append(res)
    for T in out:
        out[T].sort(key=lambda r: r.trial)
    return out


def mean_and_se(samples) -> tuple:
    """Sample mean and standard error (0 for a single sample)."""
    arr = np.asarray(samples, dtype=np.float64)
    mean = float(arr.mean())
    se = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return mean, se


def epoch_excess_stats(results: list) -> tuple:
    """Across-trial mean and standard error of excess at each epoch boundary."""
    mat = np.vstack([r.epoch_excess for r in results])
    means = mat.mean(axis=0)
    ses = mat.std(axis=0, ddof=1) / math.sqrt(mat.shape[0]) if mat.shape[0] > 1 else np.zeros(mat.shape[1])
    return means, ses


@dataclass(frozen=True)
class BoundReport:
    """One empirical-versus-theoretical comparison at a single budget."""

    theorem: str
    budget: int
    empirical_mean: float
    std_error: float
    theoretical_rhs: float
    satisfied: bool
    in_regime: bool = True
    n_samples: int = 0


#: Bound kind run by default for each solver algorithm.
DEFAULT_BOUND_KIND = {
    "epoch_gd": "epoch_gd_risk",
    "fasa": "fasa_risk",
    "epoch_gd_f": "fixed_epoch_risk",
    "fixed_sgd": "sgd_risk",
}


def _bound_rhs(kind: str, plan: ExperimentPlan, budget: int, results: list) -> tuple:
    """(rhs, in_regime, empirical samples) for one bound kind at one budget."""
    problem = plan.problem
    cert = problem.constants
    solver = plan.solver
    samples = [r.final_excess for r in results]
    in_regime = True

    if kind == "fasa_risk":
        alpha = solver.alpha
        rhs = bounds.fasa_risk_bound(cert.G, cert.lam, cert.kappa, cert.F_star, budget, alpha)
        in_regime = bounds.fasa_in_regime(cert.kappa, budget, alpha)
    elif kind == "fixed_epoch_risk":
        w0 = resolve_start(problem.domain, solver.start)
        initial_gap = problem.risk(w0) - cert.F_star
        k_dagger = results[0].epochs
        rhs = bounds.fixed_epoch_risk_bound(initial_gap, cert.F_star, solver.beta, k_dagger)
    elif kind == "epoch_gd_risk":
        rhs = bounds.epoch_gd_risk_bound(cert.G, cert.lam, budget)
    elif kind in ("sgd_distance", "sgd_risk"):
        gamma = 1.0 / (2.0 * cert.L) if solver.gamma is None else solver.gamma
        w0 = resolve_start(problem.domain, solver.start)
        delta = w0 - problem.w_star
        dist0_sq = float(delta @ delta)
        if kind == "sgd_distance":
            samples = [r.final_dist_sq for r in results]
            rhs = bounds.sgd_distance_bound(gamma, cert.lam, cert.L, cert.F_star, budget, dist0_sq)
        elif solver.constrained:
            rhs = bounds.sgd_risk_bound_constrained(
                gamma, cert.lam, cert.L, cert.F_star, budget, dist0_sq, problem.grad_norm_at_opt()
            )
        else:
            rhs = bounds.sgd_risk_bound_unconstrained(
                gamma, cert.lam, cert.L, cert.F_star, budget, dist0_sq
            )
    else:
        raise ValueError(f"unknown bound kind {kind!r}")

    if not cert.F_star_is_exact:
        rhs += SE_ALLOWANCE * cert.F_star_std_error
    return rhs, in_regime, samples


def check_bound(kind: str, plan: ExperimentPlan, results_by_budget: dict) -> list:
    """One :class:`BoundReport` per budget; satisfied means
    ``mean - 3 SE <= rhs`` (trivially true for an infinite rhs)."""
    reports = []
    for budget in plan.budget_grid:
        results = results_by_budget[budget]
        rhs, in_regime, samples = _bound_rhs(kind, plan, budget, results)
        mean, se = mean_and_se(samples)
        satisfied = bool(mean - SE_ALLOWANCE * se <= rhs)
        reports.append(
            BoundReport(
                theorem=kind,
                budget=budget,
                empirical_mean=mean,
                std_error=se,
                theoretical_rhs=rhs,
                satisfied=satisfied,
                in_regime=in_regime,
                n_samples=len(samples),
            )
        )
    return reports


@dataclass(frozen=True)
class RateFit:
    """Ordinary least squares on (log budget, log mean-excess) pairs."""

    log_budgets: list
    log_excess: list
    slope: float
    intercept: float
    r_squared: float
    n_dropped: int = 0


def _ols(x: np.ndarray, y: np.ndarray) -> tuple:
    slope, intercept = np.polyfit(x, y, deg=1)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    centered = y - y.mean()
    ss_tot = float(centered @ centered)
    if ss_tot == 0.0:
        r_sq = 1.0 if ss_res == 0.0 else 0.0
    else:
        r_sq = 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r_sq


def fit_rate(budgets, mean_excesses) -> RateFit:
    """Power-law exponent of mean excess versus budget.

    Nonpositive excesses have no logarithm; they are dropped and counted,
    and fewer than three surviving points is an error.
    """
    budgets = np.asarray(budgets, dtype=np.float64)
    excess = np.asarray(mean_excesses, dtype=np.float64)
    if budgets.shape != excess.shape:
        raise ValueError("budgets and mean_excesses must align")
    keep = excess > 0.0
    n_dropped = int((~keep).sum())
    if keep.sum() < 3:
        raise ValueError("need at least 3 positive points to fit a rate")
    x = np.log(budgets[keep])
    y = np.log(excess[keep])
    slope, intercept, r_sq = _ols(x, y)
    return RateFit(
        log_budgets=[float(v) for v in x],
        log_excess=[float(v) for v in y],
        slope=slope,
        intercept=intercept,
        r_squared=r_sq,
        n_dropped=n_dropped,
    )


def epoch_decay_fit(epoch_excesses, noise_floor: float = 0.0) -> float:
    """Log2 decay slope per epoch over the pre-plateau range.

    Points at or below ``10 * noise_floor`` sit where the floor dominates
    and would flatten the fit, so they are excluded, as are nonpositive
    values (no logarithm).
    """
    excess = np.asarray(epoch_excesses, dtype=np.float64)
    ks = np.arange(1, excess.size + 1, dtype=np.float64)
    keep = excess > max(10.0 * noise_floor, 0.0)
    if keep.sum() < 3:
        raise ValueError("need at least 3 pre-plateau epochs to fit a decay slope")
    slope, _, _ = _ols(ks[keep], np.log2(excess[keep]))
    return slope
