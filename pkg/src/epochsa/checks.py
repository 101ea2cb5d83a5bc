"""Randomized verification that sampled losses honor their certificate.

Each check draws fresh losses and points, evaluates the certified inequality
vectorized over the whole batch, and reports the worst margin seen. Margins
are signed so a negative worst margin pinpoints the size of a violation.
These functions back both the test suite and the ``check-assumptions`` CLI
subcommand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import BallDomain, project_rows
from .problems import LogisticProblem, Problem
from .validation import as_generator

#: Relative slack for inequalities that are tight up to rounding.
REL_SLACK = 1e-9
#: Absolute slack for projection identities.
PROJ_TOL = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    n_checks: int
    worst_margin: float
    detail: str = ""

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name} n={self.n_checks} worst_margin={self.worst_margin:.3e} {self.detail}".rstrip()


def check_nonnegativity(problem: Problem, n: int = 10_000, rng=None) -> CheckResult:
    """Every sampled loss is nonnegative at random domain points."""
    rng = as_generator(rng)
    X, y = problem.sample_pairs(n, rng)
    W = problem.domain.sample_interior(n, rng)
    vals = problem.rowwise_values(X, y, W)
    worst = float(vals.min())
    return CheckResult("nonnegativity", worst >= 0.0, n, worst)


def check_smoothness(problem: Problem, n: int = 10_000, rng=None) -> CheckResult:
    """Gradients of one sampled loss are L-Lipschitz between random point pairs."""
    rng = as_generator(rng)
    L = problem.constants.L
    X, y = problem.sample_pairs(n, rng)
    W1 = problem.domain.sample_interior(n, rng)
    W2 = problem.domain.sample_interior(n, rng)
    dg = problem.rowwise_grads(X, y, W1) - problem.rowwise_grads(X, y, W2)
    lhs = np.linalg.norm(dg, axis=1)
    rhs = L * np.linalg.norm(W1 - W2, axis=1) * (1.0 + REL_SLACK)
    worst = float((rhs - lhs).min())
    return CheckResult("smoothness", worst >= 0.0, n, worst, detail=f"L={L:g}")


def check_gradient_bound(problem: Problem, n: int = 10_000, rng=None) -> CheckResult:
    """Sampled gradient norms stay below the certified G over the domain."""
    rng = as_generator(rng)
    G = problem.constants.G
    X, y = problem.sample_pairs(n, rng)
    W = problem.domain.sample_interior(n, rng)
    norms = np.linalg.norm(problem.rowwise_grads(X, y, W), axis=1)
    worst = float((G * (1.0 + REL_SLACK) - norms).min())
    return CheckResult("gradient_bound", worst >= 0.0, n, worst, detail=f"G={G:g}")


def check_self_bounding(problem: Problem, n: int = 10_000, rng=None) -> CheckResult:
    """Squared gradient norms are at most ``4 L`` times the loss value."""
    rng = as_generator(rng)
    L = problem.constants.L
    X, y = problem.sample_pairs(n, rng)
    W = problem.domain.sample_interior(n, rng)
    grads = problem.rowwise_grads(X, y, W)
    g_sq = np.einsum("ij,ij->i", grads, grads)
    vals = problem.rowwise_values(X, y, W)
    worst = float((4.0 * L * vals + REL_SLACK - g_sq).min())
    return CheckResult("self_bounding", worst >= 0.0, n, worst)


def check_strong_convexity(
    problem: Problem, n: int = 10_000, rng=None, mc_pool: int = 4096
) -> CheckResult:
    """Risk gap dominates ``lam/2`` times the squared distance to the optimum.

    Exact for problems with closed-form risk. Monte-Carlo otherwise, with a
    three-standard-error allowance per point plus the standard error of the
    minimal-risk estimate.
    """
    rng = as_generator(rng)
    cert = problem.constants
    W = problem.domain.sample_interior(n, rng)
    dist_sq = np.einsum("ij,ij->i", W - problem.w_star, W - problem.w_star)
    quad = 0.5 * cert.lam * dist_sq - REL_SLACK

    if isinstance(problem, LogisticProblem):
        X, y = problem.eval_pool_slice(mc_pool)
        gaps = np.empty(n)
        slack = np.empty(n)
        chunk = max(1, 10_000_000 // mc_pool)
        for lo in range(0, n, chunk):
            hi = min(lo + chunk, n)
            margins = y * (W[lo:hi] @ X.T)
            losses = np.logaddexp(0.0, -margins)
            means = losses.mean(axis=1) + 0.5 * problem.reg * np.einsum(
                "ij,ij->i", W[lo:hi], W[lo:hi]
            )
            ses = losses.std(axis=1, ddof=1) / math.sqrt(mc_pool)
            gaps[lo:hi] = means - cert.F_star
            slack[lo:hi] = 3.0 * (ses + cert.F_star_std_error)
        worst = float((gaps + slack - quad).min())
        detail = f"mc_pool={mc_pool}"
    else:
        gaps = np.array([problem.risk(w) for w in W]) - cert.F_star
        worst = float((gaps - quad).min())
        detail = "exact"
    return CheckResult("strong_convexity", worst >= 0.0, n, worst, detail=detail)


def check_projection(domain: BallDomain, n: int = 10_000, rng=None) -> CheckResult:
    """Projection is idempotent, nonexpansive, and lands in the domain."""
    rng = as_generator(rng)
    d = domain.dim
    spread = 3.0 * domain.radius
    A = domain.center + spread * rng.standard_normal((n, d))
    B = domain.center + spread * rng.standard_normal((n, d))
    PA = project_rows(domain, A)
    PB = project_rows(domain, B)

    idem = np.linalg.norm(project_rows(domain, PA) - PA, axis=1)
    worst_idem = float((PROJ_TOL - idem).min())

    nonexp = np.linalg.norm(PA - PB, axis=1) - np.linalg.norm(A - B, axis=1)
    worst_nonexp = float((PROJ_TOL - nonexp).min())

    member = np.linalg.norm(PA - domain.center, axis=1) - domain.radius
    worst_member = float((PROJ_TOL - member).min())

    worst = min(worst_idem, worst_nonexp, worst_member)
    return CheckResult(
        "projection",
        worst >= 0.0,
        n,
        worst,
        detail=f"idem={worst_idem:.1e} nonexp={worst_nonexp:.1e} member={worst_member:.1e}",
    )


ASSUMPTION_CHECKS = (
    check_nonnegativity,
    check_smoothness,
    check_gradient_bound,
    check_self_bounding,
    check_strong_convexity,
)


def run_all_checks(problem: Problem, n: int = 10_000, seed: int = 0) -> list[CheckResult]:
    """All certificate checks plus the projection identities, seeded reproducibly."""
    results = []
    for i, check in enumerate(ASSUMPTION_CHECKS):
        results.append(check(problem, n=n, rng=np.random.default_rng(seed + i)))
    results.append(check_projection(problem.domain, n=n, rng=np.random.default_rng(seed + 99)))
    return results
