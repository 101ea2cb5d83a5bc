"""End-to-end acceptance runs: every guarantee checked at its stated tolerance.

Each test prints one ACCEPTANCE line with its runtime so a plain
``pytest -s tests/test_acceptance.py`` reads as a checklist. Runtime limits
are asserted, not just printed.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from epochsa import (
    EpochGDF,
    FASA,
    EpochGD,
    FixedStepSGD,
    epoch_decay_fit,
    estimate_grad_variance,
    fit_rate,
    loss_grad,
    loss_value,
    make_least_squares,
    make_logistic,
    run_all_checks,
)
from epochsa.bounds import epoch_gd_risk_bound, sgd_distance_bound
from epochsa.cli import main
from epochsa.harness import (
    ExperimentPlan,
    check_bound,
    epoch_excess_stats,
    run_trials,
)
from epochsa.solvers import epoch_gd_f, fasa as fasa_fn
from oracles import central_diff_grad


@contextmanager
def criterion(cid: str, name: str, limit_s: float):
    t0 = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - t0
        assert elapsed < limit_s, f"runtime {elapsed:.1f}s exceeds {limit_s}s"
    except BaseException:
        print(f"ACCEPTANCE {cid} {name}: FAIL ({time.perf_counter() - t0:.1f}s)")
        raise
    print(f"ACCEPTANCE {cid} {name}: PASS ({elapsed:.1f}s / limit {limit_s:.0f}s)")


def test_c01_property_suite():
    with criterion("01", "assumption-and-projection-properties", 10.0):
        ls = make_least_squares(4, [1.0] * 4, 2.0, 0.3, seed=7)
        lg = make_logistic(2, 2.0, 0.05, seed=11)
        for problem in (ls, lg):
            results = run_all_checks(problem, n=10_000, seed=2024)
            assert all(r.passed for r in results), [str(r) for r in results]
            assert all(r.n_checks == 10_000 for r in results)


def test_c02_schedule_identities(ls_realizable):
    with criterion("02", "schedule-identities", 1.0):
        lam = ls_realizable.constants.lam
        L = ls_realizable.constants.L
        kappa = ls_realizable.constants.kappa
        alpha, beta = 2.0, 2.0

        tr = fasa_fn(ls_realizable, np.random.default_rng(0), budget=2048, alpha=alpha)
        rounding = math.ceil(2 ** (alpha + 3) * kappa) / (2 ** (alpha + 3) * kappa)
        phase2 = range(tr.phase_split, tr.num_epochs)
        assert len(phase2) >= 2
        for k in phase2:
            assert tr.epoch_etas[k] * L <= 0.25
            assert lam * tr.epoch_etas[k] * tr.epoch_sizes[k] == 2 ** (alpha + 1) * rounding

        trf = epoch_gd_f(ls_realizable, np.random.default_rng(0), 300, beta, np.zeros(4))
        rounding_f = math.ceil(16 * beta * kappa) / (16 * beta * kappa)
        assert trf.epoch_etas[0] * L == 1.0 / (4.0 * beta) <= 0.25
        assert lam * trf.epoch_etas[0] * trf.epoch_sizes[0] == 4.0 * rounding_f


def test_c03_linear_convergence_realizable(ls_realizable):
    with criterion("03", "fixed-epoch-linear-convergence", 60.0):
        solver = EpochGDF(beta=2.0, budget=1280, start="boundary")
        plan = ExperimentPlan(ls_realizable, solver, [1280], trials=200, base_seed=303)
        results = run_trials(plan)
        assert results[1280][0].epochs == 10
        means, ses = epoch_excess_stats(results[1280])
        gap0 = ls_realizable.expected_risk(ls_realizable.domain.boundary_point())
        for k in range(1, 11):
            assert means[k - 1] - 3.0 * ses[k - 1] <= gap0 / 2.0**k
        assert epoch_decay_fit(means) <= -0.8


def test_c04_noise_plateau(ls_noisy):
    with criterion("04", "fixed-epoch-noise-plateau", 120.0):
        beta = 4.0
        epoch_len = math.ceil(16 * beta * ls_noisy.constants.kappa)  # 256
        budget = 12 * epoch_len
        solver = EpochGDF(beta=beta, budget=budget, start="boundary")
        plan = ExperimentPlan(ls_noisy, solver, [budget], trials=200, base_seed=404)
        results = run_trials(plan)
        assert results[budget][0].epochs == 12
        means, ses = epoch_excess_stats(results[budget])
        f0 = ls_noisy.expected_risk(ls_noisy.domain.boundary_point())
        rhs = (f0 - 0.03) / 4096.0 + 2.0 * 0.03 / beta
        assert means[-1] - 3.0 * ses[-1] <= rhs


def test_c05_two_phase_rate_exponent(ls_realizable):
    with criterion("05", "two-phase-bound-and-rate-exponent", 600.0):
        kappa = ls_realizable.constants.kappa
        grid = [int(m * kappa**2) for m in (32, 64, 128, 256, 512, 1024)]
        solver = FASA(alpha=2.0, budget=grid[0])
        plan = ExperimentPlan(ls_realizable, solver, grid, trials=100, base_seed=505)
        results = run_trials(plan)
        reports = check_bound("fasa_risk", plan, results)
        assert all(r.satisfied and r.in_regime for r in reports)
        # at alpha=2 the rhs reduces to 2^19 G^2/(lam T^2); cross-check one value
        G, lam = ls_realizable.constants.G, ls_realizable.constants.lam
        assert reports[0].theoretical_rhs == pytest.approx(2.0**19 * G * G / (lam * grid[0] ** 2))
        means = [r.empirical_mean for r in reports]
        assert fit_rate(grid, means).slope <= -1.5


def test_c06_epoch_gd_baseline(ls_noisy):
    with criterion("06", "epoch-gd-baseline-rate", 300.0):
        grid = [100, 1000, 10_000]
        solver = EpochGD(budget=grid[0])  # eta1 resolves to 1/lam, t1 = 4
        plan = ExperimentPlan(ls_noisy, solver, grid, trials=100, base_seed=606)
        results = run_trials(plan)
        reports = check_bound("epoch_gd_risk", plan, results)
        assert all(r.satisfied for r in reports)
        G, lam = ls_noisy.constants.G, ls_noisy.constants.lam
        for report in reports:
            assert report.theoretical_rhs == pytest.approx(32.0 * G * G / (lam * report.budget))
            conservative = epoch_gd_risk_bound(G, lam, report.budget // 2)
            assert report.empirical_mean - 3.0 * report.std_error <= conservative


def test_c07_fixed_step_distance_bound():
    with criterion("07", "fixed-step-distance-bound", 120.0):
        for a in (0.0, 0.3):
            problem = make_least_squares(4, [1.0] * 4, 2.0, a, seed=7)
            cert = problem.constants
            gamma = 1.0 / (2.0 * cert.L)
            for budget in (100, 500):
                solver = FixedStepSGD(gamma=gamma, budget=budget, constrained=False)
                plan = ExperimentPlan(problem, solver, [budget], trials=200, base_seed=707)
                results = run_trials(plan)
                (report,) = check_bound("sgd_distance", plan, results)
                assert report.satisfied
                d0 = float(problem.w_star @ problem.w_star)  # start at the center
                assert report.theoretical_rhs == pytest.approx(
                    sgd_distance_bound(gamma, cert.lam, cert.L, cert.F_star, budget, d0)
                )


def test_c08_gradient_variance_example(ls_realizable):
    with criterion("08", "gradient-variance-at-and-off-optimum", 5.0):
        at_opt, se_opt = estimate_grad_variance(
            ls_realizable, ls_realizable.w_star, 100_000, np.random.default_rng(808), with_std_error=True
        )
        assert at_opt <= 3.0 * se_opt + 1e-24
        off = ls_realizable.w_star + np.array([1.0, 0.0, 0.0, 0.0])
        off_est, off_se = estimate_grad_variance(
            ls_realizable, off, 100_000, np.random.default_rng(809), with_std_error=True
        )
        assert off_est - 3.0 * off_se > 0.0


def test_c09_finite_difference_oracle(ls_noisy, logistic_small):
    with criterion("09", "finite-difference-gradient-oracle", 5.0):
        for problem in (ls_noisy, logistic_small):
            rng = np.random.default_rng(909)
            X, y = problem.sample_pairs(1000, rng)
            W = problem.domain.sample_interior(1000, rng)
            for i in range(1000):
                f = problem.sample(np.random.default_rng(i))
                w = W[i]
                g = loss_grad(f, w)
                fd = central_diff_grad(lambda v: loss_value(f, v), w, h=1e-6)
                assert np.linalg.norm(fd - g) <= 1e-5 * np.linalg.norm(g) + 1e-8


def test_c10_rerun_byte_identical_csv(tmp_path):
    with criterion("10", "rerun-byte-identical-csv", 120.0):
        config = tmp_path / "exp.cfg"
        out = tmp_path / "out.csv"
        config.write_text(
            "[problem]\n"
            "kind = least_squares\n"
            "d = 4\n"
            "B = 2.0\n"
            "a = 0.3\n"
            "seed = 7\n"
            "[solver]\n"
            "algorithm = epoch_gd\n"
            "[experiment]\n"
            "budget_grid = 100, 1000, 10000\n"
            "trials = 100\n"
            "base_seed = 606\n"
            "[output]\n"
            f"csv = {out}\n"
            "verbosity = 0\n",
            encoding="utf-8",
        )
        assert main(["run", "--config", str(config)]) == 0
        first = out.read_bytes()
        assert main(["run", "--config", str(config)]) == 0
        assert out.read_bytes() == first
        assert len(first.splitlines()) == 4  # header + one row per budget
