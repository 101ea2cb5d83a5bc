from dataclasses import replace

import numpy as np
import pytest

from epochsa.checks import (
    check_gradient_bound,
    check_projection,
    check_smoothness,
    check_strong_convexity,
    run_all_checks,
)


def _corrupt(problem, **overrides):
    """Shallow copy of a problem with certificate fields swapped out."""
    import copy

    bad = copy.copy(problem)
    cert = problem.constants
    new_L = overrides.get("L", cert.L)
    new_lam = overrides.get("lam", cert.lam)
    bad.constants = replace(cert, kappa=new_L / new_lam, **overrides)
    return bad


@pytest.mark.parametrize("which", ["ls_noisy", "logistic_small"])
def test_all_checks_pass_on_valid_certificates(which, request):
    problem = request.getfixturevalue(which)
    results = run_all_checks(problem, n=2000, seed=1)
    assert all(r.passed for r in results), [str(r) for r in results]


def test_halved_smoothness_constant_is_caught(ls_noisy):
    bad = _corrupt(ls_noisy, L=ls_noisy.constants.L / 2.0)
    res = check_smoothness(bad, n=10_000, rng=np.random.default_rng(0))
    assert not res.passed
    assert res.worst_margin < 0.0


def test_halved_gradient_bound_is_caught(ls_noisy):
    bad = _corrupt(ls_noisy, G=ls_noisy.constants.G / 4.0)
    res = check_gradient_bound(bad, n=10_000, rng=np.random.default_rng(0))
    assert not res.passed


def test_inflated_strong_convexity_is_caught(ls_noisy):
    bad = _corrupt(ls_noisy, lam=ls_noisy.constants.lam * 4.0)
    res = check_strong_convexity(bad, n=10_000, rng=np.random.default_rng(0))
    assert not res.passed


def test_projection_check_on_shifted_ball():
    from epochsa.geometry import BallDomain

    domain = BallDomain(np.array([1.0, -2.0, 0.5]), 0.7)
    res = check_projection(domain, n=5000, rng=np.random.default_rng(2))
    assert res.passed


def test_result_lines_are_printable(ls_realizable):
    for res in run_all_checks(ls_realizable, n=500, seed=0):
        line = str(res)
        assert line.startswith(("PASS", "FAIL"))
        assert res.name in line
