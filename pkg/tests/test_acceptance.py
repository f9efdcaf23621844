"""Acceptance suite: one test per primary criterion, at its stated tolerance.

Each test prints a PASS/FAIL line (run pytest with -s to see them inline;
they also appear in captured output on failure).  The checks themselves live
in :mod:`symvi.verification`, the same code path the `symvi verify-all` CLI
reports on, so this suite and the CLI cannot disagree.
"""

import time

import numpy as np
import pytest

from symvi import verification as vf


def report(checks, elapsed=None, budget=None):
    ok = True
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"[{status}] {c.name}: value={c.value:.6g} tolerance={c.tolerance:.6g}")
        ok &= c.passed
    if budget is not None:
        status = "PASS" if elapsed < budget else "FAIL"
        print(f"[{status}] runtime: {elapsed:.1f}s (budget {budget}s)")
    assert ok, "criterion failed: " + ", ".join(c.name for c in checks if not c.passed)
    if budget is not None:
        assert elapsed < budget


def timed(fn, *args):
    start = time.time()
    out = fn(*args)
    return out, time.time() - start


def test_appendix_constants_d3():
    """A = 0.6135 +- 5e-4, B = 0.2637 +- 5e-4, eta_c = 1.1632 +- 1e-3, and the
    fitted latitude at eta = 2 equals 0.5816 +- 1e-3; all under 10 seconds."""
    checks, elapsed = timed(vf.check_appendix_constants, 0)
    report(checks, elapsed, budget=10.0)


def test_closed_form_vs_quadrature_moments():
    """Quadrature moments match the d = 3 closed forms to 1e-10 for 10
    concentrations, under 1 second."""
    checks, elapsed = timed(vf.check_closed_form_moments)
    report(checks, elapsed, budget=1.0)


def test_phase_transition_sweep():
    """Sweeping eta over [0.2, 3] * eta_c: axis recovery holds iff
    eta <= eta_c, and fitted latitudes match predictions to 1e-4; under 30 s."""
    checks, elapsed = timed(vf.check_phase_transition, 0)
    report(checks, elapsed, budget=30.0)


def test_pushforward_invariance_trials():
    """50 randomized (generator, Gaussian pair, affine map) trials with
    discrepancy at most 1e-5 each, under 60 seconds."""
    checks, elapsed = timed(vf.check_pushforward_invariance, 0)
    report(checks, elapsed, budget=60.0)


def test_even_symmetry_mean_recovery():
    """Reverse-KL, forward-KL, and chi-squared fits to the canonical even
    mixture all recover the center to 1e-3, under 2 minutes."""
    checks, elapsed = timed(vf.check_even_recovery, 0)
    report(checks, elapsed, budget=120.0)


def test_elliptical_recovery():
    """Covariance proportionality residual and correlation gap at most 1e-3
    (the absolute scale is deliberately not asserted), under 2 minutes."""
    checks, elapsed = timed(vf.check_elliptical_recovery, 0)
    report(checks, elapsed, budget=120.0)


def test_correlation_counterexample():
    """Correlation of the rotated anisotropic Gaussian equals
    [[1, -1/2], [-1/2, 1]] to 1e-9 while the rotated isotropic one stays the
    identity, under 1 second of divergence-free linear work."""
    checks, elapsed = timed(vf.check_b2_counterexample)
    report(checks, elapsed, budget=1.0)


def test_sampler_moment_checks():
    """vMF sample moments match quadrature predictions within 4 standard
    errors at n = 1e5, including the uniform limit, under 30 seconds."""
    checks, elapsed = timed(vf.check_sampler_moments, 0)
    report(checks, elapsed, budget=30.0)


def test_property_suites():
    """Moment-positivity grid, orbit constancy, vanishing self-divergence,
    generator duality, and Monte Carlo consistency; under 3 minutes total."""
    start = time.time()
    checks = (
        vf.check_moment_grid()
        + vf.check_orbit_constancy(0)
        + vf.check_self_divergence()
        + vf.check_generator_duality()
        + vf.check_monte_carlo_consistency(0)
    )
    report(checks, time.time() - start, budget=180.0)


def test_verify_all_is_green():
    """The CLI-facing runner agrees: every named check passes."""
    report_dict = vf.run_all(seed=0)
    failed = [c["name"] for c in report_dict["checks"] if not c["passed"]]
    print(f"[{'PASS' if report_dict['all_pass'] else 'FAIL'}] "
          f"verify-all: {report_dict['n_checks'] - len(failed)}/{report_dict['n_checks']}")
    assert report_dict["all_pass"], f"failing checks: {failed}"
