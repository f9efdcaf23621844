"""Tests for f-divergence generators and numerical evaluation.

Closed-form Gaussian divergences serve as oracles throughout:

  KL(N(m1,S1) || N(m2,S2)) = 0.5 * (tr(S2^-1 S1) + (m2-m1)' S2^-1 (m2-m1)
                                    - d + log det S2 / det S1)
  chi^2(P || Q) = Z - 1 with Z = |S2|^(1/2) |S1|^-1 |A|^(-1/2)
                  * exp(b' A^-1 b / 2 + c0),
  A = 2 S1^-1 - S2^-1 (must be PD), b = 2 S1^-1 m1 - S2^-1 m2,
  c0 = -m1' S1^-1 m1 + m2' S2^-1 m2 / 2.

The chi^2 formula is itself validated against an independent adaptive
quadrature before use.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad as scipy_quad

from symvi import divergence as dv
from symvi import euclidean as eu
from symvi.errors import InvalidInputError


def gaussian_kl(m1, s1, m2, s2):
    m1, m2 = np.atleast_1d(m1).astype(float), np.atleast_1d(m2).astype(float)
    s1, s2 = np.atleast_2d(s1).astype(float), np.atleast_2d(s2).astype(float)
    d = m1.shape[0]
    s2_inv = np.linalg.inv(s2)
    delta = m2 - m1
    return 0.5 * (
        np.trace(s2_inv @ s1)
        + delta @ s2_inv @ delta
        - d
        + np.linalg.slogdet(s2)[1]
        - np.linalg.slogdet(s1)[1]
    )


def gaussian_chi_squared(m1, s1, m2, s2):
    m1, m2 = np.atleast_1d(m1).astype(float), np.atleast_1d(m2).astype(float)
    s1, s2 = np.atleast_2d(s1).astype(float), np.atleast_2d(s2).astype(float)
    d = m1.shape[0]
    s1_inv, s2_inv = np.linalg.inv(s1), np.linalg.inv(s2)
    a = 2.0 * s1_inv - s2_inv
    if np.linalg.eigvalsh(a)[0] <= 0:
        return math.inf
    b = 2.0 * s1_inv @ m1 - s2_inv @ m2
    c0 = -m1 @ s1_inv @ m1 + 0.5 * m2 @ s2_inv @ m2
    log_z = (
        0.5 * np.linalg.slogdet(s2)[1]
        - np.linalg.slogdet(s1)[1]
        - 0.5 * np.linalg.slogdet(a)[1]
        + 0.5 * b @ np.linalg.inv(a) @ b
        + c0
    )
    return math.exp(log_z) - 1.0


def uniform_density(lo, hi):
    lo, hi = float(lo), float(hi)

    def log_density(x):
        inside = (x[:, 0] >= lo) & (x[:, 0] <= hi)
        return np.where(inside, -math.log(hi - lo), -np.inf)

    return dv.Density(
        dim=1,
        log_density=log_density,
        support="box",
        support_box=np.array([[lo, hi]]),
        center=np.array([(lo + hi) / 2]),
        spread=np.array([(hi - lo) / math.sqrt(12.0)]),
    )


def test_chi_squared_oracle_against_independent_quadrature():
    # validate the closed form itself before it is used as an oracle
    m1, s1, m2, s2 = 0.3, 0.8, -0.2, 1.1

    def integrand(x):
        p = math.exp(-0.5 * (x - m1) ** 2 / s1) / math.sqrt(2 * math.pi * s1)
        q = math.exp(-0.5 * (x - m2) ** 2 / s2) / math.sqrt(2 * math.pi * s2)
        return p * p / q

    ref, _ = scipy_quad(integrand, -40, 40, limit=400)
    assert abs(gaussian_chi_squared([m1], [[s1]], [m2], [[s2]]) - (ref - 1)) < 1e-10


class TestGenerators:
    def test_reverse_kl_at_one_is_zero(self):
        assert dv.eval_generator(dv.REVERSE_KL, 1.0) == 0.0

    def test_every_generator_vanishes_at_one(self):
        for g in dv.GENERATORS.values():
            assert dv.eval_generator(g, 1.0) == pytest.approx(0.0, abs=1e-15)

    def test_forward_kl_limit_at_zero(self):
        # t log t -> 0; cross-check the limit numerically
        assert dv.eval_generator(dv.FORWARD_KL, 0.0) == 0.0
        assert abs(dv.eval_generator(dv.FORWARD_KL, 1e-12)) < 1e-10

    def test_chi_squared_value(self):
        assert dv.eval_generator(dv.CHI_SQUARED, 3.0) == 4.0

    def test_negative_argument_rejected(self):
        with pytest.raises(InvalidInputError):
            dv.eval_generator(dv.FORWARD_KL, -0.5)

    def test_extended_values(self):
        assert dv.REVERSE_KL.f_at_zero == math.inf
        assert dv.REVERSE_KL.f_prime_at_inf == 0.0
        assert dv.FORWARD_KL.f_prime_at_inf == math.inf
        assert dv.TOTAL_VARIATION.f_at_zero == 0.5
        assert dv.TOTAL_VARIATION.f_prime_at_inf == 0.5
        assert dv.SQUARED_HELLINGER.f_at_zero == 1.0
        assert dv.SQUARED_HELLINGER.f_prime_at_inf == 1.0

    def test_convexity_on_sampled_points(self):
        rng = np.random.default_rng(0)
        for g in dv.GENERATORS.values():
            t = rng.uniform(1e-3, 50.0, size=200)
            alpha = rng.uniform(0.0, 1.0, size=200)
            mix = alpha * t + (1 - alpha) * t[::-1]
            lhs = g.f(mix)
            rhs = alpha * g.f(t) + (1 - alpha) * g.f(t[::-1])
            assert np.all(lhs <= rhs + 1e-12), g.name

    def test_weighted_form_matches_plain_form(self):
        rng = np.random.default_rng(1)
        lp = rng.uniform(-30.0, 2.0, size=500)
        lq = rng.uniform(-30.0, 2.0, size=500)
        for g in dv.GENERATORS.values():
            direct = np.exp(lq) * g.f(np.exp(lp - lq))
            stable = g.weighted_f(lp, lq)
            np.testing.assert_allclose(stable, direct, rtol=1e-9, atol=1e-300)


class TestQuadrature:
    def test_self_divergence_zero(self):
        p = eu.gaussian_density([0.0], [[1.0]])
        quad = dv.box_quadrature(p)
        for g in dv.GENERATORS.values():
            assert abs(dv.divergence_quadrature(g, p, p, quad)) <= 1e-8

    def test_gaussian_forward_kl(self):
        p = eu.gaussian_density([0.0], [[1.0]])
        q = eu.gaussian_density([1.0], [[1.0]])
        quad = dv.box_quadrature(p, q)
        val = dv.divergence_quadrature(dv.FORWARD_KL, p, q, quad)
        assert abs(val - 0.5) < 1e-6

    def test_disjoint_uniforms_total_variation(self):
        # exercises the singular term: f'(inf) * P({q=0}) = 1/2 plus
        # the q-side integral of q * f(0) = 1/2
        p = uniform_density(0, 1)
        q = uniform_density(2, 3)
        quad = dv.QuadratureSpec("box", nodes_per_axis=200, box=np.array([[-1.0, 4.0]]))
        val = dv.divergence_quadrature(dv.TOTAL_VARIATION, p, q, quad)
        assert abs(val - 1.0) < 1e-6

    def test_disjoint_uniforms_kl_is_infinite(self):
        p = uniform_density(0, 1)
        q = uniform_density(2, 3)
        quad = dv.QuadratureSpec("box", nodes_per_axis=200, box=np.array([[-1.0, 4.0]]))
        assert dv.divergence_quadrature(dv.FORWARD_KL, p, q, quad) == math.inf

    def test_nonnegativity_on_random_pairs(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            p = eu.gaussian_density(rng.normal(size=1), [[0.5 + rng.random()]])
            q = eu.gaussian_density(rng.normal(size=1), [[0.5 + rng.random()]])
            quad = dv.box_quadrature(p, q)
            for g in dv.GENERATORS.values():
                assert dv.divergence_quadrature(g, p, q, quad) >= -1e-9

    def test_2d_gaussian_kl_matches_oracle(self):
        m1, s1 = np.array([0.2, -0.4]), np.array([[1.2, 0.3], [0.3, 0.7]])
        m2, s2 = np.array([-0.1, 0.5]), np.array([[0.9, -0.2], [-0.2, 1.4]])
        p, q = eu.gaussian_density(m1, s1), eu.gaussian_density(m2, s2)
        quad = dv.box_quadrature(p, q)
        val = dv.divergence_quadrature(dv.FORWARD_KL, p, q, quad)
        assert abs(val - gaussian_kl(m1, s1, m2, s2)) < 1e-8

    def test_2d_chi_squared_matches_oracle(self):
        m1, s1 = np.array([0.1, 0.2]), np.array([[1.0, 0.2], [0.2, 0.8]])
        m2, s2 = np.array([0.0, 0.0]), np.array([[1.3, 0.1], [0.1, 1.1]])
        p, q = eu.gaussian_density(m1, s1), eu.gaussian_density(m2, s2)
        quad = dv.box_quadrature(p, q)
        val = dv.divergence_quadrature(dv.CHI_SQUARED, p, q, quad)
        assert abs(val - gaussian_chi_squared(m1, s1, m2, s2)) < 1e-8

    def test_dimension_mismatch_rejected(self):
        p = eu.gaussian_density([0.0], [[1.0]])
        q = eu.gaussian_density([0.0, 0.0], np.eye(2))
        quad = dv.box_quadrature(p)
        with pytest.raises(InvalidInputError):
            dv.divergence_quadrature(dv.FORWARD_KL, p, q, quad)

    def test_infinite_singular_term(self):
        # P has mass where Q vanishes and f'(inf) = inf: divergence is +inf
        p = uniform_density(0, 2)
        q = uniform_density(0, 1)
        quad = dv.QuadratureSpec("box", nodes_per_axis=200, box=np.array([[-0.5, 2.5]]))
        assert dv.divergence_quadrature(dv.CHI_SQUARED, p, q, quad) == math.inf


class TestDuality:
    def test_swapped_generator_limits(self):
        for g in dv.GENERATORS.values():
            swapped = dv.swap_generator(g)
            assert swapped.f_at_zero == g.f_prime_at_inf
            assert swapped.f_prime_at_inf == g.f_at_zero

    def test_duality_for_all_builtins(self):
        p = eu.gaussian_density([0.0], [[1.0]])
        q = eu.gaussian_density([0.8], [[1.6]])
        quad = dv.QuadratureSpec("box", nodes_per_axis=800, box=dv.default_box(p, q))
        for g in dv.GENERATORS.values():
            lhs = dv.divergence_quadrature(dv.swap_generator(g), p, q, quad)
            rhs = dv.divergence_quadrature(g, q, p, quad)
            assert abs(lhs - rhs) <= 1e-8, g.name


class TestMonteCarlo:
    def test_requires_minimum_samples(self):
        p = eu.gaussian_density([0.0], [[1.0]])
        with pytest.raises(InvalidInputError):
            dv.divergence_monte_carlo(
                dv.REVERSE_KL, p, p, lambda n, rng: rng.normal(size=(n, 1)), 50, 0
            )

    def test_self_divergence_within_noise(self):
        p = eu.gaussian_density([0.0], [[1.0]])
        est, se = dv.divergence_monte_carlo(
            dv.REVERSE_KL, p, p, lambda n, rng: rng.normal(size=(n, 1)), 10_000, 3
        )
        assert abs(est) <= max(3.0 * se, 1e-12)

    def test_gaussian_kl_oracle(self):
        p = eu.gaussian_density([0.0], [[1.0]])
        q = eu.gaussian_density([1.0], [[1.0]])
        est, se = dv.divergence_monte_carlo(
            dv.REVERSE_KL, p, q, lambda n, rng: rng.normal(1.0, 1.0, size=(n, 1)), 100_000, 11
        )
        assert abs(est - 0.5) < 0.02

    def test_deterministic_given_seed(self):
        p = eu.gaussian_density([0.0], [[1.0]])
        q = eu.gaussian_density([0.5], [[1.2]])
        sampler = lambda n, rng: 0.5 + math.sqrt(1.2) * rng.standard_normal((n, 1))
        a = dv.divergence_monte_carlo(dv.REVERSE_KL, p, q, sampler, 5000, 42)
        b = dv.divergence_monte_carlo(dv.REVERSE_KL, p, q, sampler, 5000, 42)
        assert a == b

    def test_zero_density_sample_flags_infinity(self):
        p = uniform_density(0, 1)
        q = uniform_density(0, 2)

        def sampler(n, rng):
            return rng.uniform(0.0, 2.0, size=(n, 1))

        est, se = dv.divergence_monte_carlo(dv.REVERSE_KL, p, q, sampler, 1000, 0)
        assert est == math.inf and se == math.inf


class TestPushforwardInvariance:
    def test_identity_map_exact(self):
        p = eu.gaussian_density([0.0], [[1.0]])
        q = eu.gaussian_density([1.0], [[1.0]])
        quad = dv.box_quadrature(p, q)
        identity = eu.AffineMap(A=np.eye(1), b=np.zeros(1))
        assert dv.check_pushforward_invariance(dv.FORWARD_KL, p, q, identity, quad) == 0.0

    def test_scalar_affine_matches_closed_form(self):
        p = eu.gaussian_density([0.0], [[1.0]])
        q = eu.gaussian_density([1.0], [[1.0]])
        quad = dv.box_quadrature(p, q)
        affine = eu.AffineMap(A=np.array([[3.0]]), b=np.array([2.0]))
        assert dv.check_pushforward_invariance(dv.FORWARD_KL, p, q, affine, quad) <= 1e-6

    def test_chi_squared_random_2d_trials(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            base = rng.standard_normal((2, 2))
            s1 = base @ base.T + 0.4 * np.eye(2)
            extra = rng.standard_normal((2, 2))
            s2 = 0.7 * s1 + 0.5 * (extra @ extra.T + 0.3 * np.eye(2))
            m1 = 0.4 * rng.standard_normal(2)
            m2 = m1 + 0.3 * rng.standard_normal(2)
            p, q = eu.gaussian_density(m1, s1), eu.gaussian_density(m2, s2)
            u1, _, u2 = np.linalg.svd(rng.standard_normal((2, 2)))
            a = u1 @ np.diag(0.5 + 1.5 * rng.random(2)) @ u2
            affine = eu.AffineMap(A=a, b=rng.standard_normal(2))
            quad = dv.QuadratureSpec("box", nodes_per_axis=400, box=dv.default_box(p, q))
            assert dv.check_pushforward_invariance(dv.CHI_SQUARED, p, q, affine, quad) <= 1e-5
            # closed-form oracle pins the original-side value as well
            direct = dv.divergence_quadrature(dv.CHI_SQUARED, p, q, quad)
            assert abs(direct - gaussian_chi_squared(m1, s1, m2, s2)) < 1e-6

    def test_total_variation_2d_kink_limited(self):
        # |p - q| has a gradient kink along {p = q}; tensor Gauss-Legendre
        # resolves it only at O(n^-2), so the 2D discrepancy tolerance is
        # correspondingly looser than for smooth generators
        rng = np.random.default_rng(9)
        base = rng.standard_normal((2, 2))
        s1 = base @ base.T + 0.4 * np.eye(2)
        s2 = 0.7 * s1 + 0.3 * np.eye(2)
        p = eu.gaussian_density(np.zeros(2), s1)
        q = eu.gaussian_density(np.array([0.3, -0.2]), s2)
        u1, _, u2 = np.linalg.svd(rng.standard_normal((2, 2)))
        a = u1 @ np.diag(0.5 + 1.5 * rng.random(2)) @ u2
        affine = eu.AffineMap(A=a, b=rng.standard_normal(2))
        quad = dv.QuadratureSpec("box", nodes_per_axis=500, box=dv.default_box(p, q))
        assert dv.check_pushforward_invariance(dv.TOTAL_VARIATION, p, q, affine, quad) <= 5e-4

    def test_singular_map_rejected(self):
        with pytest.raises(InvalidInputError):
            eu.AffineMap(A=np.zeros((2, 2)), b=np.zeros(2))


class TestDensityContract:
    def test_normalization_of_builtin_targets(self):
        for p in (
            eu.gaussian_density([0.3], [[0.7]]),
            eu.canonical_even_target(np.array([1.0, 1.0])),
            eu.canonical_elliptical_target(
                np.array([1.0, 1.0]), np.array([[2.0, 0.8], [0.8, 1.0]])
            ),
        ):
            assert abs(dv.integrate_density(p) - 1.0) <= 1e-6

    def test_bad_support_tag_rejected(self):
        with pytest.raises(InvalidInputError):
            dv.Density(dim=1, log_density=lambda x: x[:, 0], support="weird")

    def test_quadrature_spec_validation(self):
        with pytest.raises(InvalidInputError):
            dv.QuadratureSpec("box", nodes_per_axis=1, box=np.array([[0.0, 1.0]]))
        with pytest.raises(InvalidInputError):
            dv.QuadratureSpec("box", nodes_per_axis=10, box=np.array([[1.0, 1.0]]))
        with pytest.raises(InvalidInputError):
            dv.QuadratureSpec("mesh")
