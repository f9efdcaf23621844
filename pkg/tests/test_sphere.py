"""Tests for the vMF family, axial targets, moments, and the phase transition.

The d = 3 closed forms act as oracles for the quadrature-based moments:

  A(kappa)  = coth(kappa) - 1/kappa
  m2(kappa) = 1 - (2/kappa) coth(kappa) + 2/kappa^2
  B(kappa)  = 1 - (3/kappa) coth(kappa) + 3/kappa^2
  vMF normalizer: c_3(kappa) = kappa / sinh(kappa)  (density w.r.t. the
  uniform probability measure).
"""

import math

import numpy as np
import pytest

from symvi import divergence as dv
from symvi import sphere as sp
from symvi.errors import InvalidInputError, ProjectionUndefinedError

U_AXIS = np.array([0.3, -0.4, 0.866025403784438646763723170753])
U_AXIS = U_AXIS / np.linalg.norm(U_AXIS)
EZ = np.array([0.0, 0.0, 1.0])


def coth(x):
    return math.cosh(x) / math.sinh(x)


class TestTypes:
    def test_vmf_requires_unit_direction(self):
        with pytest.raises(InvalidInputError):
            sp.VmfParams(nu=np.array([1.0, 1.0, 0.0]), kappa=1.0)

    def test_vmf_requires_positive_kappa(self):
        with pytest.raises(InvalidInputError):
            sp.VmfParams(nu=EZ, kappa=0.0)

    def test_axial_target_validation(self):
        with pytest.raises(InvalidInputError):
            sp.AxialTarget(u=EZ, lam=0.0, eta=1.0)
        with pytest.raises(InvalidInputError):
            sp.AxialTarget(u=EZ, lam=1.0, eta=-1.0)
        with pytest.raises(InvalidInputError):
            sp.AxialTarget(u=np.array([1.0, 0.0]), lam=1.0, eta=1.0)

    def test_line_sign_canonicalization(self):
        v = np.array([-0.3, 0.4, -0.5])
        assert sp.Line(v) == sp.Line(-v)
        assert sp.Line(v).direction[0] > 0

    def test_line_distance_sign_invariant(self):
        a, b = sp.Line(EZ), sp.Line(np.array([1e-4, 0.0, -1.0]))
        assert a.distance(b) < 2e-4
        assert a.same_line(b, tol=1e-3)


class TestDensities:
    def test_vmf_log_density_closed_form_at_mean(self):
        # paper-level oracle: the marginal normalizer Z(kappa) = 2 sinh(k)/k
        # and rho-mass 2 give c_3(kappa) = kappa/sinh(kappa) for the density
        # w.r.t. the uniform probability measure
        k = 2.5
        val = sp.vmf_log_density(sp.VmfParams(nu=EZ, kappa=k), EZ)
        assert abs(val - (math.log(k / math.sinh(k)) + k)) < 1e-12

    def test_vmf_normalizes_against_sigma(self):
        p = sp.vmf_density(sp.VmfParams(nu=U_AXIS, kappa=2.5))
        assert abs(dv.integrate_density(p) - 1.0) <= 1e-8

    def test_vmf_near_uniform_limit(self):
        params = sp.VmfParams(nu=EZ, kappa=1e-9)
        x = sp.uniform_sphere(3, 10, np.random.default_rng(0))
        np.testing.assert_allclose(sp.vmf_log_density(params, x), 0.0, atol=1e-8)

    def test_vmf_rotation_equivariance(self):
        rng = np.random.default_rng(1)
        from symvi.euclidean import random_rotation

        rot = random_rotation(3, rng)
        x = sp.uniform_sphere(3, 25, rng)
        lhs = sp.vmf_log_density(sp.VmfParams(nu=rot @ EZ, kappa=3.0), x @ rot.T)
        rhs = sp.vmf_log_density(sp.VmfParams(nu=EZ, kappa=3.0), x)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_axial_normalizes_against_sigma(self):
        p = sp.axial_density(sp.AxialTarget(u=U_AXIS, lam=1.0, eta=1.0))
        assert abs(dv.integrate_density(p) - 1.0) <= 1e-8

    def test_axial_density_ratio_small_eta(self):
        target = sp.AxialTarget(u=EZ, lam=0.7, eta=1e-12)
        ratio = sp.axial_log_density(target, EZ) - sp.axial_log_density(target, -EZ)
        assert abs(ratio - 2 * 0.7) < 1e-6

    def test_axial_rotational_symmetry_exact(self):
        target = sp.AxialTarget(u=EZ, lam=1.0, eta=2.0)
        t = 0.35
        s = math.sqrt(1 - t**2)
        x1 = np.array([s, 0.0, t])
        x2 = np.array([0.0, -s, t])
        assert sp.axial_log_density(target, x1) == sp.axial_log_density(target, x2)

    def test_off_sphere_point_rejected(self):
        with pytest.raises(InvalidInputError):
            sp.vmf_log_density(sp.VmfParams(nu=EZ, kappa=1.0), np.array([0.0, 0.0, 1.5]))


class TestMoments:
    def test_reported_constants_at_2p5(self):
        mom = sp.marginal_moments(3, 2.5)
        assert abs(mom.A - 0.6135) < 5e-4
        assert abs(mom.B - 0.2637) < 5e-4

    @pytest.mark.parametrize("kappa", [0.3, 0.8, 1.5, 2.5, 4.0, 6.0, 10.0])
    def test_d3_closed_forms(self, kappa):
        mom = sp.marginal_moments(3, kappa)
        assert abs(mom.A - (coth(kappa) - 1 / kappa)) < 1e-10
        assert abs(mom.m2 - (1 - 2 / kappa * coth(kappa) + 2 / kappa**2)) < 1e-10
        assert abs(mom.B - (1 - 3 / kappa * coth(kappa) + 3 / kappa**2)) < 1e-10

    @pytest.mark.parametrize("d", [3, 4, 5, 8])
    @pytest.mark.parametrize("kappa", [0.1, 1.0, 2.5, 10.0])
    def test_moment_bounds_grid(self, d, kappa):
        mom = sp.marginal_moments(d, kappa)
        assert 0.0 < mom.A < 1.0
        assert 1.0 / d < mom.m2 < 1.0
        assert mom.B > 0.0

    def test_low_dimension_rejected(self):
        with pytest.raises(InvalidInputError):
            sp.marginal_moments(2, 1.0)


class TestObjective:
    def test_reduction_depends_only_on_latitude(self):
        target = sp.AxialTarget(u=EZ, lam=1.0, eta=1.5)
        c = 0.4
        s = math.sqrt(1 - c**2)
        nu1 = np.array([s, 0.0, c])
        nu2 = np.array([-s / math.sqrt(2), s / math.sqrt(2), c])
        v1 = sp.reverse_kl_objective(nu1, target, 2.5)
        v2 = sp.reverse_kl_objective(nu2, target, 2.5)
        assert abs(v1 - v2) < 1e-12

    def test_pole_difference_equals_reduced_coefficients(self):
        target = sp.AxialTarget(u=EZ, lam=1.3, eta=0.8)
        mom = sp.marginal_moments(3, 2.5)
        diff = sp.reverse_kl_objective(EZ, target, 2.5) - sp.reverse_kl_objective(
            np.array([1.0, 0.0, 0.0]), target, 2.5
        )
        assert abs(diff - (0.8 * mom.B - 1.3 * mom.A)) < 1e-12

    def test_matches_sphere_quadrature(self):
        target = sp.AxialTarget(u=U_AXIS, lam=1.0, eta=1.0)
        nu = np.array([math.sin(0.6), 0.0, math.cos(0.6)])
        closed = sp.reverse_kl_objective(nu, target, 2.5)
        quad_val = dv.divergence_quadrature(
            dv.REVERSE_KL,
            sp.axial_density(target),
            sp.vmf_density(sp.VmfParams(nu=nu, kappa=2.5)),
            dv.sphere_quadrature(),
        )
        assert abs(closed - quad_val) < 1e-8

    def test_matches_monte_carlo(self):
        target = sp.AxialTarget(u=U_AXIS, lam=1.0, eta=1.0)
        params = sp.VmfParams(nu=U_AXIS, kappa=2.5)
        est, se = dv.divergence_monte_carlo(
            dv.REVERSE_KL,
            sp.axial_density(target),
            sp.vmf_density(params),
            sp.vmf_sampler(params),
            200_000,
            seed=21,
        )
        closed = sp.reverse_kl_objective(U_AXIS, target, 2.5)
        assert abs(est - closed) <= 3.0 * se

    def test_well_specified_objective_is_zero(self):
        # eta -> 0 with lam = kappa0 makes the target the vMF member itself
        target = sp.AxialTarget(u=EZ, lam=2.5, eta=1e-13)
        assert abs(sp.reverse_kl_objective(EZ, target, 2.5)) < 1e-10


class TestThreshold:
    def test_reported_critical_value(self):
        assert abs(sp.eta_critical(3, 1.0, 2.5) - 1.1632) < 1e-3

    def test_linear_in_lambda_magnitude(self):
        base = sp.eta_critical(3, 1.0, 2.5)
        assert sp.eta_critical(3, 2.0, 2.5) == pytest.approx(2 * base, rel=1e-14)
        assert sp.eta_critical(3, -1.0, 2.5) == pytest.approx(base, rel=1e-14)

    @pytest.mark.parametrize("kappa", [0.5, 1.0, 2.5, 5.0])
    def test_d3_closed_form(self, kappa):
        closed = (
            kappa * (kappa * coth(kappa) - 1)
            / (2 * (kappa**2 - 3 * kappa * coth(kappa) + 3))
        )
        assert abs(sp.eta_critical(3, 1.0, kappa) - closed) < 1e-9

    def test_zero_lambda_rejected(self):
        with pytest.raises(InvalidInputError):
            sp.eta_critical(3, 0.0, 2.5)

    def test_predicted_minimizer_values(self):
        assert abs(sp.predicted_minimizer_c(3, 1.0, 2.0, 2.5) - 0.5816) < 1e-3
        assert sp.predicted_minimizer_c(3, 1.0, 1.0, 2.5) == 1.0
        assert sp.predicted_minimizer_c(3, -1.0, 0.5, 2.5) == -1.0

    def test_clipping_happens_exactly_at_threshold(self):
        eta_c = sp.eta_critical(3, 1.0, 2.5)
        assert sp.predicted_minimizer_c(3, 1.0, eta_c * 0.999, 2.5) == 1.0
        assert sp.predicted_minimizer_c(3, 1.0, eta_c * 1.001, 2.5) < 1.0


class TestAxisStatistic:
    def test_sign_invariance_across_members(self):
        l1 = sp.axis_statistic(sp.VmfParams(nu=U_AXIS, kappa=1.0))
        l2 = sp.axis_statistic(sp.VmfParams(nu=-U_AXIS, kappa=4.0))
        assert l1 == l2

    def test_axial_target_axis(self):
        assert sp.axis_statistic(sp.AxialTarget(u=U_AXIS, lam=1.0, eta=1.0)) == sp.Line(U_AXIS)

    def test_rotation_equivariance(self):
        from symvi.euclidean import random_rotation

        rot = random_rotation(3, np.random.default_rng(2))
        line = sp.axis_statistic(sp.VmfParams(nu=rot @ U_AXIS, kappa=1.0))
        assert line.same_line(sp.Line(rot @ U_AXIS), tol=1e-12)


class TestSampler:
    def test_unit_norm_and_determinism(self):
        params = sp.VmfParams(nu=U_AXIS, kappa=2.5)
        x1 = sp.sample_vmf(params, 500, seed=3)
        x2 = sp.sample_vmf(params, 500, seed=3)
        np.testing.assert_array_equal(x1, x2)
        np.testing.assert_allclose(np.linalg.norm(x1, axis=1), 1.0, atol=1e-12)

    def test_axis_moment(self):
        n = 100_000
        params = sp.VmfParams(nu=U_AXIS, kappa=2.5)
        x = sp.sample_vmf(params, n, seed=4)
        mom = sp.marginal_moments(3, 2.5)
        assert abs(float(np.mean(x @ U_AXIS)) - mom.A) < 4.0 / math.sqrt(n)

    def test_perpendicular_second_moment(self):
        n = 100_000
        params = sp.VmfParams(nu=U_AXIS, kappa=2.5)
        x = sp.sample_vmf(params, n, seed=5)
        perp = np.array([U_AXIS[1], -U_AXIS[0], 0.0])
        perp /= np.linalg.norm(perp)
        mom = sp.marginal_moments(3, 2.5)
        pred = (1 - mom.m2) / 2
        assert abs(float(np.mean((x @ perp) ** 2)) - pred) < 4.0 / math.sqrt(n)

    def test_uniform_limit(self):
        n = 100_000
        x = sp.sample_vmf(sp.VmfParams(nu=U_AXIS, kappa=1e-6), n, seed=6)
        assert abs(float(np.mean((x @ U_AXIS) ** 2)) - 1.0 / 3.0) < 4.0 / math.sqrt(n)

    @pytest.mark.parametrize("d,kappa", [(4, 0.5), (5, 8.0), (8, 30.0)])
    def test_higher_dimensions(self, d, kappa):
        nu = np.zeros(d)
        nu[0] = 1.0
        n = 40_000
        x = sp.sample_vmf(sp.VmfParams(nu=nu, kappa=kappa), n, seed=7)
        mom = sp.marginal_moments(d, kappa)
        assert abs(float(np.mean(x @ nu)) - mom.A) < 4.0 / math.sqrt(n)


class TestLambert:
    def test_center_maps_to_origin(self):
        np.testing.assert_allclose(sp.lambert_project(U_AXIS, U_AXIS), np.zeros(2), atol=1e-14)

    def test_orthogonal_point_radius(self):
        perp = np.array([U_AXIS[1], -U_AXIS[0], 0.0])
        perp /= np.linalg.norm(perp)
        radius = np.linalg.norm(sp.lambert_project(perp, U_AXIS))
        assert abs(radius - math.sqrt(2.0)) < 1e-12

    def test_antipode_rejected(self):
        with pytest.raises(ProjectionUndefinedError):
            sp.lambert_project(-U_AXIS, U_AXIS)

    def test_area_preservation_monte_carlo(self):
        rng = np.random.default_rng(8)
        x = sp.uniform_sphere(3, 100_000, rng)
        xy = sp.lambert_project(x, U_AXIS)
        for radius in (0.5, 0.9, 1.4):
            frac = float(np.mean(np.sum(xy**2, axis=1) <= radius**2))
            assert abs(frac - radius**2 / 4.0) < 0.01

    def test_inverse_roundtrip(self):
        rng = np.random.default_rng(9)
        x = sp.uniform_sphere(3, 200, rng)
        xy = sp.lambert_project(x, U_AXIS)
        np.testing.assert_allclose(sp.lambert_inverse(xy, U_AXIS), x, atol=1e-12)

    def test_latitude_circle_radius(self):
        c = 0.5816
        point = c * U_AXIS + math.sqrt(1 - c**2) * sp.tangent_basis(U_AXIS)[0]
        radius = np.linalg.norm(sp.lambert_project(point, U_AXIS))
        assert abs(radius - math.sqrt(2 * (1 - c))) < 1e-12
