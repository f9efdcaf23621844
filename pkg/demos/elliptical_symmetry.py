"""Covariance up to scale and exact correlation under elliptical symmetry.

The target pushes a rotationally invariant, heavy-shouldered core through an
affine map with shape matrix M.  A misspecified Gaussian fit recovers the
mean exactly, the covariance only up to a positive multiple of M, and hence
the correlation matrix exactly.  The rotation counterexample at the end
shows why correlation needs this indirect route: equal correlations can be
separated by a single rotation.

Run:  python3 demos/elliptical_symmetry.py
"""

import numpy as np

from symvi import (
    REVERSE_KL,
    AffineMap,
    LocScaleFamily,
    OptConfig,
    canonical_elliptical_target,
    correlation,
    covariance,
    fit_locscale,
    fixed_set_checks,
    gaussian_density,
    member_density,
    pushforward_density,
)
from symvi.euclidean import correlation_from_covariance

m = np.array([1.0, 1.0])
shape = np.array([[2.0, 0.8], [0.8, 1.0]])
target = canonical_elliptical_target(m, shape)
family = LocScaleFamily(base=gaussian_density(np.zeros(2), np.eye(2)), dim=2)

sigma_p = covariance(target)
lam_p, res_p = fixed_set_checks(sigma_p, shape)
print(f"target covariance:\n{sigma_p.round(5)}")
print(f"  = {lam_p:.5f} * M with residual {res_p:.2e}")

fit = fit_locscale(target, family, REVERSE_KL, cfg=OptConfig(n_starts=3, seed=0))
sigma_q = covariance(member_density(family, fit.params))
lam_q, res_q = fixed_set_checks(sigma_q, shape)
print(f"\nfitted covariance:\n{sigma_q.round(5)}")
print(f"  = {lam_q:.5f} * M with residual {res_q:.2e}")
print(f"scales differ ({lam_p:.4f} vs {lam_q:.4f}): only the direction of M is recovered")

corr_gap = np.max(np.abs(correlation(target) - correlation_from_covariance(sigma_q)))
print(f"\ncorrelation matrices agree to {corr_gap:.2e}:")
print(correlation_from_covariance(sigma_q).round(6))

# --- why correlation needs the covariance route -----------------------------
rot = np.array([[1.0, -1.0], [1.0, 1.0]]) / np.sqrt(2.0)
spin = AffineMap(A=rot, b=np.zeros(2))
iso = gaussian_density(np.zeros(2), np.eye(2))
aniso = gaussian_density(np.zeros(2), np.diag([1.0, 3.0]))
print("\nboth Gaussians start with identity correlation; after one rotation:")
print(f"isotropic   -> \n{correlation(pushforward_density(iso, spin)).round(6)}")
print(f"anisotropic -> \n{correlation(pushforward_density(aniso, spin)).round(6)}")
print("equal inputs, different outputs: correlation alone is not symmetry-compatible")
