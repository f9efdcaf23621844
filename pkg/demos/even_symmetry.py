"""Mean recovery under even symmetry, with a misspecified Gaussian fit.

The target is a four-component mixture that is symmetric under point
reflection about m = (1, 1) and clearly not Gaussian.  The fitted Gaussian
cannot match the target, yet its location lands on m for every divergence:
the reflection symmetry pins the mean down.

Run:  python3 demos/even_symmetry.py
"""

import numpy as np

from symvi import (
    GENERATORS,
    LocScaleFamily,
    OptConfig,
    canonical_even_target,
    check_invariance,
    fit_locscale,
    gaussian_density,
    mean,
    reflection_map,
)

m = np.array([1.0, 1.0])
target = canonical_even_target(m)
family = LocScaleFamily(base=gaussian_density(np.zeros(2), np.eye(2)), dim=2)

gap = check_invariance(target, [reflection_map(m)], n_points=50, seed=0)
print(f"reflection-invariance gap of the target: {gap:.2e}  (zero up to float noise)")
print(f"target mean by quadrature: {mean(target).round(8)}")

for name in ("reverse_kl", "forward_kl", "chi_squared"):
    fit = fit_locscale(target, family, GENERATORS[name], cfg=OptConfig(n_starts=3, seed=0))
    err = np.linalg.norm(fit.params.nu - m)
    print(
        f"{name:12s} fit: nu* = {fit.params.nu.round(6)}  |nu* - m| = {err:.2e}  "
        f"objective = {fit.objective:.6f}  start dispersion = {fit.start_dispersion:.2e}"
    )

print("\nthe scale matrix is NOT pinned by the symmetry; each divergence picks its own:")
fit = fit_locscale(target, family, GENERATORS["reverse_kl"], cfg=OptConfig(n_starts=3, seed=0))
print(f"reverse-KL S* =\n{fit.params.S.round(4)}")
