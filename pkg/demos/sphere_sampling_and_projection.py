"""von Mises-Fisher sampling and the Lambert equal-area view of the sphere.

Run:  python3 demos/sphere_sampling_and_projection.py
"""

import numpy as np

from symvi import (
    REVERSE_KL,
    AxialTarget,
    VmfParams,
    axial_density,
    divergence_monte_carlo,
    lambert_project,
    marginal_moments,
    reverse_kl_objective,
    sample_vmf,
    vmf_density,
    vmf_sampler,
)

nu = np.array([0.6, -0.48, 0.64])
nu /= np.linalg.norm(nu)
params = VmfParams(nu=nu, kappa=2.5)

# --- sample moments against quadrature predictions --------------------------
n = 100_000
draws = sample_vmf(params, n, seed=0)
mom = marginal_moments(3, 2.5)
print(f"E[nu . X]   sampled {float(np.mean(draws @ nu)):.5f}   predicted {mom.A:.5f}")
perp = np.array([nu[1], -nu[0], 0.0])
perp /= np.linalg.norm(perp)
print(f"E[(v . X)^2] for v orthogonal to nu: "
      f"sampled {float(np.mean((draws @ perp) ** 2)):.5f}   "
      f"predicted {(1 - mom.m2) / 2:.5f}")

# --- the closed-form objective equals a plain Monte Carlo estimate ----------
target = AxialTarget(u=nu, lam=1.0, eta=1.0)
closed = reverse_kl_objective(nu, target, 2.5)
est, se = divergence_monte_carlo(
    REVERSE_KL, axial_density(target), vmf_density(params), vmf_sampler(params),
    200_000, seed=1,
)
print(f"\nreverse KL at nu = u: closed form {closed:.5f}, Monte Carlo {est:.5f} +- {se:.5f}")

# --- Lambert projection: equal area in practice ------------------------------
rng = np.random.default_rng(2)
uniform = rng.standard_normal((n, 3))
uniform /= np.linalg.norm(uniform, axis=1, keepdims=True)
xy = lambert_project(uniform, nu)
print("\nLambert equal-area check (uniform sphere points):")
for radius in (0.5, 1.0, np.sqrt(2.0)):
    frac = float(np.mean(np.sum(xy**2, axis=1) <= radius**2))
    print(f"  share inside radius {radius:.3f}: {frac:.4f}   (disk area fraction {radius**2 / 4:.4f})")
print("radius sqrt(2) is the equator: half the sphere, half the mass")
