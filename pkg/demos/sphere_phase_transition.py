"""Axis recovery on the sphere and its phase transition.

A rotationally symmetric target with profile exp(lambda*t - eta*t^2) is fit
by a fixed-concentration von Mises-Fisher family under reverse KL.  The
objective reduces to a quadratic in the latitude c = u . nu, so everything
has a closed form: below the critical eta the unique minimizer sits on the
symmetry axis, above it the minimizers fill a latitude circle and the axis
is lost.

Run:  python3 demos/sphere_phase_transition.py
"""

import numpy as np

from symvi import (
    REVERSE_KL,
    AxialTarget,
    Line,
    OptConfig,
    axis_statistic,
    eta_critical,
    fit_vmf,
    marginal_moments,
    predicted_minimizer_c,
)

d, lam, kappa0 = 3, 1.0, 2.5
u = np.array([0.3, -0.4, 0.866025403784438647])
u /= np.linalg.norm(u)

mom = marginal_moments(d, kappa0)
eta_c = eta_critical(d, lam, kappa0)
print(f"marginal moments at (d={d}, kappa0={kappa0}): A = {mom.A:.4f}, "
      f"m2 = {mom.m2:.4f}, B = {mom.B:.4f}")
print(f"critical threshold eta_c = {eta_c:.4f}\n")

print(f"{'eta':>8s} {'c predicted':>12s} {'c fitted':>12s} {'axis recovered':>15s}")
for eta in (0.4, 0.8, 1.0, 1.15, 1.2, 1.6, 2.0, 3.0):
    target = AxialTarget(u=u, lam=lam, eta=eta)
    fit = fit_vmf(target, REVERSE_KL, OptConfig(n_starts=3, seed=0), kappa0=kappa0)
    c_pred = predicted_minimizer_c(d, lam, eta, kappa0)
    c_fit = float(fit.params.nu @ u)
    recovered = axis_statistic(fit.params).same_line(Line(u), tol=1e-6)
    print(f"{eta:8.2f} {c_pred:12.6f} {c_fit:12.6f} {str(recovered):>15s}")

print("\nabove the threshold the minimizer set is a circle; multi-start shows it:")
fit = fit_vmf(
    AxialTarget(u=u, lam=lam, eta=2.0), REVERSE_KL,
    OptConfig(n_starts=8, seed=1), kappa0=kappa0,
)
lats = [float(p.nu @ u) for p in fit.start_params]
print(f"per-start latitudes u . nu*: {np.round(lats, 6)}  (all equal)")
print(f"per-start direction dispersion: {fit.start_dispersion:.3f}  (spread around the circle)")
