"""Divergence minimization over location-scale and von Mises-Fisher parameters.

Location-scale fits run a quasi-Newton method (L-BFGS-B with central-difference
gradients) on an unconstrained parameterization: the scale matrix goes through
its lower-triangular Cholesky factor with log-transformed diagonal, which is a
bijection onto the positive-definite cone.  Sphere fits use projected gradient
steps: the gradient is taken in ambient coordinates of the normalized
direction, projected to the tangent space, and the iterate is renormalized
after each step; the concentration, when free, moves in log coordinates.

Every fit is a deterministic function of its config: multi-start initial
points come from a seeded generator, Monte Carlo objectives reuse a fixed
seed per evaluation (common random numbers), and the best start wins with
ties broken by start index.  The per-start dispersion of the returned optima
is reported as a cheap diagnostic of minimizer uniqueness -- the recovery
guarantees assume uniqueness, and a large dispersion is the artifact's way
of flagging that the assumption looks violated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .divergence import (
    Density,
    DivergenceGenerator,
    QuadratureSpec,
    box_quadrature,
    divergence_from_logs,
    divergence_monte_carlo,
    divergence_quadrature,
    quadrature_grid,
)
from .errors import InvalidInputError, OptimizationFailedError
from .euclidean import AffineMap, LocScaleFamily, LocScaleParams, member_density, pushforward_params
from .sphere import AxialTarget, VmfParams, axial_density, reverse_kl_objective
from .sphere import marginal_moments, objective_constant, vmf_density, vmf_sampler

Array = np.ndarray

_OBJECTIVE_CAP = 1e12
_MC_SAMPLES = 20000


@dataclass(frozen=True)
class OptConfig:
    """Optimizer settings shared by all fits."""

    method: str = "quasi-newton"  # "quasi-newton" | "direct"
    max_iters: int = 400
    grad_step: float = 1e-5
    tol_obj: float = 1e-12
    tol_param: float = 1e-8
    n_starts: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("quasi-newton", "direct"):
            raise InvalidInputError(f"unknown method {self.method!r}")
        if self.max_iters < 1 or self.n_starts < 1:
            raise InvalidInputError("max_iters and n_starts must be >= 1")
        if min(self.grad_step, self.tol_obj, self.tol_param) <= 0:
            raise InvalidInputError("steps and tolerances must be positive")


@dataclass(frozen=True)
class FitResult:
    """Best-of-starts fit with uniqueness diagnostics.

    ``start_dispersion`` is the largest pairwise distance among the
    per-start optima (Euclidean in nu plus Frobenius in S for
    location-scale fits; Euclidean on (nu, kappa) for sphere fits).
    ``start_params`` holds every start's optimum in the order run, and
    ``objective_trace`` the running best objective over evaluations.
    """

    params: LocScaleParams | VmfParams
    objective: float
    n_evals: int
    start_dispersion: float
    converged: bool
    start_params: tuple = field(default=(), repr=False)
    objective_trace: tuple = field(default=(), repr=False)


class _Counted:
    """Wraps an objective; counts evaluations and records the running best."""

    def __init__(self, fun: Callable[[Array], float]):
        self.fun = fun
        self.n_evals = 0
        self.best_trace: list[float] = []

    def __call__(self, theta: Array) -> float:
        val = self.fun(np.asarray(theta, dtype=float))
        if not np.isfinite(val):
            val = _OBJECTIVE_CAP
        self.n_evals += 1
        best = self.best_trace[-1] if self.best_trace else math.inf
        self.best_trace.append(min(best, val))
        return val


def _central_diff_grad(fun: Callable[[Array], float], theta: Array, rel_step: float) -> Array:
    grad = np.empty_like(theta)
    for i in range(theta.shape[0]):
        h = rel_step * (1.0 + abs(theta[i]))
        up, down = theta.copy(), theta.copy()
        up[i] += h
        down[i] -= h
        grad[i] = (fun(up) - fun(down)) / (2.0 * h)
    return grad


# ---------------------------------------------------------------------------
# Cholesky-with-log-diagonal parameterization of S
# ---------------------------------------------------------------------------

def _pack_scale(s: Array) -> Array:
    chol = np.linalg.cholesky(s)
    d = s.shape[0]
    out = []
    for i in range(d):
        for j in range(i + 1):
            out.append(math.log(chol[i, i]) if i == j else chol[i, j])
    return np.asarray(out)


def _unpack_scale(theta: Array, d: int) -> Array:
    chol = np.zeros((d, d))
    k = 0
    for i in range(d):
        for j in range(i + 1):
            chol[i, j] = math.exp(theta[k]) if i == j else theta[k]
            k += 1
    return chol @ chol.T


def _n_scale_params(d: int) -> int:
    return d * (d + 1) // 2


# ---------------------------------------------------------------------------
# Location-scale fits
# ---------------------------------------------------------------------------

def fit_locscale(
    target: Density,
    fam: LocScaleFamily,
    g: DivergenceGenerator,
    quad: QuadratureSpec | None = None,
    cfg: OptConfig = OptConfig(),
    fix_S: Array | None = None,
) -> FitResult:
    """Minimize D_f(target || Q_{nu,S}) over the location-scale family.

    With ``fix_S`` given only the location is optimized (a location family).
    Returns the best of ``cfg.n_starts`` seeded starts.  Raises
    :class:`OptimizationFailedError` when no start yields a finite objective.
    """
    d = fam.dim
    if target.dim != d:
        raise InvalidInputError("target and family disagree on dimension")
    if quad is None:
        quad = box_quadrature(target)
    if fix_S is not None:
        fix_S = np.asarray(fix_S, dtype=float)

    # the grid and the target's log-densities are fixed across evaluations
    nodes, weights = quadrature_grid(quad, target)
    lp = target.log_density(nodes)

    def unpack(theta: Array) -> LocScaleParams:
        nu = theta[:d]
        s = fix_S if fix_S is not None else _unpack_scale(theta[d:], d)
        return LocScaleParams(nu=nu, S=s)

    def member_logs(theta: Array) -> Array:
        return member_density(fam, unpack(theta)).log_density(nodes)

    def raw_objective(theta: Array) -> float:
        return divergence_from_logs(g, lp, member_logs(theta), weights)

    def member_mass_in_box(theta: Array) -> float:
        lq = member_logs(theta)
        return float(np.sum(weights * np.where(lq > -745.0, np.exp(lq), 0.0)))

    counted = _Counted(raw_objective)
    rng = np.random.default_rng(cfg.seed)

    # starts are drawn from the target's bulk; a member pushed against the
    # truncation box leaks mass and fakes a small divergence, so solutions
    # whose mass is not essentially inside the box are discarded below
    if target.center is None or target.spread is None:
        box = np.asarray(quad.box, dtype=float)
        start_lo, start_hi = box[:, 0], box[:, 1]
    else:
        start_lo = target.center - 2.0 * target.spread
        start_hi = target.center + 2.0 * target.spread

    def draw_start() -> Array:
        nu0 = rng.uniform(start_lo, start_hi)
        if fix_S is not None:
            return nu0
        scale = math.exp(rng.uniform(math.log(0.25), math.log(4.0)))
        s_theta = np.zeros(_n_scale_params(d))
        k = 0
        for i in range(d):
            for j in range(i + 1):
                if i == j:
                    s_theta[k] = 0.5 * math.log(scale)
                k += 1
        return np.concatenate([nu0, s_theta])

    solutions: list[tuple[float, Array, bool]] = []
    for _ in range(cfg.n_starts):
        theta0 = draw_start()
        tries = 0
        while counted(theta0) >= _OBJECTIVE_CAP and tries < 20:
            theta0 = draw_start()
            tries += 1
        if counted(theta0) >= _OBJECTIVE_CAP:
            continue
        if cfg.method == "quasi-newton":
            res = minimize(
                counted,
                theta0,
                method="L-BFGS-B",
                jac=lambda th: _central_diff_grad(counted, th, cfg.grad_step),
                options={
                    "maxiter": cfg.max_iters,
                    "ftol": cfg.tol_obj,
                    "gtol": 1e-10,
                },
            )
        else:
            res = minimize(
                counted,
                theta0,
                method="Nelder-Mead",
                options={
                    "maxiter": cfg.max_iters * 20,
                    "fatol": cfg.tol_obj,
                    "xatol": cfg.tol_param,
                },
            )
        if member_mass_in_box(np.asarray(res.x)) < 0.995:
            continue
        solutions.append((float(res.fun), np.asarray(res.x), bool(res.success)))

    solutions = [s for s in solutions if math.isfinite(s[0]) and s[0] < _OBJECTIVE_CAP]
    if not solutions:
        raise OptimizationFailedError("no start produced a finite objective")

    best_idx = int(np.argmin([s[0] for s in solutions]))
    best_val, best_theta, best_ok = solutions[best_idx]
    params = [unpack(s[1]) for s in solutions]
    dispersion = 0.0
    for i in range(len(params)):
        for j in range(i + 1, len(params)):
            dispersion = max(
                dispersion,
                math.sqrt(
                    float(np.sum((params[i].nu - params[j].nu) ** 2))
                    + float(np.sum((params[i].S - params[j].S) ** 2))
                ),
            )
    return FitResult(
        params=unpack(best_theta),
        objective=best_val,
        n_evals=counted.n_evals,
        start_dispersion=dispersion,
        converged=best_ok,
        start_params=tuple(params),
        objective_trace=tuple(counted.best_trace),
    )


# ---------------------------------------------------------------------------
# Sphere fits
# ---------------------------------------------------------------------------

def _vmf_objective(
    target: AxialTarget,
    g: DivergenceGenerator,
    use_closed_form: bool,
    mc_seed: int,
) -> Callable[[Array, float], float]:
    if use_closed_form:
        if g.name != "reverse_kl":
            raise InvalidInputError("the closed-form objective exists for reverse KL only")

        def closed(nu: Array, kappa: float) -> float:
            mom = marginal_moments(target.dim, kappa)
            c = float(nu @ target.u)
            return (
                target.eta * mom.B * c**2
                - target.lam * mom.A * c
                + objective_constant(target, kappa)
            )

        return closed

    p_density = axial_density(target)

    def monte_carlo(nu: Array, kappa: float) -> float:
        params = VmfParams(nu=nu, kappa=kappa)
        est, _ = divergence_monte_carlo(
            g, p_density, vmf_density(params), vmf_sampler(params), _MC_SAMPLES, mc_seed
        )
        return est

    return monte_carlo


def _project_tangent(v: Array, nu: Array) -> Array:
    return v - (v @ nu) * nu


def fit_vmf(
    target: AxialTarget,
    g: DivergenceGenerator,
    cfg: OptConfig = OptConfig(),
    kappa0: float | None = None,
    use_closed_form: bool = True,
) -> FitResult:
    """Minimize D_f(target || vMF(nu, kappa)) over the sphere (and kappa if free).

    ``kappa0`` fixes the concentration; otherwise kappa is optimized in log
    coordinates.  With ``use_closed_form`` (reverse KL only) the objective is
    the exact scalar reduction; otherwise a seeded Monte Carlo estimate with
    common random numbers across evaluations.
    """
    d = target.dim
    objective = _vmf_objective(target, g, use_closed_form, cfg.seed)
    counted_evals = 0
    best_trace: list[float] = []

    def call(nu: Array, kappa: float) -> float:
        nonlocal counted_evals
        val = objective(nu, kappa)
        if not np.isfinite(val):
            val = _OBJECTIVE_CAP
        counted_evals += 1
        best = best_trace[-1] if best_trace else math.inf
        best_trace.append(min(best, val))
        return val

    rng = np.random.default_rng(cfg.seed)

    def one_start(nu0: Array, log_kappa0: float) -> tuple[float, Array, float, bool]:
        nu, log_kappa = nu0.copy(), log_kappa0
        free_kappa = kappa0 is None
        val = call(nu, math.exp(log_kappa))
        alpha = 1.0
        converged = False
        for _ in range(cfg.max_iters):
            # ambient central differences of the renormalized objective
            grad_nu = np.empty(d)
            for i in range(d):
                h = cfg.grad_step
                up, down = nu.copy(), nu.copy()
                up[i] += h
                down[i] -= h
                up /= np.linalg.norm(up)
                down /= np.linalg.norm(down)
                grad_nu[i] = (call(up, math.exp(log_kappa)) - call(down, math.exp(log_kappa))) / (2 * h)
            grad_nu = _project_tangent(grad_nu, nu)
            grad_k = 0.0
            if free_kappa:
                h = cfg.grad_step * (1.0 + abs(log_kappa))
                grad_k = (call(nu, math.exp(log_kappa + h)) - call(nu, math.exp(log_kappa - h))) / (2 * h)
            gnorm2 = float(grad_nu @ grad_nu) + grad_k**2
            if math.sqrt(gnorm2) < 1e-10:
                converged = True
                break
            # Armijo backtracking with an expanding initial step
            alpha = min(alpha * 4.0, 1e3)
            accepted = False
            for _ in range(60):
                cand_nu = nu - alpha * grad_nu
                cand_nu /= np.linalg.norm(cand_nu)
                cand_k = log_kappa - alpha * grad_k
                cand_val = call(cand_nu, math.exp(cand_k))
                if cand_val <= val - 1e-4 * alpha * gnorm2:
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                converged = True
                break
            step = float(np.linalg.norm(cand_nu - nu)) + abs(cand_k - log_kappa)
            drop = val - cand_val
            nu, log_kappa, val = cand_nu, cand_k, cand_val
            if drop < cfg.tol_obj and step < cfg.tol_param:
                converged = True
                break
        return val, nu, math.exp(log_kappa), converged

    solutions = []
    for _ in range(cfg.n_starts):
        z = rng.standard_normal(d)
        nu0 = z / np.linalg.norm(z)
        lk0 = math.log(kappa0) if kappa0 is not None else rng.uniform(math.log(0.5), math.log(8.0))
        solutions.append(one_start(nu0, lk0))

    finite = [s for s in solutions if math.isfinite(s[0]) and s[0] < _OBJECTIVE_CAP]
    if not finite:
        raise OptimizationFailedError("no start produced a finite objective")
    best_idx = int(np.argmin([s[0] for s in finite]))
    best_val, best_nu, best_kappa, best_ok = finite[best_idx]

    dispersion = 0.0
    for i in range(len(finite)):
        for j in range(i + 1, len(finite)):
            dist = math.sqrt(
                float(np.sum((finite[i][1] - finite[j][1]) ** 2))
                + (finite[i][2] - finite[j][2]) ** 2
            )
            dispersion = max(dispersion, dist)

    return FitResult(
        params=VmfParams(nu=best_nu, kappa=best_kappa),
        objective=best_val,
        n_evals=counted_evals,
        start_dispersion=dispersion,
        converged=best_ok,
        start_params=tuple(VmfParams(nu=s[1], kappa=s[2]) for s in finite),
        objective_trace=tuple(best_trace),
    )


# ---------------------------------------------------------------------------
# Orbit constancy diagnostic
# ---------------------------------------------------------------------------

def orbit_objective_check(
    target: Density,
    fam: LocScaleFamily,
    g: DivergenceGenerator,
    params: LocScaleParams,
    maps: Sequence[AffineMap],
    quad: QuadratureSpec | None = None,
) -> float:
    """Largest objective gap along the orbit of ``params`` under ``maps``.

    For a target invariant under every map, D_f(target || Q_params) equals
    D_f(target || Q_{pushforward params}), so the gap is quadrature noise.
    """
    if quad is None:
        quad = box_quadrature(target)
    base = divergence_quadrature(g, target, member_density(fam, params), quad)
    worst = 0.0
    for t in maps:
        moved = pushforward_params(params, t)
        val = divergence_quadrature(g, target, member_density(fam, moved), quad)
        worst = max(worst, abs(val - base))
    return worst
