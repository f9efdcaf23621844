"""von Mises-Fisher family, rotationally symmetric targets, and axis recovery.

Distributions on the unit sphere S^{d-1} (d >= 3) are handled through their
densities with respect to the uniform probability measure sigma.  A
rotationally symmetric density depends on x only through t = w^T x for an
axis direction w; under sigma, t has density proportional to
rho_d(t) = (1 - t^2)^{(d-3)/2} on [-1, 1], so every normalizer and moment
here reduces to a one-dimensional integral against rho_d.  Those integrals
are evaluated by Gauss-Legendre quadrature with the rho_d weight folded into
the integrand, which keeps a single code path for all d >= 3 and avoids
Bessel functions entirely; the d = 3 case has closed forms used as oracles
in the tests.

The reverse KL divergence from a fixed-concentration vMF member to the
quadratic-profile axial target exp(lambda*t - eta*t^2)/Z reduces to a scalar
quadratic in c = u^T nu,

    eta * B * c^2 - lambda * A * c + const,

with A = E[T], m2 = E[T^2], B = (d*m2 - 1)/(d - 1) computed under the vMF
marginal.  Minimizing over c in [-1, 1] exhibits a phase transition at
eta_c = |lambda| * A / (2 B): below it the unique minimizer recovers the
symmetry axis, above it the minimizers fill a latitude circle u^T nu = c*.

Axis values are lines through the origin (sign-invariant directions),
represented by :class:`Line` with a canonical sign choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .divergence import Density
from .errors import InvalidInputError, ProjectionUndefinedError

Array = np.ndarray

_MARGINAL_NODES = 500


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

def _unit(v: Array, what: str, tol: float = 1e-12) -> Array:
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > tol:
        raise InvalidInputError(f"{what} must be a unit vector, |v| = {norm}")
    return v / norm


@dataclass(frozen=True)
class VmfParams:
    """Mean direction nu on S^{d-1} and concentration kappa > 0."""

    nu: Array
    kappa: float

    def __post_init__(self):
        object.__setattr__(self, "nu", _unit(self.nu, "mean direction nu"))
        if not self.kappa > 0.0:
            raise InvalidInputError(f"kappa must be positive, got {self.kappa}")

    @property
    def dim(self) -> int:
        return self.nu.shape[0]


@dataclass(frozen=True)
class AxialTarget:
    """Rotationally symmetric target with profile exp(lam*t - eta*t^2)/Z.

    ``u`` is the symmetry axis direction, ``lam`` the (nonzero) linear
    coefficient, ``eta`` the (positive) quadratic coefficient.
    """

    u: Array
    lam: float
    eta: float

    def __post_init__(self):
        object.__setattr__(self, "u", _unit(self.u, "axis direction u"))
        if self.u.shape[0] < 3:
            raise InvalidInputError("axial targets need dim >= 3")
        if self.lam == 0.0:
            raise InvalidInputError("lam must be nonzero")
        if not self.eta > 0.0:
            raise InvalidInputError(f"eta must be positive, got {self.eta}")

    @property
    def dim(self) -> int:
        return self.u.shape[0]


@dataclass(frozen=True)
class SphereMoments:
    """Marginal moments of t = nu^T X under a vMF law: A = E[T], m2 = E[T^2],
    and the derived coefficient B = (d*m2 - 1)/(d - 1)."""

    A: float
    m2: float
    B: float


@dataclass(frozen=True)
class Line:
    """A line through the origin (element of RP^{d-1}), sign-canonicalized.

    The representative direction has its first coordinate of magnitude above
    1e-9 made positive, so Line(v) and Line(-v) coincide.
    """

    direction: tuple[float, ...]

    def __init__(self, direction: Array):
        v = np.asarray(direction, dtype=float)
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise InvalidInputError("a line needs a nonzero direction")
        v = v / norm
        for coord in v:
            if abs(coord) > 1e-9:
                if coord < 0:
                    v = -v
                break
        object.__setattr__(self, "direction", tuple(float(c) for c in v))

    def as_array(self) -> Array:
        return np.asarray(self.direction)

    def distance(self, other: "Line") -> float:
        """Chordal distance between lines, min over representative signs."""
        a, b = self.as_array(), other.as_array()
        return float(min(np.linalg.norm(a - b), np.linalg.norm(a + b)))

    def same_line(self, other: "Line", tol: float = 1e-6) -> bool:
        return self.distance(other) <= tol


# ---------------------------------------------------------------------------
# Marginal quadrature with the rho_d weight
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _gl_unit(n: int) -> tuple[Array, Array]:
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _log_rho(t: Array, d: int) -> Array:
    if d == 3:
        return np.zeros_like(t)
    return 0.5 * (d - 3) * np.log1p(-t**2)


def log_rho_mass(d: int) -> float:
    """log of R_d = integral of rho_d over [-1, 1] (closed Beta form)."""
    return (
        0.5 * math.log(math.pi)
        + math.lgamma(0.5 * (d - 1))
        - math.lgamma(0.5 * d)
    )


def _log_weighted_integral(log_profile: Callable[[Array], Array], d: int) -> float:
    """log of integral over [-1, 1] of exp(log_profile(t)) * rho_d(t) dt."""
    t, w = _gl_unit(_MARGINAL_NODES)
    logs = log_profile(t) + _log_rho(t, d)
    m = float(np.max(logs))
    return m + math.log(float(np.sum(w * np.exp(logs - m))))


@lru_cache(maxsize=512)
def _moments(d: int, kappa0: float) -> tuple[float, float, float]:
    t, w = _gl_unit(_MARGINAL_NODES)
    # factor out exp(kappa0) so the weights stay in range for large kappa0
    vals = w * np.exp(kappa0 * (t - 1.0) + _log_rho(t, d))
    z = float(np.sum(vals))
    a = float(np.sum(vals * t) / z)
    m2 = float(np.sum(vals * t**2) / z)
    return a, m2, (d * m2 - 1.0) / (d - 1.0)


def marginal_moments(d: int, kappa0: float) -> SphereMoments:
    """A = E[T], m2 = E[T^2], B = (d*m2 - 1)/(d-1) for T = nu^T X, X ~ vMF(nu, kappa0).

    The marginal density of T is proportional to exp(kappa0*t) * rho_d(t).
    """
    if d < 3:
        raise InvalidInputError(f"need d >= 3, got {d}")
    if not kappa0 > 0.0:
        raise InvalidInputError(f"kappa0 must be positive, got {kappa0}")
    a, m2, b = _moments(int(d), float(kappa0))
    return SphereMoments(A=a, m2=m2, B=b)


@lru_cache(maxsize=512)
def _log_vmf_normalizer(d: int, kappa: float) -> float:
    """log c_d(kappa) such that c_d(kappa) * exp(kappa nu.x) integrates to 1 over sigma."""
    log_z = kappa + _log_weighted_integral(lambda t: kappa * (t - 1.0), d)
    return log_rho_mass(d) - log_z


@lru_cache(maxsize=512)
def _log_axial_normalizer(d: int, lam: float, eta: float) -> float:
    """log Z with Z = integral of exp(lam*t - eta*t^2) against the normalized rho_d weight."""
    return _log_weighted_integral(lambda t: lam * t - eta * t**2, d) - log_rho_mass(d)


# ---------------------------------------------------------------------------
# Log densities (with respect to the uniform probability measure)
# ---------------------------------------------------------------------------

def _check_on_sphere(x: Array, tol: float = 1e-9) -> Array:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    norms = np.linalg.norm(pts, axis=1)
    if np.any(np.abs(norms - 1.0) > tol):
        raise InvalidInputError("points must lie on the unit sphere")
    return pts, single


def vmf_log_density(params: VmfParams, x: Array) -> Array | float:
    """log c_d(kappa) + kappa * nu^T x; integrates to 1 against sigma."""
    pts, single = _check_on_sphere(x)
    vals = _log_vmf_normalizer(params.dim, float(params.kappa)) + params.kappa * (
        pts @ params.nu
    )
    return float(vals[0]) if single else vals


def axial_log_density(target: AxialTarget, x: Array) -> Array | float:
    """lam*(u^T x) - eta*(u^T x)^2 - log Z; integrates to 1 against sigma."""
    pts, single = _check_on_sphere(x)
    t = pts @ target.u
    vals = (
        target.lam * t
        - target.eta * t**2
        - _log_axial_normalizer(target.dim, float(target.lam), float(target.eta))
    )
    return float(vals[0]) if single else vals


def vmf_density(params: VmfParams) -> Density:
    """vMF law wrapped as a :class:`Density` on the sphere."""
    return Density(
        dim=params.dim,
        log_density=lambda x: vmf_log_density(params, x),
        support="sphere",
        reference_measure="sphere_uniform",
        center=params.nu,
        spread=np.ones(params.dim),
    )


def axial_density(target: AxialTarget) -> Density:
    return Density(
        dim=target.dim,
        log_density=lambda x: axial_log_density(target, x),
        support="sphere",
        reference_measure="sphere_uniform",
        center=target.u,
        spread=np.ones(target.dim),
    )


# ---------------------------------------------------------------------------
# Reduced reverse KL objective and the phase transition
# ---------------------------------------------------------------------------

def objective_constant(target: AxialTarget, kappa0: float) -> float:
    """The nu-independent constant of the reverse KL objective."""
    d = target.dim
    mom = marginal_moments(d, kappa0)
    return (
        _log_vmf_normalizer(d, float(kappa0))
        + _log_axial_normalizer(d, float(target.lam), float(target.eta))
        + kappa0 * mom.A
        + target.eta * (1.0 - mom.m2) / (d - 1.0)
    )


def reverse_kl_objective(nu: Array, target: AxialTarget, kappa0: float) -> float:
    """KL(vMF(nu, kappa0) || target), exactly, through the scalar reduction.

    Equals eta*B*c^2 - lambda*A*c + const with c = u^T nu; the constant is
    included, so the value matches the divergence computed by quadrature or
    Monte Carlo.
    """
    nu = _unit(nu, "nu", tol=1e-9)
    if nu.shape[0] != target.dim:
        raise InvalidInputError("nu and target disagree on dimension")
    mom = marginal_moments(target.dim, kappa0)
    c = float(nu @ target.u)
    return (
        target.eta * mom.B * c**2
        - target.lam * mom.A * c
        + objective_constant(target, kappa0)
    )


def reduced_objective(c: Array, target: AxialTarget, kappa0: float) -> Array:
    """The scalar quadratic eta*B*c^2 - lambda*A*c (constant omitted)."""
    mom = marginal_moments(target.dim, kappa0)
    c = np.asarray(c, dtype=float)
    return target.eta * mom.B * c**2 - target.lam * mom.A * c


def eta_critical(d: int, lam: float, kappa0: float) -> float:
    """Critical quadratic strength |lam| * A / (2 B) of the phase transition."""
    if lam == 0.0:
        raise InvalidInputError("lam must be nonzero")
    mom = marginal_moments(d, kappa0)
    return abs(lam) * mom.A / (2.0 * mom.B)


def predicted_minimizer_c(d: int, lam: float, eta: float, kappa0: float) -> float:
    """Minimizing latitude c* = clamp(lam*A / (2*eta*B), -1, 1).

    For eta <= eta_c this clips to sign(lam) (axis recovery); above the
    threshold it is interior and the minimizers form a latitude circle.
    """
    if lam == 0.0:
        raise InvalidInputError("lam must be nonzero")
    if not eta > 0.0:
        raise InvalidInputError(f"eta must be positive, got {eta}")
    mom = marginal_moments(d, kappa0)
    return float(np.clip(lam * mom.A / (2.0 * eta * mom.B), -1.0, 1.0))


def axis_statistic(params: VmfParams | AxialTarget) -> Line:
    """The symmetry axis as a line (sign-invariant): span(nu) or span(u)."""
    if isinstance(params, VmfParams):
        return Line(params.nu)
    if isinstance(params, AxialTarget):
        return Line(params.u)
    raise InvalidInputError(f"no axis statistic for {type(params).__name__}")


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def _marginal_log_profile(d: int, kappa: float):
    def log_f(t):
        return kappa * np.asarray(t, dtype=float) + _log_rho(np.asarray(t, dtype=float), d)

    def dlog_f(t):
        t = np.asarray(t, dtype=float)
        if d == 3:
            return np.full_like(t, kappa)
        return kappa - (d - 3) * t / (1.0 - t**2)

    return log_f, dlog_f


def _tangent_envelope(d: int, kappa: float, n_knots: int = 15):
    """Piecewise-exponential upper envelope of the marginal density.

    The marginal log-density kappa*t + (d-3)/2 * log(1-t^2) is concave, so
    tangent lines at a set of knots upper-bound it; their lower hull is a
    piecewise-linear function whose exponential we can integrate and sample
    segment by segment.  Returns segment edges, slopes, intercepts, and
    (unnormalized) segment masses.
    """
    log_f, dlog_f = _marginal_log_profile(d, kappa)
    knots = np.cos(np.pi * (np.arange(n_knots) + 0.5) / n_knots)[::-1]
    knots = np.clip(knots, -1.0 + 1e-6, 1.0 - 1e-6)
    slopes = dlog_f(knots)
    intercepts = log_f(knots) - slopes * knots

    # drop knots whose tangents are (numerically) identical; slopes decrease
    keep = [0]
    for i in range(1, n_knots):
        if slopes[keep[-1]] - slopes[i] > 1e-12:
            keep.append(i)
    slopes = slopes[keep]
    intercepts = intercepts[keep]
    k = len(keep)

    if k == 1:
        edges = np.array([-1.0, 1.0])
    else:
        cross = (intercepts[1:] - intercepts[:-1]) / (slopes[:-1] - slopes[1:])
        edges = np.concatenate([[-1.0], cross, [1.0]])

    # the piecewise-linear envelope attains its maximum at a segment edge;
    # shift by that worst value so the segment masses stay in exp range
    seg_top = np.maximum(
        intercepts + slopes * edges[:-1], intercepts + slopes * edges[1:]
    )
    shift = float(np.max(seg_top))
    masses = np.empty(k)
    for i in range(k):
        a, b = intercepts[i] - shift, slopes[i]
        lo, hi = edges[i], edges[i + 1]
        if abs(b) < 1e-12:
            masses[i] = math.exp(a) * (hi - lo)
        else:
            # exp(a) * (exp(b*hi) - exp(b*lo)) / b, computed stably
            m = max(b * hi, b * lo)
            masses[i] = math.exp(a + m) * abs(-math.expm1(-abs(b * (hi - lo)))) / abs(b)
    return edges, slopes, intercepts, masses, shift, log_f


def _sample_marginal(d: int, kappa: float, n: int, rng: np.random.Generator) -> Array:
    edges, slopes, intercepts, masses, shift, log_f = _tangent_envelope(d, kappa)
    probs = masses / masses.sum()
    out = np.empty(n)
    filled = 0
    while filled < n:
        batch = max(2 * (n - filled), 64)
        seg = rng.choice(len(probs), size=batch, p=probs)
        u = rng.random(batch)
        lo, hi = edges[seg], edges[seg + 1]
        b = slopes[seg]
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            # inverse CDF of exp(b t) restricted to [lo, hi]
            span = np.expm1(b * (hi - lo))
            t = np.where(
                np.abs(b) < 1e-12,
                lo + u * (hi - lo),
                lo + np.log1p(u * span) / b,
            )
        t = np.clip(t, -1.0, 1.0)
        log_env = intercepts[seg] + slopes[seg] * t
        accept = np.log(rng.random(batch)) <= log_f(t) - log_env
        take = t[accept][: n - filled]
        out[filled : filled + take.shape[0]] = take
        filled += take.shape[0]
    return out


def sample_vmf(params: VmfParams, n: int, seed: int) -> Array:
    """n i.i.d. vMF draws, deterministic given the seed.

    The polar marginal t = nu^T X is drawn by rejection from a
    piecewise-exponential envelope (exact for d = 3, where the marginal is
    itself exponential in t); the tangential component is uniform on the
    sphere of directions orthogonal to nu.
    """
    if n < 1:
        raise InvalidInputError(f"need n >= 1, got {n}")
    rng = np.random.default_rng(seed)
    return _sample_vmf_rng(params, n, rng)


def _sample_vmf_rng(params: VmfParams, n: int, rng: np.random.Generator) -> Array:
    d = params.dim
    t = _sample_marginal(d, float(params.kappa), n, rng)
    z = rng.standard_normal((n, d))
    z -= np.outer(z @ params.nu, params.nu)
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    x = t[:, None] * params.nu + np.sqrt(np.clip(1.0 - t**2, 0.0, None))[:, None] * z
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def vmf_sampler(params: VmfParams) -> Callable[[int, np.random.Generator], Array]:
    """Sampler closure with the (n, rng) signature used by divergence_monte_carlo."""
    return lambda n, rng: _sample_vmf_rng(params, n, rng)


def uniform_sphere(d: int, n: int, rng: np.random.Generator) -> Array:
    z = rng.standard_normal((n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# Lambert azimuthal equal-area projection (d = 3)
# ---------------------------------------------------------------------------

def tangent_basis(center: Array) -> tuple[Array, Array]:
    """Deterministic orthonormal basis of the tangent plane at ``center``."""
    k = int(np.argmin(np.abs(center)))
    e = np.zeros(3)
    e[k] = 1.0
    e = e - (e @ center) * center
    e /= np.linalg.norm(e)
    f = np.cross(center, e)
    return e, f


def lambert_project(x: Array, center: Array) -> Array:
    """Equal-area projection of sphere points, centered at ``center``.

    Points map to the open disk of radius 2; the center maps to the origin
    and points orthogonal to the center land at radius sqrt(2).  The
    antipode of the center is not representable and raises
    :class:`ProjectionUndefinedError`.
    """
    center = _unit(center, "projection center", tol=1e-9)
    if center.shape[0] != 3:
        raise InvalidInputError("Lambert projection is defined for d = 3")
    pts, single = _check_on_sphere(x)
    e, f = tangent_basis(center)
    z = pts @ center
    if np.any(z <= -1.0 + 1e-12):
        raise ProjectionUndefinedError("point is antipodal to the projection center")
    scale = np.sqrt(2.0 / (1.0 + z))
    out = np.stack([scale * (pts @ e), scale * (pts @ f)], axis=1)
    return out[0] if single else out


def lambert_inverse(xy: Array, center: Array) -> Array:
    """Inverse of :func:`lambert_project` on the open disk of radius 2."""
    center = _unit(center, "projection center", tol=1e-9)
    xy = np.asarray(xy, dtype=float)
    single = xy.ndim == 1
    pts = xy[None, :] if single else xy
    r2 = np.sum(pts**2, axis=1)
    if np.any(r2 >= 4.0):
        raise ProjectionUndefinedError("radius must be below 2 (the antipode)")
    e, f = tangent_basis(center)
    z = 1.0 - r2 / 2.0
    scale = np.sqrt(1.0 - r2 / 4.0)
    out = (
        (pts[:, 0] * scale)[:, None] * e
        + (pts[:, 1] * scale)[:, None] * f
        + z[:, None] * center
    )
    return out[0] if single else out
