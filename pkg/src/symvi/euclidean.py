"""Location-scale families on R^d, symmetric targets, and statistic extractors.

Covers the Euclidean side of the recovery story: the family
Q_{nu,S} = (T_{nu,S})# Q0 with T_{nu,S}(x) = nu + S^{1/2} x, point-reflection
and ellipsoid symmetry groups as affine maps, quadrature statistics (mean,
covariance, correlation), constructors for even- and elliptically-symmetric
targets, and the fixed-set membership checker for covariance matrices
proportional to a given shape matrix.

S^{1/2} always means the symmetric positive-definite square root obtained by
eigendecomposition (eigenvalues floored at 1e-12), which is the unique root
consistent with the T_{nu,S} convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .divergence import Density, QuadratureSpec, box_quadrature, quadrature_grid
from .errors import DegenerateStatisticError, InvalidInputError

Array = np.ndarray

_EIG_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# Matrix helpers
# ---------------------------------------------------------------------------

def _check_spd(s: Array, what: str) -> Array:
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise InvalidInputError(f"{what} must be a square matrix, got shape {s.shape}")
    if not np.allclose(s, s.T, atol=1e-12, rtol=0.0):
        raise InvalidInputError(f"{what} must be symmetric to 1e-12")
    if np.linalg.eigvalsh(s)[0] <= 0.0:
        raise InvalidInputError(f"{what} must be positive definite")
    return s


def symmetric_sqrt(s: Array) -> Array:
    """Symmetric PSD square root via eigendecomposition."""
    vals, vecs = np.linalg.eigh(np.asarray(s, dtype=float))
    vals = np.maximum(vals, _EIG_FLOOR)
    return (vecs * np.sqrt(vals)) @ vecs.T


def symmetric_inv_sqrt(s: Array) -> Array:
    vals, vecs = np.linalg.eigh(np.asarray(s, dtype=float))
    vals = np.maximum(vals, _EIG_FLOOR)
    return (vecs / np.sqrt(vals)) @ vecs.T


def random_rotation(d: int, rng: np.random.Generator) -> Array:
    """Haar-uniform rotation from QR of a Gaussian matrix with sign-fixed diagonal."""
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocScaleParams:
    """Location nu in R^d and symmetric positive-definite scale S."""

    nu: Array
    S: Array

    def __post_init__(self):
        object.__setattr__(self, "nu", np.asarray(self.nu, dtype=float))
        object.__setattr__(self, "S", _check_spd(self.S, "scale matrix S"))
        if self.nu.shape != (self.S.shape[0],):
            raise InvalidInputError("nu and S disagree on dimension")

    @property
    def dim(self) -> int:
        return self.nu.shape[0]


@dataclass(frozen=True)
class LocScaleFamily:
    """Location-scale family generated by pushing a base density through T_{nu,S}."""

    base: Density
    dim: int

    def __post_init__(self):
        if self.base.dim != self.dim:
            raise InvalidInputError("base density dimension mismatch")
        if self.base.reference_measure != "lebesgue":
            raise InvalidInputError("location-scale families live on R^d")


@dataclass(frozen=True)
class AffineMap:
    """Invertible map x -> b + A x."""

    A: Array
    b: Array

    def __post_init__(self):
        object.__setattr__(self, "A", np.asarray(self.A, dtype=float))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        if self.A.ndim != 2 or self.A.shape[0] != self.A.shape[1]:
            raise InvalidInputError("A must be square")
        if self.b.shape != (self.A.shape[0],):
            raise InvalidInputError("b and A disagree on dimension")
        if abs(np.linalg.det(self.A)) <= 1e-300:
            raise InvalidInputError("affine map is numerically singular")

    @property
    def dim(self) -> int:
        return self.b.shape[0]

    def apply(self, x: Array) -> Array:
        return np.asarray(x, dtype=float) @ self.A.T + self.b

    def apply_inverse(self, x: Array) -> Array:
        return (np.asarray(x, dtype=float) - self.b) @ np.linalg.inv(self.A).T

    def log_abs_det(self) -> float:
        return float(np.linalg.slogdet(self.A)[1])


def reflection_map(m: Array) -> AffineMap:
    """Point reflection r_m(x) = 2m - x."""
    m = np.asarray(m, dtype=float)
    return AffineMap(A=-np.eye(m.shape[0]), b=2.0 * m)


def elliptical_group_map(rotation: Array, m: Array, shape: Array) -> AffineMap:
    """Ellipsoid symmetry g_R(x) = m + A_R (x - m) with A_R = M^{1/2} R M^{-1/2}."""
    m = np.asarray(m, dtype=float)
    shape = _check_spd(shape, "shape matrix M")
    a_r = symmetric_sqrt(shape) @ np.asarray(rotation, dtype=float) @ symmetric_inv_sqrt(shape)
    return AffineMap(A=a_r, b=m - a_r @ m)


@dataclass(frozen=True)
class EllipticalTargetSpec:
    """Center m, SPD shape matrix M, and the radial profile of the invariant core.

    ``radial_profile`` maps radius r >= 0 to an unnormalized density value;
    the O(d)-invariant core has density proportional to radial_profile(|z|).
    """

    m: Array
    M: Array
    radial_profile: Callable[[Array], Array]

    def __post_init__(self):
        object.__setattr__(self, "m", np.asarray(self.m, dtype=float))
        object.__setattr__(self, "M", _check_spd(self.M, "shape matrix M"))
        if self.m.shape != (self.M.shape[0],):
            raise InvalidInputError("m and M disagree on dimension")


# ---------------------------------------------------------------------------
# Gaussian building blocks
# ---------------------------------------------------------------------------

def gaussian_density(mean: Array, cov: Array) -> Density:
    """Multivariate normal as a Density with exact center/spread hints."""
    mean = np.asarray(mean, dtype=float)
    cov = _check_spd(cov, "covariance")
    d = mean.shape[0]
    prec = np.linalg.inv(cov)
    _, logdet = np.linalg.slogdet(cov)
    const = -0.5 * (d * math.log(2.0 * math.pi) + logdet)

    def log_density(x: Array) -> Array:
        delta = x - mean
        return const - 0.5 * np.einsum("ni,ij,nj->n", delta, prec, delta)

    return Density(
        dim=d,
        log_density=log_density,
        center=mean,
        spread=np.sqrt(np.diag(cov)),
    )


def gaussian_mixture_density(
    weights: Sequence[float],
    means: Sequence[Array],
    covs: Sequence[Array],
) -> Density:
    """Finite Gaussian mixture; hints use the exact mixture mean and variance."""
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
        raise InvalidInputError("mixture weights must be positive and sum to 1")
    mus = [np.asarray(m, dtype=float) for m in means]
    sigmas = [_check_spd(c, "component covariance") for c in covs]
    d = mus[0].shape[0]
    precs = [np.linalg.inv(c) for c in sigmas]
    consts = [
        math.log(wk) - 0.5 * (d * math.log(2.0 * math.pi) + np.linalg.slogdet(c)[1])
        for wk, c in zip(w, sigmas, strict=True)
    ]

    def log_density(x: Array) -> Array:
        comps = np.stack(
            [
                ck - 0.5 * np.einsum("ni,ij,nj->n", x - mk, pk, x - mk)
                for ck, mk, pk in zip(consts, mus, precs, strict=True)
            ]
        )
        m = comps.max(axis=0)
        return m + np.log(np.sum(np.exp(comps - m), axis=0))

    mix_mean = sum(wk * mk for wk, mk in zip(w, mus, strict=True))
    second = sum(
        wk * (np.diag(ck) + mk**2) for wk, mk, ck in zip(w, mus, sigmas, strict=True)
    )
    return Density(
        dim=d,
        log_density=log_density,
        center=mix_mean,
        spread=np.sqrt(second - mix_mean**2),
    )


# ---------------------------------------------------------------------------
# Family members and pushforwards
# ---------------------------------------------------------------------------

def member_density(fam: LocScaleFamily, params: LocScaleParams) -> Density:
    """Density of Q_{nu,S}: log q0(S^{-1/2}(x - nu)) - 1/2 log det S."""
    if params.dim != fam.dim:
        raise InvalidInputError("params dimension does not match family")
    inv_root = symmetric_inv_sqrt(params.S)
    root = symmetric_sqrt(params.S)
    _, logdet = np.linalg.slogdet(params.S)
    base_log = fam.base.log_density
    nu = params.nu

    def log_density(x: Array) -> Array:
        return base_log((x - nu) @ inv_root.T) - 0.5 * logdet

    center = nu
    spread = None
    if fam.base.center is not None:
        center = nu + root @ fam.base.center
    if fam.base.spread is not None:
        spread = np.sqrt((root**2) @ (fam.base.spread**2))
    return Density(dim=fam.dim, log_density=log_density, center=center, spread=spread)


def pushforward_params(params: LocScaleParams, affine: AffineMap) -> LocScaleParams:
    """Parameters of the pushforward member: nu' = b + A nu, S' = A S A^T.

    For the symmetry maps r_m and g_R this is exactly the induced action on
    (nu, S); for a general affine map it matches the pushforward member
    whenever the base distribution has the matching invariance.
    """
    if affine.dim != params.dim:
        raise InvalidInputError("map dimension does not match params")
    nu_new = affine.b + affine.A @ params.nu
    s_new = affine.A @ params.S @ affine.A.T
    return LocScaleParams(nu=nu_new, S=0.5 * (s_new + s_new.T))


def pushforward_density(p: Density, affine: AffineMap) -> Density:
    """Change-of-variables density of T#P: p(T^{-1} x) / |det A|.

    A box-supported input loses its breakpoint metadata (the image of a box
    under a general affine map is not axis-aligned), so quadrature against
    pushforwards of discontinuous densities is less accurate.
    """
    if affine.dim != p.dim:
        raise InvalidInputError("map dimension does not match density")
    a_inv = np.linalg.inv(affine.A)
    logdet = affine.log_abs_det()
    base_log = p.log_density
    b = affine.b

    def log_density(x: Array) -> Array:
        return base_log((x - b) @ a_inv.T) - logdet

    center = affine.b + affine.A @ p.center if p.center is not None else None
    spread = None
    if p.spread is not None:
        spread = np.sqrt((affine.A**2) @ (p.spread**2))
    return Density(
        dim=p.dim,
        log_density=log_density,
        reference_measure=p.reference_measure,
        center=center,
        spread=spread,
    )


# ---------------------------------------------------------------------------
# Quadrature statistics
# ---------------------------------------------------------------------------

def _euclidean_grid(p: Density, quad: QuadratureSpec | None):
    if p.reference_measure != "lebesgue":
        raise InvalidInputError("statistic is defined for Euclidean densities")
    if quad is None:
        quad = box_quadrature(p)
    elif quad.scheme != "box":
        raise InvalidInputError("Euclidean statistics need box quadrature")
    nodes, w = quadrature_grid(quad, p)
    mass = w * np.exp(p.log_density(nodes))
    return nodes, mass


def mean(p: Density, quad: QuadratureSpec | None = None) -> Array:
    """First moment by quadrature."""
    nodes, mass = _euclidean_grid(p, quad)
    return mass @ nodes


def covariance(p: Density, quad: QuadratureSpec | None = None) -> Array:
    """Centered second moment by quadrature; symmetrized."""
    nodes, mass = _euclidean_grid(p, quad)
    mu = mass @ nodes
    delta = nodes - mu
    cov = (delta * mass[:, None]).T @ delta
    return 0.5 * (cov + cov.T)


def correlation(p: Density, quad: QuadratureSpec | None = None) -> Array:
    """Correlation matrix D^{-1/2} Sigma D^{-1/2} with exact unit diagonal."""
    return correlation_from_covariance(covariance(p, quad))


def correlation_from_covariance(cov: Array) -> Array:
    cov = np.asarray(cov, dtype=float)
    variances = np.diag(cov)
    if np.any(variances < 1e-12):
        raise DegenerateStatisticError(
            f"marginal variance below 1e-12: {variances.min():.3e}"
        )
    inv_sd = 1.0 / np.sqrt(variances)
    corr = cov * np.outer(inv_sd, inv_sd)
    np.fill_diagonal(corr, 1.0)
    return 0.5 * (corr + corr.T)


# ---------------------------------------------------------------------------
# Symmetric targets
# ---------------------------------------------------------------------------

def make_even_target(
    m: Array,
    components: Sequence[tuple[float, Array, Array]],
) -> Density:
    """Gaussian mixture that is even symmetric about ``m`` by construction.

    ``components`` is a list of (weight, center, covariance) triples and must
    be closed under the point reflection r_m: every component needs a partner
    with equal weight, reflected center 2m - c, and the same covariance.  A
    component centered at m is its own partner.
    """
    m = np.asarray(m, dtype=float)
    comps = [
        (float(wk), np.asarray(ck, dtype=float), np.asarray(sk, dtype=float))
        for wk, ck, sk in components
    ]
    unmatched = list(range(len(comps)))
    while unmatched:
        i = unmatched.pop()
        wi, ci, si = comps[i]
        reflected = 2.0 * m - ci
        if np.allclose(ci, reflected, atol=1e-12):
            continue
        partner = None
        for j in unmatched:
            wj, cj, sj = comps[j]
            if (
                abs(wi - wj) < 1e-12
                and np.allclose(cj, reflected, atol=1e-12)
                and np.allclose(si, sj, atol=1e-12)
            ):
                partner = j
                break
        if partner is None:
            raise InvalidInputError(
                "components must come in reflection-paired sets with equal weights"
            )
        unmatched.remove(partner)
    return gaussian_mixture_density(
        [c[0] for c in comps], [c[1] for c in comps], [c[2] for c in comps]
    )


def canonical_even_target(m: Array) -> Density:
    """Default even-symmetric showcase target: a cross-shaped 4-component mixture.

    Offsets are kept comparable to the component widths so the density has a
    single basin and the reverse-KL Gaussian fit has one minimizer in practice
    (recovery statements assume a unique minimizer).
    """
    m = np.asarray(m, dtype=float)
    a = np.array([0.85, 0.0])
    b = np.array([0.0, 0.7])
    cov_a = np.diag([0.50, 0.28])
    cov_b = np.diag([0.26, 0.45])
    return make_even_target(
        m,
        [
            (0.25, m + a, cov_a),
            (0.25, m - a, cov_a),
            (0.25, m + b, cov_b),
            (0.25, m - b, cov_b),
        ],
    )


def student_like_profile(dof: float = 5.0, taper_scale: float = 2.0) -> Callable[[Array], Array]:
    """Student-type radial profile with a Gaussian taper.

    r -> (1 + r^2/dof)^{-(dof + 2)/2} * exp(-r^2 / (2 taper_scale^2)).
    The taper keeps the tails sub-Gaussian so default truncation boxes hold
    essentially all the mass; the Student core still gives a flat peak and
    heavy shoulders, i.e. a visibly non-Gaussian shape.
    """

    def profile(r: Array) -> Array:
        r2 = np.asarray(r, dtype=float) ** 2
        return (1.0 + r2 / dof) ** (-(dof + 2.0) / 2.0) * np.exp(
            -r2 / (2.0 * taper_scale**2)
        )

    return profile


def _radial_normalizer(profile, d: int, r_max: float = 60.0, nodes: int = 4000):
    """Total mass and radial second moment of an O(d)-invariant core."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    r = 0.5 * r_max * (x + 1.0)
    wr = 0.5 * r_max * w
    vals = profile(r)
    surface = 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
    radial_mass = wr * vals * r ** (d - 1)
    mass = surface * float(np.sum(radial_mass))
    second = surface * float(np.sum(wr * vals * r ** (d + 1)))
    if not (np.isfinite(mass) and mass > 0.0):
        raise InvalidInputError("radial profile is not normalizable")
    # a profile that has not decayed by the end of the radial grid cannot be
    # certified normalizable (the truncated integral is finite regardless)
    tail = surface * float(np.sum(radial_mass[r > 0.9 * r_max]))
    if tail > 1e-9 * mass:
        raise InvalidInputError("radial profile does not decay; not normalizable")
    return mass, second / mass


def make_elliptical_target(spec: EllipticalTargetSpec) -> Density:
    """Affine image of an O(d)-invariant core: log p0(M^{-1/2}(x - m)) - 1/2 log det M."""
    d = spec.m.shape[0]
    mass, second = _radial_normalizer(spec.radial_profile, d)
    inv_root = symmetric_inv_sqrt(spec.M)
    _, logdet_m = np.linalg.slogdet(spec.M)
    log_norm = math.log(mass)
    profile = spec.radial_profile
    m_vec = spec.m

    def log_density(x: Array) -> Array:
        z = (x - m_vec) @ inv_root.T
        r = np.sqrt(np.einsum("ni,ni->n", z, z))
        with np.errstate(divide="ignore"):
            return np.log(profile(r)) - log_norm - 0.5 * logdet_m

    # per-axis variance of the target is (core radial E[r^2]/d) * M_ii
    alpha = second / d
    return Density(
        dim=d,
        log_density=log_density,
        center=m_vec,
        spread=np.sqrt(alpha * np.diag(spec.M)),
    )


def canonical_elliptical_target(m: Array, shape: Array) -> Density:
    """Default elliptically symmetric showcase target (tapered Student core)."""
    return make_elliptical_target(
        EllipticalTargetSpec(m=m, M=shape, radial_profile=student_like_profile())
    )


# ---------------------------------------------------------------------------
# Symmetry and fixed-set checkers
# ---------------------------------------------------------------------------

def check_invariance(
    p: Density,
    maps: Sequence[AffineMap],
    n_points: int = 50,
    seed: int = 0,
) -> float:
    """Largest log-density gap |log p(x) - (log p(T^{-1}x) - log|det A|)|.

    Points are sampled around the density's center hint; a G-invariant
    density gives a gap at floating-point level, an asymmetric one a gap of
    order its asymmetry.
    """
    if p.center is None or p.spread is None:
        raise InvalidInputError("check_invariance needs center/spread hints")
    rng = np.random.default_rng(seed)
    x = p.center + rng.standard_normal((n_points, p.dim)) * p.spread
    lp = p.log_density(x)
    worst = 0.0
    for t in maps:
        pulled = p.log_density(t.apply_inverse(x)) - t.log_abs_det()
        worst = max(worst, float(np.max(np.abs(lp - pulled))))
    return worst


def fixed_set_checks(sigma_hat: Array, shape: Array) -> tuple[float, float]:
    """Projection of a covariance onto {lambda * M} and the relative residual.

    Returns (lambda_hat, residual) with
    lambda_hat = tr(M^{-1/2} Sigma M^{-1/2}) / d and residual the Frobenius
    distance of M^{-1/2} Sigma M^{-1/2} from lambda_hat * I, relative to
    max(lambda_hat, 1e-12).  Membership in the fixed set means residual ~ 0.
    """
    shape = _check_spd(shape, "shape matrix M")
    sigma_hat = np.asarray(sigma_hat, dtype=float)
    inv_root = symmetric_inv_sqrt(shape)
    whitened = inv_root @ sigma_hat @ inv_root
    d = shape.shape[0]
    lambda_hat = float(np.trace(whitened) / d)
    residual = float(
        np.linalg.norm(whitened - lambda_hat * np.eye(d), "fro") / max(lambda_hat, 1e-12)
    )
    return lambda_hat, residual
