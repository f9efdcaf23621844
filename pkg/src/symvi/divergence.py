"""f-divergence generators and numerical divergence evaluation.

An f-divergence between probability measures P and Q with densities p, q
relative to a common dominating measure is

    D_f(P || Q) = integral over {q > 0} of q * f(p/q)  +  f'(inf) * P({q = 0}),

for a convex generator f with f(1) = 0, where f(0) and f'(inf) are the
limits of f(t) and t*f(1/t) as t decreases to 0, with the convention
0 * inf = 0.  This module evaluates the full expression, singular term
included, by deterministic quadrature (tensor Gauss-Legendre on a
truncation box, or a product grid on the unit sphere) and by Monte Carlo.

All densities are handled in log space.  A quadrature node is treated as
belonging to {q = 0} iff log q < LOG_ZERO_TOL, which sits below the
representable range of exp and therefore cannot be produced by underflow
of a genuinely positive density value.

Everything here is a pure function of immutable inputs; numpy's pairwise
summation gives a fixed reduction order, so results are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import InvalidInputError

# log-density threshold below which a node counts as zero density
LOG_ZERO_TOL = -700.0

Array = np.ndarray
LogDensityFn = Callable[[Array], Array]


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DivergenceGenerator:
    """Convex generator f of an f-divergence, with its extended-real limits.

    Parameters
    ----------
    name : str
        Registry identifier.
    f : callable
        Vectorized evaluation of f on arrays of strictly positive ratios.
        Values of +inf are allowed as inputs and follow numpy limit
        semantics.
    f_at_zero : float
        lim_{t -> 0+} f(t); may be +inf.
    f_prime_at_inf : float
        lim_{t -> 0+} t * f(1/t); may be +inf.  Multiplies the mass that P
        places on {q = 0}.
    weighted_f : callable, optional
        Stable evaluation of q * f(p/q) directly from (log p, log q), used
        on {q > 0} when available.  Built-in generators provide it so that
        extreme log-density gaps (ratio under/overflow) produce the correct
        limit values instead of 0 * inf artifacts; custom generators fall
        back to q * f(exp(log p - log q)).
    """

    name: str
    f: Callable[[Array], Array]
    f_at_zero: float
    f_prime_at_inf: float
    weighted_f: Callable[[Array, Array], Array] | None = None


def _f_forward_kl(t: Array) -> Array:
    return t * np.log(t)


def _f_reverse_kl(t: Array) -> Array:
    return -np.log(t)


def _f_chi_squared(t: Array) -> Array:
    return (t - 1.0) ** 2


def _f_total_variation(t: Array) -> Array:
    return 0.5 * np.abs(t - 1.0)


def _f_squared_hellinger(t: Array) -> Array:
    return (1.0 - np.sqrt(t)) ** 2


def _wf_forward_kl(lp: Array, lq: Array) -> Array:
    # q * (p/q) log(p/q) = p * (log p - log q)
    with np.errstate(invalid="ignore", over="ignore"):
        vals = np.exp(lp) * (lp - lq)
    return np.where(np.isneginf(lp), 0.0, vals)


def _wf_reverse_kl(lp: Array, lq: Array) -> Array:
    # q * (-log(p/q)) = q * (log q - log p); q = 0 contributes nothing
    with np.errstate(invalid="ignore", over="ignore"):
        vals = np.exp(lq) * (lq - lp)
    return np.where(np.isneginf(lq), 0.0, vals)


def _wf_chi_squared(lp: Array, lq: Array) -> Array:
    # q * (p/q - 1)^2 = exp(2 lp - lq) * (1 - exp(lq - lp))^2, split by sign
    delta = lp - lq
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.where(
            delta >= 0,
            np.exp(2.0 * lp - lq) * np.expm1(-delta) ** 2,
            np.exp(lq) * np.expm1(delta) ** 2,
        )
    return np.where(np.isneginf(lp), np.exp(lq), vals)


def _wf_total_variation(lp: Array, lq: Array) -> Array:
    # q * |p/q - 1| / 2 = |p - q| / 2
    hi = np.maximum(lp, lq)
    with np.errstate(invalid="ignore", over="ignore"):
        vals = 0.5 * np.exp(hi) * -np.expm1(-np.abs(lp - lq))
    return np.where(np.isneginf(hi), 0.0, vals)


def _wf_squared_hellinger(lp: Array, lq: Array) -> Array:
    # q * (1 - sqrt(p/q))^2 = (sqrt(p) - sqrt(q))^2
    hi = np.maximum(lp, lq)
    with np.errstate(invalid="ignore", over="ignore"):
        vals = np.exp(hi) * np.expm1(0.5 * (np.minimum(lp, lq) - hi)) ** 2
    return np.where(np.isneginf(hi), 0.0, vals)


FORWARD_KL = DivergenceGenerator(
    "forward_kl", _f_forward_kl, 0.0, math.inf, _wf_forward_kl
)
REVERSE_KL = DivergenceGenerator(
    "reverse_kl", _f_reverse_kl, math.inf, 0.0, _wf_reverse_kl
)
CHI_SQUARED = DivergenceGenerator(
    "chi_squared", _f_chi_squared, 1.0, math.inf, _wf_chi_squared
)
TOTAL_VARIATION = DivergenceGenerator(
    "total_variation", _f_total_variation, 0.5, 0.5, _wf_total_variation
)
SQUARED_HELLINGER = DivergenceGenerator(
    "squared_hellinger", _f_squared_hellinger, 1.0, 1.0, _wf_squared_hellinger
)

GENERATORS: dict[str, DivergenceGenerator] = {
    g.name: g
    for g in (FORWARD_KL, REVERSE_KL, CHI_SQUARED, TOTAL_VARIATION, SQUARED_HELLINGER)
}


def get_generator(name: str) -> DivergenceGenerator:
    try:
        return GENERATORS[name]
    except KeyError:
        raise InvalidInputError(
            f"unknown generator {name!r}; available: {sorted(GENERATORS)}"
        ) from None


def swap_generator(g: DivergenceGenerator) -> DivergenceGenerator:
    """Generator of the argument-swapped divergence, f~(t) = t * f(1/t).

    Satisfies D_{f~}(P || Q) = D_f(Q || P).  The extended values swap
    roles: f~(0) = f'(inf) and f~'(inf) = f(0).
    """

    def swapped(t: Array) -> Array:
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            vals = t * g.f(1.0 / t)
        # t * f(1/t) -> f'(inf) as t -> inf, recover it where inf/inf produced nan
        vals = np.where(np.isposinf(t), g.f_prime_at_inf * np.ones_like(t), vals)
        return vals

    return DivergenceGenerator(
        name=f"swapped_{g.name}",
        f=swapped,
        f_at_zero=g.f_prime_at_inf,
        f_prime_at_inf=g.f_at_zero,
    )


def eval_generator(g: DivergenceGenerator, t: float) -> float:
    """Evaluate f(t) on [0, inf], returning f_at_zero at t = 0.

    The singular term of the divergence is the caller's business (it uses
    f_prime_at_inf, not a value of f).
    """
    if t < 0:
        raise InvalidInputError(f"generator argument must be >= 0, got {t}")
    if t == 0:
        return g.f_at_zero
    return float(g.f(np.asarray(t, dtype=float)))


# ---------------------------------------------------------------------------
# Densities and quadrature specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Density:
    """A d-dimensional log-density with its support descriptor.

    ``log_density`` maps an (n, dim) array of points to an (n,) array of
    log-density values; -inf encodes zero density.  ``support`` is one of
    "full" (all of R^d), "box" (axis-aligned; bounds in ``support_box``),
    or "sphere" (the unit sphere S^{d-1}).  ``reference_measure`` is
    "lebesgue" or "sphere_uniform" (the uniform probability measure).

    ``center`` and ``spread`` are optional location / marginal-standard-
    deviation hints used to build default truncation boxes; Euclidean
    constructors in :mod:`symvi.euclidean` always fill them in.
    """

    dim: int
    log_density: LogDensityFn
    support: str = "full"
    reference_measure: str = "lebesgue"
    support_box: Array | None = None
    center: Array | None = None
    spread: Array | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidInputError(f"dim must be positive, got {self.dim}")
        if self.support not in ("full", "box", "sphere"):
            raise InvalidInputError(f"unknown support tag {self.support!r}")
        if self.reference_measure not in ("lebesgue", "sphere_uniform"):
            raise InvalidInputError(
                f"unknown reference measure {self.reference_measure!r}"
            )
        if self.support == "box" and self.support_box is None:
            raise InvalidInputError("box support requires support_box bounds")

    def logpdf(self, x: Array) -> Array:
        """Evaluate at one point (dim,) or a batch (n, dim)."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return self.log_density(x[None, :])[0]
        return self.log_density(x)


@dataclass(frozen=True)
class QuadratureSpec:
    """Deterministic quadrature rule description.

    scheme "box": tensor-product Gauss-Legendre over ``box`` (shape (d, 2)),
    split into panels at density support boundaries so that integrands with
    jump discontinuities are still integrated to high accuracy.
    scheme "sphere": product grid on S^2 with Gauss-Legendre in the polar
    cosine and midpoints in azimuth, against the uniform probability
    measure.
    """

    scheme: str
    nodes_per_axis: int = 200
    box: Array | None = None
    n_azimuth: int = 800

    def __post_init__(self):
        if self.scheme not in ("box", "sphere"):
            raise InvalidInputError(f"unknown quadrature scheme {self.scheme!r}")
        if self.nodes_per_axis < 2:
            raise InvalidInputError("nodes_per_axis must be >= 2")
        if self.scheme == "box":
            if self.box is None:
                raise InvalidInputError("box scheme requires bounds")
            b = np.asarray(self.box, dtype=float)
            if b.ndim != 2 or b.shape[1] != 2 or np.any(b[:, 1] <= b[:, 0]):
                raise InvalidInputError("box bounds must be (d, 2) with positive volume")
        if self.scheme == "sphere" and self.n_azimuth < 4:
            raise InvalidInputError("n_azimuth must be >= 4")


def default_box(*densities: Density, half_widths: float = 8.0) -> Array:
    """Axis-aligned truncation box covering center +- 8 marginal stds.

    The box is the union over the given densities, so it is at least as
    wide as the widest of them on every axis.
    """
    dims = {p.dim for p in densities}
    if len(dims) != 1:
        raise InvalidInputError(f"densities disagree on dim: {sorted(dims)}")
    lo = np.full(dims.pop(), np.inf)
    hi = -lo.copy()
    for p in densities:
        if p.center is None or p.spread is None:
            raise InvalidInputError(
                "default_box needs center/spread hints on every density"
            )
        lo = np.minimum(lo, p.center - half_widths * p.spread)
        hi = np.maximum(hi, p.center + half_widths * p.spread)
    return np.stack([lo, hi], axis=1)


def box_quadrature(*densities: Density, nodes_per_axis: int = 200) -> QuadratureSpec:
    """QuadratureSpec over the default truncation box of the given densities."""
    return QuadratureSpec("box", nodes_per_axis=nodes_per_axis, box=default_box(*densities))


def sphere_quadrature(n_polar: int = 400, n_azimuth: int = 800) -> QuadratureSpec:
    return QuadratureSpec("sphere", nodes_per_axis=n_polar, n_azimuth=n_azimuth)


def _axis_breakpoints(axis: int, lo: float, hi: float, densities) -> list[float]:
    pts = set()
    for p in densities:
        if p.support == "box" and p.support_box is not None:
            for v in np.asarray(p.support_box, dtype=float)[axis]:
                if lo < v < hi:
                    pts.add(float(v))
    return sorted(pts)


@lru_cache(maxsize=64)
def _leggauss(n: int) -> tuple[Array, Array]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _axis_rule(lo: float, hi: float, n: int, breakpoints: list[float]) -> tuple[Array, Array]:
    """Composite Gauss-Legendre rule on [lo, hi] split at breakpoints."""
    edges = [lo] + breakpoints + [hi]
    lengths = np.diff(edges)
    n_panels = len(lengths)
    # distribute nodes proportionally to panel length, at least 8 per panel
    alloc = np.maximum(8, np.round(n * lengths / lengths.sum()).astype(int))
    nodes, weights = [], []
    for (a, b), k in zip(zip(edges[:-1], edges[1:]), alloc, strict=True):
        x, w = _leggauss(int(k))
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    if n_panels == 1:
        return nodes[0], weights[0]
    return np.concatenate(nodes), np.concatenate(weights)


def quadrature_grid(quad: QuadratureSpec, *densities: Density) -> tuple[Array, Array]:
    """Nodes (N, d) and weights (N,) of the rule described by ``quad``.

    For the box scheme the weights integrate against Lebesgue measure; for
    the sphere scheme against the uniform probability measure (weights sum
    to 1).
    """
    if quad.scheme == "sphere":
        t, wt = _leggauss(quad.nodes_per_axis)
        phi = (np.arange(quad.n_azimuth) + 0.5) * (2.0 * np.pi / quad.n_azimuth)
        st = np.sqrt(np.clip(1.0 - t**2, 0.0, None))
        x = np.empty((quad.nodes_per_axis, quad.n_azimuth, 3))
        x[:, :, 0] = st[:, None] * np.cos(phi)[None, :]
        x[:, :, 1] = st[:, None] * np.sin(phi)[None, :]
        x[:, :, 2] = t[:, None]
        w = np.broadcast_to(wt[:, None] / (2.0 * quad.n_azimuth), x.shape[:2])
        return x.reshape(-1, 3), np.ascontiguousarray(w).reshape(-1)

    box = np.asarray(quad.box, dtype=float)
    d = box.shape[0]
    axes = []
    for k in range(d):
        breaks = _axis_breakpoints(k, box[k, 0], box[k, 1], densities)
        axes.append(_axis_rule(box[k, 0], box[k, 1], quad.nodes_per_axis, breaks))
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    nodes = np.stack([g.reshape(-1) for g in grids], axis=1)
    w = axes[0][1]
    for k in range(1, d):
        w = np.multiply.outer(w, axes[k][1])
    return nodes, w.reshape(-1)


def integrate_density(p: Density, quad: QuadratureSpec | None = None) -> float:
    """Total mass of ``p`` over the quadrature domain (should be 1)."""
    if quad is None:
        quad = (
            sphere_quadrature()
            if p.reference_measure == "sphere_uniform"
            else box_quadrature(p)
        )
    nodes, w = quadrature_grid(quad, p)
    lp = p.log_density(nodes)
    with np.errstate(over="ignore"):
        vals = np.where(lp > LOG_ZERO_TOL, np.exp(lp), 0.0)
    return float(np.sum(w * vals))


# ---------------------------------------------------------------------------
# Divergence evaluation
# ---------------------------------------------------------------------------

def _check_pair(p: Density, q: Density, quad: QuadratureSpec) -> None:
    if p.dim != q.dim:
        raise InvalidInputError(f"dimension mismatch: {p.dim} vs {q.dim}")
    if p.reference_measure != q.reference_measure:
        raise InvalidInputError(
            f"reference measure mismatch: {p.reference_measure} vs {q.reference_measure}"
        )
    sphere = p.reference_measure == "sphere_uniform"
    if sphere != (quad.scheme == "sphere"):
        raise InvalidInputError("quadrature scheme does not match the reference measure")
    if sphere and p.dim != 3:
        raise InvalidInputError("sphere quadrature grid is implemented for d = 3 only")


def divergence_quadrature(
    g: DivergenceGenerator,
    p: Density,
    q: Density,
    quad: QuadratureSpec,
) -> float:
    """D_f(P || Q) on a deterministic grid, singular term included.

    Nodes with log q below LOG_ZERO_TOL contribute their p-mass to the
    singular term f'(inf) * P({q = 0}); elsewhere the integrand
    q * f(p/q) is evaluated with the ratio formed as exp(log p - log q),
    overflowing cleanly to +inf.  Tiny negative totals (quadrature noise
    above -1e-9) are reported as 0.
    """
    _check_pair(p, q, quad)
    nodes, w = quadrature_grid(quad, p, q)
    return divergence_from_logs(g, p.log_density(nodes), q.log_density(nodes), w)


def divergence_from_logs(
    g: DivergenceGenerator,
    lp: Array,
    lq: Array,
    w: Array,
) -> float:
    """Divergence from precomputed log-density values on a fixed grid.

    This is the core of :func:`divergence_quadrature`, split out so that
    optimizers evaluating many members against one target can compute the
    target's log-densities once.
    """
    q_zero = lq < LOG_ZERO_TOL
    p_pos = lp > LOG_ZERO_TOL

    singular_mass = float(np.sum(w[q_zero & p_pos] * np.exp(lp[q_zero & p_pos])))
    if singular_mass > 0.0 and math.isinf(g.f_prime_at_inf):
        return math.inf
    singular = g.f_prime_at_inf * singular_mass if singular_mass > 0.0 else 0.0

    live = ~q_zero
    lq_live = lq[live]
    lp_live = lp[live]

    if g.weighted_f is not None:
        vals = g.weighted_f(lp_live, lq_live)
    else:
        qv = np.exp(lq_live)
        vals = np.zeros_like(qv)
        ratio_pos = lp_live > LOG_ZERO_TOL
        if np.any(ratio_pos):
            with np.errstate(over="ignore"):
                ratio = np.exp(lp_live[ratio_pos] - lq_live[ratio_pos])
            vals[ratio_pos] = qv[ratio_pos] * g.f(ratio)
        if not np.all(ratio_pos):
            # p = 0, q > 0: contributes q * f(0); stays 0 * inf = 0 only if q = 0
            vals[~ratio_pos] = qv[~ratio_pos] * g.f_at_zero

    total = float(np.sum(w[live] * vals)) + singular
    if -1e-9 < total < 0.0:
        total = 0.0
    return total


def divergence_monte_carlo(
    g: DivergenceGenerator,
    p: Density,
    q: Density,
    sampler_for_q: Callable[[int, np.random.Generator], Array],
    n: int,
    seed: int,
) -> tuple[float, float]:
    """Monte Carlo estimate of D_f(P || Q) from i.i.d. draws of Q.

    Uses the Q-expectation form E_Q[f(p(X)/q(X))] for generators with
    finite f on (0, inf), and E_Q[log q - log p] for reverse KL.  Returns
    (estimate, standard error); deterministic given the seed.  A sample
    with p(X) = 0 under a generator unbounded at 0 yields a flagged +inf
    estimate.
    """
    if n < 100:
        raise InvalidInputError(f"need n >= 100 samples, got {n}")
    if p.dim != q.dim:
        raise InvalidInputError(f"dimension mismatch: {p.dim} vs {q.dim}")
    rng = np.random.default_rng(seed)
    x = sampler_for_q(n, rng)
    lp = p.log_density(x)
    lq = q.log_density(x)

    if g.name == "reverse_kl":
        vals = lq - lp
        vals = np.where(lp <= LOG_ZERO_TOL, np.inf, vals)
    else:
        p_zero = lp <= LOG_ZERO_TOL
        with np.errstate(over="ignore"):
            ratio = np.exp(lp - lq)
        vals = np.empty(n)
        pos = ~p_zero
        if np.any(pos):
            vals[pos] = g.f(ratio[pos])
        vals[p_zero] = g.f_at_zero

    if not np.all(np.isfinite(vals)):
        return math.inf, math.inf
    est = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(n))
    return est, se


def _map_matrix(affine) -> tuple[Array, Array]:
    a = np.asarray(affine.A, dtype=float)
    b = np.asarray(affine.b, dtype=float)
    return a, b


def pushforward_box(box: Array, affine) -> Array:
    """Bounding box of the image of ``box`` under x -> b + A x."""
    a, b = _map_matrix(affine)
    box = np.asarray(box, dtype=float)
    d = box.shape[0]
    corners = np.stack(
        [box[np.arange(d), idx] for idx in np.ndindex(*([2] * d))]
    )
    images = corners @ a.T + b
    return np.stack([images.min(axis=0), images.max(axis=0)], axis=1)


def _pushforward(p: Density, affine) -> Density:
    a, b = _map_matrix(affine)
    sign, logdet = np.linalg.slogdet(a)
    if sign == 0 or logdet < math.log(1e-300):
        raise InvalidInputError("affine map is numerically singular")
    a_inv = np.linalg.inv(a)
    base_log = p.log_density

    def log_density(x: Array) -> Array:
        return base_log((x - b) @ a_inv.T) - logdet

    center = b + a @ p.center if p.center is not None else None
    spread = None
    if p.spread is not None:
        spread = np.sqrt((a**2) @ (p.spread**2))
    return Density(
        dim=p.dim,
        log_density=log_density,
        support="full",
        reference_measure=p.reference_measure,
        center=center,
        spread=spread,
    )


def check_pushforward_invariance(
    g: DivergenceGenerator,
    p: Density,
    q: Density,
    affine,
    quad: QuadratureSpec,
) -> float:
    """|D_f(T#P || T#Q) - D_f(P || Q)| for an invertible affine T.

    The pushforward side integrates over the bounding box of the image of
    the original truncation box; pushforward densities come from the
    change-of-variables formula.  ``affine`` is any object with invertible
    matrix ``A`` and offset ``b`` attributes.
    """
    if quad.scheme != "box":
        raise InvalidInputError("pushforward check is defined for box quadrature")
    d_orig = divergence_quadrature(g, p, q, quad)
    quad_img = QuadratureSpec(
        "box",
        nodes_per_axis=quad.nodes_per_axis,
        box=pushforward_box(quad.box, affine),
    )
    d_image = divergence_quadrature(g, _pushforward(p, affine), _pushforward(q, affine), quad_img)
    if math.isinf(d_orig) and math.isinf(d_image):
        return 0.0
    return abs(d_image - d_orig)
