"""Experiment CLI: recovery showcases and the verification suite runner.

Subcommands and their artifacts:

  even-recovery       target_density.csv, fit_density.csv, summary.json
  elliptical-recovery target_density.csv, fit_density.csv, summary.json
  sphere-threshold    threshold.json
  sphere-contours     contours.csv, summary.json
  verify-all          verification.json

CSV grids carry their column layout in ``#``-prefixed header comments and
contain no NaN; grid nodes where a value is undefined (the antipodal point of
a sphere projection) are omitted and counted in the summary.  JSON files hold
scalars and row-major matrices at full float precision.  With a fixed seed
every artifact is byte-for-byte reproducible; ``--threads`` is accepted for
interface compatibility but execution is always sequential, so any thread
count reproduces bitwise.

Exit codes: 0 success, 2 invalid configuration, 3 optimization failure,
4 verification failures.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import divergence as dv
from . import euclidean as eu
from . import optimize as op
from . import sphere as sp
from . import verification
from .errors import InvalidInputError, OptimizationFailedError

EXPERIMENTS = (
    "even-recovery",
    "elliptical-recovery",
    "sphere-threshold",
    "sphere-contours",
    "verify-all",
)

EXIT_OK = 0
EXIT_BAD_CONFIG = 2
EXIT_OPT_FAILED = 3
EXIT_VERIFY_FAILED = 4


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int = 0
    output_dir: Path = Path("symvi-out")
    resolution: int = 200
    d: int = 3
    lam: float = 1.0
    eta: float | None = None
    kappa0: float = 2.5
    divergence: str = "reverse_kl"
    threads: int = 1
    m: tuple[float, ...] = (1.0, 1.0)
    shape: tuple[tuple[float, ...], ...] = ((2.0, 0.8), (0.8, 1.0))

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise InvalidInputError(f"unknown experiment {self.experiment!r}")
        if self.resolution < 32:
            raise InvalidInputError("resolution must be at least 32 per axis")
        if self.d < 3:
            raise InvalidInputError("sphere experiments need d >= 3")
        if self.eta is not None and self.eta <= 0:
            raise InvalidInputError("eta must be positive")
        if self.kappa0 <= 0:
            raise InvalidInputError("kappa0 must be positive")
        if self.threads < 1:
            raise InvalidInputError("threads must be >= 1")
        dv.get_generator(self.divergence)


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------

def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: Path, header_lines: list[str], columns: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def _density_grid_rows(p: dv.Density, box: np.ndarray, resolution: int):
    xs = np.linspace(box[0, 0], box[0, 1], resolution)
    ys = np.linspace(box[1, 0], box[1, 1], resolution)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([gx.reshape(-1), gy.reshape(-1)], axis=1)
    vals = p.log_density(pts)
    return [(pts[i, 0], pts[i, 1], vals[i]) for i in range(pts.shape[0])]


def _plot_box(target: dv.Density, widths: float = 4.0) -> np.ndarray:
    return np.stack(
        [target.center - widths * target.spread, target.center + widths * target.spread],
        axis=1,
    )


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def run_even_recovery(cfg: ExperimentConfig) -> dict:
    """Fit a Gaussian family to the canonical even target; write grids + summary."""
    m = np.asarray(cfg.m, dtype=float)
    target = eu.canonical_even_target(m)
    fam = eu.LocScaleFamily(base=eu.gaussian_density(np.zeros(2), np.eye(2)), dim=2)
    gen = dv.get_generator(cfg.divergence)
    fit = op.fit_locscale(target, fam, gen, cfg=op.OptConfig(n_starts=3, seed=cfg.seed))
    member = eu.member_density(fam, fit.params)

    target_mean = eu.mean(target)
    box = _plot_box(target)
    grid_header = [
        "experiment: even-recovery",
        "columns: x,y,log_density",
        f"grid: nx={cfg.resolution} ny={cfg.resolution} row-major in x",
    ]
    out = Path(cfg.output_dir)
    _write_csv(out / "target_density.csv", grid_header, ["x", "y", "log_density"],
               _density_grid_rows(target, box, cfg.resolution))
    _write_csv(out / "fit_density.csv", grid_header, ["x", "y", "log_density"],
               _density_grid_rows(member, box, cfg.resolution))

    summary = {
        "experiment": "even-recovery",
        "seed": cfg.seed,
        "divergence": cfg.divergence,
        "m": m.tolist(),
        "target_mean": target_mean.tolist(),
        "nu_star": fit.params.nu.tolist(),
        "S_star": fit.params.S.tolist(),
        "mean_error": float(np.linalg.norm(fit.params.nu - m)),
        "objective": fit.objective,
        "converged": fit.converged,
        "n_evals": fit.n_evals,
        "start_dispersion": fit.start_dispersion,
        "plot_box": box.tolist(),
        "resolution": cfg.resolution,
    }
    _write_json(out / "summary.json", summary)
    return summary


def run_elliptical_recovery(cfg: ExperimentConfig) -> dict:
    """Fit to the canonical elliptical target; report scale-free recovery."""
    m = np.asarray(cfg.m, dtype=float)
    shape = np.asarray(cfg.shape, dtype=float)
    target = eu.canonical_elliptical_target(m, shape)
    fam = eu.LocScaleFamily(base=eu.gaussian_density(np.zeros(2), np.eye(2)), dim=2)
    gen = dv.get_generator(cfg.divergence)
    fit = op.fit_locscale(target, fam, gen, cfg=op.OptConfig(n_starts=3, seed=cfg.seed))
    member = eu.member_density(fam, fit.params)

    sigma_p = eu.covariance(target)
    sigma_q = eu.covariance(member)
    lam_p, res_p = eu.fixed_set_checks(sigma_p, shape)
    lam_q, res_q = eu.fixed_set_checks(sigma_q, shape)
    rho_p = eu.correlation_from_covariance(sigma_p)
    rho_q = eu.correlation_from_covariance(sigma_q)

    box = _plot_box(target)
    grid_header = [
        "experiment: elliptical-recovery",
        "columns: x,y,log_density",
        f"grid: nx={cfg.resolution} ny={cfg.resolution} row-major in x",
    ]
    out = Path(cfg.output_dir)
    _write_csv(out / "target_density.csv", grid_header, ["x", "y", "log_density"],
               _density_grid_rows(target, box, cfg.resolution))
    _write_csv(out / "fit_density.csv", grid_header, ["x", "y", "log_density"],
               _density_grid_rows(member, box, cfg.resolution))

    summary = {
        "experiment": "elliptical-recovery",
        "seed": cfg.seed,
        "divergence": cfg.divergence,
        "m": m.tolist(),
        "M": shape.tolist(),
        "nu_star": fit.params.nu.tolist(),
        "S_star": fit.params.S.tolist(),
        "Sigma_P": sigma_p.tolist(),
        "Sigma_Q": sigma_q.tolist(),
        "lambda_P": lam_p,
        "lambda_Q": lam_q,
        "residual_P": res_p,
        "residual_Q": res_q,
        "rho_P": rho_p.tolist(),
        "rho_Q": rho_q.tolist(),
        "max_correlation_gap": float(np.max(np.abs(rho_p - rho_q))),
        "objective": fit.objective,
        "converged": fit.converged,
        "n_evals": fit.n_evals,
        "start_dispersion": fit.start_dispersion,
        "plot_box": box.tolist(),
        "resolution": cfg.resolution,
    }
    _write_json(out / "summary.json", summary)
    return summary


def _sphere_axis(d: int) -> np.ndarray:
    u = np.zeros(d)
    u[:3] = verification.SPHERE_AXIS
    return u / np.linalg.norm(u)


def run_sphere_threshold(cfg: ExperimentConfig) -> dict:
    """Sweep the quadratic strength across the critical threshold."""
    d = cfg.d
    mom = sp.marginal_moments(d, cfg.kappa0)
    eta_c = sp.eta_critical(d, cfg.lam, cfg.kappa0)
    u = _sphere_axis(d)
    etas = sorted(set(np.linspace(0.2, 3.0, 20) * eta_c) | {1.0, 2.0})
    rows = []
    for i, eta in enumerate(etas):
        target = sp.AxialTarget(u=u, lam=cfg.lam, eta=float(eta))
        fit = op.fit_vmf(
            target,
            dv.REVERSE_KL,
            op.OptConfig(n_starts=3, seed=cfg.seed + i),
            kappa0=cfg.kappa0,
            use_closed_form=True,
        )
        c_pred = sp.predicted_minimizer_c(d, cfg.lam, float(eta), cfg.kappa0)
        c_fit = float(fit.params.nu @ u)
        rows.append(
            {
                "eta": float(eta),
                "c_predicted": c_pred,
                "c_fitted": c_fit,
                "gap": abs(c_fit - c_pred),
                "axis_recovered": sp.axis_statistic(fit.params).same_line(sp.Line(u), tol=1e-6),
            }
        )
    payload = {
        "experiment": "sphere-threshold",
        "seed": cfg.seed,
        "d": d,
        "lambda": cfg.lam,
        "kappa0": cfg.kappa0,
        "A": mom.A,
        "m2": mom.m2,
        "B": mom.B,
        "eta_critical": eta_c,
        "axis": u.tolist(),
        "sweep": rows,
    }
    _write_json(Path(cfg.output_dir) / "threshold.json", payload)
    return payload


def run_sphere_contours(cfg: ExperimentConfig) -> dict:
    """Lambert-projected log-density grids of target and fitted vMF (d = 3)."""
    if cfg.d != 3:
        raise InvalidInputError("sphere-contours is a d = 3 experiment")
    eta = cfg.eta if cfg.eta is not None else 1.0
    u = _sphere_axis(3)
    target = sp.AxialTarget(u=u, lam=cfg.lam, eta=eta)
    fit = op.fit_vmf(
        target,
        dv.REVERSE_KL,
        op.OptConfig(n_starts=4, seed=cfg.seed),
        kappa0=cfg.kappa0,
        use_closed_form=True,
    )
    nu_star = fit.params.nu
    eta_c = sp.eta_critical(3, cfg.lam, cfg.kappa0)
    c_star = sp.predicted_minimizer_c(3, cfg.lam, eta, cfg.kappa0)

    span = np.linspace(-2.0, 2.0, cfg.resolution)
    spacing = float(span[1] - span[0])
    rows = []
    omitted = 0
    for x_val in span:
        for y_val in span:
            if x_val**2 + y_val**2 >= 4.0:
                omitted += 1
                continue
            point = sp.lambert_inverse(np.array([x_val, y_val]), u)
            rows.append(
                (
                    "grid",
                    x_val,
                    y_val,
                    sp.axial_log_density(target, point),
                    sp.vmf_log_density(fit.params, point),
                )
            )

    def marker_row(kind: str, point: np.ndarray):
        xy = sp.lambert_project(point, u)
        return (
            kind,
            xy[0],
            xy[1],
            sp.axial_log_density(target, point),
            sp.vmf_log_density(fit.params, point),
        )

    rows.append(marker_row("minimizer", nu_star))
    if eta > eta_c:
        e1, e2 = sp.tangent_basis(u)
        for phi in np.linspace(0.0, 2.0 * math.pi, 200, endpoint=False):
            point = c_star * u + math.sqrt(1.0 - c_star**2) * (
                math.cos(phi) * e1 + math.sin(phi) * e2
            )
            rows.append(marker_row("circle", point))

    header = [
        "experiment: sphere-contours",
        "columns: kind,X,Y,log_p,log_q  (Lambert azimuthal equal-area, centered at the target axis)",
        "kind: grid | minimizer | circle",
        f"grid: {cfg.resolution}x{cfg.resolution} on [-2,2]^2, nodes at radius >= 2 omitted",
    ]
    out = Path(cfg.output_dir)
    _write_csv(out / "contours.csv", header, ["kind", "X", "Y", "log_p", "log_q"], rows)

    marker_xy = sp.lambert_project(nu_star, u)
    summary = {
        "experiment": "sphere-contours",
        "seed": cfg.seed,
        "d": 3,
        "lambda": cfg.lam,
        "eta": eta,
        "kappa0": cfg.kappa0,
        "eta_critical": eta_c,
        "c_star_predicted": c_star,
        "axis": u.tolist(),
        "nu_star": nu_star.tolist(),
        "fitted_latitude": float(nu_star @ u),
        "minimizer_marker": marker_xy.tolist(),
        "minimizer_radius": float(np.linalg.norm(marker_xy)),
        "circle_radius_predicted": math.sqrt(2.0 * (1.0 - c_star)),
        "grid_spacing": spacing,
        "n_omitted_antipodal": omitted,
        "resolution": cfg.resolution,
    }
    _write_json(out / "summary.json", summary)
    return summary


def run_verify_all(cfg: ExperimentConfig) -> dict:
    report = verification.run_all(cfg.seed)
    _write_json(Path(cfg.output_dir) / "verification.json", report)
    return report


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symvi",
        description="Symmetry-induced statistic recovery experiments",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--seed", type=int, default=None,
                        help="RNG seed (default: SYMVI_SEED env var, else 0)")
    parser.add_argument("--out", type=Path, default=Path("symvi-out"),
                        help="output directory for artifact files")
    parser.add_argument("--d", type=int, default=3, help="sphere dimension (>= 3)")
    parser.add_argument("--lambda", dest="lam", type=float, default=1.0,
                        help="linear coefficient of the axial target profile")
    parser.add_argument("--eta", type=float, default=None,
                        help="quadratic coefficient of the axial target profile")
    parser.add_argument("--kappa0", type=float, default=2.5,
                        help="fixed vMF concentration")
    parser.add_argument("--divergence", default="reverse_kl",
                        choices=sorted(dv.GENERATORS),
                        help="generator for the Euclidean experiments")
    parser.add_argument("--resolution", type=int, default=200,
                        help="grid nodes per axis for CSV artifacts")
    parser.add_argument("--threads", type=int, default=1,
                        help="accepted for compatibility; execution is sequential")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("SYMVI_SEED", "0"))
    return ExperimentConfig(
        experiment=args.experiment,
        seed=seed,
        output_dir=args.out,
        resolution=args.resolution,
        d=args.d,
        lam=args.lam,
        eta=args.eta,
        kappa0=args.kappa0,
        divergence=args.divergence,
        threads=args.threads,
    )


RUNNERS = {
    "even-recovery": run_even_recovery,
    "elliptical-recovery": run_elliptical_recovery,
    "sphere-threshold": run_sphere_threshold,
    "sphere-contours": run_sphere_contours,
    "verify-all": run_verify_all,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except InvalidInputError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    try:
        result = RUNNERS[cfg.experiment](cfg)
    except InvalidInputError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except OptimizationFailedError as exc:
        print(f"optimization failed: {exc}", file=sys.stderr)
        return EXIT_OPT_FAILED

    if cfg.experiment == "verify-all":
        n_failed = sum(1 for c in result["checks"] if not c["passed"])
        for c in result["checks"]:
            status = "PASS" if c["passed"] else "FAIL"
            print(f"[{status}] {c['name']}: value={c['value']:.6g} tol={c['tolerance']:.6g}")
        print(f"{result['n_checks'] - n_failed}/{result['n_checks']} checks passed")
        if n_failed:
            return EXIT_VERIFY_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
