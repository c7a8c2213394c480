"""Desk-scale contraction study: simulate, fit, measure posterior radii.

For each sample size in the grid and each replicate the study simulates a
dataset from a fixed truth, runs the posterior chain, and records the
median Hellinger distance between posterior-sample laws and the true law.
The emitted report places the radii next to the reference rate curve
n^{-s/(2s+2)} log n and the fitted log-log slope of the per-n medians
(the asymptotic reference slope is -s/(2s+2); the constant in front is
not pinned by the theory, so trend and slope are what the study checks).
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ParseError
from .fourier import FourierCurve
from .measures import Discrete, DPConfig
from .mcmc import McmcConfig, posterior_radius, run_chain
from .model import SimConfig, simulate
from .priors import NonAdaptive, Preset, PriorConfig

__all__ = [
    "StudyConfig",
    "StudyResult",
    "default_truth",
    "reference_epsilon",
    "run_contraction_study",
    "emit_report",
    "read_results_csv",
]

RESULTS_HEADER = ["n", "replicate", "radius", "epsilon_ref"]
SUMMARY_HEADER = ["n", "median_radius", "epsilon_ref"]


def default_truth(s=1.0, scale=1.5):
    """Three active frequencies with amplitudes scale * l^{-(s+1)}, and a
    two-atom shift law at 0.15/0.6 with weights 0.4/0.6."""
    f0 = FourierCurve.from_dict(
        {ell: scale * ell ** (-(s + 1.0)) for ell in (1, 2, 3)}
    )
    g0 = Discrete([0.15, 0.6], [0.4, 0.6])
    return f0, g0


def reference_epsilon(n, s):
    return float(n ** (-s / (2.0 * s + 2.0)) * np.log(n))


@dataclass
class StudyConfig:
    f0: FourierCurve
    g0: object
    s: float = 1.0
    n_grid: tuple = (50, 200, 800)
    preset: Preset = field(default_factory=lambda: NonAdaptive(1.0))
    replicates: int = 3
    mcmc: McmcConfig = field(
        default_factory=lambda: McmcConfig(
            iterations=2500, burn_in=500, thin=40, b_grid=256, birth_death_rate=0.3
        )
    )
    l_max: int = 6
    rho: float = 1.5
    c_lambda: float = 1.0
    dp_mass: float = 1.0
    divergence_n: int = 2000
    radius_quantile: float = 0.5
    seed: int = 1234

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("n_grid must be strictly increasing")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        self.n_grid = grid

    def prior(self):
        return PriorConfig(
            rho=self.rho,
            c_lambda=self.c_lambda,
            l_max=self.l_max,
            preset=self.preset,
            dp=DPConfig(total_mass=self.dp_mass),
        )


def default_study_config(seed=1234, **overrides):
    f0, g0 = default_truth(overrides.get("s", 1.0))
    return StudyConfig(f0=f0, g0=g0, seed=seed, **overrides)


@dataclass
class StudyResult:
    rows: list  # dicts with keys n, replicate, radius, epsilon_ref
    medians: dict  # n -> median radius
    slope: float
    reference_slope: float

    def radii(self, n):
        return [r["radius"] for r in self.rows if r["n"] == n]


def _derived_seed(master, *path):
    return int(np.random.SeedSequence([int(master), *map(int, path)]).generate_state(1)[0])


def _fit_slope(medians):
    ns = np.array(sorted(medians), dtype=float)
    vals = np.array([medians[int(n)] for n in ns])
    coeffs = np.polyfit(np.log(ns), np.log(vals), 1)
    return float(coeffs[0])


def run_contraction_study(cfg, out_dir=None, progress=None):
    """Run the full grid; flushes one CSV row per finished replicate when
    out_dir is given (contraction_partial.csv), then returns the result."""
    l_obs = max(cfg.l_max, cfg.f0.cutoff)
    prior = cfg.prior()
    rows = []
    partial_path = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        partial_path = os.path.join(out_dir, "contraction_partial.csv")
        with open(partial_path, "w", newline="") as fh:
            csv.writer(fh).writerow(RESULTS_HEADER)
    for n in cfg.n_grid:
        for rep in range(cfg.replicates):
            sim_seed = _derived_seed(cfg.seed, n, rep, 0)
            chain_seed = _derived_seed(cfg.seed, n, rep, 1)
            radius_seed = _derived_seed(cfg.seed, n, rep, 2)
            data = simulate(
                SimConfig(f0=cfg.f0, g0=cfg.g0, n=n, l_obs=l_obs), sim_seed
            )
            chain_cfg = replace(cfg.mcmc, seed=chain_seed)
            result = run_chain(data, prior, n, chain_cfg)
            radius = posterior_radius(
                result.samples,
                (cfg.f0, cfg.g0),
                q=cfg.radius_quantile,
                n_mc=cfg.divergence_n,
                rng=np.random.default_rng(radius_seed),
            )
            row = {
                "n": int(n),
                "replicate": int(rep),
                "radius": float(radius),
                "epsilon_ref": reference_epsilon(n, cfg.s),
            }
            rows.append(row)
            if partial_path is not None:
                with open(partial_path, "a", newline="") as fh:
                    csv.writer(fh).writerow(
                        [row["n"], row["replicate"], repr(row["radius"]), repr(row["epsilon_ref"])]
                    )
            if progress is not None:
                progress(row)
    medians = {
        int(n): float(np.median([r["radius"] for r in rows if r["n"] == n]))
        for n in cfg.n_grid
    }
    slope = _fit_slope(medians)
    return StudyResult(
        rows=rows,
        medians=medians,
        slope=slope,
        reference_slope=-cfg.s / (2.0 * cfg.s + 2.0),
    )


def emit_report(result, formats=("csv", "svg"), out_dir="."):
    """Write the results CSV (always) and optionally the log-log SVG.

    Files are byte-identical across runs on identical inputs: values are
    serialized with repr and the SVG is assembled from fixed templates.
    """
    if not result.rows:
        raise ValueError("emit_report: empty results")
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    csv_path = os.path.join(out_dir, "contraction.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for row in result.rows:
            writer.writerow(
                [row["n"], row["replicate"], repr(row["radius"]), repr(row["epsilon_ref"])]
            )
    paths.append(csv_path)
    summary_path = os.path.join(out_dir, "contraction_summary.csv")
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_HEADER)
        for n in sorted(result.medians):
            eps = next(r["epsilon_ref"] for r in result.rows if r["n"] == n)
            writer.writerow([n, repr(result.medians[n]), repr(eps)])
        fh.write(f"# fitted_log_log_slope={result.slope!r}\n")
        fh.write(f"# reference_slope={result.reference_slope!r}\n")
    paths.append(summary_path)
    if "svg" in formats:
        svg_path = os.path.join(out_dir, "contraction.svg")
        with open(svg_path, "w") as fh:
            fh.write(_render_svg(result))
        paths.append(svg_path)
    return paths


def read_results_csv(path):
    """Rebuild a StudyResult from an emitted contraction.csv."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if lineno == 1:
                if row != RESULTS_HEADER:
                    raise ParseError(
                        f"expected header {','.join(RESULTS_HEADER)}", lineno
                    )
                continue
            if not row or row[0].startswith("#"):
                continue
            try:
                rows.append(
                    {
                        "n": int(row[0]),
                        "replicate": int(row[1]),
                        "radius": float(row[2]),
                        "epsilon_ref": float(row[3]),
                    }
                )
            except (IndexError, ValueError) as exc:
                raise ParseError(f"bad results row {row!r}", lineno) from exc
    if not rows:
        raise ParseError("results file holds no rows", 1)
    ns = sorted({r["n"] for r in rows})
    medians = {
        n: float(np.median([r["radius"] for r in rows if r["n"] == n])) for n in ns
    }
    slope = _fit_slope(medians) if len(ns) > 1 else float("nan")
    return StudyResult(rows=rows, medians=medians, slope=slope, reference_slope=float("nan"))


# --- minimal deterministic SVG -------------------------------------------

_SVG_W, _SVG_H = 480, 360
_MARGIN = 54


def _render_svg(result):
    ns = sorted(result.medians)
    xs = np.log10(np.array(ns, dtype=float))
    ys = np.log10(np.array([result.medians[n] for n in ns]))
    eps = np.array(
        [next(r["epsilon_ref"] for r in result.rows if r["n"] == n) for n in ns]
    )
    # reference curve scaled to pass through the first median point
    ref = np.log10(eps * (result.medians[ns[0]] / eps[0]))
    all_y = np.concatenate([ys, ref])
    x_lo, x_hi = xs.min(), xs.max()
    y_lo, y_hi = all_y.min(), all_y.max()
    x_pad = 0.08 * max(x_hi - x_lo, 1e-9)
    y_pad = 0.12 * max(y_hi - y_lo, 1e-9)
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def sx(v):
        return _MARGIN + (v - x_lo) / (x_hi - x_lo) * (_SVG_W - 2 * _MARGIN)

    def sy(v):
        return _SVG_H - _MARGIN - (v - y_lo) / (y_hi - y_lo) * (_SVG_H - 2 * _MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{_SVG_W - 2 * _MARGIN}" '
        f'height="{_SVG_H - 2 * _MARGIN}" fill="none" stroke="black"/>',
    ]
    ref_pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ref))
    parts.append(
        f'<polyline points="{ref_pts}" fill="none" stroke="#888" '
        'stroke-dasharray="5,4" stroke-width="1.5"/>'
    )
    med_pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    parts.append(
        f'<polyline points="{med_pts}" fill="none" stroke="#0057b7" stroke-width="2"/>'
    )
    for x, y, n in zip(xs, ys, ns):
        parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="4" fill="#0057b7"/>')
        parts.append(
            f'<text x="{sx(x):.2f}" y="{_SVG_H - _MARGIN + 18}" font-size="12" '
            f'text-anchor="middle">n={n}</text>'
        )
    parts.append(
        f'<text x="{_SVG_W / 2:.0f}" y="24" font-size="13" text-anchor="middle">'
        "median posterior Hellinger radius vs n (log-log); dashed: scaled "
        "reference rate</text>"
    )
    parts.append(
        f'<text x="{_SVG_W / 2:.0f}" y="40" font-size="12" text-anchor="middle">'
        f"fitted slope {result.slope:.3f}, reference {result.reference_slope:.3f}</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
