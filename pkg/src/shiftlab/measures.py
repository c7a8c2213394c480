"""Probability measures on the circle [0, 1) used as shift laws.

Two concrete forms: finite atomic measures (``Discrete``) and piecewise
constant bin densities (``GridDensity``). All separation and merging
logic uses the circle metric (distances mod 1); intervals are half-open
``[lo, lo + eta)`` so that touching intervals never double-count atoms.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from .errors import InfeasibleWithinTolerance, OverlappingIntervals, ParseError

__all__ = [
    "Discrete",
    "GridDensity",
    "ShiftMeasure",
    "DPConfig",
    "circle_dist",
    "dp_sample",
    "eta_merge",
    "moment_match_discretize",
    "bin_mass",
    "trig_moments",
    "as_atoms",
    "sample_shifts",
    "write_measure_csv",
    "read_measure_csv",
]

_MASS_TOL = 1e-12


def circle_dist(a, b):
    """Distance on the circle of circumference 1."""
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) % 1.0
    return np.minimum(d, 1.0 - d)


class Discrete:
    """Atomic measure: sorted locations in [0, 1) with positive weights."""

    __slots__ = ("locations", "weights")

    def __init__(self, locations, weights):
        locs = np.asarray(locations, dtype=float) % 1.0
        wts = np.asarray(weights, dtype=float)
        if locs.shape != wts.shape or locs.ndim != 1 or locs.size == 0:
            raise ValueError("locations and weights must be matching 1-d arrays")
        if np.any(wts <= 0):
            raise ValueError("atom weights must be positive")
        order = np.argsort(locs, kind="stable")
        locs, wts = locs[order], wts[order]
        # coalesce exact duplicates so locations end up strictly sorted
        keep_starts = np.flatnonzero(np.concatenate([[True], np.diff(locs) > 0]))
        if keep_starts.size != locs.size:
            sums = np.add.reduceat(wts, keep_starts)
            locs, wts = locs[keep_starts], sums
        if abs(wts.sum() - 1.0) > _MASS_TOL:
            raise ValueError(f"weights must sum to 1, got {wts.sum()!r}")
        locs.setflags(write=False)
        wts.setflags(write=False)
        self.locations = locs
        self.weights = wts

    @classmethod
    def point_mass(cls, location):
        return cls([location], [1.0])

    @property
    def n_atoms(self):
        return self.locations.size

    def __repr__(self):
        return f"Discrete({self.n_atoms} atoms)"

    def __eq__(self, other):
        if not isinstance(other, Discrete):
            return NotImplemented
        return np.array_equal(self.locations, other.locations) and np.array_equal(
            self.weights, other.weights
        )


class GridDensity:
    """Piecewise-constant density: bin b covers [b/B, (b+1)/B)."""

    __slots__ = ("masses",)

    def __init__(self, masses):
        m = np.asarray(masses, dtype=float)
        if m.ndim != 1 or m.size == 0:
            raise ValueError("masses must be a non-empty 1-d array")
        if np.any(m < 0):
            raise ValueError("bin masses must be non-negative")
        if abs(m.sum() - 1.0) > _MASS_TOL:
            raise ValueError(f"bin masses must sum to 1, got {m.sum()!r}")
        m = m.copy()
        m.setflags(write=False)
        self.masses = m

    @classmethod
    def uniform(cls, bins):
        return cls(np.full(bins, 1.0 / bins))

    @property
    def bins(self):
        return self.masses.size

    @property
    def centers(self):
        b = self.bins
        return (np.arange(b) + 0.5) / b

    def __repr__(self):
        return f"GridDensity(bins={self.bins})"


ShiftMeasure = Union[Discrete, GridDensity]


@dataclass
class DPConfig:
    """Dirichlet-process prior for the shift law.

    base_density must be positive and continuous on [0, 1); it is
    normalized on ``grid_size`` points for both sampling and binning.
    """

    base_density: Callable[[np.ndarray], np.ndarray] = field(
        default=lambda x: np.ones_like(x)
    )
    total_mass: float = 1.0
    truncation: int = 50
    grid_size: int = 4096

    def __post_init__(self):
        if self.total_mass <= 0:
            raise ValueError("total_mass must be positive")
        if self.truncation < 1:
            raise ValueError("truncation must be >= 1")

    def base_cdf_grid(self):
        """(grid points, normalized CDF) for inverse-CDF sampling; cached."""
        cached = getattr(self, "_cdf_cache", None)
        if cached is not None:
            return cached
        x = (np.arange(self.grid_size) + 0.5) / self.grid_size
        dens = np.asarray(self.base_density(x), dtype=float)
        if np.any(dens <= 0):
            raise ValueError("base density must be positive on the grid")
        cdf = np.cumsum(dens)
        self._cdf_cache = (x, cdf / cdf[-1])
        return self._cdf_cache

    def base_bin_probs(self, bins):
        """Normalized base-measure mass of each of ``bins`` equal bins."""
        x, cdf = self.base_cdf_grid()
        if self.grid_size % bins != 0:
            # fall back to midpoint masses when the grids do not nest
            edges = np.linspace(0.0, 1.0, bins + 1)
            idx = np.searchsorted(x, edges[1:-1])
            upper = np.concatenate([cdf[np.maximum(idx - 1, 0)], [1.0]])
            lower = np.concatenate([[0.0], upper[:-1]])
            probs = upper - lower
        else:
            step = self.grid_size // bins
            upper = cdf[step - 1 :: step]
            probs = np.diff(np.concatenate([[0.0], upper]))
        probs = np.maximum(probs, 0.0)
        return probs / probs.sum()


def dp_sample(cfg, rng):
    """Stick-breaking draw, truncated at cfg.truncation atoms.

    Sticks are Beta(1, total_mass); the last stick absorbs the leftover
    mass so the result is exactly normalized. Locations are i.i.d. from
    the base density via inverse CDF on the config grid.
    """
    k = cfg.truncation
    if k == 1:
        weights = np.array([1.0])
    else:
        sticks = rng.beta(1.0, cfg.total_mass, size=k - 1)
        remain = np.concatenate([[1.0], np.cumprod(1.0 - sticks)])
        weights = np.concatenate([sticks, [1.0]]) * remain
    x, cdf = cfg.base_cdf_grid()
    u = rng.random(k)
    locs = x[np.searchsorted(cdf, u)]
    # duplicates on the sampling grid are coalesced by the constructor
    positive = weights > 0
    return Discrete(locs[positive], weights[positive] / weights[positive].sum())


def eta_merge(g, eta):
    """Collapse atoms onto a maximal eta-separated subset of the support.

    The kept set is grown by scanning locations in increasing order
    (an atom is kept when its circle distance to every kept atom is
    >= eta); each removed atom's weight moves to its nearest kept atom,
    ties broken toward the smaller location. Total mass is preserved.
    """
    if not isinstance(g, Discrete):
        raise TypeError("eta_merge expects a Discrete measure")
    eta = float(eta)
    if eta <= 0:
        raise ValueError("eta must be positive")
    locs, wts = g.locations, g.weights
    kept_idx = []
    for i in range(locs.size):
        if all(circle_dist(locs[i], locs[j]) >= eta for j in kept_idx):
            kept_idx.append(i)
    kept_locs = locs[kept_idx]
    new_wts = np.zeros(len(kept_idx))
    for i in range(locs.size):
        d = circle_dist(locs[i], kept_locs)
        # argmin returns the first (smallest-location) minimizer: the tie rule
        new_wts[int(np.argmin(d))] += wts[i]
    return Discrete(kept_locs, new_wts)


def trig_moments(g, r_max):
    """Trigonometric moments c_r = integral exp(i 2 pi r phi) dg(phi), r = 0..r_max."""
    r = np.arange(r_max + 1)
    if isinstance(g, Discrete):
        phases = np.exp(2j * np.pi * np.outer(r, g.locations))
        return phases @ g.weights
    if isinstance(g, GridDensity):
        b = g.bins
        edges = np.arange(b + 1) / b
        out = np.empty(r_max + 1, dtype=complex)
        out[0] = 1.0
        for rr in range(1, r_max + 1):
            # exact integral of exp(i 2 pi r phi) over each bin
            seg = (
                np.exp(2j * np.pi * rr * edges[1:])
                - np.exp(2j * np.pi * rr * edges[:-1])
            ) / (2j * np.pi * rr / b)
            out[rr] = np.sum(g.masses * seg)
        return out
    raise TypeError(f"unsupported measure type {type(g)!r}")


def _moment_matrix(locations, r_max):
    """Rows: [1; Re c_r; Im c_r for r=1..r_max] evaluated at point masses."""
    phases = np.exp(2j * np.pi * np.outer(np.arange(1, r_max + 1), locations))
    return np.vstack([np.ones(locations.size), phases.real, phases.imag])


def _prune_support(locations, weights, r_max, max_atoms):
    """Caratheodory pruning: drop support points without moving the
    constrained moments (null-space steps keep M @ w fixed)."""
    locs = np.asarray(locations, dtype=float)
    w = np.asarray(weights, dtype=float)
    keep = w > 1e-14
    locs, w = locs[keep], w[keep]
    while locs.size > max_atoms:
        m = _moment_matrix(locs, r_max)
        ns = null_space(m, rcond=1e-10)
        if ns.shape[1] == 0:
            break
        v = ns[:, 0]
        if not np.any(v > 0):
            v = -v
        ratios = np.full(v.size, np.inf)
        ratios[v > 0] = w[v > 0] / v[v > 0]
        j = int(np.argmin(ratios))
        w = w - ratios[j] * v
        w[j] = 0.0
        keep = w > 1e-14
        locs, w = locs[keep], w[keep]
    return locs, w / w.sum()


def moment_match_discretize(g, r_max, tol=1e-8):
    """Finite measure matching the trigonometric moments of g up to order r_max.

    Solves a feasibility LP on a location grid (the uniform grid of size
    >= 8 (r_max+1), plus the support of discrete inputs), then prunes the
    solution to at most 2 r_max + 2 atoms and re-verifies the moments by
    direct evaluation.
    """
    r_max = int(r_max)
    if r_max < 0:
        raise ValueError("r_max must be >= 0")
    target = trig_moments(g, r_max)
    grid_n = max(8 * (r_max + 1), 64)
    grid = np.arange(grid_n) / grid_n
    if isinstance(g, Discrete):
        grid = np.unique(np.concatenate([grid, g.locations]))

    if r_max == 0:
        return Discrete([grid[0]], [1.0])

    m = _moment_matrix(grid, r_max)
    b = np.concatenate([[1.0], target[1:].real, target[1:].imag])
    n_var = grid.size
    n_mom = 2 * r_max
    # variables: weights w then the sup-norm slack t; minimize t
    cost = np.zeros(n_var + 1)
    cost[-1] = 1.0
    a_eq = np.zeros((1, n_var + 1))
    a_eq[0, :n_var] = 1.0
    moment_rows = m[1:]
    a_ub = np.zeros((2 * n_mom, n_var + 1))
    a_ub[:n_mom, :n_var] = moment_rows
    a_ub[:n_mom, -1] = -1.0
    a_ub[n_mom:, :n_var] = -moment_rows
    a_ub[n_mom:, -1] = -1.0
    b_ub = np.concatenate([b[1:], -b[1:]])
    res = linprog(
        cost,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=[1.0],
        bounds=[(0, None)] * n_var + [(0, None)],
        method="highs",
    )
    if not res.success or res.x[-1] > tol:
        raise InfeasibleWithinTolerance(
            f"moment matching infeasible within tol={tol} (slack="
            f"{res.x[-1] if res.success else 'n/a'}); refine the grid"
        )
    locs, wts = _prune_support(grid, res.x[:n_var], r_max, 2 * r_max + 1)
    result = Discrete(locs, wts)
    achieved = trig_moments(result, r_max)
    err = np.max(np.abs(achieved - target))
    if err > tol:
        raise InfeasibleWithinTolerance(
            f"pruned solution misses moments by {err:.3e} > tol={tol}"
        )
    return result


def _interval_starts(centers, eta):
    centers = np.asarray(centers, dtype=float) % 1.0
    if np.any(np.diff(np.sort(centers)) == 0):
        raise OverlappingIntervals("duplicate interval centers")
    order = np.sort(centers)
    if centers.size > 1:
        gaps = np.diff(np.concatenate([order, [order[0] + 1.0]]))
        if np.any(gaps < eta - 1e-15):
            raise OverlappingIntervals(
                f"centers closer than eta={eta} on the circle"
            )
    if eta > 1.0 and centers.size > 1:
        raise OverlappingIntervals("intervals of length > 1 cannot be disjoint")
    return (centers - eta / 2.0) % 1.0


def bin_mass(g, centers, eta):
    """Masses of the half-open intervals [c - eta/2, c + eta/2) on the circle.

    Centers must be pairwise >= eta apart (guaranteed for eta-separated
    supports); otherwise OverlappingIntervals is raised.
    """
    eta = float(eta)
    if eta <= 0:
        raise ValueError("eta must be positive")
    starts = _interval_starts(centers, eta)
    eta_eff = min(eta, 1.0)
    if isinstance(g, Discrete):
        rel = (g.locations[None, :] - starts[:, None]) % 1.0
        inside = rel < eta_eff
        return inside @ g.weights
    if isinstance(g, GridDensity):
        b = g.bins
        density = g.masses * b  # per unit length on each bin
        out = np.empty(starts.size)
        for i, lo in enumerate(starts):
            out[i] = _grid_interval_mass(density, b, lo, eta_eff)
        return out
    raise TypeError(f"unsupported measure type {type(g)!r}")


def _grid_interval_mass(density, bins, lo, length):
    """Integral of a piecewise-constant circle density over [lo, lo+length)."""
    total = 0.0
    remaining = length
    pos = lo % 1.0
    while remaining > 1e-16:
        b = min(int(pos * bins), bins - 1)
        bin_end = (b + 1) / bins
        seg = min(remaining, bin_end - pos)
        if seg <= 0:  # guard against fp landing exactly on an edge
            pos = bin_end % 1.0
            continue
        total += density[b] * seg
        remaining -= seg
        pos = bin_end % 1.0
    return total


def as_atoms(g):
    """View any shift measure as a Discrete one (grid bins -> bin centers)."""
    if isinstance(g, Discrete):
        return g
    if isinstance(g, GridDensity):
        positive = g.masses > 0
        return Discrete(g.centers[positive], g.masses[positive] / g.masses[positive].sum())
    raise TypeError(f"unsupported measure type {type(g)!r}")


def sample_shifts(g, size, rng):
    """Draw i.i.d. shifts from g (uniform within bins for grid densities)."""
    if isinstance(g, Discrete):
        idx = rng.choice(g.n_atoms, size=size, p=g.weights)
        return g.locations[idx]
    if isinstance(g, GridDensity):
        idx = rng.choice(g.bins, size=size, p=g.masses)
        return (idx + rng.random(size)) / g.bins
    raise TypeError(f"unsupported measure type {type(g)!r}")


def write_measure_csv(g, path):
    """Discrete: location,weight rows. Grid: bin_index,mass with a # bins= line."""
    with open(path, "w", newline="") as fh:
        if isinstance(g, Discrete):
            writer = csv.writer(fh)
            writer.writerow(["location", "weight"])
            for loc, w in zip(g.locations, g.weights):
                writer.writerow([repr(float(loc)), repr(float(w))])
        elif isinstance(g, GridDensity):
            fh.write(f"# bins={g.bins}\n")
            writer = csv.writer(fh)
            writer.writerow(["bin_index", "mass"])
            for i, mass in enumerate(g.masses):
                writer.writerow([i, repr(float(mass))])
        else:
            raise TypeError(f"unsupported measure type {type(g)!r}")


def read_measure_csv(path):
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if first.startswith("# bins="):
            bins = int(first.split("=", 1)[1])
            header = fh.readline().strip()
            if header != "bin_index,mass":
                raise ParseError("expected header bin_index,mass", 2)
            masses = np.zeros(bins)
            for lineno, row in enumerate(csv.reader(fh), start=3):
                if not row:
                    continue
                try:
                    masses[int(row[0])] = float(row[1])
                except (IndexError, ValueError) as exc:
                    raise ParseError(f"bad grid row {row!r}", lineno) from exc
            return GridDensity(masses)
        if first != "location,weight":
            raise ParseError("expected header location,weight or # bins=", 1)
        locs, wts = [], []
        for lineno, row in enumerate(csv.reader(fh), start=2):
            if not row:
                continue
            try:
                locs.append(float(row[0]))
                wts.append(float(row[1]))
            except (IndexError, ValueError) as exc:
                raise ParseError(f"bad atom row {row!r}", lineno) from exc
        return Discrete(locs, wts)
