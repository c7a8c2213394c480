"""The shift-mixture observation model in the Fourier domain.

Each observation is the coefficient vector of a noisy randomly translated
copy of a template curve: z_j = theta0 . tau_j + noise, where the dot is
the coefficient rotation action and the noise is i.i.d. standard complex
Gaussian per coefficient (real and imaginary parts of variance 1/2).
Marginally z_j follows a location mixture of standard complex Gaussians
with means theta0 . phi, phi ~ g0. Because every model in play is
band-limited, log-likelihood ratios between trajectory laws reduce
exactly to ratios of these finite-dimensional mixture densities:
coefficients above the common cutoff are parameter-free noise and cancel.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ._kernels import mixture_logpdf
from .errors import DimensionMismatch, ParseError
from .fourier import FourierCurve
from .measures import Discrete, as_atoms, sample_shifts

__all__ = [
    "SimConfig",
    "Dataset",
    "simulate",
    "rotated_means",
    "mixture_log_density",
    "girsanov_log_ratio",
    "sample_observations",
    "write_dataset_csv",
    "read_dataset_csv",
]


@dataclass
class SimConfig:
    f0: FourierCurve
    g0: object  # ShiftMeasure
    n: int
    l_obs: int
    noise_scale: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.l_obs < self.f0.cutoff:
            raise ValueError("l_obs must be at least the cutoff of f0")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be non-negative")


@dataclass
class Dataset:
    """n rows of complex coefficients on frequencies -l_obs..l_obs."""

    coeffs: np.ndarray
    oracle_shifts: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.ndim != 2 or self.coeffs.shape[1] % 2 != 1:
            raise ValueError("coeffs must be (n, 2*l_obs+1)")
        if self.oracle_shifts is not None:
            self.oracle_shifts = np.asarray(self.oracle_shifts, dtype=float)
            if self.oracle_shifts.shape != (self.coeffs.shape[0],):
                raise ValueError("oracle_shifts must have one entry per observation")

    @property
    def n(self):
        return self.coeffs.shape[0]

    @property
    def l_obs(self):
        return (self.coeffs.shape[1] - 1) // 2


def _complex_std_noise(rng, shape):
    # standard complex Gaussian: each real part and imaginary part ~ N(0, 1/2)
    return (rng.normal(size=shape) + 1j * rng.normal(size=shape)) * np.sqrt(0.5)


def simulate(cfg, seed_or_rng):
    """Draw a Dataset from the model: tau_j ~ g0, z_j = theta0 . tau_j + noise.

    Accepts an integer seed (recorded on the Dataset and in its CSV
    metadata) or a Generator (seed recorded as None).
    """
    if isinstance(seed_or_rng, (int, np.integer)):
        seed = int(seed_or_rng)
        rng = np.random.default_rng(seed)
    else:
        seed = None
        rng = seed_or_rng
    taus = sample_shifts(cfg.g0, cfg.n, rng)
    theta = cfg.f0.pad_to(cfg.l_obs)
    freqs = theta.frequencies
    means = theta.coeffs[None, :] * np.exp(
        -2j * np.pi * np.outer(taus, freqs)
    )
    noise = _complex_std_noise(rng, (cfg.n, 2 * cfg.l_obs + 1))
    return Dataset(means + cfg.noise_scale * noise, oracle_shifts=taus, seed=seed)


def rotated_means(theta, phis):
    """Matrix of theta . phi for each phi: shape (len(phis), 2*cutoff+1)."""
    phis = np.asarray(phis, dtype=float)
    freqs = theta.frequencies
    return theta.coeffs[None, :] * np.exp(-2j * np.pi * np.outer(phis, freqs))


def mixture_log_density(theta, g, z):
    """log p_{theta,g}(z) with log-sum-exp stabilization.

    g may be Discrete or GridDensity (bins become atoms at bin centers).
    z is one coefficient vector of dimension 2*cutoff(theta)+1, or a
    matrix of such rows; returns a float or a vector accordingly.
    """
    atoms = as_atoms(g)
    z_arr = np.asarray(z, dtype=np.complex128)
    single = z_arr.ndim == 1
    if single:
        z_arr = z_arr[None, :]
    if z_arr.shape[1] != theta.dim:
        raise DimensionMismatch(
            f"z has dimension {z_arr.shape[1]}, model has {theta.dim}"
        )
    means = rotated_means(theta, atoms.locations)
    out = mixture_logpdf(z_arr, means, np.log(atoms.weights))
    return float(out[0]) if single else out


def _pad_to_dim(curve, dim):
    cutoff = (dim - 1) // 2
    if curve.cutoff > cutoff:
        raise DimensionMismatch(
            f"curve cutoff {curve.cutoff} exceeds evaluation cutoff {cutoff}"
        )
    return curve.pad_to(cutoff)


def girsanov_log_ratio(f, g, f0, g0, y):
    """log dP_{f,g}/dP_{f0,g0} evaluated on coefficient vector(s) y.

    Exact for band-limited models: frequencies above the common cutoff
    carry parameter-free noise, so the trajectory-level ratio equals the
    finite-dimensional mixture density ratio. Curves are zero-padded to
    the dimension of y; a curve wider than y raises DimensionMismatch.
    """
    y_arr = np.asarray(y, dtype=np.complex128)
    dim = y_arr.shape[-1]
    return mixture_log_density(_pad_to_dim(f, dim), g, y_arr) - mixture_log_density(
        _pad_to_dim(f0, dim), g0, y_arr
    )


def sample_observations(theta, g, size, rng, l_obs=None):
    """Draw coefficient vectors from P_{theta,g} at cutoff l_obs (default:
    cutoff of theta)."""
    if l_obs is None:
        l_obs = theta.cutoff
    cfg = SimConfig(f0=theta, g0=g, n=size, l_obs=l_obs)
    return simulate(cfg, rng).coeffs


def write_dataset_csv(ds, path, shifts_path=None):
    """Header obs,freq,re,im plus a `# seed=` metadata line; optional
    sidecar obs,shift with the oracle shifts."""
    l_obs = ds.l_obs
    with open(path, "w", newline="") as fh:
        fh.write(f"# seed={ds.seed if ds.seed is not None else 'none'}\n")
        writer = csv.writer(fh)
        writer.writerow(["obs", "freq", "re", "im"])
        for j in range(ds.n):
            for i, k in enumerate(range(-l_obs, l_obs + 1)):
                c = ds.coeffs[j, i]
                writer.writerow([j, k, repr(float(c.real)), repr(float(c.imag))])
    if shifts_path is not None:
        if ds.oracle_shifts is None:
            raise ValueError("dataset has no oracle shifts to export")
        with open(shifts_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["obs", "shift"])
            for j, tau in enumerate(ds.oracle_shifts):
                writer.writerow([j, repr(float(tau))])


def read_dataset_csv(path, shifts_path=None):
    seed = None
    rows = []
    with open(path, newline="") as fh:
        lineno = 0
        for line in fh:
            lineno += 1
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("# seed="):
                    val = line.split("=", 1)[1]
                    seed = None if val == "none" else int(val)
                continue
            if line == "obs,freq,re,im":
                continue
            parts = line.split(",")
            try:
                rows.append(
                    (int(parts[0]), int(parts[1]), float(parts[2]), float(parts[3]))
                )
            except (IndexError, ValueError) as exc:
                raise ParseError(f"bad dataset row {line!r}", lineno) from exc
    if not rows:
        raise ParseError("dataset file holds no coefficient rows", 1)
    n = max(r[0] for r in rows) + 1
    l_obs = max(abs(r[1]) for r in rows)
    coeffs = np.zeros((n, 2 * l_obs + 1), dtype=np.complex128)
    for obs, freq, re, im in rows:
        coeffs[obs, freq + l_obs] = complex(re, im)
    shifts = None
    if shifts_path is not None:
        shifts = np.zeros(n)
        with open(shifts_path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if lineno == 1:
                    if row != ["obs", "shift"]:
                        raise ParseError("expected header obs,shift", lineno)
                    continue
                if not row:
                    continue
                try:
                    shifts[int(row[0])] = float(row[1])
                except (IndexError, ValueError) as exc:
                    raise ParseError(f"bad shift row {row!r}", lineno) from exc
    return Dataset(coeffs, oracle_shifts=shifts, seed=seed)
