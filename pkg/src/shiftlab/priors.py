"""The joint prior on (curve, shift law) and its calibration presets.

A draw picks a frequency cutoff l from a super-exponentially decaying
pmf proportional to exp(-c * l^2 * log^rho(l)), fills frequencies
|k| <= l with centered complex Gaussians of variance xi_n^2, and draws
the shift law from a truncated Dirichlet process. xi_n^2 depends on the
calibration preset: n^{-2/(2s+2)} when the smoothness s is known, and
n^{-1/4} (log n)^{-3/2} for the adaptive choice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .certificates import chi_square_bound
from .fourier import FourierCurve
from .measures import DPConfig, dp_sample

__all__ = [
    "Preset",
    "NonAdaptive",
    "Adaptive",
    "parse_preset",
    "PriorConfig",
    "PriorDraw",
    "lambda_pmf",
    "xi_variance",
    "sample_prior",
    "sieve_indicator",
    "sieve_outside_bound",
]


@dataclass(frozen=True)
class Preset:
    kind: str  # "nonadaptive" | "adaptive"
    s: float | None = None
    zeta: float = 1.5  # adaptive log exponent; the proof allows [3/2, 2)


def NonAdaptive(s):
    s = float(s)
    if s < 1:
        raise ValueError("smoothness s must be >= 1")
    return Preset("nonadaptive", s=s)


def Adaptive(zeta=1.5):
    if not 1.5 <= zeta < 2.0:
        raise ValueError("zeta must lie in [3/2, 2)")
    return Preset("adaptive", zeta=zeta)


def parse_preset(text):
    """CLI names: 'nonadaptive:<s>' or 'adaptive'."""
    text = text.strip().lower()
    if text == "adaptive":
        return Adaptive()
    if text.startswith("nonadaptive:"):
        return NonAdaptive(float(text.split(":", 1)[1]))
    raise ValueError(f"unknown preset {text!r}")


def preset_name(preset):
    if preset.kind == "adaptive":
        return "adaptive"
    return f"nonadaptive:{preset.s:g}"


@dataclass
class PriorConfig:
    rho: float = 1.5
    c_lambda: float = 1.0
    l_max: int = 32
    preset: Preset = field(default_factory=lambda: NonAdaptive(1.0))
    dp: DPConfig = field(default_factory=DPConfig)

    def __post_init__(self):
        if not 1.0 < self.rho < 2.0:
            raise ValueError("rho must lie in (1, 2)")
        if self.c_lambda <= 0:
            raise ValueError("c_lambda must be positive")
        if self.l_max < 1:
            raise ValueError("l_max must be >= 1")


@dataclass
class PriorDraw:
    cutoff: int
    theta: FourierCurve
    g: object  # ShiftMeasure

    def __post_init__(self):
        if self.theta.cutoff != self.cutoff:
            raise ValueError("theta must be confined to the drawn cutoff")


def lambda_pmf(cfg):
    """pmf over cutoffs 1..l_max, proportional to exp(-c l^2 log^rho l).

    log 1 = 0 makes the l = 1 weight proportional to 1; truncation at
    l_max is numerically exact for the default c (tail below 1e-300).
    """
    ells = np.arange(1, cfg.l_max + 1, dtype=float)
    log_w = -cfg.c_lambda * ells**2 * np.log(ells) ** cfg.rho
    w = np.exp(log_w - log_w.max())
    return w / w.sum()


def xi_variance(n, preset):
    """Prior variance xi_n^2 of each active Fourier coefficient."""
    n = int(n)
    if n < 2:
        raise ValueError("xi_variance needs n >= 2 (log n must be positive)")
    if preset.kind == "nonadaptive":
        return float(n ** (-2.0 / (2.0 * preset.s + 2.0)))
    if preset.kind == "adaptive":
        return float(n ** (-0.25) * np.log(n) ** (-preset.zeta))
    raise ValueError(f"unknown preset kind {preset.kind!r}")


def sample_prior(cfg, n, rng):
    """One draw (cutoff, theta, g): cutoff ~ lambda, theta_k ~ N_C(0, xi_n^2)
    for |k| <= cutoff, g from the truncated Dirichlet process."""
    pmf = lambda_pmf(cfg)
    ell = int(rng.choice(np.arange(1, cfg.l_max + 1), p=pmf))
    xi2 = xi_variance(n, cfg.preset)
    dim = 2 * ell + 1
    coeffs = (rng.normal(size=dim) + 1j * rng.normal(size=dim)) * np.sqrt(xi2 / 2.0)
    return PriorDraw(ell, FourierCurve(coeffs), dp_sample(cfg.dp, rng))


def sieve_indicator(draw, k_n):
    """Membership in the sieve: cutoff <= k_n and ||theta||^2 <= 4 k_n + 2."""
    k_n = int(k_n)
    sq_norm = float(np.sum(np.abs(draw.theta.coeffs) ** 2))
    return draw.cutoff <= k_n and sq_norm <= 4.0 * k_n + 2.0


def sieve_outside_bound(cfg, n, k_n):
    """Upper bound on the prior mass outside the sieve: the lambda tail
    beyond k_n plus the chi-square tail of the coefficient norm.

    With w^2 = 4 k_n + 2 and 2(2 k_n + 1) real coefficient components of
    variance xi^2/2 each, the norm event is a chi-square(4 k_n + 2) tail
    at 2 (4 k_n + 2) / xi^2, bounded by the printed concentration formula.
    """
    pmf = lambda_pmf(cfg)
    tail = float(pmf[k_n:].sum()) if k_n < cfg.l_max else 0.0
    xi2 = xi_variance(n, cfg.preset)
    c = 2.0 / xi2 - 1.0
    if c <= 0:
        return 1.0
    return tail + min(1.0, chi_square_bound(4 * k_n + 2, c))
