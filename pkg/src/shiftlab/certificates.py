"""Numerically audited constructions from the model's complexity analysis.

Each certificate builds an explicit object (a Hellinger bracket family
for the rotation orbit of a curve, a tail bound, a ball-mass estimate)
and then checks the claimed inequality by direct evaluation or Monte
Carlo, reporting quantity/bound/margin rows instead of trusting the
asymptotics. Failures are reported, never raised.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from math import ceil, log, pi, sqrt

import numpy as np

from .divergences import mc_all_divergences, mc_divergence
from .fourier import H1, FourierCurve, norm, project
from .measures import Discrete, bin_mass, eta_merge

__all__ = [
    "BracketFamily",
    "BracketReport",
    "build_brackets",
    "bracket_hellinger_width",
    "verify_bracket",
    "chi_square_bound",
    "rice_tail_experiment",
    "e_bounds_audit",
    "dirichlet_ball_mass",
    "CertRow",
    "write_certificates_csv",
]


@dataclass
class CertRow:
    check: str
    quantity: float
    bound: float
    margin: float
    passed: bool


def write_certificates_csv(rows, path):
    """One row per check: check,quantity,bound,margin,pass."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["check", "quantity", "bound", "margin", "pass"])
        for r in rows:
            writer.writerow(
                [r.check, repr(r.quantity), repr(r.bound), repr(r.margin), int(r.passed)]
            )


# ---------------------------------------------------------------------------
# Bracket families for the rotation orbit {gamma_{theta . phi} : phi in [0,1)}
# ---------------------------------------------------------------------------


@dataclass
class BracketFamily:
    """K brackets [l_i, u_i] covering the rotation orbit of theta.

    Cell i covers phi in [phi_lo[i], phi_lo[i] + 1/K); the lower bracket
    is (1+delta)^{-1} times a Gaussian at theta . phi_lo[i] with
    covariance scale (1+delta)^{-alpha}, the upper is (1+delta) times one
    with scale (1+delta)^{alpha}, alpha = 1/(2p), delta = eps/sqrt(2).
    """

    theta: FourierCurve
    eps: float
    delta: float
    alpha: float
    k: int
    phi_lo: np.ndarray

    @property
    def p(self):
        return self.theta.dim


@dataclass
class BracketReport:
    valid: bool
    max_hellinger_width: float
    envelope_ok: bool
    width_ok: bool
    n_envelope_violations: int
    envelope_bound: float  # K envelope of the construction, for reference


def envelope_bracket_count(theta, eps):
    """The construction's count envelope 4 pi sqrt(2p) |theta|_H1 / eps."""
    p = theta.dim
    return 4.0 * pi * sqrt(2.0 * p) * norm(theta, H1) / eps


def build_brackets(theta, eps):
    """Explicit bracket family with Hellinger width <= eps per bracket.

    The cell width uses the construction's bound with an explicit 1/2
    safety factor standing in for its vanishing correction term:
    Delta_phi^2 = eps^2 / (64 pi^2 p |theta|_H1^2), so K is about
    sqrt(2) times the count envelope. Requires delta = eps/sqrt(2)
    <= 0.1, the regime where the safety factor provably absorbs the
    dropped terms (verify_bracket re-checks everything anyway).

    A curve with |theta|_H1 = 0 is rotation invariant (only frequency 0
    survives), so the family degenerates to a single bracket.
    """
    eps = float(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    delta = eps / sqrt(2.0)
    # small-width regime: both audits hold with margin for delta <= 0.15
    # (width: 2(1-BC) <= 2(1-sqrt(1+d)e^{-d/2}) <= d^2/2 there; envelope:
    # d/log(1+d) <= sqrt(2) up to delta ~ 0.9)
    if delta > 0.15 + 1e-12:
        raise ValueError(f"eps={eps} outside the small-width regime (delta <= 0.15)")
    p = theta.dim
    h1 = norm(theta, H1)
    if h1 == 0.0:
        k = 1
    else:
        dphi_sq = eps**2 / (64.0 * pi**2 * p * h1**2)
        k = int(ceil(1.0 / sqrt(dphi_sq)))
    return BracketFamily(
        theta=theta,
        eps=eps,
        delta=delta,
        alpha=1.0 / (2.0 * p),
        k=k,
        phi_lo=np.arange(k) / k,
    )


def bracket_hellinger_width(p, delta):
    """Closed form d_H(l_i, u_i) = sqrt(delta^2 + 2 [1 - 2^p sqrt(1+delta)
    / (1 + (1+delta)^{1/p})^p]), computed in logs for stability."""
    log_bc = p * log(2.0) + 0.5 * np.log1p(delta) - p * np.log1p((1.0 + delta) ** (1.0 / p))
    return sqrt(delta**2 + 2.0 * (1.0 - np.exp(log_bc)))


def verify_bracket(fam, n_phi=16, n_z=2000, rng=None):
    """Audit the family: sampled envelope check l_i <= gamma_{theta.phi} <= u_i
    and the closed-form Hellinger width check per bracket.

    The envelope is tested at n_phi evenly spaced phi per cell (both cell
    endpoints included) against n_z standard complex Gaussian draws
    recentered at theta . phi; working with w = z - theta . phi reduces
    both envelope inequalities to quadratic forms in (w, d) with
    d = theta . phi - theta . phi_lo, which is what gets evaluated.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    p = fam.p
    delta = fam.delta
    a = (1.0 + delta) ** fam.alpha
    log1pd = np.log1p(delta)
    pa = fam.p * fam.alpha
    w = (rng.normal(size=(n_z, p)) + 1j * rng.normal(size=(n_z, p))) * sqrt(0.5)
    w_sq = np.einsum("ij,ij->i", w.real, w.real) + np.einsum(
        "ij,ij->i", w.imag, w.imag
    )
    freqs = fam.theta.frequencies.astype(float)
    theta_c = fam.theta.coeffs
    cell = 1.0 / fam.k
    offsets = np.linspace(0.0, cell, n_phi)
    violations = 0
    chunk = max(1, 4_000_000 // (n_z * n_phi))
    for lo in range(0, fam.k, chunk):
        cells = fam.phi_lo[lo : lo + chunk]
        phis = cells[:, None] + offsets[None, :]  # (c, n_phi)
        # d = theta . phi - theta . phi_lo, flattened over (cell, phi)
        rot_phi = np.exp(-2j * np.pi * phis[..., None] * freqs[None, None, :])
        rot_lo = np.exp(-2j * np.pi * cells[:, None, None] * freqs[None, None, :])
        d = (theta_c[None, None, :] * (rot_phi - rot_lo)).reshape(-1, p)
        d_sq = np.einsum("ij,ij->i", d.real, d.real) + np.einsum(
            "ij,ij->i", d.imag, d.imag
        )
        cross = 2.0 * (w @ d.conj().T).real  # (n_z, cells*n_phi)
        wd_sq = w_sq[:, None] + cross + d_sq[None, :]
        # lower: (pa - 1) log(1+delta) - a ||w+d||^2 + ||w||^2 <= 0
        low = (pa - 1.0) * log1pd - a * wd_sq + w_sq[:, None]
        # upper: ||w+d||^2 / a - ||w||^2 - (1 - pa) log(1+delta) <= 0
        upp = wd_sq / a - w_sq[:, None] - (1.0 - pa) * log1pd
        violations += int(np.count_nonzero(low > 1e-10))
        violations += int(np.count_nonzero(upp > 1e-10))
    width = bracket_hellinger_width(p, delta)
    envelope_ok = violations == 0
    width_ok = width <= fam.eps + 1e-12
    return BracketReport(
        valid=envelope_ok and width_ok,
        max_hellinger_width=float(width),
        envelope_ok=envelope_ok,
        width_ok=width_ok,
        n_envelope_violations=violations,
        envelope_bound=envelope_bracket_count(fam.theta, fam.eps),
    )


# ---------------------------------------------------------------------------
# Printed tail bounds
# ---------------------------------------------------------------------------


def chi_square_bound(k, c):
    """The printed chi-square concentration bound for P(chi_k^2 >= (1+c) k):
    (1 / (c sqrt(2 pi))) exp(-(k/2)(c - log(1+c)) - (1/2) log k).

    Evaluated exactly as printed; at small k the true tail can exceed it,
    so this is audit material, not an assertion.
    """
    k = int(k)
    if k < 1:
        raise ValueError("k must be >= 1")
    c = float(c)
    if c <= 0:
        raise ValueError("c must be positive")
    exponent = -(k / 2.0) * (c - np.log1p(c)) - 0.5 * log(k)
    return float(np.exp(exponent) / (c * sqrt(2.0 * pi)))


def rice_tail_experiment(u, t_grid, n_grid=512, n_mc=100_000, rng=None):
    """Empirical tail of sup_alpha Re<u shifted by alpha, dW> vs the Rice bound.

    The supremum field is X(alpha)/2 with X(alpha) = 2 Re sum_k
    conj(theta_k(u)) e^{i 2 pi k alpha} Z_k for i.i.d. standard complex
    Z_k, evaluated on an n_grid alpha-grid. The tabulated bound is
    (|u'| / (2 pi |u|)) exp(-t^2 / |u|^2) with |u'| = 2 pi |u|_H1.

    Returns a list of dict rows {t, empirical, bound}.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    l2 = norm(u)
    if l2 == 0.0:
        raise ValueError("u must be nonzero")
    h1 = norm(u, H1)
    alphas = np.arange(n_grid) / n_grid
    phase = np.exp(2j * np.pi * np.outer(u.frequencies.astype(float), alphas))
    proj = u.coeffs.conj()[:, None] * phase  # (p, n_grid)
    t_arr = np.asarray(t_grid, dtype=float)
    counts = np.zeros(t_arr.size, dtype=np.int64)
    chunk = max(1, 8_000_000 // n_grid)
    done = 0
    while done < n_mc:
        m = min(chunk, n_mc - done)
        z = (rng.normal(size=(m, u.dim)) + 1j * rng.normal(size=(m, u.dim))) * sqrt(0.5)
        sup = (z @ proj).real.max(axis=1)
        counts += (sup[:, None] > t_arr[None, :]).sum(axis=0)
        done += m
    emp = counts / n_mc
    bound = (h1 / l2) * np.exp(-(t_arr**2) / l2**2)
    return [
        {"t": float(t), "empirical": float(e), "bound": float(b)}
        for t, e, b in zip(t_arr, emp, bound)
    ]


# ---------------------------------------------------------------------------
# Hellinger decomposition audits
# ---------------------------------------------------------------------------


def _random_measure(rng, n_atoms=3):
    locs = rng.random(n_atoms)
    wts = rng.dirichlet(np.ones(n_atoms))
    keep = wts > 1e-9
    return Discrete(locs[keep], wts[keep] / wts[keep].sum())


def _three_sigma_row(check, value, se, bound):
    margin = bound + 3.0 * se - value
    return CertRow(check, float(value), float(bound), float(margin), margin >= 0)


def e_bounds_audit(f0, g0, ell_n, n_mc=200_000, rng=None):
    """Monte-Carlo audit of the Hellinger decomposition bounds.

    Three rows: the projection term (distance to the band-limited
    truncation is at most sqrt(2) times the L2 tail), the curve term
    (distance between two curves under a common shift law is at most
    2^{1/4} sqrt of their L2 distance), and the separated-mixture term
    (squared distance between an eta-separated finite shift law and a
    perturbation is at most sqrt(pi/2) |theta|_H1 eta plus twice the
    binned mass discrepancy). Random ingredients come from rng; each
    inequality is asserted up to 3 Monte-Carlo standard errors.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    rows = []

    # truncation term
    f0_proj, tail = project(f0, ell_n)
    est = mc_divergence(
        "hellinger", (f0, g0), (f0_proj.pad_to(f0.cutoff), g0), n_mc, rng
    )
    rows.append(
        _three_sigma_row("e1_truncation", est.value, est.std_error, sqrt(2.0) * tail)
    )

    # curve term at the common cutoff
    ell_eff = f0_proj.cutoff
    perturb = (rng.normal(size=2 * ell_eff + 1) + 1j * rng.normal(size=2 * ell_eff + 1))
    perturb *= rng.uniform(0.05, 0.5) / np.linalg.norm(perturb)
    f_near = FourierCurve(f0_proj.coeffs + perturb)
    g_rand = _random_measure(rng)
    dist = float(np.linalg.norm(f_near.coeffs - f0_proj.coeffs))
    est = mc_divergence("hellinger", (f0_proj, g_rand), (f_near, g_rand), n_mc, rng)
    rows.append(
        _three_sigma_row(
            "e3_curve", est.value, est.std_error, 2.0**0.25 * sqrt(dist)
        )
    )

    # separated-mixture term
    eta = float(rng.uniform(1e-3, 0.02))
    raw = _random_measure(rng, n_atoms=6)
    g_sep = eta_merge(raw, eta)
    jitter = rng.uniform(-0.45, 0.45, size=g_sep.n_atoms) * eta
    moved = (g_sep.locations + jitter) % 1.0
    w_noise = g_sep.weights * rng.uniform(0.7, 1.3, size=g_sep.n_atoms)
    stray = rng.uniform(0.0, 0.1)  # mass escaping all intervals
    wts = np.concatenate([w_noise / w_noise.sum() * (1 - stray), [stray]])
    far = (g_sep.locations[int(rng.integers(g_sep.n_atoms))] + 0.5) % 1.0
    keep = wts > 1e-12
    g_check = Discrete(np.concatenate([moved, [far]])[keep], wts[keep] / wts[keep].sum())
    theta = f0_proj
    h2 = mc_all_divergences(
        (theta, g_sep), (theta, g_check), n_mc, rng, kinds=("h2",)
    )["h2"]
    masses = bin_mass(g_check, g_sep.locations, eta)
    discrepancy = float(np.sum(np.abs(masses - g_sep.weights)))
    bound = sqrt(pi / 2.0) * norm(theta, H1) * eta + 2.0 * discrepancy
    rows.append(_three_sigma_row("mixture_lemma", h2.value, h2.std_error, bound))
    return rows


def dirichlet_ball_mass(n_dims, alphas, target, r, n_mc=100_000, rng=None):
    """Monte-Carlo mass of the l1 ball {sum |X_j - x_j| <= 2r} under a
    Dirichlet law, next to the lemma's exponent N log(1/r) (its constants
    are unspecified, so only the exponent is reported)."""
    if rng is None:
        rng = np.random.default_rng(0)
    alphas = np.asarray(alphas, dtype=float)
    target = np.asarray(target, dtype=float)
    if alphas.shape != (n_dims,) or target.shape != (n_dims,):
        raise ValueError("alphas and target must have length n_dims")
    r = float(r)
    if not 0 < r <= 1.0 / n_dims:
        raise ValueError("need 0 < r <= 1/N")
    draws = rng.dirichlet(alphas, size=n_mc)
    inside = np.abs(draws - target[None, :]).sum(axis=1) <= 2.0 * r
    return {
        "empirical": float(inside.mean()),
        "lower_bound_exponent": float(n_dims * log(1.0 / r)),
    }
