"""Periodic curves represented by finitely many Fourier coefficients.

A curve is the function t -> sum_k c_k exp(i 2 pi k t) for integer
frequencies |k| <= cutoff. Translating the curve by phi multiplies c_k by
exp(-i 2 pi k phi) (a rotation of each coefficient), which is the only
geometry this package ever needs: all norms, projections and likelihoods
are computed directly on the coefficients.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ParseError

__all__ = [
    "FourierCurve",
    "NormKind",
    "L2",
    "H1",
    "Hs",
    "shift_action",
    "norm",
    "project",
    "evaluate",
    "write_curve_csv",
    "read_curve_csv",
]


class FourierCurve:
    """Immutable vector of complex coefficients on frequencies -L..L."""

    __slots__ = ("_coeffs", "cutoff")

    def __init__(self, coeffs, cutoff=None):
        arr = np.asarray(coeffs, dtype=np.complex128)
        if arr.ndim != 1 or arr.size % 2 != 1:
            raise ValueError("coeffs must be a 1-d array of odd length (-L..L)")
        inferred = (arr.size - 1) // 2
        if cutoff is not None and cutoff != inferred:
            raise ValueError(f"cutoff {cutoff} inconsistent with {arr.size} coeffs")
        self._coeffs = arr.copy()
        self._coeffs.setflags(write=False)
        self.cutoff = inferred

    @classmethod
    def from_dict(cls, mapping):
        """Build from a {frequency: amplitude} mapping; absent means zero."""
        if not mapping:
            return cls(np.zeros(1))
        cutoff = max(abs(int(k)) for k in mapping)
        arr = np.zeros(2 * cutoff + 1, dtype=np.complex128)
        for k, v in mapping.items():
            arr[int(k) + cutoff] = v
        return cls(arr)

    @classmethod
    def zero(cls, cutoff=0):
        return cls(np.zeros(2 * cutoff + 1, dtype=np.complex128))

    @property
    def coeffs(self):
        return self._coeffs

    @property
    def frequencies(self):
        return np.arange(-self.cutoff, self.cutoff + 1)

    @property
    def dim(self):
        """Number of retained coefficients, 2*cutoff + 1."""
        return self._coeffs.size

    def coeff(self, k):
        """Coefficient at frequency k (zero beyond the cutoff)."""
        if abs(k) > self.cutoff:
            return 0j
        return complex(self._coeffs[k + self.cutoff])

    def as_dict(self):
        return {
            int(k): complex(c)
            for k, c in zip(self.frequencies, self._coeffs)
            if c != 0
        }

    def pad_to(self, cutoff):
        """Same curve viewed with a larger cutoff (zero padding)."""
        if cutoff < self.cutoff:
            raise ValueError("pad_to cannot reduce the cutoff")
        if cutoff == self.cutoff:
            return self
        extra = cutoff - self.cutoff
        return FourierCurve(np.pad(self._coeffs, (extra, extra)))

    def __eq__(self, other):
        if not isinstance(other, FourierCurve):
            return NotImplemented
        hi = max(self.cutoff, other.cutoff)
        return bool(
            np.array_equal(self.pad_to(hi).coeffs, other.pad_to(hi).coeffs)
        )

    def __hash__(self):
        return hash((self.cutoff, self._coeffs.tobytes()))

    def __repr__(self):
        return f"FourierCurve(cutoff={self.cutoff}, coeffs={self.as_dict()!r})"


@dataclass(frozen=True)
class NormKind:
    """Which coefficient weighting to use: L2, H1 (weight k^2, so the
    frequency-0 coefficient is unweighted away), or Hs (weight 1+|k|^{2s})."""

    kind: str
    s: float | None = None


L2 = NormKind("l2")
H1 = NormKind("h1")


def Hs(s):
    """Sobolev norm of smoothness s >= 1 (weight 1 + |k|^{2s})."""
    s = float(s)
    if s < 1:
        raise ValueError(f"Hs requires s >= 1, got {s}")
    return NormKind("hs", s)


def shift_action(curve, phi):
    """Translate the curve by phi: coefficient k picks up exp(-i 2 pi k phi)."""
    phi = float(phi) % 1.0
    phase = np.exp(-2j * np.pi * curve.frequencies * phi)
    return FourierCurve(curve.coeffs * phase)


def norm(curve, kind=L2):
    sq = np.abs(curve.coeffs) ** 2
    if kind.kind == "l2":
        w = 1.0
    elif kind.kind == "h1":
        w = curve.frequencies.astype(float) ** 2
    elif kind.kind == "hs":
        if kind.s is None or kind.s < 1:
            raise ValueError("Hs norm requires s >= 1")
        w = 1.0 + np.abs(curve.frequencies).astype(float) ** (2 * kind.s)
    else:
        raise ValueError(f"unknown norm kind {kind.kind!r}")
    return float(np.sqrt(np.sum(w * sq)))


def project(curve, ell):
    """Keep frequencies |k| <= ell.

    Returns (projected curve, L2 norm of the discarded tail). The tail
    obeys tail <= norm(curve, Hs(s)) * ell^{-s} for every s >= 1.
    """
    ell = int(ell)
    if ell < 0:
        raise ValueError("projection cutoff must be non-negative")
    if ell >= curve.cutoff:
        return curve, 0.0
    lo = curve.cutoff - ell
    kept = curve.coeffs[lo : lo + 2 * ell + 1]
    tail = np.concatenate([curve.coeffs[:lo], curve.coeffs[lo + 2 * ell + 1 :]])
    return FourierCurve(kept), float(np.linalg.norm(tail))


def evaluate(curve, t):
    """Evaluate sum_k c_k exp(i 2 pi k t); vectorized and 1-periodic in t."""
    t_arr = np.asarray(t, dtype=float)
    phases = np.exp(
        2j * np.pi * np.multiply.outer(t_arr, curve.frequencies.astype(float))
    )
    vals = phases @ curve.coeffs
    if t_arr.ndim == 0:
        return complex(vals)
    return vals


def write_curve_csv(curve, path):
    """CSV with header freq,re,im; one row per retained frequency, increasing."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["freq", "re", "im"])
        for k, c in zip(curve.frequencies, curve.coeffs):
            writer.writerow([int(k), repr(float(c.real)), repr(float(c.imag))])


def read_curve_csv(path):
    entries = {}
    last = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if lineno == 1:
                if row != ["freq", "re", "im"]:
                    raise ParseError("expected header freq,re,im", lineno)
                continue
            if not row:
                continue
            try:
                k = int(row[0])
                c = complex(float(row[1]), float(row[2]))
            except (IndexError, ValueError) as exc:
                raise ParseError(f"bad curve row {row!r}", lineno) from exc
            if last is not None and k <= last:
                raise ParseError("frequencies must be strictly increasing", lineno)
            last = k
            entries[k] = c
    return FourierCurve.from_dict(entries)
