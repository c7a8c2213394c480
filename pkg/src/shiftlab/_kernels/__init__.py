"""Hot numeric kernels with a compiled core and a pure-NumPy fallback.

The Cython extension ``shiftlab._kernels._core`` is preferred when it
imported cleanly at build time; ``SHIFTLAB_PURE=1`` in the environment
forces the NumPy implementation (used by the equivalence tests and the
benchmark). ``BACKEND`` records which one is active.
"""

import os

import numpy as np

from . import _pure

if os.environ.get("SHIFTLAB_PURE", "") not in ("", "0"):
    _impl = _pure
    BACKEND = "python"
else:
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _pure
        BACKEND = "python"


def mixture_logpdf(z, means, logw):
    """Log-density of rows of ``z`` under a complex-Gaussian location mixture.

    Parameters
    ----------
    z : (n, p) complex array of evaluation points.
    means : (a, p) complex array of mixture component means.
    logw : (a,) log-weights; need not be normalized beforehand.

    Returns
    -------
    (n,) float64 array of log sum_a exp(logw[a] - ||z - means[a]||^2) - p log pi.
    """
    z = np.ascontiguousarray(z, dtype=np.complex128)
    means = np.ascontiguousarray(means, dtype=np.complex128)
    logw = np.ascontiguousarray(logw, dtype=np.float64)
    if z.ndim != 2 or means.ndim != 2 or z.shape[1] != means.shape[1]:
        raise ValueError(
            f"shape mismatch: z {z.shape}, means {means.shape}"
        )
    if logw.shape != (means.shape[0],):
        raise ValueError("logw must have one entry per mixture component")
    out = np.empty(z.shape[0], dtype=np.float64)
    _impl.mixture_logpdf(z, means, logw, out)
    return out
