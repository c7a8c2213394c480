"""NumPy fallback for the compiled mixture kernel.

Reference semantics for ``shiftlab._kernels._core``; chunked so the
(samples x atoms) logit matrix never exceeds ~32 MB.
"""

import numpy as np

_LOG_PI = float(np.log(np.pi))
_CHUNK_ENTRIES = 4_000_000


def mixture_logpdf(z, means, logw, out):
    n, p = z.shape
    na = means.shape[0]
    chunk = max(1, _CHUNK_ENTRIES // max(na, 1))
    m_conj_t = means.conj().T
    m_sq = np.einsum("ak,ak->a", means.real, means.real) + np.einsum(
        "ak,ak->a", means.imag, means.imag
    )
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        zc = z[lo:hi]
        z_sq = np.einsum("ik,ik->i", zc.real, zc.real) + np.einsum(
            "ik,ik->i", zc.imag, zc.imag
        )
        cross = (zc @ m_conj_t).real
        logits = logw[None, :] - (z_sq[:, None] + m_sq[None, :] - 2.0 * cross)
        best = logits.max(axis=1)
        out[lo:hi] = (
            best
            + np.log(np.exp(logits - best[:, None]).sum(axis=1))
            - p * _LOG_PI
        )
