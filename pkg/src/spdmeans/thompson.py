"""Relative spectral bounds and the Thompson metric on the SPD cone.

``r(B^{-1}A)`` is always read off the symmetric congruence
``B^{-1/2} A B^{-1/2}``, never from the non-symmetric product.
"""

import numpy as np

from .symmat import DEFAULT_CONFIG, as_spd, same_shape, swap, sym

EQUAL_TOL = 1e-10


def _invsqrt(B):
    w, V = np.linalg.eigh(B)
    return (V / np.sqrt(w)[..., None, :]) @ swap(V)


def rel_spectrum(A, B):
    """Extreme eigenvalues ``(lo, hi)`` of ``B^{-1/2} A B^{-1/2}`` (unvalidated).

    ``hi = r(B^{-1}A)`` and ``1/lo = r(A^{-1}B)``.
    """
    S = _invsqrt(B)
    w = np.linalg.eigvalsh(sym(S @ A @ S))
    return w[..., 0], w[..., -1]


def _big_R(A, B):
    lo, hi = rel_spectrum(A, B)
    return np.maximum(hi, 1.0 / lo)


def rel_sup(A, B, cfg=DEFAULT_CONFIG):
    """``inf{lambda > 0 : A <= lambda B}``, i.e. the spectral radius of ``B^{-1}A``."""
    A, B = as_spd(A, cfg), as_spd(B, cfg)
    same_shape(A, B)
    return rel_spectrum(A, B)[1]


def big_R(A, B, cfg=DEFAULT_CONFIG):
    """``max{r(A^{-1}B), r(B^{-1}A)}``; always ``>= 1``."""
    A, B = as_spd(A, cfg), as_spd(B, cfg)
    same_shape(A, B)
    return _big_R(A, B)


def dist(A, B, cfg=DEFAULT_CONFIG):
    """Thompson distance ``log R(A, B)``."""
    return np.log(big_R(A, B, cfg))


def equal(A, B, cfg=DEFAULT_CONFIG, tol=EQUAL_TOL):
    return dist(A, B, cfg) <= tol


def _pairwise_max_R(T):
    """``max_{i<j} R(T_i, T_j)`` over the tuple axis (-3); 1 for a single matrix."""
    n = T.shape[-3]
    best = np.ones(T.shape[:-3])
    for i in range(n):
        for j in range(i + 1, n):
            best = np.maximum(best, _big_R(T[..., i, :, :], T[..., j, :, :]))
    return best


def max_pairwise_R(mats, cfg=DEFAULT_CONFIG):
    T = as_spd(np.stack(list(mats), axis=-3) if not isinstance(mats, np.ndarray) else mats, cfg)
    return _pairwise_max_R(T)
