"""Generalized Kantorovich constant ``K(h, nu)``.

The closed form is 0/0 at ``h = 1`` and at ``nu in {0, 1}``; all three limits
equal 1 and are returned by explicit branches. ``nu = 1/2`` and ``nu = 2`` use
their simplified forms.
"""

import numpy as np

from .errors import DomainError

H_ONE_TOL = 1e-9
NU_TOL = 1e-12


def _check_h(h):
    h = np.asarray(h, dtype=float)
    if np.any(np.isnan(h)):
        raise DomainError("K(h, nu) got h = nan")
    if np.any(h < 1):
        raise DomainError(f"K(h, nu) needs h >= 1, got min {float(np.min(h))!r}")
    return h


def K_half(h):
    """``K(h, 1/2) = 2 h^{1/4} / (1 + h^{1/2})``, decreasing for ``h >= 1``."""
    h = _check_h(h)
    out = 2.0 * h ** 0.25 / (1.0 + np.sqrt(h))
    return out if out.ndim else float(out)


def K(h, nu):
    """Generalized Kantorovich constant, vectorized over ``h`` (and ``nu``)."""
    h = _check_h(h)
    nu = np.asarray(nu, dtype=float)
    h, nu = np.broadcast_arrays(h, nu)
    out = np.ones(h.shape)

    half = nu == 0.5
    two = nu == 2.0
    trivial = (np.abs(h - 1.0) < H_ONE_TOL) | (np.abs(nu) < NU_TOL) | (np.abs(nu - 1.0) < NU_TOL)
    gen = ~(trivial | half | two)

    sel = half & ~trivial
    out[sel] = 2.0 * h[sel] ** 0.25 / (1.0 + np.sqrt(h[sel]))
    sel = two & ~trivial
    out[sel] = (1.0 + h[sel]) ** 2 / (4.0 * h[sel])

    if np.any(gen):
        hh, vv = h[gen], nu[gen]
        L = np.log(hh)
        hv_m1 = np.expm1(vv * L)  # h^nu - 1
        h_m1 = np.expm1(L)  # h - 1
        hv_mh = hv_m1 - h_m1  # h^nu - h
        first = hv_mh / ((vv - 1.0) * h_m1)
        second = ((vv - 1.0) * hv_m1) / (vv * hv_mh)
        out[gen] = first * second ** vv
    return out if out.ndim else float(out)


def kantorovich(h):
    """The classical constant ``(1 + h)^2 / (4h) = K(h, 2)``."""
    return K(h, 2.0)
