"""Dense symmetric matrices: eigendecomposition, functional calculus, Loewner order.

Every function accepts a single ``(d, d)`` array or a stack ``(..., d, d)``;
leading axes are batch axes and are carried through unchanged.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DimMismatch, DomainError, NoConvergence, NotDefinite, NotSymmetric


@dataclass(frozen=True)
class NumericConfig:
    """Tolerances and iteration caps shared by all solvers."""

    sym_tol: float = 1e-12
    orth_tol: float = 1e-10
    recon_tol: float = 1e-10
    loewner_tol: float = 1e-8
    fixed_point_tol: float = 1e-12
    max_sweeps: int = 64
    max_iters: int = 5000

    def __post_init__(self):
        for name in ("sym_tol", "orth_tol", "recon_tol", "loewner_tol", "fixed_point_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_sweeps < 1 or self.max_iters < 1:
            raise ValueError("iteration caps must be positive")


DEFAULT_CONFIG = NumericConfig()


@dataclass(frozen=True)
class EigenDecomp:
    eigenvalues: np.ndarray  # (..., d), ascending
    basis: np.ndarray  # (..., d, d), orthonormal columns

    def reconstruct(self):
        return (self.basis * self.eigenvalues[..., None, :]) @ swap(self.basis)


def swap(X):
    return np.swapaxes(X, -1, -2)


def sym(X):
    out = X + swap(X)
    out *= 0.5
    return out


def eye_like(X):
    return np.broadcast_to(np.eye(X.shape[-1]), X.shape)


def as_sym(X, cfg: NumericConfig = DEFAULT_CONFIG):
    """Validate a (stack of) square symmetric matrices and return the symmetrized copy."""
    X = np.array(X, dtype=float)
    if X.ndim < 2 or X.shape[-1] != X.shape[-2] or X.shape[-1] < 1:
        raise DimMismatch(f"expected square matrices, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DomainError("matrix has non-finite entries")
    scale = np.max(np.abs(X), axis=(-2, -1), keepdims=True)
    asym = np.max(np.abs(X - swap(X)), axis=(-2, -1), keepdims=True)
    if np.any(asym > cfg.sym_tol * scale):
        worst = float(np.max(asym / np.where(scale > 0, scale, 1.0)))
        raise NotSymmetric(f"relative asymmetry {worst:.3g} exceeds sym_tol={cfg.sym_tol:g}")
    return sym(X)


def as_spd(X, cfg: NumericConfig = DEFAULT_CONFIG):
    """Validate symmetric positive definite input; returns the symmetrized copy."""
    X = as_sym(X, cfg)
    lam = np.linalg.eigvalsh(X)[..., 0]
    if np.any(lam <= 0):
        raise NotDefinite(f"smallest eigenvalue {float(np.min(lam)):.6g} is not positive")
    return X


def same_shape(*mats):
    shapes = {m.shape[-2:] for m in mats}
    if len(shapes) != 1:
        raise DimMismatch(f"matrix dimensions differ: {sorted(shapes)}")


# ---------------------------------------------------------------------------
# eigendecomposition


def eig_sym(S, cfg: NumericConfig = DEFAULT_CONFIG, method: str = "lapack") -> EigenDecomp:
    """Eigendecomposition of symmetric ``S`` with ascending eigenvalues.

    Parameters
    ----------
    S : array_like, shape (..., d, d)
    cfg : NumericConfig
    method : {"lapack", "jacobi"}
        ``"jacobi"`` runs cyclic Jacobi rotations and raises
        :class:`NoConvergence` after ``cfg.max_sweeps`` sweeps.
    """
    S = as_sym(S, cfg)
    if method == "lapack":
        w, V = np.linalg.eigh(S)
        return EigenDecomp(w, V)
    if method == "jacobi":
        return _jacobi(S, cfg)
    raise ValueError(f"unknown eigensolver {method!r}")


def _jacobi(S, cfg):
    shape = S.shape
    d = shape[-1]
    A = S.reshape(-1, d, d).copy()
    V = np.broadcast_to(np.eye(d), A.shape).copy()
    thresh = 1e-13 * np.linalg.norm(A, axis=(-2, -1))
    offmask = ~np.eye(d, dtype=bool)
    for _ in range(cfg.max_sweeps):
        off = np.sqrt(np.sum(A[:, offmask] ** 2, axis=-1))
        if np.all(off <= thresh):
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[:, p, q]
                app = A[:, p, p]
                aqq = A[:, q, q]
                nz = apq != 0.0
                safe = np.where(nz, apq, 1.0)
                tau = (aqq - app) / (2.0 * safe)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
                t = np.where(nz, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                c1, s1 = c[:, None], s[:, None]
                colp, colq = A[:, :, p].copy(), A[:, :, q].copy()
                A[:, :, p] = c1 * colp - s1 * colq
                A[:, :, q] = s1 * colp + c1 * colq
                rowp, rowq = A[:, p, :].copy(), A[:, q, :].copy()
                A[:, p, :] = c1 * rowp - s1 * rowq
                A[:, q, :] = s1 * rowp + c1 * rowq
                vp, vq = V[:, :, p].copy(), V[:, :, q].copy()
                V[:, :, p] = c1 * vp - s1 * vq
                V[:, :, q] = s1 * vp + c1 * vq
    else:
        off = np.sqrt(np.sum(A[:, offmask] ** 2, axis=-1))
        if np.any(off > thresh):
            raise NoConvergence(f"Jacobi did not converge in {cfg.max_sweeps} sweeps")
    w = np.diagonal(A, axis1=-2, axis2=-1)
    order = np.argsort(w, axis=-1)
    w = np.take_along_axis(w, order, axis=-1)
    V = np.take_along_axis(V, order[:, None, :], axis=-1)
    return EigenDecomp(w.reshape(shape[:-1]), V.reshape(shape))


# ---------------------------------------------------------------------------
# functional calculus


def _fn(X, f):
    """Unvalidated spectral map for symmetric input."""
    w, V = np.linalg.eigh(X)
    return (V * f(w)[..., None, :]) @ swap(V)


def apply_fn(A, f: Callable, cfg: NumericConfig = DEFAULT_CONFIG,
             domain: Optional[Callable] = None):
    """Return ``Q diag(f(lambda)) Q^T`` for symmetric ``A``.

    ``domain``, when given, is a predicate on eigenvalues; any eigenvalue failing
    it, or any non-finite ``f(lambda)``, raises :class:`DomainError`.
    """
    A = as_sym(A, cfg)
    w, V = np.linalg.eigh(A)
    if domain is not None and not np.all(domain(w)):
        raise DomainError(f"eigenvalue outside the function's domain (min {float(np.min(w)):.6g})")
    with np.errstate(all="ignore"):
        fw = np.asarray(f(w), dtype=float)
    if not np.all(np.isfinite(fw)):
        raise DomainError("function is not finite on the spectrum")
    return sym((V * fw[..., None, :]) @ swap(V))


def _positive(w):
    return w > 0


def sqrtm(A, cfg=DEFAULT_CONFIG):
    return apply_fn(A, np.sqrt, cfg, domain=lambda w: w >= 0)


def invsqrtm(A, cfg=DEFAULT_CONFIG):
    return apply_fn(A, lambda w: 1.0 / np.sqrt(w), cfg, domain=_positive)


def inv(A, cfg=DEFAULT_CONFIG):
    return apply_fn(A, lambda w: 1.0 / w, cfg, domain=lambda w: w != 0)


def logm(A, cfg=DEFAULT_CONFIG):
    return apply_fn(A, np.log, cfg, domain=_positive)


def expm(A, cfg=DEFAULT_CONFIG):
    return apply_fn(A, np.exp, cfg)


def powm(A, p: float, cfg=DEFAULT_CONFIG):
    if float(p).is_integer() and p >= 0:
        return apply_fn(A, lambda w: w ** p, cfg)
    return apply_fn(A, lambda w: w ** p, cfg, domain=_positive)


# ---------------------------------------------------------------------------
# Newton-Schulz square roots


def sqrt_pair(A, tol: float = 1e-9, max_iters: int = 100):
    """Return ``(A^{1/2}, A^{-1/2})`` by the coupled Newton-Schulz iteration.

    Unvalidated, matmul-only route for SPD stacks. ``A`` is scaled by a
    Gershgorin bound on its largest eigenvalue so the iteration converges;
    iterations stop once the correction falls below ``tol`` (the iteration is
    quadratic, so the final error is about ``tol**2``).
    """
    d = A.shape[-1]
    batch = A.shape[:-2]
    A = A.reshape((-1, d, d))
    I = np.eye(d)
    c = np.max(np.sum(np.abs(A), axis=-1), axis=-1)[..., None, None]
    Y = A / c
    # first step with Z = I
    T = Y * -0.5
    T += 1.5 * I
    Y = Y @ T
    Z = T
    # Each element stops on its own, so results do not depend on the batch:
    # converged elements get the exact correction T = I, which leaves them
    # bit-for-bit unchanged.
    live = np.max(np.abs(T - I), axis=(-2, -1)) >= tol
    for _ in range(max_iters):
        if not live.any():
            break
        T = Z @ Y
        T *= -0.5
        T += 1.5 * I
        if not live.all():
            T[~live] = I
        Y = Y @ T
        Z = T @ Z
        live &= np.max(np.abs(T - I), axis=(-2, -1)) >= tol
    else:
        raise NoConvergence("Newton-Schulz square root did not converge")
    Y, Z, c = Y.reshape(batch + (d, d)), Z.reshape(batch + (d, d)), c.reshape(batch + (1, 1))
    rc = np.sqrt(c)
    return sym(Y) * rc, sym(Z) / rc


# ---------------------------------------------------------------------------
# Loewner order


def spectral_norm(X):
    w = np.linalg.eigvalsh(X)
    return np.maximum(np.abs(w[..., 0]), np.abs(w[..., -1]))


def loewner_margin(A, B):
    """Smallest eigenvalue of ``A - B``; nonnegative iff ``A >= B``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape[-2:] != B.shape[-2:]:
        raise DimMismatch(f"cannot compare shapes {A.shape} and {B.shape}")
    return np.linalg.eigvalsh(sym(A - B))[..., 0]


def loewner_scale(A, B):
    return np.maximum(1.0, np.maximum(spectral_norm(A), spectral_norm(B)))


def loewner_geq(A, B, cfg: NumericConfig = DEFAULT_CONFIG):
    """True where ``A >= B`` up to ``cfg.loewner_tol`` relative slack."""
    return loewner_margin(A, B) >= -cfg.loewner_tol * loewner_scale(A, B)
