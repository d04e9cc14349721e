"""Means of symmetric positive definite matrices.

Tuples are stacked along axis ``-3``: a tuple of ``n`` matrices of size ``d``
is an array of shape ``(..., n, d, d)``; weights have shape ``(..., n)``. Any
further leading axes are independent problem instances solved together.
"""

from dataclasses import dataclass, field
import math
from typing import List, Optional

import numpy as np

from .errors import DimMismatch, InvalidT, InvalidWeights, NoConvergence
from .symmat import DEFAULT_CONFIG, NumericConfig, as_spd, same_shape, sqrt_pair, swap, sym
from .thompson import _pairwise_max_R

WEIGHT_SUM_TOL = 1e-12


@dataclass
class MeanResult:
    value: np.ndarray
    iterations: np.ndarray
    residual: np.ndarray
    converged: np.ndarray
    history: Optional[List[np.ndarray]] = field(default=None, repr=False)


def _result(value, iterations, residual, converged, history=None):
    iterations = np.asarray(iterations)
    residual = np.asarray(residual, dtype=float)
    converged = np.asarray(converged, dtype=bool)
    if iterations.ndim == 0 or iterations.size == 1 and value.ndim == 2:
        iterations, residual, converged = int(iterations), float(residual), bool(converged)
    return MeanResult(value, iterations, residual, converged, history)


def as_tuple(mats, cfg: NumericConfig = DEFAULT_CONFIG):
    """Stack and validate a tuple of SPD matrices along axis -3."""
    if isinstance(mats, np.ndarray) and mats.ndim >= 3:
        T = mats
    else:
        mats = [np.asarray(m, dtype=float) for m in mats]
        if not mats:
            raise DimMismatch("a tuple needs at least one matrix")
        same_shape(*mats)
        T = np.stack(mats, axis=-3)
    return as_spd(T, cfg)


def as_weights(weights, n: int):
    """Validate a probability vector with entries in (0, 1); ``None`` means uniform."""
    if weights is None:
        return np.full(n, 1.0 / n)
    w = np.asarray(weights, dtype=float)
    if w.shape[-1] != n:
        raise DimMismatch(f"{w.shape[-1]} weights for {n} matrices")
    if n == 1:
        ok = np.all(np.abs(w - 1.0) <= WEIGHT_SUM_TOL)
    else:
        ok = np.all((w > 0) & (w < 1))
    if not ok:
        raise InvalidWeights("weights must lie in (0, 1)")
    if np.any(np.abs(w.sum(axis=-1) - 1.0) > WEIGHT_SUM_TOL):
        raise InvalidWeights("weights must sum to 1")
    return w


def _roots(X):
    w, V = np.linalg.eigh(X)
    s = np.sqrt(w)[..., None, :]
    return (V * s) @ swap(V), (V / s) @ swap(V)


def _spectral(X, f):
    w, V = np.linalg.eigh(X)
    return (V * f(w)[..., None, :]) @ swap(V)


def _inv(X):
    return sym(_spectral(X, lambda w: 1.0 / w))


def _wsum(w, T):
    return np.sum(w[..., :, None, None] * T, axis=-3)


# ---------------------------------------------------------------------------
# two-variable means


def _geo(A, B, nu):
    if nu == 0:
        return A.copy()
    if nu == 1:
        return B.copy()
    Ah, Aih = _roots(A)
    M = sym(Aih @ B @ Aih)
    return sym(Ah @ _spectral(M, lambda w: w ** nu) @ Ah)


def geo_mean(A, B, nu: float = 0.5, cfg: NumericConfig = DEFAULT_CONFIG):
    """Weighted geometric mean ``A^{1/2} (A^{-1/2} B A^{-1/2})^nu A^{1/2}``.

    ``nu`` in [0, 1] gives a mean; other real values are accepted and give the
    corresponding point on the extended geodesic.
    """
    A, B = as_spd(A, cfg), as_spd(B, cfg)
    same_shape(A, B)
    return _geo(A, B, float(nu))


def _sharp_from_roots(Ah, Aih, B):
    S, _ = sqrt_pair(sym(Aih @ B @ Aih))
    return sym(Ah @ S @ Ah)


def _sharp(A, B):
    """Matmul-only ``A # B`` (Newton-Schulz roots); used inside the ALM recursion."""
    Ah, Aih = sqrt_pair(A)
    return _sharp_from_roots(Ah, Aih, B)


def arithmetic_mean(mats, weights=None, cfg: NumericConfig = DEFAULT_CONFIG):
    T = as_tuple(mats, cfg)
    return _wsum(as_weights(weights, T.shape[-3]), T)


def harmonic_mean(mats, weights=None, cfg: NumericConfig = DEFAULT_CONFIG):
    T = as_tuple(mats, cfg)
    return _inv(_wsum(as_weights(weights, T.shape[-3]), _inv(T)))


# ---------------------------------------------------------------------------
# power means


def _flatten(T, w):
    batch = T.shape[:-3]
    n, d = T.shape[-3], T.shape[-1]
    w = np.broadcast_to(w, batch + (n,))
    return batch, T.reshape(-1, n, d, d), w.reshape(-1, n)


def _power_step(X, T, w, t):
    """One application of ``X -> sum_i w_i (X #_t A_i)``.

    Returns the new iterate and ``d(new, X)``, which is read off the spectrum
    of ``X^{-1/2} new X^{-1/2} = sum_i w_i (X^{-1/2} A_i X^{-1/2})^t``.
    """
    Xh, Xih = _roots(X)
    M = sym(Xih[:, None] @ T @ Xih[:, None])
    Y = sym(_wsum(w, _spectral(M, lambda lam: lam ** t)))
    ev = np.linalg.eigvalsh(Y)
    res = np.maximum(np.log(ev[:, -1]), -np.log(ev[:, 0]))
    return sym(Xh @ Y @ Xh), res


def _power_pos(T, w, t, cfg):
    batch, Tf, wf = _flatten(T, w)
    N = Tf.shape[0]
    X = _wsum(wf, Tf)
    residual = np.full(N, np.inf)
    iterations = np.zeros(N, dtype=int)
    active = np.ones(N, dtype=bool)
    for k in range(1, cfg.max_iters + 1):
        idx = np.flatnonzero(active)
        Xn, res = _power_step(X[idx], Tf[idx], wf[idx], t)
        X[idx] = Xn
        residual[idx] = res
        iterations[idx] = k
        active[idx] = res > cfg.fixed_point_tol
        if not active.any():
            break
    result = _result(X.reshape(batch + X.shape[-2:]), iterations.reshape(batch),
                     residual.reshape(batch), ~active.reshape(batch))
    if active.any():
        raise NoConvergence(f"power mean did not converge in {cfg.max_iters} iterations", result)
    return result


def power_mean(mats, t: float, weights=None, cfg: NumericConfig = DEFAULT_CONFIG) -> MeanResult:
    """Weighted power mean ``P_t`` for ``t`` in [-1, 0) U (0, 1].

    For ``t > 0`` this is the fixed point of ``X -> sum_i w_i (X #_t A_i)``,
    iterated from the arithmetic mean until successive iterates are within
    ``cfg.fixed_point_tol`` in the Thompson metric. Negative ``t`` solves the
    positive problem on the inverted tuple and inverts the result.
    """
    t = float(t)
    if t == 0 or abs(t) > 1 or math.isnan(t):
        raise InvalidT(f"power mean needs t in [-1, 0) U (0, 1], got {t}")
    T = as_tuple(mats, cfg)
    w = as_weights(weights, T.shape[-3])
    return _power_mean(T, w, t, cfg)


def _power_mean(T, w, t, cfg=DEFAULT_CONFIG):
    if t > 0:
        return _power_pos(T, w, t, cfg)
    try:
        res = _power_pos(_inv(T), w, -t, cfg)
    except NoConvergence as exc:
        r = exc.result
        r.value = _inv(r.value)
        raise
    res.value = _inv(res.value)
    return res


def power_mean_residual(X, mats, t: float, weights=None, cfg=DEFAULT_CONFIG):
    """Thompson distance from ``X`` to ``sum_i w_i (X #_t A_i)`` (``t > 0``)."""
    T = as_tuple(mats, cfg)
    w = as_weights(weights, T.shape[-3])
    X = as_spd(X, cfg)
    batch, Tf, wf = _flatten(T, w)
    Xf = np.broadcast_to(X, batch + X.shape[-2:]).reshape(-1, *X.shape[-2:])
    _, res = _power_step(Xf, Tf, wf, float(t))
    return res.reshape(batch) if batch else float(res[0])


# ---------------------------------------------------------------------------
# Karcher mean


def _karcher_grad(Xih, T, w):
    M = sym(Xih[:, None] @ T @ Xih[:, None])
    return sym(_wsum(w, _spectral(M, np.log)))


def _karcher(T, w, cfg):
    batch, Tf, wf = _flatten(T, w)
    N = Tf.shape[0]
    X = _wsum(wf, Tf)
    Xh, Xih = _roots(X)
    S = _karcher_grad(Xih, Tf, wf)
    res = np.linalg.norm(S, axis=(-2, -1))
    theta = np.ones(N)
    iterations = np.zeros(N, dtype=int)
    active = res > cfg.fixed_point_tol
    for k in range(1, cfg.max_iters + 1):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        step = _spectral(theta[idx, None, None] * S[idx], np.exp)
        Xc = sym(Xh[idx] @ step @ Xh[idx])
        Ch, Cih = _roots(Xc)
        Sc = _karcher_grad(Cih, Tf[idx], wf[idx])
        rc = np.linalg.norm(Sc, axis=(-2, -1))
        ok = rc <= res[idx]
        acc = idx[ok]
        X[acc], Xh[acc], Xih[acc], S[acc], res[acc] = Xc[ok], Ch[ok], Cih[ok], Sc[ok], rc[ok]
        theta[idx[~ok]] *= 0.5
        iterations[idx] = k
        active = (res > cfg.fixed_point_tol) & (theta > 1e-30)
    result = _result(X.reshape(batch + X.shape[-2:]), iterations.reshape(batch),
                     res.reshape(batch), (res <= cfg.fixed_point_tol).reshape(batch))
    if np.any(res > cfg.fixed_point_tol):
        raise NoConvergence("Karcher iteration stalled above fixed_point_tol", result)
    return result


def karcher_mean(mats, weights=None, cfg: NumericConfig = DEFAULT_CONFIG) -> MeanResult:
    """Weighted Karcher mean: the SPD root of ``sum_i w_i log(X^{-1/2} A_i X^{-1/2}) = 0``.

    Fixed-point iteration ``X <- X^{1/2} exp(theta S) X^{1/2}`` with ``S`` the
    left-hand side above, started at the arithmetic mean. ``theta`` starts at
    1 and is halved whenever a step would increase ``||S||_F``.
    """
    T = as_tuple(mats, cfg)
    return _karcher(T, as_weights(weights, T.shape[-3]), cfg)


def karcher_residual(X, mats, weights=None, cfg: NumericConfig = DEFAULT_CONFIG):
    """Frobenius norm of ``sum_i w_i log(X^{-1/2} A_i X^{-1/2})``."""
    T = as_tuple(mats, cfg)
    w = as_weights(weights, T.shape[-3])
    X = as_spd(X, cfg)
    if X.shape[-1] != T.shape[-1]:
        raise DimMismatch("X and the tuple have different dimensions")
    batch, Tf, wf = _flatten(T, w)
    Xf = np.broadcast_to(X, batch + X.shape[-2:]).reshape(-1, *X.shape[-2:])
    _, Xih = _roots(Xf)
    r = np.linalg.norm(_karcher_grad(Xih, Tf, wf), axis=(-2, -1))
    return r.reshape(batch) if batch else float(r[0])


# ---------------------------------------------------------------------------
# Ando-Li-Mathias geometric mean


def _drop(T, i):
    n = T.shape[-3]
    return T[..., [j for j in range(n) if j != i], :, :]


def _normalize(T):
    """Congruence by ``T[:, 0]^{-1/2}``.

    Returns the transformed tuple, whose first entry is set to exactly ``I``,
    and ``T[:, 0]^{1/2}``. The mean is congruence invariant, so the recursion
    can run in these coordinates, where every Newton-Schulz root is taken
    near the identity and converges in a few steps.
    """
    Rh, Rih = sqrt_pair(T[:, 0])
    Tn = sym(Rih[:, None] @ T @ Rih[:, None])
    Tn[:, 0] = np.eye(T.shape[-1])
    return Tn, Rh


def _rounds_needed(spread, tol, n):
    """Rounds after which the contraction bound guarantees ``spread <= tol``, per element."""
    spread = np.asarray(spread, dtype=float)
    return np.ceil(np.log(np.maximum(spread, tol) / tol) / math.log(n - 1)).astype(int)


def _inner_tol(tol):
    # the readout error is about 0.2 * spread**3 (measured), so this keeps it
    # near 1e-4 * tol
    return (1e-3 * tol) ** (1 / 3)


def _readout(T):
    """Mean of a nearly collapsed tuple, exact to second order in its spread.

    Every self-dual mean agrees with ``P^{1/2} (I - mean(E_i^2) / 2) P^{1/2}``
    up to third order, where ``P`` is the arithmetic mean and
    ``E_i = P^{-1/2} A_i P^{-1/2} - I``.
    """
    I = np.eye(T.shape[-1])
    Ph, Pih = sqrt_pair(T.mean(axis=1))
    E = Pih[:, None] @ T @ Pih[:, None] - I
    return sym(Ph @ (I - 0.5 * np.mean(E @ E, axis=1)) @ Ph)


# The recursion below works on flat batches ``(B, n, d, d)`` with a per-element
# spread bound ``(B,)``. Round counts are decided per element and only the
# elements that need a step are updated, so an element's result never depends
# on the rest of the batch.


def _alm_round(T, bound, tol, max_iters):
    """One round on normalized tuples (``T[:, 0] = I``): entry i becomes the mean without i."""
    n = T.shape[-3]
    if n == 3:
        # (I, B, C) -> (B # C, C^{1/2}, B^{1/2})
        Bh, Bih = sqrt_pair(T[:, 1])
        Ch, _ = sqrt_pair(T[:, 2])
        return np.stack([_sharp_from_roots(Bh, Bih, T[:, 2]), Ch, Bh], axis=1)
    return np.stack([_alm_inner(_drop(T, i), bound, tol, max_iters) for i in range(n)], axis=1)


def _alm_inner(T, bound, tol, max_iters):
    """ALM mean of tuples whose Thompson spreads are known to be ``<= bound``.

    Runs the number of rounds the per-round contraction ``R <- R^{1/(n-1)}``
    needs to bring the spread under ``(1e-3 * tol)^{1/3}`` and reads the mean
    off that tuple with :func:`_readout`.
    """
    n, d = T.shape[-3], T.shape[-1]
    if n == 2:
        return _sharp(T[:, 0], T[:, 1])
    rounds = _rounds_needed(bound, _inner_tol(tol), n)
    top = int(rounds.max(initial=0))
    if top == 0:
        return _readout(T)
    if top > max_iters:
        raise NoConvergence(f"ALM recursion needs {top} rounds, cap is {max_iters}")
    L = np.broadcast_to(np.eye(d), (len(T), d, d)).copy()
    for j in range(top):
        live = rounds > j
        idx = slice(None) if live.all() else np.flatnonzero(live)
        Tn, Rh = _normalize(T[idx])
        T[idx] = _alm_round(Tn, bound[idx], tol, max_iters)
        L[idx] = L[idx] @ Rh
        bound = bound / (n - 1)
    return sym(L @ _readout(T) @ swap(L))


def alm_mean(mats, cfg: NumericConfig = DEFAULT_CONFIG, record: bool = False) -> MeanResult:
    """Ando-Li-Mathias geometric mean of ``n`` SPD matrices.

    ``n = 1`` returns the matrix, ``n = 2`` returns ``A # B``. For ``n >= 3``
    the tuple is replaced each round by its ``n`` leave-one-out means until the
    largest pairwise Thompson distance is at most ``cfg.fixed_point_tol``; the
    mean of that final tuple is returned.

    Parameters
    ----------
    record : bool
        Measure the spread after every round and keep the per-round values of
        ``R`` in ``result.history``. Without it the spread is measured only once
        the contraction bound predicts convergence.
    """
    T = as_tuple(mats, cfg)
    n = T.shape[-3]
    batch = T.shape[:-3]
    zeros = np.zeros(batch)
    if n == 1:
        return _result(T[..., 0, :, :].copy(), zeros.astype(int), zeros, zeros == 0)
    if n == 2:
        return _result(_geo(T[..., 0, :, :], T[..., 1, :, :], 0.5), zeros.astype(int), zeros,
                       zeros == 0)
    return _alm_top(T, cfg, record)


def _alm_top(T, cfg, record=False):
    n, d = T.shape[-3], T.shape[-1]
    batch = T.shape[:-3]
    tol = cfg.fixed_point_tol
    # normalized coordinates: the actual tuple is L Tn L^T
    Tn = T.reshape((-1, n, d, d)).copy()
    L = np.broadcast_to(np.eye(d), (Tn.shape[0], d, d)).copy()
    spread = np.log(_pairwise_max_R(Tn))
    rounds = np.zeros(len(Tn), dtype=int)
    history = [np.exp(spread).reshape(batch)] if record else None

    def finish():
        value = sym(L @ Tn.mean(axis=-3) @ swap(L)).reshape(batch + (d, d))
        return _result(value, rounds.reshape(batch), spread.reshape(batch),
                       (spread <= tol).reshape(batch), history)

    active = spread > tol
    while active.any():
        k = np.where(active, np.maximum(1, _rounds_needed(spread, tol, n)), 0)
        if record:
            k = np.minimum(k, 1)
        bound = spread.copy()
        for j in range(int(k.max())):
            live = k > j
            if np.any(rounds[live] >= cfg.max_iters):
                raise NoConvergence(f"ALM mean did not converge in {cfg.max_iters} rounds",
                                    finish())
            idx = slice(None) if live.all() else np.flatnonzero(live)
            Ts, Rh = _normalize(Tn[idx])
            Tn[idx] = _alm_round(Ts, bound[idx], tol, cfg.max_iters)
            L[idx] = L[idx] @ Rh
            bound /= n - 1
            rounds[live] += 1
        spread[active] = np.log(_pairwise_max_R(Tn[active]))
        if record:
            history.append(np.exp(spread).reshape(batch))
        active = spread > tol
    return finish()
