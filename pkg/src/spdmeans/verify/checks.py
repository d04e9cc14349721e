"""Batched inequality checks, one function per :class:`TheoremId`.

Every check function takes a :class:`Batch` of ``N`` instances, a batched map
(or ``None`` for map-free families) and one grid value, and returns an
:class:`Outcome` holding one :class:`CheckBatch` per inequality. Expensive
intermediate means that do not depend on the map are cached on the batch.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from ..errors import HypothesisViolation, NoConvergence
from ..kantorovich import K, K_half
from ..means import _geo, _inv, _karcher, _power_mean, _spectral, alm_mean, as_weights
from ..posmaps import VectorState, apply, apply_tuple, expand
from ..symmat import DEFAULT_CONFIG, NumericConfig, as_spd, sym
from ..thompson import _big_R, _pairwise_max_R
from .core import CheckBatch, ConvexFn, TheoremId, loewner_check, scalar_check


@dataclass
class Batch:
    """``N`` independent instances of one theorem family.

    ``mats`` has shape ``(N, m, d, d)``; pair families read ``mats[:, 0]`` and
    ``mats[:, 1]``, tuple families read the first ``n`` matrices (and the
    next ``n`` for the second tuple of a contraction check).
    """

    mats: np.ndarray
    weights: Dict[int, np.ndarray] = field(default_factory=dict)
    cfg: NumericConfig = DEFAULT_CONFIG
    cache: dict = field(default_factory=dict)

    @property
    def size(self):
        return self.mats.shape[0]

    def cached(self, key, fn: Callable):
        if key not in self.cache:
            self.cache[key] = fn()
        return self.cache[key]


@dataclass
class Outcome:
    checks: List[CheckBatch]
    skipped: Optional[np.ndarray] = None  # (N,) bool: hypotheses not met for this map
    failed: Optional[np.ndarray] = None  # (N,) bool: a solver did not converge
    message: str = ""


# ---------------------------------------------------------------------------
# helpers


def _definite(X):
    """Mask of positive definite images; others are replaced by the identity."""
    lam = np.linalg.eigvalsh(X)[..., 0]
    ok = lam > 0
    while ok.ndim > 1:
        ok = ok.all(axis=-1)
    if not ok.all():
        X = X.copy()
        X[~ok] = np.eye(X.shape[-1])
    return X, ok


def _solve(fn, *args):
    """Run a batched solver; non-converged entries are flagged instead of raised."""
    try:
        res = fn(*args)
    except NoConvergence as exc:
        res = exc.result
        if res is None:
            raise
    conv = np.broadcast_to(np.asarray(res.converged), res.value.shape[:-2])
    return res.value, conv


def _outcome(checks, ok=None, conv=None, message=""):
    n = checks[0].margin.shape[0]
    skipped = None if ok is None or ok.all() else ~ok
    failed = None if conv is None or conv.all() else ~np.broadcast_to(conv, (n,))
    return Outcome(checks, skipped, failed, message)


def _cond(T):
    w = np.linalg.eigvalsh(T)
    return w[..., -1] / w[..., 0]


def _M0(T):
    """``max_{i,j} M_i / m_j`` over the tuple axis."""
    w = np.linalg.eigvalsh(T)
    return w[..., -1].max(axis=-1) / w[..., 0].min(axis=-1)


def _pair(batch):
    return batch.mats[:, 0], batch.mats[:, 1]


def _kant2(h):
    """``K(h, 2) = (1 + h)^2 / (4 h)``."""
    return (1.0 + h) ** 2 / (4.0 * h)


def _alm(T, cfg):
    return alm_mean(T, cfg)


# ---------------------------------------------------------------------------
# two-variable families


def check_t1(batch, phi, nu):
    A, B = _pair(batch)
    G = batch.cached(("geo", nu), lambda: _geo(A, B, nu))
    PG = apply(phi, G)
    P, ok = _definite(apply_tuple(phi, np.stack([A, B], axis=1), check=False))
    H = _geo(P[:, 0], P[:, 1], nu)
    c = K(_big_R(A, B) ** 2, nu)
    return _outcome([
        loewner_check("upper", H, PG, lhs_tag="Phi(A) #_nu Phi(B)", rhs_tag="Phi(A #_nu B)"),
        loewner_check("lower", PG, H, c_small=c, lhs_tag="Phi(A #_nu B)",
                      rhs_tag="K(R^2, nu) Phi(A) #_nu Phi(B)", reverse=True),
    ], ok)


def check_geo_half(batch, phi, _=None):
    A, B = _pair(batch)
    G = batch.cached(("geo", 0.5), lambda: _geo(A, B, 0.5))
    PG = apply(phi, G)
    P, ok = _definite(apply_tuple(phi, np.stack([A, B], axis=1), check=False))
    H = _geo(P[:, 0], P[:, 1], 0.5)
    R = _big_R(A, B)
    c = 2.0 * np.sqrt(R) / (1.0 + R)
    return _outcome([
        loewner_check("lower", PG, H, c_small=c, lhs_tag="Phi(A # B)",
                      rhs_tag="2 R^(1/2) / (1 + R) Phi(A) # Phi(B)", reverse=True),
    ], ok)


def check_schwarz(batch, phi, _=None):
    A = batch.mats[:, 0]
    w = np.linalg.eigvalsh(A)
    c = _kant2(w[:, -1] / w[:, 0])
    Ainv = batch.cached("inv", lambda: _inv(A))
    PA, ok = _definite(apply(phi, A))
    PA2 = apply(phi, A @ A)
    PAi = apply(phi, Ainv)
    sq = sym(PA @ PA)
    iv = _inv(PA)
    return _outcome([
        loewner_check("square", PA2, sq, lhs_tag="Phi(A^2)", rhs_tag="Phi(A)^2"),
        loewner_check("inverse", PAi, iv, lhs_tag="Phi(A^-1)", rhs_tag="Phi(A)^-1"),
        loewner_check("square_reverse", sq, PA2, c_big=c, lhs_tag="(m+M)^2/(4mM) Phi(A)^2",
                      rhs_tag="Phi(A^2)", reverse=True),
        loewner_check("inverse_reverse", iv, PAi, c_big=c, lhs_tag="(m+M)^2/(4mM) Phi(A)^-1",
                      rhs_tag="Phi(A^-1)", reverse=True),
    ], ok)


def check_three_term(batch, phi, _=None):
    A, B = _pair(batch)
    X = batch.cached("bab", lambda: sym(B @ _inv(A) @ B))
    PX = apply(phi, X)
    P, ok = _definite(apply_tuple(phi, np.stack([A, B], axis=1), check=False))
    PB = P[:, 1]
    Y = sym(PB @ _inv(P[:, 0]) @ PB)
    w = np.linalg.eigvalsh(batch.mats[:, :2])
    m, M = w[..., 0].min(axis=-1), w[..., -1].max(axis=-1)
    R = _big_R(A, B)
    return _outcome([
        loewner_check("forward", PX, Y, lhs_tag="Phi(B A^-1 B)",
                      rhs_tag="Phi(B) Phi(A)^-1 Phi(B)"),
        loewner_check("reverse_mM", Y, PX, c_big=_kant2(M / m),
                      lhs_tag="(m+M)^2/(4mM) Phi(B) Phi(A)^-1 Phi(B)",
                      rhs_tag="Phi(B A^-1 B)", reverse=True),
        loewner_check("reverse_R2", Y, PX, c_big=_kant2(R ** 2),
                      lhs_tag="(1+R^2)^2/(4R^2) Phi(B) Phi(A)^-1 Phi(B)",
                      rhs_tag="Phi(B A^-1 B)", reverse=True),
        loewner_check("reverse_R_literal", Y, PX, c_big=(1.0 + R ** 2) ** 2 / (4.0 * R),
                      lhs_tag="(1+R^2)^2/(4R) Phi(B) Phi(A)^-1 Phi(B)",
                      rhs_tag="Phi(B A^-1 B)", reverse=True),
    ], ok)


def check_t2(batch, phi, fn: ConvexFn):
    A = batch.mats[:, 0]
    f = fn.scalar
    fA = batch.cached(("f", fn.label), lambda: sym(_spectral(A, f)))
    PA, ok = _definite(apply(phi, A))
    F1 = sym(_spectral(PA, f))
    F2 = apply(phi, fA)
    c = _kant2(_cond(A))
    return _outcome([
        loewner_check("lower", F2, F1, lhs_tag="Phi(f(A))", rhs_tag="f(Phi(A))"),
        loewner_check("upper", F1, F2, c_big=c, lhs_tag="K(h, 2) f(Phi(A))",
                      rhs_tag="Phi(f(A))", reverse=True),
    ], ok)


# ---------------------------------------------------------------------------
# n-variable families


def _tuple(batch, n):
    if n > batch.mats.shape[1]:
        raise HypothesisViolation(f"batch holds {batch.mats.shape[1]} matrices, n = {n}")
    return batch.mats[:, :n]


def check_t3(batch, phi, param):
    n, t = param
    T, w = _tuple(batch, n), batch.weights[n]
    X, conv = batch.cached(("power", n, t), lambda: _solve(_power_mean, T, w, t, batch.cfg))
    PT, ok = _definite(apply_tuple(phi, T, check=False))
    Y, conv2 = _solve(_power_mean, PT, w, t, batch.cfg)
    PX = apply(phi, X)
    c = K_half(_pairwise_max_R(T) ** 2) ** (1.0 / t)
    return _outcome([
        loewner_check("upper", Y, PX, lhs_tag="P_t(w; Phi(A))", rhs_tag="Phi(P_t(w; A))"),
        loewner_check("lower", PX, Y, c_small=c, lhs_tag="Phi(P_t(w; A))",
                      rhs_tag="K(h0, 1/2)^(1/t) P_t(w; Phi(A))", reverse=True),
    ], ok, conv & conv2, "power mean did not converge")


def check_t4(batch, phi, n):
    T, w = _tuple(batch, n), batch.weights[n]
    L, conv = batch.cached(("karcher", n), lambda: _solve(_karcher, T, w, batch.cfg))
    PT, ok = _definite(apply_tuple(phi, T, check=False))
    LP, conv2 = _solve(_karcher, PT, w, batch.cfg)
    PL = apply(phi, L)
    hb = _cond(T).max(axis=-1)
    c = 4.0 * hb / (1.0 + hb) ** 2
    return _outcome([
        loewner_check("upper", LP, PL, lhs_tag="Lambda(w; Phi(A))",
                      rhs_tag="Phi(Lambda(w; A))"),
        loewner_check("lower", PL, LP, c_small=c, lhs_tag="Phi(Lambda(w; A))",
                      rhs_tag="4hbar/(1+hbar)^2 Lambda(w; Phi(A))", reverse=True),
    ], ok, conv & conv2, "Karcher iteration did not converge")


def check_order(batch, _phi, param):
    n, t = param
    T, w = _tuple(batch, n), batch.weights[n]
    L, c0 = batch.cached(("karcher", n), lambda: _solve(_karcher, T, w, batch.cfg))
    Pp, c1 = batch.cached(("power", n, t), lambda: _solve(_power_mean, T, w, t, batch.cfg))
    Pm, c2 = batch.cached(("power", n, -t), lambda: _solve(_power_mean, T, w, -t, batch.cfg))
    return _outcome([
        loewner_check("lower", L, Pm, lhs_tag="Lambda(w; A)", rhs_tag="P_-t(w; A)"),
        loewner_check("upper", Pp, L, lhs_tag="P_t(w; A)", rhs_tag="Lambda(w; A)"),
    ], None, c0 & c1 & c2, "mean solver did not converge")


def check_t5(batch, phi, n):
    T = _tuple(batch, n)
    G = batch.cached(("alm", n), lambda: _alm(T, batch.cfg).value)
    PT, ok = _definite(apply_tuple(phi, T, check=False))
    GP = _alm(PT, batch.cfg).value
    PG = apply(phi, G)
    h1 = _pairwise_max_R(T)
    c = (2.0 * np.sqrt(h1) / (1.0 + h1)) ** (n - 1)
    return _outcome([
        loewner_check("upper", GP, PG, lhs_tag="G(Phi(A))", rhs_tag="Phi(G(A))"),
        loewner_check("lower", PG, GP, c_small=c, lhs_tag="Phi(G(A))",
                      rhs_tag="(2 h1^(1/2)/(1+h1))^(n-1) G(Phi(A))", reverse=True),
    ], ok)


def check_c2(batch, phi: VectorState, n):
    T = _tuple(batch, n)
    G = batch.cached(("alm", n), lambda: _alm(T, batch.cfg).value)
    x = phi.vector
    a = np.einsum("ni,nkij,nj->nk", x, T, x)
    g = np.einsum("ni,nij,nj->n", x, G, x)
    geo = np.exp(np.mean(np.log(a), axis=-1))
    M0 = _M0(T)
    c = (2.0 * np.sqrt(M0) / (1.0 + M0)) ** (n - 1)
    return _outcome([
        scalar_check("upper", geo, g, lhs_tag="prod <A_j x, x>^(1/n)", rhs_tag="<G x, x>"),
        scalar_check("lower", g, geo, c_small=c, lhs_tag="<G x, x>",
                     rhs_tag="(2 M0^(1/2)/(1+M0))^(n-1) prod <A_j x, x>^(1/n)", reverse=True),
    ])


def check_c3(batch, _phi, n):
    T = _tuple(batch, n)
    G = batch.cached(("alm", n), lambda: _alm(T, batch.cfg).value)
    g = np.linalg.eigvalsh(G)[:, -1]
    geo = np.exp(np.mean(np.log(np.linalg.eigvalsh(T)[..., -1]), axis=-1))
    M0 = _M0(T)
    c = (2.0 * np.sqrt(M0) / (1.0 + M0)) ** (n - 1)
    return _outcome([
        scalar_check("upper", geo, g, lhs_tag="prod ||A_j||^(1/n)", rhs_tag="||G||"),
        scalar_check("lower", g, geo, c_small=c, lhs_tag="||G||",
                     rhs_tag="(2 M0^(1/2)/(1+M0))^(n-1) prod ||A_j||^(1/n)", reverse=True),
    ])


def check_contraction(batch, _phi, n):
    if 2 * n > batch.mats.shape[1]:
        raise HypothesisViolation(f"contraction needs two tuples of {n} matrices")
    TA, TB = batch.mats[:, :n], batch.mats[:, n:2 * n]
    GA = batch.cached(("alm", n), lambda: _alm(TA, batch.cfg).value)
    GB = batch.cached(("alm2", n), lambda: _alm(TB, batch.cfg).value)
    lhs = _big_R(GA, GB)
    rhs = np.exp(np.mean(np.log(_big_R(TA, TB)), axis=-1))
    return _outcome([
        scalar_check("bound", rhs, lhs, lhs_tag="prod R(A_i, B_i)^(1/n)",
                     rhs_tag="R(G(A), G(B))"),
    ])


CHECKS = {
    TheoremId.T1: check_t1,
    TheoremId.T_GEO_HALF: check_geo_half,
    TheoremId.SCHWARZ: check_schwarz,
    TheoremId.THREE_TERM: check_three_term,
    TheoremId.T2: check_t2,
    TheoremId.T3: check_t3,
    TheoremId.T4: check_t4,
    TheoremId.ORDER: check_order,
    TheoremId.T5: check_t5,
    TheoremId.C2: check_c2,
    TheoremId.C3: check_c3,
    TheoremId.CONTRACTION: check_contraction,
}

# families whose inequalities do not involve a map, and the one that uses
# vector states regardless of the configured map kinds
MAP_FREE = {TheoremId.ORDER, TheoremId.C3, TheoremId.CONTRACTION}
VECTOR_ONLY = {TheoremId.C2}
PAIR = {TheoremId.T1, TheoremId.T_GEO_HALF, TheoremId.THREE_TERM}
SINGLE = {TheoremId.SCHWARZ, TheoremId.T2}
WEIGHTED = {TheoremId.T3, TheoremId.T4, TheoremId.ORDER}


def matrices_needed(theorem: TheoremId, n_max: int) -> int:
    if theorem in SINGLE:
        return 1
    if theorem in PAIR:
        return 2
    if theorem == TheoremId.CONTRACTION:
        return 2 * n_max
    return n_max


# ---------------------------------------------------------------------------
# single-instance entry point


def _param_ok(theorem, nu=None, t=None, n=None):
    if nu is not None and not 0 < nu <= 1:
        raise HypothesisViolation(f"{theorem.label}: nu must lie in (0, 1], got {nu}")
    if t is not None and not 0 < t <= 1:
        raise HypothesisViolation(f"{theorem.label}: t must lie in (0, 1], got {t}")
    if n is not None and n < 2:
        raise HypothesisViolation(f"{theorem.label}: needs n >= 2 matrices, got {n}")


def check(theorem, *, A=None, B=None, mats=None, others=None, weights=None, phi=None,
          nu=None, t=None, f=None, x=None, cfg: NumericConfig = DEFAULT_CONFIG):
    """Check one instance of a theorem family and return its reports.

    Keyword arguments by family: ``T1``: ``A, B, phi, nu``; ``T_GeoHalf``,
    ``ThreeTerm``: ``A, B, phi``; ``Schwarz``: ``A, phi``; ``T2``: ``A, phi,
    f``; ``T3``: ``mats, weights, phi, t``; ``T4``: ``mats, weights, phi``;
    ``Order``: ``mats, weights, t``; ``T5``: ``mats, phi``; ``C2``: ``mats,
    x``; ``C3``: ``mats``; ``Contraction``: ``mats, others``. ``weights``
    defaults to uniform.

    Raises
    ------
    HypothesisViolation
        If a parameter lies outside the family's hypotheses.
    NoConvergence
        If a mean solver fails.
    """
    if not isinstance(theorem, TheoremId):
        theorem = TheoremId.parse(str(theorem))
    fn = CHECKS[theorem]
    if theorem in PAIR | SINGLE:
        stack = [A] if theorem in SINGLE else [A, B]
        mats_arr = as_spd(np.stack([np.asarray(m, dtype=float) for m in stack]), cfg)
        n = None
    else:
        mats_arr = as_spd(np.asarray(mats, dtype=float), cfg)
        n = mats_arr.shape[0]
        _param_ok(theorem, n=n)
        if theorem == TheoremId.CONTRACTION:
            other = as_spd(np.asarray(others, dtype=float), cfg)
            if other.shape != mats_arr.shape:
                raise HypothesisViolation("contraction needs two tuples of the same shape")
            mats_arr = np.concatenate([mats_arr, other])
    batch = Batch(mats_arr[None], cfg=cfg)
    if theorem in WEIGHTED:
        batch.weights[n] = as_weights(weights, n)[None]
    if theorem in MAP_FREE:
        bphi = None
    elif theorem == TheoremId.C2:
        bphi = expand(VectorState(np.asarray(x, dtype=float)), 1)
    else:
        if phi is None:
            raise HypothesisViolation(f"{theorem.label} needs a positive map phi")
        bphi = expand(phi, 1)
    if theorem == TheoremId.T1:
        _param_ok(theorem, nu=nu)
        param, params = float(nu), {"nu": float(nu)}
    elif theorem == TheoremId.T2:
        fn_ = f if isinstance(f, ConvexFn) else ConvexFn.parse(str(f))
        param, params = fn_, {"f": fn_.label}
    elif theorem in (TheoremId.T3, TheoremId.ORDER):
        _param_ok(theorem, t=t)
        param, params = (n, float(t)), {"n": n, "t": float(t)}
    elif n is not None:
        param, params = n, {"n": n}
    else:
        param, params = None, {}
    out = fn(batch, bphi, param)
    if out.failed is not None and out.failed[0]:
        raise NoConvergence(f"{theorem.label}: {out.message}")
    if out.skipped is not None and out.skipped[0]:
        raise HypothesisViolation(f"{theorem.label}: map image is not positive definite")
    return [c.report(theorem.label, 0, params) for c in out.checks]
