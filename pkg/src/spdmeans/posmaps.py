"""Unital positive linear maps on symmetric matrices.

Five map families are provided. Each is a frozen dataclass validated at
construction (unitality within ``UNITAL_TOL``). Parameters may carry leading
batch axes, in which case the map is a stack of independent maps applied
elementwise to a stack of matrices with the same leading axes.

Map description files are JSON objects with a ``"kind"`` key:

* ``{"kind": "compression", "isometry": [[...], ...]}`` (``d x k``, orthonormal columns)
* ``{"kind": "pinching", "dim": d, "blocks": [[0, 1], [2], ...]}``
* ``{"kind": "vector_state", "vector": [...]}`` (unit vector)
* ``{"kind": "unitary_mixture", "unitaries": [[[...]]], "weights": [...]}``
* ``{"kind": "hadamard_correlation", "correlation": [[...], ...]}``
"""

from dataclasses import dataclass
import json
from pathlib import Path
from typing import ClassVar, Dict, Sequence, Union

import numpy as np

from .errors import DimMismatch, InvalidMap, NotDefinite
from .symmat import swap, sym

UNITAL_TOL = 1e-12
ORTH_TOL = 1e-10
PSD_TOL = 1e-12

KINDS = ("compression", "pinching", "vector_state", "unitary_mixture", "hadamard_correlation")


def _arr(x):
    return np.array(x, dtype=float)


def _check_unital(phi):
    d = phi.in_dim
    out = phi(np.eye(d))
    err = np.max(np.abs(out - np.eye(out.shape[-1])))
    if not err <= UNITAL_TOL:
        raise InvalidMap(f"{phi.kind}: map is not unital (|Phi(I) - I| = {err:.3g})")


@dataclass(frozen=True)
class Compression:
    """``X -> V^T X V`` for an isometry ``V`` of shape ``(..., d, k)``."""

    isometry: np.ndarray
    kind: ClassVar[str] = "compression"
    core: ClassVar[Dict[str, int]] = {"isometry": 2}

    def __post_init__(self):
        V = _arr(self.isometry)
        if V.ndim < 2 or V.shape[-1] > V.shape[-2] or V.shape[-1] < 1:
            raise InvalidMap(f"compression: isometry must be d x k with k <= d, got {V.shape}")
        object.__setattr__(self, "isometry", V)
        _check_unital(self)

    @property
    def in_dim(self):
        return self.isometry.shape[-2]

    @property
    def out_dim(self):
        return self.isometry.shape[-1]

    def __call__(self, X):
        V = self.isometry
        return swap(V) @ X @ V


@dataclass(frozen=True)
class Pinching:
    """``X -> X o mask`` where ``mask`` is the 0/1 pattern of a block partition."""

    mask: np.ndarray
    kind: ClassVar[str] = "pinching"
    core: ClassVar[Dict[str, int]] = {"mask": 2}

    def __post_init__(self):
        M = _arr(self.mask)
        if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
            raise InvalidMap(f"pinching: mask must be square, got {M.shape}")
        if not np.all((M == 0) | (M == 1)) or not np.array_equal(M, swap(M)):
            raise InvalidMap("pinching: mask must be a symmetric 0/1 matrix")
        # a block pattern is an equivalence relation: transitive as well
        if not np.array_equal(np.minimum(M @ M, 1.0), M):
            raise InvalidMap("pinching: mask is not the pattern of a block partition")
        object.__setattr__(self, "mask", M)
        _check_unital(self)

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[int]], dim: int):
        seen = sorted(i for b in blocks for i in b)
        if seen != list(range(dim)):
            raise InvalidMap(f"pinching: blocks must partition 0..{dim - 1}, got {blocks}")
        M = np.zeros((dim, dim))
        for b in blocks:
            M[np.ix_(b, b)] = 1.0
        return cls(M)

    def blocks(self):
        """Block partition of an unbatched pinching, ordered by first index."""
        if self.mask.ndim != 2:
            raise ValueError("blocks() needs an unbatched map")
        out, seen = [], set()
        for i in range(self.in_dim):
            if i not in seen:
                b = [int(j) for j in np.flatnonzero(self.mask[i])]
                seen.update(b)
                out.append(b)
        return out

    @property
    def in_dim(self):
        return self.mask.shape[-1]

    out_dim = in_dim

    def __call__(self, X):
        return X * self.mask


@dataclass(frozen=True)
class VectorState:
    """``X -> [x^T X x]`` for a unit vector ``x``; the image is ``1 x 1``."""

    vector: np.ndarray
    kind: ClassVar[str] = "vector_state"
    core: ClassVar[Dict[str, int]] = {"vector": 1}

    def __post_init__(self):
        x = _arr(self.vector)
        if x.ndim < 1 or x.shape[-1] < 1:
            raise InvalidMap("vector_state: vector must be nonempty")
        object.__setattr__(self, "vector", x)
        _check_unital(self)

    @property
    def in_dim(self):
        return self.vector.shape[-1]

    @property
    def out_dim(self):
        return 1

    def __call__(self, X):
        x = self.vector[..., :, None]
        return swap(x) @ X @ x


@dataclass(frozen=True)
class UnitaryMixture:
    """``X -> sum_k c_k U_k^T X U_k`` with orthogonal ``U_k`` and convex weights ``c``."""

    unitaries: np.ndarray
    weights: np.ndarray
    kind: ClassVar[str] = "unitary_mixture"
    core: ClassVar[Dict[str, int]] = {"unitaries": 3, "weights": 1}

    def __post_init__(self):
        U, c = _arr(self.unitaries), _arr(self.weights)
        if U.ndim < 3 or U.shape[-1] != U.shape[-2]:
            raise InvalidMap(f"unitary_mixture: unitaries must be m x d x d, got {U.shape}")
        if c.shape[-1] != U.shape[-3]:
            raise InvalidMap("unitary_mixture: one weight per unitary is required")
        if np.any(c < 0):
            raise InvalidMap("unitary_mixture: weights must be nonnegative")
        err = np.max(np.abs(swap(U) @ U - np.eye(U.shape[-1])))
        if not err <= ORTH_TOL:
            raise InvalidMap(f"unitary_mixture: matrix is not orthogonal (error {err:.3g})")
        object.__setattr__(self, "unitaries", U)
        object.__setattr__(self, "weights", c)
        _check_unital(self)

    @property
    def in_dim(self):
        return self.unitaries.shape[-1]

    out_dim = in_dim

    def __call__(self, X):
        U = self.unitaries
        Y = swap(U) @ X[..., None, :, :] @ U
        return np.sum(self.weights[..., :, None, None] * Y, axis=-3)


@dataclass(frozen=True)
class HadamardCorrelation:
    """``X -> X o C`` for a positive semidefinite ``C`` with unit diagonal."""

    correlation: np.ndarray
    kind: ClassVar[str] = "hadamard_correlation"
    core: ClassVar[Dict[str, int]] = {"correlation": 2}

    def __post_init__(self):
        C = _arr(self.correlation)
        if C.ndim < 2 or C.shape[-1] != C.shape[-2]:
            raise InvalidMap(f"hadamard_correlation: matrix must be square, got {C.shape}")
        if np.max(np.abs(C - swap(C))) > UNITAL_TOL:
            raise InvalidMap("hadamard_correlation: matrix must be symmetric")
        if np.min(np.linalg.eigvalsh(sym(C))) < -PSD_TOL:
            raise InvalidMap("hadamard_correlation: matrix must be positive semidefinite")
        object.__setattr__(self, "correlation", C)
        _check_unital(self)

    @property
    def in_dim(self):
        return self.correlation.shape[-1]

    out_dim = in_dim

    def __call__(self, X):
        return X * self.correlation


PositiveMap = Union[Compression, Pinching, VectorState, UnitaryMixture, HadamardCorrelation]
_CLASSES = {cls.kind: cls for cls in
            (Compression, Pinching, VectorState, UnitaryMixture, HadamardCorrelation)}


def _with_params(phi, **params):
    # bypass validation: params are reshaped copies of already-validated ones
    new = object.__new__(type(phi))
    for name, value in params.items():
        object.__setattr__(new, name, value)
    return new


def expand(phi, axes: int = 1):
    """Insert ``axes`` singleton axes between the batch axes and the parameter core."""
    params = {}
    for name, core in phi.core.items():
        p = getattr(phi, name)
        idx = (Ellipsis,) + (None,) * axes + (slice(None),) * core
        params[name] = p[idx]
    return _with_params(phi, **params)


def stack(maps: Sequence):
    """Stack maps of one kind and shape into a single batched map (batch axis 0)."""
    kinds = {m.kind for m in maps}
    if len(kinds) != 1:
        raise InvalidMap(f"cannot stack maps of kinds {sorted(kinds)}")
    first = maps[0]
    return _with_params(first, **{name: np.stack([getattr(m, name) for m in maps])
                                  for name in first.core})


def apply(phi, X):
    """Apply ``phi`` to a symmetric matrix or stack of matrices."""
    X = np.asarray(X, dtype=float)
    if X.shape[-1] != phi.in_dim or X.shape[-2] != phi.in_dim:
        raise DimMismatch(f"{phi.kind} expects {phi.in_dim} x {phi.in_dim} input, got {X.shape}")
    return sym(phi(X))


def apply_tuple(phi, T, check: bool = True):
    """Apply ``phi`` to every matrix of a tuple stacked along axis -3.

    Batched map parameters line up with the axes in front of the tuple axis.
    With ``check`` the images are required to be positive definite.
    """
    T = np.asarray(T, dtype=float)
    out = apply(expand(phi), T)
    if check:
        lam = np.linalg.eigvalsh(out)[..., 0]
        if np.any(lam <= 0):
            raise NotDefinite(f"{phi.kind}: image is not positive definite "
                              f"(smallest eigenvalue {float(np.min(lam)):.3g})")
    return out


# ---------------------------------------------------------------------------
# random maps


def random_orthogonal(dim: int, rng: np.random.Generator, cols: int = None):
    """Haar-distributed orthogonal matrix (or its first ``cols`` columns)."""
    Q, R = np.linalg.qr(rng.standard_normal((dim, dim)))
    Q = Q * np.sign(np.diagonal(R))
    return Q if cols is None else Q[:, :cols]


def random_map(kind: str, dim: int, rng: np.random.Generator):
    """Draw a random map of the given kind acting on ``dim x dim`` matrices.

    Compressions keep ``max(1, (dim + 1) // 2)`` dimensions; pinchings cut
    ``range(dim)`` at random points; mixtures use three orthogonal matrices
    with Dirichlet weights; correlations are normalized Gram matrices of
    ``dim`` Gaussian vectors.
    """
    if kind == "compression":
        V = random_orthogonal(dim, rng, cols=max(1, (dim + 1) // 2))
        # re-orthonormalize to push the unitality error to roundoff
        V, _ = np.linalg.qr(V)
        return Compression(V)
    if kind == "pinching":
        cuts = np.flatnonzero(rng.random(dim - 1) < 0.5) + 1
        parts = np.split(np.arange(dim), cuts)
        return Pinching.from_blocks([p.tolist() for p in parts], dim)
    if kind == "vector_state":
        x = rng.standard_normal(dim)
        return VectorState(x / np.linalg.norm(x))
    if kind == "unitary_mixture":
        U = np.stack([random_orthogonal(dim, rng) for _ in range(3)])
        return UnitaryMixture(U, rng.dirichlet(np.ones(3)))
    if kind == "hadamard_correlation":
        G = rng.standard_normal((dim, dim))
        S = G @ G.T
        s = 1.0 / np.sqrt(np.diagonal(S))
        C = S * s[:, None] * s[None, :]
        np.fill_diagonal(C, 1.0)
        return HadamardCorrelation(sym(C))
    raise InvalidMap(f"unknown map kind {kind!r}; expected one of {KINDS}")


# ---------------------------------------------------------------------------
# map description files


def to_dict(phi) -> dict:
    if phi.kind == "compression":
        return {"kind": phi.kind, "isometry": phi.isometry.tolist()}
    if phi.kind == "pinching":
        return {"kind": phi.kind, "dim": phi.in_dim, "blocks": phi.blocks()}
    if phi.kind == "vector_state":
        return {"kind": phi.kind, "vector": phi.vector.tolist()}
    if phi.kind == "unitary_mixture":
        return {"kind": phi.kind, "unitaries": phi.unitaries.tolist(),
                "weights": phi.weights.tolist()}
    return {"kind": phi.kind, "correlation": phi.correlation.tolist()}


def from_dict(spec: dict):
    try:
        kind = spec["kind"]
        if kind == "compression":
            return Compression(spec["isometry"])
        if kind == "pinching":
            return Pinching.from_blocks(spec["blocks"], int(spec["dim"]))
        if kind == "vector_state":
            return VectorState(spec["vector"])
        if kind == "unitary_mixture":
            return UnitaryMixture(spec["unitaries"], spec["weights"])
        if kind == "hadamard_correlation":
            return HadamardCorrelation(spec["correlation"])
    except KeyError as exc:
        raise InvalidMap(f"map description is missing field {exc}")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidMap):
            raise
        raise InvalidMap(f"malformed map description: {exc}")
    raise InvalidMap(f"unknown map kind {spec.get('kind')!r}; expected one of {KINDS}")


def load_map(path):
    path = Path(path)
    try:
        spec = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidMap(f"{path}: not valid JSON ({exc})")
    if not isinstance(spec, dict):
        raise InvalidMap(f"{path}: expected a JSON object")
    try:
        return from_dict(spec)
    except InvalidMap as exc:
        raise InvalidMap(f"{path}: {exc}")


def dump_map(phi, path):
    Path(path).write_text(json.dumps(to_dict(phi), indent=2) + "\n")
