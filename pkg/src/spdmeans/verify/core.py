"""Identifiers, configuration and report types for the inequality checks."""

from dataclasses import asdict, dataclass, field, fields
import enum
import json
import math
from pathlib import Path
from typing import Callable, Optional, Tuple

import numpy as np

from ..errors import HypothesisViolation
from ..posmaps import KINDS
from ..symmat import swap, sym

LOEWNER_TOL = 1e-8


class TheoremId(enum.Enum):
    """One member per checked family; the value is a stable integer code used in seeding."""

    T1 = 1
    T_GEO_HALF = 2
    SCHWARZ = 3
    THREE_TERM = 4
    T2 = 5
    T3 = 6
    T4 = 7
    ORDER = 8
    T5 = 9
    C2 = 10
    C3 = 11
    CONTRACTION = 12

    @property
    def label(self):
        return _LABELS[self]

    @classmethod
    def parse(cls, name: str) -> "TheoremId":
        key = name.strip().lower().replace("-", "_")
        for member in cls:
            if key in (member.name.lower(), member.label.lower()):
                return member
        raise ValueError(f"unknown theorem {name!r}; expected one of "
                         f"{', '.join(m.label for m in cls)}")


_LABELS = {
    TheoremId.T1: "T1",
    TheoremId.T_GEO_HALF: "T_GeoHalf",
    TheoremId.SCHWARZ: "Schwarz",
    TheoremId.THREE_TERM: "ThreeTerm",
    TheoremId.T2: "T2",
    TheoremId.T3: "T3",
    TheoremId.T4: "T4",
    TheoremId.ORDER: "Order",
    TheoremId.T5: "T5",
    TheoremId.C2: "C2",
    TheoremId.C3: "C3",
    TheoremId.CONTRACTION: "Contraction",
}


@dataclass(frozen=True)
class ConvexFn:
    """An operator convex function on (0, inf), applied to eigenvalues."""

    name: str
    p: Optional[float] = None

    def __post_init__(self):
        if self.name not in ("square", "inverse", "power", "neglog"):
            raise ValueError(f"unknown convex function {self.name!r}")
        if self.name == "power" and not (self.p is not None and 1 <= self.p <= 2):
            raise HypothesisViolation("power functions are operator convex only for p in [1, 2]")

    @classmethod
    def parse(cls, text: str) -> "ConvexFn":
        """``"square"``, ``"inverse"``, ``"neglog"`` or ``"power:<p>"``."""
        name, _, arg = text.strip().lower().partition(":")
        if name == "power":
            return cls("power", float(arg) if arg else 1.5)
        return cls(name)

    @property
    def label(self):
        return f"power:{self.p:g}" if self.name == "power" else self.name

    @property
    def scalar(self) -> Callable:
        if self.name == "square":
            return np.square
        if self.name == "inverse":
            return np.reciprocal
        if self.name == "neglog":
            return lambda w: -np.log(w)
        p = self.p
        return lambda w: w ** p


SQUARE = ConvexFn("square")
INVERSE = ConvexFn("inverse")
POWER_1_5 = ConvexFn("power", 1.5)
NEGLOG = ConvexFn("neglog")


@dataclass(frozen=True)
class TrialSpec:
    """What to run: dimensions, trial count, seeds and parameter grids.

    ``dims`` is a tuple so one spec can cover several dimensions; every
    dimension must lie in [2, 16].
    """

    dims: Tuple[int, ...] = (2,)
    count: int = 100
    master_seed: int = 0
    cond_cap: float = 10.0
    nu_grid: Tuple[float, ...] = (0.1, 0.25, 0.5, 0.75, 0.9)
    t_grid: Tuple[float, ...] = (0.25, 0.5, 1.0)
    n_grid: Tuple[int, ...] = (3, 4)
    f_grid: Tuple[str, ...] = ("square", "inverse", "power:1.5", "neglog")
    map_kinds: Tuple[str, ...] = KINDS
    theorems: Tuple[str, ...] = tuple(m.label for m in TheoremId)

    def __post_init__(self):
        for name in ("dims", "nu_grid", "t_grid", "n_grid", "f_grid", "map_kinds", "theorems"):
            value = getattr(self, name)
            if isinstance(value, (str, int, float)):
                value = (value,)
            object.__setattr__(self, name, tuple(value))
        if not self.dims or any(int(d) != d or not 2 <= d <= 16 for d in self.dims):
            raise ValueError(f"dims must be integers in [2, 16], got {self.dims}")
        if int(self.count) != self.count or self.count < 0:
            raise ValueError("count must be a nonnegative integer")
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if not self.cond_cap > 1 or not math.isfinite(self.cond_cap):
            raise ValueError("cond_cap must be a finite number > 1")
        if any(not 0 < nu <= 1 for nu in self.nu_grid):
            raise ValueError("nu values must lie in (0, 1]")
        if any(not 0 < t <= 1 for t in self.t_grid):
            raise ValueError("t values must lie in (0, 1]")
        if any(int(n) != n or n < 2 for n in self.n_grid):
            raise ValueError("n values must be integers >= 2")
        for f in self.f_grid:
            ConvexFn.parse(f)
        bad = set(self.map_kinds) - set(KINDS)
        if bad:
            raise ValueError(f"unknown map kinds {sorted(bad)}; expected a subset of {KINDS}")
        for name in self.theorems:
            TheoremId.parse(name)

    @property
    def theorem_ids(self):
        ids = {TheoremId.parse(name) for name in self.theorems}
        return [m for m in TheoremId if m in ids]

    @property
    def functions(self):
        return [ConvexFn.parse(f) for f in self.f_grid]

    def to_dict(self):
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data: dict) -> "TrialSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "TrialSpec":
        data = json.loads(Path(path).read_text())
        if not isinstance(data, dict):
            raise ValueError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)


@dataclass
class InequalityReport:
    """Outcome of one inequality check ``lhs >= rhs`` in the Loewner order.

    ``margin`` is the smallest eigenvalue of ``lhs - rhs`` (a plain difference
    for scalar checks), ``scale`` is ``max(1, ||lhs||, ||rhs||)`` and
    ``passed`` is ``margin >= -LOEWNER_TOL * scale``. ``tightness`` is
    ``lambda_max(lhs^{-1/2} rhs lhs^{-1/2})``: at most 1 when the check
    passes, and 1 when the constant cannot be improved for this instance. It
    is reported only for reverse (constant-carrying) bounds.
    """

    theorem: str
    tag: str
    lhs_tag: str
    rhs_tag: str
    margin: float
    scale: float
    constant: float
    passed: bool
    tightness: Optional[float] = None
    params: dict = field(default_factory=dict)

    def as_json(self):
        return {"tag": self.tag, "lhs": self.lhs_tag, "rhs": self.rhs_tag,
                "margin": _num(self.margin), "scale": _num(self.scale),
                "constant": _num(self.constant), "pass": bool(self.passed),
                "tightness": _num(self.tightness)}


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


@dataclass
class CheckBatch:
    """One inequality evaluated over a batch of instances (leading axis)."""

    tag: str
    lhs_tag: str
    rhs_tag: str
    margin: np.ndarray
    scale: np.ndarray
    constant: np.ndarray
    tightness: Optional[np.ndarray] = None

    @property
    def passed(self):
        return self.margin >= -LOEWNER_TOL * self.scale

    def report(self, theorem: str, i: int, params=None) -> InequalityReport:
        tight = None if self.tightness is None else float(self.tightness[i])
        return InequalityReport(theorem, self.tag, self.lhs_tag, self.rhs_tag,
                                float(self.margin[i]), float(self.scale[i]),
                                float(self.constant[i]), bool(self.passed[i]), tight,
                                dict(params or {}))


def _norm2(X):
    w = np.linalg.eigvalsh(X)
    return np.maximum(np.abs(w[..., 0]), np.abs(w[..., -1]))


def loewner_check(tag, big, small, c_big=1.0, c_small=1.0, lhs_tag="", rhs_tag="",
                  reverse=False) -> CheckBatch:
    """Evaluate ``c_big * big >= c_small * small`` for stacks of symmetric matrices.

    ``reverse`` marks a bound carrying a non-trivial constant; only those get
    a tightness value.
    """
    n = big.shape[0]
    c_big = np.broadcast_to(np.asarray(c_big, dtype=float), (n,))
    c_small = np.broadcast_to(np.asarray(c_small, dtype=float), (n,))
    lhs = c_big[:, None, None] * big
    rhs = c_small[:, None, None] * small
    margin = np.linalg.eigvalsh(sym(lhs - rhs))[..., 0]
    scale = np.maximum(1.0, np.maximum(_norm2(lhs), _norm2(rhs)))
    constant = np.where(c_big != 1.0, c_big, c_small)
    tight = None
    if reverse:
        tight = np.full(n, np.nan)
        w, V = np.linalg.eigh(sym(lhs))
        ok = w[:, 0] > 0
        if ok.any():
            S = (V[ok] / np.sqrt(w[ok])[:, None, :]) @ swap(V[ok])
            tight[ok] = np.linalg.eigvalsh(sym(S @ rhs[ok] @ S))[:, -1]
    return CheckBatch(tag, lhs_tag, rhs_tag, margin, scale, constant, tight)


def scalar_check(tag, big, small, c_big=1.0, c_small=1.0, lhs_tag="", rhs_tag="",
                 reverse=False) -> CheckBatch:
    """Scalar version of :func:`loewner_check` (``big``, ``small`` of shape ``(n,)``)."""
    return loewner_check(tag, np.asarray(big, dtype=float)[:, None, None],
                         np.asarray(small, dtype=float)[:, None, None],
                         c_big, c_small, lhs_tag, rhs_tag, reverse)
