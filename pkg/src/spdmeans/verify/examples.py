"""The two worked 2 x 2 examples comparing the Kantorovich constants
``K(R^2, nu)`` and ``K(h, nu)`` with ``h = M1 M2 / (m1 m2)``.

For the first pair ``R^2 < h``, so the ``R``-based constant is the better one
at ``nu = 1/2`` and the worse one at ``nu = 2``; for the second pair the
orientations flip.
"""

from dataclasses import dataclass
import math
from typing import List

import numpy as np

from ..kantorovich import K
from ..thompson import big_R

EXAMPLE_1 = (np.diag([2.0, 1.0 / 3.0]), np.diag([4.0, 0.5]))
EXAMPLE_2 = (np.array([[2.0, 1.0], [1.0, 1.0]]), np.diag([1.0, 2.0]))


@dataclass
class ExampleCheck:
    example: int
    name: str
    value: object
    expected: object
    passed: bool

    def as_json(self):
        conv = (lambda v: np.asarray(v).tolist() if isinstance(v, np.ndarray) else v)
        return {"example": self.example, "check": self.name, "value": conv(self.value),
                "expected": conv(self.expected), "pass": bool(self.passed)}


def _close(example, name, value, expected, tol):
    ok = bool(np.all(np.abs(np.asarray(value) - np.asarray(expected)) <= tol))
    return ExampleCheck(example, name, value, expected, ok)


def _bounds_ratio(A, B):
    wa, wb = np.linalg.eigvalsh(A), np.linalg.eigvalsh(B)
    return (wa[-1] * wb[-1]) / (wa[0] * wb[0])


def _orientation(example, R2, h, r_better_at_half):
    """Compare the constants; ``r_better_at_half`` is the expected orientation."""
    kr_half, kh_half = K(R2, 0.5), K(h, 0.5)
    kr_two, kh_two = K(R2, 2.0), K(h, 2.0)
    if r_better_at_half:
        return [
            ExampleCheck(example, "K(R^2,1/2) >= K(h,1/2)", (kr_half, kh_half), ">=",
                         kr_half >= kh_half),
            ExampleCheck(example, "K(R^2,2) <= K(h,2)", (kr_two, kh_two), "<=",
                         kr_two <= kh_two),
        ]
    return [
        ExampleCheck(example, "K(R^2,1/2) <= K(h,1/2)", (kr_half, kh_half), "<=",
                     kr_half <= kh_half),
        ExampleCheck(example, "K(R^2,2) >= K(h,2)", (kr_two, kh_two), ">=", kr_two >= kh_two),
    ]


def example_1() -> List[ExampleCheck]:
    A, B = EXAMPLE_1
    R2 = float(big_R(A, B)) ** 2
    h = _bounds_ratio(A, B)
    out = [
        _close(1, "A^-1 B", np.linalg.solve(A, B), np.diag([2.0, 1.5]), 1e-12),
        _close(1, "B^-1 A", np.linalg.solve(B, A), np.diag([0.5, 2.0 / 3.0]), 1e-12),
        _close(1, "R(A,B)^2", R2, 4.0, 1e-12),
        _close(1, "h", h, 48.0, 1e-12),
        ExampleCheck(1, "R^2 <= h", (R2, h), "<=", R2 <= h),
    ]
    return out + _orientation(1, R2, h, True)


def example_2() -> List[ExampleCheck]:
    C, D = EXAMPLE_2
    R2 = float(big_R(C, D)) ** 2
    h = _bounds_ratio(C, D)
    s5, s17 = math.sqrt(5.0), math.sqrt(17.0)
    out = [
        _close(2, "spectrum of C", np.linalg.eigvalsh(C), [(3 - s5) / 2, (3 + s5) / 2], 1e-12),
        _close(2, "C^-1 D", np.linalg.solve(C, D), np.array([[1.0, -2.0], [-1.0, 4.0]]), 1e-12),
        _close(2, "D^-1 C", np.linalg.solve(D, C), np.array([[2.0, 1.0], [0.5, 0.5]]), 1e-12),
        _close(2, "R(C,D)^2", R2, ((5 + s17) / 2) ** 2, 1e-10),
        _close(2, "h", h, (3 + s5) ** 2 / 2, 1e-10),
        ExampleCheck(2, "R^2 >= h", (R2, h), ">=", R2 >= h),
    ]
    return out + _orientation(2, R2, h, False)


def run_examples() -> List[ExampleCheck]:
    """Rebuild both examples and check every stated value and comparison."""
    return example_1() + example_2()
