"""Print the two worked examples: Thompson ratios, condition bounds, constants."""

import math

from spdmeans import K, big_R
from spdmeans.verify import run_examples
from spdmeans.verify.examples import EXAMPLE_1, EXAMPLE_2, _bounds_ratio


def describe(label, A, B):
    R2 = big_R(A, B) ** 2
    # h = (M1 M2) / (m1 m2) from the extreme eigenvalues of A and B
    h = _bounds_ratio(A, B)
    print(f"{label}: R^2 = {R2:.12g}, h = {h:.12g}")
    for nu in (0.5, 2.0):
        print(f"  K(R^2, {nu}) = {K(R2, nu):.12g}   K(h, {nu}) = {K(h, nu):.12g}")


def main():
    describe("example 1", *EXAMPLE_1)
    describe("example 2", *EXAMPLE_2)
    print()
    for c in run_examples():
        print(f"example {c.example}: {c.name}: {'PASS' if c.passed else 'FAIL'}")
    print(f"\n(5 + sqrt 17)^2 / 4 = {((5 + math.sqrt(17)) / 2) ** 2:.12g}")


if __name__ == "__main__":
    main()
