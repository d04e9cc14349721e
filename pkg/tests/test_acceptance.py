"""Acceptance criteria 1-7.

Each test records one PASS/FAIL line, shown in the terminal summary (and on
stdout with ``-s``). The full inequality suite runs once per session and takes
a few minutes on one core.
"""

import math
import time
from collections import Counter

import numpy as np
import pytest

from spdmeans import (K, alm_mean, arithmetic_mean, big_R, dist, geo_mean, harmonic_mean,
                      karcher_mean, karcher_residual, loewner_margin, power_mean,
                      power_mean_residual)
from spdmeans.verify import TrialSpec, gen_spd, run_suite
from spdmeans.verify.examples import example_1, example_2
from spdmeans.verify.suite import default_workers

# Bounds that the seeded suite refutes with explicit counterexamples (see
# test_verify.py): identified by (theorem, check tag, convex function or None).
REFUTED = {("T2", "upper", "neglog"), ("ThreeTerm", "reverse_mM", None), ("C3", "lower", None)}

SUITE_SPEC = TrialSpec(dims=(2, 3, 5, 8), count=500, master_seed=0)


@pytest.fixture(scope="module")
def full_suite():
    start = time.perf_counter()
    result = run_suite(SUITE_SPEC, workers=default_workers())
    return result, time.perf_counter() - start


def failing_checks(result):
    out = Counter()
    for rec in result.records:
        if rec["pass"] is None:
            continue
        if "checks" not in rec:
            out[(rec["theorem"], "error", None)] += 1
            continue
        for c in rec["checks"]:
            if not c["pass"]:
                out[(rec["theorem"], c["tag"], rec["params"].get("f"))] += 1
    return out


# ---------------------------------------------------------------------------
# 1, 2: worked examples


@pytest.mark.parametrize("criterion, run", [(1, example_1), (2, example_2)])
def test_examples(acceptance, criterion, run):
    start = time.perf_counter()
    checks = run()
    elapsed = time.perf_counter() - start
    ok = all(c.passed for c in checks) and elapsed < 1.0
    bad = [c.name for c in checks if not c.passed]
    acceptance(criterion, ok, f"{len(checks)} checks, {elapsed * 1e3:.1f} ms"
               + (f", failed: {bad}" if bad else ""))
    assert ok


def test_example_values():
    A, B = np.diag([2.0, 1.0 / 3.0]), np.diag([4.0, 0.5])
    assert abs(big_R(A, B) ** 2 - 4) <= 1e-12
    C, D = np.array([[2.0, 1.0], [1.0, 1.0]]), np.diag([1.0, 2.0])
    assert abs(big_R(C, D) ** 2 - ((5 + math.sqrt(17)) / 2) ** 2) <= 1e-10
    assert K(4.0, 0.5) >= K(48.0, 0.5) and K(4.0, 2.0) <= K(48.0, 2.0)


# ---------------------------------------------------------------------------
# 3: inequality suites


@pytest.mark.xfail(strict=True, reason="three bounds are refuted by explicit counterexamples; "
                                       "see test_verify.py and the decisions ledger")
def test_inequality_suite(acceptance, full_suite):
    result, elapsed = full_suite
    fails = failing_checks(result)
    ok = result.passed and elapsed < 300
    detail = (f"{len(result.records)} records in {elapsed:.0f} s; failing checks: "
              + (", ".join(f"{t}/{g}{'/' + f if f else ''} x{n}"
                           for (t, g, f), n in sorted(fails.items(), key=str)) or "none"))
    acceptance(3, ok, detail)
    assert ok


def test_inequality_suite_outside_refuted_bounds(full_suite):
    result, elapsed = full_suite
    assert elapsed < 300
    labels = {row["theorem"] for row in result.summary}
    assert labels == set(SUITE_SPEC.theorems)
    assert all(row["trials"] == 4 * SUITE_SPEC.count for row in result.summary)
    fails = failing_checks(result)
    assert set(fails) <= REFUTED, sorted(set(fails) - REFUTED, key=str)
    assert not any(r["pass"] is None for r in result.records)


# ---------------------------------------------------------------------------
# 4: oracle equivalences


def test_oracle_equivalences(acceptance):
    rng = np.random.default_rng(4)
    worst = dict(a=0.0, b=0.0, c=0.0, d=0.0)
    for k in range(100):
        d = 2 + k % 5
        A, B = gen_spd(d, 100.0, rng), gen_spd(d, 100.0, rng)
        nu = rng.uniform(0.05, 0.95)
        worst["a"] = max(worst["a"], dist(karcher_mean([A, B], [1 - nu, nu]).value,
                                          geo_mean(A, B, nu)))
        worst["c"] = max(worst["c"], dist(alm_mean([A, B]).value, geo_mean(A, B)))
        T = np.stack([gen_spd(d, 10.0, rng) for _ in range(3)])
        w = rng.dirichlet(np.ones(3))
        worst["d"] = max(worst["d"], dist(power_mean(T, 1.0, w).value, arithmetic_mean(T, w)),
                         dist(power_mean(T, -1.0, w).value, harmonic_mean(T, w)))
        lam = rng.uniform(0.1, 10.0, size=(4, d))
        w = rng.dirichlet(np.ones(4))
        for t in (1.0, 0.5, 0.25, -0.5):
            got = power_mean([np.diag(r) for r in lam], t, w).value
            worst["b"] = max(worst["b"], dist(got, np.diag((w @ lam ** t) ** (1 / t))))
    tol = dict(a=1e-9, b=1e-10, c=1e-12, d=1e-10)
    ok = all(worst[k] <= tol[k] for k in tol)
    acceptance(4, ok, ", ".join(f"{k}: {worst[k]:.1e} <= {tol[k]:.0e}" for k in tol))
    assert ok


# ---------------------------------------------------------------------------
# 5: solver certificates


def test_solver_certificates(acceptance):
    rng = np.random.default_rng(5)
    worst_k = worst_p = worst_alm = 0.0
    for k in range(60):
        d, n = 2 + k % 4, 3 + k % 2
        T = np.stack([gen_spd(d, 100.0, rng) for _ in range(n)])
        w = rng.dirichlet(np.ones(n))
        res = karcher_mean(T, w)
        worst_k = max(worst_k, res.residual, karcher_residual(res.value, T, w))
        for t in (1.0, 0.5, 0.25, -0.25, -1.0):
            res = power_mean(T, t, w)
            worst_p = max(worst_p, res.residual)
            if t > 0:
                worst_p = max(worst_p, power_mean_residual(res.value, T, t, w))
        hist = alm_mean(T, record=True).history
        # excess of log R over the (n-1)-th root bound, round by round
        for prev, cur in zip(hist, hist[1:]):
            worst_alm = max(worst_alm, math.log(cur) - math.log(prev) / (n - 1))
        # pairwise form on the first round
        loo = [alm_mean(np.delete(T, i, axis=0)).value for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                excess = math.log(big_R(loo[i], loo[j])) - math.log(big_R(T[i], T[j])) / (n - 1)
                worst_alm = max(worst_alm, excess)
    ok = worst_k <= 1e-10 and worst_p <= 1e-10 and worst_alm <= 1e-9
    acceptance(5, ok, f"karcher {worst_k:.1e}, power {worst_p:.1e}, "
                      f"alm excess {worst_alm:.1e}")
    assert ok


# ---------------------------------------------------------------------------
# 6: sandwich and limit


def test_sandwich_and_monotone_limit(acceptance):
    rng = np.random.default_rng(6)
    ts = (1.0, 0.5, 0.25, 0.125, 0.0625)
    order_ok, monotone = True, 0
    worst = math.inf
    for k in range(100):
        d = 2 + k % 4
        T = np.stack([gen_spd(d, 10.0, rng) for _ in range(3)])
        w = rng.dirichlet(np.ones(3))
        L = karcher_mean(T, w).value
        dists = []
        for t in ts:
            P, N = power_mean(T, t, w).value, power_mean(T, -t, w).value
            scale = max(1.0, np.linalg.norm(P, 2))
            m = min(loewner_margin(L, N), loewner_margin(P, L)) / scale
            worst = min(worst, m)
            order_ok &= m >= -1e-8
            dists.append(dist(P, L))
        monotone += all(b <= a + 1e-12 for a, b in zip(dists, dists[1:]))
    ok = order_ok and monotone >= 95
    acceptance(6, ok, f"min relative margin {worst:.1e}, monotone in {monotone}/100")
    assert ok


# ---------------------------------------------------------------------------
# 7: determinism


def test_determinism(acceptance, full_suite):
    spec = TrialSpec(dims=(2, 3), count=20, master_seed=0)
    a = run_suite(spec, workers=1)
    b = run_suite(spec, workers=2)
    same = a.jsonl() == b.jsonl() and a.jsonl() == run_suite(spec, workers=1).jsonl()
    # trials are keyed by index, so the small run is a slice of the full one
    full, _ = full_suite
    subset = [r for r in full.records if r["dim"] in (2, 3) and r["trial"] < 20]
    sliced = a.records == subset
    ok = same and sliced
    acceptance(7, ok, f"{len(a.records)} records byte-identical across reruns and workers; "
                      f"slice of the full suite {'matches' if sliced else 'differs'}")
    assert ok
