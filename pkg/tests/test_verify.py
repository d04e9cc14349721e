import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spdmeans import HypothesisViolation, K
from spdmeans.posmaps import KINDS, Compression, Pinching, VectorState, random_map
from spdmeans.verify import (ConvexFn, TheoremId, TrialSpec, check, gen_spd, run_examples,
                             run_suite)
from conftest import random_spd

LOWER_TAGS = {"T1": "lower", "T_GeoHalf": "lower", "T3": "lower", "T4": "lower",
              "T5": "lower", "C2": "lower", "C3": "lower"}


def by_tag(reports):
    return {r.tag: r for r in reports}


# ---------------------------------------------------------------------------
# instance generation


def test_gen_spd_is_deterministic():
    np.testing.assert_array_equal(gen_spd(4, 10.0, 123), gen_spd(4, 10.0, 123))
    assert not np.array_equal(gen_spd(4, 10.0, 123), gen_spd(4, 10.0, 124))


def test_gen_spd_condition_cap():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        w = np.linalg.eigvalsh(gen_spd(3, 10.0, rng))
        assert w[0] > 0 and w[-1] / w[0] <= 10.0 * (1 + 1e-12)


def test_gen_spd_near_identity_for_tiny_cap():
    from spdmeans import big_R
    A = gen_spd(4, 1.0 + 1e-9, 1)
    c = np.trace(A) / 4
    assert big_R(A, c * np.eye(4)) == pytest.approx(1.0, abs=1e-8)


def test_gen_spd_rejects_bad_arguments():
    with pytest.raises(ValueError):
        gen_spd(3, 1.0, 0)


# ---------------------------------------------------------------------------
# configuration types


def test_trial_spec_validation():
    TrialSpec(dims=(2, 16))
    for bad in (dict(dims=(1,)), dict(dims=(17,)), dict(count=-1), dict(cond_cap=1.0),
                dict(nu_grid=(0.0,)), dict(t_grid=(1.5,)), dict(n_grid=(1,)),
                dict(map_kinds=("transpose",)), dict(theorems=("T9",)),
                dict(f_grid=("power:3",))):
        with pytest.raises(ValueError):
            TrialSpec(**bad)


def test_trial_spec_round_trip(tmp_path):
    spec = TrialSpec(dims=(2, 3), count=5, theorems=("T1", "C3"))
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(spec.to_dict()))
    assert TrialSpec.from_file(path) == spec
    with pytest.raises(ValueError, match="unknown config keys"):
        TrialSpec.from_dict({"dimz": [2]})


def test_theorem_and_function_names():
    assert TheoremId.parse("t_geohalf") is TheoremId.T_GEO_HALF
    assert TheoremId.parse("Contraction").value == 12
    assert [m.value for m in TheoremId] == list(range(1, 13))
    assert ConvexFn.parse("power:1.5").p == 1.5
    assert ConvexFn.parse("neglog").scalar(np.e) == pytest.approx(-1.0)


# ---------------------------------------------------------------------------
# single instances


def test_t1_equal_pair_is_tight(rng):
    A = random_spd(rng, 3)
    phi = random_map("compression", 3, rng)
    for r in check("T1", A=A, B=A, phi=phi, nu=0.3):
        assert r.constant == pytest.approx(1.0)
        assert abs(r.margin) <= 1e-12 * r.scale and r.passed


def test_hypotheses_are_enforced(rng):
    A = random_spd(rng, 2)
    phi = random_map("pinching", 2, rng)
    with pytest.raises(HypothesisViolation):
        check("T1", A=A, B=A, phi=phi, nu=1.5)
    with pytest.raises(HypothesisViolation):
        check("T3", mats=np.stack([A, A]), phi=phi, t=0.0)
    with pytest.raises(HypothesisViolation):
        check("T5", mats=A[None], phi=phi)
    with pytest.raises(HypothesisViolation):
        check("T2", A=A, phi=phi, f="power:2.5")


def test_t5_with_two_matrices_reduces_to_sharp(rng):
    for kind in KINDS:
        phi = random_map(kind, 3, rng)
        A, B = random_spd(rng, 3), random_spd(rng, 3)
        t5 = by_tag(check("T5", mats=np.stack([A, B]), phi=phi))["lower"]
        gh = by_tag(check("T_GeoHalf", A=A, B=B, phi=phi))["lower"]
        assert t5.margin == pytest.approx(gh.margin, abs=1e-9)
        assert t5.constant == pytest.approx(gh.constant, rel=1e-12)


def test_contraction_with_equal_tuples(rng):
    T = np.stack([random_spd(rng, 3) for _ in range(3)])
    (r,) = check("Contraction", mats=T, others=T)
    assert r.margin == pytest.approx(0.0, abs=1e-12) and r.passed


REVERSE_IS_TIGHT_AT_EQUAL = {
    "T1": dict(nu=0.4), "T_GeoHalf": {}, "T3": dict(t=0.5), "T5": {},
}


@pytest.mark.parametrize("kind", KINDS)
def test_equal_inputs_make_r_based_bounds_tight(rng, kind):
    A = random_spd(rng, 3, 50.0)
    phi = random_map(kind, 3, rng)
    T = np.stack([A, A, A])
    reports = (check("T1", A=A, B=A, phi=phi, nu=0.4)
               + check("T_GeoHalf", A=A, B=A, phi=phi)
               + check("T3", mats=T, phi=phi, t=0.5)
               + check("T5", mats=T, phi=phi)
               + check("Contraction", mats=T, others=T)
               + [r for r in check("ThreeTerm", A=A, B=A, phi=phi) if r.tag != "reverse_mM"])
    for r in reports:
        assert abs(r.margin) <= 1e-9 * r.scale, (r.theorem, r.tag, r.margin)


@pytest.mark.parametrize("kind", KINDS)
def test_scalar_inputs_make_every_bound_tight(rng, kind):
    A = 1.7 * np.eye(3)
    phi = random_map(kind, 3, rng)
    T = np.stack([A, A, A])
    x = random_map("vector_state", 3, rng).vector
    reports = (check("Schwarz", A=A, phi=phi) + check("ThreeTerm", A=A, B=A, phi=phi)
               + check("T4", mats=T, phi=phi) + check("Order", mats=T, t=0.25)
               + check("C2", mats=T, x=x) + check("C3", mats=T)
               + [r for f in ("square", "inverse", "power:1.5", "neglog")
                  for r in check("T2", A=A, phi=phi, f=f)])
    for r in reports:
        assert abs(r.margin) <= 1e-9 * r.scale, (r.theorem, r.tag, r.margin)


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([0.1, 0.25, 0.5, 0.75, 0.9]))
def test_commuting_inputs_match_scalar_evaluation(seed, nu):
    rng = np.random.default_rng(seed)
    a, b = rng.uniform(0.1, 10, 3), rng.uniform(0.1, 10, 3)
    x = rng.standard_normal(3)
    x /= np.linalg.norm(x)
    p = x * x
    phi = VectorState(x)
    rep = by_tag(check("T1", A=np.diag(a), B=np.diag(b), phi=phi, nu=nu))
    G = p @ (a ** (1 - nu) * b ** nu)
    H = (p @ a) ** (1 - nu) * (p @ b) ** nu
    R2 = max(np.max(b / a), np.max(a / b)) ** 2
    assert rep["upper"].margin == pytest.approx(H - G, abs=1e-10)
    assert rep["lower"].margin == pytest.approx(G - K(R2, nu) * H, abs=1e-10)
    rep = by_tag(check("T2", A=np.diag(a), phi=phi, f="inverse"))
    h = a.max() / a.min()
    assert rep["lower"].margin == pytest.approx(p @ (1 / a) - 1 / (p @ a), abs=1e-10)
    assert rep["upper"].margin == pytest.approx(
        (1 + h) ** 2 / (4 * h) / (p @ a) - p @ (1 / a), abs=1e-10)


def test_t1_constant_decreases_with_R(rng):
    rows = []
    for cap in (1.5, 3.0, 10.0, 100.0, 1000.0):
        for _ in range(20):
            A, B = random_spd(rng, 3, cap), random_spd(rng, 3, cap)
            from spdmeans import big_R
            r = by_tag(check("T1", A=A, B=B, phi=random_map("pinching", 3, rng), nu=0.3))
            rows.append((big_R(A, B), r["lower"].constant))
    rows.sort()
    consts = [c for _, c in rows]
    assert all(b <= a + 1e-15 for a, b in zip(consts, consts[1:]))


# ---------------------------------------------------------------------------
# bounds that fail: deterministic counterexamples


def test_neglog_upper_bound_counterexample():
    # -log is negative on (1, inf): scaling it by K(h, 2) > 1 moves it the wrong way
    phi = VectorState(np.array([1.0, 1.0]) / math.sqrt(2))
    r = by_tag(check("T2", A=np.diag([2.0, 8.0]), phi=phi, f="neglog"))
    assert r["lower"].passed
    assert r["upper"].constant == pytest.approx(25 / 16)
    assert r["upper"].margin == pytest.approx(-25 / 16 * math.log(5) + math.log(4), rel=1e-12)
    assert not r["upper"].passed


def test_joint_bounds_reverse_counterexample():
    phi = VectorState(np.array([1.0, 1.0]) / math.sqrt(2))
    r = by_tag(check("ThreeTerm", A=np.diag([1.0, 4.0]), B=np.diag([4.0, 1.0]), phi=phi))
    # Phi(B) Phi(A)^-1 Phi(B) = 5/2 while Phi(B A^-1 B) = 65/8
    assert r["reverse_mM"].margin == pytest.approx(25 / 16 * 5 / 2 - 65 / 8, rel=1e-12)
    assert not r["reverse_mM"].passed
    assert r["forward"].passed and r["reverse_R2"].passed and r["reverse_R_literal"].passed


@pytest.mark.parametrize("n", [2, 3])
def test_norm_lower_bound_counterexample(n):
    mats = np.stack([np.diag([4.0, 1.0]) if i % 2 == 0 else np.diag([1.0, 4.0])
                     for i in range(n)])
    r = by_tag(check("C3", mats=mats))
    assert r["upper"].passed
    assert not r["lower"].passed


# ---------------------------------------------------------------------------
# examples and suites


def test_examples_all_pass():
    checks = run_examples()
    assert len(checks) == 15 and all(c.passed for c in checks)
    assert {c.example for c in checks} == {1, 2}


def test_empty_suite():
    res = run_suite(TrialSpec(dims=(2, 3), count=0), workers=1)
    assert res.records == [] and res.passed
    assert res.csv().strip() == "theorem,trials,passes,minMargin,meanTightness"


def test_small_suite_records_and_summary():
    spec = TrialSpec(dims=(2,), count=3, master_seed=7, theorems=("T1", "Order", "C2"))
    res = run_suite(spec, workers=1)
    t1 = [r for r in res.records if r["theorem"] == "T1"]
    assert len(t1) == 3 * len(spec.nu_grid) * len(spec.map_kinds)
    order = [r for r in res.records if r["theorem"] == "Order"]
    assert len(order) == 3 * len(spec.n_grid) * len(spec.t_grid)
    assert all(r["map"] is None for r in order)
    assert {r["map"] for r in res.records if r["theorem"] == "C2"} == {"vector_state"}
    assert [row["theorem"] for row in res.summary] == ["T1", "Order", "C2"]
    assert all(row["trials"] == 3 for row in res.summary)
    assert res.passed


def test_lower_bound_constants_in_unit_interval():
    spec = TrialSpec(dims=(3,), count=4, master_seed=3, n_grid=(3,),
                     theorems=tuple(LOWER_TAGS))
    res = run_suite(spec, workers=1)
    for rec in res.records:
        for c in rec["checks"]:
            if c["tag"] == LOWER_TAGS[rec["theorem"]]:
                assert 0 < c["constant"] <= 1


def test_suite_is_deterministic_across_workers():
    spec = TrialSpec(dims=(2, 3), count=4, master_seed=11, n_grid=(3,),
                     theorems=("T1", "ThreeTerm", "T3", "T5"))
    a = run_suite(spec, workers=1)
    b = run_suite(spec, workers=2)
    assert a.jsonl() == b.jsonl() and a.csv() == b.csv()


def test_trials_do_not_depend_on_the_rest_of_the_suite():
    small = run_suite(TrialSpec(dims=(3,), count=2, master_seed=5, theorems=("T2",)), 1)
    big = run_suite(TrialSpec(dims=(2, 3), count=4, master_seed=5, theorems=("T1", "T2")), 1)
    keep = [r for r in big.records if r["theorem"] == "T2" and r["dim"] == 3 and r["trial"] < 2]
    assert keep == small.records
