"""Acceptance suite: one test per criterion, each printing a verdict line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the PASS/FAIL
lines inline.  Every tolerance is pinned here; nothing is deferred to
later calibration.
"""

import csv
import io
import math
import time

import numpy as np
import pytest

from privlsh import (
    PrivacyParams,
    angular_distance,
    certify_pxdp,
    cxdp_to_pxdp_budget,
    enumerate_2d_channel,
    epsilon_for_target_xi,
    error_bound_check,
    estimate_collision_rate,
    exact_knn,
    hamming_law_check,
    hyperplane_release_leakage,
    kl_bernoulli,
    pxdp_budget_simple,
    rr_flip_probability,
    run_matching_experiment,
    sample_family,
    solve_alpha,
    spherical_laplace_noise,
    synthesize,
    SynthSpec,
)
from privlsh.cli import main as cli_main


def verdict(number: int, name: str, ok: bool, elapsed: float, limit: float) -> None:
    state = "PASS" if ok else "FAIL"
    print(f"[acceptance] C{number:02d} {name}: {state} ({elapsed:.2f}s < {limit:.0f}s)")


def test_criterion_01_budget_table_reproduction(capsys):
    start = time.monotonic()
    exit_code = cli_main(["budget", "--table1"])
    out = capsys.readouterr().out
    rows = list(csv.DictReader(io.StringIO(out)))
    got = {}
    for r in rows:
        got.setdefault((float(r["d_theta"]), float(r["xi"])), []).append(int(r["ldp_budget"]))
    expect = {
        (0.05, 1.0): [3, 4, 6],
        (0.05, 5.0): [14, 20, 30],
        (0.05, 10.0): [28, 40, 60],
        (0.05, 20.0): [55, 79, 120],
        (0.1, 1.0): [2, 3, 4],
        (0.1, 5.0): [10, 14, 20],
        (0.1, 10.0): [21, 28, 40],
        (0.1, 20.0): [42, 57, 80],
    }
    elapsed = time.monotonic() - start
    ok = exit_code == 0 and len(rows) == 24 and got == expect and elapsed < 1.0
    with capsys.disabled():
        verdict(1, "published-table reproduction (24 entries)", ok, elapsed, 1.0)
    assert exit_code == 0
    assert got == expect
    assert elapsed < 1.0


def test_criterion_02_flip_probability_anchor(capsys):
    start = time.monotonic()
    eps = epsilon_for_target_xi(5.0, 20, 0.05, 0.01)
    flip = rr_flip_probability(eps)
    elapsed = time.monotonic() - start
    ok = 0.26 <= flip <= 0.28 and elapsed < 1.0
    with capsys.disabled():
        verdict(2, f"flip-probability anchor (flip={flip:.4f})", ok, elapsed, 1.0)
    assert 0.26 <= flip <= 0.28
    assert elapsed < 1.0


def test_criterion_03_toy_channel_exact(capsys):
    from fractions import Fraction

    start = time.monotonic()
    cm = enumerate_2d_channel([(0.0, 1.0), (1.0, 0.0), (1.0, 1.0)])
    leak = hyperplane_release_leakage(cm)
    probs = sorted(f.probability for f in cm.functions)
    ok_functions = len(cm.functions) == 6 and probs == [Fraction(1, 8)] * 4 + [Fraction(1, 4)] * 2
    ok_channel = cm.channel == (Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))
    ok_leak = leak.singleton_probability == Fraction(1, 2)
    elapsed = time.monotonic() - start
    ok = ok_functions and ok_channel and ok_leak and elapsed < 1.0
    with capsys.disabled():
        verdict(3, "exact 2-D channel enumeration", ok, elapsed, 1.0)
    assert ok_functions
    assert ok_channel
    assert ok_leak
    assert elapsed < 1.0


def test_criterion_04_collision_law(capsys):
    start = time.monotonic()
    x = np.array([1.0, 0.0])
    pairs = {
        0.0: x.copy(),
        0.25: np.array([math.cos(0.25 * math.pi), math.sin(0.25 * math.pi)]),
        0.5: np.array([0.0, 1.0]),
        0.75: np.array([math.cos(0.75 * math.pi), math.sin(0.75 * math.pi)]),
        1.0: -x,
    }
    ok = True
    details = []
    for i, (d, xp) in enumerate(pairs.items()):
        report = estimate_collision_rate(x, xp, trials=10_000, seed=400 + i)
        ok &= report.passed
        ok &= abs(report.detail["target"] - d) < 1e-12
        details.append(f"d={d}: rate={report.statistic:.4f}")
    elapsed = time.monotonic() - start
    ok &= elapsed < 10.0
    with capsys.disabled():
        verdict(4, "one-bit collision law (" + ", ".join(details) + ")", ok, elapsed, 10.0)
    assert ok


def test_criterion_05_binomial_hamming_law(capsys):
    start = time.monotonic()
    x = np.array([1.0, 0.0])
    xp = np.array([math.cos(0.25 * math.pi), math.sin(0.25 * math.pi)])
    report = hamming_law_check(x, xp, n_bits=20, n_families=1000, seed=41)
    mean_ok = abs(report.detail["mean"] - 5.0) <= 3.0 * math.sqrt(3.75 / 1000)
    lo, hi = report.detail["variance_band"]
    var_ok = lo <= report.detail["variance"] <= hi and report.detail["variance_target"] == pytest.approx(3.75)
    elapsed = time.monotonic() - start
    ok = report.passed and mean_ok and var_ok and elapsed < 10.0
    with capsys.disabled():
        verdict(
            5,
            f"binomial Hamming law (mean={report.detail['mean']:.3f}, var={report.detail['variance']:.3f})",
            ok,
            elapsed,
            10.0,
        )
    assert report.passed
    assert mean_ok
    assert var_ok
    assert elapsed < 10.0


def test_criterion_06_flip_error_bound(capsys):
    start = time.monotonic()
    x = np.array([1.0, 0.2, -0.5])
    xp = np.array([0.3, 1.0, 0.4])
    ok = True
    for i, epsilon in enumerate((0.0, 0.5, 1.0, 2.0)):
        for j, n_bits in enumerate((10, 20)):
            report = error_bound_check(epsilon, n_bits, x, xp, trials=1000, seed=500 + 10 * i + j)
            ok &= report.passed
    elapsed = time.monotonic() - start
    ok &= elapsed < 30.0
    with capsys.disabled():
        verdict(6, "expected Hamming-error bound on eps x n_bits grid", ok, elapsed, 30.0)
    assert ok


def test_criterion_07_pxdp_certification(capsys):
    start = time.monotonic()
    x = np.array([1.0, 0.0])
    ok = True
    grid = [
        (eps, n_bits, d)
        for eps in (0.5, 1.0)
        for n_bits in (10, 20, 50)
        for d in (0.1, 0.25)
    ]
    assert len(grid) == 12
    for i, (eps, n_bits, d) in enumerate(grid):
        xp = np.array([math.cos(d * math.pi), math.sin(d * math.pi)])
        report = certify_pxdp(eps, n_bits, x, xp, delta_target=0.05, trials=10_000, seed=600 + i)
        ok &= report.passed
    elapsed = time.monotonic() - start
    ok &= elapsed < 120.0
    with capsys.disabled():
        verdict(7, "tail-bound certification on 12-point grid", ok, elapsed, 120.0)
    assert ok


def test_criterion_08_laplace_radius_law(capsys):
    start = time.monotonic()
    ok = True
    details = []
    for dim, eps, seed in ((3, 2.0, 70), (100, 1.0, 71)):
        rng = np.random.default_rng(seed)
        radii = np.array([np.linalg.norm(spherical_laplace_noise(eps, dim, rng)) for _ in range(10_000)])
        target = dim / eps
        se = radii.std(ddof=1) / math.sqrt(radii.size)
        ok &= abs(radii.mean() - target) <= 3.0 * se
        details.append(f"(n={dim},eps={eps}): mean={radii.mean():.3f} vs {target}")
    elapsed = time.monotonic() - start
    ok &= elapsed < 10.0
    with capsys.disabled():
        verdict(8, "noise radius law " + "; ".join(details), ok, elapsed, 10.0)
    assert ok


def test_criterion_09_desk_scale_utility_curve(capsys):
    start = time.monotonic()
    dataset = synthesize(SynthSpec(dim=100, clusters=10, users_per_cluster=20, spread=0.05, seed=81))
    assert len(dataset) == 200
    k = 5
    delta, d_ref = 0.01, 0.1
    ok_parts = {}

    # (d) exhaustive search agrees with an independent full-sort oracle
    def oracle(ds, qid, kk):
        q = ds.row(qid)
        scored = sorted((angular_distance(q, ds.row(o)), o) for o in ds.ids if o != qid)
        return [o for _, o in scored[:kk]]

    ok_parts["exact_vs_oracle"] = all(
        exact_knn(dataset, qid, k).ids == oracle(dataset, qid, k) for qid in dataset.ids
    )

    ok_a = True
    ok_b = True
    ok_c = True
    for n_bits in (10, 20):
        family = sample_family(dataset.dim, n_bits, 82)
        curve = []
        for xi in (0.0, 1.0, 5.0, 20.0):
            eps = 0.0 if xi == 0.0 else epsilon_for_target_xi(xi, n_bits, d_ref, delta)
            curve.append(run_matching_experiment(dataset, family, "lshrr", k, epsilon=eps, noise_seed=83))
        # (a) mean loss nonincreasing in the budget within 2 std-err
        for prev, nxt in zip(curve, curve[1:]):
            slack = 2.0 * math.sqrt(prev.std_err**2 + nxt.std_err**2)
            ok_a &= nxt.mean_loss <= prev.mean_loss + slack
        # (b) zero budget statistically equals the uniform-hash baseline
        uniform = run_matching_experiment(dataset, family, "uniform", k, noise_seed=84)
        slack = 2.0 * math.sqrt(curve[0].std_err**2 + uniform.std_err**2)
        ok_b &= abs(curve[0].mean_loss - uniform.mean_loss) <= slack
        # (c) a flooded budget reproduces plain hashing exactly
        flooded = run_matching_experiment(dataset, family, "lshrr", k, epsilon=50.0, noise_seed=85)
        plain = run_matching_experiment(dataset, family, "lsh", k, noise_seed=85)
        ok_c &= flooded.approx_ids == plain.approx_ids
    ok_parts["monotone"] = ok_a
    ok_parts["zero_budget_baseline"] = ok_b
    ok_parts["flooded_equals_plain"] = ok_c

    elapsed = time.monotonic() - start
    ok = all(ok_parts.values()) and elapsed < 300.0
    with capsys.disabled():
        verdict(9, f"desk-scale utility curve {ok_parts}", ok, elapsed, 300.0)
    assert ok_parts == {key: True for key in ok_parts}
    assert elapsed < 300.0


def test_criterion_10_accountant_consistency(capsys):
    start = time.monotonic()
    ok_conv = True
    count = 0
    for eps in (0.1, 0.5, 1.0, 2.0, 5.0):
        for n_bits in (1, 5, 10, 20, 50):
            for d in (0.0, 0.25):
                for delta in (0.01, 0.3):
                    count += 1
                    via_cxdp = cxdp_to_pxdp_budget(eps, n_bits, d, delta)
                    direct = pxdp_budget_simple(
                        PrivacyParams(epsilon=eps, n_bits=n_bits, delta=delta, d=d)
                    ).xi
                    ok_conv &= abs(via_cxdp - direct) <= 1e-12 * abs(direct)
    assert count == 100

    ok_alpha = True
    # feasible everywhere: d**n_bits < delta at every grid point
    for n_bits in (5, 10, 20, 50):
        for d in (0.05, 0.1, 0.3):
            for delta in (0.01, 0.05, 0.2):
                alpha = solve_alpha(n_bits, d, delta)
                achieved = math.exp(-n_bits * kl_bernoulli(d + alpha, d))
                ok_alpha &= abs(achieved - delta) / delta <= 1e-9

    elapsed = time.monotonic() - start
    ok = ok_conv and ok_alpha and elapsed < 1.0
    with capsys.disabled():
        verdict(10, "accountant consistency (conversion + slack round-trip)", ok, elapsed, 1.0)
    assert ok_conv
    assert ok_alpha
    assert elapsed < 1.0
