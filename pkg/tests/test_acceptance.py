"""The thirteen acceptance criteria, each at its stated size, tolerance and time limit.

Every test appends one ``ACCEPTANCE <k> PASS|FAIL ...`` line that the
terminal summary prints in order.
"""

import math
import time

import numpy as np
import pytest

import conftest
from frozen import ENVELOPE_T
from reference import central_difference, quartic_by_monomials, quartic_tail, random_unit, random_units, tensor_power
from wellspread.certifier import certify_moment_norm, certify_spread
from wellspread.oracle import brute_Pt, mc_trace_multi, net_distortion, probe_max_quartic, shift_ablation
from wellspread.randmodels import compressibility_profile, sample_gaussian, sample_planted_nbr
from wellspread.recovery import AscentParams, evaluate_overlap, objective_and_grad, recover, scalar_jensen_holds
from wellspread.tensorcore import MomentOperator, eval_Pt, shift_quartic

pytestmark = pytest.mark.acceptance


def _report(k, ok, elapsed, limit, detail):
    in_time = elapsed < limit
    status = "PASS" if ok and in_time else "FAIL"
    line = f"ACCEPTANCE {k} {status} {detail} [{elapsed:.1f}s / {limit:.0f}s]"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line
    assert in_time, line


def _rel(a, b):
    return abs(a - b) / max(abs(b), np.finfo(float).tiny)


def test_criterion_01_quartic_identity():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for k in range(200):
        d = 2 + k % 9
        a, x = rng.standard_normal(d), rng.standard_normal(d)
        got = shift_quartic(a).quadratic_form(x)
        worst = max(worst, _rel(got, quartic_by_monomials(a, x)))
    _report(1, worst <= 1e-9, time.perf_counter() - start, 1, f"max rel err {worst:.2e} <= 1e-9")


def test_criterion_02_Pt_against_enumeration():
    start = time.perf_counter()
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 15))
        d = int(rng.integers(1, 7))
        t = int(rng.integers(1, 6))
        A, x = rng.standard_normal((n, d)), random_unit(rng, d)
        exact = brute_Pt(A, t, x)
        got = float(eval_Pt(A, t, x))
        worst = max(worst, 0.0 if exact == got == 0.0 else _rel(got, exact))
    _report(2, worst <= 1e-8, time.perf_counter() - start, 5, f"max rel err {worst:.2e} <= 1e-8")


def test_criterion_03_moment_quadratic_form():
    start = time.perf_counter()
    rng = np.random.default_rng(103)
    worst = 0.0
    for k in range(50):
        t = 1 + k % 2
        n, d = int(rng.integers(1, 13)), int(rng.integers(1, 5))
        A, x = rng.standard_normal((n, d)), random_unit(rng, d)
        X = tensor_power(x, 2 * t)
        got = float(X @ MomentOperator(A, t).apply(X))
        exact = brute_Pt(A, t, x)
        worst = max(worst, 0.0 if exact == got == 0.0 else _rel(got, exact))
    _report(3, worst <= 1e-8, time.perf_counter() - start, 10, f"max rel err {worst:.2e} <= 1e-8")


def test_criterion_04_gradient_check():
    start = time.perf_counter()
    rng = np.random.default_rng(104)
    A = sample_gaussian(100, 10, seed=104)
    worst = 0.0
    for k in range(50):
        t = 1 + k % 3
        x = random_unit(rng, 10)
        f = lambda z: float(objective_and_grad(A, t, z).value)  # noqa: E731
        g = objective_and_grad(A, t, x).grad_float()
        fd = central_difference(f, x, 1e-5)
        worst = max(worst, float(np.linalg.norm(g - fd) / np.linalg.norm(g)))
    _report(4, worst <= 1e-5, time.perf_counter() - start, 10, f"max rel err {worst:.2e} <= 1e-5")


def test_criterion_05_certification_soundness():
    start = time.perf_counter()
    violations = 0
    checks = 0
    for seed in range(20):
        A = sample_gaussian(200, 10, seed=500 + seed)
        rng = np.random.default_rng(500 + seed)
        X = random_units(rng, 1000, 10)
        for t in (1, 2):
            cert = certify_spread(A, t)
            bound_t = cert.per_s_bounds[t - 1]
            probe = probe_max_quartic(A, t, 1000, seed=seed)
            violations += probe.value > bound_t
            Bn = cert.B * cert.n
            sq = np.sort((X @ A.T) ** 2, axis=1)
            for x, row in zip(X, sq):
                violations += quartic_tail(A, x, t) > Bn
                violations += row[-(t + 1)] > cert.scan.tau * (1 + 1e-12)
                violations += eval_Pt(A, t, x) > bound_t
            checks += 1 + 3 * len(X)
    _report(
        5, violations == 0, time.perf_counter() - start, 120, f"{violations} violations in {checks} checks"
    )


def test_criterion_06_certificate_vs_net():
    start = time.perf_counter()
    certified = 0
    inconsistent = 0
    vacuous = 0
    for seed in range(10):
        A = sample_gaussian(60, 3, seed=seed)
        cert = certify_spread(A, 2)
        if not cert.certified:
            continue
        certified += 1
        bound = cert.distortion_bound()
        vacuous += bound >= math.sqrt(60)
        inconsistent += bound < net_distortion(A, 0.01).lower
    ok = certified >= 8 and inconsistent == 0
    detail = f"certified {certified}/10, {inconsistent} inconsistent ({vacuous} bounds >= sqrt(n))"
    _report(6, ok, time.perf_counter() - start, 300, detail)


def test_criterion_07_trace_scaling():
    start = time.perf_counter()
    ratios, floor_ok, rows = [], True, []
    for n in (100, 200, 400):
        for d in (10, 20):
            for t in (1, 2):
                stats = mc_trace_multi(n, d, t, [2, 4], 20, seed=7000 + n + d + t)
                for ell, st in stats.items():
                    ratios.append(st.ratio)
                    floor_ok &= st.normalized_rate >= 0.1 * (n + d * d / t)
                    rows.append((n, d, t, ell, round(st.ratio, 4), st.method))
    spread = max(ratios) / min(ratios)
    print("sweep rows (n, d, t, ell, ratio, method):", rows)
    detail = f"ratio in [{min(ratios):.4f}, {max(ratios):.4f}], spread {spread:.2f} <= 20, floor {'ok' if floor_ok else 'violated'}"
    _report(7, spread <= 20 and floor_ok, time.perf_counter() - start, 900, detail)


def test_criterion_08_shift_ablation():
    start = time.perf_counter()
    medians = {d: shift_ablation(200, d, 1, 10, seed=800 + d).median_ratio for d in (10, 20, 40)}
    monotone = medians[10] < medians[20] < medians[40]
    ok = monotone and medians[40] >= 40 / 6
    detail = "medians " + ", ".join(f"d={d}: {m:.3f}" for d, m in medians.items()) + f"; need increasing and >= {40 / 6:.3f} at d=40"
    _report(8, ok, time.perf_counter() - start, 300, detail)


def test_criterion_09_recovery_easy_regime():
    start = time.perf_counter()
    params = AscentParams(restarts=30)
    overlaps = []
    for seed in range(20):
        inst = sample_planted_nbr(4000, 40, 0.01, 0.1, seed=900 + seed)
        res = recover(inst.blind().A_tilde, 1, 0.01, AscentParams(restarts=params.restarts, seed=seed))
        overlaps.append(evaluate_overlap(res.v_hat, inst.hidden_v))
    hits = sum(o >= 0.9 for o in overlaps)
    _report(9, hits >= 16, time.perf_counter() - start, 600, f"overlap >= 0.9 on {hits}/20 seeds (min {min(overlaps):.3f})")


def test_criterion_10_selection_separation():
    start = time.perf_counter()
    wins = 0
    for trial in range(200):
        inst = sample_planted_nbr(4000, 40, 0.01, 0.1, seed=10_000 + trial)
        rng = np.random.default_rng(trial)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        near = sign * inst.hidden_r1 + 0.05 * random_unit(rng, 40)
        far = random_unit(rng, 40)
        s_near = compressibility_profile(inst.A_tilde @ near, 0.01)[0]
        s_far = compressibility_profile(inst.A_tilde @ far, 0.01)[0]
        wins += s_near > s_far
    _report(10, wins >= 190, time.perf_counter() - start, 300, f"near beats random in {wins}/200 pairs (need 190)")


def test_criterion_11_adversarial_column():
    start = time.perf_counter()
    good = 0
    details = []
    for seed in range(10):
        A = sample_gaussian(200, 10, seed=1100 + seed)
        base = certify_spread(A, 2)
        bad = A.copy()
        bad[:, 0] = 0.0
        bad[0, 0] = math.sqrt(200)
        adv = certify_spread(bad, 2)
        ok = (not adv.certified) or adv.alpha * 10 <= base.alpha
        good += ok
        details.append(f"{base.alpha:.2e}->{adv.alpha:.2e}")
    _report(11, good == 10, time.perf_counter() - start, 120, f"{good}/10 collapsed (alpha base->adv: {' '.join(details)})")


def test_criterion_12_singular_value_envelope():
    start = time.perf_counter()
    n, d = 2000, 100
    lo = math.sqrt(n) - math.sqrt(d) - 3 * ENVELOPE_T
    hi = math.sqrt(n) + math.sqrt(d) + 3 * ENVELOPE_T
    inside = 0
    for seed in range(20):
        s = np.linalg.svd(sample_gaussian(n, d, seed=1200 + seed), compute_uv=False)
        inside += lo <= s.min() and s.max() <= hi
    _report(12, inside >= 19, time.perf_counter() - start, 30, f"{inside}/20 seeds inside [{lo:.2f}, {hi:.2f}]")


def test_criterion_13_scalar_jensen():
    start = time.perf_counter()
    rng = np.random.default_rng(113)
    violated = 0
    for _ in range(1000):
        x, y = rng.standard_normal(2) * 10 ** rng.uniform(-3, 3, size=2)
        violated += not scalar_jensen_holds(x, y, rng.uniform(1e-4, 1 - 1e-4))
    _report(13, violated == 0, time.perf_counter() - start, 1, f"{violated} violations in 1000 triples")
