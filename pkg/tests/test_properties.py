"""Property-based checks of the invariants."""

import math

import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from reference import esym_by_subsets, quartic_by_monomials, tensor_power
from wellspread.certifier import combine_quartic_bound, convert_spread_distortion, scan_subsets
from wellspread.randmodels import compressibility_profile, top_mass_fraction
from wellspread.recovery import evaluate_overlap, scalar_jensen_holds
from wellspread.tensorcore import (
    MomentOperator,
    ScaledScalar,
    elem_sym,
    eval_Pt,
    shift_quartic,
    sym_embed,
    symmetrize,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
positive = st.floats(1e-3, 1e3, allow_nan=False, allow_infinity=False)


def vectors(min_size=1, max_size=8, elements=finite):
    return st.integers(min_size, max_size).flatmap(lambda k: arrays(np.float64, k, elements=elements))


def matrices(max_n=8, max_d=3):
    return st.tuples(st.integers(1, max_n), st.integers(1, max_d)).flatmap(
        lambda s: arrays(np.float64, s, elements=st.floats(-3, 3, allow_nan=False))
    )


def _nonzero(v):
    return np.linalg.norm(v) > 1e-6


@given(st.integers(1, 6).flatmap(lambda d: st.tuples(arrays(np.float64, d, elements=finite), arrays(np.float64, d, elements=finite))))
def test_quartic_identity(pair):
    a, x = pair
    expected = quartic_by_monomials(a, x)
    got = shift_quartic(a).quadratic_form(x)
    assert math.isclose(got, expected, rel_tol=1e-9, abs_tol=1e-9 * (np.sum(a * a) * np.sum(x * x)) ** 2)


@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_symmetrize_is_a_projection(d, t, seed):
    y = np.random.default_rng(seed).standard_normal(d ** (2 * t))
    s = symmetrize(y, t, d)
    np.testing.assert_allclose(symmetrize(s, t, d), s, atol=1e-12)
    assert np.linalg.norm(s) <= np.linalg.norm(y) * (1 + 1e-12)


@given(vectors(1, 9, st.floats(0, 5)), st.integers(0, 9))
def test_elem_sym_matches_enumeration(z, t):
    assert math.isclose(float(elem_sym(z, t)), esym_by_subsets(z, t), rel_tol=1e-10, abs_tol=1e-300)


@given(vectors(1, 9, st.floats(1e-3, 5)), st.integers(1, 6), st.integers(-400, 400))
def test_elem_sym_homogeneous(z, t, k):
    assume(t <= len(z))
    base = elem_sym(z, t)
    scaled = elem_sym(np.ldexp(z, k), t, robust=True)
    assert abs(scaled.log2() - (base.log2() + k * t)) <= 1e-9 * max(1.0, abs(base.log2()))


@given(positive, positive, st.integers(-300, 300), st.integers(-300, 300))
def test_scaled_scalar_arithmetic(a, b, ea, eb):
    x = ScaledScalar.from_float(a) * ScaledScalar(1.0, ea)
    y = ScaledScalar.from_float(b) * ScaledScalar(1.0, eb)
    assert math.isclose((x * y).log2(), x.log2() + y.log2(), rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose((x / y).log2(), x.log2() - y.log2(), rel_tol=1e-12, abs_tol=1e-12)
    s = x + y
    top = max(x.log2(), y.log2())
    assert s >= x and s >= y
    assert top - 1e-12 <= s.log2() <= top + 1 + 1e-12
    assert math.isclose((x.root(3) ** 3).log2(), x.log2(), rel_tol=1e-12, abs_tol=1e-9)


@given(vectors(2, 40), st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_profile_monotone_and_fourth_moment(v, r1, r2):
    assume(_nonzero(v))
    lo, hi = sorted((r1, r2))
    m_lo, m_hi = compressibility_profile(v, lo)[0], compressibility_profile(v, hi)[0]
    assert 0.0 <= m_lo <= m_hi <= 1.0
    u = v / np.linalg.norm(v)
    n = len(v)
    if math.floor(hi * n + 1e-9) >= 1:
        assert np.sum(u**4) >= m_hi**4 / (hi * n) * (1 - 1e-9)


@given(arrays(np.float64, (3, 12), elements=finite), st.integers(0, 12))
def test_top_mass_fraction_bounds(V, k):
    f = top_mass_fraction(V, k)
    assert np.all((0 <= f) & (f <= 1))


@given(vectors(1, 8), st.floats(0.1, 10))
def test_overlap_sign_and_scale_invariant(v, c):
    assume(_nonzero(v))
    rng = np.random.default_rng(0)
    w = rng.standard_normal(len(v))
    o = evaluate_overlap(w, v)
    assert 0.0 <= o <= 1.0
    assert math.isclose(evaluate_overlap(-c * w, v), o, rel_tol=1e-12, abs_tol=1e-15)


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(1e-4, 1 - 1e-4))
def test_scalar_jensen(x, y, delta):
    assert scalar_jensen_holds(x, y, delta)


@given(st.integers(1, 500), st.floats(1.0, 25.0))
def test_conversion_round_trip_lossy(n, delta):
    assume(delta <= math.sqrt(n) or n == 1)
    t, eps = convert_spread_distortion("backward", n, delta)
    assert convert_spread_distortion("forward", n, (t, eps)) >= delta


@given(st.integers(1, 4), positive, positive, st.lists(positive, min_size=4, max_size=4), st.integers(1, 100))
def test_combine_monotone_in_tau(t, tau1, tau2, bounds, n):
    lo, hi = sorted((tau1, tau2))
    assert combine_quartic_bound(t, lo, bounds[:t], n) <= combine_quartic_bound(t, hi, bounds[:t], n) * (1 + 1e-12)


@given(matrices(10, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_tau_semantics(A, t, seed):
    n, d = A.shape
    assume(t <= min(n, d))
    tau = scan_subsets(A, t).tau
    X = np.random.default_rng(seed).standard_normal((50, d))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    sq = np.sort((X @ A.T) ** 2, axis=1)
    if n > t:
        assert np.all(sq[:, -(t + 1)] <= tau * (1 + 1e-9) + 1e-12)


@given(matrices(6, 3), st.integers(1, 2), st.integers(0, 2**32 - 1))
def test_moment_quadratic_form_is_Pt(A, t, seed):
    d = A.shape[1]
    x = np.random.default_rng(seed).standard_normal(d)
    x /= np.linalg.norm(x)
    op = MomentOperator(A, t)
    expected = float(eval_Pt(A, t, x))
    scale = max(1.0, np.sum(A * A)) ** (2 * t)
    u = sym_embed(x, t)
    assert math.isclose(float(u @ op.sym_apply(u)), expected, rel_tol=1e-8, abs_tol=1e-12 * scale)
    X = tensor_power(x, 2 * t)
    assert math.isclose(float(X @ op.apply(X)), expected, rel_tol=1e-8, abs_tol=1e-12 * scale)
