"""Unit tests for the weighted extrapolation core.

The smoothness indicators are checked against an exact symbolic quadrature
oracle (sympy, rational arithmetic), the weight families against their
defining formulas and range/invariance properties, and the dispatch against
hand-computable cases.  Frozen numbers in this file were produced by the
oracle itself or by independent closed forms, never by the code under test.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bweno.extrapolation import (
    METHODS,
    SmoothnessSuite,
    UniformStencil,
    ExtrapolationQuery,
    WeightParams,
    beta_tv,
    extrapolate,
    extrapolate_recurrence,
    interpolate_poly,
    lambda_map,
    least_squares_row,
    nested_order,
    smoothness_suite,
    value_at,
    weight_gaw,
    weight_uw,
    weights_iw,
    weights_sw,
)


# ---------------------------------------------------------------------------
# symbolic quadrature oracle

def _oracle_lefts(n, xi):
    """Independent re-derivation of the nested window selection.

    Start from the node nearest xi (ties to the smaller index), then grow
    the window one node at a time towards whichever neighbour is closer
    (ties to the left).  Only the left edges are needed.
    """
    best = 0
    for j in range(1, n):
        if abs(j - xi) < abs(best - xi):
            best = j
    lo = hi = best
    lefts = [lo]
    while hi - lo + 1 < n:
        grow_left = lo > 0 and (hi == n - 1 or abs((lo - 1) - xi) <= abs((hi + 1) - xi))
        if grow_left:
            lo -= 1
        else:
            hi += 1
        lefts.append(lo)
    return lefts


def _oracle_suite(values, r0, xi):
    """Exact indicator suite via sympy rational integration."""
    import sympy as sp

    x = sp.Symbol("x")
    vals = [sp.Rational(*float(v).as_integer_ratio()) for v in values]
    n = len(vals)
    r = n - 1
    lefts = _oracle_lefts(n, xi)

    def indicator(window_lo, degree, a, b, lmax, norm):
        pts = [(sp.Integer(window_lo + j), vals[window_lo + j]) for j in range(degree + 1)]
        p = sp.interpolate(pts, x)
        total = sp.Integer(0)
        for l in range(1, lmax + 1):
            d = sp.diff(p, x, l)
            total += sp.integrate(d * d, (x, a, b))
        return total / norm

    nested = [
        indicator(lefts[k], k, 0, r, k, r) for k in range(1, r + 1)
    ]
    sub_min, sub_max = [], []
    sub_r0 = []
    for k in range(1, r0 + 1):
        fam = [indicator(j, k, 0, r, r0, r) for j in range(r - k + 1)]
        sub_min.append(min(fam))
        sub_max.append(max(fam))
        if k == r0:
            sub_r0 = fam
    local = [indicator(j, r0, j, j + r0, r0, r0) for j in range(r - r0 + 1)]
    return nested, sub_min, sub_max, sub_r0, local


@pytest.mark.parametrize("n,r0,xi", [(5, 2, -1.0), (5, 1, 6.2), (6, 2, -0.4), (4, 1, 1.7), (7, 3, 8.0)])
def test_indicators_match_symbolic_quadrature(n, r0, xi):
    rng = np.random.default_rng(n * 100 + r0)
    v = np.round(rng.uniform(-1, 1, size=n), 4)
    suite = smoothness_suite(v, r0, xi=xi)
    nested, sub_min, sub_max, sub_r0, local = _oracle_suite(v, r0, xi)
    for got, want in zip(suite.nested, nested):
        assert got == pytest.approx(float(want), rel=1e-12, abs=1e-14)
    for got, want in zip(suite.sub_min, sub_min):
        assert got == pytest.approx(float(want), rel=1e-12, abs=1e-14)
    for got, want in zip(suite.sub_max, sub_max):
        assert got == pytest.approx(float(want), rel=1e-12, abs=1e-14)
    for got, want in zip(suite.sub_r0, sub_r0):
        assert got == pytest.approx(float(want), rel=1e-12, abs=1e-14)
    for got, want in zip(suite.local, local):
        assert got == pytest.approx(float(want), rel=1e-12, abs=1e-14)


def test_indicator_regression_five_nodes():
    # frozen oracle output for one specific stencil; guards the integration
    # range, the 1/r normalization and the derivative count all at once
    v = np.array([-0.9271, -0.0220, 0.7566, -0.6135, 0.7241])
    suite = smoothness_suite(v, 1, xi=-1.0)
    assert suite.sub_min[0] == pytest.approx(0.60621796, rel=1e-10)
    assert suite.nested[1] == pytest.approx(0.549064205833333, rel=1e-10)
    # the same stencil shows the min substencil indicator is NOT a lower
    # bound for every nested indicator (see decisions ledger)
    assert suite.sub_min[0] > suite.nested[1]


# ---------------------------------------------------------------------------
# nested window selection and polynomial evaluation

def test_nested_order_walks_outward_with_left_ties():
    order, lefts = nested_order(5, 1.6)
    assert order.tolist() == [2, 1, 3, 0, 4]
    assert lefts.tolist() == [2, 1, 1, 0, 0]


def test_nested_order_exterior_point_is_one_sided():
    order, lefts = nested_order(5, -2.0)
    assert order.tolist() == [0, 1, 2, 3, 4]
    assert lefts.tolist() == [0, 0, 0, 0, 0]


def test_nested_order_tie_prefers_smaller_index():
    # xi exactly between nodes 1 and 2
    order, _ = nested_order(4, 1.5)
    assert order[0] == 1


def test_interpolate_poly_reproduces_cubic():
    nodes = np.array([0.0, 1.0, 2.0, 3.0])
    f = lambda x: 2 * x ** 3 - x + 0.5
    got = interpolate_poly(nodes, f(nodes), 4.7)
    assert got == pytest.approx(f(4.7), rel=1e-13)


def test_interpolate_poly_nonuniform_nodes():
    nodes = np.array([-1.0, 0.3, 0.9, 2.2])
    vals = np.array([1.0, -2.0, 0.5, 3.0])
    for xn, vn in zip(nodes, vals):
        assert interpolate_poly(nodes, vals, xn) == pytest.approx(vn, abs=1e-12)


# ---------------------------------------------------------------------------
# weight families: ranges, limits, special values

def _random_suite(rng, n=5, r0=2):
    v = rng.normal(size=n)
    xi = rng.uniform(-3, n + 2)
    return smoothness_suite(v, r0, xi=xi)


def test_all_weights_in_unit_interval():
    rng = np.random.default_rng(42)
    p = WeightParams()
    p_sw = WeightParams(r=5, r0=2, s1=3, s2=3)
    for _ in range(300):
        s = _random_suite(rng, n=6, r0=2)
        assert np.all((0.0 <= weights_sw(s, p_sw)) & (weights_sw(s, p_sw) <= 1.0))
        assert np.all((0.0 <= weights_iw(s, p)) & (weights_iw(s, p) <= 1.0))
        assert 0.0 <= weight_uw(s, p) <= 1.0
        assert 0.0 <= weight_gaw(s, p) <= 1.0


def test_gaw_ratio_range_bulk():
    # the generalized-average ratio in raw form, 1e5 positive vectors
    rng = np.random.default_rng(7)
    m = 2
    a = rng.lognormal(mean=0.0, sigma=3.0, size=(100_000, 3))
    a = a / a.max(axis=1, keepdims=True)
    b = a ** m
    rho = 9.0 / (b.sum(axis=1) * (1.0 / b).sum(axis=1))
    assert np.all(rho > 0.0)
    assert np.all(rho <= 1.0 + 1e-12)
    equal = np.full((4, 3), 0.7)
    beq = (equal / equal.max(axis=1, keepdims=True)) ** m
    rho_eq = 9.0 / (beq.sum(axis=1) * (1.0 / beq).sum(axis=1))
    assert np.allclose(rho_eq, 1.0, atol=1e-12)


def test_gaw_equality_only_for_flat_families():
    p = WeightParams()
    flat = SmoothnessSuite(
        nested=np.ones(4), sub_min=np.ones(2), sub_max=np.ones(2),
        sub_r0=np.full(3, 0.37), local=np.ones(3),
    )
    assert weight_gaw(flat, p) == pytest.approx(1.0, abs=1e-12)
    bumpy = SmoothnessSuite(
        nested=np.ones(4), sub_min=np.ones(2), sub_max=np.ones(2),
        sub_r0=np.array([0.37, 0.38, 0.37]), local=np.ones(3),
    )
    assert weight_gaw(bumpy, p) < 1.0 - 1e-12


def test_constant_data_gives_full_weights():
    # all indicators vanish, every ratio degenerates to eps/eps = 1
    v = np.full(5, 3.25)
    s = smoothness_suite(v, 2, xi=6.0)
    p = WeightParams()
    assert np.allclose(weights_sw(s, WeightParams(r=5, r0=2, s1=3, s2=3)), 1.0)
    assert np.allclose(weights_iw(s, p), 1.0)
    assert weight_uw(s, p) == pytest.approx(1.0)
    assert weight_gaw(s, p) == pytest.approx(1.0)


def test_lambda_map_reference_values():
    # lambda_map(w, lam) = (e^(lam w) - 1)/(e^lam - 1); frozen spot values
    assert lambda_map(0.5, 14.0) == pytest.approx(
        math.expm1(7.0) / math.expm1(14.0), rel=1e-14
    )
    assert f"{lambda_map(0.5, 14.0):.4e}" == "9.1105e-04"
    assert lambda_map(0.3, 0.0) == pytest.approx(0.3)
    assert lambda_map(0.0, 5.0) == 0.0
    assert lambda_map(1.0, 5.0) == pytest.approx(1.0)


def test_lambda_map_is_overflow_safe_for_huge_lambda():
    w = lambda_map(0.75, 1200.0)
    # exact value e^(-300) (1 - e^(-900)) / (1 - e^(-1200)), via logs
    want = math.exp(1200.0 * (0.75 - 1.0))
    assert math.isfinite(w)
    assert w == pytest.approx(want, rel=1e-12)
    assert lambda_map(1.0, 1e6) == pytest.approx(1.0)


def test_lambda_map_monotone_in_omega():
    grid = np.linspace(0.0, 1.0, 50)
    for lam in (-30.0, -2.0, 3.0, 100.0, 800.0):
        vals = [lambda_map(w, lam) for w in grid]
        assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))


# ---------------------------------------------------------------------------
# invariance properties

_SCALE_FREE = ("uw", "lambda-uw", "gaw", "wls-uw", "wls-lambda-uw", "wls-gaw")


@pytest.mark.parametrize("method", _SCALE_FREE)
def test_scale_invariance_of_scale_free_methods(method):
    rng = np.random.default_rng(hash(method) % 2 ** 32)
    p = WeightParams(lam=8.0)
    n = p.stencil_size(method)
    for c in (3.0, -0.2, 1e4, 1e-5):
        v = rng.normal(size=n)
        xi = rng.uniform(-2.5, -0.5)
        base = extrapolate(v, xi, method, p)
        scaled = extrapolate(c * v, xi, method, p)
        assert scaled == pytest.approx(c * base, rel=1e-12, abs=1e-12 * abs(c))


def test_scale_invariance_of_iw_with_tv_beta():
    rng = np.random.default_rng(11)
    p = WeightParams(r=5, r0=1, d=3, beta_mode="total-variation")
    v = rng.normal(size=6)
    xi = -1.3
    b0 = beta_tv(v, 1)
    base = extrapolate(v, xi, "iw", p, beta=b0)
    for c in (5.0, 1e3, 2e-4):
        bc = beta_tv(c * v, 1)
        got = extrapolate(c * v, xi, "iw", p, beta=bc)
        assert got == pytest.approx(c * base, rel=1e-12)


@pytest.mark.parametrize("method", ("sw", "iw", "uw", "lambda-uw", "gaw",
                                    "wls-uw", "wls-lambda-uw", "wls-gaw"))
def test_translation_invariance(method):
    rng = np.random.default_rng(abs(hash(method)) % 2 ** 32)
    p = WeightParams(r=5, r0=2, lam=5.0) if method in ("sw", "iw") else WeightParams(lam=5.0)
    n = p.stencil_size(method)
    v = rng.normal(size=n)
    xi = rng.uniform(-2.0, -0.4)
    base = extrapolate(v, xi, method, p)
    for c in (7.0, -123.456, 1e5):
        got = extrapolate(v + c, xi, method, p)
        assert got - c == pytest.approx(base, rel=1e-12, abs=1e-9 * max(1.0, abs(c)))


@given(st.floats(-0.9, 0.9), st.integers(0, 2 ** 31 - 1))
@settings(max_examples=60, deadline=None)
def test_recurrence_blend_stays_in_data_hull_for_unit_weights(shift, seed):
    # with all weights 1 the recurrence is plain nested interpolation and
    # must reproduce polynomials of full degree
    rng = np.random.default_rng(seed)
    coeffs = rng.normal(size=5)
    xs = np.arange(5, dtype=float)
    v = np.polynomial.polynomial.polyval(xs, coeffs)
    xi = -1.0 + shift
    _, lefts = nested_order(5, xi)
    got = extrapolate_recurrence(v, xi, np.ones(4), lefts)
    want = np.polynomial.polynomial.polyval(xi, coeffs)
    assert got == pytest.approx(want, rel=1e-10, abs=1e-10)


# ---------------------------------------------------------------------------
# accuracy orders

def _measure_order(method, params, hs, x0=0.3, xi_off=1.5):
    f = lambda x: np.sin(2.0 * x)
    errs = []
    for h in hs:
        n = params.stencil_size(method)
        nodes = x0 + h * np.arange(n)
        xstar = x0 - xi_off * h
        beta = 0.0
        if params.beta_mode == "fixed-power":
            beta = (params.beta_scale * h ** params.r0) ** 2
        got = extrapolate(f(nodes), -xi_off, method, params, beta=beta)
        errs.append(abs(got - f(xstar)))
    return [math.log2(a / b) for a, b in zip(errs, errs[1:])]


@pytest.mark.parametrize("method,params", [
    ("iw", WeightParams(r=4, r0=2)),
    ("wls-gaw", WeightParams()),
])
def test_smooth_extrapolation_order_r_plus_one(method, params):
    orders = _measure_order(method, params, [0.02, 0.01, 0.005])
    want = params.r + 1
    for o in orders:
        assert abs(o - want) <= 0.25


def test_wls_reduces_to_least_squares_value_on_smooth_data():
    # smooth data drives the weight to 1, so the blend equals the LS value
    p = WeightParams()
    h = 0.01
    nodes = 0.3 + h * np.arange(9)
    v = np.sin(2.0 * nodes)
    xi = -1.5
    z = float(least_squares_row(9, p.r, xi) @ v)
    got = extrapolate(v, xi, "wls-gaw", p)
    assert got == pytest.approx(z, rel=1e-10)


def test_least_squares_row_exact_on_polynomials_up_to_degree():
    row = least_squares_row(9, 4, -2.0)
    xs = np.arange(9, dtype=float)
    for deg in range(5):
        v = xs ** deg
        assert row @ v == pytest.approx((-2.0) ** deg, rel=1e-11, abs=1e-11)


def test_least_squares_row_is_cached_and_stable():
    a = least_squares_row(9, 4, -1.25)
    b = least_squares_row(9, 4, -1.25)
    assert a is b


# ---------------------------------------------------------------------------
# dispatch plumbing

def test_extrapolate_validates_stencil_size():
    with pytest.raises(ValueError):
        extrapolate(np.ones(6), -1.0, "wls-gaw", WeightParams())


def test_unknown_method_rejected():
    with pytest.raises(ValueError):
        extrapolate(np.ones(5), -1.0, "newton-cotes", WeightParams())


def test_params_validation_rules():
    WeightParams().validate("wls-gaw")
    with pytest.raises(ValueError):
        WeightParams(r0=3).validate("iw")     # iw needs r0 <= r//2
    with pytest.raises(ValueError):
        WeightParams(R=2).validate("wls-uw")  # least squares needs R >= r
    with pytest.raises(ValueError):
        WeightParams(beta_mode="fixed-power").validate("gaw")
    with pytest.raises(ValueError):
        WeightParams(beta_mode="fixed-power", r0=2).validate("iw")
    with pytest.raises(ValueError):
        WeightParams(beta_mode="sigmoid").validate("iw")


def test_constant_method_picks_nearest_node():
    v = np.array([4.0, 5.0, 6.0, 7.0, 8.0])
    assert extrapolate(v, -0.9, "constant") == 4.0
    assert extrapolate(v, 3.8, "constant") == 8.0
    assert extrapolate(v, 1.5, "constant") == 5.0  # tie to smaller index


def test_lagrange_method_is_full_interpolation():
    v = np.array([1.0, 2.0, 5.0, 10.0, 17.0])  # x^2 + 1 at 0..4
    assert extrapolate(v, 6.0, "lagrange") == pytest.approx(37.0, rel=1e-12)


def test_value_at_physical_wrapper_matches_normalized_call():
    sten = UniformStencil(x0=2.0, h=0.25, values=np.sin(np.arange(9)))
    q = ExtrapolationQuery(x=1.5, method="wls-gaw")
    direct = extrapolate(sten.values, (1.5 - 2.0) / 0.25, "wls-gaw", q.params)
    assert value_at(sten, q) == pytest.approx(direct, rel=1e-14)


def test_value_at_fixed_power_beta_uses_physical_spacing():
    p = WeightParams(r=5, r0=1, d=3, beta_mode="fixed-power", beta_scale=2.0)
    sten = UniformStencil(x0=0.0, h=0.1, values=np.cos(0.1 * np.arange(6)))
    q = ExtrapolationQuery(x=-0.15, method="iw", params=p)
    want = extrapolate(sten.values, -1.5, "iw", p, beta=(2.0 * 0.1) ** 2)
    assert value_at(sten, q) == pytest.approx(want, rel=1e-14)


def test_methods_tuple_is_complete():
    assert METHODS == ("constant", "lagrange", "sw", "iw", "uw", "lambda-uw",
                       "gaw", "wls-uw", "wls-lambda-uw", "wls-gaw")


# ---------------------------------------------------------------------------
# beta regularizer

def test_beta_tv_matches_hand_computation():
    f = np.array([0.0, 1.0, 3.0, 2.0])
    # undivided differences 1, 2, 1 -> mean 4/3, squared for r0=1
    assert beta_tv(f, 1) == pytest.approx((4.0 / 3.0) ** 2, rel=1e-14)


def test_beta_tv_masks_invalid_nodes():
    f = np.array([0.0, 1.0, 100.0, 2.0])
    valid = np.array([True, True, False, True])
    assert beta_tv(f, 1, valid=valid) == pytest.approx(1.0, rel=1e-14)


def test_beta_tv_pools_both_axes_in_2d():
    f = np.array([[0.0, 1.0], [2.0, 3.0]])
    # row diffs: 2, 2; column diffs: 1, 1 -> mean 1.5
    assert beta_tv(f, 1) == pytest.approx(2.25, rel=1e-14)


def test_beta_tv_empty_mask_returns_zero():
    f = np.arange(4.0)
    assert beta_tv(f, 1, valid=np.zeros(4, dtype=bool)) == 0.0


# ---------------------------------------------------------------------------
# substencil-vs-nested indicator bound (see decisions ledger)

def _vector_is1_vs_nested(rng, r, samples, xi):
    """IS_1 and all nested I_k for `samples` random stencils at one xi."""
    n = r + 1
    _, lefts = nested_order(n, xi)
    V = rng.normal(size=(samples, n))
    is1 = (np.diff(V, axis=1) ** 2).min(axis=1)
    from bweno.batching import _IndicatorTables
    tables = _IndicatorTables(n, 1)
    nested = np.empty((samples, r))
    for k in range(1, r + 1):
        Q = tables.nested[k][int(lefts[k])]
        win = V[:, int(lefts[k]): int(lefts[k]) + k + 1]
        nested[:, k - 1] = np.einsum("ti,ij,tj->t", win, Q, win)
    return is1, nested


def test_min_substencil_bounds_full_degree_indicator():
    # the weaker, provable variants of the bound: IS_1 <= I_r always, and
    # IS_1 <= (r/k) I_k for every k
    rng = np.random.default_rng(123)
    for r in range(2, 9):
        xi = rng.uniform(-2.0, r + 2.0)
        is1, nested = _vector_is1_vs_nested(rng, r, 4000, xi)
        assert np.all(is1 <= nested[:, -1] * (1 + 1e-9) + 1e-300)
        for k in range(1, r + 1):
            bound = (r / k) * nested[:, k - 1]
            assert np.all(is1 <= bound * (1 + 1e-9) + 1e-300)


def test_min_substencil_bound_all_degrees_as_stated():
    # IS_1 <= I_k for every k, 1e5 random stencils across r = 2..8; this
    # statement is false in general (the ledger has an exact five-node
    # counterexample) and this test records that honestly
    rng = np.random.default_rng(2024)
    worst = None
    total = 0
    violations = 0
    for r in range(2, 9):
        for _ in range(3):
            xi = rng.uniform(-2.0, r + 2.0)
            is1, nested = _vector_is1_vs_nested(rng, r, 5000, xi)
            total += is1.size
            bad = is1[:, None] > nested * (1 + 1e-9)
            violations += int(bad.any(axis=1).sum())
            if bad.any():
                i = int(np.flatnonzero(bad.any(axis=1))[0])
                k = int(np.flatnonzero(bad[i])[0]) + 1
                rec = (r, xi, k, float(is1[i]), float(nested[i, k - 1]))
                if worst is None:
                    worst = rec
    assert violations == 0, (
        f"IS_1 <= I_k violated on {violations} of {total} stencils; "
        f"first case: r={worst[0]} xi={worst[1]:.3f} k={worst[2]} "
        f"IS_1={worst[3]:.6g} > I_k={worst[4]:.6g}"
    )
