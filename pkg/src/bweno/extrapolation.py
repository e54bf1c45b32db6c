"""Weighted interpolation/extrapolation on uniform 1D stencils.

Everything here works in normalized coordinates: a stencil of n nodes sits at
xi = 0, 1, ..., n-1 and the evaluation point is xi_star = (x - x0) / h.  All
smoothness indicators are exactly invariant under that normalization (the
powers of h cancel), so no routine below needs the physical spacing.  The
entry point is :func:`extrapolate`; :class:`UniformStencil` carries physical
coordinates and converts.

Two indicator families are used.  The nested family integrates derivatives of
the nested interpolation polynomials over the whole stencil range and feeds
the per-degree weight formulas ("sw", "iw").  The substencil family
integrates each degree-r0 sliding window over its own support and feeds the
single-weight formulas ("uw", "lambda-uw", "gaw") and their least-squares
variants ("wls-*").
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "WeightParams",
    "UniformStencil",
    "ExtrapolationQuery",
    "SmoothnessSuite",
    "METHODS",
    "interpolate_poly",
    "nested_order",
    "smoothness_suite",
    "weights_sw",
    "weights_iw",
    "weight_uw",
    "weight_gaw",
    "lambda_map",
    "beta_tv",
    "extrapolate_recurrence",
    "least_squares_row",
    "extrapolate",
]

METHODS = (
    "constant",
    "lagrange",
    "sw",
    "iw",
    "uw",
    "lambda-uw",
    "gaw",
    "wls-uw",
    "wls-lambda-uw",
    "wls-gaw",
)

#: methods whose final weight comes from the substencil indicator family
_SINGLE_WEIGHT = {"uw": "uw", "lambda-uw": "lambda-uw", "gaw": "gaw"}
_WLS_INNER = {"wls-uw": "uw", "wls-lambda-uw": "lambda-uw", "wls-gaw": "gaw"}


@dataclass(frozen=True)
class WeightParams:
    """Tuning knobs shared by every weight family.

    r is the final polynomial degree, R + 1 the stencil size for the
    least-squares methods (plain methods use r + 1 nodes).  r0 is the
    substencil degree, s1/s2 shape the sw/uw/gaw weight maps, d the iw
    exponent, lam the exponential remap parameter, m the gaw power.
    beta_mode selects the iw regularization: "none", "fixed-power"
    (beta = (beta_scale * h**r0)**2) or "total-variation" (beta from the
    current field's undivided differences, passed per call).
    """

    r: int = 4
    R: int = 8
    r0: int = 2
    s1: int = 2
    s2: int = 1
    d: int = 4
    lam: float = 0.0
    m: int = 2
    eps: float = 1e-100
    beta_mode: str = "none"
    beta_scale: float = 1.0
    kappa: float = 1.0

    def validate(self, method: str) -> None:
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}")
        if self.r < 1:
            raise ValueError("r must be >= 1")
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")
        if self.beta_mode not in ("none", "fixed-power", "total-variation"):
            raise ValueError(f"unknown beta_mode {self.beta_mode!r}")
        if method in ("sw", "iw"):
            if not 1 <= self.r0 <= self.r // 2:
                raise ValueError(
                    f"method {method!r} needs 1 <= r0 <= r//2, got r0={self.r0} r={self.r}"
                )
        if method in ("uw", "lambda-uw", "gaw") or method in _WLS_INNER:
            if not 1 <= self.r0 <= self.r - 1:
                raise ValueError(
                    f"method {method!r} needs 1 <= r0 <= r-1, got r0={self.r0} r={self.r}"
                )
        if method in _WLS_INNER and self.R < self.r:
            raise ValueError("least-squares methods need R >= r")
        if self.beta_mode != "none":
            if method != "iw":
                raise ValueError("beta_mode applies to the iw method only")
            if self.r0 != 1:
                raise ValueError("iw with a beta regularization requires r0 = 1")

    def stencil_size(self, method: str) -> int:
        return self.R + 1 if method in _WLS_INNER else self.r + 1


@dataclass(frozen=True)
class UniformStencil:
    """n equally spaced nodes x0 + j*h carrying one value each."""

    x0: float
    h: float
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 1 or self.values.size < 2:
            raise ValueError("values must be a 1D array of at least two nodes")
        if not self.h > 0.0:
            raise ValueError("h must be positive")

    @property
    def n(self) -> int:
        return self.values.size

    def nodes(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.n)

    def normalize(self, x: float) -> float:
        return (x - self.x0) / self.h


@dataclass(frozen=True)
class ExtrapolationQuery:
    """Evaluation request: physical point, method name, parameters."""

    x: float
    method: str
    params: WeightParams = field(default_factory=WeightParams)
    beta: float = 0.0


# ---------------------------------------------------------------------------
# polynomial interpolation

def _newton_coeffs(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Divided-difference coefficients for the Newton form on xs."""
    c = np.array(ys, dtype=float)
    n = len(c)
    for k in range(1, n):
        c[k:n] = (c[k:n] - c[k - 1 : n - 1]) / (xs[k:n] - xs[: n - k])
    return c


def interpolate_poly(nodes, values, x: float) -> float:
    """Evaluate the interpolating polynomial through (nodes, values) at x.

    Plain Newton divided differences; nodes need not be uniform.
    """
    xs = np.asarray(nodes, dtype=float)
    ys = np.asarray(values, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("nodes and values must be 1D arrays of equal length")
    c = _newton_coeffs(xs, ys)
    acc = c[-1]
    for k in range(len(c) - 2, -1, -1):
        acc = acc * (x - xs[k]) + c[k]
    return float(acc)


def _power_coeffs(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Power-basis coefficients (ascending) of the interpolant on xs."""
    c = _newton_coeffs(xs, ys)
    poly = np.zeros(1)
    for k in range(len(c) - 1, -1, -1):
        # poly <- poly * (x - xs[k]) + c[k]
        poly = np.polynomial.polynomial.polymul(poly, [-xs[k], 1.0])
        poly[0] += c[k]
    return poly


def nested_order(n: int, xi: float) -> tuple[np.ndarray, np.ndarray]:
    """Node insertion order around xi and the left edge of each nested window.

    Returns (order, lefts): order[k] is the index of the (k+1)-th node added,
    lefts[k] the smallest index of the contiguous window after k insertions
    (so the window of the degree-k polynomial is lefts[k] .. lefts[k] + k).
    Distance ties go to the smaller index.
    """
    if n < 1:
        raise ValueError("need at least one node")
    dist0 = [abs(j - xi) for j in range(n)]
    j0 = int(np.argmin(dist0))  # argmin takes the first (smallest) index on ties
    order = np.empty(n, dtype=np.int64)
    lefts = np.empty(n, dtype=np.int64)
    order[0] = j0
    lefts[0] = j0
    lo = hi = j0
    for k in range(1, n):
        take_lo = hi + 1 >= n or (
            lo - 1 >= 0 and abs((lo - 1) - xi) <= abs((hi + 1) - xi)
        )
        if take_lo:
            lo -= 1
            order[k] = lo
        else:
            hi += 1
            order[k] = hi
        lefts[k] = lo
    return order, lefts


# ---------------------------------------------------------------------------
# smoothness indicators

_GAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss(npts: int) -> tuple[np.ndarray, np.ndarray]:
    try:
        return _GAUSS_CACHE[npts]
    except KeyError:
        xw = np.polynomial.legendre.leggauss(npts)
        _GAUSS_CACHE[npts] = xw
        return xw


def _deriv_square_integral(coeffs: np.ndarray, a: float, b: float, lmax: int) -> float:
    """sum_{l=1..lmax} integral_a^b (p^(l))^2 dxi for p in power basis."""
    deg = len(coeffs) - 1
    npts = math.ceil((2 * deg + 1) / 2) if deg > 0 else 1
    gx, gw = _gauss(npts)
    # map [-1, 1] -> [a, b]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    pts = mid + half * gx
    total = 0.0
    dcf = coeffs
    for _ in range(min(lmax, deg)):
        dcf = np.polynomial.polynomial.polyder(dcf)
        vals = np.polynomial.polynomial.polyval(pts, dcf)
        total += half * float(np.dot(gw, vals * vals))
    return total


@dataclass(frozen=True)
class SmoothnessSuite:
    """All indicator values for one stencil/evaluation-point pair.

    nested[k-1] holds I_k for k = 1..r (nested windows, integrated over the
    full range, 1/r normalization).  sub_min[k-1] / sub_max[k-1] hold IS_k /
    IM_k for k = 1..r0 (minimum / maximum over all contiguous degree-k
    windows, same full-range integral); sub_r0[j] is that full-range family
    at degree r0 before the min/max is taken.  local[j] holds the degree-r0
    window indicator at offset j, integrated over its own support with 1/r0
    normalization; istar / ismin are its arithmetic mean and minimum.
    """

    nested: np.ndarray
    sub_min: np.ndarray
    sub_max: np.ndarray
    sub_r0: np.ndarray
    local: np.ndarray

    @property
    def ismin(self) -> float:
        return float(self.local.min())

    @property
    def istar(self) -> float:
        return float(self.local.mean())

    @property
    def istar_harmonic(self) -> float:
        inv = 1.0 / self.local if np.all(self.local > 0) else None
        if inv is None:
            return 0.0
        return float(self.local.size / inv.sum())


def smoothness_suite(values, r0: int, lefts=None, xi: float | None = None) -> SmoothnessSuite:
    """Compute every indicator for one stencil.

    lefts comes from :func:`nested_order`; pass xi instead to have it
    computed here.  values are the n = r + 1 nodal values in index order.
    """
    v = np.asarray(values, dtype=float)
    n = v.size
    r = n - 1
    if not 1 <= r0 <= r:
        raise ValueError(f"need 1 <= r0 <= {r}, got {r0}")
    if lefts is None:
        if xi is None:
            raise ValueError("pass either lefts or xi")
        _, lefts = nested_order(n, xi)

    idx = np.arange(n, dtype=float)
    nested = np.empty(r)
    for k in range(1, r + 1):
        i0 = int(lefts[k])
        win = slice(i0, i0 + k + 1)
        cf = _power_coeffs(idx[win], v[win])
        nested[k - 1] = _deriv_square_integral(cf, 0.0, r, k) / r

    sub_min = np.empty(r0)
    sub_max = np.empty(r0)
    sub_r0 = np.empty(0)
    for k in range(1, r0 + 1):
        vals = []
        for j in range(r - k + 1):
            cf = _power_coeffs(idx[j : j + k + 1], v[j : j + k + 1])
            vals.append(_deriv_square_integral(cf, 0.0, r, r0) / r)
        sub_min[k - 1] = min(vals)
        sub_max[k - 1] = max(vals)
        if k == r0:
            sub_r0 = np.asarray(vals)

    local = np.empty(r - r0 + 1)
    for j in range(r - r0 + 1):
        cf = _power_coeffs(idx[j : j + r0 + 1], v[j : j + r0 + 1])
        local[j] = _deriv_square_integral(cf, float(j), float(j + r0), r0) / r0

    return SmoothnessSuite(
        nested=nested, sub_min=sub_min, sub_max=sub_max, sub_r0=sub_r0, local=local
    )


def beta_tv(field_values, r0: int, valid=None) -> float:
    """Total-variation regularizer: (mean |undivided difference|)**(2*r0).

    field_values is a 1D or 2D array; for 2D both directions are pooled.
    valid optionally masks nodes (only differences between two valid nodes
    count).  Returns 0 when no valid difference exists.
    """
    f = np.asarray(field_values, dtype=float)
    diffs = []
    if f.ndim == 1:
        axes = [0]
    elif f.ndim == 2:
        axes = [0, 1]
    else:
        raise ValueError("field must be 1D or 2D")
    for ax in axes:
        d = np.abs(np.diff(f, axis=ax))
        if valid is not None:
            pair_ok = np.logical_and(
                np.take(valid, np.arange(f.shape[ax] - 1), axis=ax),
                np.take(valid, np.arange(1, f.shape[ax]), axis=ax),
            )
            d = d[pair_ok]
        diffs.append(np.ravel(d))
    alld = np.concatenate(diffs) if diffs else np.empty(0)
    if alld.size == 0:
        return 0.0
    return float(np.mean(alld)) ** (2 * r0)


# ---------------------------------------------------------------------------
# weight families

def weights_sw(suite: SmoothnessSuite, p: WeightParams) -> np.ndarray:
    """Per-degree weights omega_k = 1 - (1 - rho^s1)^s2, rho = IS/I clamped."""
    r = suite.nested.size
    r0 = suite.sub_min.size
    w = np.empty(r)
    for k in range(1, r + 1):
        is_ref = suite.sub_min[min(k, r0) - 1]
        rho = (is_ref + p.eps) / (suite.nested[k - 1] + p.eps)
        rho = min(rho, 1.0)
        w[k - 1] = 1.0 - (1.0 - rho ** p.s1) ** p.s2
    return w


def weights_iw(suite: SmoothnessSuite, p: WeightParams, beta: float = 0.0) -> np.ndarray:
    """Per-degree rational weights omega_k = 1 / (1 + tau * ((1-sigma)/sigma)^d)."""
    r = suite.nested.size
    r0 = suite.sub_min.size
    i_r = suite.nested[r - 1]
    kb = p.kappa * beta
    w = np.empty(r)
    for k in range(1, r + 1):
        is_ref = suite.sub_min[min(k, r0) - 1]
        ik = suite.nested[k - 1]
        sigma = min((is_ref + kb + p.eps) / (ik + kb + p.eps), 1.0)
        tau = (ik + p.eps) / (i_r + p.eps)
        if sigma >= 1.0:
            w[k - 1] = 1.0
        else:
            rho = tau * ((1.0 - sigma) / sigma) ** p.d
            w[k - 1] = 1.0 / (1.0 + rho)
    return w


def weight_uw(suite: SmoothnessSuite, p: WeightParams) -> float:
    """Single weight from IS_{r0} over the mean of the window indicators.

    The numerator is the full-range minimum substencil indicator, the
    denominator the arithmetic mean of the own-support window family; on
    smooth data the ratio sits at or slightly above 1 (clamped), so the
    weight saturates and the fit polynomial is used unmodified.
    """
    r0 = suite.sub_min.size
    rho = (suite.sub_min[r0 - 1] + p.eps) / (suite.istar + p.eps)
    rho = min(rho, 1.0)
    return 1.0 - (1.0 - rho ** p.s1) ** p.s2


def weight_gaw(suite: SmoothnessSuite, p: WeightParams) -> float:
    """Single weight from the generalized-average ratio of the full-range family.

    rho = count^2 / (sum(a^m) * sum(a^-m)) lies in (0, 1] by Cauchy-Schwarz,
    reaching 1 exactly when all indicators agree.  The deficit 1 - rho is
    quadratic in the family's relative spread, so on smooth data the weight
    loses far less than the min/mean ratio does.  Note the exponent placement
    differs from the other families: s1 sharpens the deficit, s2 the weight.
    """
    a = suite.sub_r0 + p.eps
    a = a / a.max()
    a = np.maximum(a, 1e-154)  # keeps a**-m finite without affecting rho <= 1
    b = a ** p.m
    with np.errstate(over="ignore"):  # inf product just drives rho to 0
        rho = a.size * a.size / (b.sum() * (1.0 / b).sum())
    return (1.0 - (1.0 - min(rho, 1.0)) ** p.s1) ** p.s2


def lambda_map(omega: float, lam: float) -> float:
    """Exponential remap (e^(lam*omega) - 1) / (e^lam - 1); identity at lam = 0.

    Kept finite for any lam: above ~700 the direct exponentials overflow, so
    the factored form e^(lam*(omega-1)) * (1-e^(-lam*omega)) / (1-e^(-lam))
    is used instead.
    """
    if lam == 0.0:
        return float(omega)
    if lam > 700.0:
        num = -math.expm1(-lam * omega)
        den = -math.expm1(-lam)
        return math.exp(lam * (omega - 1.0)) * num / den
    return math.expm1(lam * omega) / math.expm1(lam)


def extrapolate_recurrence(values, xi: float, omegas, lefts) -> float:
    """Blend the nested interpolants: u_k = (1-w_k) u_{k-1} + w_k p_k(xi)."""
    v = np.asarray(values, dtype=float)
    idx = np.arange(v.size, dtype=float)
    u = float(v[lefts[0]])
    for k in range(1, v.size):
        i0 = int(lefts[k])
        pk = interpolate_poly(idx[i0 : i0 + k + 1], v[i0 : i0 + k + 1], xi)
        w = float(omegas[k - 1])
        u = (1.0 - w) * u + w * pk
    return u


# ---------------------------------------------------------------------------
# least squares

_LS_ROW_CACHE: dict[tuple[int, int, float], np.ndarray] = {}


def least_squares_row(n: int, degree: int, xi: float) -> np.ndarray:
    """Row w with w . values = (degree-r LS fit of the n nodal values)(xi).

    The fit uses coordinates centered and scaled to [-1, 1], which keeps the
    normal equations well conditioned; the row itself is what the batched
    path precomputes."""
    key = (n, degree, xi)
    row = _LS_ROW_CACHE.get(key)
    if row is not None:
        return row
    if degree >= n:
        raise ValueError("least-squares degree must be below the node count")
    c = 0.5 * (n - 1)
    t = (np.arange(n) - c) / c
    A = np.vander(t, degree + 1, increasing=True)
    phi = np.power((xi - c) / c, np.arange(degree + 1))
    row = phi @ np.linalg.pinv(A)
    _LS_ROW_CACHE[key] = row
    return row


# ---------------------------------------------------------------------------
# dispatch

def _nearest_index(n: int, xi: float) -> int:
    return int(np.argmin([abs(j - xi) for j in range(n)]))


def extrapolate(values, xi: float, method: str, params: WeightParams | None = None,
                beta: float = 0.0) -> float:
    """Evaluate one weighted extrapolation in normalized coordinates.

    values has r + 1 entries (R + 1 for the wls-* methods), xi is the target
    in units of the node spacing with node j at xi = j.  beta is the iw
    regularizer value (already scaled; 0 when unused).
    """
    p = params if params is not None else WeightParams()
    p.validate(method)
    v = np.asarray(values, dtype=float)
    n = v.size

    if method == "constant":
        return float(v[_nearest_index(n, xi)])
    if method == "lagrange":
        return interpolate_poly(np.arange(n, dtype=float), v, xi)

    if n != p.stencil_size(method):
        raise ValueError(
            f"method {method!r} expects {p.stencil_size(method)} nodes, got {n}"
        )

    order, lefts = nested_order(n, xi)

    if method in ("sw", "iw"):
        suite = smoothness_suite(v, p.r0, lefts=lefts)
        if method == "sw":
            w = weights_sw(suite, p)
        else:
            w = weights_iw(suite, p, beta=beta)
        return extrapolate_recurrence(v, xi, w, lefts)

    suite = smoothness_suite(v, p.r0, lefts=lefts)
    inner = _SINGLE_WEIGHT.get(method) or _WLS_INNER[method]
    if inner == "gaw":
        w = weight_gaw(suite, p)
    else:
        w = weight_uw(suite, p)
        if inner == "lambda-uw":
            w = lambda_map(w, p.lam)

    i0 = int(lefts[0])
    if method in _WLS_INNER:
        z = float(least_squares_row(n, p.r, xi) @ v)
    else:
        z = interpolate_poly(np.arange(n, dtype=float), v, xi)
    return w * z + (1.0 - w) * float(v[i0])


def value_at(stencil: UniformStencil, query: ExtrapolationQuery) -> float:
    """Physical-coordinate wrapper around :func:`extrapolate`."""
    beta = query.beta
    p = query.params
    if p.beta_mode == "fixed-power":
        beta = (p.beta_scale * stencil.h ** p.r0) ** 2
    return extrapolate(stencil.values, stencil.normalize(query.x), query.method, p, beta)
