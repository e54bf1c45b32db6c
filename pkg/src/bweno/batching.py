"""Vectorized ghost filling.

The per-ghost extrapolation pipeline in :mod:`bweno.solver` is exact but
runs one small problem at a time; a 2D run refills thousands of ghosts
three times per step, which makes that path the bottleneck.  This module
precomputes, per (ghost, target) pair, everything that does not depend on
the field values — evaluation rows, nested window positions and the
quadratic forms of every smoothness indicator — and then evaluates whole
batches with einsum.

Indicators are quadratic in the data, I = v^T M v, where M integrates
products of Lagrange-basis derivatives with the same Gauss rule as the
scalar path, so the two paths agree to rounding.
"""

from __future__ import annotations

import math

import numpy as np

from . import extrapolation as ex

__all__ = ["BatchExtrapolator", "BatchedGhostFiller"]


# ---------------------------------------------------------------------------
# quadratic forms

_FORM_CACHE: dict = {}


def _form_matrix(xs, a, b, lmax, norm):
    """Matrix M with v^T M v = sum_{l=1..min(lmax,deg)} int_a^b (p^(l))^2 / norm."""
    xs = tuple(float(x) for x in xs)
    key = (xs, a, b, lmax, norm)
    M = _FORM_CACHE.get(key)
    if M is not None:
        return M
    s = len(xs)
    deg = s - 1
    basis = []
    for i in range(s):
        e = np.zeros(s)
        e[i] = 1.0
        basis.append(ex._power_coeffs(np.asarray(xs), e))
    npts = math.ceil((2 * deg + 1) / 2) if deg > 0 else 1
    gx, gw = ex._gauss(npts)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    pts = mid + half * gx
    M = np.zeros((s, s))
    dcs = basis
    for _ in range(min(lmax, deg)):
        dcs = [np.polynomial.polynomial.polyder(c) for c in dcs]
        V = np.stack([np.polynomial.polynomial.polyval(pts, c) for c in dcs])
        M += half * (V * gw) @ V.T
    M /= norm
    _FORM_CACHE[key] = M
    return M


class _IndicatorTables:
    """All indicator form matrices for a stencil of n nodes and degree r0."""

    _cache: dict = {}

    def __new__(cls, n: int, r0: int):
        key = (n, r0)
        inst = cls._cache.get(key)
        if inst is not None:
            return inst
        inst = super().__new__(cls)
        r = n - 1
        # local family: each degree-r0 window over its own support; one
        # matrix serves every offset (translation invariance)
        inst.local = _form_matrix(range(r0 + 1), 0.0, r0, r0, r0)
        # nested family: window [left, left+k] integrated over [0, r]
        inst.nested = [None] * (r + 1)
        for k in range(1, r + 1):
            inst.nested[k] = np.stack([
                _form_matrix(range(left, left + k + 1), 0.0, r, k, r)
                for left in range(n - k)
            ])
        # substencil family: degree-k windows (k <= r0) over [0, r]
        inst.sub = {}
        for k in range(1, r0 + 1):
            inst.sub[k] = np.stack([
                _form_matrix(range(j, j + k + 1), 0.0, r, r0, r)
                for j in range(n - k)
            ])
        cls._cache[key] = inst
        return inst


def _lagrange_row(xs, xi: float) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    s = xs.size
    row = np.empty(s)
    for j in range(s):
        num = 1.0
        for k in range(s):
            if k != j:
                num *= (xi - xs[k]) / (xs[j] - xs[k])
        row[j] = num
    return row


def _lambda_map_vec(w, lam: float):
    if lam == 0.0:
        return w
    if lam > 700.0:
        den = -math.expm1(-lam)
        return np.exp(lam * (w - 1.0)) * (-np.expm1(-lam * w)) / den
    return np.expm1(lam * w) / math.expm1(lam)


# ---------------------------------------------------------------------------
# batched evaluator

class BatchExtrapolator:
    """Evaluates T extrapolation targets with shared (method, params, n).

    Construction precomputes per-target rows and window positions; calls
    take a (T, n) value matrix (plus an optional per-target beta vector for
    the iw regularization) and return (T,) results matching
    :func:`bweno.extrapolation.extrapolate` to rounding.
    """

    def __init__(self, method: str, params: ex.WeightParams, n: int, xis):
        params.validate(method)
        xis = np.asarray(xis, dtype=float)
        if n != params.stencil_size(method) and method not in ("constant", "lagrange"):
            raise ValueError(f"method {method!r} expects {params.stencil_size(method)} nodes")
        self.method = method
        self.params = params
        self.n = n
        self.T = xis.size
        self.xis = xis
        r0 = params.r0
        self._recurrence = method in ("sw", "iw")
        self._wls = method in ex._WLS_INNER
        self._inner = ex._SINGLE_WEIGHT.get(method) or ex._WLS_INNER.get(method)

        nodes = np.arange(n, dtype=float)
        cache: dict = {}
        i0 = np.empty(self.T, dtype=np.int64)
        if method == "constant":
            for t, xi in enumerate(xis):
                i0[t] = ex._nearest_index(n, xi)
            self.i0 = i0
            return
        if method == "lagrange":
            rows = np.empty((self.T, n))
            for t, xi in enumerate(xis):
                key = float(xi)
                if key not in cache:
                    cache[key] = _lagrange_row(nodes, xi)
                rows[t] = cache[key]
            self.rows = rows
            return

        self.tables = _IndicatorTables(n, r0)
        if self._recurrence:
            r = n - 1
            lefts = np.empty((self.T, n), dtype=np.int64)
            rows = np.zeros((self.T, r, n))
            for t, xi in enumerate(xis):
                key = float(xi)
                hit = cache.get(key)
                if hit is None:
                    _, lf = ex.nested_order(n, xi)
                    rk = np.zeros((r, n))
                    for k in range(1, r + 1):
                        w0 = int(lf[k])
                        rk[k - 1, w0 : w0 + k + 1] = _lagrange_row(
                            nodes[w0 : w0 + k + 1], xi
                        )
                    hit = (lf, rk)
                    cache[key] = hit
                lefts[t] = hit[0]
                rows[t] = hit[1]
            self.lefts = lefts
            self.rows = rows
            return

        rows = np.empty((self.T, n))
        for t, xi in enumerate(xis):
            key = float(xi)
            hit = cache.get(key)
            if hit is None:
                if self._wls:
                    row = ex.least_squares_row(n, params.r, float(xi))
                else:
                    row = _lagrange_row(nodes, xi)
                hit = (row, ex._nearest_index(n, xi))
                cache[key] = hit
            rows[t] = hit[0]
            i0[t] = hit[1]
        self.rows = rows
        self.i0 = i0

    # -- indicator helpers -------------------------------------------------

    def _local_family(self, V):
        r0 = self.params.r0
        W = self.n - r0
        Q = self.tables.local
        wins = np.stack([V[:, j : j + r0 + 1] for j in range(W)], axis=1)
        return np.einsum("twi,ij,twj->tw", wins, Q, wins)

    def _nested(self, V, k):
        Q = self.tables.nested[k][self.lefts[:, k]]
        cols = self.lefts[:, k : k + 1] + np.arange(k + 1)[None, :]
        wins = np.take_along_axis(V, cols, axis=1)
        return np.einsum("ti,tij,tj->t", wins, Q, wins)

    def _sub_min(self, V, k):
        vals = []
        for j in range(self.n - k):
            Q = self.tables.sub[k][j]
            win = V[:, j : j + k + 1]
            vals.append(np.einsum("ti,ij,tj->t", win, Q, win))
        return np.min(np.stack(vals), axis=0)

    def _sub_r0_family(self, V):
        r0 = self.params.r0
        vals = []
        for j in range(self.n - r0):
            Q = self.tables.sub[r0][j]
            win = V[:, j : j + r0 + 1]
            vals.append(np.einsum("ti,ij,tj->t", win, Q, win))
        return np.stack(vals, axis=1)

    # -- evaluation --------------------------------------------------------

    def __call__(self, V, beta=None):
        V = np.asarray(V, dtype=float)
        if V.shape != (self.T, self.n):
            raise ValueError(f"expected values of shape {(self.T, self.n)}")
        p = self.params
        if self.method == "constant":
            return V[np.arange(self.T), self.i0]
        if self.method == "lagrange":
            return np.einsum("tj,tj->t", self.rows, V)

        if self._recurrence:
            return self._eval_recurrence(V, beta)

        if self._inner == "gaw":
            fam = self._sub_r0_family(V)
            a = fam + p.eps
            a = a / a.max(axis=1, keepdims=True)
            a = np.maximum(a, 1e-154)
            b = a ** p.m
            W = fam.shape[1]
            # huge indicator spreads overflow the product; rho -> 0 either way
            with np.errstate(over="ignore"):
                rho = (W * W) / (b.sum(axis=1) * (1.0 / b).sum(axis=1))
            w = (1.0 - (1.0 - np.minimum(rho, 1.0)) ** p.s1) ** p.s2
        else:
            num = self._sub_r0_family(V).min(axis=1)
            den = self._local_family(V).mean(axis=1)
            rho = np.minimum((num + p.eps) / (den + p.eps), 1.0)
            w = 1.0 - (1.0 - rho ** p.s1) ** p.s2
            if self._inner == "lambda-uw":
                w = _lambda_map_vec(w, p.lam)
        z = np.einsum("tj,tj->t", self.rows, V)
        return w * z + (1.0 - w) * V[np.arange(self.T), self.i0]

    def _eval_recurrence(self, V, beta):
        p = self.params
        r = self.n - 1
        r0 = p.r0
        kb = np.zeros(self.T) if beta is None else p.kappa * np.asarray(beta, dtype=float)
        sub = [self._sub_min(V, k) for k in range(1, r0 + 1)]
        nested = [self._nested(V, k) for k in range(1, r + 1)]
        u = V[np.arange(self.T), self.lefts[:, 0]]
        i_r = nested[r - 1]
        for k in range(1, r + 1):
            is_ref = sub[min(k, r0) - 1]
            ik = nested[k - 1]
            if self.method == "sw":
                rho = np.minimum((is_ref + p.eps) / (ik + p.eps), 1.0)
                w = 1.0 - (1.0 - rho ** p.s1) ** p.s2
            else:
                sigma = np.minimum((is_ref + kb + p.eps) / (ik + kb + p.eps), 1.0)
                tau = (ik + p.eps) / (i_r + p.eps)
                with np.errstate(divide="ignore", over="ignore"):
                    ratio = np.where(sigma < 1.0, (1.0 - sigma) / np.maximum(sigma, 1e-300), 0.0)
                    w = np.where(sigma >= 1.0, 1.0, 1.0 / (1.0 + tau * ratio ** p.d))
            pk = np.einsum("tj,tj->t", self.rows[:, k - 1], V)
            u = (1.0 - w) * u + w * pk
        return u


# ---------------------------------------------------------------------------
# ghost filler

class _Stage1:
    """Gather-and-extrapolate of the N_q chain values for every plan."""

    def __init__(self, ws, plans):
        S = ws.params.stencil_size(ws.method)
        G = len(plans)
        self.G, self.S = G, S
        self.direct = np.stack([pl.direct for pl in plans]) if G else np.empty((0, S), np.int64)
        self.sten_idx = np.stack([pl.sten_idx for pl in plans]) if G else None
        self.free = ~(self.direct >= 0)
        free_g, free_q = np.nonzero(self.free)
        self.free_g, self.free_q = free_g, free_q
        xis = np.stack([pl.sten_xi for pl in plans])[free_g, free_q] if G else []
        self.ev = BatchExtrapolator(ws.method, ws.params, S, xis) if len(free_g) else None
        self.gather = self.sten_idx[free_g, free_q] if len(free_g) else None
        # per-target stencil spacing (stage-1 stencils run across the line)
        if G:
            perp = np.array([ws.mesh.hy if pl.axis == 0 else ws.mesh.hx for pl in plans])
            self.h_free = perp[free_g]

    def __call__(self, Uc, beta_scalar, fixed_power, p):
        """Uc: (nnodes,) one component; returns (G, S) chain values."""
        vals = np.empty((self.G, self.S))
        dpos = self.direct >= 0
        vals[dpos] = Uc[self.direct[dpos]]
        if self.ev is not None:
            beta = None
            if fixed_power:
                beta = (p.beta_scale * self.h_free ** p.r0) ** 2
            elif beta_scalar:
                beta = np.full(self.free_g.size, beta_scalar)
            vals[self.free_g, self.free_q] = self.ev(Uc[self.gather], beta=beta)
        return vals


class BatchedGhostFiller:
    """Drop-in replacement for the scalar ghost filler, einsum throughout."""

    def __init__(self, ws):
        self.ws = ws
        plans = ws.plans
        S = ws.params.stencil_size(ws.method)
        self.S = S
        self.stage1 = _Stage1(ws, plans)
        self.flat = np.array([pl.flat for pl in plans], dtype=np.int64)
        self.delta = np.array([pl.delta for pl in plans])
        bc = np.array([("inflow", "outflow", "reflect").index(pl.bc) for pl in plans],
                      dtype=np.int64) if plans else np.empty(0, np.int64)
        self.g_in = np.flatnonzero(bc == 0)
        self.g_out = np.flatnonzero(bc == 1)
        self.g_ref = np.flatnonzero(bc == 2)
        method, params = ws.method, ws.params

        self.field_data = getattr(ws.model, "boundary_is_field", False)
        if self.g_in.size:
            self.bx = np.array([plans[g].p0[0] for g in self.g_in])
            self.by = np.array([plans[g].p0[1] for g in self.g_in])
            xs, ys = ws.mesh.xs(), ws.mesh.ys()
            self.gx = np.array([xs[plans[g].ix] for g in self.g_in])
            self.gy = np.array([ys[plans[g].iy] for g in self.g_in])
            if not self.field_data:
                xi_pq = np.stack([plans[g].xi_pq for g in self.g_in])  # (Gin, S-1)
                self.ev_chain = BatchExtrapolator(method, params, S, xi_pq.ravel())
                self.ev_dirichlet = BatchExtrapolator(
                    method, params, S,
                    np.array([plans[g].xi_p_dirichlet for g in self.g_in]),
                )
        if self.g_out.size:
            self.ev_out = BatchExtrapolator(
                method, params, S, np.array([plans[g].xi_p for g in self.g_out])
            )
        if self.g_ref.size:
            attr = "xi_mirror" if ws.reflect_mode == "mirror" else "xi_p"
            self.ev_ref = BatchExtrapolator(
                method, params, S,
                np.array([getattr(plans[g], attr) for g in self.g_ref]),
            )
            self.normals = np.stack([plans[g].wall_normal for g in self.g_ref])

    def _chain_beta(self, sel, tv_val, reps=1):
        p = self.ws.params
        if p.beta_mode == "fixed-power":
            b = (p.beta_scale * self.delta[sel] ** p.r0) ** 2
            return np.repeat(b, reps) if reps > 1 else b
        if p.beta_mode == "total-variation":
            return np.full(sel.size * reps, tv_val)
        return None

    def __call__(self, U, t, stage, dt):
        ws = self.ws
        m = ws.model.m
        p = ws.params
        Uf = U.reshape(-1, m)
        from .solver import _stage_value, _reflect_state

        tv = None
        if p.beta_mode == "total-variation":
            tv = [ex.beta_tv(U[..., f], p.r0, valid=ws.interior) for f in range(m)]
        fixed_power = p.beta_mode == "fixed-power"

        out = np.empty((len(ws.plans), m))
        if self.g_in.size:
            if self.field_data:
                from .solver import _STAGE_TIMES
                ts = t + _STAGE_TIMES[stage] * dt
                out[self.g_in] = ws.model.boundary(self.gx, self.gy, ts)[0]
            else:
                g, gt, gtt = ws.model.boundary(self.bx, self.by, t)
                gval = _stage_value(g, gt, gtt, stage, dt)

        for f in range(m):
            tvf = tv[f] if tv is not None else 0.0
            vals = self.stage1(Uf[:, f], tvf, fixed_power, p)  # (G, S)
            if self.g_in.size and not self.field_data:
                Gin = self.g_in.size
                chain = vals[self.g_in]  # (Gin, S)
                data = np.repeat(chain, self.S - 1, axis=0)
                pv = self.ev_chain(data, beta=self._chain_beta(self.g_in, tvf, self.S - 1))
                pvals = np.empty((Gin, self.S))
                pvals[:, 0] = gval[:, f]
                pvals[:, 1:] = pv.reshape(Gin, self.S - 1)
                out[self.g_in, f] = self.ev_dirichlet(
                    pvals, beta=self._chain_beta(self.g_in, tvf)
                )
            if self.g_out.size:
                out[self.g_out, f] = self.ev_out(
                    vals[self.g_out], beta=self._chain_beta(self.g_out, tvf)
                )
            if self.g_ref.size:
                out[self.g_ref, f] = self.ev_ref(
                    vals[self.g_ref], beta=self._chain_beta(self.g_ref, tvf)
                )

        if self.g_ref.size and m > 1:
            w = out[self.g_ref]
            if ws.model.dim == 1:
                w[:, 1] = -w[:, 1]
            else:
                nx, ny = self.normals[:, 0], self.normals[:, 1]
                mn = w[:, 1] * nx + w[:, 2] * ny
                w[:, 1] -= 2.0 * mn * nx
                w[:, 2] -= 2.0 * mn * ny
            out[self.g_ref] = w
        Uf[self.flat] = out
