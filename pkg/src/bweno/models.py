"""Model equations: linear advection, Burgers, and compressible Euler.

Every model exposes the same small surface the solver drives:

* ``m`` (number of fields) and ``dim`` (1 or 2),
* ``flux(u, axis)`` and ``eig(u, axis)`` returning eigenvalues plus left /
  right eigenvector matrices (rows / columns respectively, so L @ R = I),
* ``max_speed(u)`` for CFL time steps,
* ``initial(x, y)`` and, when available, ``exact(x, y, t)``,
* ``boundary(x, y, t)`` returning the Dirichlet data g together with its
  first and second time derivatives, which the staged ghost fill needs.

States are arrays with a trailing field axis of length m, so the same code
serves single points and whole grids.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["Advection1D", "Advection2D", "Burgers1D", "Euler1D", "Euler2D"]


def _unit_eig(u):
    shape = u.shape[:-1]
    lam_shape = shape + (1,)
    ones = np.ones(shape + (1, 1))
    return np.zeros(lam_shape), ones, ones


class Advection1D:
    """u_t + u_x = 0 with the standing test profile 0.25 + 0.5 sin(pi(x-t))."""

    m = 1
    dim = 1
    fields = ("u",)

    def flux(self, u, axis=0):
        return np.asarray(u, dtype=float).copy()

    def eig(self, u, axis=0):
        lam, L, R = _unit_eig(np.asarray(u))
        lam += 1.0
        return lam, L, R

    def eigvals(self, u, axis=0):
        return np.ones(np.asarray(u).shape)

    def max_speed(self, u):
        return np.ones(np.asarray(u).shape[:-1])

    def initial(self, x, y=None):
        return self.exact(x, y, 0.0)

    def exact(self, x, y, t):
        x = np.asarray(x, dtype=float)
        return (0.25 + 0.5 * np.sin(math.pi * (x - t)))[..., None]

    def boundary(self, x, y, t):
        x = np.asarray(x, dtype=float)
        s = math.pi * (x - t)
        g = (0.25 + 0.5 * np.sin(s))[..., None]
        gt = (-0.5 * math.pi * np.cos(s))[..., None]
        gtt = (-0.5 * math.pi ** 2 * np.sin(s))[..., None]
        return g, gt, gtt


class Advection2D:
    """u_t + u_x + u_y = 0 with profile 0.25 + 0.5 sin(pi(x + y - 2t))."""

    m = 1
    dim = 2
    fields = ("u",)

    def flux(self, u, axis=0):
        return np.asarray(u, dtype=float).copy()

    def eig(self, u, axis=0):
        lam, L, R = _unit_eig(np.asarray(u))
        lam += 1.0
        return lam, L, R

    def eigvals(self, u, axis=0):
        return np.ones(np.asarray(u).shape)

    def max_speed(self, u):
        return np.ones(np.asarray(u).shape[:-1])

    def initial(self, x, y):
        return self.exact(x, y, 0.0)

    def exact(self, x, y, t):
        s = np.asarray(x, dtype=float) + np.asarray(y, dtype=float) - 2.0 * t
        return (0.25 + 0.5 * np.sin(math.pi * s))[..., None]

    def boundary(self, x, y, t):
        s = math.pi * (np.asarray(x, dtype=float) + np.asarray(y, dtype=float) - 2.0 * t)
        g = (0.25 + 0.5 * np.sin(s))[..., None]
        gt = (-math.pi * np.cos(s))[..., None]
        gtt = (-2.0 * math.pi ** 2 * np.sin(s))[..., None]
        return g, gt, gtt


# ---------------------------------------------------------------------------
# Burgers

def _u0(x):
    return 0.25 + 0.5 * np.sin(math.pi * np.asarray(x, dtype=float))


def _u0p(x):
    return 0.5 * math.pi * np.cos(math.pi * np.asarray(x, dtype=float))


def _u0pp(x):
    return -0.5 * math.pi ** 2 * np.sin(math.pi * np.asarray(x, dtype=float))


#: first characteristic crossing time 1 / max(-u0')
T_SHOCK = 2.0 / math.pi

_FACE_WEIGHTS = np.array([3.0, -25.0, 150.0, 150.0, -25.0, 3.0]) / 256.0


class _BoundaryTrace:
    """Inflow data g(t) = u(-1, t) sampled from an auxiliary periodic run.

    Once characteristics cross, the implicit profile equation stops having a
    usable single root, so the trace comes from a fine periodic solve of the
    same equation on (-1, 1).  Sampling happens at every accepted step of a
    fixed-dt run; time derivatives are fourth-order central differences on
    that uniform record, and point queries interpolate cubically.
    """

    def __init__(self, model, t_max: float, n: int = 8192, cfl: float = 0.5):
        from . import solver

        h = 2.0 / n
        dt_target = cfl * h / 0.75  # max|u| = 0.75 for this profile
        steps = max(1, math.ceil(t_max / dt_target))
        dt = t_max / steps
        x = -1.0 + (np.arange(n) + 0.5) * h
        u = model.initial(x)[None, :, :]  # (1, n, m)
        rec = np.empty(steps + 1)
        rec[0] = self._sample(u[0, :, 0])
        for k in range(steps):
            u = solver.periodic_rk3_step(model, u, h, dt)
            rec[k + 1] = self._sample(u[0, :, 0])
        self.dt = dt
        self.g = rec
        self.gp = self._derivative(rec, dt, 1)
        self.gpp = self._derivative(rec, dt, 2)

    @staticmethod
    def _sample(u):
        # value at the periodic seam x = -1 from the six nearest cells
        vals = np.concatenate([u[-3:], u[:3]])
        return float(_FACE_WEIGHTS @ vals)

    @staticmethod
    def _derivative(g, dt, order):
        n = g.size
        out = np.zeros(n)
        if n < 5:
            return out
        if order == 1:
            out[2:-2] = (g[:-4] - 8 * g[1:-3] + 8 * g[3:-1] - g[4:]) / (12 * dt)
        else:
            out[2:-2] = (-g[:-4] + 16 * g[1:-3] - 30 * g[2:-2]
                         + 16 * g[3:-1] - g[4:]) / (12 * dt * dt)
        out[:2] = out[2]
        out[-2:] = out[-3]
        return out

    def _interp(self, arr, t):
        s = t / self.dt
        base = int(np.clip(math.floor(s) - 1, 0, arr.size - 4))
        th = s - base
        w = np.empty(4)
        for j in range(4):
            num = 1.0
            for k in range(4):
                if k != j:
                    num *= (th - k) / (j - k)
            w[j] = num
        return float(w @ arr[base : base + 4])

    def eval(self, t):
        return (self._interp(self.g, t), self._interp(self.gp, t),
                self._interp(self.gpp, t))


class Burgers1D:
    """u_t + (u^2/2)_x = 0 with initial profile 0.25 + 0.5 sin(pi x).

    The exact smooth solution (implicit profile equation solved by Newton)
    is available for t below the crossing time; the left-boundary data for
    longer runs comes from :class:`_BoundaryTrace`, built lazily once a
    horizon is declared via ``prepare_trace``.
    """

    m = 1
    dim = 1
    fields = ("u",)

    def __init__(self):
        self._trace = None
        self._trace_tmax = None

    def flux(self, u, axis=0):
        u = np.asarray(u, dtype=float)
        return 0.5 * u * u

    def eig(self, u, axis=0):
        u = np.asarray(u, dtype=float)
        lam = u.copy()
        ones = np.ones(u.shape[:-1] + (1, 1))
        return lam, ones, ones

    def eigvals(self, u, axis=0):
        return np.asarray(u, dtype=float).copy()

    def max_speed(self, u):
        return np.abs(np.asarray(u)[..., 0])

    def initial(self, x, y=None):
        return _u0(x)[..., None]

    def _solve_profile(self, x, t):
        x = np.asarray(x, dtype=float)
        w = _u0(x)
        for _ in range(50):
            xi = x - w * t
            f = w - _u0(xi)
            df = 1.0 + t * _u0p(xi)
            dw = f / df
            w = w - dw
            if np.max(np.abs(dw)) < 1e-14:
                break
        res = np.max(np.abs(w - _u0(x - w * t)))
        if res > 1e-10:
            raise RuntimeError(f"profile iteration stalled, residual {res:.2e}")
        return w

    def exact(self, x, y, t):
        if t >= T_SHOCK:
            raise ValueError(
                f"smooth solution invalid for t >= {T_SHOCK:.6f} (characteristics cross)"
            )
        return self._solve_profile(x, t)[..., None]

    def prepare_trace(self, t_max: float, n: int = 8192):
        if self._trace is None or self._trace_tmax < t_max:
            self._trace = _BoundaryTrace(self, t_max * 1.02, n=n)
            self._trace_tmax = t_max
        return self._trace

    def boundary(self, x, y, t):
        x = np.asarray(x, dtype=float)
        if not np.allclose(x, -1.0, atol=1e-9):
            raise ValueError("Burgers inflow data is defined on x = -1 only")
        if t > 0.5:
            if self._trace is None:
                raise RuntimeError(
                    "boundary data past the crossing time needs prepare_trace()"
                )
            g, gp, gpp = self._trace.eval(t)
            shape = x.shape + (1,)
            return (np.full(shape, g), np.full(shape, gp), np.full(shape, gpp))
        w = self._solve_profile(np.full_like(x, -1.0), t)
        xi = -1.0 - w * t
        a = _u0p(xi)
        b = _u0pp(xi)
        den = 1.0 + t * a
        wt = -a * w / den
        xi_t = -w - t * wt
        a_t = b * xi_t
        den_t = a + t * a_t
        wtt = -(a_t * w + a * wt) / den + a * w * den_t / (den * den)
        return w[..., None], wt[..., None], wtt[..., None]


# ---------------------------------------------------------------------------
# Euler

class Euler1D:
    """1D compressible Euler, fields (rho, rho v, E), ideal gas."""

    m = 3
    dim = 1
    fields = ("rho", "rho_v", "E")

    def __init__(self, gamma: float = 1.4, init_pieces=None, inflow_state=None):
        self.gamma = gamma
        self.init_pieces = init_pieces
        self.inflow_state = None if inflow_state is None else np.asarray(
            inflow_state, dtype=float
        )

    def conserved(self, rho, v, p):
        rho = np.asarray(rho, dtype=float)
        v = np.asarray(v, dtype=float)
        p = np.asarray(p, dtype=float)
        E = p / (self.gamma - 1.0) + 0.5 * rho * v * v
        return np.stack([rho, rho * v, E], axis=-1)

    def primitive(self, u):
        rho = u[..., 0]
        v = u[..., 1] / rho
        p = (self.gamma - 1.0) * (u[..., 2] - 0.5 * rho * v * v)
        return rho, v, p

    def flux(self, u, axis=0):
        rho, v, p = self.primitive(u)
        return np.stack([u[..., 1], u[..., 1] * v + p, v * (u[..., 2] + p)], axis=-1)

    def eig(self, u, axis=0):
        g = self.gamma
        rho, v, p = self.primitive(u)
        c = np.sqrt(g * p / rho)
        H = (u[..., 2] + p) / rho
        b1 = (g - 1.0) / (c * c)
        b2 = 0.5 * b1 * v * v
        shape = u.shape[:-1]
        lam = np.stack([v - c, v, v + c], axis=-1)
        R = np.empty(shape + (3, 3))
        R[..., 0, 0] = 1.0
        R[..., 1, 0] = v - c
        R[..., 2, 0] = H - v * c
        R[..., 0, 1] = 1.0
        R[..., 1, 1] = v
        R[..., 2, 1] = 0.5 * v * v
        R[..., 0, 2] = 1.0
        R[..., 1, 2] = v + c
        R[..., 2, 2] = H + v * c
        L = np.empty(shape + (3, 3))
        L[..., 0, 0] = 0.5 * (b2 + v / c)
        L[..., 0, 1] = -0.5 * (b1 * v + 1.0 / c)
        L[..., 0, 2] = 0.5 * b1
        L[..., 1, 0] = 1.0 - b2
        L[..., 1, 1] = b1 * v
        L[..., 1, 2] = -b1
        L[..., 2, 0] = 0.5 * (b2 - v / c)
        L[..., 2, 1] = -0.5 * (b1 * v - 1.0 / c)
        L[..., 2, 2] = 0.5 * b1
        return lam, L, R

    def eigvals(self, u, axis=0):
        rho, v, p = self.primitive(u)
        c = np.sqrt(self.gamma * p / rho)
        return np.stack([v - c, v, v + c], axis=-1)

    def roe_mean(self, uL, uR):
        """Roe-averaged interface state, returned in conserved variables."""
        g = self.gamma
        rhoL, vL, pL = self.primitive(uL)
        rhoR, vR, pR = self.primitive(uR)
        w = np.sqrt(rhoR / rhoL)
        rho = w * rhoL
        v = (vL + w * vR) / (1.0 + w)
        HL = (uL[..., 2] + pL) / rhoL
        HR = (uR[..., 2] + pR) / rhoR
        H = (HL + w * HR) / (1.0 + w)
        p = (g - 1.0) / g * rho * (H - 0.5 * v * v)
        E = rho * H - p
        return np.stack([rho, rho * v, E], axis=-1)

    def max_speed(self, u):
        rho, v, p = self.primitive(u)
        return np.abs(v) + np.sqrt(self.gamma * p / rho)

    def is_physical(self, u):
        rho, _, p = self.primitive(u)
        return bool(np.all(np.isfinite(u)) and np.all(rho > 0) and np.all(p > 0))

    def initial(self, x, y=None):
        if self.init_pieces is None:
            raise ValueError("this Euler1D instance has no initial condition")
        x = np.asarray(x, dtype=float)
        rho = np.empty_like(x)
        v = np.empty_like(x)
        p = np.empty_like(x)
        rho.fill(np.nan)
        for xlo, xhi, rr, vv, pp in self.init_pieces:
            sel = (x >= xlo) & (x <= xhi) & ~np.isfinite(rho)
            rho[sel], v[sel], p[sel] = rr, vv, pp
        # nodes outside every piece (padded ghosts) take the nearest piece
        bad = ~np.isfinite(rho)
        if bad.any():
            first, last = self.init_pieces[0], self.init_pieces[-1]
            lo = bad & (x < first[0])
            hi = bad & ~lo
            rho[lo], v[lo], p[lo] = first[2], first[3], first[4]
            rho[hi], v[hi], p[hi] = last[2], last[3], last[4]
        return self.conserved(rho, v, p)

    def boundary(self, x, y, t):
        if self.inflow_state is None:
            raise ValueError("no inflow state configured")
        shape = np.asarray(x, dtype=float).shape + (self.m,)
        g = np.broadcast_to(self.inflow_state, shape).copy()
        return g, np.zeros(shape), np.zeros(shape)


_PERM_XY = np.array([0, 2, 1, 3])  # swap the two momentum components


class Euler2D:
    """2D compressible Euler, fields (rho, rho vx, rho vy, E), ideal gas."""

    m = 4
    dim = 2
    fields = ("rho", "rho_vx", "rho_vy", "E")

    def __init__(self, gamma: float = 1.4, initial_fn=None, inflow_state=None,
                 boundary_fn=None, boundary_is_field: bool = False):
        self.gamma = gamma
        self.initial_fn = initial_fn
        self.boundary_fn = boundary_fn
        # True when boundary_fn is valid at arbitrary points, not just on the
        # wall; inflow ghosts are then set directly from it.
        self.boundary_is_field = boundary_is_field
        self.inflow_state = None if inflow_state is None else np.asarray(
            inflow_state, dtype=float
        )

    def conserved(self, rho, vx, vy, p):
        rho = np.asarray(rho, dtype=float)
        vx = np.asarray(vx, dtype=float)
        vy = np.asarray(vy, dtype=float)
        p = np.asarray(p, dtype=float)
        E = p / (self.gamma - 1.0) + 0.5 * rho * (vx * vx + vy * vy)
        return np.stack([rho, rho * vx, rho * vy, E], axis=-1)

    def primitive(self, u):
        rho = u[..., 0]
        vx = u[..., 1] / rho
        vy = u[..., 2] / rho
        p = (self.gamma - 1.0) * (u[..., 3] - 0.5 * rho * (vx * vx + vy * vy))
        return rho, vx, vy, p

    def flux(self, u, axis=0):
        if axis == 1:
            up = u[..., _PERM_XY]
            return self.flux(up, axis=0)[..., _PERM_XY]
        rho, vx, vy, p = self.primitive(u)
        return np.stack([
            u[..., 1],
            u[..., 1] * vx + p,
            u[..., 1] * vy,
            vx * (u[..., 3] + p),
        ], axis=-1)

    def eig(self, u, axis=0):
        if axis == 1:
            lam, L, R = self.eig(u[..., _PERM_XY], axis=0)
            return lam, L[..., :, _PERM_XY], R[..., _PERM_XY, :]
        g = self.gamma
        rho, vx, vy, p = self.primitive(u)
        c = np.sqrt(g * p / rho)
        H = (u[..., 3] + p) / rho
        q2 = vx * vx + vy * vy
        b1 = (g - 1.0) / (c * c)
        b2 = 0.5 * b1 * q2
        shape = u.shape[:-1]
        lam = np.stack([vx - c, vx, vx, vx + c], axis=-1)
        R = np.zeros(shape + (4, 4))
        R[..., 0, 0] = 1.0
        R[..., 1, 0] = vx - c
        R[..., 2, 0] = vy
        R[..., 3, 0] = H - vx * c
        R[..., 0, 1] = 1.0
        R[..., 1, 1] = vx
        R[..., 2, 1] = vy
        R[..., 3, 1] = 0.5 * q2
        R[..., 2, 2] = 1.0
        R[..., 3, 2] = vy
        R[..., 0, 3] = 1.0
        R[..., 1, 3] = vx + c
        R[..., 2, 3] = vy
        R[..., 3, 3] = H + vx * c
        L = np.zeros(shape + (4, 4))
        L[..., 0, 0] = 0.5 * (b2 + vx / c)
        L[..., 0, 1] = -0.5 * (b1 * vx + 1.0 / c)
        L[..., 0, 2] = -0.5 * b1 * vy
        L[..., 0, 3] = 0.5 * b1
        L[..., 1, 0] = 1.0 - b2
        L[..., 1, 1] = b1 * vx
        L[..., 1, 2] = b1 * vy
        L[..., 1, 3] = -b1
        L[..., 2, 0] = -vy
        L[..., 2, 2] = 1.0
        L[..., 3, 0] = 0.5 * (b2 - vx / c)
        L[..., 3, 1] = -0.5 * (b1 * vx - 1.0 / c)
        L[..., 3, 2] = -0.5 * b1 * vy
        L[..., 3, 3] = 0.5 * b1
        return lam, L, R

    def eigvals(self, u, axis=0):
        if axis == 1:
            return self.eigvals(u[..., _PERM_XY], axis=0)
        rho, vx, vy, p = self.primitive(u)
        c = np.sqrt(self.gamma * p / rho)
        return np.stack([vx - c, vx, vx, vx + c], axis=-1)

    def roe_mean(self, uL, uR):
        """Roe-averaged interface state, returned in conserved variables."""
        g = self.gamma
        rhoL, vxL, vyL, pL = self.primitive(uL)
        rhoR, vxR, vyR, pR = self.primitive(uR)
        w = np.sqrt(rhoR / rhoL)
        rho = w * rhoL
        vx = (vxL + w * vxR) / (1.0 + w)
        vy = (vyL + w * vyR) / (1.0 + w)
        HL = (uL[..., 3] + pL) / rhoL
        HR = (uR[..., 3] + pR) / rhoR
        H = (HL + w * HR) / (1.0 + w)
        q2 = vx * vx + vy * vy
        p = (g - 1.0) / g * rho * (H - 0.5 * q2)
        E = rho * H - p
        return np.stack([rho, rho * vx, rho * vy, E], axis=-1)

    def max_speed(self, u):
        rho, vx, vy, p = self.primitive(u)
        c = np.sqrt(self.gamma * p / rho)
        return np.maximum(np.abs(vx), np.abs(vy)) + c

    def is_physical(self, u):
        rho, _, _, p = self.primitive(u)
        return bool(np.all(np.isfinite(u)) and np.all(rho > 0) and np.all(p > 0))

    def initial(self, x, y):
        if self.initial_fn is None:
            raise ValueError("this Euler2D instance has no initial condition")
        return self.initial_fn(self, x, y)

    def boundary(self, x, y, t):
        if self.boundary_fn is not None:
            return self.boundary_fn(self, x, y, t)
        if self.inflow_state is None:
            raise ValueError("no inflow state configured")
        shape = np.asarray(x, dtype=float).shape + (self.m,)
        g = np.broadcast_to(self.inflow_state, shape).copy()
        return g, np.zeros(shape), np.zeros(shape)
