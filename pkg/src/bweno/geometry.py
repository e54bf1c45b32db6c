"""Implicit domains on Cartesian meshes: classification and ghost-node plans.

A domain is a tree of primitives (half-plane, disk, convex polygon, box,
1D interval) combined by union / intersection / complement, each boundary
piece carrying a BC tag ("inflow", "outflow", "reflect").  The inside test
is phi < 0.  Ghost nodes are exterior mesh nodes within k node spacings of
an interior node along a mesh row (GhostX) or column (GhostY).

For every ghost node a :class:`GhostPlan` freezes all geometry the solver
needs: the nearest boundary point P0, the normal segment P0 -> P, the R+1
interior crossings N_q of that line with mesh lines, a 1D interior stencil
S_q on each crossing's grid line, and the normalized abscissae used by the
two- or three-stage extrapolation pipeline.  Plans are immutable and their
construction is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

__all__ = [
    "NodeClass",
    "Mesh",
    "HalfPlane",
    "Disk",
    "Polygon",
    "box",
    "Interval",
    "Union",
    "Intersection",
    "Complement",
    "Domain",
    "GhostPlan",
    "GeometryError",
    "EmptyDomainError",
    "InsufficientStencilError",
    "classify_nodes",
    "build_plans",
    "dump_plans",
]

BC_KINDS = ("inflow", "outflow", "reflect")

_SNAP_TOL = 1e-9      # node-coincidence tolerance, relative to spacing
_ONB_TOL = 1e-9       # |phi| tolerance for "candidate lies on the boundary"
_TIE_TOL = 1e-12      # distance tie tolerance for nearest-point candidates


class GeometryError(ValueError):
    pass


class EmptyDomainError(GeometryError):
    pass


class InsufficientStencilError(GeometryError):
    pass


class NodeClass(IntEnum):
    EXTERIOR = 0
    INTERIOR = 1
    GHOST_X = 2
    GHOST_Y = 3
    GHOST_XY = 4


# ---------------------------------------------------------------------------
# mesh

@dataclass(frozen=True)
class Mesh:
    """Uniform node lattice; node (ix, iy) sits at (x0 + ix*hx, y0 + iy*hy)."""

    x0: float
    y0: float
    hx: float
    hy: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.hx <= 0 or self.hy <= 0:
            raise GeometryError("spacings must be positive")
        if self.nx < 1 or self.ny < 1:
            raise GeometryError("mesh must have at least one node per direction")

    def xs(self) -> np.ndarray:
        return self.x0 + self.hx * np.arange(self.nx)

    def ys(self) -> np.ndarray:
        return self.y0 + self.hy * np.arange(self.ny)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    def flat(self, iy, ix):
        return iy * self.nx + ix

    @classmethod
    def cover(cls, xmin: float, xmax: float, ymin: float, ymax: float,
              hx: float, hy: float | None = None, pad: int = 3) -> "Mesh":
        """Cell-centered cover of a bounding box, padded by `pad` cells."""
        hy = hx if hy is None else hy
        ncx = max(1, round((xmax - xmin) / hx))
        if ymax > ymin:
            ncy = max(1, round((ymax - ymin) / hy))
        else:
            ncy = 1
        return cls(
            x0=xmin + 0.5 * hx - pad * hx,
            y0=ymin + 0.5 * hy - pad * hy if ymax > ymin else ymin,
            hx=hx,
            hy=hy,
            nx=ncx + 2 * pad,
            ny=ncy + 2 * pad if ymax > ymin else 1,
        )


# ---------------------------------------------------------------------------
# boundary elements (per-primitive analytic pieces used for nearest points)

@dataclass(frozen=True)
class _Seg:
    a: tuple
    b: tuple
    bc: str

    def project(self, p):
        a = np.asarray(self.a)
        d = np.asarray(self.b) - a
        L2 = float(d @ d)
        t = 0.0 if L2 == 0.0 else float(np.clip((p - a) @ d / L2, 0.0, 1.0))
        return a + t * d


@dataclass(frozen=True)
class _Line:
    point: tuple
    normal: tuple  # unit
    bc: str

    def project(self, p):
        n = np.asarray(self.normal)
        return p - float((p - np.asarray(self.point)) @ n) * n


@dataclass(frozen=True)
class _Ring:
    center: tuple
    radius: float
    bc: str

    def project(self, p):
        c = np.asarray(self.center)
        d = p - c
        nrm = float(np.hypot(d[0], d[1]))
        if nrm == 0.0:
            return c + np.array([self.radius, 0.0])
        return c + (self.radius / nrm) * d


def _intersect_elements(e1, e2):
    """Intersection points of two boundary elements (possibly empty)."""
    pts = []

    def seg_dir(e):
        a = np.asarray(e.a, dtype=float)
        return a, np.asarray(e.b, dtype=float) - a

    def as_linear(e):
        # returns (point, tangent, lo, hi) parametrization p = point + t*tangent
        if isinstance(e, _Seg):
            a, d = seg_dir(e)
            return a, d, 0.0, 1.0
        n = np.asarray(e.normal, dtype=float)
        return np.asarray(e.point, dtype=float), np.array([-n[1], n[0]]), -np.inf, np.inf

    lin1 = not isinstance(e1, _Ring)
    lin2 = not isinstance(e2, _Ring)
    if lin1 and lin2:
        p1, d1, lo1, hi1 = as_linear(e1)
        p2, d2, lo2, hi2 = as_linear(e2)
        den = d1[0] * d2[1] - d1[1] * d2[0]
        if den != 0.0:
            rhs = p2 - p1
            t1 = (rhs[0] * d2[1] - rhs[1] * d2[0]) / den
            t2 = (rhs[0] * d1[1] - rhs[1] * d1[0]) / den
            if lo1 <= t1 <= hi1 and lo2 <= t2 <= hi2:
                pts.append(p1 + t1 * d1)
    elif lin1 != lin2:
        ring = e2 if lin1 else e1
        other = e1 if lin1 else e2
        p, d, lo, hi = as_linear(other)
        c = np.asarray(ring.center, dtype=float)
        # |p + t d - c|^2 = r^2
        aa = float(d @ d)
        bb = 2.0 * float(d @ (p - c))
        cc = float((p - c) @ (p - c)) - ring.radius ** 2
        disc = bb * bb - 4 * aa * cc
        if aa > 0 and disc >= 0:
            sq = math.sqrt(disc)
            for t in ((-bb - sq) / (2 * aa), (-bb + sq) / (2 * aa)):
                if lo <= t <= hi:
                    pts.append(p + t * d)
    else:
        c1 = np.asarray(e1.center, dtype=float)
        c2 = np.asarray(e2.center, dtype=float)
        d = c2 - c1
        dist = float(np.hypot(d[0], d[1]))
        r1, r2 = e1.radius, e2.radius
        if dist > 0 and abs(r1 - r2) <= dist <= r1 + r2:
            a = (r1 * r1 - r2 * r2 + dist * dist) / (2 * dist)
            h2 = r1 * r1 - a * a
            h = math.sqrt(max(h2, 0.0))
            mid = c1 + (a / dist) * d
            perp = np.array([-d[1], d[0]]) / dist
            pts.append(mid + h * perp)
            if h > 0:
                pts.append(mid - h * perp)
    return pts


# ---------------------------------------------------------------------------
# primitives

class _Node:
    def phi(self, x, y):
        raise NotImplementedError

    def elements(self):
        raise NotImplementedError


def _check_bc(bc):
    if bc not in BC_KINDS:
        raise GeometryError(f"unknown BC tag {bc!r}")


@dataclass(frozen=True)
class HalfPlane(_Node):
    """Inside where normal . (x,y) < offset; the normal points outward."""

    normal: tuple
    offset: float
    bc: str = "outflow"

    def __post_init__(self):
        _check_bc(self.bc)
        n = np.asarray(self.normal, dtype=float)
        nrm = float(np.hypot(n[0], n[1]))
        if nrm == 0.0:
            raise GeometryError("half-plane normal must be nonzero")
        object.__setattr__(self, "normal", (n[0] / nrm, n[1] / nrm))
        object.__setattr__(self, "offset", float(self.offset) / nrm)

    def phi(self, x, y):
        return self.normal[0] * x + self.normal[1] * y - self.offset

    def elements(self):
        p = (self.normal[0] * self.offset, self.normal[1] * self.offset)
        return [_Line(point=p, normal=self.normal, bc=self.bc)]


@dataclass(frozen=True)
class Disk(_Node):
    """Solid disk; phi < 0 strictly inside the circle."""

    center: tuple
    radius: float
    bc: str = "reflect"

    def __post_init__(self):
        _check_bc(self.bc)
        if self.radius <= 0:
            raise GeometryError("disk radius must be positive")

    def phi(self, x, y):
        return np.hypot(x - self.center[0], y - self.center[1]) - self.radius

    def elements(self):
        return [_Ring(center=tuple(self.center), radius=self.radius, bc=self.bc)]


@dataclass(frozen=True)
class Polygon(_Node):
    """Convex polygon, CCW vertices; phi = max over edge half-planes."""

    vertices: tuple
    bc: object = "reflect"  # one tag or a sequence, one per edge

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] != 2:
            raise GeometryError("polygon needs at least 3 (x,y) vertices")
        k = v.shape[0]
        bcs = [self.bc] * k if isinstance(self.bc, str) else list(self.bc)
        if len(bcs) != k:
            raise GeometryError("need one BC tag per polygon edge")
        for b in bcs:
            _check_bc(b)
        # outward edge normals for CCW ordering; convexity check via cross signs
        norms = []
        for i in range(k):
            a, b2 = v[i], v[(i + 1) % k]
            e = b2 - a
            cr = np.cross(b2 - a, v[(i + 2) % k] - b2)
            if cr <= 0:
                raise GeometryError("polygon must be convex with CCW vertices")
            n = np.array([e[1], -e[0]])
            n /= np.hypot(n[0], n[1])
            norms.append((n, float(n @ a)))
        object.__setattr__(self, "vertices", tuple(map(tuple, v)))
        object.__setattr__(self, "_edges", tuple(norms))
        object.__setattr__(self, "_bcs", tuple(bcs))

    def phi(self, x, y):
        vals = [n[0] * x + n[1] * y - c for n, c in self._edges]
        out = vals[0]
        for v in vals[1:]:
            out = np.maximum(out, v)
        return out

    def elements(self):
        v = self.vertices
        k = len(v)
        return [_Seg(a=v[i], b=v[(i + 1) % k], bc=self._bcs[i]) for i in range(k)]


def box(xmin, xmax, ymin, ymax, bc="outflow") -> Polygon:
    """Axis-aligned box; bc is one tag or {"left","right","bottom","top"}."""
    if isinstance(bc, str):
        bcs = [bc] * 4
    else:
        bcs = [bc["bottom"], bc["right"], bc["top"], bc["left"]]
    return Polygon(
        vertices=((xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax)),
        bc=bcs,
    )


@dataclass(frozen=True)
class Interval(_Node):
    """1D domain (xmin, xmax); phi ignores y."""

    xmin: float
    xmax: float
    bc_left: str = "inflow"
    bc_right: str = "outflow"

    def __post_init__(self):
        _check_bc(self.bc_left)
        _check_bc(self.bc_right)
        if not self.xmax > self.xmin:
            raise GeometryError("interval must have positive length")

    def phi(self, x, y):
        return np.maximum(self.xmin - x, x - self.xmax)

    def elements(self):
        return [
            _Line(point=(self.xmin, 0.0), normal=(-1.0, 0.0), bc=self.bc_left),
            _Line(point=(self.xmax, 0.0), normal=(1.0, 0.0), bc=self.bc_right),
        ]


@dataclass(frozen=True)
class Union(_Node):
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def phi(self, x, y):
        out = self.parts[0].phi(x, y)
        for p in self.parts[1:]:
            out = np.minimum(out, p.phi(x, y))
        return out

    def elements(self):
        return [e for p in self.parts for e in p.elements()]


@dataclass(frozen=True)
class Intersection(_Node):
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def phi(self, x, y):
        out = self.parts[0].phi(x, y)
        for p in self.parts[1:]:
            out = np.maximum(out, p.phi(x, y))
        return out

    def elements(self):
        return [e for p in self.parts for e in p.elements()]


@dataclass(frozen=True)
class Complement(_Node):
    part: _Node

    def phi(self, x, y):
        return -self.part.phi(x, y)

    def elements(self):
        return self.part.elements()


class Domain:
    """Wraps the primitive tree; owns boundary elements in a fixed order."""

    def __init__(self, root: _Node):
        self.root = root
        self.elements = list(root.elements())
        if not self.elements:
            raise GeometryError("domain has no boundary elements")
        self._corners = None

    def phi(self, x, y):
        return self.root.phi(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def inside(self, x, y):
        return self.phi(x, y) < 0.0

    def _has_interior_side(self, c, scale: float) -> bool:
        """True when the domain interior actually touches the point c.

        Where two primitives' boundaries coincide (a wedge base flush with
        a channel wall) the composite phi has a zero set with exterior on
        both sides; such points are not usable wall points.  Probing eight
        compass directions at a small radius detects a genuinely interior
        side.
        """
        eps = 1e-6 * scale
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1),
                       (1, 1), (1, -1), (-1, 1), (-1, -1)):
            s = eps / math.hypot(dx, dy)
            if float(self.phi(c[0] + dx * s, c[1] + dy * s)) < -1e-7 * scale:
                return True
        return False

    def _corner_candidates(self):
        if self._corners is None:
            pts = []
            for i in range(len(self.elements)):
                for j in range(i + 1, len(self.elements)):
                    for p in _intersect_elements(self.elements[i], self.elements[j]):
                        pts.append((p, min(i, j)))
            self._corners = pts
        return self._corners

    def nearest_boundary_point(self, p, scale: float):
        """Closest point of the composite boundary to p.

        Candidates are per-element orthogonal/radial projections plus all
        pairwise element intersections (concave corners); only candidates
        actually on the composite boundary (|phi| below tolerance) count.
        Returns (point, bc, tie_flag); ties go to the lowest element index.
        """
        p = np.asarray(p, dtype=float)
        cands = [(el.project(p), i) for i, el in enumerate(self.elements)]
        cands.extend(self._corner_candidates())
        kept = [
            (float(np.hypot(*(p - c))), i, c)
            for c, i in cands
            if abs(float(self.phi(c[0], c[1]))) <= _ONB_TOL * scale
            and self._has_interior_side(c, scale)
        ]
        if not kept:
            raise GeometryError(f"no boundary candidate found near {tuple(p)}")
        d_min = min(d for d, _, _ in kept)
        close = [t for t in kept if t[0] <= d_min + _TIE_TOL * scale]
        close.sort(key=lambda t: (t[1], t[0]))
        d0, i0, c0 = close[0]
        tie = any(
            float(np.hypot(*(c - c0))) > _TIE_TOL * scale for _, _, c in close
        )
        return c0, self.elements[i0].bc, tie


# ---------------------------------------------------------------------------
# classification

def _dilate(mask: np.ndarray, depth: int, axis: int) -> np.ndarray:
    out = mask.copy()
    for s in range(1, depth + 1):
        shifted = np.zeros_like(mask)
        src = [slice(None)] * mask.ndim
        dst = [slice(None)] * mask.ndim
        src[axis] = slice(s, None)
        dst[axis] = slice(None, -s)
        shifted[tuple(dst)] = mask[tuple(src)]
        out |= shifted
        shifted = np.zeros_like(mask)
        src[axis] = slice(None, -s)
        dst[axis] = slice(s, None)
        shifted[tuple(dst)] = mask[tuple(src)]
        out |= shifted
    return out


def classify_nodes(domain: Domain, mesh: Mesh, k: int = 3) -> np.ndarray:
    """NodeClass grid of shape (ny, nx).

    A node is ghost-x when it is exterior but within k index steps of an
    interior node in its mesh row (similarly ghost-y along columns); the
    index-distance test is exactly the along-line distance test for a
    uniform mesh.
    """
    if k < 1:
        raise GeometryError("ghost depth must be >= 1")
    X, Y = np.meshgrid(mesh.xs(), mesh.ys())
    ins = np.asarray(domain.inside(X, Y), dtype=bool).reshape(mesh.ny, mesh.nx)
    if not ins.any():
        raise EmptyDomainError("domain has no interior mesh nodes")
    gx = _dilate(ins, k, axis=1) & ~ins
    gy = _dilate(ins, k, axis=0) & ~ins
    cls = np.zeros((mesh.ny, mesh.nx), dtype=np.int8)
    cls[ins] = NodeClass.INTERIOR
    cls[gx & ~gy] = NodeClass.GHOST_X
    cls[gy & ~gx] = NodeClass.GHOST_Y
    cls[gx & gy] = NodeClass.GHOST_XY
    return cls


# ---------------------------------------------------------------------------
# ghost plans

@dataclass(frozen=True)
class GhostPlan:
    """Frozen per-ghost geometry; all abscissae are already normalized."""

    iy: int
    ix: int
    flat: int
    bc: str
    p: tuple
    p0: tuple
    v: tuple              # p - p0 (outward)
    dist: float
    wall_normal: tuple    # unit outward normal v / dist
    axis: int             # 0: crossings on vertical lines; 1: horizontal
    tie: bool
    delta: float          # spacing of the N_q (and P_q) along the line
    s1: float             # line abscissa of N_1 (P0 at 0, inward positive)
    sten_idx: np.ndarray  # (R+1, R+1) flat node indices of S_q
    sten_xi: np.ndarray   # (R+1,) target abscissa of N_q inside S_q
    direct: np.ndarray    # (R+1,) flat node index when N_q is a node, else -1
    xi_p: float           # abscissa of P in the N-chain stencil coordinates
    xi_mirror: float      # mirror abscissa of P in the N-chain coordinates
    xi_p_dirichlet: float # abscissa of P in the P-chain coordinates
    xi_pq: np.ndarray     # (R,) abscissae of P_1..P_R in the N-chain coords


def _column_window(cls_line: np.ndarray, target: float, n_sten: int):
    """Start index of the best interior window of n_sten nodes on one line.

    target is the fractional node index of N_q on that line.  Prefers the
    window whose center is nearest the target; ties choose the smaller
    start.  Returns None when no interior run is long enough.
    """
    interior = np.flatnonzero(cls_line == NodeClass.INTERIOR)
    if interior.size < n_sten:
        return None
    half = 0.5 * (n_sten - 1)
    best = None
    run_start = interior[0]
    prev = interior[0]
    runs = []
    for j in interior[1:]:
        if j != prev + 1:
            runs.append((run_start, prev))
            run_start = j
        prev = j
    runs.append((run_start, prev))
    for lo, hi in runs:
        if hi - lo + 1 < n_sten:
            continue
        start = int(np.clip(round(target - half), lo, hi - n_sten + 1))
        score = abs(start + half - target)
        if best is None or score < best[0] - 1e-15 or (
            abs(score - best[0]) <= 1e-15 and start < best[1]
        ):
            best = (score, start)
    return None if best is None else best[1]


def build_plans(domain: Domain, mesh: Mesh, classes: np.ndarray,
                n_sten: int) -> list:
    """Ghost plans for every ghost node, in (iy, ix) lexicographic order.

    n_sten = R + 1 is the extrapolation stencil size of the active method.
    """
    R = n_sten - 1
    xs, ys = mesh.xs(), mesh.ys()
    scale = max(mesh.hx, mesh.hy)
    plans = []
    ghost_mask = (classes == NodeClass.GHOST_X) | (classes == NodeClass.GHOST_Y) \
        | (classes == NodeClass.GHOST_XY)
    for iy, ix in zip(*np.nonzero(ghost_mask)):
        iy, ix = int(iy), int(ix)
        p = np.array([xs[ix], ys[iy]])
        p0, bc, tie = domain.nearest_boundary_point(p, scale)
        v = p - p0
        dist = float(np.hypot(v[0], v[1]))
        if dist == 0.0:
            raise GeometryError(
                f"ghost node ({ix},{iy}) lies exactly on the boundary"
            )
        w = -v / dist  # unit inward
        axis = 0 if abs(v[0]) >= abs(v[1]) else 1
        if axis == 0:
            line_pos, line_h, n_lines = xs, mesh.hx, mesh.nx
            perp_pos, perp_h = ys, mesh.hy
            wl, wp = w[0], w[1]
            p0l, p0p = p0[0], p0[1]
        else:
            line_pos, line_h, n_lines = ys, mesh.hy, mesh.ny
            perp_pos, perp_h = xs, mesh.hx
            wl, wp = w[1], w[0]
            p0l, p0p = p0[1], p0[0]

        step = 1 if wl > 0 else -1
        # first crossing index strictly past P0 in the marching direction
        frac = (p0l - line_pos[0]) / line_h
        i0 = math.floor(frac + _SNAP_TOL) + 1 if step == 1 else math.ceil(frac - _SNAP_TOL) - 1
        delta = line_h / abs(wl)

        sten_idx = np.full((n_sten, n_sten), -1, dtype=np.int64)
        sten_xi = np.zeros(n_sten)
        direct = np.full(n_sten, -1, dtype=np.int64)
        s1 = None
        q = 0
        i = i0
        while 0 <= i < n_lines and q < n_sten:
            t = (line_pos[i] - p0l) / wl
            n_perp = p0p + t * wp
            nq = (line_pos[i], n_perp) if axis == 0 else (n_perp, line_pos[i])
            if not bool(domain.inside(nq[0], nq[1])):
                break
            if s1 is None:
                s1 = t
            jq = (n_perp - perp_pos[0]) / perp_h
            jr = int(round(jq))
            line_cls = classes[:, i] if axis == 0 else classes[i, :]
            snapped = (
                0 <= jr < line_cls.size
                and abs(jq - jr) <= _SNAP_TOL
                and line_cls[jr] == NodeClass.INTERIOR
            )
            if snapped:
                direct[q] = mesh.flat(jr, i) if axis == 0 else mesh.flat(i, jr)
                sten_xi[q] = 0.0
            else:
                start = _column_window(line_cls, jq, n_sten)
                if start is None:
                    raise InsufficientStencilError(
                        f"ghost node ({ix},{iy}): no interior stencil of "
                        f"{n_sten} nodes on line {i} (axis {axis})"
                    )
                js = start + np.arange(n_sten)
                sten_idx[q] = mesh.flat(js, i) if axis == 0 else mesh.flat(i, js)
                sten_xi[q] = jq - start
            q += 1
            i += step
        if q < n_sten:
            raise InsufficientStencilError(
                f"ghost node ({ix},{iy}): only {q} interior crossings along "
                f"the normal line, need {n_sten}"
            )

        xi_p = (-dist - s1) / delta
        xi_mirror = (dist - s1) / delta
        xi_p_dirichlet = -dist / delta
        xi_pq = (np.arange(1, R + 1) * delta - s1) / delta

        plans.append(GhostPlan(
            iy=iy, ix=ix, flat=mesh.flat(iy, ix), bc=bc,
            p=tuple(p), p0=tuple(p0), v=tuple(v), dist=dist,
            wall_normal=tuple(v / dist), axis=axis, tie=bool(tie),
            delta=delta, s1=float(s1),
            sten_idx=sten_idx, sten_xi=sten_xi, direct=direct,
            xi_p=float(xi_p), xi_mirror=float(xi_mirror),
            xi_p_dirichlet=float(xi_p_dirichlet), xi_pq=xi_pq,
        ))
    return plans


def dump_plans(plans) -> str:
    """Diagnostic text dump, one line per ghost node; stable ordering."""
    lines = []
    for pl in plans:
        sten = ";".join(
            str(int(pl.direct[q])) if pl.direct[q] >= 0
            else ",".join(map(str, pl.sten_idx[q].tolist()))
            for q in range(pl.direct.size)
        )
        lines.append(
            f"ghost ix={pl.ix} iy={pl.iy} bc={pl.bc} "
            f"P=({pl.p[0]:.17g},{pl.p[1]:.17g}) "
            f"P0=({pl.p0[0]:.17g},{pl.p0[1]:.17g}) "
            f"v=({pl.v[0]:.17g},{pl.v[1]:.17g}) axis={pl.axis} "
            f"delta={pl.delta:.17g} s1={pl.s1:.17g} xi={pl.xi_p:.17g} "
            f"tie={int(pl.tie)} sten=[{sten}]"
        )
    return "\n".join(lines) + "\n"
