"""Experiment drivers: convergence tables, simulations, demos, schlieren.

Everything here is config-driven plumbing around the solver: run a ladder
of meshes and emit an error/order CSV, run one simulation and dump
snapshots, reproduce the pointwise extrapolation demo tables, and render
a density field to a grayscale PGM.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass

import numpy as np

from . import config as cfgs
from . import solver
from .extrapolation import WeightParams, extrapolate, interpolate_poly


# ---------------------------------------------------------------------------
# error norms and order tables

def error_norms(U, exact, interior):
    """(L1, Linf) of U - exact over the interior nodes; L1 is mean-abs."""
    d = np.abs((np.asarray(U, dtype=float) - np.asarray(exact, dtype=float)))
    d = d[interior]
    return float(d.mean()), float(d.max())


@dataclass
class ConvergenceRow:
    n: int
    err_l1: float
    ord_l1: float | None
    err_linf: float
    ord_linf: float | None


def convergence_csv(rows, aborted: bool = False) -> str:
    lines = ["n,err_l1,ord_l1,err_linf,ord_linf"]
    for r in rows:
        o1 = "" if r.ord_l1 is None else format(r.ord_l1, ".12g")
        oo = "" if r.ord_linf is None else format(r.ord_linf, ".12g")
        lines.append(f"{r.n},{r.err_l1!r},{o1},{r.err_linf!r},{oo}")
    if aborted:
        lines.append("# aborted: blow-up, table is partial")
    return "\n".join(lines) + "\n"


@dataclass
class ConvergenceResult:
    id: str
    status: str            # "done" or "blowup"
    rows: list
    csv: str
    path: str | None


def run_convergence(cfg, out_dir=None, echo=None) -> ConvergenceResult:
    """One row per resolution; errors against the model's exact solution."""
    model = cfgs.build_model(cfg["model"])
    domain = cfgs.build_domain(cfg["domain"])
    params = cfgs.build_weights(cfg)
    t_end = float(cfg["t_end"])
    dtc = cfg.get("dt", {"mode": "order-study"})
    x0, x1, _, _ = cfgs.mesh_extent(cfg)
    if hasattr(model, "prepare_trace") and t_end > 0.5:
        model.prepare_trace(t_end)
    rows = []
    status = "done"
    for n in cfg["resolutions"]:
        mesh = cfgs.build_mesh(cfg, n=n)
        ws = solver.make_workspace(
            model, domain, mesh, cfg["method"], params,
            reflect_mode=cfg.get("reflect", "negate"),
        )
        res = solver.run(
            ws, t_end=t_end, dt_mode=dtc["mode"], cfl=dtc.get("cfl", 0.5),
            length=x1 - x0, n=n,
        )
        if res.status != "done":
            status = "blowup"
            if echo:
                echo(f"n={n}: blow-up at t={res.t:.6g} after {res.steps} steps")
            break
        X, Y = np.meshgrid(mesh.xs(), mesh.ys())
        exact = model.exact(X, Y, t_end)
        e1, einf = error_norms(res.U, exact, ws.interior)
        o1 = math.log2(rows[-1].err_l1 / e1) if rows else None
        oo = math.log2(rows[-1].err_linf / einf) if rows else None
        rows.append(ConvergenceRow(n, e1, o1, einf, oo))
        if echo:
            echo(f"n={n}: L1 {e1:.3e} ({'-' if o1 is None else format(o1, '.2f')})  "
                 f"Linf {einf:.3e} ({'-' if oo is None else format(oo, '.2f')})")
    csv = convergence_csv(rows, aborted=status != "done")
    path = None
    if out_dir is not None:
        path = os.path.join(out_dir, cfg.get("output", cfg["id"] + ".csv"))
        with open(path, "w") as f:
            f.write(csv)
    return ConvergenceResult(cfg["id"], status, rows, csv, path)


# ---------------------------------------------------------------------------
# single runs with snapshot dumps

def _fmt_time(t: float) -> str:
    return format(float(t), "g").replace("-", "m").replace(".", "p")


def write_snapshot_1d(path, mesh, interior, U, fields):
    xs = np.broadcast_to(mesh.xs(), interior.shape)[interior]
    vals = U[interior]
    with open(path, "w") as f:
        f.write("x," + ",".join(fields) + "\n")
        for x, row in zip(xs, vals):
            f.write(",".join(repr(float(v)) for v in (x, *row)) + "\n")


def write_field_2d(path, mesh, interior, grid, t):
    """ASCII grid dump: header nx ny hx hy t, then row-major values.

    Non-interior nodes are written as nan so downstream tools can mask
    the exterior without knowing the geometry.
    """
    with open(path, "w") as f:
        f.write(f"{mesh.nx} {mesh.ny} {mesh.hx!r} {mesh.hy!r} {float(t)!r}\n")
        for iy in range(mesh.ny):
            row = np.where(interior[iy], grid[iy], np.nan)
            f.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_field(path):
    """Inverse of write_field_2d: returns (grid, hx, hy, t)."""
    with open(path) as f:
        head = f.readline().split()
        if len(head) != 5:
            raise ValueError(f"{path}: expected 'nx ny hx hy t' header")
        nx, ny = int(head[0]), int(head[1])
        hx, hy, t = float(head[2]), float(head[3]), float(head[4])
        data = np.loadtxt(f, ndmin=2)
    if data.shape != (ny, nx):
        raise ValueError(f"{path}: body is {data.shape}, header says {(ny, nx)}")
    return data, hx, hy, t


@dataclass
class SimulationResult:
    id: str
    status: str
    t: float
    steps: int
    wall_time: float
    field_min: dict
    field_max: dict
    files: list
    U: np.ndarray
    workspace: object


def run_simulation(cfg, out_dir=None, echo=None) -> SimulationResult:
    model = cfgs.build_model(cfg["model"])
    domain = cfgs.build_domain(cfg["domain"])
    params = cfgs.build_weights(cfg)
    t_end = float(cfg["t_end"])
    dtc = cfg.get("dt", {"mode": "cfl"})
    x0, x1, _, _ = cfgs.mesh_extent(cfg)
    spec = cfg["mesh"]
    n = spec.get("n")
    mesh = cfgs.build_mesh(cfg, n=n, h=spec.get("h"))
    if n is None:
        n = round((x1 - x0) / mesh.hx)
    if hasattr(model, "prepare_trace") and t_end > 0.5:
        model.prepare_trace(t_end)
    ws = solver.make_workspace(
        model, domain, mesh, cfg["method"], params,
        reflect_mode=cfg.get("reflect", "negate"),
    )
    wanted = sorted({float(s) for s in cfg.get("snapshot_times", []) if s < t_end})
    start = time.perf_counter()
    res = solver.run(
        ws, t_end=t_end, dt_mode=dtc["mode"], cfl=dtc.get("cfl", 0.5),
        length=x1 - x0, n=n, snapshot_times=wanted,
    )
    wall = time.perf_counter() - start
    if echo:
        echo(f"{cfg['id']}: {res.status} at t={res.t:.6g}, {res.steps} steps, "
             f"{wall:.1f}s")

    fields = model.fields
    interior = ws.interior
    vmin = {f: float(res.U[interior][:, k].min()) for k, f in enumerate(fields)}
    vmax = {f: float(res.U[interior][:, k].max()) for k, f in enumerate(fields)}
    files = []
    if out_dir is not None:
        snaps = res.snapshots + [(res.t, res.U)]
        for t, U in snaps:
            tag = f"{cfg['id']}_t{_fmt_time(t)}"
            if model.dim == 1:
                path = os.path.join(out_dir, tag + ".csv")
                write_snapshot_1d(path, mesh, interior, U, fields)
                files.append(path)
            else:
                for k, f in enumerate(fields):
                    path = os.path.join(out_dir, f"{tag}_{f}.dat")
                    write_field_2d(path, mesh, interior, U[..., k], t)
                    files.append(path)
        summary = {
            "id": cfg["id"], "status": res.status, "t": res.t,
            "steps": res.steps, "wall_time": wall,
            "min": vmin, "max": vmax, "files": [os.path.basename(p) for p in files],
        }
        spath = os.path.join(out_dir, cfg["id"] + "_summary.json")
        with open(spath, "w") as f:
            json.dump(summary, f, indent=2)
            f.write("\n")
        files.append(spath)
    return SimulationResult(cfg["id"], res.status, res.t, res.steps, wall,
                            vmin, vmax, files, res.U, ws)


# ---------------------------------------------------------------------------
# schlieren rendering

def gradient_magnitude(field, hx, hy):
    """|grad| by central differences, one-sided against missing neighbours.

    nan cells mark the exterior; they stay nan in the result and never
    contribute to a neighbour's stencil.
    """
    f = np.asarray(field, dtype=float)
    if f.ndim != 2:
        raise ValueError("schlieren needs a 2D field")
    out = np.full(f.shape, np.nan)
    ok = np.isfinite(f)

    def axis_deriv(h, shift):
        lo = np.full(f.shape, np.nan)
        hi = np.full(f.shape, np.nan)
        if shift == 0:   # x: neighbours along columns
            lo[:, 1:] = f[:, :-1]
            hi[:, :-1] = f[:, 1:]
        else:            # y: neighbours along rows
            lo[1:, :] = f[:-1, :]
            hi[:-1, :] = f[1:, :]
        has_lo = np.isfinite(lo)
        has_hi = np.isfinite(hi)
        d = np.zeros(f.shape)
        both = has_lo & has_hi
        d[both] = (hi[both] - lo[both]) / (2.0 * h)
        fwd = has_hi & ~has_lo
        d[fwd] = (hi[fwd] - f[fwd]) / h
        bwd = has_lo & ~has_hi
        d[bwd] = (f[bwd] - lo[bwd]) / h
        return d

    gx = axis_deriv(hx, 0)
    gy = axis_deriv(hy, 1)
    out[ok] = np.hypot(gx, gy)[ok]
    return out


def render_schlieren(field, hx, hy, alpha: float = 15.0) -> np.ndarray:
    """uint8 image: exp(-alpha |grad rho| / max) * 255, exterior white."""
    g = gradient_magnitude(field, hx, hy)
    img = np.full(g.shape, 255, dtype=np.uint8)
    ok = np.isfinite(g)
    if ok.any():
        gmax = float(g[ok].max())
        if gmax > 0.0:
            vals = np.exp(-alpha * g[ok] / gmax) * 255.0
            img[ok] = np.rint(vals).astype(np.uint8)
    return img


def write_pgm(img: np.ndarray, path) -> None:
    """Binary P5 with maxval 255; row 0 of the array is the bottom row."""
    img = np.asarray(img, dtype=np.uint8)
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(img[::-1].tobytes())


def schlieren_file(field_path, out_path, alpha: float = 15.0) -> None:
    grid, hx, hy, _ = read_field(field_path)
    write_pgm(render_schlieren(grid, hx, hy, alpha), out_path)


# ---------------------------------------------------------------------------
# pointwise extrapolation demos

DEMO_IDS = (
    "example1-sw",
    "example1-iw",
    "example2-iw",
    "example2-iw-beta",
    "sw-counterexample",
)

_DEMO_LEVELS = 7


def _jump_cubic(h):
    """x^2 below the break at x=1, 1+x^3 above; nodes at 1 + (j-2.5)h."""
    x = 1.0 + (np.arange(6) - 2.5) * h
    return np.where(x <= 1.0, x * x, 1.0 + x ** 3)


def _sine_step(h):
    """sin(x) below the break at x=0, constant 1 above; nodes (j-2.5)h."""
    x = (np.arange(6) - 2.5) * h
    return np.where(x <= 0.0, np.sin(x), 1.0)


@dataclass
class DemoResult:
    id: str
    rows: list | None      # [(h, err, order-or-None)] for the table demos
    values: dict | None    # counterexample: extrapolated value per method


def _demo_table(values_fn, xi, exact_fn, method, params):
    rows = []
    for i in range(_DEMO_LEVELS):
        h = 0.04 / 2 ** i
        beta = 0.0
        if params.beta_mode == "fixed-power":
            beta = (params.beta_scale * h ** params.r0) ** 2
        got = extrapolate(values_fn(h), xi, method, params, beta=beta)
        err = abs(got - exact_fn(h))
        order = math.log2(rows[-1][1] / err) if rows else None
        rows.append((h, err, order))
    return rows


def extrapolation_demo(example_id: str) -> DemoResult:
    if example_id == "example1-sw":
        rows = _demo_table(_jump_cubic, 6.0, lambda h: 1.0 + (1.0 + 3.5 * h) ** 3,
                           "sw", WeightParams(r=5, r0=2, s1=3, s2=3))
    elif example_id == "example1-iw":
        rows = _demo_table(_jump_cubic, 6.0, lambda h: 1.0 + (1.0 + 3.5 * h) ** 3,
                           "iw", WeightParams(r=5, r0=1, d=3))
    elif example_id == "example2-iw":
        rows = _demo_table(_sine_step, -1.0, lambda h: math.sin(-3.5 * h),
                           "iw", WeightParams(r=5, r0=1, d=3))
    elif example_id == "example2-iw-beta":
        rows = _demo_table(_sine_step, -1.0, lambda h: math.sin(-3.5 * h),
                           "iw", WeightParams(r=5, r0=1, d=3,
                                              beta_mode="fixed-power", beta_scale=1.0))
    elif example_id == "sw-counterexample":
        # quadratic data left of a jump, sampled so every smoothness
        # indicator ties; the safe answer is the last node value 0.25,
        # the quadratic continuation gives 0.49
        nodes = -0.5 + 0.2 * np.arange(6)
        vals = np.array([0.25, 0.09, 0.01, 1.0, 1.0, 1.0])
        xs = -0.7
        xi = (xs - nodes[0]) / 0.2
        got = extrapolate(vals, xi, "sw", WeightParams(r=5, r0=2, s1=3, s2=3))
        quad = interpolate_poly(nodes[:3], vals[:3], xs)
        return DemoResult(example_id, None, {"sw": float(got), "quadratic": float(quad)})
    else:
        raise ValueError(f"unknown demo {example_id!r}; choose from {DEMO_IDS}")
    return DemoResult(example_id, rows, None)


def format_demo(result: DemoResult) -> str:
    if result.values is not None:
        lines = [f"{k}: {v!r}" for k, v in result.values.items()]
        return "\n".join(lines) + "\n"
    lines = [f"{'h':>12}  {'error':>12}  {'order':>6}"]
    for h, err, order in result.rows:
        o = "-" if order is None else format(order, ".2f")
        lines.append(f"{h:>12.6f}  {err:>12.3e}  {o:>6}")
    return "\n".join(lines) + "\n"


def demo_csv(result: DemoResult) -> str:
    if result.values is not None:
        lines = ["case,value"]
        lines += [f"{k},{v!r}" for k, v in result.values.items()]
    else:
        lines = ["h,err,ord"]
        for h, err, order in result.rows:
            o = "" if order is None else format(order, ".12g")
            lines.append(f"{h!r},{err!r},{o}")
    return "\n".join(lines) + "\n"
