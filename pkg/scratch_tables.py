"""Scratch: validate extrapolation core against Tables 1-4 + counterexample."""
import numpy as np
from bweno.extrapolation import WeightParams, extrapolate, interpolate_poly

T1 = [5.72e-2, 1.18e-2, 7.40e-3, 3.24e-3, 1.51e-3, 7.26e-4, 3.56e-4]
T2 = [3.89e-4, 4.82e-5, 6.01e-6, 7.50e-7, 9.38e-8, 1.17e-8, 1.46e-9]
T3 = [3.97e-2, 2.00e-2, 1.00e-2, 5.00e-3, 2.50e-3, 1.25e-3, 6.25e-4]
T4 = [6.38e-4, 7.99e-5, 1.00e-5, 1.25e-6, 1.56e-7, 1.95e-8, 2.44e-9]


def ex1_values(h):
    x = 1 + (-2.5 + np.arange(6)) * h
    return np.where(x <= 1, x**2, 1 + x**3)

def ex2_values(h):
    x = (-2.5 + np.arange(6)) * h
    return np.where(x <= 0, np.sin(x), 1.0)


def run(name, table, values_fn, xi, exact_fn, method, params, beta_fn=None):
    print(f"--- {name} ({method}) ---")
    errs = []
    for i in range(7):
        h = 0.04 / 2**i
        v = values_fn(h)
        beta = beta_fn(h) if beta_fn else 0.0
        got = extrapolate(v, xi, method, params, beta=beta)
        err = abs(got - exact_fn(h))
        errs.append(err)
        order = np.log2(errs[-2] / err) if i else float("nan")
        rel = abs(err - table[i]) / table[i]
        flag = "OK " if rel < 0.02 else "BAD"
        print(f"h{i}: err={err:.3e} ord={order:5.2f}  table={table[i]:.2e} rel={rel:.1%} {flag}")


p_sw = WeightParams(r=5, r0=2, s1=3, s2=3)
p_iw = WeightParams(r=5, r0=1, d=3)
p_iwb = WeightParams(r=5, r0=1, d=3, beta_mode="fixed-power", beta_scale=1.0)

run("Table 1", T1, ex1_values, 6.0, lambda h: 1 + (1 + 3.5 * h) ** 3, "sw", p_sw)
run("Table 2", T2, ex1_values, 6.0, lambda h: 1 + (1 + 3.5 * h) ** 3, "iw", p_iw)
run("Table 3", T3, ex2_values, -1.0, lambda h: np.sin(-3.5 * h), "iw", p_iw)
run("Table 4", T4, ex2_values, -1.0, lambda h: np.sin(-3.5 * h), "iw", p_iwb,
    beta_fn=lambda h: (1.0 * h ** 1) ** 2)

# counterexample: h=0.2 stencil of ex1-like data
nodes = -0.5 + 0.2 * np.arange(6)
U = np.array([0.25, 0.09, 0.01, 1.0, 1.0, 1.0])
xs = -0.7
xi = (xs - nodes[0]) / 0.2
got_sw = extrapolate(U, xi, "sw", WeightParams(r=5, r0=2, s1=3, s2=3))
quad = interpolate_poly(nodes[:3], U[:3], xs)
print(f"counterexample: sw={got_sw!r} (want 0.25)  quad={quad!r} (want 0.49)")
