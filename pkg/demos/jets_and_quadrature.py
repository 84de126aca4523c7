"""Tour of the two numerical workhorses: Taylor-jet differentiation and
tensor Gauss-Legendre quadrature.

A Taylor jet carries a function value and all partial derivatives up to a
fixed order through arithmetic, so the Laplacian of a network is exact to
rounding -- no graphs, no tapes, no step-size tuning.  The quadrature rules
integrate polynomials of degree 2n-1 exactly and carry their domain measure
in their weights.
"""

import math

import numpy as np
import sympy as sp

from rescert import (AnalyticField, NetworkParams, build_rule, coeff_layout,
                     forward_jets, h_half_surrogate, integrate,
                     sobolev_error)
from rescert.geometry import Disk, Interval, Rectangle
from rescert.jets import laplacian, seed_point, tanh

# -- jets by hand: tanh(x * y) to second order -------------------------------------

x0 = np.array([0.7, -0.3])
a = seed_point(x0, order=2)          # jets of the coordinate functions
u = tanh(a[0] * a[1])                # jet arithmetic composes derivatives

xs, ys = sp.symbols("x y")
expr = sp.tanh(xs * ys)
print("tanh(x*y) at (0.7, -0.3):")
print(f"  value    jet {u.value:+.12f}   sympy {float(expr.subs({xs: 0.7, ys: -0.3})):+.12f}")
dxy = float(sp.diff(expr, xs, ys).subs({xs: 0.7, ys: -0.3}))
print(f"  d2/dxdy  jet {u.d(0, 1):+.12f}   sympy {dxy:+.12f}")

# -- the Laplacian of a whole network, exactly --------------------------------------

params = NetworkParams.xavier((2, 16, 16, 1), seed=0)
X = np.array([[0.25, 0.5], [0.5, 0.5], [0.75, 0.5]])
jets = forward_jets(params, X, order=2, scale=np.ones(2), shift=np.zeros(2))
lay = coeff_layout(2, 2)
lap = jets[:, lay.position((0, 0))] + jets[:, lay.position((1, 1))]
print("\nnetwork Laplacian at three points:", np.array2string(lap, precision=6))

# central differences agree to ~1e-6 (their truncation error, not ours)
h = 1e-4
for k, p in enumerate(X):
    fd = 0.0
    for i in range(2):
        e = np.zeros(2); e[i] = h
        vals = [forward_jets(params, np.array([q]), 0, np.ones(2), np.zeros(2))[0, 0]
                for q in (p + e, p, p - e)]
        fd += (vals[0] - 2 * vals[1] + vals[2]) / h**2
    print(f"  point {k}: jet {lap[k]:+.8f}   finite differences {fd:+.8f}")

# -- quadrature: exactness and measures ----------------------------------------------

rule = build_rule(Interval(0.0, 1.0), "interior", n=5)
print("\nGauss-Legendre n=5 on [0,1], monomial x^9:",
      f"{integrate(rule, lambda x: x[0] ** 9):.12f} (exact 0.1)")

for domain, target, name in [
    (Rectangle((0.0, 0.0), (1.0, 1.0)), "interior", "unit square"),
    (Disk((0.0, 0.0), 1.0), "interior", "unit disk"),
    (Disk((0.0, 0.0), 1.0), "boundary", "unit circle"),
]:
    r = build_rule(domain, target, n=12)
    print(f"sum of weights on the {name}: {float(np.sum(r.weights)):.12f}")

# -- Sobolev norms against a closed form ----------------------------------------------

u = AnalyticField.from_string("sin(pi*x1)*sin(pi*x2)", 2)
square = build_rule(Rectangle((0.0, 0.0), (1.0, 1.0)), "interior", 24)
h2 = sobolev_error(u, None, 2, square)
closed = math.sqrt(0.25 + math.pi**2 / 2 + math.pi**4)
print(f"\nH2 norm of sin(pi x)sin(pi y): quadrature {h2:.12f} closed form {closed:.12f}")

surrogate = h_half_surrogate(u, None, square)
print(f"H^(1/2)-scale surrogate sqrt(||u|| ||u||_H1): {surrogate:.12f}")
