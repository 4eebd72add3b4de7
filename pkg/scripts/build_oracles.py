"""Compute the frozen reference values used by the test suite.

Each value comes from a method that shares no code with the package:

* Burgers jump sizes: the right tail written as ``dz/du`` and integrated
  with a 30-digit Taylor-series ODE solver, then the zero of ``z`` located.
* Reduction map of the symmetric coupled example: brute-force minimization
  of the constraint residual on a 2-d grid, polished by least squares.

Run once; the output is checked in as ``tests/data/oracles.json``.
"""

import json
import math
import os

import mpmath as mp
import numpy as np
from scipy.optimize import least_squares

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "tests", "data", "oracles.json")

BURGERS_SIZES = (1.0, 1.3, 1.39, 1.45, 1.5, 2.0)


def burgers_jump(size, eps=1, scan=400):
    """Jump ``u_l - u_r`` of the Burgers profile with ``u_pm = -+size/2``."""
    mp.mp.dps = 30
    a = mp.mpf(size) / 2
    slope = (1 + mp.sqrt(1 + 4 * eps * a * a)) / 2
    d = mp.mpf("1e-12")
    u0, z0 = -a + d, -a + slope * d

    def rhs(u, z):
        return eps * u * (u * u - a * a) / 2 / (z - u)

    sol = mp.odefun(rhs, u0, z0)
    prev = u0
    for i in range(1, scan + 1):
        u = u0 - u0 * mp.mpf(i) / scan * (1 - mp.mpf("1e-9"))
        if sol(u) >= 0:
            ur = mp.findroot(sol, (prev, u), solver="anderson")
            return float(2 * abs(ur))
        prev = u
    return 0.0


def coupled_example(size=0.1):
    um = np.array([1.0, 0.2])
    up = um - size * np.array([1.0, 1.0]) / math.sqrt(2)

    def f(u):
        return np.array([u[0] ** 2 / 2 + u[1] ** 2 / 2, u[0] * u[1]])

    du = up - um
    s = float((f(up) - f(um)) @ du / (du @ du))
    return um, up, s, f


def reduction_grid(size=0.1, points=11, grid=801):
    um, up, s, f = coupled_example(size)
    L = np.array([1.0, 0.0])
    G = np.array([1.0, 0.0])
    P = np.eye(2) - np.outer(L, L) / (L @ L)

    def residual(u, w):
        chord = f(u) - f(um) - s * (u - um)
        return np.concatenate([P @ chord, [G @ u - w]])

    lo = np.minimum(um, up) - 0.05
    hi = np.maximum(um, up) + 0.05
    U1, U2 = np.meshgrid(np.linspace(lo[0], hi[0], grid), np.linspace(lo[1], hi[1], grid),
                         indexing="ij")
    ws = np.linspace(G @ up, G @ um, points)
    out = []
    for w in ws:
        c2 = U1 * U2 - um[0] * um[1] - s * (U2 - um[1])
        r = np.hypot(c2, U1 - w)
        i, j = np.unravel_index(np.argmin(r), r.shape)
        start = np.array([U1[i, j], U2[i, j]])
        fit = least_squares(residual, start, args=(w,), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        out.append(fit.x.tolist())
    return {"size": size, "s": s, "u_minus": um.tolist(), "u_plus": up.tolist(),
            "w": ws.tolist(), "phi": out}


def main():
    data = {
        "burgers_jumps": {repr(s): burgers_jump(s) for s in BURGERS_SIZES},
        "coupled_reduction": reduction_grid(),
    }
    with open(OUT, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")
    print(json.dumps(data["burgers_jumps"], indent=2))


if __name__ == "__main__":
    main()
