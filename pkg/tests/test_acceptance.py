"""End-to-end acceptance checks; each test prints one PASS/FAIL line."""

import math
import time

import numpy as np
from scipy.optimize import brentq

from radshock.evolution import Evolver, Grid1D, property_suite, verify_traveling_wave
from radshock.flux import builtin, parse_flux
from radshock.profile import assemble_profile
from radshock.regularity import scaled_flux, sink_eigenvalues, sink_equilibrium, thresholds
from radshock.shock import ShockTriple, build_chord, shock_speed
from radshock.system import (SystemModel, build_reduction, lift_profile, sign_check,
                             system_speed, translate_admissibility)

BURGERS = builtin("burgers")


def burgers_chord(size):
    return build_chord(BURGERS, ShockTriple(size / 2, -size / 2, 0.0))


def test_burgers_continuity_threshold(verdict):
    t0 = time.perf_counter()
    jumps = {size: assemble_profile(burgers_chord(size), 1.0).jump_magnitude()
             for size in (1.0, 1.3, 1.39, 1.45, 2.0)}
    elapsed = time.perf_counter() - t0
    ok_small = all(jumps[s] < 1e-6 for s in (1.0, 1.3, 1.39))
    ok_large = all(jumps[s] > 1e-3 for s in (1.45, 2.0))
    detail = ", ".join(f"{s}: {j:.3e}" for s, j in jumps.items()) + f"; {elapsed:.2f} s"
    verdict(1, ok_small and ok_large and elapsed < 10, detail)


def test_regularity_thresholds(verdict):
    t0 = time.perf_counter()
    eps = thresholds(burgers_chord(1.0), 4)
    elapsed = time.perf_counter() - t0
    expected = np.array([2 * math.sqrt(2 * n) / (n + 1) for n in range(1, 6)])
    err = float(np.max(np.abs(eps - expected)))
    verdict(2, err <= 1e-12 and elapsed < 1, f"max error {err:.2e}; {elapsed:.3f} s")


def _sink_oracle(a, b, um, up):
    """Root-finder and 2x2 eigen-solver oracle for f = a u^2/2 + b u^3/6."""
    f = lambda u: a * u * u / 2 + b * u ** 3 / 6
    s = (f(um) - f(up)) / (um - up)
    F = lambda u: f(u) - f(um) - s * (u - um)
    F1 = lambda u: a * u + b * u * u / 2 - s
    F2 = lambda u: a + b * u
    c = brentq(F1, up, um, xtol=1e-15, rtol=1e-15)
    e = um - up
    fb, f1, f2, f3 = F(c) / e ** 2, F1(c) / e, F2(c), b * e
    e2 = e * e
    vertex = -1 / (2 * e2 * f2)
    q = lambda v: e2 * f2 * v * v + v - fb
    v2 = brentq(q, vertex, 0.0, xtol=1e-16, rtol=1e-15)
    J = np.array([[f2 * v2, f1],
                  [(f1 - e2 * f3 * v2 * v2) / e2, (-1 - 2 * e2 * f2 * v2) / e2]])
    return (c - up) / e, v2, np.sort(np.linalg.eigvals(J).real)


def test_equilibrium_and_eigenvalues(verdict):
    rng = np.random.default_rng(20240601)
    t0 = time.perf_counter()
    worst, cases = 0.0, 0
    while cases < 20:
        a, b = rng.uniform(0.5, 2.0), rng.uniform(-0.5, 0.5)
        up = rng.uniform(-1, 0.5)
        um = up + rng.uniform(0.1, 1.5)
        if min(a + b * up, a + b * um) <= 0.1:
            continue
        f = parse_flux(f"{a!r}*u^2/2 + {b!r}*u^3/6")
        sf = scaled_flux(build_chord(f, shock_speed(f, um, up)))
        e2 = sf.size ** 2
        D = 1 - 4 * e2 * float(sf.deriv(sf.u_bar, 2)) * abs(float(sf(sf.u_bar)))
        if D <= 0.05:
            continue  # keep eps below eps_0
        ub, v2 = sink_equilibrium(sf)
        lam = np.sort(sink_eigenvalues(sf))
        ub_o, v2_o, lam_o = _sink_oracle(a, b, um, up)
        worst = max(worst, abs(ub - ub_o), abs(v2 - v2_o), float(np.max(np.abs(lam - lam_o))))
        cases += 1
    elapsed = time.perf_counter() - t0
    verdict(3, worst <= 1e-10 and elapsed < 5, f"{cases} cases, max error {worst:.2e}; "
                                                f"{elapsed:.2f} s")


def test_jump_admissibility(verdict):
    t0 = time.perf_counter()
    suite = []
    for expr in ("u^2/2", "u^2/2 + u^3/6", "exp(u)", "u^4/4 + u^2"):
        f = parse_flux(expr)
        for size in (1.0, 2.0, 3.0):
            for eps in (0.3, 1.0):
                suite.append((f, size / 2, -size / 2, eps))
    quartic = builtin("quartic")
    for um, eps in ((2.0, 0.1), (2.0, 0.05), (2.5, 0.1), (1.8, 0.2)):
        suite.append((quartic, um, -um, eps))
    count, worst_rh, worst_margin = 0, 0.0, math.inf
    for f, um, up, eps in suite:
        p = assemble_profile(build_chord(f, shock_speed(f, um, up)), eps)
        for j in p.jumps:
            count += 1
            worst_rh = max(worst_rh, j.rh_residual)
            worst_margin = min(worst_margin, j.oleinik_margin)
    elapsed = time.perf_counter() - t0
    ok = count > 0 and worst_rh < 1e-8 and worst_margin > 0 and elapsed < 30
    verdict(4, ok, f"{count} jumps in {len(suite)} profiles, max RH {worst_rh:.2e}, "
                   f"min margin {worst_margin:.3e}; {elapsed:.2f} s")


def test_nonconvex_jump_count(verdict):
    f = builtin("quartic")
    chord = build_chord(f, shock_speed(f, 2.0, -2.0))
    a = assemble_profile(chord, 0.1, rtol=1e-12)
    b = assemble_profile(chord, 0.1, rtol=1e-10)
    ok = len(a.jumps) == 2 and len(b.jumps) == 2
    interior = True
    for j in a.jumps:
        upper, lower = chord.branch_of(j.u_left), chord.branch_of(j.u_right)
        bl, br = chord.branches[upper], chord.branches[lower]
        interior &= (upper == lower + 1 and lower % 2 == 0
                     and bl.lo < j.u_left < bl.hi and br.lo < j.u_right < br.hi)
    gap = max(max(abs(x.u_left - y.u_left), abs(x.u_right - y.u_right))
              for x, y in zip(a.jumps, b.jumps)) if ok else math.inf
    # the jump separation is shift invariant
    sep = abs((a.jumps[1].xi0 - a.jumps[0].xi0) - (b.jumps[1].xi0 - b.jumps[0].xi0)) if ok else math.inf
    verdict(5, ok and interior and gap <= 1e-6 and sep <= 1e-6,
            f"{len(a.jumps)} jumps, interior {interior}, value gap {gap:.2e}, "
            f"separation gap {sep:.2e}")


def _decoupled():
    sysm = SystemModel(parse_flux("u1^2/2; 3*u2", dimension=2), np.array([1.0, 0.0]),
                       np.array([1.0, 0.0]))
    return build_reduction(sysm, ShockTriple(np.array([2.0, 0.3]), np.array([-2.0, 0.3]),
                                             0.0), 1)


def _coupled(size=0.1, eps=1.0):
    sysm = SystemModel(parse_flux("u1^2/2 + u2^2/2; u1*u2", dimension=2),
                       np.array([1.0, 0.0]), np.array([1.0, 0.0]), 1.0, eps)
    um = np.array([1.0, 0.2])
    up = um - size * np.array([1.0, 1.0]) / math.sqrt(2)
    return build_reduction(sysm, system_speed(sysm, um, up), 2)


def test_system_reduction_oracles(verdict, oracles):
    t0 = time.perf_counter()
    dec = _decoupled()
    w = np.linspace(-2.4, 2.4, 97)
    chord_err = float(np.max(np.abs(dec.F_hat(w) - (w * w / 2 - 2.0))))
    ref = oracles["coupled_reduction"]
    cm = _coupled(ref["size"])
    grid_err = float(np.max(np.abs(cm.phi(np.array(ref["w"])).T - np.array(ref["phi"]))))
    residual = 0.0
    for m in (dec, cm):
        prof = assemble_profile(m.scalar_chord(), m.scalar_epsilon)
        residual = max(residual, *lift_profile(m, prof).residuals)
    elapsed = time.perf_counter() - t0
    ok = chord_err <= 1e-12 and grid_err <= 1e-6 and residual < 1e-6 and elapsed < 60
    verdict(6, ok, f"chord error {chord_err:.2e}, grid oracle {grid_err:.2e}, "
                   f"profile residual {residual:.2e}; {elapsed:.2f} s")


def test_admissibility_translation(verdict):
    mismatches, samples, lax_ok, inner = 0, 0, True, 0
    # strong coupling gives the coupled example an inner jump too
    for m in (_decoupled(), _coupled(), _coupled(eps=1000.0)):
        lo, hi = sorted((m.w_minus, m.w_plus))
        for w in np.linspace(lo, hi, 52)[1:-1]:
            a, b = sign_check(m, m.phi(w))
            samples += 1
            mismatches += int(np.sign(a) != np.sign(b))
        lifted = lift_profile(m, assemble_profile(m.scalar_chord(), m.scalar_epsilon))
        for _, ul, ur in lifted.jumps:
            inner += 1
            lax_ok &= translate_admissibility(m, (ul, ur, m.s)).lax
    verdict(7, mismatches == 0 and lax_ok,
            f"{samples - mismatches}/{samples} sign matches, Lax at {inner} inner jumps "
            f"{'holds' if lax_ok else 'fails'}")


def test_traveling_wave_steadiness(verdict):
    t0 = time.perf_counter()
    prof = assemble_profile(burgers_chord(1.0), 1.0)
    coarse = verify_traveling_wave(prof, 10.0, M=4096)
    fine = verify_traveling_wave(prof, 10.0, M=8192)
    elapsed = time.perf_counter() - t0
    ratio = fine.drift / coarse.drift
    ok = (coarse.drift <= 5e-3 and coarse.speed_error <= 5e-3
          and 0.4 <= ratio <= 0.6 and elapsed < 120)
    verdict(8, ok, f"drift {coarse.drift:.3e} -> {fine.drift:.3e} (ratio {ratio:.3f}), "
                   f"speed error {coarse.speed_error:.1e}; {elapsed:.1f} s")


def test_structural_properties(verdict):
    rng = np.random.default_rng(7)
    worst_inc = worst_order = worst_mono = worst_mass = 0.0
    for _ in range(20):
        eps = float(rng.uniform(0.2, 2.0))
        # periodic pair with v0 >= u0: contraction, ordering, mass
        M = 100
        g = Grid1D(0.0, 10.0, M, "periodic")
        u0 = rng.uniform(-1, 1, M)
        v0 = u0 + rng.uniform(0, 0.5, M)
        rep = property_suite(Evolver(BURGERS, g, eps, lf_speed=2.0), u0, v0, steps=10_000)
        worst_inc = max(worst_inc, rep.max_l1_increase)
        worst_order = max(worst_order, rep.order_violation)
        worst_mass = max(worst_mass, rep.mass_drift)
        # monotone outflow pair
        go = Grid1D(-10.0, 10.0, M, "outflow", 1.0, -1.0)
        m0 = np.sort(rng.uniform(-1, 1, M))[::-1]
        m1 = np.minimum(m0 + rng.uniform(0, 0.5, M), 1.0)
        rep = property_suite(Evolver(BURGERS, go, eps, lf_speed=2.0), m0, m1, steps=500)
        worst_inc = max(worst_inc, rep.max_l1_increase)
        worst_order = max(worst_order, rep.order_violation)
        worst_mono = max(worst_mono, rep.monotone_violation)
    ok = worst_inc <= 1e-10 and worst_order <= 1e-12 and worst_mono <= 1e-12 and worst_mass <= 1e-12
    verdict(9, ok, f"max L1 increase/step {worst_inc:.1e}, order {worst_order:.1e}, "
                   f"monotone {worst_mono:.1e}, mass drift {worst_mass:.1e}")
