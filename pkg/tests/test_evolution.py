import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from radshock.errors import NumericalError
from radshock.evolution import (Evolver, FieldState, Grid1D, RadiationKernel, property_suite,
                                solve_elliptic, verify_traveling_wave, write_snapshots)
from radshock.flux import builtin
from radshock.profile import assemble_profile
from radshock.shock import build_chord, shock_speed

BURGERS = builtin("burgers")


def test_grid():
    g = Grid1D(-1.0, 3.0, 8)
    assert g.dx * g.M == pytest.approx(4.0)
    assert g.centers[0] == pytest.approx(-0.75)


@pytest.mark.parametrize("eps,dx", [(1.0, 0.05), (0.1, 0.01), (2.0, 0.3)])
def test_kernel_weights(eps, dx):
    k = RadiationKernel(eps, dx)
    assert np.all(k.weights > 0)
    assert abs(math.fsum(k.weights) - 1.0) <= 1e-14
    assert k.half_width * dx >= 40 * math.sqrt(eps)


def test_elliptic_constant_field():
    g = Grid1D(0, 1, 64, "periodic")
    np.testing.assert_allclose(solve_elliptic(g, np.full(64, 3.0), 0.5), 0.0, atol=1e-14)


def test_elliptic_single_mode():
    M, eps = 256, 0.7
    g = Grid1D(0, 2 * math.pi, M, "periodic")
    x = g.centers
    q = solve_elliptic(g, np.sin(3 * x), eps)
    np.testing.assert_allclose(q, -3 * np.cos(3 * x) / (1 + eps * 9), atol=5e-3)
    # exact discrete symbol of the centered scheme
    h = g.dx
    d1 = math.sin(3 * h) / h
    d2 = 4 * math.sin(1.5 * h) ** 2 / h ** 2
    np.testing.assert_allclose(q, -d1 * np.cos(3 * x) / (1 + eps * d2), atol=1e-12)
    # dense solve of the same discrete system
    A = np.eye(M) * (1 + 2 * eps / h ** 2)
    for i in range(M):
        A[i, (i + 1) % M] = A[i, (i - 1) % M] = -eps / h ** 2
    rhs = -(np.roll(np.sin(3 * x), -1) - np.roll(np.sin(3 * x), 1)) / (2 * h)
    np.testing.assert_allclose(q, np.linalg.solve(A, rhs), atol=1e-12)


def test_elliptic_small_eps_limit():
    g = Grid1D(-5, 5, 400, "outflow")
    x = g.centers
    w = np.tanh(x)
    q = solve_elliptic(g, w, 1e-6)
    grad = np.gradient(w, g.dx)
    assert np.max(np.abs(q[5:-5] + grad[5:-5])) < 1e-3


def test_constant_state_unchanged():
    for form in ("kernel", "elliptic"):
        g = Grid1D(-5, 5, 100, "outflow", 0.7, 0.7)
        ev = Evolver(BURGERS, g, 1.0, form)
        st0 = FieldState(np.full(100, 0.7))
        out = ev.run(st0, 1.0)
        assert np.max(np.abs(out.u - 0.7)) <= 1e-15


def test_cfl_violation():
    g = Grid1D(-1, 1, 100, "periodic")
    ev = Evolver(BURGERS, g, 1.0)
    u = np.ones(100)
    with pytest.raises(NumericalError, match="CFL"):
        ev.step(FieldState(u), 0.5 * g.dx / 1.0 * 2)
    ev2 = Evolver(BURGERS, g, 0.001)
    with pytest.raises(NumericalError, match="CFL"):
        ev2.step(FieldState(0.0 * u), 0.001)


def test_riemann_front_speed():
    g = Grid1D(-20, 20, 800, "outflow", 1.0, -1.0)
    x = g.centers
    ev = Evolver(BURGERS, g, 1.0)
    out = ev.run(FieldState(np.where(x < 0, 1.0, -1.0)), 5.0)
    i = np.flatnonzero(np.diff(np.sign(out.u)))[0]
    front = x[i] + g.dx * out.u[i] / (out.u[i] - out.u[i + 1])
    assert abs(front / 5.0) <= 2 * g.dx

    g2 = Grid1D(-20, 30, 1000, "outflow", 2.0, 0.0)
    x2 = g2.centers
    out = Evolver(BURGERS, g2, 1.0).run(FieldState(np.where(x2 < 0, 2.0, 0.0)), 5.0)
    i = np.flatnonzero(np.diff(np.sign(out.u - 1.0)))[0]
    front = x2[i] + g2.dx * (out.u[i] - 1) / (out.u[i] - out.u[i + 1])
    assert abs(front / 5.0 - 1.0) <= 0.1


def test_mass_conservation_periodic():
    rng = np.random.default_rng(2)
    g = Grid1D(0, 10, 200, "periodic")
    ev = Evolver(BURGERS, g, 0.5, lf_speed=2.0)
    u0 = rng.uniform(-1, 1, 200)
    rep = property_suite(ev, u0, u0.copy(), steps=1000)
    assert rep.mass_drift <= 1e-12
    assert np.all(rep.l1 == 0.0)


def test_elliptic_form_conserves_mass():
    rng = np.random.default_rng(5)
    g = Grid1D(0, 10, 200, "periodic")
    ev = Evolver(BURGERS, g, 0.5, "elliptic", lf_speed=2.0)
    u0 = rng.uniform(-1, 1, 200)
    rep = property_suite(ev, u0, u0 + 0.1, steps=500)
    assert rep.mass_drift <= 1e-12
    assert rep.max_l1_increase <= 1e-10


def test_kernel_and_elliptic_forms_agree():
    errs = []
    for M in (200, 400):
        g = Grid1D(0, 20, M, "periodic")
        x = g.centers
        u0 = 0.5 * np.sin(2 * math.pi * x / 20) + 0.2
        dt = 0.4 * g.dx
        a = Evolver(BURGERS, g, 1.0, "kernel", lf_speed=1.0).run(FieldState(u0), 1.0, dt)
        b = Evolver(BURGERS, g, 1.0, "elliptic", lf_speed=1.0).run(FieldState(u0), 1.0, dt)
        errs.append(np.max(np.abs(a.u - b.u)))
    assert errs[1] < errs[0] / 3


def test_vector_elliptic_step():
    from radshock.flux import parse_flux
    f = parse_flux("u1^2/2 + u2^2/2; u1*u2", dimension=2)
    g = Grid1D(-10, 10, 200, "outflow", np.array([1.0, 0.2]), np.array([1.0, 0.2]))
    ev = Evolver(f, g, 0.5, "elliptic", L=np.array([1.0, 0.0]), G=np.array([1.0, 0.0]))
    u = np.tile(np.array([[1.0], [0.2]]), (1, 200))
    out = ev.run(FieldState(u), 0.5)
    np.testing.assert_allclose(out.u, u, atol=1e-15)


def test_constant_wave_exact():
    ch_f = builtin("burgers")

    class Flat:
        s = 0.0
        u_minus = u_plus = 0.25
        epsilon = 1.0

        @staticmethod
        def evaluate(x):
            return {"u": np.full(np.shape(x), 0.25)}

    rep = verify_traveling_wave(Flat(), 2.0, M=256, flux=ch_f)
    assert rep.drift <= 1e-14


@pytest.fixture(scope="module")
def burgers_unit():
    f = builtin("burgers")
    return assemble_profile(build_chord(f, shock_speed(f, 0.5, -0.5)), 1.0)


def test_traveling_wave_drift(burgers_unit):
    rep = verify_traveling_wave(burgers_unit, 10.0, M=4096)
    assert rep.drift <= 5e-3
    assert rep.speed_error <= 5e-3


def test_quartic_jumps_advect():
    f = builtin("quartic")
    p = assemble_profile(build_chord(f, shock_speed(f, 2.0, -2.0)), 0.1)
    rep = verify_traveling_wave(p, 1.0, M=4000, a=-10, b=10)
    assert abs(rep.shift) <= 3 * rep.dx
    assert rep.speed_error <= 3 * rep.dx


def test_snapshot_export(tmp_path):
    g = Grid1D(0, 1, 4, "periodic")
    path = tmp_path / "snap.csv"
    write_snapshots(path, g, [FieldState(np.arange(4.0)), FieldState(np.ones(4), 0.5)])
    lines = path.read_text().splitlines()
    assert lines[0] == "t,x,u,q" and len(lines) == 9
    assert lines[5].startswith("0.5,0.125,1,")


@settings(max_examples=15)
@given(st.integers(0, 2 ** 31 - 1))
def test_random_monotone_pairs(seed):
    rng = np.random.default_rng(seed)
    M = 120
    g = Grid1D(-10, 10, M, "outflow", 1.0, -1.0)
    ev = Evolver(BURGERS, g, float(rng.uniform(0.2, 2.0)), lf_speed=2.5)
    u0 = np.sort(rng.uniform(-1, 1, M))[::-1]
    v0 = u0 + rng.uniform(0, 0.5, M)
    rep = property_suite(ev, u0, np.minimum(v0, 1.5), steps=100)
    assert rep.max_l1_increase <= 1e-10
    assert rep.order_violation <= 1e-12
    assert rep.monotone_violation <= 1e-12


def test_shifted_profile_pair_distance_constant(burgers_unit):
    g = Grid1D(-40, 40, 1600, "outflow", 0.5, -0.5)
    x = g.centers
    u0 = burgers_unit.evaluate(x)["u"]
    v0 = burgers_unit.evaluate(x - 1.0)["u"]
    ev = Evolver(BURGERS, g, 1.0)
    rep = property_suite(ev, u0, v0, T=5.0)
    assert np.ptp(rep.l1) <= 2e-3
    assert rep.max_l1_increase <= 1e-10


def test_step_and_bump_ordering():
    g = Grid1D(-10, 10, 400, "outflow", 1.0, 0.0)
    x = g.centers
    u0 = np.where(x < 0, 1.0, 0.0)
    v0 = u0 + 0.5 * np.exp(-x ** 2)
    ev = Evolver(BURGERS, g, 0.5, lf_speed=2.0)
    rep = property_suite(ev, u0, v0, T=3.0)
    assert rep.order_violation <= 1e-12
    assert rep.monotone_violation <= 1e-12
