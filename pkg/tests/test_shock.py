import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from radshock.errors import AdmissibilityError, ConfigError
from radshock.flux import builtin, parse_flux
from radshock.shock import (ShockTriple, build_chord, check_admissibility, invert_branch,
                            oleinik_margin, rh_residual, shock_speed)


@pytest.mark.parametrize("name,um,up,s", [
    ("burgers", 1.0, -1.0, 0.0),
    ("burgers", 2.0, 0.0, 1.0),
    ("cubic", 1.0, 0.0, 1.0),
])
def test_shock_speed(name, um, up, s):
    tr = shock_speed(builtin(name), um, up)
    assert tr.s == pytest.approx(s, abs=1e-15)
    assert rh_residual(builtin(name), tr) <= 1e-15


def test_coincident_states():
    with pytest.raises(ConfigError, match="coincident"):
        shock_speed(builtin("burgers"), 0.3, 0.3)


def test_burgers_chord():
    ch = build_chord(builtin("burgers"), ShockTriple(1.0, -1.0, 0.0))
    assert ch.z_star == pytest.approx((0.0,), abs=1e-14)
    assert ch.m == pytest.approx(0.5)
    assert len(ch.branches) == 2
    assert not ch.branches[0].increasing and ch.branches[1].increasing
    assert ch(1.0) == 0.0 and ch(-1.0) == 0.0


def test_quartic_chord():
    ch = build_chord(builtin("quartic"), ShockTriple(2.0, -2.0, 0.0))
    np.testing.assert_allclose(ch.z_star, (-1.0, 0.0, 1.0), atol=1e-13)
    np.testing.assert_allclose(ch.critical_values(), (-2.25, -2.0, -2.25), atol=1e-13)
    assert len(ch.branches) == 4 and ch.n_pairs == 2
    assert [b.increasing for b in ch.branches] == [False, True, False, True]


def test_cubic_oleinik_violation():
    with pytest.raises(AdmissibilityError, match="Oleinik"):
        build_chord(builtin("cubic"), ShockTriple(1.0, -1.0, 1.0))
    F = parse_flux("u^3")(-1 / math.sqrt(3)) - (-1.0) - 1.0 * (-1 / math.sqrt(3) + 1.0)
    assert F == pytest.approx(2 / (3 * math.sqrt(3)))


def test_rh_violation():
    with pytest.raises(AdmissibilityError):
        build_chord(builtin("burgers"), ShockTriple(1.0, -1.0, 0.3))


def test_inversion_examples():
    ch = build_chord(builtin("burgers"), ShockTriple(1.0, -1.0, 0.0))
    assert invert_branch(ch, 0, 0.0) == pytest.approx(-1.0, abs=1e-14)
    assert invert_branch(ch, 1, 0.0) == pytest.approx(1.0, abs=1e-14)
    assert invert_branch(ch, 0, -0.5) == pytest.approx(0.0, abs=1e-7)
    assert invert_branch(ch, 1, -0.5) == pytest.approx(0.0, abs=1e-7)
    with pytest.raises(ValueError):
        invert_branch(ch, 0, 0.1)


@pytest.mark.parametrize("name,um,up", [("burgers", 1.0, -1.0), ("quartic", 2.0, -2.0),
                                         ("quartic_pure", 1.0, -0.5)])
def test_inversion_roundtrip(name, um, up):
    f = builtin(name)
    ch = build_chord(f, shock_speed(f, um, up))
    rng = np.random.default_rng(3)
    for i, b in enumerate(ch.branches):
        u = rng.uniform(b.lo, b.hi, 200)
        back = invert_branch(ch, i, ch(u))
        assert np.max(np.abs(back - u)) <= 1e-10


def test_admissibility_reports():
    ok = check_admissibility(build_chord(builtin("burgers"), ShockTriple(1.0, -1.0, 0.0)))
    assert ok.oleinik_strict and ok.lax_strict and ok.nondegenerate and ok.certified
    assert ok.lax_margins == pytest.approx((1.0, 1.0))
    q = check_admissibility(build_chord(builtin("quartic"), ShockTriple(2.0, -2.0, 0.0)))
    assert q.admissible
    assert q.lax_margins == pytest.approx((6.0, 6.0))
    rev = check_admissibility(build_chord(builtin("burgers"), ShockTriple(-1.0, 1.0, 0.0),
                                          require_oleinik=False))
    assert not rev.oleinik_strict


def test_reflected_chord():
    ch = build_chord(builtin("cubic"), shock_speed(builtin("cubic"), -1.0, 0.0))
    assert ch.reflected
    assert ch.u_minus > ch.u_plus


def test_degenerate_point_is_mollified():
    f = parse_flux("u^3")
    ch = build_chord(f, shock_speed(f, 1.0, 0.0), require_oleinik=False)
    # F'(u) = 3u^2 - 1 has simple roots; u^4 at 0 has a degenerate minimum
    g = builtin("quartic_pure")
    ch2 = build_chord(g, shock_speed(g, 1.0, -1.0))
    assert ch2.mollification is not None
    assert not check_admissibility(ch2).nondegenerate
    assert ch.mollification is None


@given(st.floats(-3, 3), st.floats(0.05, 4))
def test_convex_single_critical_point(up, size):
    """For convex flux there is one critical point and m = |F(z*)|."""
    f = parse_flux("exp(u) + u^2")
    ch = build_chord(f, shock_speed(f, up + size, up))
    assert len(ch.z_star) == 1
    assert ch.m == pytest.approx(-float(ch(ch.z_star[0])), rel=1e-12)
    assert np.all(oleinik_margin(ch, np.linspace(up, up + size, 50)[1:-1]) > 0)
