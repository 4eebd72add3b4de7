r"""
Shock triples and the chord function
------------------------------------

For a scalar flux ``f`` and end states ``u_minus > u_plus`` moving at the
chord speed ``s``, the chord function is

.. math::

    F(u; s) = f(u) - f(u_\pm) - s (u - u_\pm),

which vanishes at both end states. The interval ``[u_plus, u_minus]`` is
split at the interior critical points of ``F`` into monotone branches,
numbered from ``0`` at ``u_plus``: even branches are decreasing, odd
branches increasing, so critical points alternate local minimum, local
maximum, ..., local minimum.

Shocks with ``u_minus < u_plus`` are handled through the reflection
``v = -u``, ``f -> -f(-v)``; the chord then records ``reflected=True`` and
all of its values refer to the reflected variable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from radshock.errors import AdmissibilityError, ConfigError, NumericalError
from radshock.flux import FluxModel, add_cubic, reflect

#: uniform samples of F' used to bracket critical points
SCAN_SAMPLES = 2 ** 12
#: relative size of |F''| below which a critical point counts as degenerate
DEGENERATE_TOL = 1e-8
#: relative strength of the cubic mollification
MOLLIFY_ETA = 1e-6
#: relative Oleinik margin separating "strict" from "weak contact"
STRICT_MARGIN = 1e-10
#: relative accuracy of branch inversion
INVERT_TOL = 1e-12


@dataclass(frozen=True)
class ShockTriple:
    u_minus: float | np.ndarray
    u_plus: float | np.ndarray
    s: float

    @property
    def size(self) -> float:
        return float(np.linalg.norm(np.atleast_1d(self.u_minus)
                                    - np.atleast_1d(self.u_plus)))


def rh_residual(f: FluxModel, triple: ShockTriple) -> float:
    """Max-norm of ``f(u+) - f(u-) - s (u+ - u-)``."""
    um = np.atleast_1d(np.asarray(triple.u_minus, dtype=float))
    up = np.atleast_1d(np.asarray(triple.u_plus, dtype=float))
    if f.is_scalar:
        jump = np.atleast_1d(f(float(up[0])) - f(float(um[0])))
    else:
        jump = f(up) - f(um)
    return float(np.max(np.abs(jump - triple.s * (up - um))))


def shock_speed(f: FluxModel, u_minus: float, u_plus: float) -> ShockTriple:
    """Chord (Rankine-Hugoniot) speed of a scalar shock."""
    if not f.is_scalar:
        raise ConfigError("shock_speed takes a scalar flux; "
                          "system speeds come from the system module")
    u_minus, u_plus = float(u_minus), float(u_plus)
    if u_minus == u_plus:
        raise ConfigError("coincident states: u_minus == u_plus")
    s = (f(u_plus) - f(u_minus)) / (u_plus - u_minus)
    return ShockTriple(u_minus, u_plus, float(s))


# {{{ chord function

@dataclass(frozen=True)
class Branch:
    lo: float
    hi: float
    increasing: bool


@dataclass(frozen=True)
class ChordFunction:
    """Chord of a decreasing shock (after reflection if necessary).

    :attr flux: the flux actually used (reflected and/or mollified).
    :attr triple: end states and speed in the same variable as ``flux``.
    :attr z_star: interior critical points, increasing.
    :attr branches: monotone pieces of ``[u_plus, u_minus]``.
    :attr m: depth ``-min F`` over the interval.
    :attr mollification: ``(eta, s_tilde)`` when degenerate critical points
        forced a perturbation ``f + eta (u - u_plus)^3``, else ``None``.
    """

    flux: FluxModel
    triple: ShockTriple
    z_star: tuple[float, ...]
    branches: tuple[Branch, ...]
    m: float
    scale: float
    reflected: bool = False
    mollification: tuple[float, float] | None = None
    degenerate: tuple[float, ...] = ()
    original: ShockTriple | None = field(default=None, compare=False)

    @property
    def u_minus(self) -> float:
        return self.triple.u_minus

    @property
    def u_plus(self) -> float:
        return self.triple.u_plus

    @property
    def s(self) -> float:
        return self.triple.s

    @property
    def n_pairs(self) -> int:
        """Number of decreasing/increasing branch pairs."""
        return len(self.branches) // 2

    def __call__(self, u):
        return self.flux(u) - self.flux(self.u_plus) - self.s * (np.asarray(u) - self.u_plus)

    def deriv(self, u, order: int = 1):
        if order == 0:
            return self(u)
        d = self.flux.deriv(u, order)
        return d - self.s if order == 1 else d

    def taylor(self, u0: float, order: int) -> np.ndarray:
        """Taylor coefficients of ``F`` about ``u0``."""
        c = self.flux.taylor(u0, order)
        c[0] = float(self(u0))
        if order >= 1:
            c[1] -= self.s
        return c

    def critical_values(self) -> tuple[float, ...]:
        return tuple(float(self(z)) for z in self.z_star)

    def minima(self) -> tuple[float, ...]:
        return self.z_star[0::2]

    def maxima(self) -> tuple[float, ...]:
        return self.z_star[1::2]

    def branch_of(self, u: float) -> int:
        for i, b in enumerate(self.branches):
            if b.lo <= u <= b.hi:
                return i
        raise ValueError(f"{u} outside [{self.u_plus}, {self.u_minus}]")


def _scan_critical(F1, F2, lo, hi, scale):
    """Roots of F' in (lo, hi): sign changes plus touching zeros."""
    grid = np.linspace(lo, hi, SCAN_SAMPLES + 1)
    d = F1(grid)
    roots = []
    touching = []
    for i in range(1, SCAN_SAMPLES):
        a, b = d[i], d[i + 1]
        if a == 0.0 and i > 0:
            roots.append(float(grid[i]))
        elif a * b < 0.0:
            roots.append(float(brentq(F1, grid[i], grid[i + 1], xtol=1e-15 * scale,
                                      rtol=4 * np.finfo(float).eps)))
    if d[1] * d[0] < 0.0 and d[0] != 0.0:
        roots.insert(0, float(brentq(F1, grid[0], grid[1], xtol=1e-15 * scale)))
    # local minima of |F'| that nearly touch zero without a sign change
    ad = np.abs(d)
    for i in range(1, SCAN_SAMPLES):
        if ad[i] <= ad[i - 1] and ad[i] <= ad[i + 1] and d[i - 1] * d[i + 1] > 0:
            res = minimize_scalar(lambda x: abs(float(F1(x))),
                                  bounds=(grid[i - 1], grid[i + 1]), method="bounded",
                                  options={"xatol": 1e-14 * scale})
            if abs(float(F1(res.x))) < DEGENERATE_TOL * scale:
                touching.append(float(res.x))
    roots = sorted(set(roots))
    degenerate = [z for z in roots if abs(float(F2(z))) < DEGENERATE_TOL * scale]
    return roots, sorted(degenerate + touching)


def build_chord(f: FluxModel, triple: ShockTriple, require_oleinik: bool = True,
                mollify: bool = True) -> ChordFunction:
    """Chord function with its monotone decomposition.

    :arg require_oleinik: raise :class:`AdmissibilityError` when ``F`` fails to
        be negative strictly inside the interval. Pass ``False`` to build the
        chord of inadmissible data (for reporting).
    :arg mollify: perturb the flux when a degenerate critical point is found.
    """
    if not f.is_scalar:
        raise ConfigError("build_chord takes a scalar flux")
    um, up = float(triple.u_minus), float(triple.u_plus)
    if um == up:
        raise ConfigError("coincident states: u_minus == u_plus")
    original = triple
    reflected = um < up
    if reflected:
        f = reflect(f)
        um, up = -um, -up
        triple = ShockTriple(um, up, float(triple.s))

    scale = max(1.0, abs(um), abs(up))
    res = rh_residual(f, triple)
    if res > 1e-10 * scale * max(1.0, abs(float(f(um))), abs(triple.s)):
        raise AdmissibilityError(f"Rankine-Hugoniot violated: residual {res:.3e}")

    def chord(ff, s):
        base = float(ff(up))
        return (lambda u: ff(u) - base - s * (np.asarray(u) - up),
                lambda u: ff.deriv(u, 1) - s,
                lambda u: ff.deriv(u, 2))

    F, F1, F2 = chord(f, triple.s)
    roots, degenerate = _scan_critical(F1, F2, up, um, scale)
    mollification = None
    if degenerate and mollify:
        eta = MOLLIFY_ETA * scale
        f = add_cubic(f, eta, up)
        s_new = float(triple.s + eta * (um - up) ** 2)
        triple = ShockTriple(um, up, s_new)
        mollification = (eta, s_new)
        F, F1, F2 = chord(f, s_new)
        roots, still = _scan_critical(F1, F2, up, um, scale)
        if still:
            raise NumericalError(f"degenerate critical points persist after "
                                 f"mollification: {still}")

    edges = [up, *roots, um]
    branches = []
    for i in range(len(edges) - 1):
        mid = 0.5 * (edges[i] + edges[i + 1])
        branches.append(Branch(edges[i], edges[i + 1], bool(F1(mid) > 0)))
    vals = [float(F(z)) for z in roots]
    m = max([-v for v in vals], default=0.0)

    result = ChordFunction(flux=f, triple=triple, z_star=tuple(roots),
                           branches=tuple(branches), m=float(m), scale=scale,
                           reflected=reflected, mollification=mollification,
                           degenerate=tuple(degenerate), original=original)
    if require_oleinik:
        grid = np.linspace(up, um, SCAN_SAMPLES + 1)[1:-1]
        worst = float(np.max(F(grid)))
        if worst >= 0.0 or len(branches) % 2 or branches[0].increasing:
            raise AdmissibilityError(
                f"Oleinik violated: F(u;s) reaches {worst:.6g} >= 0 strictly "
                f"between u_plus and u_minus")
    return result

# }}}


# {{{ branch inversion

def invert_branch(chord: ChordFunction, branch: int, y):
    """Solve ``F(u; s) = y`` for ``u`` on branch *branch* (0-based).

    Bisection brackets the root; Newton steps are accepted only while they
    stay inside the bracket. Accepts scalar or array *y*.
    """
    b = chord.branches[branch]
    y = np.asarray(y, dtype=float)
    Flo, Fhi = float(chord(b.lo)), float(chord(b.hi))
    ymin, ymax = min(Flo, Fhi), max(Flo, Fhi)
    tol = INVERT_TOL * max(chord.scale, chord.m)
    if np.any(y < ymin - tol) or np.any(y > ymax + tol):
        raise ValueError(f"value outside the range [{ymin:.17g}, {ymax:.17g}] "
                         f"of branch {branch}")
    sign = 1.0 if b.increasing else -1.0
    target = np.clip(y, ymin, ymax)
    lo = np.full(target.shape, b.lo)
    hi = np.full(target.shape, b.hi)
    u = 0.5 * (lo + hi)
    for _ in range(200):
        g = sign * (chord(u) - target)
        # g is increasing in u on [lo, hi]
        lo = np.where(g < 0, u, lo)
        hi = np.where(g >= 0, u, hi)
        d = sign * chord.deriv(u, 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = u - g / d
        ok = np.isfinite(newton) & (newton > lo) & (newton < hi)
        u_new = np.where(ok, newton, 0.5 * (lo + hi))
        tiny = 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(u))
        done = (g == 0) | (hi - lo <= tiny) | (ok & (np.abs(newton - u) <= tiny))
        u = np.where(done, np.where(ok, newton, u), u_new)
        if np.all(done):
            break
    resid = np.abs(chord(u) - target)
    if np.any(resid > tol):
        # flat extremum: the root is pinned to the bracket to machine precision
        width = hi - lo
        if np.any((resid > tol) & (width > 8 * np.finfo(float).eps * np.maximum(1.0, np.abs(u)))):
            raise NumericalError("branch inversion did not converge")
    return float(u) if u.ndim == 0 else u

# }}}


# {{{ admissibility

@dataclass(frozen=True)
class AdmissibilityReport:
    """Outcome of the entropy checks on a chord.

    :attr worst_margin: smallest normalized Oleinik margin
        ``-F(u) (u_minus - u_plus) / ((u - u_plus)(u_minus - u))`` over the
        sampled interior; it tends to the Lax margins at the end states.
    :attr raw_margin: smallest ``-F(u)`` over the interior samples.
    :attr certified: the sampled negativity of ``F`` extends to the whole
        open interval by a second-derivative bound between samples.
    :attr min_curvature: smallest ``|f''|`` over the critical points.
    """

    oleinik_strict: bool
    lax_strict: bool
    nondegenerate: bool
    worst_margin: float
    raw_margin: float
    certified: bool
    lax_margins: tuple[float, float]
    min_curvature: float

    @property
    def admissible(self) -> bool:
        return self.oleinik_strict and self.lax_strict and self.nondegenerate


def oleinik_margin(chord: ChordFunction, u) -> np.ndarray:
    um, up = chord.u_minus, chord.u_plus
    u = np.asarray(u, dtype=float)
    return -chord(u) * (um - up) / ((u - up) * (um - u))


def check_admissibility(chord: ChordFunction, samples: int = SCAN_SAMPLES) -> AdmissibilityReport:
    """Strict Oleinik, strict Lax and nondegeneracy of the chord."""
    um, up = chord.u_minus, chord.u_plus
    grid = np.linspace(up, um, samples + 1)
    vals = chord(grid)
    inner = grid[1:-1]
    raw = float(np.min(-vals[1:-1]))
    margins = oleinik_margin(chord, inner)
    worst = float(np.min(margins))

    lax_lo = float(-chord.deriv(up, 1))
    lax_hi = float(chord.deriv(um, 1))
    lax = lax_lo > 0 and lax_hi > 0

    strict = bool(worst > STRICT_MARGIN * chord.scale and raw > 0)

    # F <= linear interpolant + M h^2 / 8 on each cell, with M >= max F''
    h = grid[1] - grid[0]
    curv = chord.deriv(np.linspace(up, um, 4 * samples + 1), 2)
    M = 1.25 * float(np.max(curv)) + 1e-300
    bound = np.maximum(vals[:-1], vals[1:]) + max(M, 0.0) * h * h / 8
    safe = bound < 0
    # near the end states use F'(u_pm) and the same curvature bound
    reach_lo = 2 * lax_lo / M if M > 0 else np.inf
    reach_hi = 2 * lax_hi / M if M > 0 else np.inf
    cells_lo = grid[1:] - up <= reach_lo
    cells_hi = um - grid[:-1] <= reach_hi
    certified = bool(strict and lax and np.all(safe | cells_lo | cells_hi))

    if chord.z_star:
        kappa = min(abs(float(chord.flux.deriv(z, 2))) for z in chord.z_star)
    else:
        kappa = math.inf
    nondegenerate = bool(kappa >= DEGENERATE_TOL * chord.scale
                         and not chord.degenerate)
    return AdmissibilityReport(
        oleinik_strict=strict, lax_strict=bool(lax), nondegenerate=nondegenerate,
        worst_margin=worst, raw_margin=raw, certified=certified,
        lax_margins=(lax_lo, lax_hi), min_curvature=kappa)

# }}}
