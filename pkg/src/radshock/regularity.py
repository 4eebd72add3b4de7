r"""
Regularity thresholds of convex profiles
----------------------------------------

With shock size ``eps = u_minus - u_plus`` (radiation coefficient
normalized to one), the scaled flux is

.. math::

    f_\varepsilon(u) = \varepsilon^{-2} F(u_+ + \varepsilon u; s), \qquad u \in [0, 1],

and the profile orbit solves

.. math::

    u' = f_\varepsilon'(u) v, \qquad
    v' = \varepsilon^{-2}\left(-\varepsilon^2 f_\varepsilon''(u) v^2 - v + f_\varepsilon(u)\right).

The sink ``(ubar, vbar2)`` sits at the critical point of ``f_eps``. Writing
the orbit as ``v = sum_j wbar_j (u - ubar)^j``, each coefficient solves
``alpha_j + beta_j wbar_j = 0`` with

.. math::

    \beta_j = -\left(\varepsilon^2 (2 + j) f_\varepsilon''(\bar u) \bar w_0 + 1\right),

and the profile is ``C^{n+1}`` while ``beta_0, ..., beta_n < 0``. The
threshold ``eps_j`` is where ``beta_j`` vanishes along the family of shocks
with fixed ``u_plus``; equivalently ``D(eps) = (j / (j + 2))^2`` with
``D = 1 - 4 eps^2 f_eps''(ubar) |f_eps(ubar)|``.

The ``alpha_j`` are Taylor coefficients of the orbit residual, obtained
from truncated power-series arithmetic on the flux expression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from radshock.errors import AdmissibilityError, ConfigError, NumericalError
from radshock.shock import ChordFunction

MAX_TERMS = 8


# {{{ scaled flux

@dataclass(frozen=True)
class ScaledFlux:
    """``f_eps(u) = F(u_plus + eps u) / eps^2`` on ``[0, 1]``."""

    chord: ChordFunction = field(repr=False)
    size: float
    u_bar: float

    @property
    def center(self) -> float:
        """Critical point in the chord variable."""
        return self.chord.u_plus + self.size * self.u_bar

    def __call__(self, u):
        e = self.size
        return self.chord(self.chord.u_plus + e * np.asarray(u)) / e ** 2

    def deriv(self, u, order: int = 1):
        e = self.size
        return e ** (order - 2) * self.chord.deriv(self.chord.u_plus + e * np.asarray(u), order)

    def taylor(self, order: int) -> np.ndarray:
        """Coefficients of ``f_eps(ubar + x)`` in powers of ``x``."""
        c = self.chord.taylor(self.center, order)
        k = np.arange(order + 1)
        return c * self.size ** (k - 2.0)


def scaled_flux(chord: ChordFunction) -> ScaledFlux:
    if len(chord.z_star) != 1:
        raise AdmissibilityError(
            f"scaled analysis needs exactly one critical point, found "
            f"{len(chord.z_star)}; use the branch decomposition instead")
    size = chord.u_minus - chord.u_plus
    return ScaledFlux(chord=chord, size=float(size),
                      u_bar=float((chord.z_star[0] - chord.u_plus) / size))


def discriminant(sf: ScaledFlux) -> float:
    """``1 - 4 eps^2 f_eps''(ubar) |f_eps(ubar)|``."""
    e = sf.size
    return 1.0 - 4 * e * e * float(sf.deriv(sf.u_bar, 2)) * abs(float(sf(sf.u_bar)))


def sink_equilibrium(sf: ScaledFlux) -> tuple[float, float]:
    """``(ubar, vbar2)``, the sink of the scaled orbit equations.

    Uses ``vbar2 = 2 f_eps(ubar) / (1 + sqrt(D))``, the cancellation-free
    form of the root of ``eps^2 f'' v^2 + v - f = 0`` nearest zero.
    """
    D = discriminant(sf)
    if D < 0:
        raise AdmissibilityError(
            f"negative discriminant {D:.6g}: shock size {sf.size} is at or "
            f"above the continuity threshold")
    fbar = float(sf(sf.u_bar))
    return sf.u_bar, 2.0 * fbar / (1.0 + math.sqrt(D))


def sink_eigenvalues(sf: ScaledFlux) -> tuple[float, float]:
    """``(lambda1, lambda2) = (f''(ubar) vbar2, -sqrt(D) / eps^2)``."""
    _, v2 = sink_equilibrium(sf)
    e = sf.size
    return (float(sf.deriv(sf.u_bar, 2)) * v2, -math.sqrt(discriminant(sf)) / e ** 2)

# }}}


# {{{ power series helpers

def _mul(a, b):
    return np.convolve(a, b)[:len(a)]


def _shift_deriv(a, k):
    """Coefficients of the k-th derivative of the series *a*, same length."""
    n = len(a)
    out = np.zeros(n)
    for i in range(n - k):
        out[i] = a[i + k] * math.prod(range(i + 1, i + k + 1))
    return out


def residual_coefficients(sf: ScaledFlux, w, order: int) -> np.ndarray:
    """Taylor coefficients up to *order* of the orbit residual

    ``-eps^2 f'' S^2 - S + f - eps^2 f' S' S`` with ``S = sum_j w_j x^j``.
    """
    N = order + 1
    a = sf.taylor(N + 2)
    f0 = a[:N]
    f1 = _shift_deriv(a, 1)[:N]
    f2 = _shift_deriv(a, 2)[:N]
    S = np.zeros(N)
    m = min(len(w), N)
    S[:m] = w[:m]
    dS = _shift_deriv(S, 1)
    e2 = sf.size ** 2
    return -e2 * _mul(f2, _mul(S, S)) - S + f0 - e2 * _mul(f1, _mul(dS, S))


def beta(sf: ScaledFlux, j: int, w0: float) -> float:
    return -(sf.size ** 2 * (2 + j) * float(sf.deriv(sf.u_bar, 2)) * w0 + 1.0)


def expansion(sf: ScaledFlux, n_max: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(wbar, beta, s_diag)`` for ``j = 0..n_max``.

    ``s_diag[n]`` is the off-diagonal entry ``alpha_{n+1} / eps^2`` of the
    linearization in the ``n``-th blown-up variable (diagnostic only).
    """
    if not 0 <= n_max <= MAX_TERMS:
        raise ConfigError(f"n_max must be in 0..{MAX_TERMS}")
    _, w0 = sink_equilibrium(sf)
    w = np.zeros(n_max + 2)
    w[0] = w0
    betas = np.array([beta(sf, j, w0) for j in range(n_max + 1)])
    s_diag = np.zeros(n_max + 1)
    for j in range(1, n_max + 2):
        alpha = residual_coefficients(sf, w[:j], j)[j]
        if not math.isfinite(alpha):
            raise NumericalError(f"non-finite Taylor coefficient at order {j}")
        s_diag[j - 1] = alpha / sf.size ** 2
        if j <= n_max:
            w[j] = -alpha / betas[j]
    return w[:n_max + 1], betas, s_diag

# }}}


# {{{ thresholds along the shock family

def _family_member(chord: ChordFunction, size: float):
    """``(F, c)`` for the family member of the given size: its chord function
    and its unique interior critical point."""
    f = chord.flux
    up = chord.u_plus
    um = up + size
    fp = float(f(up))
    s = (fp - float(f(um))) / (up - um)
    d1 = lambda u: float(f.deriv(u, 1)) - s  # noqa: E731
    a, b = d1(up), d1(um)
    if not (a < 0 < b):
        raise AdmissibilityError(f"family member of size {size} is not a Lax shock")
    c = brentq(d1, up, um, xtol=1e-16 * max(1.0, abs(up)), rtol=4 * np.finfo(float).eps)
    F = lambda u: f(u) - fp - s * (np.asarray(u) - up)  # noqa: E731
    return F, c


def family_discriminant(chord: ChordFunction, size: float) -> float:
    """``D`` of the shock ``(u_plus + size, u_plus)`` with the same flux."""
    F, c = _family_member(chord, size)
    return 1.0 - 4 * float(chord.flux.deriv(c, 2)) * abs(float(F(c)))


def _reality_margin(chord: ChordFunction, size: float, samples: int = 2049) -> float:
    """``max_u 4 eps^2 f''_eps(u) |f_eps(u)| - 1`` for the family member."""
    F, _ = _family_member(chord, size)
    u = np.linspace(chord.u_plus, chord.u_plus + size, samples)
    return float(np.max(4 * chord.flux.deriv(u, 2) * np.abs(F(u)))) - 1.0


def _first_crossing(g, upper: float, steps: int = 400) -> float | None:
    grid = upper * (np.arange(1, steps + 1) / steps)
    prev_x, prev = None, None
    for x in grid:
        try:
            val = g(x)
        except (AdmissibilityError, ValueError, ArithmeticError):
            break
        if prev is not None and prev * val <= 0:
            if val == 0:
                return float(x)
            return float(brentq(g, prev_x, x, xtol=1e-15, rtol=4 * np.finfo(float).eps))
        prev_x, prev = x, val
    return None


def thresholds(chord: ChordFunction, n_max: int, search: float | None = None) -> np.ndarray:
    """Sizes ``eps_0 > eps_1 > ... > eps_nmax`` where ``beta_j`` vanishes.

    The family keeps ``u_plus`` fixed and moves ``u_minus = u_plus + eps``.
    Missing thresholds (none below *search*) are reported as ``inf``.
    """
    upper = search if search is not None else 8.0 * (chord.u_minus - chord.u_plus)
    out = np.full(n_max + 1, np.inf)
    for j in range(n_max + 1):
        target = (j / (j + 2.0)) ** 2
        root = _first_crossing(lambda e: family_discriminant(chord, e) - target, upper)
        if root is not None:
            out[j] = root
    return out


def reality_threshold(chord: ChordFunction, search: float | None = None) -> float:
    """Largest size below which the slow curves are real on all of ``[0, 1]``."""
    upper = search if search is not None else 8.0 * (chord.u_minus - chord.u_plus)
    root = _first_crossing(lambda e: _reality_margin(chord, e), upper)
    return math.inf if root is None else root

# }}}


# {{{ report

@dataclass(frozen=True)
class RegularityReport:
    """Equilibrium, eigenvalues, expansion and thresholds of one shock.

    The thresholds are sufficient conditions. ``predicted_class`` is
    ``"C<n+1>"`` for the largest ``n`` with ``size < min(eps_bar, eps_n)``,
    ``"C<n_max+1>+"`` if that holds for every computed ``n``,
    ``"discontinuous"`` above ``eps_0`` and ``"undetermined"`` otherwise.
    """

    size: float
    epsilon_bar: float
    thresholds: tuple[float, ...]
    u_bar: float
    v_bar2: float | None
    lambda1: float | None
    lambda2: float | None
    wbar: tuple[float, ...]
    betas: tuple[float, ...]
    s_diag: tuple[float, ...]
    predicted_class: str

    def to_text(self) -> str:
        def num(x):
            return "nan" if x is None else format(float(x), ".17g")

        def lst(xs):
            return ", ".join(num(x) for x in xs)
        lines = [
            f"size = {num(self.size)}",
            f"eps_bar = {num(self.epsilon_bar)}",
            f"eps0 = {num(self.thresholds[0])}",
            f"eps_n = {lst(self.thresholds)}",
            f"ubar = {num(self.u_bar)}",
            f"vbar2 = {num(self.v_bar2)}",
            f"lambda1 = {num(self.lambda1)}",
            f"lambda2 = {num(self.lambda2)}",
            f"wbar = {lst(self.wbar)}",
            f"beta = {lst(self.betas)}",
            f"s_n = {lst(self.s_diag)}",
            f"predicted_class = {self.predicted_class}",
        ]
        return "\n".join(lines) + "\n"


def classify(size: float, eps_bar: float, eps: np.ndarray) -> str:
    if size >= eps[0]:
        return "discontinuous"
    if size >= eps_bar:
        return "undetermined"
    good = [n for n in range(len(eps)) if size < eps[n]]
    n = max(good)
    return f"C{n + 1}+" if n == len(eps) - 1 else f"C{n + 1}"


def expansion_and_thresholds(sf: ScaledFlux, n_max: int) -> RegularityReport:
    if not 0 <= n_max <= MAX_TERMS:
        raise ConfigError(f"n_max must be in 0..{MAX_TERMS}")
    eps = thresholds(sf.chord, n_max)
    eps_bar = reality_threshold(sf.chord)
    if discriminant(sf) >= 0:
        _, v2 = sink_equilibrium(sf)
        l1, l2 = sink_eigenvalues(sf)
        w, b, sd = expansion(sf, n_max)
    else:
        v2 = l1 = l2 = None
        w, b, sd = (), (), ()
    return RegularityReport(
        size=sf.size, epsilon_bar=eps_bar, thresholds=tuple(float(x) for x in eps),
        u_bar=sf.u_bar, v_bar2=v2, lambda1=l1, lambda2=l2,
        wbar=tuple(float(x) for x in w), betas=tuple(float(x) for x in b),
        s_diag=tuple(float(x) for x in sd),
        predicted_class=classify(sf.size, eps_bar, eps))

# }}}


# {{{ orbit check

def orbit_samples(sf: ScaledFlux, side: str = "left", rtol: float = 1e-13,
                  stop: float = 1e-7):
    """Integrate the scaled orbit from the saddle at ``u = 0`` (``side="left"``)
    or ``u = 1`` towards the sink; returns sampled ``(u, v)``."""
    e2 = sf.size ** 2
    u0 = 0.0 if side == "left" else 1.0
    d1 = float(sf.deriv(u0, 1))
    J = np.array([[0.0, d1], [d1 / e2, -1.0 / e2]])
    lam, V = np.linalg.eig(J)
    i = int(np.argmax(lam.real))
    vec = np.real(V[:, i])
    vec /= np.linalg.norm(vec)
    if vec[1] > 0:
        vec = -vec
    y0 = [u0 + 1e-9 * vec[0], 1e-9 * vec[1]]

    def rhs(_t, y):
        u, v = y
        return [float(sf.deriv(u, 1)) * v,
                (-e2 * float(sf.deriv(u, 2)) * v * v - v + float(sf(u))) / e2]

    def near(_t, y):
        return abs(y[0] - sf.u_bar) - stop
    near.terminal = True

    sol = solve_ivp(rhs, (0.0, 1e6), y0, method="DOP853", rtol=rtol, atol=1e-16,
                    dense_output=True, events=[near])
    if not len(sol.t_events[0]):
        raise NumericalError("orbit did not approach the sink")
    t = np.linspace(0.0, sol.t[-1], 50001)
    u, v = sol.sol(t)
    return u, v


def fit_orbit_taylor(sf: ScaledFlux, degree: int = 8, window: float = 0.01,
                     points: int = 2001) -> np.ndarray:
    """Least-squares polynomial fit of the orbit ``v(u)`` about ``ubar``.

    Both halves of the orbit (from ``u = 0`` and from ``u = 1``) are
    sampled; about *points* samples nearest to a uniform grid on
    ``|u - ubar| <= window`` enter the fit. Returns coefficients in powers
    of ``u - ubar``.
    """
    xs, vs = [], []
    for side in ("left", "right"):
        u, v = orbit_samples(sf, side)
        xs.append(u - sf.u_bar)
        vs.append(v)
    x = np.concatenate(xs)
    v = np.concatenate(vs)
    order = np.argsort(x)
    x, v = x[order], v[order]
    grid = np.linspace(-window, window, points)
    idx = np.unique(np.clip(np.searchsorted(x, grid), 0, len(x) - 1))
    keep = np.abs(x[idx]) <= window
    if np.count_nonzero(keep) < 4 * (degree + 1):
        raise NumericalError("too few orbit samples in the fitting window")
    P = np.polynomial.Polynomial.fit(x[idx][keep], v[idx][keep], degree,
                                     domain=[-window, window], window=[-window, window])
    return P.coef

# }}}


# {{{ nonconvex critical points

def classify_critical_points(chord: ChordFunction, epsilon: float = 1.0) -> list[dict]:
    """Local minima: ``continuous`` (node) or ``jump`` (focus) crossing;
    local maxima: ``regular crossing`` when the saddle tangent is transverse."""
    out = []
    for i, c in enumerate(chord.z_star):
        a = epsilon * float(chord.deriv(c, 2)) * float(chord(c))
        D = 1 + 4 * a
        if i % 2 == 0:
            kind = "continuous" if D >= 0 else "jump"
        else:
            lam = (-1 + math.sqrt(D)) / 2
            # unstable direction (z, u) ~ (1 + lam, 1) has nonzero z part
            kind = "regular crossing" if a > 0 and 1 + lam != 0 else "singular"
        out.append({"z_star": float(c), "kind": kind, "discriminant": D})
    return out

# }}}
