r"""
Systems with rank-one radiative coupling
----------------------------------------

The model is

.. math::

    u_t + f(u)_x + L q_x = 0, \qquad -\varepsilon q_{xx} + R q + G \cdot u_x = 0,

with ``u`` in ``R^n`` and constant vectors ``L``, ``G``. A traveling wave
``(u, q)(x - s t)`` satisfies ``f(u) - f(u_pm) - s (u - u_pm) = L z'`` with
``q = -z'``. Projecting away ``L`` leaves ``n - 1`` algebraic constraints
which, near a Lax ``k``-shock satisfying ``(l_k . L)(G . r_k) > 0``, define
``u = Phi(w)`` as a function of ``w = G . u``. The remaining scalar problem
is

.. math::

    z' = \hat F(w) = Q \cdot \left(f(\Phi(w)) - f(u_-) - s (\Phi(w) - u_-)\right),
    \qquad -\varepsilon z'' + R z = w,

which in ``Z = R z`` is the scalar profile problem with chord ``R F_hat``,
speed zero and radiation coefficient ``eps / R``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.linalg import null_space

from radshock.errors import AdmissibilityError, ConfigError, NumericalError
from radshock.flux import FluxModel
from radshock.profile import RadiativeProfile
from radshock.shock import ChordFunction, ShockTriple, build_chord, rh_residual

NEWTON_TOL = 1e-13
MAX_NEWTON = 40
LIU_STEPS = 200


# {{{ model and spectral data

@dataclass(frozen=True)
class SystemModel:
    """Flux, coupling vectors and the projections used by the reduction.

    :attr constraints: ``(n-1) x n`` matrix with kernel ``span{L}``; by
        default an orthonormal basis of the complement of ``L``.
    """

    flux: FluxModel
    L: np.ndarray
    G: np.ndarray
    R: float = 1.0
    epsilon: float = 1.0
    constraints: np.ndarray | None = None

    def __post_init__(self):
        n = self.flux.dimension
        L = np.asarray(self.L, dtype=float).reshape(-1)
        G = np.asarray(self.G, dtype=float).reshape(-1)
        if L.shape != (n,) or G.shape != (n,):
            raise ConfigError(f"L and G must have {n} components")
        if not np.any(L):
            raise ConfigError("L must be nonzero")
        if not self.R > 0 or not self.epsilon > 0:
            raise ConfigError("R and eps must be positive")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "G", G)
        N = null_space(L[None, :]).T if self.constraints is None else np.asarray(
            self.constraints, dtype=float)
        if N.shape != (n - 1, n) or np.max(np.abs(N @ L), initial=0.0) > 1e-12 * np.abs(N).max(initial=1.0):
            raise ConfigError("constraint rows must span the complement of L")
        object.__setattr__(self, "constraints", N)

    @property
    def n(self) -> int:
        return self.flux.dimension

    @property
    def P(self) -> np.ndarray:
        """Orthogonal projector with kernel ``span{L}``."""
        L = self.L
        return np.eye(self.n) - np.outer(L, L) / (L @ L)

    @property
    def Q(self) -> np.ndarray:
        """Covector with ``Q . L = 1``."""
        return self.L / (self.L @ self.L)


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: np.ndarray
    right: np.ndarray  # columns r_k
    left: np.ndarray   # rows l_k, l_i . r_j = delta_ij


def spectral(sys: SystemModel, u) -> SpectralData:
    """Sorted, biorthonormal eigen-decomposition of the flux Jacobian at *u*."""
    J = sys.flux.jacobian(np.asarray(u, dtype=float))
    lam, Rm = np.linalg.eig(J)
    scale = max(1.0, np.max(np.abs(lam)))
    if np.max(np.abs(np.imag(lam))) > 1e-12 * scale:
        raise AdmissibilityError(f"complex eigenvalues at u = {u}: not hyperbolic")
    lam = np.real(lam)
    order = np.argsort(lam)
    lam, Rm = lam[order], np.real(Rm[:, order])
    if len(lam) > 1 and np.min(np.diff(lam)) <= 1e-10 * scale:
        raise AdmissibilityError(f"coalescing eigenvalues at u = {u}: "
                                 f"not strictly hyperbolic")
    for k in range(Rm.shape[1]):
        r = Rm[:, k] / np.linalg.norm(Rm[:, k])
        lead = np.flatnonzero(np.abs(r) > 1e-12)[0]
        Rm[:, k] = r if r[lead] > 0 else -r
    if np.linalg.cond(Rm) > 1e12:
        raise AdmissibilityError(f"defective Jacobian at u = {u}")
    return SpectralData(lam, Rm, np.linalg.inv(Rm))


def main_assumption(sys: SystemModel, u, k: int) -> float:
    """``(l_k . L)(G . r_k)`` for the 1-based family *k*."""
    sp = spectral(sys, u)
    return float((sp.left[k - 1] @ sys.L) * (sys.G @ sp.right[:, k - 1]))


def directional_derivative(sys: SystemModel, u, k: int, h: float = 1e-5) -> float:
    """``grad lambda_k . r_k`` by central differencing along ``r_k``."""
    u = np.asarray(u, dtype=float)
    r = spectral(sys, u).right[:, k - 1]
    lp = spectral(sys, u + h * r).eigenvalues[k - 1]
    lm = spectral(sys, u - h * r).eigenvalues[k - 1]
    return float((lp - lm) / (2 * h))

# }}}


# {{{ reduction map

def _residual(sys, um, s, U, W):
    """Constraint residuals at the columns of ``U``: shape ``(n, m)``."""
    F = sys.flux(U) - sys.flux(um)[:, None] - s * (U - um[:, None])
    return np.vstack([sys.constraints @ F, sys.G @ U - W[None, :]])


def _jacobian(sys, s, U):
    J = sys.flux.jacobian_batch(U) - s * np.eye(sys.n)[None]
    m = U.shape[1]
    top = np.einsum("ij,mjk->mik", sys.constraints, J)
    return np.concatenate([top, np.broadcast_to(sys.G, (m, 1, sys.n))], axis=1)


def _newton(sys, um, s, U, W, damped=True, max_iter=MAX_NEWTON):
    U = np.array(U, dtype=float, copy=True)
    scale = max(1.0, float(np.max(np.abs(U))))
    for _ in range(max_iter):
        res = _residual(sys, um, s, U, W)
        norm = np.max(np.abs(res), axis=0)
        if np.all(norm <= NEWTON_TOL * scale):
            return U, True
        step = np.linalg.solve(_jacobian(sys, s, U), -res.T[..., None])[..., 0].T
        t = np.ones(U.shape[1])
        while damped:
            trial = U + t * step
            tnorm = np.max(np.abs(_residual(sys, um, s, trial, W)), axis=0)
            bad = (tnorm > norm) & (t > 1e-4) & (norm > NEWTON_TOL * scale)
            if not np.any(bad):
                break
            t = np.where(bad, 0.5 * t, t)
        U = U + t * step
    res = _residual(sys, um, s, U, W)
    return U, bool(np.all(np.max(np.abs(res), axis=0) <= 10 * NEWTON_TOL * scale))


@dataclass(frozen=True)
class ReductionMap:
    """``Phi(w)`` near the segment between ``w_minus`` and ``w_plus``.

    :attr table_w, table_u: continuation nodes used as Newton starting values.
    :attr validated: ``(w_lo, w_hi)`` covered by converged continuation.
    """

    sys: SystemModel
    triple: ShockTriple
    k: int
    table_w: np.ndarray = field(repr=False)
    table_u: np.ndarray = field(repr=False)
    validated: tuple[float, float] = (0.0, 0.0)

    @property
    def u_minus(self) -> np.ndarray:
        return np.asarray(self.triple.u_minus, dtype=float)

    @property
    def u_plus(self) -> np.ndarray:
        return np.asarray(self.triple.u_plus, dtype=float)

    @property
    def s(self) -> float:
        return float(self.triple.s)

    @property
    def w_minus(self) -> float:
        return float(self.sys.G @ self.u_minus)

    @property
    def w_plus(self) -> float:
        return float(self.sys.G @ self.u_plus)

    def phi(self, w) -> np.ndarray:
        """``Phi(w)``; shape ``(n,)`` for scalar *w*, ``(n, m)`` for arrays."""
        W = np.atleast_1d(np.asarray(w, dtype=float))
        lo, hi = self.validated
        span = hi - lo
        if np.any(W < lo - 1e-9 * span) or np.any(W > hi + 1e-9 * span):
            raise NumericalError(f"w outside the validated range [{lo:.17g}, {hi:.17g}]")
        guess = np.array([np.interp(W, self.table_w, row) for row in self.table_u])
        U, ok = _newton(self.sys, self.u_minus, self.s, guess, W, damped=True)
        if not ok:
            raise NumericalError("Newton iteration for Phi did not converge")
        return U[:, 0] if np.ndim(w) == 0 else U

    def dphi(self, w) -> np.ndarray:
        """``dPhi/dw`` by implicit differentiation of the constraints."""
        W = np.atleast_1d(np.asarray(w, dtype=float))
        U = self.phi(W)
        rhs = np.zeros((len(W), self.sys.n, 1))
        rhs[:, -1, 0] = 1.0
        D = np.linalg.solve(_jacobian(self.sys, self.s, U), rhs)[..., 0].T
        return D[:, 0] if np.ndim(w) == 0 else D

    def chord_vector(self, U) -> np.ndarray:
        um = self.u_minus
        return self.sys.flux(U) - self.sys.flux(um)[:, None] - self.s * (U - um[:, None])

    def F_hat(self, w):
        W = np.atleast_1d(np.asarray(w, dtype=float))
        val = self.sys.Q @ self.chord_vector(self.phi(W))
        return float(val[0]) if np.ndim(w) == 0 else val

    def F_hat_prime(self, w):
        W = np.atleast_1d(np.asarray(w, dtype=float))
        U = self.phi(W)
        D = self.dphi(W)
        J = self.sys.flux.jacobian_batch(U) - self.s * np.eye(self.sys.n)[None]
        val = np.einsum("i,mij,jm->m", self.sys.Q, J, D)
        return float(val[0]) if np.ndim(w) == 0 else val

    def F_hat_second(self, w, h: float | None = None):
        """Central difference of the analytic first derivative."""
        span = abs(self.w_minus - self.w_plus)
        h = 1e-4 * span if h is None else h
        W = np.asarray(w, dtype=float)
        return (self.F_hat_prime(W + h) - self.F_hat_prime(W - h)) / (2 * h)

    def constraint_residuals(self, w) -> tuple[float, float]:
        W = np.atleast_1d(np.asarray(w, dtype=float))
        U = self.phi(W)
        res = self.sys.constraints @ self.chord_vector(U)
        return (float(np.max(np.abs(res))),
                float(np.max(np.abs(self.sys.G @ U - W))))

    def reduced_flux(self) -> "ReducedFlux":
        return ReducedFlux(self, self.sys.R)

    def scalar_chord(self) -> ChordFunction:
        """Chord of the scalar problem in ``w`` (speed zero)."""
        g = self.reduced_flux()
        return build_chord(g, ShockTriple(self.w_minus, self.w_plus, 0.0))

    @property
    def scalar_epsilon(self) -> float:
        return self.sys.epsilon / self.sys.R

    def convexity_probe(self) -> dict:
        """``F_hat''(w_pm)`` against ``grad lambda_k . r_k / ((l_k.L)(G.r_k)^2)``."""
        out = {}
        for name, u, w in (("minus", self.u_minus, self.w_minus),
                           ("plus", self.u_plus, self.w_plus)):
            sp = spectral(self.sys, u)
            lk = sp.left[self.k - 1] @ self.sys.L
            gr = self.sys.G @ sp.right[:, self.k - 1]
            pred = directional_derivative(self.sys, u, self.k) / (lk * gr * gr)
            out[name] = (float(self.F_hat_second(w)), float(pred))
        return out


def build_reduction(sys: SystemModel, triple: ShockTriple, k: int) -> ReductionMap:
    """Continue ``Phi`` from ``u_minus`` to ``u_plus`` (and a margin beyond)."""
    if not 1 <= k <= sys.n:
        raise ConfigError(f"family index k must be in 1..{sys.n}")
    um = np.asarray(triple.u_minus, dtype=float)
    up = np.asarray(triple.u_plus, dtype=float)
    if np.array_equal(um, up):
        raise ConfigError("coincident states: u_minus == u_plus")
    scale = max(1.0, float(np.max(np.abs(np.concatenate([um, up])))))
    rh = rh_residual(sys.flux, triple)
    if rh > 1e-10 * scale:
        raise AdmissibilityError(f"Rankine-Hugoniot violated: residual {rh:.3e}")
    for name, u in (("u_minus", um), ("u_plus", up)):
        ma = main_assumption(sys, u, k)
        if not ma > 0:
            raise AdmissibilityError(f"main assumption fails at {name}: "
                                     f"(l_k.L)(G.r_k) = {ma:.6g}")
    s = float(triple.s)
    wm, wp = float(sys.G @ um), float(sys.G @ up)
    if wm == wp:
        raise AdmissibilityError("G . u_minus == G . u_plus: w does not parametrize the shock")
    span = wp - wm
    margin = 0.25 * abs(span)
    direction = np.sign(span)
    lo_target, hi_target = wm - direction * margin, wp + direction * margin

    def continue_to(w_end):
        ws, us = [wm], [um.copy()]
        h0 = abs(span) / 64
        h = h0
        sgn = np.sign(w_end - wm)
        w, u = wm, um.copy()
        while sgn * (w_end - w) > 0:
            step = min(h, abs(w_end - w))
            w_new = w + sgn * step
            rhs = np.zeros((1, sys.n, 1))
            rhs[0, -1, 0] = 1.0
            tangent = np.linalg.solve(_jacobian(sys, s, u[:, None]), rhs)[0, :, 0]
            guess = u + sgn * step * tangent
            U, ok = _newton(sys, um, s, guess[:, None], np.array([w_new]))
            if not ok:
                h *= 0.5
                if h < abs(span) / 4096:
                    raise NumericalError(f"Newton continuation failed near w = {w_new:.17g}")
                continue
            w, u = w_new, U[:, 0]
            ws.append(w)
            us.append(u)
            h = min(h0, 2 * h)
        return ws, us

    ws_a, us_a = continue_to(hi_target)
    ws_b, us_b = continue_to(lo_target)
    ws = np.array(ws_b[::-1] + ws_a[1:])
    us = np.array(us_b[::-1] + us_a[1:]).T
    order = np.argsort(ws)
    ws, us = ws[order], us[:, order]
    result = ReductionMap(sys=sys, triple=triple, k=k, table_w=ws, table_u=us,
                          validated=(float(ws[0]), float(ws[-1])))
    end = result.phi(wp)
    if np.max(np.abs(end - up)) > 1e-8 * scale:
        raise NumericalError("continuation reached a different solution at w_plus")
    inner = np.linspace(wm, wp, 33)[1:-1]
    if np.max(np.abs(result.F_hat(inner))) <= 1e-12 * scale * abs(span):
        raise AdmissibilityError("reduced flux vanishes between w_minus and w_plus "
                                 "(linearly degenerate family)")
    return result

# }}}


# {{{ reduced scalar flux

class ReducedFlux:
    """Scalar flux ``g(w) = sign * R * F_hat(sign * w)`` duck-typed like
    :class:`radshock.flux.FluxModel`, for the scalar chord and profile code.

    ``F_hat`` is replaced by its Chebyshev interpolant on the validated range
    (degree raised until the trailing coefficients reach roundoff), so each
    evaluation is a polynomial evaluation instead of a Newton solve.
    ``sign = -1`` is the reflected variant.
    """

    dimension = 1
    is_scalar = True
    domain = None

    def __init__(self, rmap: ReductionMap, R: float, sign: float = 1.0,
                 cubic: tuple[float, float] | None = None, series=None):
        self.rmap = rmap
        self.R = float(R)
        self.sign = float(sign)
        self.cubic = cubic
        self.kind = "reduced" if sign > 0 else "reflected:reduced"
        if series is None:
            series = _chebyshev_fit(lambda w: self.R * rmap.F_hat(w), rmap.validated)
        self.series = series
        self._derivs = [series] + [series.deriv(m) for m in (1, 2, 3)]
        self._scalar = tuple((lambda w, k=k: self.deriv(w, k)) for k in range(4))

    def __call__(self, w):
        return self.deriv(w, 0)

    def deriv(self, w, order: int = 1):
        if not 0 <= order <= 3:
            raise ValueError(f"derivative order {order} > 3 unsupported")
        sg = self.sign
        x = np.asarray(w, dtype=float)
        v = self._derivs[order](sg * x) * sg ** (order + 1)
        if self.cubic is not None:
            eta, c = self.cubic
            d = x - c
            v = v + eta * (d ** 3, 3 * d ** 2, 6 * d, 6.0 + 0 * d)[order]
        return float(v) if np.ndim(v) == 0 else np.asarray(v)

    def jacobian(self, w):
        return np.array([[self.deriv(float(np.ravel(w)[0]), 1)]])

    def taylor(self, w0, order):
        """Taylor coefficients from the interpolant (exact for its polynomial)."""
        if self.cubic is not None:
            raise NotImplementedError("series of a mollified reduced flux")
        sg = self.sign
        coeffs = []
        fact = 1.0
        for k in range(order + 1):
            fact *= max(k, 1)
            dk = self.series.deriv(k) if k else self.series
            coeffs.append(float(dk(sg * w0)) * sg ** (k + 1) / fact)
        return np.array(coeffs)

    def reflect(self):
        return ReducedFlux(self.rmap, self.R, -self.sign, self.cubic, self.series)

    def add_cubic(self, eta, center):
        return ReducedFlux(self.rmap, self.R, self.sign, (float(eta), float(center)),
                           self.series)


def _chebyshev_fit(func, domain, start: int = 16, max_degree: int = 512):
    """Chebyshev interpolant of *func* with coefficients decayed to roundoff."""
    deg = start
    while True:
        cheb = Chebyshev.interpolate(func, deg, domain=list(domain))
        c = np.abs(cheb.coef)
        if np.max(c[-4:]) <= 1e-13 * max(np.max(c), 1e-300) or deg >= max_degree:
            break
        deg *= 2
    return cheb.trim(1e-16 * np.max(c))


# }}}


# {{{ lifting

@dataclass(frozen=True)
class SystemProfile:
    xi: np.ndarray
    z: np.ndarray
    dz: np.ndarray
    ddz: np.ndarray
    w: np.ndarray
    u: np.ndarray  # (n, m)
    q: np.ndarray
    s: float
    jumps: tuple[tuple[float, np.ndarray, np.ndarray], ...]
    residuals: tuple[float, float]
    scalar: RadiativeProfile = field(repr=False, compare=False)

    def rows(self):
        return np.column_stack([self.xi, self.z, self.dz, self.ddz, self.u.T, self.q])


def lift_profile(rmap: ReductionMap, scalar_profile: RadiativeProfile) -> SystemProfile:
    """Map a profile of the reduced scalar problem back to the system."""
    R = rmap.sys.R
    w = scalar_profile.u
    z = scalar_profile.z / R
    dz = scalar_profile.dz / R
    ddz = scalar_profile.ddz / R
    U = rmap.phi(w)
    q = -dz
    res1 = float(np.max(np.abs(np.outer(rmap.sys.L, dz) - rmap.chord_vector(U))))
    res2 = float(np.max(np.abs(R * z - rmap.sys.epsilon * ddz - rmap.sys.G @ U)))
    jumps = tuple((j.xi0, rmap.phi(j.u_left), rmap.phi(j.u_right))
                  for j in scalar_profile.jumps)
    return SystemProfile(xi=scalar_profile.xi, z=z, dz=dz, ddz=ddz, w=w, u=U, q=q,
                         s=rmap.s, jumps=jumps, residuals=(res1, res2),
                         scalar=scalar_profile)

# }}}


# {{{ admissibility translation

def hugoniot_trace(sys: SystemModel, u_l, k: int, tau_end: float,
                   steps: int = LIU_STEPS):
    """Points ``u(tau)`` and speeds ``sigma(tau)`` on the ``k``-Hugoniot locus
    through ``u_l``, parametrized by ``tau = G . (u - u_l)``.

    Solves ``[f(u_l + tau d) - f(u_l)] / tau = sigma d`` with ``G . d = 1``,
    which stays regular at ``tau = 0`` (eigenpair of the Jacobian).
    """
    u_l = np.asarray(u_l, dtype=float)
    n = sys.n
    sp = spectral(sys, u_l)
    r = sp.right[:, k - 1]
    gr = sys.G @ r
    if gr == 0:
        raise AdmissibilityError("G . r_k = 0: tau does not parametrize the locus")
    d = r / gr
    sigma = sp.eigenvalues[k - 1]
    f0 = sys.flux(u_l)
    taus = np.linspace(0.0, tau_end, steps + 1)
    us, sigmas = [u_l.copy()], [float(sigma)]
    for tau in taus[1:]:
        for _ in range(MAX_NEWTON):
            u = u_l + tau * d
            res = np.concatenate([(sys.flux(u) - f0) / tau - sigma * d, [sys.G @ d - 1.0]])
            if np.max(np.abs(res)) <= 1e-13 * max(1.0, abs(sigma)):
                break
            J = sys.flux.jacobian(u)
            A = np.zeros((n + 1, n + 1))
            A[:n, :n] = J - sigma * np.eye(n)
            A[:n, n] = -d
            A[n, :n] = sys.G
            delta = np.linalg.solve(A, -res)
            d = d + delta[:n]
            sigma = sigma + delta[n]
        else:
            raise NumericalError(f"Hugoniot trace failed at tau = {tau:.6g}")
        us.append(u_l + tau * d)
        sigmas.append(float(sigma))
    return taus, np.array(us).T, np.array(sigmas)


@dataclass(frozen=True)
class JumpAdmissibility:
    no_jump: bool
    rh_residual: float
    lax: bool
    sign_consistent: bool
    liu: bool
    liu_margin: float
    details: dict = field(default_factory=dict, compare=False)

    @property
    def admissible(self) -> bool:
        return self.no_jump or (self.lax and self.liu and self.sign_consistent)


def sign_check(rmap: ReductionMap, u) -> tuple[float, float]:
    """``(lambda_k(u) - s, F_hat'(G . u))`` at a state on the reduction curve."""
    u = np.asarray(u, dtype=float)
    lam = spectral(rmap.sys, u).eigenvalues[rmap.k - 1]
    return float(lam - rmap.s), float(rmap.F_hat_prime(float(rmap.sys.G @ u)))


def translate_admissibility(rmap: ReductionMap, jump) -> JumpAdmissibility:
    """Check an inner jump ``(u_l, u_r, s)`` of a lifted profile."""
    u_l, u_r, s = jump
    u_l = np.asarray(u_l, dtype=float)
    u_r = np.asarray(u_r, dtype=float)
    sys, k = rmap.sys, rmap.k
    scale = max(1.0, float(np.max(np.abs(np.concatenate([u_l, u_r])))))
    if np.max(np.abs(u_l - u_r)) <= 1e-12 * scale:
        return JumpAdmissibility(True, 0.0, True, True, True, np.inf,
                                 {"note": "no jump"})
    rh = float(np.max(np.abs(sys.flux(u_r) - sys.flux(u_l) - s * (u_r - u_l))))
    sl, sr = spectral(sys, u_l), spectral(sys, u_r)
    lax = bool(sr.eigenvalues[k - 1] < s < sl.eigenvalues[k - 1])
    if k > 1:
        lax = lax and bool(sl.eigenvalues[k - 2] < s)
    if k < sys.n:
        lax = lax and bool(s < sr.eigenvalues[k])
    sign_ok = True
    ma = main_assumption(sys, u_l, k)
    for u in (u_l, u_r):
        a, b = sign_check(rmap, u)
        if ma > 0 and np.sign(a) != np.sign(b):
            sign_ok = False
    tau_end = float(sys.G @ (u_r - u_l))
    taus, us, sig = hugoniot_trace(sys, u_l, k, tau_end)
    end_err = float(np.max(np.abs(us[:, -1] - u_r)))
    inner = sig[1:-1] - s
    liu_margin = float(np.min(inner)) if len(inner) else np.inf
    liu = bool(end_err <= 1e-6 * scale and abs(sig[-1] - s) <= 1e-6 * max(1.0, abs(s))
               and liu_margin > 0)
    return JumpAdmissibility(False, rh, lax, sign_ok, liu, liu_margin,
                             {"trace_end_error": end_err, "main_assumption": ma,
                              "lambda_l": sl.eigenvalues.tolist(),
                              "lambda_r": sr.eigenvalues.tolist()})

# }}}


def system_speed(sys: SystemModel, u_minus, u_plus) -> ShockTriple:
    """Least-squares speed of a vector jump; RH is checked by the reduction."""
    um = np.asarray(u_minus, dtype=float)
    up = np.asarray(u_plus, dtype=float)
    du = up - um
    if not np.any(du):
        raise ConfigError("coincident states: u_minus == u_plus")
    s = float((sys.flux(up) - sys.flux(um)) @ du / (du @ du))
    return ShockTriple(um, up, s)
