"""
Conservative finite-volume solver for the radiating model.

Two forms are provided:

* ``"kernel"`` (scalar): ``u_t + f(u)_x = (K * u - u) / eps`` with the
  two-sided exponential kernel ``K(x) = exp(-|x|/sqrt(eps)) / (2 sqrt(eps))``.
* ``"elliptic"`` (scalar or vector): ``u_t + f(u)_x + L q_x = 0`` where ``q``
  solves ``-eps q_xx + R q + G . u_x = 0`` on the grid.

The hyperbolic part uses the local Lax-Friedrichs (Rusanov) flux and forward
Euler in time, which is monotone under the enforced step restriction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded, solve_circulant
from scipy.optimize import minimize_scalar
from scipy.signal import fftconvolve

from radshock.errors import ConfigError, NumericalError
from radshock.profile import format_number, write_atomic

CFL = 0.45
KERNEL_RADIUS = 40.0


@dataclass(frozen=True)
class Grid1D:
    """Uniform cell-centered grid on ``[a, b]``.

    ``boundary`` is ``"outflow"`` (ghost cells frozen at ``u_left`` and
    ``u_right``) or ``"periodic"``.
    """

    a: float
    b: float
    M: int
    boundary: str = "outflow"
    u_left: object = 0.0
    u_right: object = 0.0

    def __post_init__(self):
        if not self.b > self.a or self.M < 3:
            raise ConfigError("grid needs b > a and at least 3 cells")
        if self.boundary not in ("outflow", "periodic"):
            raise ConfigError(f"unknown boundary mode {self.boundary!r}")

    @property
    def dx(self) -> float:
        return (self.b - self.a) / self.M

    @property
    def centers(self) -> np.ndarray:
        return self.a + (np.arange(self.M) + 0.5) * self.dx

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"


@dataclass(frozen=True)
class FieldState:
    """Cell averages ``u`` (shape ``(M,)`` or ``(n, M)``) at time ``t``."""

    u: np.ndarray
    t: float = 0.0
    q: np.ndarray | None = None

    @property
    def mass(self):
        """Exactly rounded cell sums (per component)."""
        u = np.atleast_2d(self.u)
        return np.array([math.fsum(row) for row in u])


@dataclass(frozen=True)
class RadiationKernel:
    """Discrete ``K^eps`` weights on offsets ``-m..m`` with unit sum."""

    epsilon: float
    dx: float
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigError("eps must be positive")
        root = math.sqrt(self.epsilon)
        m = max(1, int(math.ceil(KERNEL_RADIUS * root / self.dx)))
        x = np.arange(-m, m + 1) * self.dx
        w = np.exp(-np.abs(x) / root)
        object.__setattr__(self, "weights", w / math.fsum(w))

    @property
    def half_width(self) -> int:
        return (len(self.weights) - 1) // 2

    def apply(self, u: np.ndarray, grid: Grid1D) -> np.ndarray:
        """``K * u`` with periodic wrap or frozen far-field padding."""
        m = self.half_width
        M = len(u)
        if grid.periodic:
            reps = m // M + 1
            padded = np.concatenate([np.tile(u, reps)[-m:] if m else u[:0], u,
                                     np.tile(u, reps)[:m]])
        else:
            padded = np.concatenate([np.full(m, float(grid.u_left)), u,
                                     np.full(m, float(grid.u_right))])
        return fftconvolve(padded, self.weights, mode="valid")


def solve_elliptic(grid: Grid1D, w: np.ndarray, epsilon: float, R: float = 1.0) -> np.ndarray:
    """Solve ``-eps D2 q + R q = -D1 w`` with centered differences.

    ``w`` is the scalar field ``G . u``. Periodic grids use a circulant solve,
    outflow grids a tridiagonal one with ``q = 0`` outside and ``w`` extended
    by its boundary values.
    """
    dx = grid.dx
    M = len(w)
    off = -epsilon / dx ** 2
    diag = R + 2 * epsilon / dx ** 2
    if grid.periodic:
        rhs = -(np.roll(w, -1) - np.roll(w, 1)) / (2 * dx)
        col = np.zeros(M)
        col[0], col[1], col[-1] = diag, off, off
        return solve_circulant(col, rhs)
    wl, wr = w[0], w[-1]
    ext = np.concatenate([[wl], w, [wr]])
    rhs = -(ext[2:] - ext[:-2]) / (2 * dx)
    ab = np.empty((3, M))
    ab[0, :] = off
    ab[1, :] = diag
    ab[2, :] = off
    return solve_banded((1, 1), ab, rhs)


@dataclass(frozen=True)
class Evolver:
    """One-step update for a given flux, grid and radiative coupling.

    :attr form: ``"kernel"`` (scalar only) or ``"elliptic"``.
    :attr lf_speed: fixed Lax-Friedrichs speed; ``None`` uses local speeds.
    """

    flux: object
    grid: Grid1D
    epsilon: float
    form: str = "kernel"
    L: object = 1.0
    G: object = 1.0
    R: float = 1.0
    lf_speed: float | None = None
    kernel: RadiationKernel | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.form not in ("kernel", "elliptic"):
            raise ConfigError(f"unknown form {self.form!r}")
        if self.form == "kernel":
            if not getattr(self.flux, "is_scalar", False):
                raise ConfigError("kernel form is scalar only")
            if self.kernel is None:
                object.__setattr__(self, "kernel",
                                   RadiationKernel(self.epsilon, self.grid.dx))

    @property
    def scalar(self) -> bool:
        return bool(getattr(self.flux, "is_scalar", False))

    def wave_speeds(self, u: np.ndarray) -> np.ndarray:
        """Spectral radius of the flux Jacobian per cell."""
        if self.scalar:
            return np.abs(np.asarray(self.flux.deriv(u, 1), dtype=float))
        lam = np.linalg.eigvals(self.flux.jacobian_batch(u))
        return np.max(np.abs(lam), axis=1)

    def max_dt(self, u: np.ndarray) -> float:
        speed = self.lf_speed if self.lf_speed is not None else float(np.max(self.wave_speeds(u)))
        limits = [CFL * self.grid.dx / speed] if speed > 0 else []
        if self.form == "kernel":
            limits.append(CFL * self.epsilon)
        return min(limits) if limits else np.inf

    def _extend(self, u: np.ndarray) -> np.ndarray:
        g = self.grid
        if self.scalar:
            if g.periodic:
                return np.concatenate([u[-1:], u, u[:1]])
            return np.concatenate([[float(g.u_left)], u, [float(g.u_right)]])
        if g.periodic:
            return np.concatenate([u[:, -1:], u, u[:, :1]], axis=1)
        left = np.asarray(g.u_left, dtype=float).reshape(-1, 1)
        right = np.asarray(g.u_right, dtype=float).reshape(-1, 1)
        return np.concatenate([left, u, right], axis=1)

    def interface_flux(self, u: np.ndarray) -> np.ndarray:
        """Rusanov flux at the ``M + 1`` cell interfaces."""
        ue = self._extend(u)
        fe = np.asarray(self.flux(ue), dtype=float)
        if self.lf_speed is not None:
            alpha = self.lf_speed
        else:
            sp = self.wave_speeds(ue)
            alpha = np.maximum(sp[:-1], sp[1:])
        return 0.5 * (fe[..., :-1] + fe[..., 1:]) - 0.5 * alpha * (ue[..., 1:] - ue[..., :-1])

    def radiation_flux(self, u: np.ndarray):
        """Interface values of ``L q`` and the cell values of ``q``."""
        G = np.asarray(self.G, dtype=float)
        L = np.asarray(self.L, dtype=float)
        w = G * u if self.scalar else G @ u
        q = solve_elliptic(self.grid, w, self.epsilon, self.R)
        if self.grid.periodic:
            qe = np.concatenate([q[-1:], q, q[:1]])
        else:
            qe = np.concatenate([[0.0], q, [0.0]])
        qi = 0.5 * (qe[:-1] + qe[1:])
        return (L * qi if self.scalar else np.outer(L, qi)), q

    def step(self, state: FieldState, dt: float) -> FieldState:
        u = np.asarray(state.u, dtype=float)
        limit = self.max_dt(u)
        if dt > limit * (1 + 1e-12):
            raise NumericalError(f"CFL violation: dt = {dt:.6g} exceeds {limit:.6g}")
        Fi = self.interface_flux(u)
        q = None
        if self.form == "elliptic":
            Lq, q = self.radiation_flux(u)
            Fi = Fi + Lq
        new = u - dt / self.grid.dx * (Fi[..., 1:] - Fi[..., :-1])
        if self.form == "kernel":
            new = new + dt / self.epsilon * (self.kernel.apply(u, self.grid) - u)
        if not np.all(np.isfinite(new)):
            raise NumericalError("non-finite values in the update")
        return FieldState(new, state.t + dt, q)

    def run(self, state: FieldState, T: float, dt: float | None = None,
            callback=None, every: int = 1) -> FieldState:
        """Advance to time ``T`` with a fixed step (the last one shortened)."""
        dt = self.max_dt(state.u) if dt is None else dt
        n = max(1, int(math.ceil((T - state.t) / dt - 1e-12)))
        h = (T - state.t) / n
        for i in range(n):
            state = self.step(state, h)
            if callback is not None and (i + 1) % every == 0:
                callback(state)
        return state


def step(state: FieldState, dt: float, evolver: Evolver) -> FieldState:
    return evolver.step(state, dt)


# {{{ traveling-wave verification

@dataclass(frozen=True)
class DriftReport:
    T: float
    M: int
    dx: float
    drift: float
    shift: float
    speed: float
    speed_error: float
    front_times: np.ndarray = field(repr=False)
    front_positions: np.ndarray = field(repr=False)

    def to_text(self) -> str:
        keys = ("T", "M", "dx", "drift", "shift", "speed", "speed_error")
        return "".join(f"{k} = {format_number(getattr(self, k))}\n" for k in keys)


def _front(x: np.ndarray, u: np.ndarray, level: float) -> float:
    """First crossing of *level* by the (scalar) cell values, linearly interpolated."""
    d = u - level
    idx = np.flatnonzero(np.sign(d[:-1]) != np.sign(d[1:]))
    if len(idx) == 0:
        return np.nan
    i = idx[0]
    if d[i] == d[i + 1]:
        return float(x[i])
    return float(x[i] + (x[i + 1] - x[i]) * d[i] / (d[i] - d[i + 1]))


def verify_traveling_wave(profile, T: float, M: int = 4096, a: float = -40.0,
                          b: float = 40.0, samples: int = 50,
                          component: int = 0, flux=None) -> DriftReport:
    """Evolve a profile and measure how far it is from a translate of itself.

    *profile* is a scalar :class:`~radshock.profile.RadiativeProfile` (kernel
    form) or a lifted system profile together with its reduction, passed as
    ``(system_profile, reduction_map)`` (elliptic form). *flux* is required
    for scalar profiles built through reflection or mollification.
    """
    if isinstance(profile, tuple):
        sp, rmap = profile
        sysm = rmap.sys
        ev_flux = sysm.flux
        s = sp.s
        um, up = rmap.u_minus, rmap.u_plus

        def U(x):
            return rmap.phi(sp.scalar.evaluate(x)["u"])

        grid = Grid1D(a, b, M, "outflow", um, up)
        ev = Evolver(ev_flux, grid, sysm.epsilon, "elliptic", sysm.L, sysm.G, sysm.R)
    else:
        s = profile.s
        um, up = profile.u_minus, profile.u_plus

        def U(x):
            return profile.evaluate(x)["u"]

        grid = Grid1D(a, b, M, "outflow", um, up)
        ev = Evolver(flux if flux is not None else profile_flux(profile), grid,
                     profile.epsilon, "kernel")
    x = grid.centers
    u0 = np.asarray(U(x), dtype=float)
    level = 0.5 * (np.ravel(um)[component] + np.ravel(up)[component])
    times, fronts = [], []

    def record(st):
        row = np.atleast_2d(st.u)[component]
        times.append(st.t)
        fronts.append(_front(x, row, level))

    record(FieldState(u0))
    dt = ev.max_dt(np.concatenate([np.atleast_2d(u0).ravel(), np.ravel(um), np.ravel(up)])
                   if ev.scalar else u0)
    nsteps = max(1, int(math.ceil(T / dt)))
    every = max(1, nsteps // samples)
    final = ev.run(FieldState(u0), T, dt, callback=record, every=every)
    if final.t not in times:
        record(final)
    ends = np.column_stack([np.ravel(um), np.ravel(up)])
    edge0 = np.abs(np.atleast_2d(u0)[:, [0, -1]] - ends)
    uT = np.atleast_2d(final.u)
    edge = np.abs(uT[:, [0, -1]] - ends)
    tol = 1e-6 * max(1.0, float(np.max(np.abs(np.ravel(um) - np.ravel(up)))))
    if np.max(edge - edge0) > tol:
        raise NumericalError("wave reached the domain boundary")

    def err(h):
        ref = np.atleast_2d(U(x - s * T - h))
        return float(np.sum(np.abs(uT - ref)) * grid.dx)

    span = 4 * grid.dx + 0.05 * abs(T) * max(1.0, abs(s))
    res = minimize_scalar(err, bounds=(-span, span), method="bounded",
                          options={"xatol": 1e-6 * grid.dx})
    times, fronts = np.array(times), np.array(fronts)
    half = times >= 0.5 * times[-1]
    if np.count_nonzero(half) >= 2 and np.all(np.isfinite(fronts[half])):
        speed = float(np.polyfit(times[half], fronts[half], 1)[0])
    else:
        speed = float((fronts[-1] - fronts[0]) / T)
    return DriftReport(T=T, M=M, dx=grid.dx, drift=float(res.fun), shift=float(res.x),
                       speed=speed, speed_error=abs(speed - s),
                       front_times=times, front_positions=fronts)


def profile_flux(profile):
    """The flux behind a scalar profile, when the chord kept it unchanged."""
    chord = profile.chord
    if chord.reflected or chord.mollification:
        raise ConfigError("profile flux was reflected or mollified; pass flux explicitly")
    return chord.flux

# }}}


# {{{ structural properties

@dataclass(frozen=True)
class PropertyReport:
    l1: np.ndarray
    max_l1_increase: float
    order_violation: float
    monotone_violation: float
    mass_drift: float
    steps: int

    def passed(self, slack: float = 1e-10, mass_tol: float = 1e-12) -> bool:
        return (self.max_l1_increase <= slack and self.order_violation <= slack
                and self.monotone_violation <= slack and self.mass_drift <= mass_tol)


def _monotone_sign(u: np.ndarray) -> float:
    d = np.diff(u)
    if np.all(d >= 0) and np.any(d):
        return 1.0
    if np.all(d <= 0) and np.any(d):
        return -1.0
    return 0.0


def property_suite(evolver: Evolver, u0: np.ndarray, v0: np.ndarray, T: float | None = None,
                   steps: int | None = None, dt: float | None = None) -> PropertyReport:
    """Evolve two data sets side by side with identical steps and report
    L1 contraction, order preservation, monotonicity and mass drift.

    Monotonicity is checked only for data that start monotone; order only for
    data that start ordered (either way). Mass drift is the largest change of
    ``fsum(u) dx`` relative to ``max(1, fsum(|u0|) dx)``.
    """
    u = np.asarray(u0, dtype=float)
    v = np.asarray(v0, dtype=float)
    if dt is None:
        dt = min(evolver.max_dt(u), evolver.max_dt(v))
    if steps is None:
        if T is None:
            raise ConfigError("give T or steps")
        steps = max(1, int(math.ceil(T / dt - 1e-12)))
        dt = T / steps
    dx = evolver.grid.dx
    ordered = 1.0 if np.all(u <= v) else (-1.0 if np.all(u >= v) else 0.0)
    mono = [_monotone_sign(u), _monotone_sign(v)]
    mass0 = [math.fsum(u) * dx, math.fsum(v) * dx]
    scale = max(1.0, math.fsum(np.abs(u)) * dx, math.fsum(np.abs(v)) * dx)
    l1 = [math.fsum(np.abs(u - v)) * dx]
    order_viol = mono_viol = drift = 0.0
    su, sv = FieldState(u), FieldState(v)
    for _ in range(steps):
        su, sv = evolver.step(su, dt), evolver.step(sv, dt)
        d = su.u - sv.u
        l1.append(math.fsum(np.abs(d)) * dx)
        if ordered:
            order_viol = max(order_viol, float(np.max(ordered * d)))
        for field_, sgn in ((su.u, mono[0]), (sv.u, mono[1])):
            if sgn:
                mono_viol = max(mono_viol, float(np.max(-sgn * np.diff(field_))))
        if evolver.grid.periodic:
            drift = max(drift, abs(math.fsum(su.u) * dx - mass0[0]) / scale,
                        abs(math.fsum(sv.u) * dx - mass0[1]) / scale)
    l1 = np.array(l1)
    inc = float(np.max(np.diff(l1), initial=0.0))
    return PropertyReport(l1=l1, max_l1_increase=max(inc, 0.0),
                          order_violation=max(order_viol, 0.0),
                          monotone_violation=max(mono_viol, 0.0),
                          mass_drift=drift, steps=steps)

# }}}


def write_snapshots(path, grid: Grid1D, snapshots) -> None:
    """CSV ``t,x,u,q`` for scalar fields; ``q`` is blank without an elliptic solve."""
    lines = ["t,x,u,q"]
    x = grid.centers
    for st in snapshots:
        q = np.full(len(x), np.nan) if st.q is None else np.ravel(st.q)
        for xi, ui, qi in zip(x, np.ravel(st.u), q):
            qs = "" if np.isnan(qi) else format_number(qi)
            lines.append(f"{format_number(st.t)},{format_number(xi)},{format_number(ui)},{qs}")
    write_atomic(path, "\n".join(lines) + "\n")
