r"""
Radiative shock profiles
------------------------

The scalar profile equations are

.. math::

    z' = F(u; s), \qquad \varepsilon z'' = z - u, \qquad q = -z',

with ``z -> u_pm`` as ``xi -> pm infinity``. On a monotone branch of ``F``
one has ``u = h(z')``; the branch ends where ``z'`` reaches a critical value.

Arcs are integrated in the state ``(z, u, xi)`` against a pseudo-time
``eta`` with ``d xi / d eta = eps F'(u)``:

.. math::

    \frac{dz}{d\eta} = \varepsilon F'(u) F(u), \qquad
    \frac{du}{d\eta} = z - u, \qquad
    \frac{d\xi}{d\eta} = \varepsilon F'(u).

This removes the singularity of ``h'`` at the branch ends: an arc that
reaches ``u = z*`` with ``z != z*`` is a maximal solution ending at a
turning point of ``xi``; an arc that runs into ``(z*, z*)`` is the
continuous case. End states and local maxima of ``F`` are saddles, local
minima are nodes (continuous crossing) or foci (jump).

All arcs are integrated forward in ``eta``; on decreasing branches this is
backward in ``xi``.

.. autofunction:: tail_trajectory
.. autofunction:: intermediate_trajectories
.. autofunction:: match_pair
.. autofunction:: assemble_profile
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from radshock.errors import AdmissibilityError, NotConstructedError, NumericalError
from radshock.shock import ChordFunction, invert_branch

#: distance from the saddle at which arcs start
START_OFFSET = 1e-8
#: arcs closer than this to a node are considered to have reached it
EQUILIBRIUM_TOL = 1e-12
#: jumps smaller than this (relative) are classified continuous
CONTINUITY_TOL = 1e-6
# both arcs stopping this close to the minimum means they enter the node
NODE_SNAP = 1e-8
#: integration budget in units of the slowest linear time scale
BUDGET = 1e3
#: above this fast/slow rate ratio the arc ODE is treated as stiff
STIFF_RATIO = 1e3

DEFAULT_RTOL = 1e-12


# {{{ trajectories

@dataclass(frozen=True)
class PhaseTrajectory:
    """A sampled arc of the profile equations on one monotone branch.

    Samples are ordered along the integration (increasing ``eta``), which is
    decreasing ``xi`` on decreasing branches. ``xi`` is the arc's own
    coordinate: zero at its starting point.
    """

    eta: np.ndarray
    xi: np.ndarray
    z: np.ndarray
    dz: np.ndarray
    ddz: np.ndarray
    u: np.ndarray
    branch: int
    origin: str
    terminal_event: str
    epsilon: float
    solution: object = field(repr=False, compare=False, default=None)

    @property
    def terminal(self) -> tuple[float, float]:
        return float(self.z[-1]), float(self.dz[-1])

    @property
    def converged(self) -> bool:
        return self.terminal_event == "equilibrium"

    def _eta_at_z(self, z: float) -> float:
        zs = self.z
        increasing = zs[-1] > zs[0]
        key = zs if increasing else -zs
        target = z if increasing else -z
        i = int(np.searchsorted(key, target))
        if i <= 0:
            return float(self.eta[0])
        if i >= len(zs):
            return float(self.eta[-1])
        a, b = float(self.eta[i - 1]), float(self.eta[i])
        g = lambda e: float(self.solution(e)[0]) - z  # noqa: E731
        ga, gb = g(a), g(b)
        if ga == 0.0:
            return a
        if gb == 0.0 or ga * gb > 0:
            return b
        return brentq(g, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)

    def state_at_z(self, z: float) -> tuple[float, float, float]:
        """``(u, xi, eta)`` on the arc where it passes through *z*."""
        eta = self._eta_at_z(z)
        y = self.solution(eta)
        return float(y[1]), float(y[2]), eta

    def z_range(self) -> tuple[float, float]:
        return float(min(self.z[0], self.z[-1])), float(max(self.z[0], self.z[-1]))


def _rhs(chord: ChordFunction, eps: float):
    f = chord.flux
    fp = float(f(chord.u_plus))
    s, up = chord.s, chord.u_plus
    d1 = f._scalar[1]
    f0 = f._scalar[0]

    def rhs(_eta, y):
        z, u, _ = y
        F = float(f0(u)) - fp - s * (u - up)
        F1 = float(d1(u)) - s
        return [eps * F1 * F, z - u, eps * F1]
    return rhs


def _eta_jacobian(a: float) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of [[0, a], [1, -1]] (the (z, u) linearization)."""
    J = np.array([[0.0, a], [1.0, -1.0]])
    return np.linalg.eig(J)


def saddle_linearization(chord: ChordFunction, side: str, epsilon: float):
    """Linearization of ``(z, z')`` at an end state.

    Returns ``(matrix, eigenvalues)`` with eigenvalues sorted ascending.
    """
    z0 = chord.u_plus if side == "right" else chord.u_minus
    d = float(chord.deriv(z0, 1))
    if d == 0.0:
        raise AdmissibilityError("sonic end state: F'(u) = 0, not a saddle")
    A = np.array([[0.0, 1.0], [1.0 / epsilon, -1.0 / (epsilon * d)]])
    lam = np.linalg.eigvals(A)
    if np.any(np.abs(lam.imag) > 0) or not (lam.real.min() < 0 < lam.real.max()):
        raise AdmissibilityError("end state is not a saddle")
    return A, np.sort(lam.real)


def _target_minimum(chord: ChordFunction, branch: int) -> float:
    # even branches end at their upper edge, odd ones at their lower edge
    b = chord.branches[branch]
    return b.hi if branch % 2 == 0 else b.lo


def _integrate_arc(chord: ChordFunction, eps: float, branch: int, y0, origin: str,
                   start_rate: float, rtol: float, samples: int) -> PhaseTrajectory:
    c = _target_minimum(chord, branch)
    b = chord.branches[branch]
    far = b.lo if branch % 2 == 0 else b.hi
    scale = chord.scale
    a_node = eps * float(chord.deriv(c, 2)) * float(chord(c))
    lam_node = np.linalg.eigvals(np.array([[0.0, a_node], [1.0, -1.0]]))
    slow = min(abs(start_rate), float(np.min(np.abs(lam_node.real))))
    if slow <= 0:
        raise NumericalError("degenerate linearization, no time scale")
    horizon = BUDGET / slow
    tol_eq = EQUILIBRIUM_TOL * scale

    def hit_boundary(_t, y):
        return y[1] - c
    hit_boundary.terminal = True

    def hit_equilibrium(_t, y):
        return math.hypot(y[0] - c, y[1] - c) - tol_eq
    hit_equilibrium.terminal = True
    hit_equilibrium.direction = -1

    def left_branch(_t, y):
        return y[1] - far
    left_branch.terminal = True

    fast = max(abs(start_rate), float(np.max(np.abs(lam_node.real))), 1.0)
    method = "Radau" if fast / slow > STIFF_RATIO else "DOP853"
    sol = solve_ivp(_rhs(chord, eps), (0.0, horizon), y0, method=method,
                    rtol=rtol, atol=1e-3 * rtol * scale, dense_output=True,
                    events=[hit_boundary, hit_equilibrium, left_branch])
    if sol.status == -1:
        raise NumericalError(f"integration failed on {origin}: {sol.message}")
    if len(sol.t_events[2]):
        raise NumericalError(f"{origin} left its branch through the far end")
    if len(sol.t_events[0]):
        event = "branch boundary"
    elif len(sol.t_events[1]):
        event = "equilibrium"
    else:
        raise NumericalError(f"{origin}: no terminal event within the "
                             f"budget eta <= {horizon:.3g}")

    eta_end = float(sol.t[-1])
    eta = np.union1d(sol.t, np.linspace(0.0, eta_end, samples))
    Y = sol.sol(eta)
    Y[:, -1] = sol.y[:, -1]
    if event == "branch boundary":
        Y[1, -1] = c
    z, u, xi = Y
    dz = np.asarray(chord(u), dtype=float)
    ddz = (z - u) / eps
    return PhaseTrajectory(eta=eta, xi=xi, z=z, dz=dz, ddz=ddz, u=u, branch=branch,
                           origin=origin, terminal_event=event, epsilon=eps,
                           solution=sol.sol)


def tail_trajectory(chord: ChordFunction, side: str, epsilon: float,
                    rtol: float = DEFAULT_RTOL, samples: int = 4000) -> PhaseTrajectory:
    """Maximal solution leaving an end state along its saddle manifold.

    ``side="right"`` starts at ``u_plus`` (the arc approaching ``u_plus`` as
    ``xi -> +inf``), ``side="left"`` at ``u_minus``. The arc runs until
    ``z'`` reaches the adjacent critical value or the arc reaches the node.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    saddle_linearization(chord, side, epsilon)
    z0 = chord.u_plus if side == "right" else chord.u_minus
    a = epsilon * float(chord.deriv(z0, 1)) ** 2
    lam, V = _eta_jacobian(a)
    i = int(np.argmax(lam.real))
    v = np.real(V[:, i])
    v /= np.linalg.norm(v)
    # move u into the interval
    want = 1.0 if side == "right" else -1.0
    if v[1] * want < 0:
        v = -v
    delta = START_OFFSET * chord.scale
    y0 = [z0 + delta * v[0], z0 + delta * v[1], 0.0]
    branch = 0 if side == "right" else len(chord.branches) - 1
    origin = "tail at u_plus" if side == "right" else "tail at u_minus"
    return _integrate_arc(chord, epsilon, branch, y0, origin, float(lam.real[i]),
                          rtol, samples)


def smallness_margin(chord: ChordFunction, k: int, epsilon: float) -> float:
    """``2 - eps |F(c)| |F''(c)|`` at the ``k``-th local maximum (1-based)."""
    c = chord.z_star[2 * k - 1]
    return 2.0 - epsilon * abs(float(chord(c))) * abs(float(chord.deriv(c, 2)))


def intermediate_trajectories(chord: ChordFunction, k: int, epsilon: float,
                              rtol: float = DEFAULT_RTOL, samples: int = 4000):
    """The two arcs leaving the ``k``-th local maximum of ``F`` (1-based).

    Returns ``(left, right)``: ``left`` lives on the increasing branch below
    the maximum and ends near the next smaller local minimum; ``right`` on
    the decreasing branch above it. Both start at ``z = u = z*`` so
    ``z'' = 0`` there.
    """
    n = chord.n_pairs
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must be in 1..{n - 1}")
    if smallness_margin(chord, k, epsilon) <= 0:
        c = chord.z_star[2 * k - 1]
        bound = 2.0 / (abs(float(chord(c))) * abs(float(chord.deriv(c, 2))))
        raise NotConstructedError(
            f"eps = {epsilon} is not below the sufficient bound {bound:.6g} "
            f"at the local maximum z* = {c:.6g}; profile not constructed")
    c = chord.z_star[2 * k - 1]
    a = epsilon * float(chord.deriv(c, 2)) * float(chord(c))
    lam, V = _eta_jacobian(a)
    i = int(np.argmax(lam.real))
    v = np.real(V[:, i])
    v /= np.linalg.norm(v)
    if v[1] > 0:
        v = -v
    delta = START_OFFSET * chord.scale
    rate = float(lam.real[i])
    left = _integrate_arc(chord, epsilon, 2 * k - 1,
                          [c + delta * v[0], c + delta * v[1], 0.0],
                          f"intermediate left at z*={c:.6g}", rate, rtol, samples)
    right = _integrate_arc(chord, epsilon, 2 * k,
                           [c - delta * v[0], c - delta * v[1], 0.0],
                           f"intermediate right at z*={c:.6g}", rate, rtol, samples)
    lo_min, hi_min = chord.z_star[2 * k - 2], chord.z_star[2 * k]
    if not left.converged and left.z[-1] > lo_min:
        raise NotConstructedError(
            f"left arc from z* = {c:.6g} stops at z = {left.z[-1]:.6g} above "
            f"{lo_min:.6g}; no profile constructed at eps = {epsilon}")
    if not right.converged and right.z[-1] < hi_min:
        raise NotConstructedError(
            f"right arc from z* = {c:.6g} stops at z = {right.z[-1]:.6g} below "
            f"{hi_min:.6g}; no profile constructed at eps = {epsilon}")
    return left, right

# }}}


# {{{ matching

@dataclass(frozen=True)
class MatchPoint:
    """Common point of an upper arc (larger ``u``) and a lower arc.

    :attr z_bar, z_tilde: the match in the ``(z, z')`` plane.
    :attr xi_upper, xi_lower: arc coordinates of the match on each arc.
    :attr shift_left, shift_right: translations applied when gluing, filled
        in by :func:`assemble_profile`.
    """

    z_bar: float
    z_tilde: float
    xi_upper: float
    xi_lower: float
    eta_upper: float
    eta_lower: float
    u_left: float
    u_right: float
    mismatch: float
    critical_point: float
    shift_left: float = 0.0
    shift_right: float = 0.0

    @property
    def jump(self) -> float:
        return self.u_left - self.u_right


def match_pair(chord: ChordFunction, upper: PhaseTrajectory,
               lower: PhaseTrajectory) -> MatchPoint:
    """Intersect the graphs ``z -> z'`` of two arcs meeting at a local minimum."""
    c = _target_minimum(chord, lower.branch)
    if _target_minimum(chord, upper.branch) != c:
        raise ValueError("arcs do not meet at the same local minimum")
    Fc = float(chord(c))

    def node_match():
        uu, xu, eu = upper.state_at_z(float(upper.z[-1]))
        ul, xl, el = lower.state_at_z(float(lower.z[-1]))
        return MatchPoint(z_bar=c, z_tilde=Fc, xi_upper=float(upper.xi[-1]),
                          xi_lower=float(lower.xi[-1]), eta_upper=float(upper.eta[-1]),
                          eta_lower=float(lower.eta[-1]), u_left=c, u_right=c,
                          mismatch=abs(upper.z[-1] - lower.z[-1]), critical_point=c)

    if upper.converged and lower.converged:
        return node_match()

    lo = float(upper.z[-1])
    hi = float(lower.z[-1])
    if lo > hi:
        near = max(abs(lo - c), abs(hi - c)) <= NODE_SNAP * chord.scale
        if upper.converged or lower.converged or near:
            return node_match()
        raise NumericalError(f"arcs do not overlap: upper ends at z = {lo:.17g}, "
                             f"lower ends at z = {hi:.17g}")

    def D(z):
        return float(chord(upper.state_at_z(z)[0])) - float(chord(lower.state_at_z(z)[0]))

    dlo, dhi = D(lo), D(hi)
    if dlo * dhi > 0:
        if upper.converged or lower.converged:
            return node_match()
        raise NumericalError("no sign change of the phase-plane mismatch")
    probe = np.linspace(lo, hi, 65)
    vals = np.array([D(z) for z in probe])
    nz = vals[vals != 0]
    if np.count_nonzero(np.diff(np.sign(nz))) > 1:
        raise NumericalError("phase-plane graphs intersect more than once")
    if dlo == 0.0:
        zb = lo
    elif dhi == 0.0:
        zb = hi
    else:
        zb = brentq(D, lo, hi, xtol=1e-15 * chord.scale, rtol=4 * np.finfo(float).eps)
    uu, xu, eu = upper.state_at_z(zb)
    ul, xl, el = lower.state_at_z(zb)
    pu, pl = float(chord(uu)), float(chord(ul))
    zt = 0.5 * (pu + pl)
    u_left = invert_branch(chord, upper.branch, zt)
    u_right = invert_branch(chord, lower.branch, zt)
    return MatchPoint(z_bar=zb, z_tilde=zt, xi_upper=xu, xi_lower=xl, eta_upper=eu,
                      eta_lower=el, u_left=float(u_left), u_right=float(u_right),
                      mismatch=abs(pu - pl), critical_point=c)

# }}}


# {{{ assembled profile

@dataclass(frozen=True)
class Jump:
    xi0: float
    u_left: float
    u_right: float
    rh_residual: float
    oleinik_margin: float


@dataclass(frozen=True)
class _Piece:
    xi: np.ndarray
    z: np.ndarray
    dz: np.ndarray
    ddz: np.ndarray
    u: np.ndarray


@dataclass(frozen=True)
class RadiativeProfile:
    """Glued profile ``xi -> (z, z', z'', u, q)`` of one scalar shock.

    Values are in the original variable (undoing any reflection). ``xi = 0``
    is the leftmost glue point. Beyond the sampled range the tails are
    continued by their linear exponential decay.
    """

    epsilon: float
    s: float
    u_minus: float
    u_plus: float
    xi: np.ndarray
    z: np.ndarray
    dz: np.ndarray
    ddz: np.ndarray
    u: np.ndarray
    q: np.ndarray
    jumps: tuple[Jump, ...]
    glue_points: tuple[float, ...]
    matches: tuple[MatchPoint, ...]
    decay_rates: tuple[float, float]
    chord: ChordFunction = field(repr=False, compare=False)
    pieces: tuple[_Piece, ...] = field(repr=False, compare=False, default=())
    arcs: tuple[PhaseTrajectory, ...] = field(repr=False, compare=False, default=())

    @property
    def sign(self) -> float:
        return -1.0 if self.chord.reflected else 1.0

    @property
    def continuous(self) -> bool:
        return not self.jumps

    def jump_magnitude(self) -> float:
        return max([abs(m.jump) for m in self.matches], default=0.0)

    def evaluate(self, xi) -> dict[str, np.ndarray]:
        """Profile values at arbitrary ``xi``; a jump point takes its right value."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = {k: np.empty_like(xi) for k in ("z", "dz", "ddz", "u")}
        first, last = self.pieces[0], self.pieces[-1]
        for piece in self.pieces:
            if len(piece.xi) < 2:
                continue
            mask = (xi >= piece.xi[0]) & (xi <= piece.xi[-1])
            if not np.any(mask):
                continue
            spl = CubicHermiteSpline(piece.xi, piece.z, piece.dz)
            x = xi[mask]
            out["z"][mask] = spl(x)
            dspl = CubicHermiteSpline(piece.xi, piece.dz, piece.ddz)
            out["dz"][mask] = dspl(x)
            out["ddz"][mask] = np.interp(x, piece.xi, piece.ddz)
            out["u"][mask] = out["z"][mask] - self.epsilon * out["ddz"][mask]
        eps = self.epsilon
        mu_left, mu_right = self.decay_rates
        for mask, piece, idx, zinf, mu in (
                (xi < first.xi[0], first, 0, self.u_minus, mu_left),
                (xi > last.xi[-1], last, -1, self.u_plus, mu_right)):
            if not np.any(mask):
                continue
            x0 = piece.xi[idx]
            amp = piece.z[idx] - zinf
            e = amp * np.exp(mu * (xi[mask] - x0))
            out["z"][mask] = zinf + e
            out["dz"][mask] = mu * e
            out["ddz"][mask] = mu * mu * e
            out["u"][mask] = zinf + e * (1 - eps * mu * mu)
        out["q"] = -out["dz"]
        out["xi"] = xi
        return out

    def rows(self):
        return np.column_stack([self.xi, self.z, self.dz, self.ddz, self.u, self.q])

    def jump_records(self) -> list[dict]:
        return [dict(xi0=j.xi0, u_left=j.u_left, u_right=j.u_right,
                     rh_residual=j.rh_residual, oleinik_margin=j.oleinik_margin)
                for j in self.jumps]

    def to_csv(self, path) -> None:
        write_csv(path, "xi,z,dz,ddz,u,q", self.rows())


def format_number(x: float) -> str:
    return format(float(x), ".17g")


def write_atomic(path, text: str) -> None:
    """Write *text* to *path* through a temporary file and a rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header: str, rows) -> None:
    lines = [header]
    for row in rows:
        lines.append(",".join(format_number(v) for v in row))
    write_atomic(path, "\n".join(lines) + "\n")


def jump_checks(chord: ChordFunction, u_left: float, u_right: float,
                samples: int = 1024) -> tuple[float, float]:
    """RH residual ``|chord slope - s|`` and the normalized Oleinik margin of
    the sub-shock from ``u_left`` down to ``u_right`` (chord variables)."""
    f = chord.flux
    slope = (float(f(u_right)) - float(f(u_left))) / (u_right - u_left)
    rh = abs(slope - chord.s)
    t = np.linspace(0.0, 1.0, samples + 1)[1:-1]
    u = u_right + t * (u_left - u_right)
    G = chord(u) - float(chord(u_right))
    margin = float(np.min(-G * (u_left - u_right) / ((u - u_right) * (u_left - u))))
    return rh, margin


def _arc_piece(arc: PhaseTrajectory, eta_cut: float, offset: float, match_state):
    keep = arc.eta < eta_cut
    xi = np.append(arc.xi[keep] + offset, match_state["xi"])
    z = np.append(arc.z[keep], match_state["z"])
    dz = np.append(arc.dz[keep], match_state["dz"])
    u = np.append(arc.u[keep], match_state["u"])
    ddz = (z - u) / arc.epsilon
    order = np.argsort(xi, kind="stable")
    return xi[order], z[order], dz[order], ddz[order], u[order]


def _strictly_increasing(piece):
    xi = piece[0]
    keep = np.ones(len(xi), dtype=bool)
    keep[1:] = np.diff(xi) > 0
    # keep the glue values at the ends
    keep[-1] = True
    if len(xi) > 1 and xi[-1] <= xi[-2]:
        keep[-2] = False
    return tuple(a[keep] for a in piece)


def assemble_profile(chord: ChordFunction, epsilon: float, rtol: float = DEFAULT_RTOL,
                     samples: int = 4000) -> RadiativeProfile:
    """Glue tails and intermediate arcs into a full profile."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    n = chord.n_pairs
    if n < 1:
        raise AdmissibilityError("chord has no interior minimum")
    lower_tail = tail_trajectory(chord, "right", epsilon, rtol, samples)
    upper_tail = tail_trajectory(chord, "left", epsilon, rtol, samples)
    inter = {k: intermediate_trajectories(chord, k, epsilon, rtol, samples)
             for k in range(1, n)}

    # match j sits at the j-th local minimum (0-based, from u_plus upward)
    matches = []
    pairs = []
    for j in range(n):
        upper = upper_tail if j == n - 1 else inter[j + 1][0]
        lower = lower_tail if j == 0 else inter[j][1]
        matches.append(match_pair(chord, upper, lower))
        pairs.append((upper, lower))

    # place blocks from the left: the top match is at xi = 0
    X = [0.0] * n
    offsets = {}
    offsets[id(upper_tail)] = -matches[n - 1].xi_upper
    for k in range(n - 1, 0, -1):
        left, right = inter[k]
        o = X[k] - matches[k].xi_lower
        offsets[id(left)] = offsets[id(right)] = o
        X[k - 1] = o + matches[k - 1].xi_upper
    offsets[id(lower_tail)] = X[0] - matches[0].xi_lower
    matches = [MatchPoint(**{**m.__dict__,
                             "shift_left": offsets[id(pairs[j][0])],
                             "shift_right": offsets[id(pairs[j][1])]})
               for j, m in enumerate(matches)]

    pieces = []
    arcs = []
    # walk from left (top) to right; each piece spans between consecutive glue points
    def state(j, upper):
        m = matches[j]
        u = m.u_left if upper else m.u_right
        return {"xi": X[j], "z": m.z_bar, "dz": m.z_tilde, "u": u}

    top = matches[n - 1]
    pieces.append(_arc_piece(upper_tail, top.eta_upper, offsets[id(upper_tail)],
                             state(n - 1, True)))
    arcs.append(upper_tail)
    for k in range(n - 1, 0, -1):
        left, right = inter[k]
        a = _arc_piece(right, matches[k].eta_lower, offsets[id(right)],
                       state(k, False))
        b = _arc_piece(left, matches[k - 1].eta_upper, offsets[id(left)],
                       state(k - 1, True))
        # the two arcs share the saddle point; drop one copy
        pieces.append(tuple(np.concatenate([a[i], b[i][1:]]) for i in range(5)))
        arcs.extend([right, left])
    pieces.append(_arc_piece(lower_tail, matches[0].eta_lower, offsets[id(lower_tail)],
                             state(0, False)))
    arcs.append(lower_tail)

    sgn = -1.0 if chord.reflected else 1.0
    pieces = [_strictly_increasing(p) for p in pieces]
    pieces = [_Piece(xi=p[0], z=sgn * p[1], dz=sgn * p[2], ddz=sgn * p[3], u=sgn * p[4])
              for p in pieces]

    jumps = []
    for j in range(n - 1, -1, -1):
        m = matches[j]
        if abs(m.u_left - m.u_right) < CONTINUITY_TOL * chord.scale:
            continue
        rh, margin = jump_checks(chord, m.u_left, m.u_right)
        jumps.append(Jump(xi0=X[j], u_left=sgn * m.u_left, u_right=sgn * m.u_right,
                          rh_residual=rh, oleinik_margin=margin))

    cat = lambda name: np.concatenate([getattr(p, name) for p in pieces])  # noqa: E731
    z, dz, ddz, u = cat("z"), cat("dz"), cat("ddz"), cat("u")
    xi = cat("xi")

    _, lam_r = saddle_linearization(chord, "right", epsilon)
    _, lam_l = saddle_linearization(chord, "left", epsilon)
    decay = (float(lam_l[-1]), float(lam_r[0]))
    um, up = (chord.u_minus, chord.u_plus)
    return RadiativeProfile(
        epsilon=float(epsilon), s=float(chord.s), u_minus=sgn * um, u_plus=sgn * up,
        xi=xi, z=z, dz=dz, ddz=ddz, u=u, q=-dz, jumps=tuple(jumps),
        glue_points=tuple(X[j] for j in range(n - 1, -1, -1)),
        matches=tuple(matches), decay_rates=decay, chord=chord,
        pieces=tuple(pieces), arcs=tuple(arcs))


def arc_residual(chord: ChordFunction, arc: PhaseTrajectory) -> float:
    """Sup-norm of ``z' - F(z - eps z'')`` along an arc.

    This is the profile equation ``eps z'' = z - h(z')`` composed with ``F``;
    the inverse form amplifies rounding near the branch ends, where ``h``
    has unbounded slope.
    """
    return float(np.max(np.abs(arc.dz - chord(arc.z - arc.epsilon * arc.ddz))))


def inverse_residual(chord: ChordFunction, arc: PhaseTrajectory,
                     min_slope: float = 1e-3) -> float:
    """Sup-norm of ``eps z'' - z + h(z')`` over samples where ``|F'(u)|``
    exceeds *min_slope* (relative), so that ``h`` is well conditioned."""
    b = chord.branches[arc.branch]
    lo, hi = sorted((float(chord(b.lo)), float(chord(b.hi))))
    keep = np.abs(chord.deriv(arc.u, 1)) > min_slope * chord.scale
    y = np.clip(arc.dz[keep], lo, hi)
    h = invert_branch(chord, arc.branch, y)
    r = arc.epsilon * arc.ddz[keep] - arc.z[keep] + h
    return float(np.max(np.abs(r), initial=0.0))

# }}}
