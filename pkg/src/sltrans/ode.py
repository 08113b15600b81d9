"""Dense initial-value integration of -u'' + q u = lambda u across subintervals.

Builds the two shot solutions used throughout: the left solution (started
at x = -1 from the left boundary condition) and the right solution (started
at x = 1 from the lambda-dependent right boundary data). Both carry the
interface jumps so that u(h-0) = delta * u(h+0) and likewise for u'.

Constant-q pieces get exact closed-form trajectories. Variable-q pieces go
through scipy's adaptive RK45 with dense output (default tolerances 1e-10).
A Picard successive-approximation solver of the equivalent Volterra integral
equations is included as an integrator-independent cross-check.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp

from .problem import OutOfDomain, ValidatedProblem, as_validated
from .propagator import NonFiniteState, StepSizeUnderflow, cos_sinc
from .quadrature import _gauss_rule

DEFAULT_ABS_TOL = 1e-12
DEFAULT_REL_TOL = 1e-12


class NonConvergence(RuntimeError):
    """Successive approximation failed to contract within the iteration budget."""


@dataclass(frozen=True)
class StateVector:
    """Solution value and first derivative at a point."""

    u: float
    du: float

    def __post_init__(self):
        if not (np.isfinite(self.u) and np.isfinite(self.du)):
            raise NonFiniteState(f"state ({self.u}, {self.du}) is not finite")

    def __iter__(self):
        return iter((self.u, self.du))

    def scaled(self, c: float) -> "StateVector":
        return StateVector(self.u * c, self.du * c)


# ----------------------------------------------------------------------
# Dense segments
# ----------------------------------------------------------------------

class ConstantSegment:
    """Exact trajectory on a piece where q is constant."""

    def __init__(self, a: float, b: float, w: float, u0: float, du0: float):
        self.a = a
        self.b = b
        self.w = w
        self.u0 = u0
        self.du0 = du0

    def eval(self, x):
        t = np.asarray(x, dtype=float) - self.a
        C, S = cos_sinc(self.w * t * t)
        u = C * self.u0 + t * S * self.du0
        du = self.w * t * S * self.u0 + C * self.du0
        return u, du


class IvpSegment:
    """Dense Runge-Kutta trajectory on a piece with variable q."""

    def __init__(self, a: float, b: float, sol):
        self.a = a
        self.b = b
        self._sol = sol

    def eval(self, x):
        y = self._sol(np.asarray(x, dtype=float))
        return y[0], y[1]


def _integrate_dense(piece, a: float, b: float, lam: float, init, abs_tol, rel_tol):
    """Dense trajectory over [a, b] (either direction) within one piece."""
    u0, du0 = init
    if piece.is_constant:
        return ConstantSegment(a, b, piece.constant_value - lam, u0, du0)

    def rhs(x, y):
        return [y[1], (float(piece.evaluate(x)) - lam) * y[0]]

    res = solve_ivp(
        rhs, (a, b), [u0, du0], method="DOP853",
        rtol=rel_tol, atol=abs_tol, dense_output=True,
    )
    if not res.success:
        msg = res.message or "integration failed"
        if "step size" in msg.lower():
            raise StepSizeUnderflow(msg)
        raise NonFiniteState(msg)
    if not np.all(np.isfinite(res.y)):
        raise NonFiniteState("integrator produced non-finite values")
    return IvpSegment(a, b, res.sol)


def integrate_segment(problem, lam: float, interval, init, at: str = "a",
                      abs_tol: float = DEFAULT_ABS_TOL, rel_tol: float = DEFAULT_REL_TOL):
    """Integrate one segment lying inside a single subinterval closure.

    init is the state at endpoint `at` ('a' or 'b'); integration runs toward
    the other endpoint. Returns a dense trajectory with an eval(x) method.
    """
    vp = as_validated(problem)
    a, b = float(interval[0]), float(interval[1])
    if a >= b:
        raise ValueError("interval must satisfy a < b")
    if a < -1.0 or b > 1.0:
        raise OutOfDomain(f"segment [{a}, {b}] leaves [-1, 1]")
    for h in vp.interfaces:
        if a < h < b:
            raise ValueError(f"segment [{a}, {b}] spans the interface at {h}")
    mid = 0.5 * (a + b)
    piece = vp.pieces[vp.subinterval_index(mid)]
    init = StateVector(*init) if not isinstance(init, StateVector) else init
    if at == "a":
        return _integrate_dense(piece, a, b, lam, (init.u, init.du), abs_tol, rel_tol)
    if at == "b":
        return _integrate_dense(piece, b, a, lam, (init.u, init.du), abs_tol, rel_tol)
    raise ValueError("at must be 'a' or 'b'")


# ----------------------------------------------------------------------
# Piecewise solutions
# ----------------------------------------------------------------------

@dataclass
class PiecewiseSolution:
    """A shot solution: dense per-subinterval trajectories plus interface states.

    segments[j] covers subinterval j. left_states[j]/right_states[j] are the
    exact chained states at the ends of subinterval j, so the one-sided
    values at interface i are right_states[i] (the h_i - 0 side) and
    left_states[i+1] (the h_i + 0 side). scale multiplies everything
    (eigenfunction normalization uses it).
    """

    problem: ValidatedProblem
    lam: float
    direction: str
    segments: list
    left_states: list
    right_states: list
    scale: float = 1.0

    def eval(self, x, side: str | None = None):
        """(u, u') at x, applying the overall scale.

        At an interface point the left-side value is returned unless
        side='right'. Vectorized over x (side then applies to every
        interface hit).
        """
        xs = np.asarray(x, dtype=float)
        scalar = xs.ndim == 0
        xs = np.atleast_1d(xs)
        if np.any(xs < -1.0) or np.any(xs > 1.0):
            raise OutOfDomain("evaluation outside [-1, 1]")
        u = np.empty_like(xs)
        du = np.empty_like(xs)
        # Group points by subinterval so each segment evaluates one batch.
        # Interface points land on the left piece unless side='right'.
        bp = np.asarray(self.problem.breakpoints)
        srt = "right" if side == "right" else "left"
        idx = np.clip(np.searchsorted(bp, xs, side=srt) - 1, 0, len(self.segments) - 1)
        for j in np.unique(idx):
            sel = idx == j
            uj, duj = self.segments[j].eval(xs[sel])
            u[sel] = uj
            du[sel] = duj
        u *= self.scale
        du *= self.scale
        if scalar:
            return float(u[0]), float(du[0])
        return u, du

    def u(self, x, side: str | None = None):
        return self.eval(x, side)[0]

    def du(self, x, side: str | None = None):
        return self.eval(x, side)[1]

    def state_at_left_end(self, j: int) -> StateVector:
        return StateVector(*(self.scale * np.asarray(self.left_states[j])))

    def state_at_right_end(self, j: int) -> StateVector:
        return StateVector(*(self.scale * np.asarray(self.right_states[j])))

    def boundary_state(self, which: str) -> StateVector:
        """State at x=-1 ('left') or x=+1 ('right')."""
        if which == "left":
            return self.state_at_left_end(0)
        return self.state_at_right_end(self.problem.m)

    def transmission_residual(self) -> float:
        """Max relative violation of u(h-0) = delta u(h+0) (and u')."""
        worst = 0.0
        for i, d in enumerate(self.problem.jumps):
            um, dum = self.right_states[i]
            up, dup = self.left_states[i + 1]
            scale = max(abs(um), abs(dum), abs(up), abs(dup), 1e-300)
            worst = max(worst,
                        abs(um - d * up) / scale,
                        abs(dum - d * dup) / scale)
        return worst

    def ode_residual(self, samples_per_piece: int = 7, fd_step: float = 1e-5) -> float:
        """Max relative defect of -u'' + q u = lambda u on interior samples.

        u'' is taken as a centered difference of the stored derivative, so
        this measures the trajectory's internal consistency.
        """
        worst = 0.0
        for j, (a, b) in enumerate(self.problem.subintervals()):
            pad = (b - a) * 0.05 + fd_step
            xs = np.linspace(a + pad, b - pad, samples_per_piece)
            u, _ = self.eval(xs)
            _, dup = self.eval(xs + fd_step)
            _, dum = self.eval(xs - fd_step)
            upp = (dup - dum) / (2.0 * fd_step)
            q = self.problem.pieces[j].evaluate(xs)
            resid = np.abs(upp - (q - self.lam) * u)
            scale = max(float(np.max(np.abs(u))) * max(abs(self.lam), 1.0), 1e-12)
            worst = max(worst, float(np.max(resid)) / scale)
        return worst

    def scaled(self, c: float) -> "PiecewiseSolution":
        return replace(self, scale=self.scale * c)

    def to_csv(self, path, samples_per_piece: int = 200) -> None:
        """Dump the trajectory as CSV columns (x, u, du)."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "u", "du"])
            for a, b in self.problem.subintervals():
                xs = np.linspace(a, b, samples_per_piece)
                u, du = self.eval(xs)
                for xi, ui, dui in zip(xs, u, du):
                    writer.writerow([repr(float(xi)), repr(float(ui)), repr(float(dui))])


def shoot_phi(problem, lam: float, *, abs_tol: float = DEFAULT_ABS_TOL,
              rel_tol: float = DEFAULT_REL_TOL) -> PiecewiseSolution:
    """Left solution: starts at x=-1 with (alpha_2, -alpha_1).

    Crossing interface i divides the state by delta_i, which enforces the
    transmission conditions exactly.
    """
    vp = as_validated(problem)
    lam = float(lam)
    bp = vp.breakpoints
    u, du = vp.alpha2, -vp.alpha1
    segments, left_states, right_states = [], [], []
    for j, piece in enumerate(vp.pieces):
        left_states.append((u, du))
        seg = _integrate_dense(piece, bp[j], bp[j + 1], lam, (u, du), abs_tol, rel_tol)
        segments.append(seg)
        ub, dub = seg.eval(bp[j + 1])
        u, du = float(ub), float(dub)
        right_states.append((u, du))
        if j < vp.m:
            u /= vp.jumps[j]
            du /= vp.jumps[j]
    return PiecewiseSolution(vp, lam, "left-to-right", segments, left_states, right_states)


def shoot_chi(problem, lam: float, *, abs_tol: float = DEFAULT_ABS_TOL,
              rel_tol: float = DEFAULT_REL_TOL) -> PiecewiseSolution:
    """Right solution: starts at x=1 with (b2'*lam + b2, b1'*lam + b1).

    Integrates right to left; crossing interface i multiplies the state by
    delta_i. By construction it satisfies the lambda-dependent right
    boundary condition for every lambda.
    """
    vp = as_validated(problem)
    lam = float(lam)
    bp = vp.breakpoints
    n_pieces = vp.m + 1
    u = vp.beta2p * lam + vp.beta2
    du = vp.beta1p * lam + vp.beta1
    segments = [None] * n_pieces
    left_states = [None] * n_pieces
    right_states = [None] * n_pieces
    for j in range(n_pieces - 1, -1, -1):
        right_states[j] = (u, du)
        seg = _integrate_dense(vp.pieces[j], bp[j + 1], bp[j], lam, (u, du), abs_tol, rel_tol)
        segments[j] = seg
        ua, dua = seg.eval(bp[j])
        u, du = float(ua), float(dua)
        left_states[j] = (u, du)
        if j > 0:
            u *= vp.jumps[j - 1]
            du *= vp.jumps[j - 1]
    return PiecewiseSolution(vp, lam, "right-to-left", segments, left_states, right_states)


# ----------------------------------------------------------------------
# Picard (successive approximation) cross-check
# ----------------------------------------------------------------------

class _PanelGL:
    """Composite Gauss-Legendre panels with cumulative partial integrals.

    Holds the node layout on [a, b]; integrands are supplied as node-value
    arrays. Partial integrals up to an arbitrary point reuse the same rule
    on the subrange, interpolating the integrand from the panel's nodes
    (barycentric, same reference nodes for every panel).
    """

    def __init__(self, a: float, b: float, n_panels: int, n_nodes: int = 12):
        self.a = a
        self.b = b
        self.edges = np.linspace(a, b, n_panels + 1)
        xr, wr = _gauss_rule(n_nodes)
        self.ref_x = xr
        self.ref_w = wr
        half = 0.5 * (self.edges[1:] - self.edges[:-1])
        mid = 0.5 * (self.edges[1:] + self.edges[:-1])
        self.nodes = mid[:, None] + half[:, None] * xr[None, :]   # (P, g)
        self.node_w = half[:, None] * wr[None, :]
        # Barycentric weights for the reference nodes.
        diff = xr[:, None] - xr[None, :]
        np.fill_diagonal(diff, 1.0)
        self.bary_w = 1.0 / np.prod(diff, axis=1)

    def interp(self, values, panel: int, x):
        """Barycentric interpolation of node values within one panel."""
        lo, hi = self.edges[panel], self.edges[panel + 1]
        t = 2.0 * (np.asarray(x, float) - lo) / (hi - lo) - 1.0
        t = np.atleast_1d(t)
        num = np.zeros_like(t)
        den = np.zeros_like(t)
        exact = np.full(t.shape, -1, dtype=int)
        for k, tk in enumerate(self.ref_x):
            d = t - tk
            hit = np.abs(d) < 1e-14
            exact[hit] = k
            d[hit] = 1.0
            c = self.bary_w[k] / d
            num += c * values[panel, k]
            den += c
        out = num / den
        fix = exact >= 0
        if np.any(fix):
            out[fix] = values[panel, exact[fix]]
        return out

    def cumulative_at_edges(self, values):
        """Integral from a to each panel edge given integrand node values."""
        per_panel = np.sum(values * self.node_w, axis=1)
        return np.concatenate([[0.0], np.cumsum(per_panel)])

    def partial(self, values, cum_edges, x: float) -> float:
        """Integral from a to x."""
        p = int(np.searchsorted(self.edges, x, side="right")) - 1
        p = max(0, min(p, len(self.edges) - 2))
        lo = self.edges[p]
        if x <= lo:
            return float(cum_edges[p])
        half = 0.5 * (x - lo)
        mid = 0.5 * (x + lo)
        sub_x = mid + half * self.ref_x
        sub_v = self.interp(values, p, sub_x)
        return float(cum_edges[p] + half * np.dot(self.ref_w, sub_v))


class PicardSegment:
    """Trajectory on one piece in the integral-equation representation.

    u(x) = A cos(s(x-a)) + (B/s) sin(s(x-a))
           + (1/s) * [sin(sx) * Ic(x) - cos(sx) * Is(x)]

    where Ic, Is are the running integrals of cos(sy) q(y) u(y) and
    sin(sy) q(y) u(y). The derivative swaps the trig factors accordingly.
    """

    def __init__(self, a, b, s, A, B, grid: _PanelGL, node_u, piece):
        self.a = a
        self.b = b
        self.s = s
        self.A = A
        self.B = B
        self.grid = grid
        self.node_u = node_u
        q_nodes = piece.evaluate(grid.nodes)
        self._gc = np.cos(s * grid.nodes) * q_nodes * node_u
        self._gs = np.sin(s * grid.nodes) * q_nodes * node_u
        self._cum_c = grid.cumulative_at_edges(self._gc)
        self._cum_s = grid.cumulative_at_edges(self._gs)

    def eval(self, x):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        u = np.empty_like(xs)
        du = np.empty_like(xs)
        s, A, B = self.s, self.A, self.B
        for i, xi in enumerate(xs):
            t = xi - self.a
            ic = self.grid.partial(self._gc, self._cum_c, xi)
            is_ = self.grid.partial(self._gs, self._cum_s, xi)
            u[i] = (A * np.cos(s * t) + (B / s) * np.sin(s * t)
                    + (np.sin(s * xi) * ic - np.cos(s * xi) * is_) / s)
            du[i] = (-A * s * np.sin(s * t) + B * np.cos(s * t)
                     + np.cos(s * xi) * ic + np.sin(s * xi) * is_)
        if np.asarray(x).ndim == 0:
            return float(u[0]), float(du[0])
        return u, du


def picard_phi(problem, lam: float, iterations: int = 30, *,
               tol: float = 1e-9, nodes_per_panel: int = 12) -> PiecewiseSolution:
    """Left solution by successive approximation of the integral equations.

    Independent of the differential integrators: each subinterval solves

        u(x) = u(a) cos(s(x-a)) + (u'(a)/s) sin(s(x-a))
               + (1/s) int_a^x sin(s(x-y)) q(y) u(y) dy

    by Picard iteration on composite Gauss-Legendre panels (panel count tied
    to |s|), chaining interface values with the 1/delta jumps. Requires
    lambda = s^2 > 0. Raises NonConvergence if the final update is still
    above tol relative to the solution size.
    """
    vp = as_validated(problem)
    lam = float(lam)
    if lam <= 0.0:
        raise ValueError("picard_phi requires lambda = s^2 with s real and nonzero")
    s = float(np.sqrt(lam))

    segments, left_states, right_states = [], [], []
    u0, du0 = vp.alpha2, -vp.alpha1
    bp = vp.breakpoints
    worst_update = 0.0
    update_history = []
    for j, piece in enumerate(vp.pieces):
        a, b = bp[j], bp[j + 1]
        n_panels = max(2, int(np.ceil((b - a) * (abs(s) + 4.0) / np.pi)))
        grid = _PanelGL(a, b, n_panels, nodes_per_panel)
        xs = grid.nodes
        t = xs - a
        A, B = u0, du0
        base = A * np.cos(s * t) + (B / s) * np.sin(s * t)
        q_nodes = piece.evaluate(xs)
        cos_sx = np.cos(s * xs)
        sin_sx = np.sin(s * xs)
        u_nodes = base.copy()
        update = np.inf
        piece_updates = []
        for _ in range(iterations):
            gc = cos_sx * q_nodes * u_nodes
            gs = sin_sx * q_nodes * u_nodes
            cum_c = grid.cumulative_at_edges(gc)
            cum_s = grid.cumulative_at_edges(gs)
            new_u = np.empty_like(u_nodes)
            for p in range(xs.shape[0]):
                for k in range(xs.shape[1]):
                    xi = xs[p, k]
                    ic = grid.partial(gc, cum_c, xi)
                    is_ = grid.partial(gs, cum_s, xi)
                    new_u[p, k] = base[p, k] + (sin_sx[p, k] * ic - cos_sx[p, k] * is_) / s
            update = float(np.max(np.abs(new_u - u_nodes)))
            piece_updates.append(update)
            u_nodes = new_u
            if update == 0.0:
                break
        update_history.append(piece_updates)
        scale = max(1.0, float(np.max(np.abs(u_nodes))))
        worst_update = max(worst_update, update / scale)
        seg = PicardSegment(a, b, s, A, B, grid, u_nodes, piece)
        segments.append(seg)
        left_states.append((u0, du0))
        ub, dub = seg.eval(b)
        right_states.append((ub, dub))
        u0, du0 = ub, dub
        if j < vp.m:
            u0 /= vp.jumps[j]
            du0 /= vp.jumps[j]
    if worst_update > tol:
        raise NonConvergence(
            f"picard update still {worst_update:.3e} after {iterations} iterations"
        )
    sol = PiecewiseSolution(vp, lam, "left-to-right", segments, left_states, right_states)
    sol.picard_updates = update_history
    return sol
