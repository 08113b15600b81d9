"""Fast endpoint propagation of u'' = (q(x) - lambda) u across subintervals.

This module powers characteristic-function scans and root refinement, where
only boundary/interface states are needed and the same problem is evaluated
at many lambda. States are propagated with 2x2 transfer matrices:

* constant-q pieces use the exact trigonometric/hyperbolic matrix in a
  single step;
* variable-q pieces use a fourth-order Magnus scheme on two-point Gauss
  nodes with step doubling until the endpoint state stabilizes. The scheme
  reduces to the exact matrix when q is constant, and its error constant
  depends on the variation of q rather than on lambda, so large-lambda
  scans stay cheap.

All functions are vectorized over a lambda array. Dense (plottable)
trajectories live in :mod:`sltrans.ode`; this module intentionally only
returns states at requested points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import ValidatedProblem, as_validated

_SQRT3 = np.sqrt(3.0)
_GAUSS_OFFSETS = (0.5 - _SQRT3 / 6.0, 0.5 + _SQRT3 / 6.0)


class NonFiniteState(RuntimeError):
    """Propagation produced a NaN or infinity."""


class StepSizeUnderflow(RuntimeError):
    """Step refinement hit its budget without stabilizing."""


def cos_sinc(z):
    """Stable (C, S) with C = cos(sqrt(-z)) and S = sin(sqrt(-z))/sqrt(-z).

    For z > 0 the pair continues to (cosh(sqrt(z)), sinh(sqrt(z))/sqrt(z));
    near z = 0 a Taylor series avoids the 0/0. Both are entire functions of
    z, which is what makes the propagation seamless across lambda = q.

    Complex z is accepted too (the entire-function branch applies), which
    lets callers differentiate in lambda by a complex step.
    """
    z = np.asarray(z)
    if np.iscomplexobj(z):
        shape = z.shape
        z = np.atleast_1d(z).astype(complex)
        C = np.empty_like(z)
        S = np.empty_like(z)
        small = np.abs(z) < 1e-8
        big = ~small
        if np.any(big):
            r = np.sqrt(z[big])
            C[big] = np.cosh(r)
            S[big] = np.sinh(r) / r
        if np.any(small):
            zs = z[small]
            C[small] = 1.0 + zs / 2.0 + zs * zs / 24.0
            S[small] = 1.0 + zs / 6.0 + zs * zs / 120.0
        return C.reshape(shape), S.reshape(shape)
    z = np.asarray(z, dtype=float)
    shape = z.shape
    z = np.atleast_1d(z)
    C = np.empty_like(z)
    S = np.empty_like(z)
    small = np.abs(z) < 1e-8
    pos = (z >= 1e-8)
    neg = (z <= -1e-8)
    if np.any(pos):
        r = np.sqrt(z[pos])
        C[pos] = np.cosh(r)
        S[pos] = np.sinh(r) / r
    if np.any(neg):
        r = np.sqrt(-z[neg])
        C[neg] = np.cos(r)
        S[neg] = np.sin(r) / r
    if np.any(small):
        zs = z[small]
        C[small] = 1.0 + zs / 2.0 + zs * zs / 24.0
        S[small] = 1.0 + zs / 6.0 + zs * zs / 120.0
    return C.reshape(shape), S.reshape(shape)


def constant_step(w, t, u, du):
    """Exact transfer over a step of length t with constant w = q - lambda."""
    z = w * t * t
    C, S = cos_sinc(z)
    u_new = C * u + t * S * du
    du_new = w * t * S * u + C * du
    return u_new, du_new


def _magnus_pass(qvals, h, lam, u, du):
    """One sweep of fourth-order Magnus steps.

    qvals has shape (n_steps, 2): the potential at the two Gauss nodes of
    each step. h is the signed step. lam, u, du are broadcastable arrays.

    All step matrices are formed at once (vectorized over steps and over
    the lambda batch) and combined by pairwise products, so the Python-level
    work is log2(n_steps) array operations instead of n_steps of them. The
    pairing keeps chronological order: entry 2k+1 acts after entry 2k, and
    an odd leftover (the latest block) stays at the tail for the next level.
    """
    target = np.broadcast_shapes(np.shape(lam), np.shape(u), np.shape(du))
    lam_f = np.reshape(np.broadcast_to(np.asarray(lam), target), (1, -1))
    u0 = np.reshape(np.broadcast_to(np.asarray(u), target), (-1,))
    du0 = np.reshape(np.broadcast_to(np.asarray(du), target), (-1,))

    q1 = qvals[:, 0][:, None]
    q2 = qvals[:, 1][:, None]
    wbar = 0.5 * (q1 + q2) - lam_f
    d = (-(_SQRT3 * h * h / 12.0)) * (q2 - q1)
    z = d * d + (h * h) * wbar
    C, S = cos_sinc(z)
    e11 = C + S * d
    e22 = C - S * d
    e12 = S * h + np.zeros_like(C)
    e21 = S * h * wbar

    while e11.shape[0] > 1:
        m = e11.shape[0]
        even = (m // 2) * 2
        a11, a12 = e11[1:even:2], e12[1:even:2]
        a21, a22 = e21[1:even:2], e22[1:even:2]
        b11, b12 = e11[0:even:2], e12[0:even:2]
        b21, b22 = e21[0:even:2], e22[0:even:2]
        c11 = a11 * b11 + a12 * b21
        c12 = a11 * b12 + a12 * b22
        c21 = a21 * b11 + a22 * b21
        c22 = a21 * b12 + a22 * b22
        if m % 2:
            c11 = np.concatenate([c11, e11[-1:]])
            c12 = np.concatenate([c12, e12[-1:]])
            c21 = np.concatenate([c21, e21[-1:]])
            c22 = np.concatenate([c22, e22[-1:]])
        e11, e12, e21, e22 = c11, c12, c21, c22

    u_new = e11[0] * u0 + e12[0] * du0
    du_new = e21[0] * u0 + e22[0] * du0
    return u_new.reshape(target), du_new.reshape(target)


def _piece_node_q(piece, x0: float, x1: float, n_steps: int):
    """Potential values at the Magnus Gauss nodes of each step."""
    h = (x1 - x0) / n_steps
    starts = x0 + h * np.arange(n_steps)
    xs = starts[:, None] + h * np.asarray(_GAUSS_OFFSETS)[None, :]
    return piece.evaluate(xs), h


def propagate_piece(piece, x0: float, x1: float, lam, u, du, *, rtol: float = 1e-12):
    """Propagate a state across one potential piece from x0 to x1.

    x1 < x0 integrates backwards. Constant pieces are exact in one step;
    otherwise the Magnus step count doubles until the endpoint state moves
    by less than rtol (relative to the state magnitude).
    """
    if x1 == x0:
        return u, du
    lam = np.asarray(lam)
    if not np.iscomplexobj(lam):
        lam = lam.astype(float)
    if piece.is_constant:
        w = piece.constant_value - lam
        return constant_step(w, x1 - x0, u, du)

    length = abs(x1 - x0)
    n = max(8, int(np.ceil(16 * length)))
    qv, h = _piece_node_q(piece, x0, x1, n)
    cur = _magnus_pass(qv, h, lam, u, du)
    for _ in range(9):
        n *= 2
        qv, h = _piece_node_q(piece, x0, x1, n)
        nxt = _magnus_pass(qv, h, lam, u, du)
        scale = np.maximum(np.maximum(np.abs(nxt[0]), np.abs(nxt[1])), 1.0)
        gap = np.maximum(np.abs(nxt[0] - cur[0]), np.abs(nxt[1] - cur[1]))
        if np.all(gap <= rtol * scale):
            if not (np.all(np.isfinite(nxt[0])) and np.all(np.isfinite(nxt[1]))):
                raise NonFiniteState("propagation produced non-finite values")
            return nxt
        cur = nxt
    raise StepSizeUnderflow(
        f"piece [{x0}, {x1}] did not stabilize within {n} Magnus steps"
    )


@dataclass
class ChainStates:
    """States of a shot solution at every piece boundary.

    left[j] / dleft[j] hold (u, u') at the left end of subinterval j and
    right[j] / dright[j] at its right end, after the interface jumps have
    been applied. Each entry is an array over the lambda batch.
    """

    lam: np.ndarray
    left: list
    dleft: list
    right: list
    dright: list


def phi_chain(problem, lam, *, rtol: float = 1e-12) -> ChainStates:
    """Left-endpoint solution states across all subintervals.

    Starts at x = -1 with (alpha_2, -alpha_1); crossing an interface divides
    the state by the jump factor, so the one-sided values satisfy
    u(h-0) = delta * u(h+0) exactly.
    """
    vp = as_validated(problem)
    lam = np.asarray(lam)
    if not np.iscomplexobj(lam):
        lam = lam.astype(float)
    u = np.full_like(lam, vp.alpha2)
    du = np.full_like(lam, -vp.alpha1)
    left, dleft, right, dright = [], [], [], []
    bp = vp.breakpoints
    for j, piece in enumerate(vp.pieces):
        left.append(u)
        dleft.append(du)
        u, du = propagate_piece(piece, bp[j], bp[j + 1], lam, u, du, rtol=rtol)
        right.append(u)
        dright.append(du)
        if j < vp.m:
            inv = 1.0 / vp.jumps[j]
            u = u * inv
            du = du * inv
    return ChainStates(lam=lam, left=left, dleft=dleft, right=right, dright=dright)


def chi_chain(problem, lam, *, rtol: float = 1e-12) -> ChainStates:
    """Right-endpoint solution states across all subintervals.

    Starts at x = 1 with (beta_2'*lambda + beta_2, beta_1'*lambda + beta_1)
    and integrates right to left; crossing an interface multiplies the state
    by the jump factor.
    """
    vp = as_validated(problem)
    lam = np.asarray(lam)
    if not np.iscomplexobj(lam):
        lam = lam.astype(float)
    u = np.asarray(vp.beta2p * lam + vp.beta2) + np.zeros_like(lam)
    du = np.asarray(vp.beta1p * lam + vp.beta1) + np.zeros_like(lam)
    n_pieces = vp.m + 1
    left = [None] * n_pieces
    dleft = [None] * n_pieces
    right = [None] * n_pieces
    dright = [None] * n_pieces
    bp = vp.breakpoints
    for j in range(n_pieces - 1, -1, -1):
        right[j] = u
        dright[j] = du
        u, du = propagate_piece(vp.pieces[j], bp[j + 1], bp[j], lam, u, du, rtol=rtol)
        left[j] = u
        dleft[j] = du
        if j > 0:
            d = vp.jumps[j - 1]
            u = u * d
            du = du * d
    return ChainStates(lam=lam, left=left, dleft=dleft, right=right, dright=dright)


def states_at(problem, chain: ChainStates, x: float, direction: str, *, rtol: float = 1e-12):
    """Propagate a chained solution to an interior point of its subinterval.

    direction 'ltr' continues from the left end of the containing piece,
    'rtl' from its right end; x must not be an interface point.
    """
    vp = as_validated(problem)
    j = vp.subinterval_index(x)
    bp = vp.breakpoints
    if direction == "ltr":
        return propagate_piece(vp.pieces[j], bp[j], x, chain.lam,
                               chain.left[j], chain.dleft[j], rtol=rtol)
    return propagate_piece(vp.pieces[j], bp[j + 1], x, chain.lam,
                           chain.right[j], chain.dright[j], rtol=rtol)


def phi_boundary_form(problem, lam, *, rtol: float = 1e-12):
    """(lambda*b1' + b1)*u(1) - (lambda*b2' + b2)*u'(1) for the left solution.

    The characteristic function is delta_sq_prod times this; see
    :func:`sltrans.characteristic.omega`.
    """
    vp = as_validated(problem)
    lam = np.asarray(lam)
    if not np.iscomplexobj(lam):
        lam = lam.astype(float)
    chain = phi_chain(vp, lam, rtol=rtol)
    u1 = chain.right[-1]
    du1 = chain.dright[-1]
    return (vp.beta1p * lam + vp.beta1) * u1 - (vp.beta2p * lam + vp.beta2) * du1
