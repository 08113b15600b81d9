"""The characteristic function omega(lambda) and its diagnostics.

omega is the Wronskian of the two shot solutions on the first subinterval;
its zeros are exactly the eigenvalues. Since the Wronskian picks up a
delta_i^2 factor at each interface, the per-subinterval Wronskians omega_i
satisfy the chain

    omega_1 = delta_1^2 omega_2 = delta_1^2 delta_2^2 omega_3 = ...

which doubles as a bookkeeping diagnostic: `omega_per_interval` fills the
chain residuals. The production path (`omega`) never computes the right
solution at all; the right boundary data makes

    omega(lambda) = prod(delta_i^2) * [(lambda b1' + b1) u(1) - (lambda b2' + b2) u'(1)]

with u the left solution, and that is one endpoint propagation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import propagator
from .problem import as_validated


class MismatchedLambda(ValueError):
    """Wronskian of two solutions evaluated at different lambda."""


@dataclass
class CharacteristicSample:
    """One evaluation of the characteristic function with diagnostics.

    omega_i[i] is the Wronskian of the two shot solutions on subinterval i
    (at its midpoint). chain_residuals[i] = omega - (prod of the first i
    delta^2 factors) * omega_i, which vanishes in exact arithmetic.
    """

    lam: float
    omega: float
    omega_i: list[float]
    chain_residuals: list[float]
    metadata: dict = field(default_factory=dict)

    @property
    def chain_residual_max(self) -> float:
        return max(abs(r) for r in self.chain_residuals)

    def chain_residual_rel(self) -> float:
        return self.chain_residual_max / max(1.0, abs(self.omega))


def wronskian_at(f, g, x: float, side: str | None = None) -> float:
    """f(x) g'(x) - f'(x) g(x) with the requested one-sided values."""
    if f.lam != g.lam:
        raise MismatchedLambda(f"lambda mismatch: {f.lam} vs {g.lam}")
    fu, fdu = f.eval(x, side)
    gu, gdu = g.eval(x, side)
    return fu * gdu - fdu * gu


def omega(problem, lam, *, rtol: float = 1e-12):
    """Characteristic function via the left solution only.

    Vectorized: lam may be a scalar or an array. The right solution never
    enters; its boundary data appears through the closed boundary form.
    Complex lam is supported (the function is entire in lambda).
    """
    vp = as_validated(problem)
    lam_arr = np.asarray(lam)
    if not np.iscomplexobj(lam_arr):
        lam_arr = lam_arr.astype(float)
    form = propagator.phi_boundary_form(vp, lam_arr, rtol=rtol)
    out = vp.delta_sq_prod * form
    if np.ndim(lam) == 0:
        return complex(out) if np.iscomplexobj(out) else float(out)
    return out


def omega_per_interval(problem, lam: float, *, rtol: float = 1e-12) -> CharacteristicSample:
    """Evaluate every per-subinterval Wronskian and the chain residuals.

    Both shot solutions are propagated to each subinterval midpoint (the
    Wronskian is constant inside a subinterval, and midpoints stay clear of
    the one-sided ambiguity at the interfaces).
    """
    samples = omega_samples(problem, [lam], rtol=rtol)
    return samples[0]


def omega_samples(problem, lams, *, rtol: float = 1e-12) -> list[CharacteristicSample]:
    """Batched omega_per_interval over an array of lambda."""
    vp = as_validated(problem)
    lam_arr = np.atleast_1d(np.asarray(lams, dtype=float))
    phi = propagator.phi_chain(vp, lam_arr, rtol=rtol)
    chi = propagator.chi_chain(vp, lam_arr, rtol=rtol)
    omega_fast = omega(vp, lam_arr, rtol=rtol)

    mids = [0.5 * (a + b) for a, b in vp.subintervals()]
    omega_cols = []
    for j, xm in enumerate(mids):
        pu, pdu = propagator.propagate_piece(
            vp.pieces[j], vp.breakpoints[j], xm, lam_arr,
            phi.left[j], phi.dleft[j], rtol=rtol)
        cu, cdu = propagator.propagate_piece(
            vp.pieces[j], vp.breakpoints[j + 1], xm, lam_arr,
            chi.right[j], chi.dright[j], rtol=rtol)
        omega_cols.append(pu * cdu - pdu * cu)

    out = []
    for k, lamk in enumerate(lam_arr):
        w_prefix = 1.0
        om1 = float(omega_cols[0][k])
        omis = []
        resids = []
        for j in range(vp.m + 1):
            if j > 0:
                w_prefix *= vp.jumps[j - 1] ** 2
            omij = float(omega_cols[j][k])
            omis.append(omij)
            resids.append(om1 - w_prefix * omij)
        out.append(CharacteristicSample(
            lam=float(lamk),
            omega=om1,
            omega_i=omis,
            chain_residuals=resids,
            metadata={"rtol": rtol, "omega_boundary_form": float(np.atleast_1d(omega_fast)[k])},
        ))
    return out


def omega_derivative(problem, lam: float, h: float | None = None, *,
                     richardson: bool = True, rtol: float = 1e-12,
                     method: str = "central") -> float:
    """d omega / d lambda.

    method='central' (default) uses central differences with step
    h = max(1e-6, 1e-8 |lambda|) unless overridden; with richardson=True
    the h and h/2 differences are extrapolated, killing the O(h^2) term.
    method='complex' evaluates omega at lambda + i*h_c with a tiny h_c and
    takes Im(omega)/h_c, which has no subtractive cancellation; omega is
    entire in lambda, so this is exact to roundoff. Near a root, where the
    central difference loses digits to the integrator noise floor, the
    complex step is the right choice.
    """
    vp = as_validated(problem)
    lam = float(lam)
    if method == "complex":
        hc = 1e-150
        val = omega(vp, complex(lam, hc), rtol=rtol)
        return float(val.imag / hc)
    if method != "central":
        raise ValueError(f"unknown derivative method {method!r}")
    if h is None:
        h = max(1e-6, 1e-8 * abs(lam))
    if h <= 0:
        raise ValueError("step h must be positive")

    def central(step):
        vals = omega(vp, np.array([lam + step, lam - step]), rtol=rtol)
        return (vals[0] - vals[1]) / (2.0 * step)

    d1 = central(h)
    if not richardson:
        return float(d1)
    d2 = central(h / 2.0)
    return float((4.0 * d2 - d1) / 3.0)


def write_scan_csv(samples: list[CharacteristicSample], path) -> None:
    """CSV scan dump: lambda, s (when lambda >= 0), omega, each omega_i,
    and the worst chain residual."""
    if not samples:
        raise ValueError("no samples to write")
    n_intervals = len(samples[0].omega_i)
    header = ["lambda", "s_if_nonneg", "omega"]
    header += [f"omega{i + 1}" for i in range(n_intervals)]
    header += ["chain_residual_max"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for sam in samples:
            s = np.sqrt(sam.lam) if sam.lam >= 0 else ""
            row = [repr(sam.lam), repr(float(s)) if s != "" else "", repr(sam.omega)]
            row += [repr(v) for v in sam.omega_i]
            row += [repr(sam.chain_residual_max)]
            writer.writerow(row)
