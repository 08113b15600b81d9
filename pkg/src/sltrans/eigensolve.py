"""Eigenvalue enumeration and eigenvector construction.

The eigenvalues are exactly the zeros of the characteristic function, they
are real and simple, and they are bounded below. That shapes the solver:

1. scan omega over a grid that is uniform in s = sqrt(lambda) for
   lambda >= 0 (roots space out like pi/2 in s) and uniform in lambda on a
   validated negative tail,
2. collect sign-change brackets, re-examine any deep |omega| dip that lacks
   a sign change on a 10x finer local grid,
3. refine all brackets together by vectorized bisection (every iteration is
   one batched omega evaluation), optionally polishing single roots with
   Brent's method,
4. for each root build the left solution, the ratio linking it to the right
   solution, the derivative of omega, the norm-identity diagnostics, and a
   normalized eigenvector.

Simplicity is enforced, not assumed: a root whose |omega'| falls under a
small fraction of the local omega scale, or a spacing gap wide enough to
hide a root, raises SuspectedMissedRoot rather than returning quietly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import asymptotics
from .characteristic import omega, omega_derivative
from .hilbert import r1_form, r1p_form
from .ode import PiecewiseSolution, shoot_chi, shoot_phi
from .problem import as_validated, classify_case
from .quadrature import fixed_quad

S_SCAN_STEP = np.pi / 16.0
NEG_SCAN_STEP = 0.5
DIP_THRESHOLD = 1e-6
GAP_LIMIT = 0.75 * np.pi
OMEGA_PRIME_MARGIN = 1e-4
DUPLICATE_REL_TOL = 1e-9


class LostBracket(RuntimeError):
    """A bracket handed to refinement no longer straddles a sign change."""


class SuspectedMissedRoot(RuntimeError):
    """Diagnostics indicate the enumeration may have skipped an eigenvalue."""


class DegeneratePhi(RuntimeError):
    """The left solution vanished identically on the sample grid."""


# ----------------------------------------------------------------------
# Scanning
# ----------------------------------------------------------------------

@dataclass
class ScanResult:
    """Grid samples of omega plus the brackets and dip flags found in them."""

    lams: np.ndarray
    omegas: np.ndarray
    brackets: list
    suspicious: list
    s_max: float
    lam_floor: float

    def local_scale(self, lam: float, window: int = 16) -> float:
        """Median |omega| among the scan samples nearest lam."""
        i = int(np.searchsorted(self.lams, lam))
        lo = max(0, i - window // 2)
        hi = min(len(self.lams), lo + window)
        lo = max(0, hi - window)
        return float(np.median(np.abs(self.omegas[lo:hi])))


def default_lambda_floor(problem) -> float:
    """Heuristic lower bound for the scan; over-covers and gets validated.

    The spectrum is bounded below but no closed-form bound is available, so
    the floor combines the potential magnitude with the boundary data sizes
    and is certified afterwards by a constant-sign check on [2*floor, floor].
    """
    vp = as_validated(problem)
    bc = (abs(vp.alpha1) / max(abs(vp.alpha2), 1.0)
          + abs(vp.beta1) + abs(vp.beta2) + abs(vp.beta1p) + abs(vp.beta2p))
    return -(2.0 * vp.max_potential_bound() + bc * bc + 10.0)


def validate_floor(problem, lam_floor: float, *, rtol: float = 1e-12,
                   n_samples: int = 33) -> bool:
    """True when omega keeps one sign (and never vanishes) on [2*floor, floor]."""
    lo = 2.0 * lam_floor
    grid = np.linspace(lo, lam_floor, n_samples)
    vals = omega(problem, grid, rtol=rtol)
    if np.any(vals == 0.0):
        return False
    return bool(np.all(vals > 0.0) or np.all(vals < 0.0))


def bracket_scan(problem, s_max: float, lam_floor: float | None = None, *,
                 rtol: float = 1e-12, s_step: float = S_SCAN_STEP,
                 refine_dips: bool = True) -> ScanResult:
    """Find all sign-change brackets of omega on [lam_floor, s_max^2].

    The positive side is sampled uniformly in s with step s_step (default
    pi/16, four points per asymptotic half-gap); the negative side uniformly
    in lambda. Deep dips of |omega| without a sign change are resampled on a
    10x finer local grid; if they still refuse to change sign they are
    reported in `suspicious` rather than swallowed.
    """
    vp = as_validated(problem)
    if s_max <= 0:
        raise ValueError("s_max must be positive")
    if lam_floor is None:
        lam_floor = default_lambda_floor(vp)
    if lam_floor >= 0:
        raise ValueError("lam_floor must be negative")

    n_neg = max(8, int(np.ceil(abs(lam_floor) / NEG_SCAN_STEP)))
    neg = np.linspace(lam_floor, 0.0, n_neg, endpoint=False)
    n_pos = int(np.ceil(s_max / s_step)) + 1
    pos = (np.arange(n_pos + 1) * s_step) ** 2
    lams = np.concatenate([neg, pos])
    oms = np.asarray(omega(vp, lams, rtol=rtol))

    brackets, suspicious = _sift(vp, lams, oms, rtol, refine_dips)
    return ScanResult(lams=lams, omegas=oms, brackets=brackets,
                      suspicious=suspicious, s_max=float(s_max),
                      lam_floor=float(lam_floor))


def _sift(vp, lams, oms, rtol, refine_dips):
    """Extract sign-change brackets and unresolved dips from scan samples."""
    sgn = np.sign(oms)
    brackets = []
    suspicious = []

    for i in np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]:
        brackets.append((float(lams[i]), float(lams[i + 1])))

    # A grid point landing exactly on a zero: bracket it against both
    # neighbors if possible, otherwise flag it.
    for i in np.nonzero(sgn == 0)[0]:
        left = lams[i - 1] if i > 0 else lams[i] - 1e-6
        right = lams[i + 1] if i + 1 < len(lams) else lams[i] + 1e-6
        fl = float(omega(vp, float(left), rtol=rtol))
        fr = float(omega(vp, float(right), rtol=rtol))
        if fl * fr < 0:
            brackets.append((float(left), float(right)))
        else:
            suspicious.append({"lam": float(lams[i]), "omega": 0.0,
                               "note": "exact zero on grid, no sign change around"})

    if refine_dips:
        med = float(np.median(np.abs(oms[oms != 0]))) if np.any(oms != 0) else 0.0
        for i in range(1, len(lams) - 1):
            if sgn[i] == 0:
                continue
            a_mag, b_mag, c_mag = np.abs(oms[i - 1: i + 2])
            local = max(np.median(np.abs(oms[max(0, i - 8): i + 9])), 1e-12 * med)
            is_dip = (b_mag <= a_mag and b_mag <= c_mag
                      and b_mag < DIP_THRESHOLD * local
                      and sgn[i - 1] * sgn[i] > 0 and sgn[i] * sgn[i + 1] > 0)
            if not is_dip:
                continue
            fine = np.linspace(lams[i - 1], lams[i + 1], 21)
            fv = np.asarray(omega(vp, fine, rtol=rtol))
            fs = np.sign(fv)
            hits = np.nonzero(fs[:-1] * fs[1:] < 0)[0]
            if hits.size:
                for k in hits:
                    brackets.append((float(fine[k]), float(fine[k + 1])))
            else:
                suspicious.append({
                    "lam": float(lams[i]),
                    "omega": float(oms[i]),
                    "local_scale": local,
                    "note": "deep dip without sign change after 10x refinement",
                })
    brackets.sort(key=lambda br: 0.5 * (br[0] + br[1]))
    return brackets, suspicious


# ----------------------------------------------------------------------
# Refinement
# ----------------------------------------------------------------------

def refine_root(problem, bracket, *, rel_tol: float = 1e-12,
                rtol: float = 1e-12) -> float:
    """Polish one sign-change bracket to a root of omega.

    Brent's method, terminating at |b - a| <= rel_tol * max(1, |root|).
    Raises LostBracket if the endpoints no longer straddle a sign change
    (integrator noise near a tangential dip can do that).
    """
    vp = as_validated(problem)
    la, lb = float(bracket[0]), float(bracket[1])
    fa = float(omega(vp, la, rtol=rtol))
    fb = float(omega(vp, lb, rtol=rtol))
    if fa == 0.0:
        return la
    if fb == 0.0:
        return lb
    if fa * fb > 0:
        raise LostBracket(f"omega has the same sign at both ends of [{la}, {lb}]")
    root = brentq(lambda l: float(omega(vp, float(l), rtol=rtol)), la, lb,
                  xtol=rel_tol, rtol=max(rel_tol, 4 * np.finfo(float).eps),
                  maxiter=200)
    return float(root)


def _refine_batch(vp, brackets, *, rel_tol: float = 1e-12,
                  rtol: float = 1e-12, max_iter: int = 90) -> np.ndarray:
    """Bisection on all brackets at once; one batched omega call per step."""
    if not brackets:
        return np.empty(0)
    la = np.array([b[0] for b in brackets], dtype=float)
    lb = np.array([b[1] for b in brackets], dtype=float)
    fa = np.asarray(omega(vp, la, rtol=rtol))
    fb = np.asarray(omega(vp, lb, rtol=rtol))
    bad = fa * fb > 0
    if np.any(bad):
        k = int(np.nonzero(bad)[0][0])
        raise LostBracket(
            f"omega has the same sign at both ends of [{la[k]}, {lb[k]}]")
    sa = np.sign(fa)
    for _ in range(max_iter):
        mid = 0.5 * (la + lb)
        fm = np.asarray(omega(vp, mid, rtol=rtol))
        ms = np.sign(fm)
        exact = ms == 0
        go_left = ms == sa
        la = np.where(go_left, mid, la)
        lb = np.where(go_left, lb, mid)
        la = np.where(exact, mid, la)
        lb = np.where(exact, mid, lb)
        if np.all(lb - la <= rel_tol * np.maximum(1.0, np.abs(mid))):
            break
    return 0.5 * (la + lb)


# ----------------------------------------------------------------------
# Per-root construction
# ----------------------------------------------------------------------

@dataclass
class Eigenpair:
    """One eigenvalue with its normalized eigenvector and diagnostics.

    n is the position in the sorted list (0-based); n_formula is the index
    the first-order root-location formula assigns to this root (None for
    negative eigenvalues, which the formula does not cover). phi is scaled
    so the augmented vector (phi, R1'(phi)) has unit norm in the weighted
    space; scalar is that R1'(phi) value after scaling. k_ratio links the
    canonical right solution to the canonical left one at this eigenvalue,
    and k_spread measures how far the two are from exact proportionality.
    norm_constant is the signed factor taking the canonical left solution
    to phi.
    """

    n: int
    lam: float
    s: float | None
    phi: PiecewiseSolution
    scalar: float
    k_ratio: float
    k_spread: float
    omega_prime: float
    omega_scale: float
    margin: float
    n_formula: int | None
    norm_constant: float
    residuals: dict = field(default_factory=dict)


def _panels_for(a: float, b: float, freq: float) -> int:
    return max(2, int(np.ceil((b - a) * (abs(freq) + 4.0) / 4.0)))


def weighted_square_integral(problem, sol, freq: float | None = None) -> float:
    """sum_j w_j int_j u^2 for a piecewise solution."""
    vp = as_validated(problem)
    if freq is None:
        freq = np.sqrt(abs(sol.lam))
    total = 0.0
    for j, (a, b) in enumerate(vp.subintervals()):
        val = fixed_quad(lambda x: sol.u(x) ** 2, a, b,
                         _panels_for(a, b, 2.0 * freq))
        total += vp.weights[j] * val
    return total


def k_ratio(problem, lam: float, *, phi=None, chi=None,
            samples_per_piece: int = 24):
    """Proportionality factor k with chi = k * phi at an eigenvalue.

    Least squares over a per-subinterval sample grid, weighted like the
    space's inner product. Also returns the relative spread of the
    pointwise ratios over samples where |phi| is at least a tenth of its
    maximum; at a true eigenvalue the spread vanishes with the root
    tolerance, away from one it is O(1).
    """
    vp = as_validated(problem)
    phi = shoot_phi(vp, lam) if phi is None else phi
    chi = shoot_chi(vp, lam) if chi is None else chi

    num = 0.0
    den = 0.0
    pv_all, cv_all = [], []
    for j, (a, b) in enumerate(vp.subintervals()):
        xs = np.linspace(a, b, samples_per_piece + 2)[1:-1]
        pu = phi.u(xs)
        cu = chi.u(xs)
        num += vp.weights[j] * float(pu @ cu)
        den += vp.weights[j] * float(pu @ pu)
        pv_all.append(pu)
        cv_all.append(cu)
    pv = np.concatenate(pv_all)
    cv = np.concatenate(cv_all)
    pmax = float(np.max(np.abs(pv)))
    if pmax <= 1e-300 or den == 0.0:
        raise DegeneratePhi("left solution is numerically zero on the sample grid")
    k = num / den
    big = np.abs(pv) >= 0.1 * pmax
    ratios = cv[big] / pv[big]
    spread = float(np.max(np.abs(ratios - k))) / max(abs(k), 1e-300)
    return float(k), spread


def norm_identity_residual(problem, eig_or_lam, *, rtol: float = 1e-12) -> dict:
    """Check the closed-form value of the weighted square integral of phi.

    At an eigenvalue, sum_j w_j int phi^2 should equal
    omega'(lam)/k - (prod delta_i^2 / k) * R1'(phi), with k the
    proportionality factor between chi and phi. A circulating variant that
    scales omega' by the squared jump product as well,
    (prod delta_i^2 / k) * (omega' - R1'(phi)), disagrees with the symbolic
    evaluation on the simplest closed-form case whenever a jump factor
    differs from 1; both residuals are reported, as is the defect of the
    substitution R1'(phi) * k = rho.
    """
    vp = as_validated(problem)
    lam = float(getattr(eig_or_lam, "lam", eig_or_lam))
    phi = shoot_phi(vp, lam, abs_tol=rtol, rel_tol=rtol)
    chi = shoot_chi(vp, lam, abs_tol=rtol, rel_tol=rtol)
    k, spread = k_ratio(vp, lam, phi=phi, chi=chi)
    omp = _omega_prime(vp, lam, rtol)
    u1, du1 = phi.boundary_state("right")
    r1p_phi = r1p_form(vp, u1, du1)
    lhs = weighted_square_integral(vp, phi)
    d2 = vp.delta_sq_prod

    rhs = omp / k - (d2 / k) * r1p_phi
    rhs_scaled = (d2 / k) * (omp - r1p_phi)
    res = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
    res_scaled = abs(lhs - rhs_scaled) / max(abs(lhs), abs(rhs_scaled), 1e-300)
    subst = abs(r1p_phi * k - vp.rho) / abs(vp.rho)
    return {
        "residual": res,
        "residual_jump_scaled_variant": res_scaled,
        "substitution_residual": subst,
        "lhs": lhs,
        "rhs": rhs,
        "k": k,
        "k_spread": spread,
        "omega_prime": omp,
        "r1p_phi": r1p_phi,
    }


def _omega_prime(vp, lam: float, rtol: float) -> float:
    try:
        return omega_derivative(vp, lam, rtol=rtol, method="complex")
    except Exception:
        return omega_derivative(vp, lam, rtol=rtol)


def normalize(problem, phi: PiecewiseSolution):
    """Scale phi so (phi, R1'(phi)) has unit norm in the weighted space.

    The sign is pinned too: the first nonzero of (phi(-1), phi'(-1)) comes
    out positive. Returns (scaled solution, signed scale factor).
    """
    vp = as_validated(problem)
    u1, du1 = phi.boundary_state("right")
    r1p_phi = r1p_form(vp, u1, du1)
    nsq = weighted_square_integral(vp, phi) + (vp.delta_sq_prod / vp.rho) * r1p_phi ** 2
    if nsq <= 0.0 or not np.isfinite(nsq):
        raise DegeneratePhi(f"norm^2 = {nsq} is not positive")
    c = 1.0 / np.sqrt(nsq)
    um, dum = phi.eval(-1.0)
    lead = um if um != 0.0 else dum
    if lead < 0:
        c = -c
    return phi.scaled(c), c


def build_eigenpair(problem, lam: float, *, n: int = -1,
                    scan: ScanResult | None = None,
                    rtol: float = 1e-12) -> Eigenpair:
    """Assemble the full Eigenpair record for one refined root."""
    vp = as_validated(problem)
    lam = float(lam)
    s = float(np.sqrt(lam)) if lam >= 0.0 else None

    phi = shoot_phi(vp, lam, abs_tol=rtol, rel_tol=rtol)
    chi = shoot_chi(vp, lam, abs_tol=rtol, rel_tol=rtol)
    k, spread = k_ratio(vp, lam, phi=phi, chi=chi)
    omp = _omega_prime(vp, lam, rtol)
    om_here = float(omega(vp, lam, rtol=rtol))

    u1, du1 = phi.boundary_state("right")
    r1p_phi = r1p_form(vp, u1, du1)
    r1_phi = r1_form(vp, u1, du1)
    d2 = vp.delta_sq_prod

    lhs = weighted_square_integral(vp, phi)
    rhs = omp / k - (d2 / k) * r1p_phi
    rhs_scaled = (d2 / k) * (omp - r1p_phi)

    bc_scale = (abs(lam * vp.beta1p * u1) + abs(vp.beta1 * u1)
                + abs(lam * vp.beta2p * du1) + abs(vp.beta2 * du1) + 1e-300)
    um, dum = phi.eval(-1.0)
    left_scale = max(abs(vp.alpha1 * um), abs(vp.alpha2 * dum),
                     abs(um) + abs(dum), 1e-300)

    nsq = lhs + (d2 / vp.rho) * r1p_phi ** 2
    if nsq <= 0.0 or not np.isfinite(nsq):
        raise DegeneratePhi(f"norm^2 = {nsq} is not positive")
    c = 1.0 / np.sqrt(nsq)
    lead = um if um != 0.0 else dum
    if lead < 0:
        c = -c
    phi_n = phi.scaled(c)

    scale_local = scan.local_scale(lam) if scan is not None else float("nan")
    margin = abs(omp) / scale_local if scan is not None and scale_local > 0 else float("inf")
    n_formula = asymptotics.nearest_index(vp, s) if s is not None else None

    residuals = {
        "omega_at_root": om_here,
        # |omega| over the change of omega across one relative-width unit
        # of lambda: an estimate of the relative root error, comparable
        # against the refinement tolerance regardless of omega's scale.
        "omega_scaled": abs(om_here) / max(abs(omp) * max(1.0, abs(lam)),
                                           1e-300),
        "bc_right": abs(lam * r1p_phi + r1_phi) / bc_scale,
        "bc_left": abs(vp.alpha1 * um + vp.alpha2 * dum) / left_scale,
        "transmission": phi.transmission_residual(),
        "norm_identity": abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300),
        "norm_identity_jump_scaled_variant":
            abs(lhs - rhs_scaled) / max(abs(lhs), abs(rhs_scaled), 1e-300),
        "k_substitution": abs(r1p_phi * k - vp.rho) / abs(vp.rho),
    }
    return Eigenpair(n=n, lam=lam, s=s, phi=phi_n, scalar=c * r1p_phi,
                     k_ratio=k, k_spread=spread, omega_prime=omp,
                     omega_scale=scale_local, margin=margin,
                     n_formula=n_formula, norm_constant=c,
                     residuals=residuals)


# ----------------------------------------------------------------------
# Top-level enumeration
# ----------------------------------------------------------------------

def find_eigenvalues(problem, n_max: int, *, lam_floor: float | None = None,
                     rtol: float = 1e-12, root_rel_tol: float = 1e-14,
                     s_step: float = S_SCAN_STEP,
                     enforce_margin: bool = True) -> list[Eigenpair]:
    """First n_max eigenvalues in ascending order, fully diagnosed.

    The scan range is seeded from the asymptotic spacing and grows until at
    least n_max roots are in hand. Missed-root tripwires: an s-gap between
    consecutive roots beyond 1.5x the asymptotic pi/2 spacing, and an
    |omega'| below a small fraction of the local omega scale (a zero of
    omega is simple, so omega' staying well away from zero is a guarantee
    the refinement hit an actual crossing).

    root_rel_tol defaults well below the documented 1e-12 contract because
    the boundary-condition residuals of the eigenfunctions inherit the root
    error; the extra bisection steps are cheap.
    """
    vp = as_validated(problem)
    if n_max < 1:
        raise ValueError("n_max must be at least 1")

    floor = default_lambda_floor(vp) if lam_floor is None else float(lam_floor)
    for _ in range(4):
        if validate_floor(vp, floor, rtol=rtol):
            break
        floor *= 2.0
    else:
        raise SuspectedMissedRoot(
            f"omega does not keep one sign on [{2 * floor}, {floor}]; "
            "cannot certify the scan floor")

    case = classify_case(vp)
    s_max = asymptotics._base_angle(case, n_max + 2) / 2.0 + 1.0

    roots = None
    scan = None
    for _ in range(7):
        scan = bracket_scan(vp, s_max, floor, rtol=rtol, s_step=s_step)
        roots = _refine_batch(vp, scan.brackets, rel_tol=root_rel_tol, rtol=rtol)
        roots = np.sort(roots)
        roots = _dedupe(roots)
        if len(roots) >= n_max:
            break
        s_max += 4.0 * np.pi
    if roots is None or len(roots) < n_max:
        raise SuspectedMissedRoot(
            f"found only {0 if roots is None else len(roots)} roots up to "
            f"s_max={s_max:.2f} while {n_max} were requested")

    _gap_check(roots)

    pairs = []
    for i, lam in enumerate(roots[:n_max]):
        eig = build_eigenpair(vp, lam, n=i, scan=scan, rtol=rtol)
        if enforce_margin and eig.margin < OMEGA_PRIME_MARGIN:
            raise SuspectedMissedRoot(
                f"|omega'({lam:.6g})| = {abs(eig.omega_prime):.3e} is below "
                f"{OMEGA_PRIME_MARGIN} of the local omega scale "
                f"{eig.omega_scale:.3e}; the root may be spurious or a "
                "near-double")
        pairs.append(eig)
    return pairs


def _dedupe(roots: np.ndarray) -> np.ndarray:
    if len(roots) < 2:
        return roots
    keep = [roots[0]]
    for lam in roots[1:]:
        if lam - keep[-1] > DUPLICATE_REL_TOL * max(1.0, abs(lam)):
            keep.append(lam)
    return np.asarray(keep)


def _gap_check(roots: np.ndarray) -> None:
    """Alarm on an s-spacing wide enough to hide a missed root."""
    pos = roots[roots >= 1.0]
    if len(pos) < 2:
        return
    s = np.sqrt(pos)
    gaps = np.diff(s)
    worst = int(np.argmax(gaps))
    if gaps[worst] > GAP_LIMIT:
        raise SuspectedMissedRoot(
            f"gap of {gaps[worst]:.3f} in s between {s[worst]:.6f} and "
            f"{s[worst + 1]:.6f} exceeds {GAP_LIMIT:.3f}; a root may have "
            "been missed in that window")
