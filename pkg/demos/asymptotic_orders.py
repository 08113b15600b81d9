"""How fast the closed-form root estimates converge, and a cautionary tale.

For a piecewise-linear potential with one interface (jump factor 1.5) the
script compares the computed roots s_n against the first-order estimate
(a fixed multiple of pi/2) and the second-order estimate (which adds a
correction of size 1/n built from the boundary ratios and the mean of q).

Expected: n * |error| bounded for the first order, n^2 * |error| bounded
for the second. The last column uses the variant correction that divides
the potential mean by the product of the jump factors. Its scaled error
grows linearly in n, which is how a wrong correction term announces
itself: the variant is only exact when int q = 0 or the jump product is 1.
"""

import numpy as np

import sltrans as st
from sltrans.asymptotics import asymptotics_report, eigenvalue_estimate
from sltrans.eigensolve import find_eigenvalues


def main():
    spec = st.ProblemSpec(
        potential=st.PiecewisePotential.from_pieces([
            st.PotentialPiece(kind="polynomial", coeffs=(1.0, 1.0)),
            st.PotentialPiece(kind="polynomial", coeffs=(2.0, -0.5)),
        ]),
        interfaces=(0.2,),
        jumps=(1.5,),
        alpha=(1.0, 1.0),
        beta=(0.0, 1.0),
        beta_prime=(1.0, 0.3),
    )

    est = eigenvalue_estimate(spec, 10)
    print("ingredients of the second-order correction at n = 10:")
    for key, val in est.ingredients.items():
        print(f"  {key:22s} {val}")
    print()

    eigs = find_eigenvalues(spec, 40)
    rows = [r for r in asymptotics_report(spec, eigs) if r["n"] >= 5]

    print(f"{'n':>3} {'s_n':>14} {'n|e1|':>10} {'n^2|e2|':>10} "
          f"{'n^2|e2| variant':>16}")
    for r in rows[::3]:
        print(f"{r['n']:3d} {r['s_true']:14.8f} {r['n_err1']:10.4f} "
              f"{r['n2_err2']:10.4f} {r['n2_err2_jump_scaled']:16.4f}")

    ns = np.array([r["n"] for r in rows], dtype=float)
    for key, label in (("n_err1", "first order, n-scaled"),
                       ("n2_err2", "second order, n^2-scaled"),
                       ("n2_err2_jump_scaled", "variant, n^2-scaled")):
        vals = np.array([max(r[key], 1e-300) for r in rows])
        a = np.vstack([np.log(ns), np.ones_like(ns)]).T
        slope = np.linalg.lstsq(a, np.log(vals), rcond=None)[0][0]
        verdict = "bounded" if slope <= 0.05 else "growing"
        print(f"\n{label}: log-log slope {slope:+.2f} ({verdict})")


if __name__ == "__main__":
    main()
