"""The characteristic function: closed forms, jumps, derivative paths."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst

import sltrans as st
from sltrans.characteristic import (
    MismatchedLambda,
    omega,
    omega_derivative,
    omega_per_interval,
    omega_samples,
    wronskian_at,
    write_scan_csv,
)
from sltrans.ode import shoot_chi, shoot_phi
from conftest import make_canonical, make_two_interface

import oracles


class TestClosedForm:
    def test_matches_canonical_form_at_positive_lambda(self, canonical):
        s = np.linspace(0.05, 9.0, 60)
        want = -s * np.sin(2 * s) + np.cos(2 * s)
        got = omega(canonical, s * s)
        assert np.allclose(got, want, rtol=0, atol=1e-12 * np.max(np.abs(want)))

    def test_matches_canonical_form_at_negative_lambda(self, canonical):
        sig = np.linspace(0.1, 4.0, 17)
        want = sig * np.sinh(2 * sig) + np.cosh(2 * sig)
        got = omega(canonical, -sig * sig)
        assert np.allclose(got, want, rtol=1e-12)

    def test_no_negative_roots_for_canonical(self, canonical):
        lams = np.linspace(-30.0, -1e-6, 500)
        assert np.all(np.asarray(omega(canonical, lams)) > 0)

    def test_scalar_equals_vector_entry(self, canonical):
        lams = np.array([-3.0, 0.0, 2.7, 40.0])
        vec = np.asarray(omega(canonical, lams))
        for i, lam in enumerate(lams):
            assert omega(canonical, float(lam)) == vec[i]

    def test_agrees_with_independent_constant_q_oracle(self):
        spec = st.ProblemSpec(
            potential=st.PiecewisePotential.constant(2.0),
            interfaces=(0.3,), jumps=(1.7,),
            alpha=(1.0, 1.0), beta=(0.0, 1.0), beta_prime=(1.0, 0.3),
        )
        for lam in (-7.0, 0.0, 1.9, 2.0, 2.1, 35.0, 210.0):
            want = oracles.constant_q_omega(
                lam, 2.0, (0.3,), (1.7,), (1.0, 1.0), (0.0, 1.0), (1.0, 0.3))
            got = omega(spec, lam)
            assert got == pytest.approx(want, rel=1e-11, abs=1e-11)


class TestDerivative:
    def test_complex_step_is_exact_at_zero(self, canonical):
        # omega(lam) = -s sin 2s + cos 2s has omega'(0) = -4 exactly
        d = omega_derivative(canonical, 0.0, method="complex")
        assert d == pytest.approx(-4.0, abs=1e-13)

    def test_central_difference_agrees_with_complex_step(self, canonical):
        for lam in (0.29, 3.3, 25.0):
            dc = omega_derivative(canonical, lam, method="complex")
            dd = omega_derivative(canonical, lam, method="central")
            assert dd == pytest.approx(dc, rel=2e-5)

    def test_complex_lambda_input_supported(self, canonical):
        val = omega(canonical, 2.0 + 1e-150j)
        assert isinstance(val, complex)
        assert val.real == pytest.approx(float(omega(canonical, 2.0)))


class TestChain:
    def test_per_interval_wronskians_obey_weight_chain(self, two_interface):
        for lam in (-5.0, 1.2, 80.0):
            sample = omega_per_interval(two_interface, lam)
            assert len(sample.omega_i) == 3
            assert sample.chain_residual_rel() <= 1e-9
            assert sample.metadata["omega_boundary_form"] == pytest.approx(
                sample.omega, rel=1e-9, abs=1e-12)

    def test_wronskian_constant_inside_a_subinterval(self, two_interface):
        lam = 17.0
        phi = shoot_phi(two_interface, lam)
        chi = shoot_chi(two_interface, lam)
        values = [wronskian_at(phi, chi, x) for x in (-0.9, -0.6, -0.35)]
        spread = max(values) - min(values)
        assert spread <= 1e-10 * max(1.0, abs(values[0]))

    def test_mismatched_lambda_rejected(self, two_interface):
        phi = shoot_phi(two_interface, 3.0)
        chi = shoot_chi(two_interface, 4.0)
        with pytest.raises(MismatchedLambda):
            wronskian_at(phi, chi, 0.0)

    def test_scan_csv_columns(self, two_interface, tmp_path):
        samples = omega_samples(two_interface, [1.0, 5.0])
        path = tmp_path / "scan.csv"
        write_scan_csv(samples, path)
        header = path.read_text().splitlines()[0].split(",")
        assert header[0] == "lambda"
        assert "omega" in header


@settings(max_examples=25)
@given(hst.floats(0.3, 3.0), hst.floats(0.3, 3.0))
def test_jump_scaling_multiplies_omega_when_q_is_zero(d1, d2):
    """With q = 0 the jumps only rescale omega by prod(delta_i).

    The trajectory divides by delta at each interface while the leading
    prefactor carries delta^2, so the zero set cannot move. This is the
    mechanism behind the eigenvalue jump-invariance.
    """
    def build(j1, j2):
        return st.ProblemSpec(
            potential=st.PiecewisePotential.constant(0.0),
            interfaces=(-0.2, 0.5), jumps=(j1, j2),
            alpha=(1.0, 0.0), beta=(0.0, 1.0), beta_prime=(1.0, 0.0),
        )

    lams = np.array([-4.0, 0.7, 13.0, 90.0])
    base = np.asarray(omega(build(1.0, 1.0), lams))
    scaled = np.asarray(omega(build(d1, d2), lams))
    assert np.allclose(scaled, d1 * d2 * base, rtol=1e-12)
