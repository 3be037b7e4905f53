from __future__ import annotations

import math

import numpy as np
import pytest

from services.bounds import separable_bound_m
from services.qudit_ops import (
    QuditState,
    bell_projector,
    mes,
    omega,
    pauli_x,
    pauli_z,
    product_state,
    random_separable_state,
    z_basis_state,
)
from services.witnesses import (
    amplitude_operator_r,
    bell_coefficients,
    correlation_operator_c,
    evaluate_many,
    evaluate_weighted_witness,
    evaluate_witnesses,
    operator_upper_bound_check,
    qubit_average_correlation,
    schmidt_from_fraction,
    schmidt_number_thresholds,
    weighted_amplitude_operator,
)
from utils.errors import DomainError, ShapeError


def _white(d):
    return QuditState.density(np.eye(d * d) / (d * d), d, 2)


class TestOperators:
    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_correlation_trace_and_spectrum(self, d):
        c = correlation_operator_c(d)
        assert np.trace(c).real == pytest.approx(2 * d)
        w = np.linalg.eigvalsh(c)
        assert w.min() >= -1e-10 and w.max() <= 2 + 1e-10

    @pytest.mark.parametrize("d", [2, 3, 4, 7])
    def test_r_forms_agree(self, d):
        assert np.max(np.abs(amplitude_operator_r(d, "pauli") - amplitude_operator_r(d, "projector"))) < 1e-10

    def test_r_qubit_is_zz_plus_xx(self):
        z, x = pauli_z(2), pauli_x(2)
        assert np.allclose(amplitude_operator_r(2), np.kron(z, z) + np.kron(x, x))

    def test_unknown_form(self):
        with pytest.raises(DomainError):
            amplitude_operator_r(3, "bogus")

    def test_low_dimension_identities(self):
        eye4, eye9 = np.eye(4), np.eye(9)
        assert np.max(np.abs(amplitude_operator_r(2) - 2 * (correlation_operator_c(2) - eye4))) < 1e-12
        assert np.max(np.abs(amplitude_operator_r(3) - (1.5 * correlation_operator_c(3) - eye9))) < 1e-12

    def test_weighted_half_is_r(self):
        assert np.allclose(weighted_amplitude_operator(5, 0.5), amplitude_operator_r(5))

    def test_mes_is_top_eigenvector_of_r(self):
        w, v = np.linalg.eigh(amplitude_operator_r(4))
        assert w[-1] == pytest.approx(2.0)
        assert abs(np.vdot(mes(4).data, v[:, -1])) ** 2 > 0.999 or w[-2] == pytest.approx(2.0)
        assert mes(4).expectation(amplitude_operator_r(4)).real == pytest.approx(2.0)


class TestBellCoefficients:
    @pytest.mark.parametrize("d", range(2, 13))
    def test_closed_forms(self, d):
        l = np.arange(d)[:, None]
        m = np.arange(d)[None, :]
        c_expected = (l == 0).astype(float) + (m == 0).astype(float)
        r_expected = np.cos(l * omega(d)) + np.cos(m * omega(d))
        assert np.max(np.abs(bell_coefficients(correlation_operator_c(d), d).coeffs - c_expected)) < 1e-10
        assert np.max(np.abs(bell_coefficients(amplitude_operator_r(d), d).coeffs - r_expected)) < 1e-10

    def test_qubit_r_values(self):
        coeffs = bell_coefficients(amplitude_operator_r(2), 2).coeffs
        assert coeffs == pytest.approx(np.array([[2.0, 0.0], [0.0, -2.0]]))

    @pytest.mark.parametrize("d", [3, 6])
    def test_reconstruction(self, d):
        for op in (correlation_operator_c(d), amplitude_operator_r(d)):
            assert np.max(np.abs(bell_coefficients(op, d).reconstruct() - op)) < 1e-10

    def test_non_bell_diagonal_rejected(self):
        op = np.kron(pauli_z(3) + pauli_z(3).conj().T, np.eye(3))
        with pytest.raises(ShapeError) as err:
            bell_coefficients(op, 3)
        assert err.value.max_offdiag > 1e-9


class TestEvaluate:
    @pytest.mark.parametrize("d", range(2, 13))
    def test_mes_certified(self, d):
        rep = evaluate_witnesses(mes(d), separable_bound_m(d))
        assert rep.c_value == pytest.approx(2.0, abs=1e-10)
        assert rep.r_value == pytest.approx(2.0, abs=1e-10)
        assert rep.mes_fraction_lb == pytest.approx(1.0, abs=1e-10)
        assert rep.schmidt_lb == d
        assert rep.c_violated and rep.r_violated

    def test_product_zero_saturates_c(self):
        d = 3
        s = product_state([z_basis_state(d, 0).data] * 2)
        rep = evaluate_witnesses(s, separable_bound_m(d))
        assert rep.c_value == pytest.approx(1 + 1 / d)
        assert abs(rep.c_margin) < 1e-12
        assert not rep.c_violated
        assert rep.schmidt_lb == 1

    def test_white_noise(self):
        rep = evaluate_witnesses(_white(3), separable_bound_m(3))
        assert rep.c_value == pytest.approx(2 / 3)
        assert rep.r_value == pytest.approx(0.0, abs=1e-12)
        assert not (rep.c_violated or rep.r_violated)
        assert rep.mes_fraction_lb < 0
        assert rep.mes_fraction_lb_clamped == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            evaluate_witnesses(mes(3), separable_bound_m(4))

    def test_separable_states_never_violate(self, rng):
        for d in (2, 3, 4, 5):
            bound = separable_bound_m(d)
            for _ in range(150):
                rep = evaluate_witnesses(random_separable_state(d, rng), bound)
                assert rep.c_margin <= 1e-9
                assert rep.r_margin <= 1e-9

    @pytest.mark.slow
    def test_separable_states_never_violate_large_sample(self, rng):
        for d in (2, 3, 4, 5):
            bound = separable_bound_m(d)
            for _ in range(10_000):
                rep = evaluate_witnesses(random_separable_state(d, rng), bound)
                assert not rep.c_violated and not rep.r_violated

    def test_expectations_real_on_random_density(self, rng):
        d = 4
        a = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        rho = a @ a.conj().T
        s = QuditState.density(rho / np.trace(rho).real, d, 2)
        assert abs(s.expectation(correlation_operator_c(d)).imag) < 1e-10
        assert abs(s.expectation(amplitude_operator_r(d)).imag) < 1e-10

    def test_fraction_bound_sound_on_bell_diagonal(self, rng):
        d = 4
        bound = separable_bound_m(d)
        for _ in range(100):
            w = rng.dirichlet(np.ones(d * d))
            rho = sum(w[l * d + m] * bell_projector(d, l, m) for l in range(d) for m in range(d))
            rep = evaluate_witnesses(QuditState.density(rho, d, 2), bound)
            assert w[0] >= rep.mes_fraction_lb - 1e-9

    def test_evaluate_many_preserves_order(self, rng):
        d = 3
        bound = separable_bound_m(d)
        states = [random_separable_state(d, rng) for _ in range(6)] + [mes(d)]
        seq = evaluate_many(states, bound, workers=1)
        par = evaluate_many(states, bound, workers=4)
        assert seq == par
        assert par[-1].schmidt_lb == d


class TestSchmidt:
    def test_thresholds(self):
        c2, _ = schmidt_number_thresholds(2, 1.0)
        assert c2[1] == pytest.approx(1.5)
        c, r = schmidt_number_thresholds(4)
        assert c[0] == pytest.approx(1.0)
        assert r[3] == pytest.approx(1.75)

    def test_fraction_mapping_is_strict(self):
        d = 4
        assert schmidt_from_fraction(0.25, d) == 1
        assert schmidt_from_fraction(0.25 + 1e-6, d) == 2
        assert schmidt_from_fraction(0.75 + 1e-6, d) == 4
        assert schmidt_from_fraction(-3.0, d) == 1

    def test_thresholds_consistent_with_fraction_bounds(self):
        d = 5
        c_thr, r_thr = schmidt_number_thresholds(d)
        cw = math.cos(omega(d))
        for k in range(1, d + 1):
            assert c_thr[k - 1] - 1 == pytest.approx((k - 1) / d)
            assert (r_thr[k - 1] - (1 + cw)) / (1 - cw) == pytest.approx((k - 1) / d)


class TestOperatorBounds:
    def test_qubit_saturates(self):
        a, b = operator_upper_bound_check(2)
        assert a == pytest.approx(0.0, abs=1e-9)
        assert b == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("d", [3, 5, 8])
    def test_non_negative(self, d):
        a, b = operator_upper_bound_check(d)
        assert a >= -1e-9 and b >= -1e-9


class TestWeightedAndQubit:
    def test_weighted_witness_on_mes(self):
        rep = evaluate_weighted_witness(mes(5), 0.3)
        assert rep.value == pytest.approx(2.0)
        assert rep.violated

    def test_weighted_separable(self, rng):
        for _ in range(50):
            rep = evaluate_weighted_witness(random_separable_state(4, rng), 0.7)
            assert rep.margin <= 1e-9

    def test_weighted_bound_mismatch(self):
        with pytest.raises(DomainError):
            evaluate_weighted_witness(mes(3), 0.3, separable_bound_m(3, weight=0.4))

    def test_qubit_average_correlation(self):
        assert qubit_average_correlation(mes(2)) == pytest.approx(1.0)
        prod = product_state([z_basis_state(2, 0).data] * 2)
        assert qubit_average_correlation(prod) == pytest.approx(0.75)
        with pytest.raises(DomainError):
            qubit_average_correlation(mes(3))
