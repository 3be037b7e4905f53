from __future__ import annotations

import numpy as np
import pytest

from services.bounds import separable_bound_m
from services.noise import (
    Interval,
    NoiseFamily,
    WitnessKind,
    exclusive_regions,
    figure2_scan,
    noise_density,
    noisy_state,
    threshold,
)
from services.qudit_ops import bell_projector
from services.witnesses import evaluate_witnesses
from utils.errors import DomainError


class TestNoisyStates:
    def test_endpoints(self):
        d = 4
        assert np.allclose(noisy_state(d, "psi", 1.0).data, bell_projector(d, 0, 0))
        assert np.allclose(noisy_state(d, "psi", 0.0).data, bell_projector(d, 2, 2))
        assert np.allclose(noisy_state(d, "phi", 0.0).data, bell_projector(d, 1, 0))
        assert np.allclose(noise_density(d, "iso"), np.eye(16) / 16)

    @pytest.mark.parametrize("p", [-0.01, 1.01])
    def test_p_out_of_range(self, p):
        with pytest.raises(DomainError):
            noisy_state(3, "psi", p)

    def test_unknown_family(self):
        with pytest.raises(DomainError):
            NoiseFamily.parse("dephasing")
        with pytest.raises(DomainError):
            WitnessKind.parse("q")

    def test_parse_accepts_case(self):
        assert NoiseFamily.parse(" PSI ") is NoiseFamily.PsiHalfShift
        assert WitnessKind.parse("R") is WitnessKind.Rd


class TestThreshold:
    def test_d4_values(self):
        m = separable_bound_m(4).m_value
        assert threshold(4, "psi", "c").p_star == pytest.approx(0.625, abs=1e-9)
        assert threshold(4, "psi", "r", m).p_star == pytest.approx(0.75, abs=1e-9)
        assert threshold(4, "phi", "c").p_star == pytest.approx(0.25, abs=1e-9)
        assert threshold(4, "phi", "r", m).p_star == pytest.approx(0.0, abs=1e-9)

    def test_qubit_psi_witnesses_coincide(self):
        m = separable_bound_m(2).m_value
        assert threshold(2, "psi", "c").p_star == pytest.approx(0.75, abs=1e-9)
        assert threshold(2, "psi", "r", m).p_star == pytest.approx(0.75, abs=1e-9)

    def test_qutrit_psi_is_two_thirds(self):
        m = separable_bound_m(3).m_value
        assert threshold(3, "psi", "c").p_star == pytest.approx(2 / 3, abs=1e-9)
        assert threshold(3, "psi", "r", m).p_star == pytest.approx(2 / 3, abs=1e-9)

    @pytest.mark.parametrize("d", [2, 3, 5, 9])
    def test_isotropic_closed_forms(self, d):
        m = separable_bound_m(d).m_value
        assert threshold(d, "iso", "c").p_star == pytest.approx(0.5, abs=1e-9)
        assert threshold(d, "iso", "r", m).p_star == pytest.approx(m / 2, abs=1e-9)

    @pytest.mark.parametrize("d", [3, 6])
    def test_crosscheck_recorded(self, d):
        m = separable_bound_m(d).m_value
        for fam in NoiseFamily:
            for wk in WitnessKind:
                res = threshold(d, fam, wk, m)
                assert res.method == "closed_form"
                assert res.p_bisect == pytest.approx(res.p_star, abs=1e-8)

    def test_never_detected(self):
        res = threshold(3, "psi", "r", m_value=2.0)
        assert res.p_star is None
        assert res.p_bisect is None
        assert res.to_dict()["p_star"] is None

    def test_bound_within_decision_margin_is_never_detected(self):
        # a = 2 para R_3 no MES; um limite 1e-12 abaixo não conta como violação
        res = threshold(3, "psi", "r", m_value=2.0 - 1e-12)
        assert res.p_star is None
        assert res.p_bisect is None

    def test_bisection_method(self):
        res = threshold(4, "psi", "c", method="bisection")
        assert res.method == "bisection"
        assert res.p_star == pytest.approx(0.625, abs=1e-9)
        assert res.to_dict()["method"] == "bisection"
        assert threshold(4, "psi", "c", crosscheck=False, method="bisection").p_star == pytest.approx(res.p_star)

    def test_unknown_method(self):
        with pytest.raises(DomainError):
            threshold(4, "psi", "c", method="newton")

    def test_r_needs_bound(self):
        with pytest.raises(DomainError):
            threshold(3, "psi", "r")

    def test_threshold_matches_witness_evaluation(self):
        d = 5
        bound = separable_bound_m(d)
        p = threshold(d, "psi", "r", bound.m_value).p_star
        above = evaluate_witnesses(noisy_state(d, "psi", min(p + 1e-4, 1.0)), bound)
        below = evaluate_witnesses(noisy_state(d, "psi", p - 1e-4), bound)
        assert above.r_violated
        assert not below.r_violated


class TestExclusiveRegions:
    @pytest.mark.parametrize("d", [2, 3])
    def test_empty_for_small_d(self, d):
        x, y = exclusive_regions(d, separable_bound_m(d).m_value)
        assert x is None and y is None

    @pytest.mark.parametrize("d", range(4, 11))
    def test_non_empty_from_four(self, d):
        x, y = exclusive_regions(d, separable_bound_m(d).m_value)
        assert x is not None and y is not None
        assert x.hi > x.lo and y.hi > y.lo

    def test_d4_intervals(self):
        x, y = exclusive_regions(4, separable_bound_m(4).m_value)
        assert x.to_list() == pytest.approx([0.625, 0.75], abs=1e-9)
        assert y.to_list() == pytest.approx([0.0, 0.25], abs=1e-9)

    def test_points_inside_region_split_the_witnesses(self):
        d = 6
        bound = separable_bound_m(d)
        x, y = exclusive_regions(d, bound.m_value)
        px = 0.5 * (x.lo + x.hi)
        rep = evaluate_witnesses(noisy_state(d, "psi", px), bound)
        assert rep.c_violated and not rep.r_violated
        py = 0.5 * (y.lo + y.hi)
        rep = evaluate_witnesses(noisy_state(d, "phi", py), bound)
        assert rep.r_violated and not rep.c_violated

    def test_interval_is_half_open(self):
        iv = Interval(0.25, 0.5)
        assert not iv.contains(0.25)
        assert iv.contains(0.5)


class TestFigure2Scan:
    def test_rows_ordered_by_d_family_witness(self):
        rows = figure2_scan(2, 4, workers=1)
        assert len(rows) == 18
        keys = [(r.d, r.family.value, r.witness.value) for r in rows]
        assert keys[:6] == [(2, "psi", "c"), (2, "psi", "r"), (2, "phi", "c"),
                            (2, "phi", "r"), (2, "iso", "c"), (2, "iso", "r")]
        assert [k[0] for k in keys] == sorted(k[0] for k in keys)

    def test_workers_do_not_change_rows(self):
        assert figure2_scan(2, 6, workers=1) == figure2_scan(2, 6, workers=3)

    def test_reversed_range(self):
        with pytest.raises(DomainError):
            figure2_scan(5, 3)
