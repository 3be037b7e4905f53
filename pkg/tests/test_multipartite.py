from __future__ import annotations

import numpy as np
import pytest

from config.settings import LinalgSettings, Settings, set_settings
from services.bounds import separable_bound_m
from services.multipartite import (
    StabilizerKind,
    cluster_pair_test,
    cluster_stabilizers,
    ghz_pair_test,
    ghz_stabilizers,
)
from services.qudit_ops import (
    QuditState,
    cluster_state,
    ghz_state,
    pauli_x,
    pauli_z,
    product_state,
    random_product_vectors,
    random_separable_state,
    x_basis_state,
    z_basis_state,
)
from services.witnesses import amplitude_operator_r
from utils.errors import DomainError, ResourceError

CASES = [(2, 2), (2, 5), (3, 3), (4, 3), (5, 2), (3, 4)]


class TestStabilizers:
    @pytest.mark.parametrize("d,n", CASES)
    def test_ghz_state_is_stabilized(self, d, n):
        assert ghz_stabilizers(d, n).stabilizes(ghz_state(d, n))

    @pytest.mark.parametrize("d,n", CASES)
    def test_cluster_state_is_stabilized(self, d, n):
        assert cluster_stabilizers(d, n).stabilizes(cluster_state(d, n))

    def test_all_unitary(self):
        assert ghz_stabilizers(4, 3).is_unitary()
        assert cluster_stabilizers(4, 3).is_unitary()

    def test_qubit_cluster_middle_operator(self):
        z, x = pauli_z(2), pauli_x(2)
        t2 = cluster_stabilizers(2, 3).matrix(2)
        assert np.allclose(t2, np.kron(np.kron(z, x), z))

    def test_ghz_first_is_global_shift(self):
        s1 = ghz_stabilizers(3, 2).matrix(1)
        assert np.allclose(s1, np.kron(pauli_x(3), pauli_x(3)))

    def test_local_ops_match_dense(self, rng):
        d, n = 3, 3
        stab = cluster_stabilizers(d, n)
        v = rng.standard_normal(d ** n) + 1j * rng.standard_normal(d ** n)
        s = QuditState.pure(v / np.linalg.norm(v), d, n)
        for k in range(1, n + 1):
            dense = s.expectation(stab.matrix(k))
            assert stab.expectation(s, k) == pytest.approx(dense, abs=1e-12)

    def test_index_range(self):
        stab = ghz_stabilizers(2, 3)
        assert len(stab) == 3
        with pytest.raises(DomainError):
            stab.op(4)

    def test_kind_parse(self):
        assert StabilizerKind.parse("Cluster") is StabilizerKind.Cluster
        with pytest.raises(DomainError):
            StabilizerKind.parse("w")

    def test_system_size_respects_cap(self):
        set_settings(Settings(linalg=LinalgSettings(max_dim=32)))
        with pytest.raises(ResourceError):
            ghz_stabilizers(3, 4)


class TestPairTests:
    @pytest.mark.parametrize("d,n", CASES)
    def test_ideal_states_reach_two(self, d, n):
        m_value = separable_bound_m(d).m_value
        w, violated = ghz_pair_test(ghz_state(d, n), n, m_value)
        assert w == pytest.approx(2.0, abs=1e-10) and violated
        w, violated = cluster_pair_test(cluster_state(d, n), 2, m_value)
        assert w == pytest.approx(2.0, abs=1e-10) and violated

    def test_ghz_on_all_zero(self):
        s = product_state([z_basis_state(3, 0).data] * 3)
        w, violated = ghz_pair_test(s, 2, 1.0)
        assert w == pytest.approx(1.0)
        assert not violated

    def test_cluster_on_all_zero_bar(self):
        s = product_state([x_basis_state(3, 0).data] * 3)
        w, _ = cluster_pair_test(s, 3, 1.0)
        assert w == pytest.approx(0.0, abs=1e-12)

    def test_cluster_single_term_product(self):
        d = 3
        s = product_state([z_basis_state(d, 0).data, x_basis_state(d, 0).data, z_basis_state(d, 0).data])
        w, violated = cluster_pair_test(s, 2, separable_bound_m(d).m_value)
        assert w == pytest.approx(1.0, abs=1e-12)
        assert not violated
        # |0̄⟩ no sítio m−1: só T_{m−1} contribui
        s = product_state([z_basis_state(d, 0).data, x_basis_state(d, 0).data, z_basis_state(d, 0).data,
                           z_basis_state(d, 0).data])
        w, _ = cluster_pair_test(s, 3, 1.0)
        assert w == pytest.approx(1.0, abs=1e-12)

    def test_maximally_mixed(self):
        d, n = 2, 3
        rho = QuditState.density(np.eye(d ** n) / d ** n, d, n)
        assert ghz_pair_test(rho, 3, 1.0)[0] == pytest.approx(0.0, abs=1e-12)
        assert cluster_pair_test(rho, 2, 1.0)[0] == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("d,n", [(3, 3), (4, 3), (5, 2)])
    def test_products_never_exceed_bound(self, d, n, rng):
        m_value = separable_bound_m(d).m_value
        for _ in range(100):
            s = product_state(random_product_vectors(d, n, rng))
            for m in range(2, n + 1):
                assert ghz_pair_test(s, m, m_value)[0] <= m_value + 1e-9
                assert cluster_pair_test(s, m, m_value)[0] <= m_value + 1e-9

    @pytest.mark.slow
    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    @pytest.mark.parametrize("n", [2, 3])
    def test_thousand_products_never_exceed_bound(self, d, n, rng):
        m_value = separable_bound_m(d).m_value
        for _ in range(1000):
            s = product_state(random_product_vectors(d, n, rng))
            for m in range(2, n + 1):
                assert ghz_pair_test(s, m, m_value)[0] <= m_value + 1e-9
                assert cluster_pair_test(s, m, m_value)[0] <= m_value + 1e-9

    def test_mixtures_never_violate(self, rng):
        m_value = separable_bound_m(3).m_value
        for _ in range(30):
            s = random_separable_state(3, rng, parties=3)
            assert not ghz_pair_test(s, 2, m_value)[1]
            assert not cluster_pair_test(s, 3, m_value)[1]

    def test_two_qubits_reduce_to_amplitude_witness(self, rng):
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        s = QuditState.pure(v / np.linalg.norm(v), 2, 2)
        w, _ = ghz_pair_test(s, 2, 1.0)
        assert w == pytest.approx(abs(s.expectation(amplitude_operator_r(2)).real), abs=1e-12)

    @pytest.mark.parametrize("m", [1, 4])
    def test_site_out_of_range(self, m):
        with pytest.raises(DomainError):
            ghz_pair_test(ghz_state(2, 3), m, 1.0)

    def test_needs_two_parties(self):
        with pytest.raises(DomainError):
            cluster_pair_test(z_basis_state(3, 0), 2, 1.0)
