# services/multipartite.py
# -*- coding: utf-8 -*-
"""
Estabilizadores GHZ e cluster de N qudits e testes de pares.

GHZ:     S_1 = X^{⊗n};  S_m = Z_{m−1} Z_m†            (m = 2..n)
Cluster: T_1 = X_1† Z_2;  T_m = Z_{m−1} X_m† Z_{m+1};  T_n = Z_{n−1} X_n†

Para estado totalmente separável:
    W = ½|⟨S_1 + S_1†⟩ + ⟨S_m + S_m†⟩| ≤ M_d   (idem com T_{m−1}, T_m)

Os operadores ficam guardados como fatores locais {sítio: matriz d×d}
(sítios 1-based); a matriz densa d^n × d^n só é montada sob pedido.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Tuple

import numpy as np

from config.settings import EPS_DECIDE
from infra.linalg import check_dim_cap, tensor_all
from services.qudit_ops import QuditState, check_parties, check_dimension, pauli_x, pauli_z
from utils.errors import DomainError

__all__ = [
    "StabilizerKind",
    "StabilizerSet",
    "ghz_stabilizers",
    "cluster_stabilizers",
    "ghz_pair_test",
    "cluster_pair_test",
]


class StabilizerKind(str, Enum):
    GHZ = "ghz"
    Cluster = "cluster"

    @classmethod
    def parse(cls, value: "StabilizerKind | str") -> "StabilizerKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise DomainError(f"tipo de estabilizador desconhecido: {value!r} (ghz|cluster)") from None


@dataclass(frozen=True)
class StabilizerSet:
    d: int
    n: int
    kind: StabilizerKind
    local_ops: Tuple[Dict[int, np.ndarray], ...]

    def __len__(self) -> int:
        return len(self.local_ops)

    def op(self, k: int) -> Dict[int, np.ndarray]:
        """Fatores locais do k-ésimo estabilizador (1-based)."""
        if not 1 <= k <= self.n:
            raise DomainError(f"índice de estabilizador fora de [1, {self.n}]: {k}")
        return self.local_ops[k - 1]

    def matrix(self, k: int) -> np.ndarray:
        check_dim_cap(self.d ** self.n, "estabilizador denso")
        factors = self.op(k)
        eye = np.eye(self.d, dtype=np.complex128)
        return tensor_all(factors.get(s, eye) for s in range(1, self.n + 1))

    def matrices(self) -> List[np.ndarray]:
        return [self.matrix(k) for k in range(1, self.n + 1)]

    def is_unitary(self, tol: float = 1e-10) -> bool:
        eye = np.eye(self.d)
        return all(
            np.max(np.abs(u.conj().T @ u - eye)) <= tol
            for ops in self.local_ops
            for u in ops.values()
        )

    def expectation(self, state: QuditState, k: int) -> complex:
        _check_state(state, self.d, self.n)
        return state.expectation_local(self.op(k))

    def stabilizes(self, state: QuditState, tol: float = 1e-10) -> bool:
        """Todos os operadores (e seus adjuntos) têm ⟨S⟩ = 1 em `state`."""
        return all(abs(self.expectation(state, k) - 1.0) <= tol for k in range(1, self.n + 1))


def _check_state(state: QuditState, d: int, n: int) -> None:
    if state.d != d or state.parties != n:
        raise DomainError(
            f"estado (d={state.d}, n={state.parties}) incompatível com estabilizadores (d={d}, n={n})"
        )


def ghz_stabilizers(d: int, n: int) -> StabilizerSet:
    d = check_dimension(d)
    n = check_parties(n)
    check_dim_cap(d ** n, "sistema GHZ")
    z, x = pauli_z(d), pauli_x(d)
    zd = z.conj().T
    ops: List[Dict[int, np.ndarray]] = [{s: x for s in range(1, n + 1)}]
    ops += [{m - 1: z, m: zd} for m in range(2, n + 1)]
    return StabilizerSet(d=d, n=n, kind=StabilizerKind.GHZ, local_ops=tuple(ops))


def cluster_stabilizers(d: int, n: int) -> StabilizerSet:
    d = check_dimension(d)
    n = check_parties(n)
    check_dim_cap(d ** n, "sistema cluster")
    z, xd = pauli_z(d), pauli_x(d).conj().T
    ops: List[Dict[int, np.ndarray]] = []
    for m in range(1, n + 1):
        op: Dict[int, np.ndarray] = {m: xd}
        if m > 1:
            op[m - 1] = z
        if m < n:
            op[m + 1] = z
        ops.append(op)
    return StabilizerSet(d=d, n=n, kind=StabilizerKind.Cluster, local_ops=tuple(ops))


def _check_site(m: int, n: int) -> int:
    m = int(m)
    if not 2 <= m <= n:
        raise DomainError(f"sítio m deve estar em [2, {n}] (recebido {m})")
    return m


def _pair_value(stab: StabilizerSet, rho: QuditState, i: int, j: int) -> float:
    # ½⟨S + S†⟩ = Re⟨S⟩
    return abs(stab.expectation(rho, i).real + stab.expectation(rho, j).real)


def ghz_pair_test(rho: QuditState, m: int, m_value: float) -> Tuple[float, bool]:
    """W = ½|⟨S_1+S_1†⟩ + ⟨S_m+S_m†⟩|; W > M_d exclui separabilidade total."""
    n = check_parties(rho.parties)
    m = _check_site(m, n)
    stab = ghz_stabilizers(rho.d, n)
    w = _pair_value(stab, rho, 1, m)
    return w, w > float(m_value) + EPS_DECIDE


def cluster_pair_test(rho: QuditState, m: int, m_value: float) -> Tuple[float, bool]:
    """W = ½|⟨T_{m−1}+T_{m−1}†⟩ + ⟨T_m+T_m†⟩|."""
    n = check_parties(rho.parties)
    m = _check_site(m, n)
    stab = cluster_stabilizers(rho.d, n)
    w = _pair_value(stab, rho, m - 1, m)
    return w, w > float(m_value) + EPS_DECIDE
