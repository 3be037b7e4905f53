# services/qudit_ops.py
# -*- coding: utf-8 -*-
"""
Operadores e estados de qudits.

- Pauli generalizados: Z = Σ_j e^{iωj}|j⟩⟨j|, X = Σ_j |j+1⟩⟨j| (mod d), ω = 2π/d.
- Base X (Fourier): |k̄⟩ = Z^k (1/√d) Σ_j |j⟩; X|k̄⟩ = e^{−iωk}|k̄⟩.
- MES |Φ_{0,0}⟩, estados de Bell |Φ_{l,m}⟩ = X_A^l Z_B^m |Φ_{0,0}⟩, GHZ e cluster em cadeia.

Cluster: |C⟩ = (Π_{m=1}^{n−1} CZ†_{m,m+1}) |0̄⟩^{⊗n}, com CZ = Σ e^{iωjk}|j,k⟩⟨j,k|.
Assim T_1 = X_1†Z_2, T_m = Z_{m−1}X_m†Z_{m+1} e T_n = Z_{n−1}X_n† estabilizam |C⟩.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, Mapping, Optional, Sequence

import numpy as np

from config.settings import PSD_TOL, STATE_TOL
from infra.linalg import apply_local_ops, check_dim_cap, hermitian_eigs, hermiticity_residual
from utils.errors import DomainError, InvalidStateError

__all__ = [
    "BasisLabel",
    "QuditState",
    "check_dimension",
    "check_parties",
    "check_seed",
    "omega",
    "pauli_z",
    "pauli_x",
    "fourier_matrix",
    "z_basis_state",
    "x_basis_state",
    "mes",
    "bell_state",
    "bell_projector",
    "ghz_state",
    "cluster_state",
    "product_state",
    "random_pure_vector",
    "random_product_vectors",
    "random_separable_state",
]


class BasisLabel(str, Enum):
    ZBasis = "Z"
    XBasis = "X"

    @classmethod
    def parse(cls, value: "BasisLabel | str") -> "BasisLabel":
        if isinstance(value, BasisLabel):
            return value
        v = str(value).strip().upper()
        for b in cls:
            if v in (b.value, b.name.upper()):
                return b
        raise DomainError(f"base desconhecida: {value!r} (use Z ou X)")


def check_dimension(d: Any) -> int:
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)):
        raise DomainError(f"dimensão deve ser inteira, recebido {d!r}")
    if d < 2:
        raise DomainError(f"dimensão local d deve ser >= 2 (recebido {d})")
    return int(d)


def _check_index(name: str, v: Any, d: int) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or not 0 <= v < d:
        raise DomainError(f"{name}={v!r} fora do intervalo [0, {d - 1}]")
    return int(v)


def check_seed(seed: Any) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise DomainError(f"semente deve ser inteira >= 0 (recebido {seed!r})")
    return int(seed)


def check_parties(n: Any, minimum: int = 2) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < minimum:
        raise DomainError(f"número de partes deve ser inteiro >= {minimum} (recebido {n!r})")
    return int(n)


def omega(d: int) -> float:
    return 2.0 * math.pi / d


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


# ================
# Modelo de estado
# ================

@dataclass(frozen=True)
class QuditState:
    """
    Estado em (C^d)^⊗n: vetor puro (d^n) ou matriz densidade (d^n x d^n).

    A validação acontece na construção: vetores unitários, densidades
    Hermitianas, positivas (λ ≥ −PSD_TOL) e de traço 1.
    """
    d: int
    parties: int
    kind: str
    data: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        check_dimension(self.d)
        check_parties(self.parties, minimum=1)
        dim = self.d ** self.parties
        arr = np.array(self.data, dtype=np.complex128, copy=True)
        if self.kind == "pure":
            if arr.shape != (dim,):
                raise InvalidStateError(f"vetor de estado deve ter {dim} entradas, recebido {arr.shape}")
            nrm = float(np.linalg.norm(arr))
            if abs(nrm - 1.0) > STATE_TOL:
                raise InvalidStateError(f"vetor de estado não unitário (‖ψ‖={nrm:.12g})")
        elif self.kind == "density":
            if arr.shape != (dim, dim):
                raise InvalidStateError(f"matriz densidade deve ser {dim}x{dim}, recebido {arr.shape}")
            res = hermiticity_residual(arr)
            if res > STATE_TOL:
                raise InvalidStateError(f"matriz densidade não Hermitiana (resíduo {res:.3e})")
            tr = complex(np.trace(arr))
            if abs(tr - 1.0) > STATE_TOL:
                raise InvalidStateError(f"traço da matriz densidade deve ser 1 (recebido {tr.real:.12g})")
            lam_min = float(hermitian_eigs(arr, method="lapack").eigenvalues[-1])
            if lam_min < -PSD_TOL:
                raise InvalidStateError(f"matriz densidade não positiva (λ_min={lam_min:.3e})")
        else:
            raise InvalidStateError(f"kind deve ser 'pure' ou 'density', recebido {self.kind!r}")
        object.__setattr__(self, "data", _freeze(arr))

    # -------- construtores --------

    @classmethod
    def pure(cls, vec: Sequence[complex] | np.ndarray, d: int, parties: int) -> "QuditState":
        return cls(d=d, parties=parties, kind="pure", data=np.asarray(vec))

    @classmethod
    def density(cls, rho: np.ndarray, d: int, parties: int) -> "QuditState":
        return cls(d=d, parties=parties, kind="density", data=np.asarray(rho))

    @classmethod
    def mixture(cls, weights: Sequence[float], states: Sequence["QuditState"]) -> "QuditState":
        if not states or len(weights) != len(states):
            raise DomainError("mixture exige listas de pesos e estados do mesmo tamanho")
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > STATE_TOL:
            raise DomainError("pesos da mistura devem ser >= 0 e somar 1")
        d, n = states[0].d, states[0].parties
        rho = np.zeros((d ** n, d ** n), dtype=np.complex128)
        for wi, s in zip(w, states):
            if (s.d, s.parties) != (d, n):
                raise DomainError("estados da mistura com dimensões diferentes")
            rho += wi * s.density_matrix()
        return cls.density(rho, d, n)

    # -------- acesso --------

    @property
    def dim(self) -> int:
        return self.d ** self.parties

    @property
    def is_pure(self) -> bool:
        return self.kind == "pure"

    def density_matrix(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, np.conj(self.data))
        return np.array(self.data)

    def as_density(self) -> "QuditState":
        return self if not self.is_pure else QuditState.density(self.density_matrix(), self.d, self.parties)

    def expectation(self, op: np.ndarray) -> complex:
        """⟨op⟩ = ⟨ψ|op|ψ⟩ ou tr(ρ·op)."""
        op = np.asarray(op)
        if op.shape != (self.dim, self.dim):
            raise DomainError(f"operador {op.shape} incompatível com estado de dimensão {self.dim}")
        if self.is_pure:
            return complex(np.vdot(self.data, op @ self.data))
        return complex(np.einsum("ij,ji->", self.data, op))

    def expectation_local(self, ops: Mapping[int, np.ndarray]) -> complex:
        """⟨⊗_s ops[s]⟩ sem montar o operador denso (sítios 1-based)."""
        if self.is_pure:
            return complex(np.vdot(self.data, apply_local_ops(self.data, ops, self.d, self.parties)))
        return complex(np.trace(apply_local_ops(self.data, ops, self.d, self.parties)))

    def basis_probabilities(self, bases: Sequence[BasisLabel]) -> np.ndarray:
        """
        Distribuição conjunta de resultados medindo a parte s na base bases[s]
        (ordem row-major, parte 1 mais significativa).
        """
        if len(bases) != self.parties:
            raise DomainError(f"esperadas {self.parties} bases, recebido {len(bases)}")
        f_dag = np.conj(fourier_matrix(self.d).T)
        rot = {s + 1: f_dag for s, b in enumerate(bases) if BasisLabel.parse(b) is BasisLabel.XBasis}
        if self.is_pure:
            amp = apply_local_ops(self.data, rot, self.d, self.parties) if rot else self.data
            return np.abs(amp) ** 2
        rho = self.data
        if rot:
            rho = apply_local_ops(rho, rot, self.d, self.parties)
            rho = np.conj(apply_local_ops(np.conj(rho.T), rot, self.d, self.parties).T)
        return np.real(np.diag(rho)).copy()

    def to_dict(self) -> Dict[str, Any]:
        flat = self.data.ravel()
        return {
            "d": self.d,
            "parties": self.parties,
            "kind": self.kind,
            "re": [float(x) for x in flat.real],
            "im": [float(x) for x in flat.imag],
        }


# =====================
# Operadores de Pauli
# =====================

@lru_cache(maxsize=None)
def pauli_z(d: int) -> np.ndarray:
    """Z = Σ_j e^{iωj}|j⟩⟨j|."""
    d = check_dimension(d)
    j = np.arange(d)
    return _freeze(np.diag(np.exp(1j * omega(d) * j)).astype(np.complex128))


@lru_cache(maxsize=None)
def pauli_x(d: int) -> np.ndarray:
    """X = Σ_j |j+1⟩⟨j| (mod d)."""
    d = check_dimension(d)
    x = np.zeros((d, d), dtype=np.complex128)
    j = np.arange(d)
    x[(j + 1) % d, j] = 1.0
    return _freeze(x)


@lru_cache(maxsize=None)
def fourier_matrix(d: int) -> np.ndarray:
    """Matriz unitária cujas colunas são |k̄⟩: F[j, k] = ω^{jk}/√d."""
    d = check_dimension(d)
    j = np.arange(d)
    f = np.exp(1j * omega(d) * (np.outer(j, j) % d)) / math.sqrt(d)
    return _freeze(f.astype(np.complex128))


def z_basis_state(d: int, k: int) -> QuditState:
    d = check_dimension(d)
    k = _check_index("k", k, d)
    v = np.zeros(d, dtype=np.complex128)
    v[k] = 1.0
    return QuditState.pure(v, d, 1)


def x_basis_state(d: int, k: int) -> QuditState:
    """|k̄⟩ = Z^k (1/√d) Σ_j |j⟩."""
    d = check_dimension(d)
    k = _check_index("k", k, d)
    return QuditState.pure(fourier_matrix(d)[:, k], d, 1)


# =====================
# Estados de dois qudits
# =====================

def mes(d: int) -> QuditState:
    """|Φ_{0,0}⟩ = (1/√d) Σ_j |j⟩|j⟩."""
    return bell_state(check_dimension(d), 0, 0)


def _bell_vector(d: int, l: int, m: int) -> np.ndarray:
    v = np.zeros(d * d, dtype=np.complex128)
    j = np.arange(d)
    v[((j + l) % d) * d + j] = np.exp(1j * omega(d) * ((m * j) % d)) / math.sqrt(d)
    return v


def bell_state(d: int, l: int, m: int) -> QuditState:
    """|Φ_{l,m}⟩ = X_A^l Z_B^m |Φ_{0,0}⟩ = (1/√d) Σ_j ω^{mj} |j+l⟩|j⟩."""
    d = check_dimension(d)
    l = _check_index("l", l, d)
    m = _check_index("m", m, d)
    return QuditState.pure(_bell_vector(d, l, m), d, 2)


def bell_projector(d: int, l: int, m: int) -> np.ndarray:
    v = bell_state(d, l, m).data
    return _freeze(np.outer(v, np.conj(v)))


# =====================
# Estados multipartidos
# =====================

def ghz_state(d: int, n: int) -> QuditState:
    """|G⟩ = (1/√d) Σ_k |k⟩^{⊗n}."""
    d = check_dimension(d)
    n = check_parties(n)
    dim = check_dim_cap(d ** n, "estado GHZ")
    v = np.zeros(dim, dtype=np.complex128)
    repunit = sum(d ** i for i in range(n))
    v[np.arange(d) * repunit] = 1.0 / math.sqrt(d)
    return QuditState.pure(v, d, n)


def cluster_state(d: int, n: int) -> QuditState:
    """
    Cluster em cadeia: amplitude de |j_1…j_n⟩ = d^{−n/2} Π_m e^{−iω j_m j_{m+1}}.
    """
    d = check_dimension(d)
    n = check_parties(n)
    dim = check_dim_cap(d ** n, "estado cluster")
    idx = np.indices((d,) * n).reshape(n, dim)
    phase = np.zeros(dim, dtype=np.int64)
    for m in range(n - 1):
        phase = (phase + idx[m] * idx[m + 1]) % d
    v = np.exp(-1j * omega(d) * phase) / math.sqrt(dim)
    return QuditState.pure(v, d, n)


def product_state(vectors: Sequence[np.ndarray]) -> QuditState:
    """Produto tensorial de vetores locais (normalizados aqui)."""
    if not vectors:
        raise DomainError("product_state exige ao menos um vetor")
    d = len(vectors[0])
    out = np.ones(1, dtype=np.complex128)
    for v in vectors:
        v = np.asarray(v, dtype=np.complex128)
        if v.shape != (d,):
            raise DomainError("vetores locais com dimensões diferentes")
        out = np.kron(out, v / np.linalg.norm(v))
    check_dim_cap(out.size, "estado produto")
    return QuditState.pure(out, d, len(vectors))


# =====================
# Amostragem aleatória (testes / Monte-Carlo)
# =====================

def random_pure_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    """Vetor uniforme (Haar) na esfera de C^d."""
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_product_vectors(d: int, parties: int, rng: np.random.Generator) -> list[np.ndarray]:
    return [random_pure_vector(d, rng) for _ in range(parties)]


def random_separable_state(
    d: int, rng: np.random.Generator, terms: Optional[int] = None, parties: int = 2
) -> QuditState:
    """Mistura de até `terms` (padrão 2d) estados produto puros com pesos de Dirichlet."""
    d = check_dimension(d)
    k = int(terms) if terms is not None else int(rng.integers(1, 2 * d + 1))
    w = rng.dirichlet(np.ones(k))
    states = [product_state(random_product_vectors(d, parties, rng)) for _ in range(k)]
    return QuditState.mixture(w, states)
