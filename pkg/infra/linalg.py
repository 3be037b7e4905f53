# infra/linalg.py
# -*- coding: utf-8 -*-
"""
Álgebra linear densa complexa usada por todos os serviços do qwitness.

- Matrizes são `numpy.ndarray` complex128 quadradas e imutáveis (writeable=False);
  toda operação devolve um novo valor, então podem ser compartilhadas entre threads.
- Índice composto com a parte 1 mais significativa (parte A é o fator à esquerda).
- Decomposição Hermitiana:
    * "jacobi": método de Jacobi cíclico para matrizes Hermitianas complexas
    * "lapack": numpy.linalg.eigh
    * "auto":   Jacobi até QWITNESS_JACOBI_MAX_DIM, LAPACK acima disso

API principal:
    as_matrix, identity, tensor, tensor_all, adjoint, trace,
    hermiticity_residual, hermitian_eigs, operator_norm,
    apply_local_ops, partial_trace, check_dim_cap
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from config.settings import EIG_TOL, HERM_TOL, get_settings
from utils.errors import ContractError, ConvergenceError, ResourceError, SizeError

__all__ = [
    "ComplexMatrix",
    "EigenDecomposition",
    "as_matrix",
    "identity",
    "tensor",
    "tensor_all",
    "adjoint",
    "trace",
    "hermiticity_residual",
    "hermitian_eigs",
    "operator_norm",
    "apply_local_ops",
    "partial_trace",
    "check_dim_cap",
]

ComplexMatrix = np.ndarray

# maior lado cujo quadrado ainda cabe em int64
_MAX_SIDE = math.isqrt(np.iinfo(np.int64).max)
_JACOBI_MAX_SWEEPS = 60


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def as_matrix(data: object) -> ComplexMatrix:
    """Converte para matriz quadrada complex128 imutável (cópia)."""
    a = np.array(data, dtype=np.complex128, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ContractError(f"matriz quadrada não vazia esperada, recebido shape {a.shape}")
    return _freeze(a)


def identity(dim: int) -> ComplexMatrix:
    return _freeze(np.eye(int(dim), dtype=np.complex128))


def tensor(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """
    Produto de Kronecker: (a⊗b)[i·db+k, j·db+l] = a[i,j]·b[k,l].
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ContractError(f"tensor exige matrizes quadradas: {a.shape} x {b.shape}")
    side = int(a.shape[0]) * int(b.shape[0])
    if side > _MAX_SIDE:
        raise SizeError(f"dimensão do produto tensorial não representável: {side}")
    return _freeze(np.kron(a, b).astype(np.complex128, copy=False))


def tensor_all(ops: Iterable[ComplexMatrix]) -> ComplexMatrix:
    ops = list(ops)
    if not ops:
        raise ContractError("tensor_all exige ao menos um operador")
    return reduce(tensor, ops[1:], as_matrix(ops[0]))


def adjoint(a: ComplexMatrix) -> ComplexMatrix:
    return _freeze(np.conj(np.asarray(a, dtype=np.complex128)).T.copy())


def trace(a: ComplexMatrix) -> complex:
    return complex(np.trace(np.asarray(a)))


def hermiticity_residual(a: ComplexMatrix) -> float:
    """‖a − a†‖_max."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - np.conj(a.T))))


def check_dim_cap(dim: int, what: str = "vetor") -> int:
    """Garante dim ≤ QWITNESS_MAX_DIM; devolve dim."""
    cap = get_settings().linalg.max_dim
    if dim > cap:
        raise ResourceError(f"{what} de dimensão {dim} excede QWITNESS_MAX_DIM={cap}")
    return dim


# --------------------------------------------------------------------------------------
# Decomposição espectral
# --------------------------------------------------------------------------------------

@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray   # reais, ordem decrescente
    eigenvectors: np.ndarray  # colunas unitárias, mesma ordem
    method: str = "lapack"
    sweeps: int = 0

    def reconstruct(self) -> ComplexMatrix:
        v = self.eigenvectors
        return _freeze((v * self.eigenvalues) @ np.conj(v.T))


def _jacobi_eigh(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """
    Jacobi cíclico para matriz Hermitiana complexa.

    Cada rotação J atua nas linhas/colunas (p, q) e zera a[p, q]:
    com a[p, q] = |b|·e^{iφ}, J = diag(e^{iφ}, 1)·R(t), R real 2x2 e
    tan(2t) = 2|b| / (a[q,q] − a[p,p]).
    """
    n = a.shape[0]
    a = np.array(a, dtype=np.complex128, copy=True)
    v = np.eye(n, dtype=np.complex128)
    if n == 1:
        return a.diagonal().real.copy(), v, 0

    scale = max(float(np.linalg.norm(a)), 1e-300)
    stop = 1e-15 * scale
    iu = np.triu_indices(n, 1)

    for sweep in range(1, _JACOBI_MAX_SWEEPS + 1):
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                mag = abs(b)
                if mag <= 1e-300:
                    continue
                alpha = a[p, p].real
                gamma = a[q, q].real
                diff = gamma - alpha
                if diff == 0.0:
                    t = math.pi / 4
                else:
                    t = 0.5 * math.atan(2.0 * mag / diff)
                c, s = math.cos(t), math.sin(t)
                ph = b / mag
                j = np.array([[ph * c, ph * s], [-s, c]], dtype=np.complex128)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ j
                a[idx, :] = np.conj(j.T) @ a[idx, :]
                v[:, idx] = v[:, idx] @ j
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
        off = float(np.sqrt(2.0 * np.sum(np.abs(a[iu]) ** 2)))
        if off <= stop:
            return a.diagonal().real.copy(), v, sweep

    raise ConvergenceError(
        "Jacobi não convergiu",
        {"n": n, "sweeps": _JACOBI_MAX_SWEEPS, "off_norm": off, "target": stop},
    )


def _pick_method(n: int, method: Optional[str]) -> str:
    cfg = get_settings().linalg
    m = (method or cfg.eig_solver).lower()
    if m == "auto":
        return "jacobi" if n <= cfg.jacobi_max_dim else "lapack"
    if m not in ("jacobi", "lapack"):
        raise ContractError(f"método de autovalores desconhecido: {m!r}")
    return m


def hermitian_eigs(a: ComplexMatrix, method: Optional[str] = None) -> EigenDecomposition:
    """
    Espectro real completo (decrescente) e base ortonormal de autovetores.

    Levanta ContractError se ‖a − a†‖_max > HERM_TOL.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ContractError(f"matriz quadrada esperada, recebido shape {a.shape}")
    res = hermiticity_residual(a)
    if res > HERM_TOL:
        raise ContractError(f"matriz não Hermitiana (resíduo {res:.3e} > {HERM_TOL:g})")
    h = 0.5 * (a + np.conj(a.T))

    m = _pick_method(h.shape[0], method)
    sweeps = 0
    if m == "jacobi":
        w, v, sweeps = _jacobi_eigh(h)
    else:
        w, v = np.linalg.eigh(h)
    order = np.argsort(-w, kind="stable")
    w = np.ascontiguousarray(w[order], dtype=np.float64)
    v = np.ascontiguousarray(v[:, order], dtype=np.complex128)
    return EigenDecomposition(eigenvalues=_freeze(w), eigenvectors=_freeze(v), method=m, sweeps=sweeps)


def operator_norm(a: ComplexMatrix, method: Optional[str] = None) -> float:
    """max_i |λ_i| de uma matriz Hermitiana."""
    w = hermitian_eigs(a, method).eigenvalues
    return float(max(abs(w[0]), abs(w[-1])))


# --------------------------------------------------------------------------------------
# Operadores locais em sistemas de n qudits
# --------------------------------------------------------------------------------------

def apply_local_ops(data: np.ndarray, ops: Mapping[int, np.ndarray], d: int, n: int) -> np.ndarray:
    """
    Aplica ⊗_s ops[s] (identidade nas demais partes) ao índice "ket" de `data`.

    `data` tem shape (d^n,) (vetor) ou (d^n, K) (colunas, ex. uma matriz densidade).
    Sítios são 1-based.
    """
    data = np.asarray(data, dtype=np.complex128)
    vec = data.ndim == 1
    cols = 1 if vec else data.shape[1]
    t = data.reshape((d,) * n + (cols,))
    for site, op in sorted(ops.items()):
        ax = site - 1
        t = np.tensordot(np.asarray(op, dtype=np.complex128), t, axes=([1], [ax]))
        t = np.moveaxis(t, 0, ax)
    out = t.reshape(d ** n) if vec else t.reshape(d ** n, cols)
    return out


def partial_trace(rho: np.ndarray, d: int, n: int, keep: Sequence[int]) -> np.ndarray:
    """Traço parcial de ρ (d^n x d^n) mantendo as partes `keep` (1-based, ordenadas)."""
    keep = sorted(set(int(k) for k in keep))
    t = np.asarray(rho, dtype=np.complex128).reshape((d,) * (2 * n))
    traced = [s for s in range(1, n + 1) if s not in keep]
    # contrai do maior para o menor para manter os índices válidos
    cur_n = n
    for s in sorted(traced, reverse=True):
        t = np.trace(t, axis1=s - 1, axis2=cur_n + s - 1)
        cur_n -= 1
    k = d ** len(keep)
    return t.reshape(k, k)
