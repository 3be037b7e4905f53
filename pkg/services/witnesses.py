# services/witnesses.py
# -*- coding: utf-8 -*-
"""
Testemunhas de emaranhamento de dois qudits a partir de duas configurações locais.

- C_d = Σ_j (|jj⟩⟨jj| + |j̄,−j̄⟩⟨j̄,−j̄|)          separável: ⟨C_d⟩ ≤ 1 + 1/d
- R_d = ½(Z_A Z_B† + Z_A† Z_B + X_A X_B + X_A† X_B†)  separável: ⟨R_d⟩ ≤ M_d
- Formas Bell-diagonais:
    C_d = Σ_{l,m} ([l=0] + [m=0]) Φ_{l,m}
    R_d = Σ_{l,m} (cos lω + cos mω) Φ_{l,m}
- Cotas da fração MES f = ⟨Φ_{0,0}|ρ|Φ_{0,0}⟩:
    f ≥ ⟨C_d⟩ − 1  e  f ≥ (⟨R_d⟩ − (1+cos ω)) / (1 − cos ω)
- Número de Schmidt ≥ k quando f > (k−1)/d.

Violações estritas exigem margem > EPS_DECIDE.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import EPS_DECIDE, get_settings
from infra.linalg import hermitian_eigs, tensor
from services.bounds import BoundResult, separable_bound_m
from services.qudit_ops import (
    QuditState,
    bell_state,
    check_dimension,
    fourier_matrix,
    omega,
    pauli_x,
    pauli_z,
)
from utils.errors import ContractError, DomainError, ShapeError
from utils.logs import log_emit

__all__ = [
    "BellCoefficients",
    "WitnessReport",
    "WeightedWitnessReport",
    "correlation_operator_c",
    "amplitude_operator_r",
    "weighted_amplitude_operator",
    "bell_basis",
    "bell_coefficients",
    "evaluate_witnesses",
    "evaluate_weighted_witness",
    "evaluate_many",
    "operator_upper_bound_check",
    "schmidt_number_thresholds",
    "schmidt_from_fraction",
    "fraction_lower_bounds",
    "qubit_average_correlation",
]

BELL_DIAG_TOL = 1e-9
IMAG_TOL = 1e-9


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


# =====================
# Operadores
# =====================

@lru_cache(maxsize=64)
def correlation_operator_c(d: int) -> np.ndarray:
    """C_d: projetores dos resultados correlacionados (Z) e anticorrelacionados (X)."""
    d = check_dimension(d)
    c = np.zeros((d * d, d * d), dtype=np.complex128)
    j = np.arange(d)
    c[j * d + j, j * d + j] = 1.0
    f = fourier_matrix(d)
    for k in range(d):
        v = np.kron(f[:, k], f[:, (-k) % d])
        c += np.outer(v, np.conj(v))
    return _freeze(0.5 * (c + c.conj().T))


@lru_cache(maxsize=64)
def _r_pauli(d: int) -> np.ndarray:
    z, x = pauli_z(d), pauli_x(d)
    zd, xd = z.conj().T, x.conj().T
    r = 0.5 * (tensor(z, zd) + tensor(zd, z) + tensor(x, x) + tensor(xd, xd))
    return _freeze(0.5 * (r + r.conj().T))


@lru_cache(maxsize=64)
def _r_projector(d: int) -> np.ndarray:
    w = omega(d)
    j = np.arange(d)
    cos_minus = np.cos(w * (j[:, None] - j[None, :])).ravel()
    cos_plus = np.cos(w * (j[:, None] + j[None, :])).ravel()
    ff = np.kron(fourier_matrix(d), fourier_matrix(d))
    r = np.diag(cos_minus).astype(np.complex128) + (ff * cos_plus) @ ff.conj().T
    return _freeze(0.5 * (r + r.conj().T))


def amplitude_operator_r(d: int, form: str = "pauli") -> np.ndarray:
    """
    R_d pela forma de Pauli ("pauli") ou pela decomposição em projetores das
    duas bases conjuntas ("projector"). As duas coincidem.
    """
    d = check_dimension(d)
    if form == "pauli":
        return _r_pauli(d)
    if form == "projector":
        return _r_projector(d)
    raise DomainError(f"forma de R_d desconhecida: {form!r} (use 'pauli' ou 'projector')")


def weighted_amplitude_operator(d: int, p: float) -> np.ndarray:
    """R^(p) = p(Z_A Z_B† + Z_A† Z_B) + (1−p)(X_A X_B + X_A† X_B†); p = ½ dá R_d."""
    d = check_dimension(d)
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"peso p deve estar em [0, 1] (recebido {p})")
    z, x = pauli_z(d), pauli_x(d)
    zd, xd = z.conj().T, x.conj().T
    r = p * (tensor(z, zd) + tensor(zd, z)) + (1.0 - p) * (tensor(x, x) + tensor(xd, xd))
    return _freeze(0.5 * (r + r.conj().T))


# =====================
# Decomposição na base de Bell
# =====================

@dataclass(frozen=True)
class BellCoefficients:
    d: int
    coeffs: np.ndarray   # coeffs[l, m] = ⟨Φ_{l,m}|op|Φ_{l,m}⟩

    def reconstruct(self) -> np.ndarray:
        u = bell_basis(self.d)
        return (u * self.coeffs.ravel()) @ u.conj().T


@lru_cache(maxsize=64)
def bell_basis(d: int) -> np.ndarray:
    """Matriz unitária d²×d² cuja coluna l·d+m é |Φ_{l,m}⟩."""
    d = check_dimension(d)
    cols = [bell_state(d, l, m).data for l in range(d) for m in range(d)]
    return _freeze(np.stack(cols, axis=1))


def bell_coefficients(op: np.ndarray, d: int) -> BellCoefficients:
    d = check_dimension(d)
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (d * d, d * d):
        raise DomainError(f"operador deve ser {d * d}x{d * d}, recebido {op.shape}")
    u = bell_basis(d)
    b = u.conj().T @ op @ u
    off = b - np.diag(np.diag(b))
    max_off = float(np.max(np.abs(off))) if off.size else 0.0
    if max_off > BELL_DIAG_TOL:
        raise ShapeError(f"operador não é Bell-diagonal (maior elemento fora da diagonal {max_off:.3e})", max_off)
    diag = np.diag(b)
    if float(np.max(np.abs(diag.imag))) > BELL_DIAG_TOL:
        raise ShapeError("coeficientes de Bell não reais", float(np.max(np.abs(diag.imag))))
    return BellCoefficients(d=d, coeffs=_freeze(diag.real.reshape(d, d).copy()))


# =====================
# Relatórios
# =====================

@dataclass(frozen=True)
class WitnessReport:
    d: int
    c_value: float
    r_value: float
    c_bound: float
    r_bound: float
    c_margin: float
    r_margin: float
    c_violated: bool
    r_violated: bool
    fraction_lb_c: float
    fraction_lb_r: float
    mes_fraction_lb: float
    mes_fraction_lb_clamped: float
    schmidt_lb: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class WeightedWitnessReport:
    d: int
    p: float
    value: float
    bound: float
    margin: float
    violated: bool

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _real_expectation(state: QuditState, op: np.ndarray, what: str) -> float:
    v = state.expectation(op)
    if abs(v.imag) > IMAG_TOL:
        raise ContractError(f"⟨{what}⟩ com parte imaginária {v.imag:.3e}")
    return float(v.real)


def _check_two_party(rho: QuditState, d: Optional[int] = None) -> None:
    if rho.parties != 2:
        raise DomainError(f"estado de dois qudits esperado, recebido {rho.parties} partes")
    if d is not None and rho.d != d:
        raise DomainError(f"dimensão do estado ({rho.d}) difere da do limite ({d})")


def fraction_lower_bounds(d: int, c_value: float, r_value: float) -> Tuple[float, float]:
    """(⟨C_d⟩ − 1, (⟨R_d⟩ − (1+cos ω)) / (1 − cos ω))."""
    cw = math.cos(omega(d))
    return c_value - 1.0, (r_value - (1.0 + cw)) / (1.0 - cw)


def schmidt_from_fraction(fraction_lb: float, d: int) -> int:
    """Maior k ∈ [1, d] com fraction_lb > (k−1)/d (+EPS_DECIDE)."""
    d = check_dimension(d)
    k = 1
    for kk in range(2, d + 1):
        if fraction_lb > (kk - 1) / d + EPS_DECIDE:
            k = kk
    return k


def _report(d: int, c_value: float, r_value: float, m_value: float) -> WitnessReport:
    c_bound = 1.0 + 1.0 / d
    c_margin = c_value - c_bound
    r_margin = r_value - m_value
    f_c, f_r = fraction_lb_pair = fraction_lower_bounds(d, c_value, r_value)
    f_raw = max(fraction_lb_pair)
    return WitnessReport(
        d=d,
        c_value=c_value,
        r_value=r_value,
        c_bound=c_bound,
        r_bound=m_value,
        c_margin=c_margin,
        r_margin=r_margin,
        c_violated=c_margin > EPS_DECIDE,
        r_violated=r_margin > EPS_DECIDE,
        fraction_lb_c=f_c,
        fraction_lb_r=f_r,
        mes_fraction_lb=f_raw,
        mes_fraction_lb_clamped=min(max(f_raw, 0.0), 1.0),
        schmidt_lb=schmidt_from_fraction(f_raw, d),
    )


def evaluate_witnesses(rho: QuditState, bound: BoundResult) -> WitnessReport:
    _check_two_party(rho, bound.d)
    if bound.weight is not None:
        raise DomainError("evaluate_witnesses exige o limite balanceado (weight=None)")
    d = rho.d
    c_value = _real_expectation(rho, correlation_operator_c(d), "C_d")
    r_value = _real_expectation(rho, amplitude_operator_r(d), "R_d")
    rep = _report(d, c_value, r_value, bound.m_value)
    log_emit(None, "debug", "witness_evaluated", d=d, c_value=c_value, r_value=r_value,
             c_violated=rep.c_violated, r_violated=rep.r_violated, schmidt_lb=rep.schmidt_lb)
    return rep


def evaluate_weighted_witness(
    rho: QuditState, p: float, bound: Optional[BoundResult] = None
) -> WeightedWitnessReport:
    """⟨R^(p)⟩ contra 2·M_d(p)."""
    _check_two_party(rho)
    d = rho.d
    if bound is None:
        bound = separable_bound_m(d, weight=p)
    elif bound.d != d or bound.weight is None or abs(bound.weight - float(p)) > 1e-15:
        raise DomainError("limite incompatível com (d, p) do estado/testemunha")
    value = _real_expectation(rho, weighted_amplitude_operator(d, p), "R^(p)")
    b = 2.0 * bound.m_value
    margin = value - b
    return WeightedWitnessReport(d=d, p=float(p), value=value, bound=b, margin=margin,
                                 violated=margin > EPS_DECIDE)


def evaluate_many(
    states: Sequence[QuditState], bound: BoundResult, workers: Optional[int] = None
) -> List[WitnessReport]:
    """Avalia uma lista de estados; saída na mesma ordem da entrada."""
    nw = int(workers if workers is not None else get_settings().workers)
    if nw <= 1 or len(states) <= 1:
        return [evaluate_witnesses(s, bound) for s in states]
    with ThreadPoolExecutor(max_workers=nw) as ex:
        return list(ex.map(lambda s: evaluate_witnesses(s, bound), states))


# =====================
# Verificações de operador e limiares
# =====================

def operator_upper_bound_check(d: int) -> Tuple[float, float]:
    """
    Autovalores mínimos de (I + Φ_{0,0} − C_d) e ((1−cos ω)Φ_{0,0} + (1+cos ω)I − R_d).
    Ambos devem ser ≥ −1e-9.
    """
    d = check_dimension(d)
    cw = math.cos(omega(d))
    phi = np.outer(bell_state(d, 0, 0).data, np.conj(bell_state(d, 0, 0).data))
    eye = np.eye(d * d)
    a = eye + phi - correlation_operator_c(d)
    b = (1.0 - cw) * phi + (1.0 + cw) * eye - amplitude_operator_r(d)
    min_a = float(hermitian_eigs(0.5 * (a + a.conj().T)).eigenvalues[-1])
    min_b = float(hermitian_eigs(0.5 * (b + b.conj().T)).eigenvalues[-1])
    return min_a, min_b


def schmidt_number_thresholds(d: int, m_value: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Para k = 1..d: ⟨C_d⟩ > 1 + (k−1)/d  ou  ⟨R_d⟩ > ((d−k+1)cos ω + (d+k−1))/d
    certificam número de Schmidt ≥ k. `m_value` não entra no cálculo.
    """
    d = check_dimension(d)
    k = np.arange(1, d + 1, dtype=float)
    cw = math.cos(omega(d))
    c_thr = 1.0 + (k - 1.0) / d
    r_thr = ((d - k + 1.0) * cw + (d + k - 1.0)) / d
    return c_thr, r_thr


def qubit_average_correlation(rho: QuditState) -> float:
    """½⟨C_2⟩: correlação média bit Z / bit X; acima de 3/4 certifica emaranhamento."""
    _check_two_party(rho)
    if rho.d != 2:
        raise DomainError(f"qubit_average_correlation exige d = 2 (recebido {rho.d})")
    return 0.5 * _real_expectation(rho, correlation_operator_c(2), "C_2")
