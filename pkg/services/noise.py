# services/noise.py
# -*- coding: utf-8 -*-
"""
Famílias de MES ruidosos e limiares de tolerância a ruído.

    ψ(p)   = p Φ_{0,0} + (1−p) Φ_{⌊d/2⌋,⌊d/2⌋}
    φ(p)   = p Φ_{0,0} + (1−p) Φ_{1,0}
    iso(p) = p Φ_{0,0} + (1−p) I/d²

As expectativas de C_d e R_d são afins em p, então o limiar sai em forma
fechada dos coeficientes de Bell; a bisseção (60 passos fixos) sobre as
expectativas densas serve de verificação cruzada.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from config.settings import EPS_DECIDE, get_settings
from infra.linalg import check_dim_cap
from services.bounds import separable_bound_m
from services.qudit_ops import QuditState, bell_projector, check_dimension
from services.witnesses import amplitude_operator_r, bell_coefficients, correlation_operator_c
from utils.errors import ConvergenceError, DomainError
from utils.logs import log_emit

__all__ = [
    "NoiseFamily",
    "WitnessKind",
    "ThresholdResult",
    "THRESHOLD_METHODS",
    "Interval",
    "noisy_state",
    "noise_density",
    "threshold",
    "exclusive_regions",
    "figure2_scan",
]

BISECT_STEPS = 60
CROSSCHECK_TOL = 1e-8
THRESHOLD_METHODS = ("closed_form", "bisection")


class NoiseFamily(str, Enum):
    PsiHalfShift = "psi"
    PhiUnitShift = "phi"
    Isotropic = "iso"

    @classmethod
    def parse(cls, value: "NoiseFamily | str") -> "NoiseFamily":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise DomainError(f"família de ruído desconhecida: {value!r} (psi|phi|iso)") from None


class WitnessKind(str, Enum):
    Cd = "c"
    Rd = "r"

    @classmethod
    def parse(cls, value: "WitnessKind | str") -> "WitnessKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise DomainError(f"testemunha desconhecida: {value!r} (c|r)") from None


@dataclass(frozen=True)
class ThresholdResult:
    d: int
    family: NoiseFamily
    witness: WitnessKind
    p_star: Optional[float]
    method: str = "closed_form"
    p_bisect: Optional[float] = None
    bound: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "d": self.d,
            "family": self.family.value,
            "witness": self.witness.value,
            "p_star": self.p_star,
            "method": self.method,
            "p_bisect": self.p_bisect,
            "bound": self.bound,
        }


@dataclass(frozen=True)
class Interval:
    """Intervalo (lo, hi] em p."""
    lo: float
    hi: float

    def contains(self, p: float) -> bool:
        return self.lo < p <= self.hi

    def to_list(self) -> List[float]:
        return [self.lo, self.hi]


# =====================
# Estados
# =====================

def _noise_bell_index(d: int, family: NoiseFamily) -> Optional[Tuple[int, int]]:
    if family is NoiseFamily.PsiHalfShift:
        return d // 2, d // 2
    if family is NoiseFamily.PhiUnitShift:
        return 1, 0
    return None


def noise_density(d: int, family: "NoiseFamily | str") -> np.ndarray:
    """Componente de ruído (p = 0) da família."""
    d = check_dimension(d)
    fam = NoiseFamily.parse(family)
    idx = _noise_bell_index(d, fam)
    if idx is None:
        return np.eye(d * d, dtype=np.complex128) / (d * d)
    return np.array(bell_projector(d, *idx))


def noisy_state(d: int, family: "NoiseFamily | str", p: float) -> QuditState:
    d = check_dimension(d)
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p deve estar em [0, 1] (recebido {p})")
    rho = p * bell_projector(d, 0, 0) + (1.0 - p) * noise_density(d, family)
    return QuditState.density(rho, d, 2)


# =====================
# Limiares
# =====================

def _witness_operator(d: int, witness: WitnessKind) -> np.ndarray:
    return correlation_operator_c(d) if witness is WitnessKind.Cd else amplitude_operator_r(d)


def _witness_bound(d: int, witness: WitnessKind, m_value: Optional[float]) -> float:
    if witness is WitnessKind.Cd:
        return 1.0 + 1.0 / d
    if m_value is None:
        raise DomainError("threshold com R_d exige m_value")
    return float(m_value)


def _affine_from_bell(d: int, family: NoiseFamily, witness: WitnessKind) -> Tuple[float, float]:
    """(a, b) com ⟨W⟩(p) = a·p + b·(1−p)."""
    coeffs = bell_coefficients(_witness_operator(d, witness), d).coeffs
    idx = _noise_bell_index(d, family)
    b = float(np.mean(coeffs)) if idx is None else float(coeffs[idx])
    return float(coeffs[0, 0]), b


def _solve_affine(a: float, b: float, bound: float) -> Optional[float]:
    # violação exige margem acima de EPS_DECIDE nos extremos p = 0 e p = 1
    if b - bound > EPS_DECIDE:
        return 0.0
    if a - bound <= EPS_DECIDE or a == b:
        return None
    return min(max((bound - b) / (a - b), 0.0), 1.0)


def _bisect(margin, steps: int = BISECT_STEPS) -> Optional[float]:
    if margin(1.0) <= EPS_DECIDE:
        return None
    if margin(0.0) > EPS_DECIDE:
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if margin(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return min(max(hi, 0.0), 1.0)


def threshold(
    d: int,
    family: "NoiseFamily | str",
    witness: "WitnessKind | str",
    m_value: Optional[float] = None,
    crosscheck: bool = True,
    method: str = "closed_form",
) -> ThresholdResult:
    """
    Menor p com ⟨W⟩(p) estritamente acima do limite separável (None se nunca).

    method escolhe de onde vem p_star: "closed_form" (coeficientes de Bell) ou
    "bisection" (traços diretos). Com crosscheck ou em "bisection" os dois rodam
    e precisam concordar.
    """
    d = check_dimension(d)
    fam = NoiseFamily.parse(family)
    wk = WitnessKind.parse(witness)
    if method not in THRESHOLD_METHODS:
        raise DomainError(f"método de limiar inválido: {method!r} (use {', '.join(THRESHOLD_METHODS)})")
    bound = _witness_bound(d, wk, m_value)

    a, b = _affine_from_bell(d, fam, wk)
    p_closed = _solve_affine(a, b, bound)

    p_bis: Optional[float] = None
    if crosscheck or method == "bisection":
        op = _witness_operator(d, wk)
        ea = float(np.real(np.trace(bell_projector(d, 0, 0) @ op)))
        eb = float(np.real(np.trace(noise_density(d, fam) @ op)))
        p_bis = _bisect(lambda p: p * ea + (1.0 - p) * eb - bound)
        agree = (p_closed is None and p_bis is None) or (
            p_closed is not None and p_bis is not None and abs(p_closed - p_bis) <= CROSSCHECK_TOL
        )
        log_emit(None, "debug", "threshold_crosscheck", d=d, family=fam.value, witness=wk.value,
                 p_closed=p_closed, p_bisect=p_bis, agree=agree)
        if not agree:
            raise ConvergenceError(
                "forma fechada e bisseção divergem",
                {"d": d, "family": fam.value, "witness": wk.value, "p_closed": p_closed, "p_bisect": p_bis},
            )

    p_star = p_bis if method == "bisection" else p_closed
    res = ThresholdResult(d=d, family=fam, witness=wk, p_star=p_star, method=method,
                          p_bisect=p_bis, bound=bound)
    log_emit(None, "info", "threshold_done", d=d, family=fam.value, witness=wk.value, p_star=p_star,
             method=method)
    return res


def exclusive_regions(d: int, m_value: float) -> Tuple[Optional[Interval], Optional[Interval]]:
    """
    X: p em que ψ(p) viola a condição de C_d mas não a de R_d.
    Y: p em que φ(p) viola a condição de R_d mas não a de C_d.
    """
    d = check_dimension(d)

    def p_of(fam: NoiseFamily, wk: WitnessKind) -> float:
        p = threshold(d, fam, wk, m_value, crosscheck=False).p_star
        return 1.0 if p is None else p

    x_lo, x_hi = p_of(NoiseFamily.PsiHalfShift, WitnessKind.Cd), p_of(NoiseFamily.PsiHalfShift, WitnessKind.Rd)
    y_lo, y_hi = p_of(NoiseFamily.PhiUnitShift, WitnessKind.Rd), p_of(NoiseFamily.PhiUnitShift, WitnessKind.Cd)
    x = Interval(x_lo, x_hi) if x_hi - x_lo > EPS_DECIDE else None
    y = Interval(y_lo, y_hi) if y_hi - y_lo > EPS_DECIDE else None
    return x, y


def _scan_row(d: int) -> List[ThresholdResult]:
    m = separable_bound_m(d).m_value
    rows = [
        threshold(d, fam, wk, m)
        for fam in NoiseFamily
        for wk in WitnessKind
    ]
    return rows


def figure2_scan(d_min: int, d_max: int, workers: Optional[int] = None) -> List[ThresholdResult]:
    """Seis limiares (família × testemunha) por d, ordenados por (d, família, testemunha)."""
    d_min, d_max = check_dimension(d_min), check_dimension(d_max)
    if d_min > d_max:
        raise DomainError(f"intervalo inválido: dmin={d_min} > dmax={d_max}")
    check_dim_cap(d_max * d_max, "operador de dois qudits")
    ds = list(range(d_min, d_max + 1))
    nw = int(workers if workers is not None else get_settings().workers)
    if nw <= 1:
        per_d = [_scan_row(d) for d in ds]
    else:
        with ThreadPoolExecutor(max_workers=nw) as ex:
            per_d = list(ex.map(_scan_row, ds))
    return [r for rows in per_d for r in rows]
