# services/bounds.py
# -*- coding: utf-8 -*-
"""
Limite separável M_d e relações de incerteza de Fourier discretas.

- χ_θ = ½[(Z+Z†)cosθ + (X+X†)sinθ]; versão ponderada
  χ_θ^{(p)} = ½[√p(Z+Z†)cosθ + √(1−p)(X+X†)sinθ].
- M_d = (max_{θ∈[0,π/2]} ‖χ_θ‖)² = max_φ [|⟨Z⟩|² + |⟨X⟩|²].
  Com peso p: M_d(p) = max_φ [p|⟨Z⟩|² + (1−p)|⟨X⟩|²], pois
  √(|α|²+|β|²) = max_θ(|α|cosθ + |β|sinθ) com α = √p⟨Z⟩, β = √(1−p)⟨X⟩.
- Busca em θ: grade grossa (QWITNESS_THETA_GRID pontos) + seção áurea em
  torno do melhor ponto. Empates (TIE_TOL): π/4 se empatado, senão o menor θ.

APIs principais:
    chi_theta, separable_bound_m, direct_state_oracle_m, figure1_scan,
    fourier_distributions, mub_uncertainty_lhs, unitary_amplitude_pair
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from config.settings import TIE_TOL, get_settings
from infra.linalg import hermitian_eigs, operator_norm
from services.qudit_ops import BasisLabel, QuditState, check_dimension, check_seed, omega, pauli_x, pauli_z
from utils.errors import ConvergenceError, DomainError
from utils.logs import log_emit

__all__ = [
    "BoundResult",
    "FourierDistributionPair",
    "chi_theta",
    "separable_bound_m",
    "direct_state_oracle_m",
    "figure1_scan",
    "fourier_distributions",
    "mub_uncertainty_lhs",
    "unitary_amplitude_pair",
    "inside_regular_polygon",
]

HALF_PI = 0.5 * math.pi
QUARTER_PI = 0.25 * math.pi
_GOLDEN_MAX_ITER = 200
# razão áurea inversa
_INV_PHI = 2.0 / (1.0 + math.sqrt(5.0))


# ================
# Modelos
# ================

@dataclass(frozen=True)
class FourierDistributionPair:
    p: np.ndarray       # P(j) = ⟨j|ρ|j⟩
    p_bar: np.ndarray   # P̄(j) = ⟨j̄|ρ|j̄⟩

    def uncertainty_sum(self) -> float:
        return float(np.sum(self.p ** 2) + np.sum(self.p_bar ** 2))


@dataclass(frozen=True)
class BoundResult:
    d: int
    m_value: float
    theta_star: float
    optimizer_state: QuditState
    iterations: int
    residual: float
    weight: Optional[float] = None

    @property
    def chi_norm(self) -> float:
        return math.sqrt(self.m_value)

    def optimal_distributions(self) -> FourierDistributionPair:
        return fourier_distributions(self.optimizer_state)

    def to_dict(self) -> Dict[str, Any]:
        dist = self.optimal_distributions()
        return {
            "d": self.d,
            "m_value": self.m_value,
            "theta_star": self.theta_star,
            "weight": self.weight,
            "iterations": self.iterations,
            "residual": self.residual,
            "p_z": [float(x) for x in dist.p],
            "p_x": [float(x) for x in dist.p_bar],
        }


# ================
# Operador χ_θ
# ================

def _check_weight(weight: Optional[float]) -> Optional[float]:
    if weight is None:
        return None
    w = float(weight)
    if not 0.0 <= w <= 1.0:
        raise DomainError(f"peso p deve estar em [0, 1] (recebido {weight})")
    return w


def chi_theta(d: int, theta: float, weight: Optional[float] = None) -> np.ndarray:
    """
    χ_θ = ½[(Z+Z†)cosθ + (X+X†)sinθ] (weight=None, forma balanceada)
    ou ½[√p(Z+Z†)cosθ + √(1−p)(X+X†)sinθ] com p = weight.
    """
    d = check_dimension(d)
    theta = float(theta)
    if not 0.0 <= theta <= HALF_PI:
        raise DomainError(f"θ deve estar em [0, π/2] (recebido {theta})")
    w = _check_weight(weight)
    z, x = pauli_z(d), pauli_x(d)
    cz, cx = math.cos(theta), math.sin(theta)
    if w is not None:
        cz *= math.sqrt(w)
        cx *= math.sqrt(1.0 - w)
    chi = 0.5 * ((z + z.conj().T) * cz + (x + x.conj().T) * cx)
    # Hermitiana por construção; remove ruído de arredondamento
    return 0.5 * (chi + chi.conj().T)


def _golden_max(
    f: Callable[[float], float], lo: float, hi: float, tol: float
) -> Tuple[float, float, int, float]:
    """Seção áurea para máximo em [lo, hi]. Retorna (x, f(x), iterações, largura final)."""
    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    it = 0
    while hi - lo > tol and it < _GOLDEN_MAX_ITER:
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_PHI * (hi - lo)
            f2 = f(x2)
        it += 1
    width = hi - lo
    if width > tol:
        raise ConvergenceError(
            "seção áurea não convergiu",
            {"iterations": it, "width": width, "tol": tol, "bracket": [lo, hi]},
        )
    x = 0.5 * (lo + hi)
    return x, f(x), it, width


def separable_bound_m(
    d: int,
    tol: Optional[float] = None,
    weight: Optional[float] = None,
    grid: Optional[int] = None,
) -> BoundResult:
    """
    M_d = (max_θ ‖χ_θ‖)², com θ* e o estado ótimo (autovetor de maior |λ| de χ_{θ*}).
    """
    d = check_dimension(d)
    cfg = get_settings().bounds
    tol = float(cfg.tol if tol is None else tol)
    if not tol > 0:
        raise DomainError(f"tol deve ser > 0 (recebido {tol})")
    w = _check_weight(weight)
    npts = int(grid or cfg.theta_grid)

    def norm_at(theta: float) -> float:
        return operator_norm(chi_theta(d, theta, w))

    thetas = np.linspace(0.0, HALF_PI, npts)
    values = np.array([norm_at(float(t)) for t in thetas])
    i_best = int(np.argmax(values))
    log_emit(None, "debug", "bound_scan_done", d=d, weight=w, grid=npts, best_theta=float(thetas[i_best]))

    lo = float(thetas[max(i_best - 1, 0)])
    hi = float(thetas[min(i_best + 1, npts - 1)])
    t_ref, f_ref, iters, width = _golden_max(norm_at, lo, hi, tol)

    candidates = [(float(t), float(v)) for t, v in zip(thetas, values)]
    candidates.append((t_ref, f_ref))
    f_quarter = norm_at(QUARTER_PI)
    candidates.append((QUARTER_PI, f_quarter))
    best = max(v for _, v in candidates)
    tied = [t for t, v in candidates if v >= best - TIE_TOL]
    theta_star = QUARTER_PI if f_quarter >= best - TIE_TOL else min(tied)

    chi = chi_theta(d, theta_star, w)
    eig = hermitian_eigs(chi)
    top = 0 if abs(eig.eigenvalues[0]) >= abs(eig.eigenvalues[-1]) else -1
    norm_star = abs(float(eig.eigenvalues[top]))
    vec = eig.eigenvectors[:, top]
    state = QuditState.pure(vec / np.linalg.norm(vec), d, 1)

    result = BoundResult(
        d=d,
        m_value=norm_star ** 2,
        theta_star=theta_star,
        optimizer_state=state,
        iterations=npts + iters,
        residual=width,
        weight=w,
    )
    log_emit(None, "info", "bound_refine_done", d=d, weight=w, m_value=result.m_value,
             theta_star=theta_star, iterations=result.iterations, residual=width)
    return result


def figure1_scan(d_min: int, d_max: int, workers: Optional[int] = None,
                 tol: Optional[float] = None) -> List[BoundResult]:
    """M_d, θ* e distribuições ótimas para d_min..d_max (ordem de d preservada)."""
    d_min, d_max = check_dimension(d_min), check_dimension(d_max)
    if d_min > d_max:
        raise DomainError(f"intervalo inválido: dmin={d_min} > dmax={d_max}")
    nw = int(workers if workers is not None else get_settings().workers)
    ds = list(range(d_min, d_max + 1))
    if nw <= 1:
        return [separable_bound_m(d, tol) for d in ds]
    with ThreadPoolExecutor(max_workers=nw) as ex:
        return list(ex.map(lambda d: separable_bound_m(d, tol), ds))


# ================
# Oráculo direto sobre estados
# ================

def _amplitude_objective(psi: np.ndarray, d: int, w: Optional[float]) -> np.ndarray:
    """|⟨Z⟩|² + |⟨X⟩|² (ou p|⟨Z⟩|² + (1−p)|⟨X⟩|²) por linha de `psi` (normaliza)."""
    psi = psi / np.linalg.norm(psi, axis=-1, keepdims=True)
    phases = np.exp(1j * omega(d) * np.arange(d))
    ez = np.sum(np.abs(psi) ** 2 * phases, axis=-1)
    ex = np.sum(np.conj(psi) * np.roll(psi, 1, axis=-1), axis=-1)
    if w is None:
        return np.abs(ez) ** 2 + np.abs(ex) ** 2
    return w * np.abs(ez) ** 2 + (1.0 - w) * np.abs(ex) ** 2


def _ascend(starts: np.ndarray, d: int, w: Optional[float], max_iter: int = 400) -> np.ndarray:
    """
    Subida local grossa em lote sobre coordenadas reais (2d por estado), gradiente
    por diferença central, passo dobrado no aceite e dividido ao meio na rejeição.
    Devolve os estados complexos (normalizados) alcançados.
    """
    h = 1e-6
    x = starts / np.linalg.norm(starts, axis=1, keepdims=True)
    b, n = x.shape

    def f(xr: np.ndarray) -> np.ndarray:
        return _amplitude_objective(xr[..., :d] + 1j * xr[..., d:], d, w)

    fx = f(x)
    eta = np.full(b, 0.5)
    active = np.ones(b, dtype=bool)
    eye = np.eye(n) * h
    for _ in range(max_iter):
        if not active.any():
            break
        xa = x[active]
        plus = f(xa[:, None, :] + eye[None, :, :])
        minus = f(xa[:, None, :] - eye[None, :, :])
        g = (plus - minus) / (2.0 * h)
        cand = xa + eta[active, None] * g
        cand /= np.linalg.norm(cand, axis=1, keepdims=True)
        fc = f(cand)
        ok = fc > fx[active]
        idx = np.flatnonzero(active)
        x[idx[ok]] = cand[ok]
        fx[idx[ok]] = fc[ok]
        eta[idx[ok]] = np.minimum(eta[idx[ok]] * 2.0, 4.0)
        eta[idx[~ok]] *= 0.5
        active[idx] = eta[idx] > 1e-12
    return x[:, :d] + 1j * x[:, d:]


def _polish(psi: np.ndarray, d: int, w: Optional[float], tol: float = 1e-13,
            max_iter: int = 5000) -> np.ndarray:
    """
    Iteração de ponto fixo ψ ← autovetor dominante de
    H(ψ) = p(conj⟨Z⟩Z + ⟨Z⟩Z†) + (1−p)(conj⟨X⟩X + ⟨X⟩X†).

    Cada passo não diminui o objetivo: com a = ⟨Z⟩ atual e a' o novo,
    |a'|² ≥ 2Re(conj(a)a') − |a|². Cada linha para quando 1 − |⟨ψ'|ψ⟩| < tol
    ou quando o objetivo deixa de subir.
    """
    z, x = pauli_z(d), pauli_x(d)
    pz, px = (1.0, 1.0) if w is None else (w, 1.0 - w)
    psi = psi / np.linalg.norm(psi, axis=1, keepdims=True)
    val = _amplitude_objective(psi, d, w)
    active = np.ones(psi.shape[0], dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        cur = psi[idx]
        ez = np.einsum("bi,ij,bj->b", cur.conj(), z, cur)
        ex = np.einsum("bi,ij,bj->b", cur.conj(), x, cur)
        h = (pz * (ez.conj()[:, None, None] * z + ez[:, None, None] * z.conj().T)
             + px * (ex.conj()[:, None, None] * x + ex[:, None, None] * x.conj().T))
        _, vecs = np.linalg.eigh(h)
        nxt = vecs[:, :, -1]
        overlap = np.abs(np.einsum("bi,bi->b", nxt.conj(), cur))
        nval = _amplitude_objective(nxt, d, w)
        gain = nval - val[idx]
        psi[idx] = nxt
        val[idx] = nval
        active[idx] = (1.0 - overlap >= tol) & (gain >= 1e-15)
    return val


def _oracle_batch(starts: np.ndarray, d: int, w: Optional[float]) -> np.ndarray:
    return _polish(_ascend(starts, d, w), d, w)


def direct_state_oracle_m(
    d: int,
    restarts: Optional[int] = None,
    seed: int = 0,
    weight: Optional[float] = None,
    workers: Optional[int] = None,
) -> float:
    """
    Melhor valor de |⟨Z⟩|² + |⟨X⟩|² encontrado por subida local com reinícios,
    refinada por ponto fixo (oráculo independente, limite inferior de M_d).
    """
    d = check_dimension(d)
    cfg = get_settings()
    r = int(restarts if restarts is not None else cfg.bounds.oracle_restarts)
    if r < 1:
        raise DomainError(f"restarts deve ser >= 1 (recebido {r})")
    w = _check_weight(weight)
    rng = np.random.Generator(np.random.PCG64(check_seed(seed)))
    starts = rng.standard_normal((r, 2 * d))

    nw = int(workers if workers is not None else cfg.workers)
    if nw < 1:
        raise DomainError(f"workers deve ser >= 1 (recebido {nw})")
    if nw == 1:
        best = float(np.max(_oracle_batch(starts, d, w)))
    else:
        chunks = np.array_split(starts, min(nw, r))
        with ThreadPoolExecutor(max_workers=nw) as ex:
            best = float(max(np.max(v) for v in ex.map(lambda s: _oracle_batch(s, d, w), chunks)))
    log_emit(None, "info", "oracle_done", d=d, restarts=r, seed=seed, value=best)
    return best


# ================
# Relações de incerteza
# ================

def _single_party(state: QuditState) -> QuditState:
    if state.parties != 1:
        raise DomainError(f"estado de um qudit esperado, recebido {state.parties} partes")
    return state


def fourier_distributions(state: QuditState) -> FourierDistributionPair:
    s = _single_party(state)
    p = s.basis_probabilities([BasisLabel.ZBasis])
    pb = s.basis_probabilities([BasisLabel.XBasis])
    return FourierDistributionPair(p=p, p_bar=pb)


def mub_uncertainty_lhs(state: QuditState) -> float:
    """Σ_j (P²(j) + P̄²(j)); para bases mutuamente não-enviesadas vale ≤ 1 + 1/d."""
    return fourier_distributions(state).uncertainty_sum()


def unitary_amplitude_pair(state: QuditState) -> Tuple[complex, complex]:
    """(⟨Z⟩, ⟨X⟩), ambos dentro do d-ágono regular inscrito no círculo unitário."""
    s = _single_party(state)
    return s.expectation(pauli_z(s.d)), s.expectation(pauli_x(s.d))


def inside_regular_polygon(z: complex, d: int, tol: float = 1e-12) -> bool:
    """
    Testa se z está no d-ágono regular com vértices e^{iωk} (d = 2: o segmento [−1, 1]).
    """
    d = check_dimension(d)
    if d == 2:
        return abs(z.imag) <= tol and abs(z.real) <= 1.0 + tol
    w = omega(d)
    apothem = math.cos(math.pi / d)
    for k in range(d):
        mid = (k + 0.5) * w
        if z.real * math.cos(mid) + z.imag * math.sin(mid) > apothem + tol:
            return False
    return True
