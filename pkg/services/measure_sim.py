# services/measure_sim.py
# -*- coding: utf-8 -*-
"""
Simulação do experimento de duas configurações locais.

- Amostragem: numpy.random.Generator(PCG64(seed)), CDF inversa
  (searchsorted sobre cumsum em ordem row-major) e contagem por bincount.
  Mesmo (estado, base, shots, seed) => mesmas contagens.
- Estimadores:
    ĉ = Σ_j Pz(j,j) + Σ_j Px(j,−j)
    r̂ = Σ_{j,k} Pz(j,k) cos ω(j−k) + Σ_{j,k} Px(j,k) cos ω(j+k)
- Sementes das duas configurações: SeedSequence(seed).spawn(2).

Também cobre o caso multipartido com duas configurações (todas Z / todas X
para GHZ; padrões alternados Z/X para cluster).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Sequence, Tuple

import numpy as np

from config.settings import PROB_TOL
from services.bounds import BoundResult
from services.multipartite import StabilizerKind
from services.qudit_ops import BasisLabel, QuditState, check_parties, check_seed, omega
from services.witnesses import fraction_lower_bounds, schmidt_from_fraction
from utils.errors import DomainError, InvalidStateError
from utils.logs import log_emit

__all__ = [
    "ShotRecord",
    "MultiShotRecord",
    "EstimateReport",
    "CertifiedReport",
    "PairEstimate",
    "MultipartiteCertificate",
    "derive_seeds",
    "sample_joint_basis",
    "simulate_two_settings",
    "estimate_c",
    "estimate_r",
    "estimate_both",
    "certify_from_shots",
    "ghz_settings",
    "cluster_settings",
    "sample_product_basis",
    "estimate_ghz_pair",
    "estimate_cluster_pair",
    "certify_multipartite",
]

# probabilidades abaixo disso viram zero exato (ruído de arredondamento)
_PROB_FLOOR = 1e-15


# ================
# Registros
# ================

@dataclass(frozen=True)
class ShotRecord:
    d: int
    basis: BasisLabel
    shots: int
    counts: np.ndarray   # d×d, counts[j, k]
    seed: int

    def frequencies(self) -> np.ndarray:
        return self.counts / float(self.shots)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "d": self.d,
            "basis": self.basis.value,
            "shots": self.shots,
            "seed": self.seed,
            "counts": [int(c) for c in self.counts.ravel()],
        }


@dataclass(frozen=True)
class MultiShotRecord:
    d: int
    n: int
    bases: Tuple[BasisLabel, ...]
    shots: int
    counts: np.ndarray   # d^n, ordem row-major (parte 1 mais significativa)
    seed: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "d": self.d,
            "n": self.n,
            "bases": "".join(b.value for b in self.bases),
            "shots": self.shots,
            "seed": self.seed,
            "counts": [int(c) for c in self.counts],
        }


@dataclass(frozen=True)
class EstimateReport:
    c_hat: float
    c_se: float
    r_hat: float
    r_se: float
    shots_per_setting: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "c_hat": self.c_hat,
            "c_se": self.c_se,
            "r_hat": self.r_hat,
            "r_se": self.r_se,
            "shots_per_setting": self.shots_per_setting,
        }


@dataclass(frozen=True)
class CertifiedReport:
    d: int
    estimate: EstimateReport
    c_bound: float
    r_bound: float
    sigmas: float
    c_certified: bool
    r_certified: bool
    mes_fraction_lb: float
    mes_fraction_lb_clamped: float
    schmidt_lb: int

    def to_dict(self) -> Dict[str, Any]:
        out = self.estimate.to_dict()
        out.update(
            d=self.d,
            c_bound=self.c_bound,
            r_bound=self.r_bound,
            sigmas=self.sigmas,
            c_certified=self.c_certified,
            r_certified=self.r_certified,
            mes_fraction_lb=self.mes_fraction_lb,
            mes_fraction_lb_clamped=self.mes_fraction_lb_clamped,
            schmidt_lb=self.schmidt_lb,
        )
        return out


# ================
# Amostragem
# ================

def derive_seeds(seed: int, count: int = 2) -> List[int]:
    """Sementes filhas de 64 bits, independentes e reprodutíveis."""
    children = np.random.SeedSequence(check_seed(seed)).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def _check_shots(shots: int) -> int:
    if isinstance(shots, bool) or int(shots) != shots or shots < 1:
        raise DomainError(f"shots deve ser inteiro >= 1 (recebido {shots!r})")
    return int(shots)


def _draw(probs: np.ndarray, shots: int, seed: int) -> np.ndarray:
    p = np.asarray(probs, dtype=float).copy()
    total = float(p.sum())
    if float(p.min()) < -PROB_TOL or abs(total - 1.0) > PROB_TOL:
        raise InvalidStateError(f"probabilidades inválidas (soma={total:.12g}, mínimo={float(p.min()):.3e})")
    p[p < _PROB_FLOOR] = 0.0
    p /= p.sum()
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    rng = np.random.Generator(np.random.PCG64(check_seed(seed)))
    u = rng.random(shots)
    idx = np.searchsorted(cdf, u, side="right")
    return np.bincount(idx, minlength=p.size).astype(np.int64)


def sample_joint_basis(rho: QuditState, basis: "BasisLabel | str", shots: int, seed: int) -> ShotRecord:
    """Mede as duas partes na mesma base (Z ou X) `shots` vezes."""
    if rho.parties != 2:
        raise DomainError(f"estado de dois qudits esperado, recebido {rho.parties} partes")
    b = BasisLabel.parse(basis)
    shots = _check_shots(shots)
    probs = rho.basis_probabilities([b, b])
    counts = _draw(probs, shots, seed).reshape(rho.d, rho.d)
    counts.flags.writeable = False
    log_emit(None, "debug", "shots_sampled", d=rho.d, basis=b.value, shots=shots, seed=int(seed))
    return ShotRecord(d=rho.d, basis=b, shots=shots, counts=counts, seed=int(seed))


def simulate_two_settings(rho: QuditState, shots: int, seed: int) -> Tuple[ShotRecord, ShotRecord]:
    """Registros Z e X com `shots` cada, sementes derivadas de `seed`."""
    sz, sx = derive_seeds(seed, 2)
    return (
        sample_joint_basis(rho, BasisLabel.ZBasis, shots, sz),
        sample_joint_basis(rho, BasisLabel.XBasis, shots, sx),
    )


# ================
# Estimadores de dois qudits
# ================

def _check_pair(z: ShotRecord, x: ShotRecord) -> int:
    if z.basis is not BasisLabel.ZBasis or x.basis is not BasisLabel.XBasis:
        raise DomainError(f"esperados registros Z e X, recebido {z.basis.value} e {x.basis.value}")
    if z.d != x.d:
        raise DomainError(f"registros com dimensões diferentes ({z.d} e {x.d})")
    return z.d


def _weighted_mean_se(counts: np.ndarray, scores: np.ndarray, shots: int) -> Tuple[float, float]:
    c = counts.ravel().astype(float)
    s = scores.ravel()
    mean = float(np.dot(c, s) / shots)
    if shots < 2:
        return mean, 0.0
    var = float(np.dot(c, (s - mean) ** 2) / (shots - 1))
    return mean, math.sqrt(var / shots)


def estimate_c(z: ShotRecord, x: ShotRecord) -> Tuple[float, float]:
    d = _check_pair(z, x)
    j = np.arange(d)
    pz = float(z.counts[j, j].sum()) / z.shots
    px = float(x.counts[j, (-j) % d].sum()) / x.shots
    se = math.sqrt(pz * (1.0 - pz) / z.shots + px * (1.0 - px) / x.shots)
    return pz + px, se


def estimate_r(z: ShotRecord, x: ShotRecord) -> Tuple[float, float]:
    d = _check_pair(z, x)
    w = omega(d)
    j = np.arange(d)
    score_z = np.cos(w * ((j[:, None] - j[None, :]) % d))
    score_x = np.cos(w * ((j[:, None] + j[None, :]) % d))
    mz, sez = _weighted_mean_se(z.counts, score_z, z.shots)
    mx, sex = _weighted_mean_se(x.counts, score_x, x.shots)
    return mz + mx, math.sqrt(sez ** 2 + sex ** 2)


def estimate_both(z: ShotRecord, x: ShotRecord) -> EstimateReport:
    c_hat, c_se = estimate_c(z, x)
    r_hat, r_se = estimate_r(z, x)
    return EstimateReport(c_hat=c_hat, c_se=c_se, r_hat=r_hat, r_se=r_se,
                          shots_per_setting=min(z.shots, x.shots))


def certify_from_shots(z: ShotRecord, x: ShotRecord, bound: BoundResult, sigmas: float = 5.0) -> CertifiedReport:
    """
    Violação certificada só quando estimativa − limite > sigmas·SE. Fração MES e
    número de Schmidt usam os valores inferiores (estimativa − sigmas·SE).
    """
    sigmas = float(sigmas)
    if not sigmas > 0:
        raise DomainError(f"sigmas deve ser > 0 (recebido {sigmas})")
    d = _check_pair(z, x)
    if bound.d != d:
        raise DomainError(f"limite para d={bound.d} aplicado a registros com d={d}")
    est = estimate_both(z, x)
    c_bound = 1.0 + 1.0 / d
    r_bound = bound.m_value
    c_low = est.c_hat - sigmas * est.c_se
    r_low = est.r_hat - sigmas * est.r_se
    f_raw = max(fraction_lower_bounds(d, c_low, r_low))
    rep = CertifiedReport(
        d=d,
        estimate=est,
        c_bound=c_bound,
        r_bound=r_bound,
        sigmas=sigmas,
        c_certified=c_low > c_bound,
        r_certified=r_low > r_bound,
        mes_fraction_lb=f_raw,
        mes_fraction_lb_clamped=min(max(f_raw, 0.0), 1.0),
        schmidt_lb=schmidt_from_fraction(f_raw, d),
    )
    log_emit(None, "info", "certify_done", d=d, sigmas=sigmas, c_hat=est.c_hat, r_hat=est.r_hat,
             c_certified=rep.c_certified, r_certified=rep.r_certified, schmidt_lb=rep.schmidt_lb)
    return rep


# ================
# Multipartido (duas configurações)
# ================

def ghz_settings(n: int) -> Tuple[Tuple[BasisLabel, ...], Tuple[BasisLabel, ...]]:
    n = check_parties(n)
    return (BasisLabel.ZBasis,) * n, (BasisLabel.XBasis,) * n


def cluster_settings(n: int) -> Tuple[Tuple[BasisLabel, ...], Tuple[BasisLabel, ...]]:
    """(Z, X, Z, …) e (X, Z, X, …)."""
    n = check_parties(n)
    zx = tuple(BasisLabel.XBasis if s % 2 == 0 else BasisLabel.ZBasis for s in range(1, n + 1))
    xz = tuple(BasisLabel.ZBasis if b is BasisLabel.XBasis else BasisLabel.XBasis for b in zx)
    return zx, xz


def sample_product_basis(
    rho: QuditState, bases: Sequence["BasisLabel | str"], shots: int, seed: int
) -> MultiShotRecord:
    labels = tuple(BasisLabel.parse(b) for b in bases)
    if len(labels) != rho.parties:
        raise DomainError(f"esperadas {rho.parties} bases, recebido {len(labels)}")
    shots = _check_shots(shots)
    counts = _draw(rho.basis_probabilities(labels), shots, seed)
    counts.flags.writeable = False
    log_emit(None, "debug", "shots_sampled", d=rho.d, basis="".join(b.value for b in labels),
             shots=shots, seed=int(seed))
    return MultiShotRecord(d=rho.d, n=rho.parties, bases=labels, shots=shots, counts=counts, seed=int(seed))


# fator local: (base exigida, expoente ±1) ; Z^e → ω^{e·j}, X^e → e^{−iω·e·k}
_Term = Mapping[int, Tuple[BasisLabel, int]]


def _term_scores(rec: MultiShotRecord, term: _Term) -> np.ndarray:
    d, n = rec.d, rec.n
    digits = np.indices((d,) * n).reshape(n, d ** n)
    phase = np.zeros(d ** n, dtype=np.int64)
    for site, (basis, power) in term.items():
        if rec.bases[site - 1] is not basis:
            raise DomainError(f"registro mede o sítio {site} na base {rec.bases[site - 1].value}, "
                              f"termo exige {basis.value}")
        sign = power if basis is BasisLabel.ZBasis else -power
        phase = phase + sign * digits[site - 1]
    return np.cos(omega(d) * (phase % d))


def _estimate_term(rec: MultiShotRecord, term: _Term) -> Tuple[float, float]:
    """Re⟨termo⟩ e erro padrão a partir dos escores por disparo."""
    return _weighted_mean_se(rec.counts, _term_scores(rec, term), rec.shots)


def _stabilizer_term(kind: StabilizerKind, n: int, k: int) -> _Term:
    z, x = BasisLabel.ZBasis, BasisLabel.XBasis
    if kind is StabilizerKind.GHZ:
        if k == 1:
            return {s: (x, 1) for s in range(1, n + 1)}
        return {k - 1: (z, 1), k: (z, -1)}
    term: Dict[int, Tuple[BasisLabel, int]] = {k: (x, -1)}
    if k > 1:
        term[k - 1] = (z, 1)
    if k < n:
        term[k + 1] = (z, 1)
    return term


def _pick_record(records: Sequence[MultiShotRecord], term: _Term) -> MultiShotRecord:
    for rec in records:
        if all(rec.bases[s - 1] is b for s, (b, _) in term.items()):
            return rec
    raise DomainError("nenhum registro mede o termo nas bases exigidas")


@dataclass(frozen=True)
class PairEstimate:
    kind: StabilizerKind
    m: int
    value: float
    se: float
    terms: Tuple[float, float]

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "m": self.m, "value": self.value, "se": self.se,
                "terms": list(self.terms)}


def _check_records(records: Sequence[MultiShotRecord]) -> Tuple[int, int]:
    d, n = records[0].d, records[0].n
    if any((r.d, r.n) != (d, n) for r in records):
        raise DomainError("registros com (d, n) diferentes")
    return d, n


def _pair_estimate(kind: StabilizerKind, records: Sequence[MultiShotRecord], i: int, j: int, m: int) -> PairEstimate:
    _, n = _check_records(records)
    ti = _stabilizer_term(kind, n, i)
    tj = _stabilizer_term(kind, n, j)
    vi, si = _estimate_term(_pick_record(records, ti), ti)
    vj, sj = _estimate_term(_pick_record(records, tj), tj)
    return PairEstimate(kind=kind, m=m, value=abs(vi + vj), se=math.sqrt(si ** 2 + sj ** 2), terms=(vi, vj))


def _check_site(m: int, n: int) -> int:
    if not 2 <= int(m) <= n:
        raise DomainError(f"sítio m deve estar em [2, {n}] (recebido {m})")
    return int(m)


def estimate_ghz_pair(z_rec: MultiShotRecord, x_rec: MultiShotRecord, m: int) -> PairEstimate:
    """Ŵ = |Re⟨S_1⟩ + Re⟨S_m⟩| com S_1 do registro todo-X e S_m do todo-Z."""
    m = _check_site(m, z_rec.n)
    return _pair_estimate(StabilizerKind.GHZ, [z_rec, x_rec], 1, m, m)


def estimate_cluster_pair(rec_zx: MultiShotRecord, rec_xz: MultiShotRecord, m: int) -> PairEstimate:
    """Ŵ = |Re⟨T_{m−1}⟩ + Re⟨T_m⟩|, cada termo do registro com X no seu sítio central."""
    m = _check_site(m, rec_zx.n)
    return _pair_estimate(StabilizerKind.Cluster, [rec_zx, rec_xz], m - 1, m, m)


@dataclass(frozen=True)
class MultipartiteCertificate:
    estimate: PairEstimate
    bound: float
    sigmas: float
    certified: bool

    def to_dict(self) -> Dict[str, Any]:
        out = self.estimate.to_dict()
        out.update(bound=self.bound, sigmas=self.sigmas, certified=self.certified)
        return out


def certify_multipartite(
    rho: QuditState,
    kind: "StabilizerKind | str",
    m: int,
    m_value: float,
    shots: int,
    seed: int,
    sigmas: float = 5.0,
) -> Tuple[MultipartiteCertificate, Tuple[MultiShotRecord, MultiShotRecord]]:
    """Amostra as duas configurações e certifica Ŵ − M_d > sigmas·SE."""
    sigmas = float(sigmas)
    if not sigmas > 0:
        raise DomainError(f"sigmas deve ser > 0 (recebido {sigmas})")
    k = StabilizerKind.parse(kind)
    n = check_parties(rho.parties)
    first, second = ghz_settings(n) if k is StabilizerKind.GHZ else cluster_settings(n)
    s1, s2 = derive_seeds(seed, 2)
    r1 = sample_product_basis(rho, first, shots, s1)
    r2 = sample_product_basis(rho, second, shots, s2)
    est = estimate_ghz_pair(r1, r2, m) if k is StabilizerKind.GHZ else estimate_cluster_pair(r1, r2, m)
    cert = MultipartiteCertificate(
        estimate=est,
        bound=float(m_value),
        sigmas=sigmas,
        certified=est.value - float(m_value) > sigmas * est.se,
    )
    log_emit(None, "info", "certify_done", kind=k.value, m=est.m, value=est.value, se=est.se,
             certified=cert.certified)
    return cert, (r1, r2)
