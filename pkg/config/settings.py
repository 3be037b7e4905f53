from __future__ import annotations

import os
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any, Dict, Optional
from dotenv import load_dotenv

from utils.errors import ConfigError

# Tolerâncias numéricas (fonte única para código, testes e documentação)
HERM_TOL = 1e-10     # ‖A − A†‖_max aceito como Hermitiano
EIG_TOL = 1e-9       # reconstrução / ortonormalidade da decomposição
STATE_TOL = 1e-10    # norma, traço e Hermiticidade de estados
PSD_TOL = 1e-9       # autovalor mínimo aceito para ρ ≥ 0
EPS_DECIDE = 1e-9    # margem mínima para declarar violação estrita
PROB_TOL = 1e-9      # déficit de probabilidade tolerado na amostragem
TIE_TOL = 1e-12      # empate entre valores de ‖χ_θ‖

SCHEMA = "qwitness/1"

_SOLVERS = ("auto", "jacobi", "lapack")
_LEVELS = ("debug", "info", "warn", "error")


@dataclass
class LinalgSettings:
    max_dim: int = 4096
    eig_solver: str = "auto"
    jacobi_max_dim: int = 8


@dataclass
class BoundSettings:
    theta_grid: int = 181
    tol: float = 1e-10
    oracle_restarts: int = 32


@dataclass
class Settings:
    linalg: LinalgSettings = field(default_factory=LinalgSettings)
    bounds: BoundSettings = field(default_factory=BoundSettings)
    workers: int = 1
    log_level: str = "warn"
    output_dir: Path = Path(".")

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["output_dir"] = str(self.output_dir)
        return d


def _env(name: str, default: Optional[str] = None) -> Optional[str]:
    v = os.environ.get(name)
    if v is None or str(v).strip() == "":
        return default
    return v.strip()


def _env_int(name: str, default: int, minimum: int = 1) -> int:
    raw = _env(name)
    if raw is None:
        return default
    try:
        v = int(raw)
    except ValueError:
        raise ConfigError(f"{name} deve ser inteiro (recebido {raw!r})") from None
    if v < minimum:
        raise ConfigError(f"{name} deve ser >= {minimum} (recebido {v})")
    return v


def _env_float(name: str, default: float) -> float:
    raw = _env(name)
    if raw is None:
        return default
    try:
        v = float(raw)
    except ValueError:
        raise ConfigError(f"{name} deve ser numérico (recebido {raw!r})") from None
    if not v > 0:
        raise ConfigError(f"{name} deve ser > 0 (recebido {v})")
    return v


def _env_choice(name: str, default: str, choices: tuple) -> str:
    v = (_env(name, default) or default).lower()
    if v not in choices:
        raise ConfigError(f"{name} deve ser um de {', '.join(choices)} (recebido {v!r})")
    return v


def load_settings(dotenv_path: Optional[str] = None) -> Settings:
    # Carrega .env (se existir) sem sobrescrever o ambiente do processo
    load_dotenv(dotenv_path, override=False)

    lin = LinalgSettings(
        max_dim=_env_int("QWITNESS_MAX_DIM", 4096, minimum=4),
        eig_solver=_env_choice("QWITNESS_EIG_SOLVER", "auto", _SOLVERS),
        jacobi_max_dim=_env_int("QWITNESS_JACOBI_MAX_DIM", 8),
    )
    bnd = BoundSettings(
        theta_grid=_env_int("QWITNESS_THETA_GRID", 181, minimum=3),
        tol=_env_float("QWITNESS_BOUND_TOL", 1e-10),
        oracle_restarts=_env_int("QWITNESS_ORACLE_RESTARTS", 32),
    )
    out = Path(_env("QWITNESS_OUTPUT_DIR", ".") or ".")
    return Settings(
        linalg=lin,
        bounds=bnd,
        workers=_env_int("QWITNESS_WORKERS", 1),
        log_level=_env_choice("QWITNESS_LOG_LEVEL", "warn", _LEVELS),
        output_dir=out,
    )


_CURRENT: Optional[Settings] = None


def get_settings() -> Settings:
    """Settings do processo (carregadas uma vez, sob demanda)."""
    global _CURRENT
    if _CURRENT is None:
        _CURRENT = load_settings()
    return _CURRENT


def set_settings(s: Optional[Settings]) -> None:
    """Substitui as settings do processo. None força recarga no próximo acesso."""
    global _CURRENT
    _CURRENT = s
