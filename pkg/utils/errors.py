# utils/errors.py
"""
Hierarquia de erros do qwitness.

Cada classe também herda da exceção nativa correspondente, então quem chama
pode capturar tanto `QWitnessError` quanto `ValueError`/`RuntimeError` etc.
"""

from __future__ import annotations

from typing import Any, Dict, Optional

__all__ = [
    "QWitnessError",
    "DomainError",
    "SizeError",
    "ResourceError",
    "ContractError",
    "ShapeError",
    "InvalidStateError",
    "ConvergenceError",
    "StateFormatError",
    "ConfigError",
    "USAGE_ERRORS",
]


class QWitnessError(Exception):
    """Base de todos os erros do projeto."""


class DomainError(QWitnessError, ValueError):
    """Parâmetro fora do domínio (d < 2, θ, p, índices, dimensões, bases)."""


class SizeError(QWitnessError, OverflowError):
    """Produto de dimensões não representável."""


class ResourceError(QWitnessError, MemoryError):
    """Limite QWITNESS_MAX_DIM excedido."""


class ContractError(QWitnessError, ValueError):
    """Entrada viola o contrato da rotina (ex.: matriz não Hermitiana)."""


class ShapeError(QWitnessError, ValueError):
    """Operador fora da forma esperada (ex.: não Bell-diagonal)."""

    def __init__(self, message: str, max_offdiag: float = 0.0) -> None:
        super().__init__(message)
        self.max_offdiag = float(max_offdiag)


class InvalidStateError(QWitnessError, ValueError):
    """Estado inválido (norma, traço, Hermiticidade, positividade, probabilidades)."""


class ConvergenceError(QWitnessError, RuntimeError):
    """Limite de iterações atingido; `diagnostics` traz o estado da busca."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.diagnostics: Dict[str, Any] = dict(diagnostics or {})


class StateFormatError(QWitnessError, ValueError):
    """JSON de estado ou atalho de linha de comando malformado."""


class ConfigError(QWitnessError, ValueError):
    """Valor inválido em variável de ambiente / .env."""


# Erros que a CLI reporta como uso inválido (exit 2)
USAGE_ERRORS = (
    DomainError,
    SizeError,
    ResourceError,
    StateFormatError,
    InvalidStateError,
    ConfigError,
    FileNotFoundError,
)
