# parsers/state_json.py
# -*- coding: utf-8 -*-
"""
Leitura/escrita de estados no esquema JSON do qwitness e atalhos de linha de comando.

Esquema:
    {"schema": "qwitness/1", "d": 3, "parties": 2, "kind": "pure" | "density",
     "re": [...], "im": [...]}
`re`/`im` trazem o vetor (d^n) ou a matriz densidade achatada em ordem row-major.
`im` é opcional (zeros). `schema`, se presente, deve ser "qwitness/1".

Atalhos:
    --mes d            -> |Φ_{0,0}⟩
    --bell l,m  (+ d)  -> |Φ_{l,m}⟩
    --noisy fam,p (+ d) -> ψ(p) / φ(p) / iso(p)
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from config.settings import SCHEMA
from services.noise import noisy_state
from services.qudit_ops import QuditState, bell_state, mes
from utils.errors import QWitnessError, StateFormatError

__all__ = ["StateParser", "parse_shorthand", "dump_state", "save_state"]


def _as_int(payload: Dict[str, Any], key: str) -> int:
    v = payload.get(key)
    if isinstance(v, bool) or not isinstance(v, int):
        raise StateFormatError(f"campo '{key}' ausente ou não inteiro")
    return v


def _as_floats(payload: Dict[str, Any], key: str, size: int, required: bool) -> np.ndarray:
    v = payload.get(key)
    if v is None:
        if required:
            raise StateFormatError(f"campo '{key}' ausente")
        return np.zeros(size)
    if not isinstance(v, list) or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in v):
        raise StateFormatError(f"campo '{key}' deve ser lista de números")
    if len(v) != size:
        raise StateFormatError(f"campo '{key}' com {len(v)} entradas, esperado {size}")
    return np.asarray(v, dtype=float)


class StateParser:
    """
    Converte o JSON de estado em `QuditState` validado.

    Erros de formato viram StateFormatError (com o nome da origem);
    estados fisicamente inválidos propagam InvalidStateError.
    """

    def parse(self, data: Union[bytes, str, Dict[str, Any]], name_hint: str = "") -> QuditState:
        where = f" em {name_hint}" if name_hint else ""
        if isinstance(data, (bytes, str)):
            try:
                payload = json.loads(data)
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise StateFormatError(f"JSON inválido{where}: {exc}") from None
        else:
            payload = data
        if not isinstance(payload, dict):
            raise StateFormatError(f"objeto JSON esperado{where}")

        schema = payload.get("schema", SCHEMA)
        if schema != SCHEMA:
            raise StateFormatError(f"esquema não suportado{where}: {schema!r}")
        try:
            d = _as_int(payload, "d")
            n = _as_int(payload, "parties")
            kind = payload.get("kind")
            if kind not in ("pure", "density"):
                raise StateFormatError(f"'kind' deve ser 'pure' ou 'density' (recebido {kind!r})")
            if d < 2 or n < 1:
                raise StateFormatError(f"d={d} / parties={n} fora do domínio")
            dim = d ** n
            size = dim if kind == "pure" else dim * dim
            re = _as_floats(payload, "re", size, required=True)
            im = _as_floats(payload, "im", size, required=False)
        except StateFormatError as exc:
            raise StateFormatError(f"{exc}{where}") from None

        data_c = re + 1j * im
        if kind == "pure":
            return QuditState.pure(data_c, d, n)
        return QuditState.density(data_c.reshape(dim, dim), d, n)


def parse_shorthand(kind: str, value: str, d: Optional[int] = None) -> QuditState:
    """Resolve `--mes`, `--bell` e `--noisy`."""
    kind = kind.strip().lower()
    text = str(value).strip()
    try:
        if kind == "mes":
            return mes(int(text))
        if kind == "bell":
            if d is None:
                raise StateFormatError("--bell exige --d")
            l_s, m_s = text.split(",")
            return bell_state(int(d), int(l_s), int(m_s))
        if kind == "noisy":
            if d is None:
                raise StateFormatError("--noisy exige --d")
            fam, p_s = text.split(",")
            return noisy_state(int(d), fam, float(p_s))
    except QWitnessError:
        raise
    except ValueError:
        raise StateFormatError(f"atalho --{kind} malformado: {value!r}") from None
    raise StateFormatError(f"atalho desconhecido: {kind!r}")


def dump_state(state: QuditState) -> str:
    payload = {"schema": SCHEMA}
    payload.update(state.to_dict())
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def save_state(state: QuditState, path: Union[str, Path]) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(dump_state(state) + "\n", encoding="utf-8")
    return out
