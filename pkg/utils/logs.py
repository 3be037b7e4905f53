# utils/logs.py
# -*- coding: utf-8 -*-
"""
Logs estruturados do qwitness: um objeto JSON por linha, sempre em stderr
(ou no stream do sink), nunca misturado à saída dos comandos.

API pública:
    - StreamSink(stream, min_level)
    - configure_default_sink(level, stream=None) -> StreamSink
    - reset_default_sink() -> None
    - log_emit(sink, level, event, **fields) -> dict
    - format_record(record) -> str
    - set_context(dict | None) -> None   # substitui o contexto global
    - add_context(**kvs) -> None          # incrementa o contexto global

Uso típico:
    from utils.logs import configure_default_sink, log_emit, set_context

    configure_default_sink("info")
    set_context({"cmd": "bound", "schema": "qwitness/1"})
    log_emit(None, "info", "bound_scan_done", d=5, m_value=1.1)

Sem sink padrão configurado, `log_emit(None, ...)` apenas devolve o registro.
"""

from __future__ import annotations

import datetime as _dt
import json
import math
import sys
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, TextIO

import numpy as np

__all__ = [
    "StreamSink",
    "configure_default_sink",
    "reset_default_sink",
    "log_emit",
    "format_record",
    "set_context",
    "add_context",
]

_LEVELS = {"debug": 10, "info": 20, "warn": 30, "error": 40}

# arrays maiores que isso viram só um resumo (forma/dtype)
_MAX_INLINE = 64


# --------------------------------------------------------------------------------------
# Conversão de valores para JSON
# --------------------------------------------------------------------------------------

_MASKED = {"password", "pwd", "secret", "token", "apikey", "api_key", "key"}


def _plain(v: Any) -> Any:
    if v is None or isinstance(v, (bool, int, str)):
        return v
    if isinstance(v, float):
        return v if math.isfinite(v) else str(v)
    if isinstance(v, Enum):
        return _plain(v.value)
    if isinstance(v, np.generic):
        return _plain(v.item())
    if isinstance(v, complex):
        return [_plain(v.real), _plain(v.imag)]
    if isinstance(v, np.ndarray):
        if v.size > _MAX_INLINE:
            return {"shape": list(v.shape), "dtype": str(v.dtype)}
        return _plain(v.tolist())
    if isinstance(v, Path):
        return str(v)
    if isinstance(v, Mapping):
        return {str(k): _field(str(k), x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return str(v)


def _field(name: str, v: Any) -> Any:
    return "****" if name.lower() in _MASKED else _plain(v)


def _fields(kvs: Mapping[str, Any]) -> Dict[str, Any]:
    return {k: _field(k, v) for k, v in kvs.items()}


def format_record(record: Dict[str, Any]) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def _timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="milliseconds").replace("+00:00", "Z")


# --------------------------------------------------------------------------------------
# Contexto global (subcomando, esquema, semente...)
# --------------------------------------------------------------------------------------

_ctx_lock = threading.RLock()
_context: Dict[str, Any] = {}


def set_context(ctx: Optional[Mapping[str, Any]]) -> None:
    """Substitui o contexto global; None ou {} limpa."""
    with _ctx_lock:
        _context.clear()
        _context.update(_fields(ctx or {}))


def add_context(**kvs: Any) -> None:
    with _ctx_lock:
        _context.update(_fields(kvs))


# --------------------------------------------------------------------------------------
# Sink em stream
# --------------------------------------------------------------------------------------

@dataclass
class StreamSink:
    """
    Destino de logs em stream de texto.

    - stream: None -> sys.stderr resolvido no momento da escrita
    - min_level: nível mínimo emitido ("debug" | "info" | "warn" | "error")
    """
    stream: Optional[TextIO] = None
    min_level: str = "warn"
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def accepts(self, level: str) -> bool:
        return _LEVELS.get(level, 20) >= _LEVELS.get(self.min_level, 30)

    def post(self, record: Dict[str, Any]) -> None:
        if not self.accepts(record.get("level", "info")):
            return
        out = self.stream if self.stream is not None else sys.stderr
        line = format_record(record) + "\n"
        try:
            with self._lock:
                out.write(line)
                out.flush()
        except (OSError, ValueError):
            # stream fechado
            pass


_default_sink: Optional[StreamSink] = None


def configure_default_sink(level: str = "warn", stream: Optional[TextIO] = None) -> StreamSink:
    """Instala o sink usado quando `log_emit` recebe sink=None."""
    global _default_sink
    _default_sink = StreamSink(stream=stream, min_level=(level or "warn").lower())
    return _default_sink


def reset_default_sink() -> None:
    global _default_sink
    _default_sink = None


# --------------------------------------------------------------------------------------
# Emissão
# --------------------------------------------------------------------------------------

def log_emit(sink: Optional[StreamSink], level: str, event: str, **fields: Any) -> Dict[str, Any]:
    """
    Monta e emite um registro {ts, level, event, <contexto>, <campos>}.

    Campos do evento sobrescrevem chaves homônimas do contexto. Nível
    desconhecido vira "info". Devolve o registro (emitido ou não).
    """
    lvl = (level or "info").lower()
    if lvl not in _LEVELS:
        lvl = "info"
    record: Dict[str, Any] = {"ts": _timestamp(), "level": lvl, "event": event}
    with _ctx_lock:
        record.update(_context)
    record.update(_fields(fields))

    target = sink if sink is not None else _default_sink
    if target is not None:
        target.post(record)
    return record
