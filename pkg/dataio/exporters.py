# dataio/exporters.py
"""
Exportadores de dados (CSV e JSON) para plotagem e reprodutibilidade.
API principal:
    write_csv(rows, stream, columns, header)
    write_json(payload, stream)
    export_csv(rows, out_path, columns, header)
    export_json(payload, out_path)

Formato:
- '.' como separador decimal (sem locale), floats com 12 dígitos significativos;
- listas juntadas com ';';
- CSV começa com uma linha de comentário `# {"schema":...,"config":...}`.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, TextIO

import numpy as np

__all__ = ["write_csv", "write_json", "export_csv", "export_json", "format_value", "to_jsonable"]


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    if isinstance(value, (list, tuple, np.ndarray)):
        return ";".join(format_value(v) for v in value)
    return str(value)


def to_jsonable(value: Any) -> Any:
    """Converte tipos numpy/enum/Path para tipos nativos serializáveis."""
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, Path):
        return str(value)
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


def _header_line(header: Mapping[str, Any]) -> str:
    return "# " + json.dumps(to_jsonable(header), sort_keys=True, separators=(",", ":"))


def write_csv(
    rows: Sequence[Dict[str, Any]],
    stream: TextIO,
    columns: Optional[List[str]] = None,
    header: Optional[Mapping[str, Any]] = None,
) -> None:
    """
    Escreve `rows` como CSV em `stream`.
    Sem `columns`, usa as chaves de todas as linhas em ordem alfabética.
    """
    if columns is None:
        keys = set().union(*(r.keys() for r in rows)) if rows else set()
        columns = sorted(keys)
    if header is not None:
        stream.write(_header_line(header) + "\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(col)) for col in columns])


def write_json(payload: Mapping[str, Any], stream: TextIO) -> None:
    stream.write(json.dumps(to_jsonable(payload), sort_keys=True, separators=(",", ":")) + "\n")


def export_csv(
    rows: Sequence[Dict[str, Any]],
    out_path: str | Path,
    columns: Optional[List[str]] = None,
    header: Optional[Mapping[str, Any]] = None,
    encoding: str = "utf-8",
) -> Path:
    """
    Exporta uma lista de dicts para arquivo CSV.

    Returns:
        Path do arquivo salvo.
    """
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding=encoding, newline="") as f:
        write_csv(rows, f, columns, header)
    return out


def export_json(payload: Mapping[str, Any], out_path: str | Path, encoding: str = "utf-8") -> Path:
    """Mesmo conteúdo de write_json, gravado em arquivo (cria a pasta se preciso)."""
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding=encoding, newline="") as f:
        write_json(payload, f)
    return out
