# dataio/loaders.py
"""
Descoberta de arquivos de estado (JSON do esquema qwitness/1).

Entradas aceitas:
  - arquivo .json único
  - arquivo .zip (entradas .json, em ordem alfabética)
  - diretório: todos os *.json abaixo dele e depois os .json de cada *.zip
    encontrado, ambos em ordem alfabética sem distinguir maiúsculas

Nomes devolvidos: o caminho do arquivo, ou "arquivo.zip:entrada" para zips.

API principal:
    iter_state_bytes(input_path) -> Iterator[tuple[str, bytes]]
"""

from __future__ import annotations

import zipfile
from pathlib import Path
from typing import Callable, Iterator, List, Tuple

__all__ = ["iter_state_bytes"]

_SUFFIX = ".json"

# (nome, leitor preguiçoso do conteúdo)
_Entry = Tuple[str, Callable[[], bytes]]


def _zip_entries(zp: Path) -> Iterator[_Entry]:
    with zipfile.ZipFile(zp, "r") as zf:
        names = sorted(
            (i.filename for i in zf.infolist() if not i.is_dir() and i.filename.lower().endswith(_SUFFIX)),
            key=str.lower,
        )
    for name in names:
        yield f"{zp.name}:{name}", lambda zp=zp, name=name: _read_member(zp, name)


def _read_member(zp: Path, name: str) -> bytes:
    with zipfile.ZipFile(zp, "r") as zf:
        return zf.read(name)


def _below(root: Path, pattern: str) -> List[Path]:
    return sorted(root.rglob(pattern), key=lambda x: str(x).lower())


def _discover(input_path: str | Path) -> Iterator[_Entry]:
    p = Path(input_path)
    if not p.exists():
        raise FileNotFoundError(f"Caminho não encontrado: {p}")

    if p.is_dir():
        for fp in _below(p, "*" + _SUFFIX):
            yield str(fp), fp.read_bytes
        for zp in _below(p, "*.zip"):
            yield from _zip_entries(zp)
        return

    suffix = p.suffix.lower()
    if suffix == ".zip":
        yield from _zip_entries(p)
    elif suffix == _SUFFIX:
        yield str(p), p.read_bytes
    else:
        raise FileNotFoundError(f"Tipo de entrada não suportado (esperado pasta, .zip ou .json): {p}")


def iter_state_bytes(input_path: str | Path) -> Iterator[Tuple[str, bytes]]:
    """(nome, conteúdo) de cada JSON de estado; FileNotFoundError se o caminho não servir."""
    for name, read in _discover(input_path):
        yield name, read()
