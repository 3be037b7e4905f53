from __future__ import annotations

import sys
from pathlib import Path

from dotenv import load_dotenv

BASE_DIR = Path(__file__).resolve().parent

# config/.env manda; ./.env só completa o que faltar
_ENV_FILES = (
    (BASE_DIR / "config" / ".env", True),
    (BASE_DIR / ".env", False),
)


def _load_env() -> None:
    for path, override in _ENV_FILES:
        if path.is_file():
            load_dotenv(dotenv_path=path, override=override)


def main() -> int:
    _load_env()

    # só depois do .env: as settings leem o ambiente na primeira consulta
    import cli

    return cli.run(sys.argv[1:])


if __name__ == "__main__":
    raise SystemExit(main())
