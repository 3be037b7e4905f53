from __future__ import annotations

import numpy as np
import pytest

from config.settings import Settings, set_settings
from utils.logs import reset_default_sink, set_context


@pytest.fixture(autouse=True)
def default_settings():
    """Settings padrão, independentes do ambiente/.env da máquina."""
    s = Settings()
    set_settings(s)
    yield s
    set_settings(None)
    reset_default_sink()
    set_context(None)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(20240607))
