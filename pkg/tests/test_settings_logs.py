from __future__ import annotations

import io
import json
import os

import numpy as np
import pytest

from config.settings import get_settings, load_settings, set_settings
from utils.errors import ConfigError
from utils.logs import StreamSink, add_context, configure_default_sink, log_emit, set_context

_VARS = (
    "QWITNESS_MAX_DIM",
    "QWITNESS_EIG_SOLVER",
    "QWITNESS_JACOBI_MAX_DIM",
    "QWITNESS_THETA_GRID",
    "QWITNESS_BOUND_TOL",
    "QWITNESS_ORACLE_RESTARTS",
    "QWITNESS_WORKERS",
    "QWITNESS_LOG_LEVEL",
    "QWITNESS_OUTPUT_DIR",
)


@pytest.fixture
def clean_env(monkeypatch, tmp_path):
    for name in _VARS:
        monkeypatch.delenv(name, raising=False)
    # .env vazio: isola o teste de arquivos da máquina
    env_file = tmp_path / ".env"
    env_file.write_text("", encoding="utf-8")
    return str(env_file)


class TestSettings:
    def test_defaults(self, clean_env):
        s = load_settings(clean_env)
        assert s.linalg.max_dim == 4096
        assert s.linalg.eig_solver == "auto"
        assert s.bounds.theta_grid == 181
        assert s.workers == 1
        assert s.log_level == "warn"

    def test_environment_overrides(self, clean_env, monkeypatch, tmp_path):
        monkeypatch.setenv("QWITNESS_MAX_DIM", "256")
        monkeypatch.setenv("QWITNESS_EIG_SOLVER", "LAPACK")
        monkeypatch.setenv("QWITNESS_BOUND_TOL", "1e-8")
        monkeypatch.setenv("QWITNESS_WORKERS", "4")
        monkeypatch.setenv("QWITNESS_OUTPUT_DIR", str(tmp_path))
        s = load_settings(clean_env)
        assert s.linalg.max_dim == 256
        assert s.linalg.eig_solver == "lapack"
        assert s.bounds.tol == 1e-8
        assert s.workers == 4
        assert s.output_dir == tmp_path

    def test_dotenv_file_is_read(self, clean_env, tmp_path):
        env_file = tmp_path / "qw.env"
        env_file.write_text("QWITNESS_THETA_GRID=91\n", encoding="utf-8")
        try:
            assert load_settings(str(env_file)).bounds.theta_grid == 91
        finally:
            os.environ.pop("QWITNESS_THETA_GRID", None)

    @pytest.mark.parametrize(
        "name,value",
        [
            ("QWITNESS_MAX_DIM", "muito"),
            ("QWITNESS_MAX_DIM", "2"),
            ("QWITNESS_EIG_SOLVER", "qr"),
            ("QWITNESS_BOUND_TOL", "-1"),
            ("QWITNESS_THETA_GRID", "2"),
            ("QWITNESS_LOG_LEVEL", "trace"),
        ],
    )
    def test_invalid_values(self, clean_env, monkeypatch, name, value):
        monkeypatch.setenv(name, value)
        with pytest.raises(ConfigError):
            load_settings(clean_env)

    def test_to_dict_is_json_ready(self):
        out = get_settings().to_dict()
        json.dumps(out)
        assert out["linalg"]["max_dim"] == 4096

    def test_set_none_reloads(self, clean_env, monkeypatch):
        monkeypatch.setenv("QWITNESS_WORKERS", "3")
        set_settings(None)
        assert get_settings().workers == 3


class TestLogs:
    def test_record_fields_and_context(self):
        set_context({"cmd": "bound"})
        add_context(seed=7)
        rec = log_emit(None, "info", "bound_scan_done", d=5, m_value=np.float64(1.1))
        assert rec["event"] == "bound_scan_done"
        assert rec["cmd"] == "bound" and rec["seed"] == 7
        assert rec["m_value"] == 1.1
        assert "ts" in rec

    def test_sink_filters_by_level(self):
        buf = io.StringIO()
        sink = StreamSink(stream=buf, min_level="info")
        log_emit(sink, "debug", "escondido")
        log_emit(sink, "warn", "visivel", z=1 + 2j)
        lines = buf.getvalue().splitlines()
        assert len(lines) == 1
        rec = json.loads(lines[0])
        assert rec["event"] == "visivel"
        assert rec["z"] == [1.0, 2.0]

    def test_default_sink(self):
        buf = io.StringIO()
        configure_default_sink("debug", buf)
        log_emit(None, "debug", "threshold_done", p_star=None)
        assert json.loads(buf.getvalue())["p_star"] is None

    def test_secrets_masked_and_unknown_level(self):
        rec = log_emit(None, "verbose", "x", token="abc", path=object())
        assert rec["token"] == "****"
        assert rec["level"] == "info"
        assert isinstance(rec["path"], str)
