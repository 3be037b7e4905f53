from __future__ import annotations

import io
import json
import zipfile

import numpy as np
import pytest

from dataio.exporters import export_csv, export_json, format_value, to_jsonable, write_csv, write_json
from dataio.loaders import iter_state_bytes
from parsers.state_json import StateParser, dump_state, parse_shorthand, save_state
from services.noise import NoiseFamily
from services.qudit_ops import bell_state, mes
from utils.errors import DomainError, InvalidStateError, StateFormatError


def _pure_payload(**over):
    payload = {"schema": "qwitness/1", "d": 2, "parties": 1, "kind": "pure", "re": [0.6, 0.8], "im": [0.0, 0.0]}
    payload.update(over)
    return payload


class TestStateParser:
    def test_parses_pure_without_im(self):
        payload = _pure_payload()
        del payload["im"]
        s = StateParser().parse(json.dumps(payload))
        assert s.is_pure
        assert np.allclose(s.data, [0.6, 0.8])

    def test_parses_density_bytes(self):
        rho = np.eye(4) / 4
        payload = {"d": 2, "parties": 2, "kind": "density", "re": rho.ravel().tolist()}
        s = StateParser().parse(json.dumps(payload).encode("utf-8"))
        assert s.kind == "density"
        assert s.dim == 4

    def test_dump_then_parse_keeps_state(self):
        s = bell_state(3, 1, 2)
        back = StateParser().parse(dump_state(s))
        assert np.allclose(back.data, s.data)
        assert json.loads(dump_state(s))["schema"] == "qwitness/1"

    @pytest.mark.parametrize(
        "payload",
        [
            _pure_payload(schema="qwitness/2"),
            _pure_payload(kind="mixed"),
            _pure_payload(d="2"),
            _pure_payload(d=1),
            _pure_payload(re=[1.0]),
            _pure_payload(re=[1.0, "x"]),
            _pure_payload(im=[0.0, True]),
            [1, 2, 3],
        ],
    )
    def test_format_errors(self, payload):
        with pytest.raises(StateFormatError):
            StateParser().parse(json.dumps(payload), name_hint="entrada.json")

    def test_invalid_json_names_source(self):
        with pytest.raises(StateFormatError) as err:
            StateParser().parse(b"{nope", name_hint="quebrado.json")
        assert "quebrado.json" in str(err.value)

    def test_physically_invalid_state(self):
        with pytest.raises(InvalidStateError):
            StateParser().parse(_pure_payload(re=[1.0, 1.0]))


class TestShorthand:
    def test_mes(self):
        assert np.allclose(parse_shorthand("mes", "3").data, mes(3).data)

    def test_bell(self):
        assert np.allclose(parse_shorthand("bell", "1,2", d=3).data, bell_state(3, 1, 2).data)

    def test_noisy(self):
        s = parse_shorthand("noisy", "psi,0.75", d=4)
        assert s.kind == "density"
        assert NoiseFamily.parse("psi") is NoiseFamily.PsiHalfShift

    @pytest.mark.parametrize("kind,value", [("bell", "1"), ("noisy", "psi"), ("noisy", "psi,abc"), ("ghz", "3")])
    def test_malformed(self, kind, value):
        with pytest.raises(StateFormatError):
            parse_shorthand(kind, value, d=3)

    def test_bell_requires_dimension(self):
        with pytest.raises(StateFormatError):
            parse_shorthand("bell", "0,0")

    def test_domain_errors_pass_through(self):
        with pytest.raises(DomainError):
            parse_shorthand("mes", "1")
        with pytest.raises(DomainError):
            parse_shorthand("noisy", "phi,1.5", d=3)


class TestLoaders:
    def test_directory_and_zip(self, tmp_path):
        save_state(mes(2), tmp_path / "b" / "mes.json")
        save_state(mes(3), tmp_path / "a.json")
        (tmp_path / "notas.txt").write_text("ignorar", encoding="utf-8")
        with zipfile.ZipFile(tmp_path / "lote.zip", "w") as zf:
            zf.writestr("x.json", dump_state(mes(4)))
            zf.writestr("leia.txt", "nada")

        names = [name for name, _ in iter_state_bytes(tmp_path)]
        assert len(names) == 3
        assert names[-1] == "lote.zip:x.json"

    def test_single_zip(self, tmp_path):
        zp = tmp_path / "s.zip"
        with zipfile.ZipFile(zp, "w") as zf:
            zf.writestr("b.json", dump_state(mes(2)))
            zf.writestr("a.json", dump_state(mes(3)))
        assert [name for name, _ in iter_state_bytes(zp)] == ["s.zip:a.json", "s.zip:b.json"]
        parsed = [StateParser().parse(raw, name) for name, raw in iter_state_bytes(zp)]
        assert [s.d for s in parsed] == [3, 2]

    def test_single_json(self, tmp_path):
        p = save_state(mes(2), tmp_path / "um.json")
        assert [name for name, _ in iter_state_bytes(p)] == [str(p)]

    def test_missing_or_unsupported(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            list(iter_state_bytes(tmp_path / "nao_existe"))
        other = tmp_path / "x.txt"
        other.write_text("a", encoding="utf-8")
        with pytest.raises(FileNotFoundError):
            list(iter_state_bytes(other))


class TestExporters:
    def test_format_value(self):
        assert format_value(None) == ""
        assert format_value(True) == "true"
        assert format_value(np.bool_(False)) == "false"
        assert format_value(np.int64(3)) == "3"
        assert format_value(1 / 3) == "0.333333333333"
        assert format_value([0.5, 0.25]) == "0.5;0.25"

    def test_to_jsonable(self):
        out = to_jsonable({"a": np.float64(1.5), "b": np.arange(2), "c": NoiseFamily.Isotropic, "z": 1j})
        assert out == {"a": 1.5, "b": [0, 1], "c": "iso", "z": [0.0, 1.0]}

    def test_csv_layout(self):
        buf = io.StringIO()
        rows = [{"d": 2, "p": 0.75, "ok": True}, {"d": 3, "p": None, "ok": False}]
        write_csv(rows, buf, ["d", "p", "ok"], header={"schema": "qwitness/1"})
        lines = buf.getvalue().split("\n")
        assert lines[0] == '# {"schema":"qwitness/1"}'
        assert lines[1] == "d,p,ok"
        assert lines[2] == "2,0.75,true"
        assert lines[3] == "3,,false"

    def test_csv_default_columns_sorted(self):
        buf = io.StringIO()
        write_csv([{"b": 1, "a": 2}], buf)
        assert buf.getvalue().splitlines()[0] == "a,b"

    def test_json_sorted_compact(self):
        buf = io.StringIO()
        write_json({"b": 1, "a": [np.float64(0.5)]}, buf)
        assert buf.getvalue() == '{"a":[0.5],"b":1}\n'

    def test_export_csv_creates_parent(self, tmp_path):
        out = export_csv([{"d": 2}], tmp_path / "sub" / "f.csv", ["d"])
        assert out.read_text(encoding="utf-8") == "d\n2\n"

    def test_export_json_matches_stream(self, tmp_path):
        payload = {"b": 1, "a": [np.float64(0.5)]}
        out = export_json(payload, tmp_path / "sub" / "f.json")
        buf = io.StringIO()
        write_json(payload, buf)
        assert out.read_text(encoding="utf-8") == buf.getvalue()
