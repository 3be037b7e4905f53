# cli.py
# -*- coding: utf-8 -*-
"""
Linha de comando do qwitness.

Subcomandos:
    bound         M_d, θ* e distribuições ótimas (opcional: oráculo direto)
    witness       ⟨C_d⟩, ⟨R_d⟩, cotas de fração MES e número de Schmidt
    threshold     limiar de ruído p* para (família, testemunha)
    figure        dados das figuras: 1 (M_d por d) e 2 (limiares por d)
    multipartite  testes de pares GHZ / cluster
    simulate      amostragem finita nas bases conjuntas Z e X

Saída em stdout (JSON ou CSV, versionada por "schema": "qwitness/1" e com a
configuração efetiva); logs estruturados em stderr.

Códigos de saída: 0 sucesso; 2 uso inválido; 1 erro de cálculo.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from config.settings import SCHEMA, get_settings
from dataio.exporters import export_csv, export_json, write_csv, write_json
from dataio.loaders import iter_state_bytes
from parsers.state_json import StateParser, parse_shorthand, save_state
from services.bounds import BoundResult, direct_state_oracle_m, figure1_scan, separable_bound_m
from services.measure_sim import certify_from_shots, certify_multipartite, simulate_two_settings
from services.multipartite import (
    StabilizerKind,
    cluster_pair_test,
    cluster_stabilizers,
    ghz_pair_test,
    ghz_stabilizers,
)
from services.noise import THRESHOLD_METHODS, NoiseFamily, WitnessKind, exclusive_regions, figure2_scan, threshold
from services.qudit_ops import QuditState, cluster_state, fourier_matrix, ghz_state, product_state
from services.witnesses import (
    evaluate_many,
    evaluate_weighted_witness,
    evaluate_witnesses,
    qubit_average_correlation,
)
from utils.errors import USAGE_ERRORS, DomainError, QWitnessError
from utils.logs import add_context, configure_default_sink, log_emit, set_context

__all__ = ["RunConfig", "build_parser", "figure_data", "run", "main"]

_PROG = "qwitness"


# ================
# Configuração da execução
# ================

@dataclass
class RunConfig:
    subcommand: str
    options: Dict[str, Any] = field(default_factory=dict)
    settings: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        opts = {k: v for k, v in sorted(vars(args).items()) if k not in ("cmd", "handler")}
        return cls(subcommand=args.cmd, options=opts, settings=get_settings().to_dict())

    def to_dict(self) -> Dict[str, Any]:
        return {"subcommand": self.subcommand, "options": self.options, "settings": self.settings}

    def header(self) -> Dict[str, Any]:
        return {"schema": SCHEMA, "config": self.to_dict()}


# ================
# Parser
# ================

class _Parser(argparse.ArgumentParser):
    """ArgumentParser com diagnóstico em uma linha (exit 2)."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.exit(2, f"{self.prog}: erro: {message}\n")


def _add_output(p: argparse.ArgumentParser, default_format: str = "json") -> None:
    p.add_argument("--format", choices=("json", "csv"), default=default_format)
    p.add_argument("--out", default=None, help="arquivo de saída (relativo a QWITNESS_OUTPUT_DIR)")
    p.add_argument("--log-level", dest="log_level", choices=("debug", "info", "warn", "error"), default=None)


def _add_state_source(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--state", default=None, help="arquivo .json, pasta ou .zip com estados")
    g.add_argument("--mes", type=int, default=None, metavar="D")
    g.add_argument("--bell", default=None, metavar="L,M")
    g.add_argument("--noisy", default=None, metavar="FAMILIA,P")
    p.add_argument("--save-state", dest="save_state", default=None, metavar="PATH")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=_PROG, description="Testemunhas de emaranhamento para qudits com duas medições locais.")
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("bound", help="limite separável M_d")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--weight", type=float, default=None, help="peso p da forma ponderada")
    p.add_argument("--oracle", action="store_true", help="também roda o oráculo direto sobre estados")
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    _add_output(p)
    p.set_defaults(handler=_cmd_bound)

    p = sub.add_parser("witness", help="avalia C_d e R_d em estados de dois qudits")
    _add_state_source(p)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--weight", type=float, default=None, help="avalia também a testemunha ponderada")
    p.add_argument("--workers", type=int, default=None)
    _add_output(p)
    p.set_defaults(handler=_cmd_witness)

    p = sub.add_parser("threshold", help="limiar de tolerância a ruído")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--family", choices=[f.value for f in NoiseFamily], required=True)
    p.add_argument("--witness", choices=[w.value for w in WitnessKind], required=True)
    p.add_argument("--method", choices=THRESHOLD_METHODS, default="closed_form")
    _add_output(p)
    p.set_defaults(handler=_cmd_threshold)

    p = sub.add_parser("figure", help="dados das figuras 1 e 2")
    p.add_argument("--which", type=int, choices=(1, 2), required=True)
    p.add_argument("--dmin", type=int, default=2)
    p.add_argument("--dmax", type=int, default=20)
    p.add_argument("--workers", type=int, default=None)
    _add_output(p, default_format="csv")
    p.set_defaults(handler=_cmd_figure)

    p = sub.add_parser("multipartite", help="testes de pares GHZ / cluster")
    p.add_argument("--kind", choices=[k.value for k in StabilizerKind], required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--state", default=None, help="arquivo .json com o estado de n partes")
    g.add_argument("--preset", choices=("canonical", "zero", "zero-bar"), default=None)
    p.add_argument("--site", type=int, default=2)
    p.add_argument("--shots", type=int, default=None, help="também estima W por amostragem (por configuração)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigmas", type=float, default=5.0)
    p.add_argument("--save-state", dest="save_state", default=None, metavar="PATH")
    _add_output(p)
    p.set_defaults(handler=_cmd_multipartite)

    p = sub.add_parser("simulate", help="amostragem nas bases conjuntas Z e X")
    _add_state_source(p)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--shots", type=int, required=True, help="disparos por configuração")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigmas", type=float, default=5.0)
    _add_output(p)
    p.set_defaults(handler=_cmd_simulate)

    return parser


# ================
# Estados
# ================

def _resolve_states(args: argparse.Namespace) -> List[Tuple[str, QuditState]]:
    d = getattr(args, "d", None)
    if args.state is not None:
        parser = StateParser()
        states = [(name, parser.parse(raw, name_hint=name)) for name, raw in iter_state_bytes(args.state)]
        if not states:
            raise DomainError(f"nenhum estado .json encontrado em {args.state}")
    elif args.mes is not None:
        states = [(f"mes:{args.mes}", parse_shorthand("mes", str(args.mes)))]
    elif args.bell is not None:
        states = [(f"bell:{args.bell}", parse_shorthand("bell", args.bell, d))]
    else:
        states = [(f"noisy:{args.noisy}", parse_shorthand("noisy", args.noisy, d))]
    for name, s in states:
        if d is not None and s.d != d:
            raise DomainError(f"{name}: estado com d={s.d}, esperado d={d}")
    return states


def _single_state(args: argparse.Namespace) -> Tuple[str, QuditState]:
    states = _resolve_states(args)
    if len(states) != 1:
        raise DomainError(f"este subcomando exige um único estado (recebido {len(states)})")
    return states[0]


def _maybe_save(args: argparse.Namespace, state: QuditState) -> None:
    path = getattr(args, "save_state", None)
    if path:
        save_state(state, _out_path(path))


def _out_path(path: str) -> Path:
    p = Path(path)
    return p if p.is_absolute() else get_settings().output_dir / p


def _multipartite_state(args: argparse.Namespace, kind: StabilizerKind) -> Tuple[str, QuditState]:
    if args.state is not None:
        name, st = _single_state(argparse.Namespace(state=args.state, mes=None, bell=None, noisy=None, d=args.d))
        if st.parties != args.n:
            raise DomainError(f"{name}: estado com {st.parties} partes, esperado n={args.n}")
        return name, st
    preset = args.preset or "canonical"
    if preset == "canonical":
        st = ghz_state(args.d, args.n) if kind is StabilizerKind.GHZ else cluster_state(args.d, args.n)
        return f"{kind.value}:{args.d},{args.n}", st
    if preset == "zero":
        v = np.zeros(args.d, dtype=np.complex128)
        v[0] = 1.0
    else:
        v = fourier_matrix(args.d)[:, 0]
    return f"{preset}:{args.d},{args.n}", product_state([v] * args.n)


# ================
# Subcomandos
# ================

Table = Tuple[List[str], List[Dict[str, Any]]]


def _cmd_bound(args: argparse.Namespace) -> Tuple[Dict[str, Any], Table]:
    res = separable_bound_m(args.d, tol=args.tol, weight=args.weight)
    out = res.to_dict()
    if args.oracle:
        out["oracle_m"] = direct_state_oracle_m(
            args.d, restarts=args.restarts, seed=args.seed, weight=args.weight, workers=args.workers
        )
    cols = ["d", "m_value", "theta_star", "weight", "iterations", "residual", "p_z", "p_x"]
    if args.oracle:
        cols.append("oracle_m")
    return out, (cols, [out])


def _cmd_witness(args: argparse.Namespace) -> Tuple[Dict[str, Any], Table]:
    states = _resolve_states(args)
    bounds: Dict[int, BoundResult] = {}
    for _, s in states:
        if s.d not in bounds:
            bounds[s.d] = separable_bound_m(s.d)
    dims = {s.d for _, s in states}
    if len(dims) == 1:
        reports = evaluate_many([s for _, s in states], bounds[states[0][1].d], workers=args.workers)
    else:
        reports = [evaluate_witnesses(s, bounds[s.d]) for _, s in states]

    rows: List[Dict[str, Any]] = []
    for (name, s), rep in zip(states, reports):
        row: Dict[str, Any] = {"name": name}
        row.update(rep.to_dict())
        if args.weight is not None:
            w = evaluate_weighted_witness(s, args.weight)
            row.update(weight=w.p, weighted_value=w.value, weighted_bound=w.bound, weighted_violated=w.violated)
        if s.d == 2:
            row["qubit_average_correlation"] = qubit_average_correlation(s)
        rows.append(row)

    if len(states) == 1:
        _maybe_save(args, states[0][1])
    elif args.save_state:
        raise DomainError("--save-state exige um único estado")

    cols = ["name", "d", "c_value", "r_value", "c_bound", "r_bound", "c_margin", "r_margin",
            "c_violated", "r_violated", "fraction_lb_c", "fraction_lb_r", "mes_fraction_lb",
            "mes_fraction_lb_clamped", "schmidt_lb"]
    if args.weight is not None:
        cols += ["weight", "weighted_value", "weighted_bound", "weighted_violated"]
    if any("qubit_average_correlation" in r for r in rows):
        cols.append("qubit_average_correlation")
    payload = rows[0] if len(rows) == 1 else {"results": rows}
    return payload, (cols, rows)


def _cmd_threshold(args: argparse.Namespace) -> Tuple[Dict[str, Any], Table]:
    wk = WitnessKind.parse(args.witness)
    m_value = separable_bound_m(args.d).m_value if wk is WitnessKind.Rd else None
    res = threshold(args.d, args.family, wk, m_value, method=args.method)
    row = res.to_dict()
    return row, (["d", "family", "witness", "p_star", "method", "p_bisect", "bound"], [row])


def figure_data(which: int, d_min: int, d_max: int, workers: Optional[int] = None) -> Table:
    """
    which=1: (d, M_d, θ*, P, P̄) por d.
    which=2: seis limiares por d e os extremos das regiões X e Y.
    """
    if which == 1:
        rows = []
        for res in figure1_scan(d_min, d_max, workers=workers):
            row = res.to_dict()
            rows.append({k: row[k] for k in ("d", "m_value", "theta_star", "p_z", "p_x")})
            log_emit(None, "debug", "figure_row", which=1, d=res.d)
        return ["d", "m_value", "theta_star", "p_z", "p_x"], rows
    if which == 2:
        results = figure2_scan(d_min, d_max, workers=workers)
        m_by_d = {r.d: r.bound for r in results if r.witness is WitnessKind.Rd}
        regions = {d: exclusive_regions(d, m) for d, m in m_by_d.items()}
        rows = []
        for r in results:
            x, y = regions[r.d]
            row = r.to_dict()
            row.update(
                x_lo=x.lo if x else None, x_hi=x.hi if x else None,
                y_lo=y.lo if y else None, y_hi=y.hi if y else None,
            )
            rows.append(row)
            log_emit(None, "debug", "figure_row", which=2, d=r.d, family=r.family.value, witness=r.witness.value)
        cols = ["d", "family", "witness", "p_star", "method", "p_bisect", "x_lo", "x_hi", "y_lo", "y_hi"]
        return cols, rows
    raise DomainError(f"figura desconhecida: {which} (1 ou 2)")


def _cmd_figure(args: argparse.Namespace) -> Tuple[Dict[str, Any], Table]:
    cols, rows = figure_data(args.which, args.dmin, args.dmax, workers=args.workers)
    return {"which": args.which, "rows": rows}, (cols, rows)


def _cmd_multipartite(args: argparse.Namespace) -> Tuple[Dict[str, Any], Table]:
    kind = StabilizerKind.parse(args.kind)
    name, st = _multipartite_state(args, kind)
    m_value = separable_bound_m(args.d).m_value
    if kind is StabilizerKind.GHZ:
        value, violated = ghz_pair_test(st, args.site, m_value)
        stab = ghz_stabilizers(args.d, args.n)
    else:
        value, violated = cluster_pair_test(st, args.site, m_value)
        stab = cluster_stabilizers(args.d, args.n)
    row: Dict[str, Any] = {
        "name": name,
        "kind": kind.value,
        "d": args.d,
        "n": args.n,
        "site": args.site,
        "value": value,
        "bound": m_value,
        "violated": violated,
        "stabilized": stab.stabilizes(st),
    }
    cols = list(row.keys())
    if args.shots is not None:
        cert, _ = certify_multipartite(st, kind, args.site, m_value, args.shots, args.seed, args.sigmas)
        row.update(value_hat=cert.estimate.value, value_se=cert.estimate.se, certified=cert.certified,
                   shots_per_setting=args.shots)
        cols += ["value_hat", "value_se", "certified", "shots_per_setting"]
    _maybe_save(args, st)
    return row, (cols, [row])


def _cmd_simulate(args: argparse.Namespace) -> Tuple[Dict[str, Any], Table]:
    name, st = _single_state(args)
    if st.parties != 2:
        raise DomainError(f"{name}: simulate exige estado de dois qudits")
    bound = separable_bound_m(st.d)
    z, x = simulate_two_settings(st, args.shots, args.seed)
    cert = certify_from_shots(z, x, bound, args.sigmas)
    exact = evaluate_witnesses(st, bound)
    row = {"name": name}
    row.update(cert.to_dict())
    row.update(c_exact=exact.c_value, r_exact=exact.r_value)
    _maybe_save(args, st)
    cols = ["name", "d", "shots_per_setting", "c_hat", "c_se", "r_hat", "r_se", "c_exact", "r_exact",
            "c_bound", "r_bound", "sigmas", "c_certified", "r_certified", "mes_fraction_lb",
            "mes_fraction_lb_clamped", "schmidt_lb"]
    payload = dict(row)
    payload["records"] = [z.to_dict(), x.to_dict()]
    return payload, (cols, [row])


# ================
# Execução
# ================

def _document(cfg: RunConfig, payload: Dict[str, Any]) -> Dict[str, Any]:
    out = cfg.header()
    out.update(payload)
    return out


def _emit(cfg: RunConfig, fmt: str, payload: Dict[str, Any], table: Table, stream: TextIO) -> None:
    if fmt == "csv":
        cols, rows = table
        write_csv(rows, stream, cols, header=cfg.header())
    else:
        write_json(_document(cfg, payload), stream)


def _save(cfg: RunConfig, fmt: str, payload: Dict[str, Any], table: Table, path: Path) -> Path:
    if fmt == "csv":
        cols, rows = table
        return export_csv(rows, path, cols, header=cfg.header())
    return export_json(_document(cfg, payload), path)


def run(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None,
        stderr: Optional[TextIO] = None) -> int:
    out_stream = stdout if stdout is not None else sys.stdout
    err_stream = stderr if stderr is not None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2

    try:
        settings = get_settings()
        configure_default_sink(args.log_level or settings.log_level, err_stream)
        set_context({"cmd": args.cmd, "schema": SCHEMA})
        if getattr(args, "seed", None) is not None:
            add_context(seed=args.seed)
        cfg = RunConfig.from_args(args)
        log_emit(None, "info", "cli_start", options=cfg.options)

        payload, table = args.handler(args)
        if args.out:
            path = _save(cfg, args.format, payload, table, _out_path(args.out))
            log_emit(None, "info", "output_saved", path=path)
        else:
            _emit(cfg, args.format, payload, table, out_stream)
        return 0
    except USAGE_ERRORS as exc:
        log_emit(None, "info", "cli_error", kind=type(exc).__name__, message=str(exc))
        err_stream.write(f"{_PROG}: erro: {exc}\n")
        return 2
    except QWitnessError as exc:
        log_emit(None, "info", "cli_error", kind=type(exc).__name__, message=str(exc))
        err_stream.write(f"{_PROG}: falha: {exc}\n")
        return 1


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    raise SystemExit(main())
