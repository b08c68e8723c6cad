"""Command-line front end.

    infosell gen --family inst_c3 --grid 400 --output c3.json
    infosell solve --input c3.json --format csv
    infosell verify --input inst.json --mechanism mech.json
    infosell oracle --input inst.json
    infosell single-menu --input inst.json
    infosell sweep --seed 0 --count 200

Exit codes: 0 ok, 1 a check failed, 2 usage / parse / IO error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import feasibility, lp_oracle, model, optimal_mechanism, single_menu

COMMANDS = ("gen", "solve", "verify", "oracle", "single-menu", "sweep")
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ParseError(ValueError):
    pass


class IoError(OSError):
    pass


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    output: str | None = None
    format: str = "json"
    tol: float | None = None
    seed: int = 0
    count: int = 200
    grid: int | None = None
    family: str = "inst_d"
    mechanism: str | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ParseError(f"unknown command {self.command!r}")
        if self.format not in ("json", "csv"):
            raise ParseError(f"unknown format {self.format!r}")
        if self.tol is not None and not self.tol > 0:
            raise ParseError("--tol must be positive")
        if self.count < 1:
            raise ParseError("--count must be at least 1")


# --- serialisation -------------------------------------------------------------


def _round(obj):
    """Round floats to 12 significant digits so output is stable and diffable."""
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(f"{x:.12g}")
    return obj


def dumps(obj) -> str:
    return json.dumps(_round(obj), indent=2, sort_keys=False) + "\n"


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _flat_rows(d: dict) -> list[list]:
    rows = []
    for k, v in d.items():
        if isinstance(v, (list, tuple)):
            v = " ".join(_fmt(x) for x in v)
        rows.append([k, v])
    return rows


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _read_json(path: str | None, what: str = "input"):
    if path is None:
        raise ParseError(f"--{what} is required for this command")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc


def _load_instance(path: str | None) -> model.Instance:
    return model.validate_instance(_read_json(path))


def _load_mechanism(path: str) -> optimal_mechanism.Mechanism:
    raw = _read_json(path, "mechanism")
    try:
        return optimal_mechanism.Mechanism(pi=raw["pi"], pay=raw["pay"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: mechanism needs 'pi' and 'pay' ({exc})") from exc


# --- commands ------------------------------------------------------------------


def _gen(cfg: RunConfig) -> int:
    params = dict(cfg.params)
    if cfg.family == "random":
        params.setdefault("seed", cfg.seed)
    if cfg.grid is not None:
        params.setdefault("n", cfg.grid)
        if cfg.family in model.PRESETS or cfg.family == "uniform_product":
            params.setdefault("m", cfg.grid)
    inst = model.generate_family(cfg.family, **params)
    if cfg.format == "csv":
        rows = [["type", i, t, f] for i, (t, f) in enumerate(zip(inst.types.t, inst.types.f))]
        s = inst.states
        rows += [["state", lab, g, a, b] for lab, g, a, b in zip(s.labels, s.g, s.v1, s.v0)]
        _write(to_csv(["kind", "id", "a", "b", "c"], rows), cfg.output)
    else:
        _write(dumps(model.instance_to_dict(inst)), cfg.output)
    return EXIT_OK


def _solve(cfg: RunConfig) -> int:
    inst = _load_instance(cfg.input)
    sol = optimal_mechanism.solve(inst)
    if cfg.format == "csv":
        text = to_csv(optimal_mechanism.TABLE_HEADER, optimal_mechanism.solution_table(inst, sol))
    else:
        text = dumps(optimal_mechanism.solution_to_dict(inst, sol))
    _write(text, cfg.output)
    return EXIT_OK


def _emit_report(cfg: RunConfig, d: dict) -> None:
    if cfg.format == "csv":
        _write(to_csv(["field", "value"], _flat_rows(d)), cfg.output)
    else:
        _write(dumps(d), cfg.output)


def _verify(cfg: RunConfig) -> int:
    inst = _load_instance(cfg.input)
    if cfg.mechanism is not None:
        mech = _load_mechanism(cfg.mechanism)
        if mech.pi.shape != (inst.m, inst.n):
            raise ParseError(f"mechanism shape {mech.pi.shape} does not match instance {(inst.m, inst.n)}")
    else:
        mech = optimal_mechanism.solve(inst).mechanism
    tol = cfg.tol or feasibility.DEFAULT_TOL
    report = feasibility.check_feasible(inst, mech, tol)
    _emit_report(cfg, report.to_dict())
    for name in report.failures():
        print(f"FAIL {name}", file=sys.stderr)
    return EXIT_OK if report.ok() else EXIT_FAIL


def _oracle(cfg: RunConfig) -> int:
    inst = _load_instance(cfg.input)
    sol = optimal_mechanism.solve(inst)
    rev, mech = lp_oracle.oracle_revenue(inst)
    report = lp_oracle.compare(inst, sol.mechanism, rev, mech)
    _emit_report(cfg, report.to_dict())
    tol = cfg.tol or 1e-5
    if not report.ok(tol):
        print(f"FAIL oracle gap {report.rel_gap:.3g}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _single_menu(cfg: RunConfig) -> int:
    inst = _load_instance(cfg.input)
    report = single_menu.ratio_report(inst)
    _emit_report(cfg, report.to_dict())
    return EXIT_OK


def sweep(seed: int, count: int, tol: float = 1e-9, oracle_tol: float = 1e-5) -> dict:
    """solve + verify + oracle over a seeded random corpus."""
    start = time.perf_counter()
    cases = {optimal_mechanism.LOW_TAIL: 0, optimal_mechanism.HIGH_TAIL: 0, optimal_mechanism.MIXED: 0}
    max_rel_gap, max_shortfall = 0.0, 0.0
    infeasible, oracle_infeasible, solver_errors = 0, 0, 0
    for inst in model.random_corpus(seed, count):
        try:
            sol = optimal_mechanism.solve(inst)
        except optimal_mechanism.MechanismError:
            solver_errors += 1
            continue
        cases[sol.label.tag] += 1
        if not feasibility.check_feasible(inst, sol.mechanism, tol).ok():
            infeasible += 1
        rev, mech = lp_oracle.oracle_revenue(inst)
        rep = lp_oracle.compare(inst, sol.mechanism, rev, mech)
        max_rel_gap = max(max_rel_gap, rep.rel_gap)
        max_shortfall = max(max_shortfall, -rep.gap)
        oracle_infeasible += rep.oracle_feasible is False
    summary = {
        "seed": seed,
        "count": count,
        "cases": cases,
        "max_rel_gap": max_rel_gap,
        "max_oracle_shortfall": max_shortfall,
        "infeasible": infeasible,
        "oracle_infeasible": oracle_infeasible,
        "solver_errors": solver_errors,
    }
    summary["ok"] = (max_rel_gap <= oracle_tol and max_shortfall <= 1e-7
                     and infeasible == 0 and solver_errors == 0)
    print(f"sweep: {count} instances in {time.perf_counter() - start:.2f}s", file=sys.stderr)
    return summary


def _sweep(cfg: RunConfig) -> int:
    summary = sweep(cfg.seed, cfg.count, tol=cfg.tol or 1e-9)
    if cfg.format == "csv":
        flat = {k: v for k, v in summary.items() if k != "cases"}
        flat.update({f"cases.{k}": v for k, v in summary["cases"].items()})
        _write(to_csv(["field", "value"], _flat_rows(flat)), cfg.output)
    else:
        _write(dumps(summary), cfg.output)
    return EXIT_OK if summary["ok"] else EXIT_FAIL


HANDLERS = {
    "gen": _gen,
    "solve": _solve,
    "verify": _verify,
    "oracle": _oracle,
    "single-menu": _single_menu,
    "sweep": _sweep,
}


def run(cfg: RunConfig) -> int:
    return HANDLERS[cfg.command](cfg)


# --- argument parsing ----------------------------------------------------------


def _param(text: str) -> tuple[str, object]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    for cast in (int, float):
        try:
            return key, cast(value)
        except ValueError:
            pass
    return key, value


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="infosell",
                                 description="Optimal mechanisms for selling information.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--input", help="instance JSON")
    ap.add_argument("--output", help="output file (default: stdout)")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--count", type=int, default=200, help="sweep corpus size")
    ap.add_argument("--grid", type=int, default=None, help="grid resolution for gen")
    ap.add_argument("--tol", type=float, default=None, help="check tolerance override")
    ap.add_argument("--family", default="inst_d", help="instance family for gen")
    ap.add_argument("--param", action="append", type=_param, default=[],
                    help="extra family parameter key=value (repeatable)")
    ap.add_argument("--mechanism", help="mechanism JSON (pi, pay) for verify")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = RunConfig(command=args.command, input=args.input, output=args.output,
                        format=args.format, tol=args.tol, seed=args.seed, count=args.count,
                        grid=args.grid, family=args.family, mechanism=args.mechanism,
                        params=dict(args.param))
        return run(cfg)
    except (ParseError, IoError, model.ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (optimal_mechanism.MechanismError, lp_oracle.OracleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
