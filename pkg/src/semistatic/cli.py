"""Command-line driver: ``block``, ``paste``, ``continuous`` and ``dump-model``.

Exit codes: 0 when every hard check passes, 1 when a mathematical check
fails, 2 on usage or validation errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .blocks import BlockParams, build_block, verify_block
from .continuous import ContinuousBlockParams, mc_verify
from .decompose import block_row, rows_csv
from .errors import SemistaticError
from .pasting import convergence_table, default_schedule, divergence_check, paste, verify_partials
from .probspace import parse_rational
from .report import rows_to_csv

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    overrides: dict = field(default_factory=dict)
    out: Path = Path(".")
    fmt: str = "csv"


def _rational(text):
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from None


def _add_block_params(p, decimals=False):
    kind = str if decimals else _rational
    p.add_argument("--eps", type=kind, default="1/2" if decimals else Fraction(1, 2))
    p.add_argument("--M", type=kind, default="2" if decimals else Fraction(2))
    p.add_argument("--a", type=kind, default="2" if decimals else Fraction(2))
    p.add_argument("--b", type=kind, default="3" if decimals else Fraction(3))


def _add_output(p):
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semistatic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("block", help="verify one discrete block")
    _add_block_params(p)
    _add_output(p)

    p = sub.add_parser("paste", help="pasted model: convergence and divergence tables")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--p", dest="p_list", type=_int_list, default=[1, 2, 3])
    p.add_argument("--m-max", type=int, default=None)
    p.add_argument("--divergence-only", action="store_true")
    _add_output(p)

    p = sub.add_parser("continuous", help="Monte Carlo check of the Brownian block")
    _add_block_params(p, decimals=True)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-step", default=None, help="time step of the path walk, e.g. 1/16")
    p.add_argument("--path-samples", type=int, default=0)
    p.add_argument("--streams", type=int, default=8)
    _add_output(p)

    p = sub.add_parser("dump-model", help="write a model as JSON")
    p.add_argument("kind", choices=("block", "paste"))
    _add_block_params(p)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--out", type=Path, default=Path("."))
    return parser


def _write(cfg: RunConfig, stem: str, csv_text: str, payload) -> Path:
    cfg.out.mkdir(parents=True, exist_ok=True)
    if cfg.fmt == "json":
        path = cfg.out / f"{stem}.json"
        path.write_text(payload if isinstance(payload, str) else json.dumps(payload, indent=2) + "\n")
    else:
        path = cfg.out / f"{stem}.csv"
        path.write_text(csv_text)
    return path


def _csv_rows_as_json(csv_rows, columns):
    return list(csv.DictReader(io.StringIO(rows_to_csv(csv_rows, columns))))


def cmd_block(cfg: RunConfig) -> int:
    o = cfg.overrides
    if o["M"] <= 0:
        raise UsageError("--M must be positive")
    block = build_block(BlockParams(o["eps"], o["M"], o["a"], o["b"]))
    rep = verify_block(block)
    _write(cfg, "block_checks", rep.to_csv(), rep.to_json())
    row = block_row(block)
    summary_csv = rows_csv([row])
    _write(cfg, "block_summary", summary_csv, _csv_rows_as_json([row], list(row)))
    print(rep.summary())
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_paste(cfg: RunConfig) -> int:
    o = cfg.overrides
    N = o["depth"]
    if N < 1:
        raise UsageError("--depth must be at least 1")
    schedule = default_schedule()
    ok = True
    if not o["divergence_only"]:
        model = paste(schedule, N)
        ok &= model.report.passed
        m_max = N - 1 if o["m_max"] is None else o["m_max"]
        rows = []
        for p in o["p_list"]:
            table = convergence_table(schedule, N, p, m_max, model=model)
            ok &= table.all_equal
            lo, hi = table.tail_bounds
            for r in table.rows:
                rows.append({**r, "tail_lower": lo, "tail_upper": hi})
        cols = ["m", "p", "computed", "closed_form", "equal", "tail_lower", "tail_upper"]
        _write(cfg, "convergence", rows_to_csv(rows, cols), _csv_rows_as_json(rows, cols))
        partials = verify_partials(model)
        ok &= partials.passed
        _write(cfg, "partials", partials.to_csv(), partials.to_json())
        print(model.report.summary())
        print(partials.summary())
    div = divergence_check(schedule, N)
    ok &= div.report.passed
    cols = ["N", "global_cost", "sum_block_costs", "N/24", "N/16", "decoupled", "cost>=N/24", "cost>=N/16"]
    _write(cfg, "divergence", div.to_csv(), _csv_rows_as_json(div.rows, cols))
    print(div.report.summary())
    return EXIT_OK if ok else EXIT_FAIL


def cmd_continuous(cfg: RunConfig) -> int:
    o = cfg.overrides
    try:
        params = ContinuousBlockParams(
            *(Fraction(o[k]) for k in ("eps", "M", "a", "b"))
        )
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from None
    grid = o["grid_step"]
    if grid is not None:
        grid = _rational(grid)
    rep = mc_verify(
        params, o["n"], o["seed"], n_streams=o["streams"], grid_step=grid, path_samples=o["path_samples"]
    )
    _write(cfg, "continuous", rep.to_csv(), rep.to_json())
    for r in rep.rows:
        print(f"  [{'ok ' if r.passed else 'FAIL'}] {r.name}: {r.estimate:.6g} (se {r.se:.3g}) vs {r.target:.6g}")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_dump_model(cfg: RunConfig) -> int:
    o = cfg.overrides
    cfg.out.mkdir(parents=True, exist_ok=True)
    if o["kind"] == "block":
        model = build_block(BlockParams(o["eps"], o["M"], o["a"], o["b"]))
        path = cfg.out / "block_model.json"
    else:
        if o["depth"] < 1:
            raise UsageError("--depth must be at least 1")
        model = paste(default_schedule(), o["depth"])
        path = cfg.out / f"pasted_model_N{o['depth']}.json"
    path.write_text(json.dumps(model.to_dict(), indent=2, sort_keys=True) + "\n")
    print(path)
    return EXIT_OK


COMMANDS = {
    "block": cmd_block,
    "paste": cmd_paste,
    "continuous": cmd_continuous,
    "dump-model": cmd_dump_model,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "out", "fmt")}
    cfg = RunConfig(args.command, overrides, args.out, getattr(args, "fmt", "json"))
    try:
        return COMMANDS[args.command](cfg)
    except (UsageError, SemistaticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
