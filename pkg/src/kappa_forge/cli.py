"""Command-line front end: evaluate DSL programs, parse them, run property suites.

Exit codes: 0 pass, 1 suite failure, 2 usage or configuration error,
3 numeric error (support overflow and friends).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .dsl import Assign, DslError, EvalError, Session, Tolerances, parse_program, to_jsonable, unparse
from .errors import ConfigError, KappaForgeError, NumericError
from .suites import SUITES, Config, report_csv, report_json, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

# flag name -> Config field
_FLAGS = {"kappa": "kappa", "nv": "nv", "nbeta": "nbeta", "vmax": "vmax", "bmax": "bmax",
          "tol_symbolic": "tol_symbolic", "tol_grid": "tol_grid", "strict": "strict",
          "threads": "threads", "seed": "seed"}


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("configuration")
    g.add_argument("--config", type=Path, help="JSON file with Config fields; flags override it")
    g.add_argument("--kappa", type=float, help="deformation parameter (default 1)")
    g.add_argument("--nv", type=int, help="v intervals (even, default 256)")
    g.add_argument("--nbeta", type=int, help="beta intervals (even, default 256)")
    g.add_argument("--vmax", type=float, help="v box half-width (default 8)")
    g.add_argument("--bmax", type=float, help="beta box half-width (default 12)")
    g.add_argument("--tol-symbolic", type=float, help="symbolic tolerance (default 1e-10)")
    g.add_argument("--tol-grid", type=float, help="grid tolerance (default 1e-4)")
    g.add_argument("--strict", action="store_true", default=None,
                   help="raise on any beta leakage instead of reporting it")
    g.add_argument("--threads", type=int, help="worker threads (1 gives byte-identical reports)")
    g.add_argument("--seed", type=int, help="fixture randomisation seed")
    g.add_argument("--out", choices=("json", "csv", "text"), default=None,
                   help="output format (suite default json, eval default text)")
    g.add_argument("-o", "--output", type=Path, help="write the report here instead of stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="kappa-forge",
                                 description="kappa-Minkowski star products: symbolic and grid engines")
    sub = ap.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", parents=[common], help="evaluate DSL statements")
    ev.add_argument("source", nargs="*", help="program text; statements joined by newlines")
    ev.add_argument("-f", "--file", type=Path, help="read the program from a file ('-' for stdin)")

    pa = sub.add_parser("parse", parents=[common], help="parse, type-check and reprint")
    pa.add_argument("source", nargs="+")

    su = sub.add_parser("suite", parents=[common], help="run a property suite")
    su.add_argument("name", choices=SUITES + ("all",))
    su.add_argument("--figures", type=Path, metavar="DIR",
                    help="also render PNG figures of the report into DIR")
    return ap


def load_config(args: argparse.Namespace) -> Config:
    data: dict = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    for flag, key in _FLAGS.items():
        val = getattr(args, flag, None)
        if val is not None:
            data[key] = val
    return Config.from_dict(data)


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        path.write_text(text if text.endswith("\n") else text + "\n")


def _read_source(args) -> str:
    parts = list(getattr(args, "source", []) or [])
    f = getattr(args, "file", None)
    if f is not None:
        parts.append(sys.stdin.read() if str(f) == "-" else f.read_text())
    if not parts:
        raise ConfigError("no program given")
    return "\n".join(parts)


def cmd_eval(args, cfg: Config) -> int:
    session = Session(cfg.kappa, cfg.spec, Tolerances(cfg.tol_symbolic, cfg.tol_grid))
    rows = []
    for node, t, value in session.run(_read_source(args)):
        rows.append({"source": unparse(node), "type": str(t),
                     "name": node.name if isinstance(node, Assign) else None,
                     "text": session.show(node, value), "value": to_jsonable(value)})
    fmt = args.out or "text"
    if fmt == "json":
        text = json.dumps({"schema": "kappa-forge/1", "kappa": cfg.kappa, "results": rows}, indent=2)
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["source", "type", "text"])
        for r in rows:
            w.writerow([r["source"], r["type"], r["text"]])
        text = buf.getvalue()
    else:
        text = "\n".join(f"{r['name']} = {r['text']}" if r["name"] else r["text"] for r in rows)
    _emit(text, args.output)
    return EXIT_OK


def cmd_parse(args, cfg: Config) -> int:
    session = Session(cfg.kappa, cfg.spec)
    out = []
    for node in parse_program(_read_source(args)):
        out.append({"source": unparse(node), "type": str(session.check(node))})
    if (args.out or "text") == "json":
        _emit(json.dumps(out, indent=2), args.output)
    else:
        _emit("\n".join(f"{r['source']}    : {r['type']}" for r in out), args.output)
    return EXIT_OK


def cmd_suite(args, cfg: Config) -> int:
    report = run_suite(args.name, cfg)
    fmt = args.out or "json"
    _emit(report_csv(report) if fmt == "csv" else report_json(report), args.output)
    if args.figures is not None:
        from .plotting import render_report
        for p in render_report(report, args.figures):
            print(f"figure: {p}", file=sys.stderr)
    return EXIT_OK if report["pass"] else EXIT_FAIL


COMMANDS = {"eval": cmd_eval, "parse": cmd_parse, "suite": cmd_suite}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EvalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC if isinstance(exc.__cause__, NumericError) else EXIT_USAGE
    except DslError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except KappaForgeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
