"""Command-line front end: ``specnet <subcommand> --scenario FILE --out DIR``.

Exit codes: 0 success, 2 invalid or missing input, 3 numerical failure.
The environment variable ``SPECNET_THREADS`` caps the BLAS/OpenMP thread
count; results do not depend on it beyond floating-point reduction order.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from pathlib import Path

from threadpoolctl import threadpool_limits

from . import pipeline
from .errors import NumericalError, SpecnetError

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def _scenario(args):
    return pipeline.load_scenario(args.scenario, args.seed_override)


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _input(args, attr, out, key) -> Path:
    path = Path(getattr(args, attr) or out / pipeline.ARTIFACTS[key])
    if not path.exists():
        raise FileNotFoundError(f"{path} not found")
    return path


def cmd_gen_graph(args):
    print(pipeline.stage_gen_graph(_scenario(args), _out(args)))


def cmd_simulate(args):
    sc = _scenario(args)
    out = _out(args)
    print(pipeline.stage_simulate(sc, _input(args, "graph", out, "graph"), out))


def cmd_identify(args):
    sc = _scenario(args)
    out = _out(args)
    graph = Path(args.graph) if args.graph else out / pipeline.ARTIFACTS["graph"]
    path = pipeline.stage_identify(sc, _input(args, "trajectory", out, "trajectory"), out,
                                   graph_path=graph if graph.exists() else None)
    print(out / pipeline.ARTIFACTS["eigenvalues"] if args.format == "csv" else path)


def cmd_analyze(args):
    sc = _scenario(args) if args.scenario else {"seed": 0, "analysis": {}}
    out = _out(args)
    path = pipeline.stage_analyze(sc, _input(args, "eigen", out, "identification"), out,
                                  n=args.n)
    if args.format == "csv":
        s = json.loads(path.read_text())["summary"]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in s.items():
            w.writerow([k, json.dumps(v)])
        csv_path = out / "summary.csv"
        csv_path.write_text(buf.getvalue())
        print(csv_path)
    else:
        print(path)


def cmd_reproduce(args):
    names = pipeline.BUNDLED[:4] if args.name == "all" else (args.name,)
    base = Path(args.out)
    for name in names:
        if args.scenario:
            sc = pipeline.load_scenario(args.scenario, args.seed_override)
        else:
            sc = pipeline.load_bundled(name, args.seed_override)
        out = base / name if len(names) > 1 else base
        t0 = time.perf_counter()
        res = pipeline.run_pipeline(sc, out)
        print(res.text)
        print(f"artifacts in {out} ({time.perf_counter() - t0:.1f} s)\n")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="specnet",
                                 description="Laplacian spectrum identification from sparse measurements")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="artifact directory (default: .)")
    common.add_argument("--seed-override", type=int, default=None,
                        help="replace the scenario's master seed")
    common.add_argument("--format", choices=("json", "csv"), default="json",
                        help="format of the primary artifact")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", parents=[common], help="write graph.json")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("simulate", parents=[common], help="write trajectory.csv")
    p.add_argument("--scenario", required=True)
    p.add_argument("--graph", help="graph JSON (default: OUT/graph.json)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("identify", parents=[common], help="write identification.json")
    p.add_argument("--scenario", required=True)
    p.add_argument("--trajectory", help="trajectory CSV (default: OUT/trajectory.csv)")
    p.add_argument("--graph", help="graph JSON for n and node layout (default: OUT/graph.json if present)")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("analyze", parents=[common], help="write summary.json")
    p.add_argument("--scenario", help="scenario for analysis options (optional)")
    p.add_argument("--eigen", help="identification JSON or eigenvalue CSV "
                                   "(default: OUT/identification.json)")
    p.add_argument("--n", type=int, help="node count (default: from the eigen file)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("reproduce", parents=[common], help="run a bundled experiment end to end")
    p.add_argument("name", choices=pipeline.BUNDLED + ("all",))
    p.add_argument("--scenario", help="use this scenario file instead of the bundled one")
    p.set_defaults(func=cmd_reproduce)
    return ap


def _thread_limit():
    raw = os.environ.get("SPECNET_THREADS")
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"SPECNET_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"SPECNET_THREADS must be a positive integer, got {raw!r}")
    return n


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with threadpool_limits(limits=_thread_limit()):
            args.func(args)
    except pipeline.StageError as exc:
        code = EXIT_NUMERIC if isinstance(exc.error, NumericalError) else EXIT_INPUT
        print(f"error: {exc}", file=sys.stderr)
        return code
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SpecnetError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
