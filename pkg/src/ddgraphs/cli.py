"""Command line front end.

Exit codes: 0 success, 1 certification or expectation failure, 2 usage error.
Errors are also printed to stderr as a JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .cache import CacheCorrupt
from .compound import CertificationFailed, Infeasible, PlanGraphMismatch, RangeExceedsDegree
from .field import NotPrimePower, make_field
from .formats import FORMATS, FormatUnsupported, dumps, read_graph
from .graph import DiameterBudgetExceeded, Disconnected, certify
from .harness import NAMES, Built, RunConfig, build_compound, build_family, build_named, format_table, run_table
from .moore import ValidationFailed

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
_SUFFIX = {"graph6": ".g6", "edgelist": ".edges", "dimacs": ".dimacs"}

_FAILURES = (CertificationFailed, ValidationFailed, Disconnected, DiameterBudgetExceeded, CacheCorrupt)
_USAGE = (NotPrimePower, RangeExceedsDegree, Infeasible, PlanGraphMismatch, FormatUnsupported,
          KeyError, ValueError, FileNotFoundError)


class UsageError(Exception):
    pass


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _config(args) -> RunConfig:
    cfg = RunConfig.from_env(seed=args.seed, workers=args.workers, diameter_mode=args.mode,
                             retries=args.retries, cache_dir=args.cache_dir,
                             output_format=getattr(args, "format", None),
                             use_cache=False if args.no_cache else None)
    cfg.apply_workers()
    return cfg


def _parse_ranges(text: str) -> tuple[int, int, int]:
    parts = [int(p) for p in text.replace(",", " ").split()]
    if len(parts) != 3:
        raise UsageError("--ranges takes three integers I,J,K")
    return parts[0], parts[1], parts[2]


def _build(args, cfg: RunConfig) -> Built:
    if args.named:
        return build_named(args.named, cfg)
    if not args.family or args.q is None:
        raise UsageError("give --named NAME or --family FAMILY --q Q")
    if args.h is not None or args.ranges:
        if args.h is None or not args.ranges:
            raise UsageError("--h and --ranges go together")
        return build_compound(args.family, args.q, args.h, _parse_ranges(args.ranges), cfg)
    return build_family(args.family, args.q, cfg)


def cmd_construct(args) -> int:
    cfg = _config(args)
    built = _build(args, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fmt = cfg.output_format
    files = [out / f"{built.name}{_SUFFIX[fmt]}", out / f"{built.name}.cert.json"]
    files[0].write_text(dumps(built.graph, fmt))
    cert = built.certificate.to_json() if built.certificate else None
    files[1].write_text(json.dumps(cert, sort_keys=True) + "\n")
    if built.plan is not None:
        files.append(out / f"{built.name}.plan.json")
        files[-1].write_text(built.plan.dumps() + "\n")
    payload = {"name": built.name, "order": built.graph.order, "certificate": cert,
               "conditions": built.conditions, "files": [str(f) for f in files]}
    c = cert or {}
    text = (f"{built.name}: order {built.graph.order}, max degree {c.get('max_degree')}, "
            f"diameter {c.get('diameter')} ({c.get('diameter_method')})\n" + "\n".join(map(str, files)))
    _emit(args, payload, text)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _config(args)
    g = read_graph(args.path, args.input_format)
    cert = certify(g, cfg.diameter_mode, cfg.budget, with_girth=not args.no_girth,
                   fallback_exact=cfg.fallback_exact)
    checks = [("order", args.expect_order, cert.order),
              ("degree", args.expect_degree, cert.max_degree),
              ("diameter", args.expect_diameter, cert.diameter)]
    failed = [{"expectation": k, "expected": want, "actual": got}
              for k, want, got in checks if want is not None and want != got]
    payload = {"path": str(args.path), "certificate": cert.to_json(), "failed": failed, "ok": not failed}
    lines = [f"order {cert.order}, degrees {cert.min_degree}..{cert.max_degree}, girth {cert.girth}, "
             f"diameter {cert.diameter} ({cert.diameter_method})"]
    lines += [f"FAIL {f['expectation']}: expected {f['expected']}, actual {f['actual']}" for f in failed]
    lines.append("ok" if not failed else f"{len(failed)} expectation(s) failed")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if not failed else EXIT_FAIL


def cmd_export(args) -> int:
    cfg = _config(args)
    if args.path:
        g = read_graph(args.path, args.input_format)
    else:
        g = _build(args, cfg).graph
    text = dumps(g, args.format or cfg.output_format)
    if args.output:
        Path(args.output).write_text(text)
        if args.json:
            print(json.dumps({"output": args.output, "order": g.order, "size": g.size}, sort_keys=True))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_table(args) -> int:
    cfg = _config(args)
    cfg.flagged_diameter = args.flagged_diameter
    entries = run_table(args.scope, cfg)
    bad = [e for e in entries if e.status == "mismatch"]
    _emit(args, {"scope": args.scope, "rows": [e.to_json() for e in entries], "ok": not bad},
          format_table(entries))
    return EXIT_FAIL if bad else EXIT_OK


def cmd_field_debug(args) -> int:
    spec = make_field(args.q)
    payload = {"q": spec.q, "p": spec.p, "n": spec.n, "modulus": list(spec.modulus),
               "generator": int(spec.generator),
               "add": spec.add_table.tolist(), "mul": spec.mul_table.tolist()}
    _emit(args, payload, spec.tables_text())
    return EXIT_OK


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--seed", type=int, default=None, help="plan seed (env DDGRAPHS_SEED, default 0)")
    p.add_argument("--workers", type=int, default=None, help="certification threads (env DDGRAPHS_WORKERS)")
    p.add_argument("--mode", choices=("exact", "bounded"), default=None,
                   help="diameter mode (default: exact up to 10000 vertices, bounded above)")
    p.add_argument("--retries", type=int, default=None, help="retry seeds (env DDGRAPHS_RETRIES, default 64)")
    p.add_argument("--cache-dir", type=Path, default=None, help="cache directory (env DDGRAPHS_CACHE_DIR)")
    p.add_argument("--no-cache", action="store_true", help="do not read or write the cache")


def _build_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--named", choices=NAMES, help="a named compound")
    p.add_argument("--family", choices=("pg", "gq", "gh"), help="Moore family: plane, quadrangle, hexagon")
    p.add_argument("--q", type=int, help="field order")
    p.add_argument("--h", type=int, help="clique size for a custom hexagon compound")
    p.add_argument("--ranges", help="I,J,K for a custom hexagon compound")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ddgraphs", description="Large (degree, diameter) graphs from "
                                     "generalized polygons and clique compounding.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build, certify and write a graph")
    _build_args(p)
    p.add_argument("--format", choices=FORMATS, default=None, help="graph file format (default graph6)")
    p.add_argument("--out", default=".", help="output directory")
    _common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", help="certify a graph file against expectations")
    p.add_argument("path")
    p.add_argument("--input-format", choices=FORMATS, default=None)
    p.add_argument("--expect-order", type=int)
    p.add_argument("--expect-degree", type=int, help="expected maximum degree")
    p.add_argument("--expect-diameter", type=int)
    p.add_argument("--no-girth", action="store_true", help="skip the girth computation")
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export", help="convert a graph file or write a built graph")
    p.add_argument("path", nargs="?")
    p.add_argument("--input-format", choices=FORMATS, default=None)
    p.add_argument("--format", choices=FORMATS, default=None)
    p.add_argument("-o", "--output")
    _build_args(p)
    _common(p)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("table", help="reproduce the record table rows")
    p.add_argument("--scope", choices=("fast", "full"), default="fast")
    p.add_argument("--flagged-diameter", action="store_true",
                   help="also certify the diameter of flagged rows (slow)")
    _common(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("field-debug", help="print GF(q) addition and multiplication tables")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_field_debug)
    return parser


def _error(exc: BaseException, code: int) -> int:
    msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
    print(json.dumps({"error": type(exc).__name__, "message": msg, "exit": code}, sort_keys=True),
          file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _FAILURES as exc:
        return _error(exc, EXIT_FAIL)
    except UsageError as exc:
        return _error(exc, EXIT_USAGE)
    except _USAGE as exc:
        return _error(exc, EXIT_USAGE)


if __name__ == "__main__":
    sys.exit(main())
