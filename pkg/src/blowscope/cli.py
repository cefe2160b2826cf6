"""Command-line interface.

Exit codes: 0 success, 1 a check reported FAIL, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import BlowscopeError, ConfigError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blowscope",
        description="Pseudo-spectral blow-up simulator and diagnostics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario and persist it")
    p_sim.add_argument("scenario", help="scenario file (key = value text)")
    p_sim.add_argument("--base-dir", default=None, help="prefix for output.dir")

    p_scan = sub.add_parser("scan", help="recompute diagnostics from snapshots")
    p_scan.add_argument("run_dir")

    p_rates = sub.add_parser("rates", help="fit exponents and emit inequality checks")
    p_rates.add_argument("run_dir")
    p_rates.add_argument("--eta", type=float, default=None)
    p_rates.add_argument("--eps-level", type=float, default=None)
    p_rates.add_argument("--alpha", type=float, default=None)

    p_lemma = sub.add_parser("lemma", help="persistence experiments")
    group = p_lemma.add_mutually_exclusive_group(required=True)
    group.add_argument("--builtin", action="store_true", help="run the standing case suite")
    group.add_argument("--config", default=None, help="case config file")
    p_lemma.add_argument("--out", default="lemma_out")

    p_exact = sub.add_parser("exact", help="residual-verify an exact family")
    p_exact.add_argument("family",
                         choices=["soliton1d", "soliton2d",
                                  "pseudoconformal1d", "pseudoconformal2d", "gaussian"])
    p_exact.add_argument("--check", action="store_true", required=True)
    p_exact.add_argument("--out", default=None, help="write the report here instead of stdout")
    p_exact.add_argument("--profile-csv", default=None,
                         help="also export the ground-state profile as (r, Q) rows")

    sub.add_parser("version", help="print the package version")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0

    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return 2
    except BlowscopeError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    from . import harness

    if args.command == "version":
        print(__version__)
        return 0

    if args.command == "simulate":
        text = Path(args.scenario).read_text()
        sc = harness.parse_scenario(text)
        out = harness.simulate(sc, base_dir=args.base_dir)
        print(out)
        return 0

    if args.command == "scan":
        path = harness.rescan(args.run_dir)
        print(path)
        return 0

    if args.command == "rates":
        report = harness.rates(args.run_dir, eta=args.eta,
                               eps_level=args.eps_level, alpha=args.alpha)
        failed = [name for name, chk in report["checks"].items()
                  if isinstance(chk, dict) and chk.get("pass") is False]
        print(json.dumps({k: v for k, v in report.items() if k != "checks"}, sort_keys=True))
        for name, chk in sorted(report["checks"].items()):
            state = chk.get("pass")
            word = "PASS" if state else ("FAIL" if state is False else "SKIP")
            print(f"  {name}: {word}")
        return 1 if failed else 0

    if args.command == "lemma":
        if args.config is not None:
            text = Path(args.config).read_text()
            verdict = _lemma_from_config(text, args.out)
        else:
            verdict = harness.builtin_lemma_suite(args.out)
        print(json.dumps(verdict, sort_keys=True, default=str))
        return 0 if verdict["pass"] else 1

    if args.command == "exact":
        report = harness.exact_check(args.family)
        if args.profile_csv:
            from .solutions import ground_state, profile_to_csv

            d = 2 if args.family.endswith("2d") else 1
            profile_to_csv(args.profile_csv, ground_state(d))
        payload = json.dumps(report, sort_keys=True)
        if args.out:
            Path(args.out).write_text(payload + "\n")
        else:
            print(payload)
        return 0 if report["pass"] else 1

    raise ConfigError(f"unknown command {args.command!r}")


def _lemma_from_config(text: str, out_dir: str) -> dict:
    from .harness import _KV, _write_persistence_csv, parse_kv_text
    from .formats import dump_json
    from .lemma_lab import make_case, run_persistence
    from .spectral import Grid

    kv = _KV(parse_kv_text(text), "lemma config")
    d = kv.get("d", int, 1)
    grid = Grid(d, kv.get("grid.n", int, 4096 if d == 1 else 512),
                kv.get("grid.half_width", float, 16.0 if d == 1 else 8.0))
    boost = kv.get("boost_xi0", str, None)
    boost_xi0 = tuple(float(v) for v in boost.split(",")) if boost else None
    case = make_case(grid, kv.get("shape", str, "gaussian"),
                     bump_width=kv.get("bump_width", float, 0.5),
                     boost_xi0=boost_xi0, A=kv.get("A", int, 1))
    table = run_persistence(case, samples=kv.get("samples", int, 41))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_persistence_csv(out / "case.csv", table)
    verdict = {"pass": table["pass"], "t_bound": table["t_bound"],
               "t_fail": table["t_fail"], "c1": case.c1, "l2": case.l2}
    dump_json(out / "verdicts.json", {"cases": {"case": verdict}, "pass": verdict["pass"]})
    return {"cases": {"case": verdict}, "pass": verdict["pass"]}


if __name__ == "__main__":
    raise SystemExit(main())
