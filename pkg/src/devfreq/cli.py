"""Command line entry point: ``devfreq run | bounds | constants | selftest``.

Exit codes: 0 success, 1 bound-compliance failure, 2 configuration or
parameter error, 3 resource limit.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import hashlib
import io
import json
import os
import sys
import time
from typing import List, Optional

from . import __version__
from . import analytic_bounds as ab
from . import selftest
from .errors import ConfigError, DevfreqError, DomainError, ResourceLimitError
from .experiments import KIND_REGISTRY, ExperimentConfig, estimate_overlap_tail, make_kind, resolve_workers
from .stats_report import atomic_write, compare, emit

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3

RUN_KEYS = ("kind", "samples", "seed", "n_min", "n_max", "k_max", "confidence")

PRESETS = {
    "monotone-quick": "[monotone-quick]\nkind = monotone\nsamples = 1000\nseed = 1\nk_max = 10\n",
    "levy-fixed-eps": "[levy-fixed-eps]\nkind = levy-overlap\neps = 0.5\nJ_ref = 16\nn_min = 0\nn_max = 14\n"
                      "samples = 10000\nseed = 1\nk_max = 10\n",
    "levy-step": "[levy-step]\nkind = levy-step\nalpha = 1.0\nJ = 0\nsamples = 10000\nseed = 1\nk_max = 5\n",
    "qv-dyadic": "[qv-dyadic]\nkind = qv\nt = 1.0\neps = 0.5\nsamples = 10000\nseed = 1\nk_max = 10\n",
}


def _parse_range(text: str):
    try:
        lo, hi = text.split("..")
        return int(lo), int(hi)
    except ValueError as exc:
        raise ConfigError(f"expected a range a..b, got {text!r}") from exc


def _parse_value(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def _parse_params(items: List[str]) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"expected key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = _parse_value(value.strip())
    return out


def load_config(text: str, overrides: Optional[dict] = None) -> List[dict]:
    """Parse an INI document into experiment sections.

    Each section names one experiment; ``kind`` selects the event schedule,
    the run keys (``samples``, ``seed``, ``n_min``, ``n_max``, ``k_max``,
    ``confidence``) control the Monte Carlo, and every other key is passed to
    the event kind.
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    if not parser.sections():
        raise ConfigError("config has no experiment sections")
    sections = []
    for name in parser.sections():
        raw = dict(parser[name])
        raw.update(overrides or {})
        if "kind" not in raw:
            raise ConfigError(f"[{name}] is missing 'kind'")
        sections.append({"name": name, **{k: str(v) for k, v in raw.items()}})
    return sections


def build_experiment(section: dict):
    """Turn a parsed section into ``(ExperimentConfig, confidence)``."""
    params = {k: v for k, v in section.items() if k not in RUN_KEYS and k != "name"}
    kind = make_kind(section["kind"], **params)
    try:
        n_range = None
        if "n_min" in section or "n_max" in section:
            lo, hi = kind.n_range()
            n_range = (int(section.get("n_min", lo)), int(section.get("n_max", hi)))
        cfg = ExperimentConfig(kind, n_range, int(section.get("samples", 1000)), int(section.get("seed", 0)),
                               int(section.get("k_max", 10)), section["name"])
        confidence = float(section.get("confidence", 0.99))
    except ValueError as exc:
        raise ConfigError(f"[{section['name']}] {exc}") from exc
    return cfg, confidence


def effective_config(cfg: ExperimentConfig, confidence: float) -> str:
    """Canonical INI text of a fully resolved experiment."""
    lines = [f"[{cfg.name}]", f"kind = {cfg.kind.name}"]
    lines += [f"{k} = {v}" for k, v in dataclasses.asdict(cfg.kind).items()]
    lines += [f"samples = {cfg.samples}", f"seed = {cfg.seed}", f"n_min = {cfg.n_range[0]}",
              f"n_max = {cfg.n_range[1]}", f"k_max = {cfg.k_max}", f"confidence = {confidence}"]
    return "\n".join(lines) + "\n"


def tail_csv(tail) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["k", "exceed", "samples", "frequency"])
    for k in range(tail.k_max + 1):
        writer.writerow([k, int(tail.exceed[k]), tail.samples, repr(float(tail.exceed[k]) / tail.samples)])
    return buf.getvalue()


def cmd_run(args) -> int:
    if args.print_defaults:
        for name in sorted(KIND_REGISTRY):
            kind = KIND_REGISTRY[name]()
            cfg = ExperimentConfig(kind, samples=1000, seed=0, k_max=10, name=name)
            sys.stdout.write(effective_config(cfg, 0.99) + "\n")
        return EXIT_OK
    if args.preset:
        if args.preset not in PRESETS:
            raise ConfigError(f"unknown preset {args.preset!r}; known: {', '.join(sorted(PRESETS))}")
        text = PRESETS[args.preset]
    elif args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    else:
        raise ConfigError("give a config file or --preset")
    overrides = _parse_params(args.set or [])
    workers = resolve_workers(args.workers)
    experiments = [build_experiment(s) for s in load_config(text, overrides)]
    os.makedirs(args.out, exist_ok=True)
    failed = False
    manifest = {"tool": "devfreq", "version": __version__, "started": time.strftime("%Y-%m-%dT%H:%M:%S"),
                "experiments": []}
    for cfg, confidence in experiments:
        eff = effective_config(cfg, confidence)
        tail = estimate_overlap_tail(cfg, workers)
        bound = cfg.kind.bound()
        outputs = {"tail_csv": os.path.join(args.out, f"{cfg.name}.tail.csv")}
        atomic_write(outputs["tail_csv"], tail_csv(tail))
        entry = {"name": cfg.name, "seed": cfg.seed, "config_sha256": hashlib.sha256(eff.encode()).hexdigest(),
                 "config": eff}
        if bound is not None:
            report = compare(tail, bound, confidence)
            outputs["report_json"] = os.path.join(args.out, f"{cfg.name}.report.json")
            outputs["report_csv"] = os.path.join(args.out, f"{cfg.name}.report.csv")
            atomic_write(outputs["report_json"], emit(report, "json"))
            atomic_write(outputs["report_csv"], emit(report, "csv"))
            if not args.quiet:
                sys.stdout.write(emit(report, "text"))
            entry["passed"] = report.passed
            failed |= not report.passed
        entry["outputs"] = outputs
        manifest["experiments"].append(entry)
    manifest["finished"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    atomic_write(os.path.join(args.out, "manifest.json"), json.dumps(manifest, indent=2) + "\n")
    return EXIT_FAIL if failed else EXIT_OK


def print_constants(out=None) -> int:
    out = out or sys.stdout
    for name, value in ab.CONSTANTS.items():
        out.write(f"{name:22s} {value:.6f}\n")
    return EXIT_OK


def cmd_bounds(args) -> int:
    if args.theorem == "constants":
        return print_constants()
    params = _parse_params(args.params)
    bound = ab.build_bound(args.theorem, **params)
    lo, hi = _parse_range(args.k) if args.k else (bound.k_min, bound.k_min + 9)
    rows = bound.table(lo, hi)
    if not rows:
        raise DomainError(f"no valid k in {lo}..{hi}; {bound.name} needs k >= {bound.k_min}")
    writer = csv.writer(sys.stdout, lineterminator="\n")
    if args.csv:
        writer.writerow(["k", "bound"])
        for k, v in rows:
            writer.writerow([k, repr(v)])
    else:
        sys.stdout.write(f"# {bound.name} {json.dumps(bound.to_dict(0)['params'], sort_keys=True)}\n")
        for k, v in rows:
            sys.stdout.write(f"{k:>5d}  {v:.6g}\n")
    return EXIT_OK


def cmd_selftest(args) -> int:
    summary = selftest.run(full=args.full)
    for r in summary["checks"]:
        sys.stdout.write(f"{'PASS' if r['ok'] else 'FAIL'}  {r['check']:22s} {r['detail']}  ({r['seconds']}s)\n")
    if args.full or args.json:
        text = json.dumps(summary, indent=2) + "\n"
        if args.json:
            atomic_write(args.json, text)
        else:
            sys.stdout.write(text)
    return EXIT_OK if summary["ok"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="devfreq", description="Deviation-frequency simulation and bounds.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run experiments from an INI config")
    run.add_argument("config", nargs="?")
    run.add_argument("--preset", help=f"built-in config: {', '.join(sorted(PRESETS))}")
    run.add_argument("--out", default="devfreq-out", help="output directory")
    run.add_argument("--workers", type=int, default=None, help="worker processes (env DEVFREQ_WORKERS)")
    run.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    run.add_argument("--print-defaults", action="store_true", help="print default configs and exit")
    run.add_argument("--quiet", action="store_true")
    run.set_defaults(func=cmd_run)

    bounds = sub.add_parser("bounds", help="tabulate an analytic bound")
    bounds.add_argument("theorem", help=f"one of: constants, {', '.join(sorted(ab.BOUND_REGISTRY))}")
    bounds.add_argument("params", nargs="*", metavar="KEY=VALUE")
    bounds.add_argument("--k", help="range a..b")
    bounds.add_argument("--csv", action="store_true")
    bounds.set_defaults(func=cmd_bounds)

    const = sub.add_parser("constants", help="print the named constants")
    const.set_defaults(func=lambda args: print_constants())

    st = sub.add_parser("selftest", help="run the oracle suite")
    st.add_argument("--full", action="store_true")
    st.add_argument("--json", help="write the summary JSON to this path")
    st.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        sys.stderr.write(f"devfreq: resource limit: {exc}\n")
        return EXIT_RESOURCE
    except (DevfreqError, ValueError) as exc:
        sys.stderr.write(f"devfreq: error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
