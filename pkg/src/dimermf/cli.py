"""Command-line front-end: ``dimermf sweep`` and ``dimermf compare``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import sweep as sw
from .model import GaugeError, parse_config

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_THRESHOLD = 0, 2, 3, 4


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dimermf", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("sweep", "tabulate observables over a parameter grid"),
                        ("compare", "compare approximate methods with an exact one")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", type=Path, help="key = value config file")
        s.add_argument("--figure", choices=sorted(sw.PRESETS), help="figure preset")
        s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       dest="overrides", help="override a config key (repeatable)")
        s.add_argument("--out", type=Path, help="output directory (default: stdout)")
        s.add_argument("--methods", nargs="+", help=f"subset of {', '.join(sw.METHODS)}")
        s.add_argument("--observables", nargs="+",
                       help="energy theta phi phase S_rho12 S_rho1 S_rho23 C12 C23 "
                            "fidelity12 spectrum:k crossings Bc1 Bc2 Bs Bc1_ex Bc2_ex")
        s.add_argument("--overlap", choices=("keep", "neglect"))
        s.add_argument("--threads", type=int, default=1)
    return p


def _split_values(values):
    if not values:
        return None
    out = []
    for v in values:
        out.extend(t for t in v.split(",") if t)
    return out


def _overrides(items) -> dict[str, str]:
    out = {}
    for item in items:
        if "=" not in item:
            raise sw.ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip().lower()] = v.strip()
    return out


def _load(args) -> sw.SweepConfig:
    keys = {}
    if args.config is not None:
        try:
            keys = parse_config(args.config.read_text())
        except OSError as exc:
            raise sw.ConfigError(f"cannot read {args.config}: {exc}") from exc
        except ValueError as exc:
            raise sw.ConfigError(str(exc)) from exc
    config = sw.build_config(keys, args.figure, _overrides(args.overrides),
                             _split_values(args.methods), _split_values(args.observables),
                             args.overlap)
    if args.threads < 1:
        raise sw.ConfigError("--threads must be >= 1")
    sw.resolve_columns(config)
    return config


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(type(obj))


def _emit(name: str, csv_text: str, manifest: dict, out: Path | None):
    if out is None:
        sys.stdout.write(csv_text)
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{name}.csv").write_text(csv_text)
    (out / f"{name}.json").write_text(json.dumps(manifest, indent=2, sort_keys=True,
                                                 default=_json_default) + "\n")


def _table(header, rows) -> str:
    cells = [header] + [[sw.format_value(v) for v in r] for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(header))]
    return "\n".join("  ".join(c[i].rjust(widths[i]) for i in range(len(c)))
                     for c in cells) + "\n"


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = _load(args)
    except (sw.ConfigError, GaugeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "sweep":
            result = sw.run_sweep(config, args.threads)
            _emit(config.name, sw.to_csv(result.header, result.rows, result.manifest),
                  result.manifest, args.out)
            return EXIT_OK
        report = sw.compare(config, args.threads)
    except sw.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # any solver failure maps to one exit code
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    name = f"{config.name}-compare"
    _emit(name, sw.to_csv(report.header, report.rows, report.manifest), report.manifest,
          args.out)
    stream = sys.stderr if args.out is None else sys.stdout
    stream.write(_table(report.header, report.rows))
    for c in report.checks:
        stream.write(f"{'PASS' if c['pass'] else 'FAIL'}  {c['check']}  worst={c['worst']:.6g}\n")
    return EXIT_OK if report.passed else EXIT_THRESHOLD


if __name__ == "__main__":
    sys.exit(main())
