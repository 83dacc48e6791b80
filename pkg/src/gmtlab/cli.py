"""The gmt-lab command line: config parsing, dispatch, exit-code contract.

Usage:
    gmt-lab run <scenario|all> [--seed N] [--out DIR] [--jobs N] [--force]
                               [--config FILE] [--set key=value]...
    gmt-lab list

Exit codes: 0 all verdicts pass, 1 some verdict fails, 2 usage error,
3 runtime error.  Flags override config-file values, which override the
scenario defaults.  The config file is flat `key = value` text with
comma-separated lists; `#` starts a comment line.

Each scenario writes only inside <out>/<scenario-id>/: the report manifest,
one CSV per series, PGM snapshots, and a FAILED marker if the run raised.
Human-readable one-line summaries go to standard output.
"""

from __future__ import annotations

import argparse
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .reporting import write_report
from .scenarios import DEFAULTS, run_scenario, scenario_ids


class UsageError(Exception):
    """Bad flags, keys, or values: mapped to exit code 2."""


# top-level settings a config file may carry besides scenario params
_FILE_SETTINGS = {"seed": 0, "out": "results", "jobs": 1, "force": False}
_TRUE_WORDS = {"1", "true", "yes", "on"}
_FALSE_WORDS = {"0", "false", "no", "off"}


@dataclass
class RunConfig:
    scenario: str = "all"
    output_dir: Path = Path("results")
    seed: int = 0
    jobs: int = 1
    force: bool = False
    overrides: dict = field(default_factory=dict)
    list_only: bool = False


def _coerce(key, default, text):
    """Parse a value string into the type of the default it replaces."""
    try:
        if isinstance(default, bool):
            low = text.strip().lower()
            if low in _TRUE_WORDS:
                return True
            if low in _FALSE_WORDS:
                return False
            raise ValueError(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, str):
            return text.strip()
        parts = [p.strip() for p in text.split(",") if p.strip() != ""]
        if not parts:
            raise ValueError("empty list")
        elem = default[0]
        vals = [int(p) if isinstance(elem, int) and not isinstance(elem, bool)
                else float(p) for p in parts]
        if isinstance(default, tuple):
            if len(vals) != len(default):
                raise ValueError(f"expected {len(default)} values")
            return tuple(vals)
        return vals
    except ValueError as exc:
        raise UsageError(f"invalid value for {key}: {text!r} ({exc})") from exc


def _param_template():
    tmpl = {}
    for params in DEFAULTS.values():
        tmpl.update(params)
    return tmpl


def _parse_file(path) -> dict:
    """Flat key = value lines; returns raw strings keyed by name."""
    raw = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, _, value = stripped.partition("=")
        raw[key.strip()] = value.strip()
    return raw


def parse_config(argv, config_file=None) -> RunConfig:
    parser = argparse.ArgumentParser(
        prog="gmt-lab",
        description="run reproducible measure-geometry experiments")
    parser.add_argument("--list", action="store_true",
                        help="print scenario ids and exit")
    commands = parser.add_subparsers(dest="command")
    runner = commands.add_parser("run", help="run one scenario or all")
    runner.add_argument("scenario", help="scenario id or 'all'")
    runner.add_argument("--seed", type=int, default=None)
    runner.add_argument("--out", default=None, help="output directory")
    runner.add_argument("--jobs", type=int, default=None,
                        help="scenario-level parallelism (default 1)")
    runner.add_argument("--force", action="store_true", default=None,
                        help="allow a non-empty output directory")
    runner.add_argument("--config", default=None, help="key = value file")
    runner.add_argument("--set", action="append", default=[], dest="sets",
                        metavar="KEY=VALUE", help="override one parameter")
    commands.add_parser("list", help="print scenario ids")

    args = parser.parse_args(argv)
    if args.list or args.command == "list":
        return RunConfig(list_only=True)
    if args.command != "run":
        raise UsageError("expected a command: run or list")

    template = _param_template()
    settings = dict(_FILE_SETTINGS)
    overrides = {}

    file_path = args.config if args.config is not None else config_file
    if file_path is not None:
        for key, text in _parse_file(file_path).items():
            if key in settings:
                settings[key] = _coerce(key, _FILE_SETTINGS[key], text)
            elif key in template:
                overrides[key] = _coerce(key, template[key], text)
            else:
                raise UsageError(f"unknown key {key!r} in config file")

    for item in args.sets:
        key, eq, text = item.partition("=")
        key = key.strip()
        if not eq:
            raise UsageError(f"--set needs KEY=VALUE, got {item!r}")
        if key not in template:
            raise UsageError(f"unknown key {key!r}")
        overrides[key] = _coerce(key, template[key], text)

    if args.scenario != "all" and args.scenario not in DEFAULTS:
        raise UsageError(f"unknown scenario {args.scenario!r}; "
                         f"try one of: {', '.join(scenario_ids())}")
    return RunConfig(
        scenario=args.scenario,
        output_dir=Path(args.out if args.out is not None else settings["out"]),
        seed=args.seed if args.seed is not None else settings["seed"],
        jobs=args.jobs if args.jobs is not None else settings["jobs"],
        force=args.force if args.force is not None else settings["force"],
        overrides=overrides,
    )


def _run_one(sid: str, config: RunConfig):
    """Run one scenario into its own directory; never raises."""
    sub = config.output_dir / sid
    try:
        sub.mkdir(parents=True, exist_ok=True)
        keys = DEFAULTS[sid]
        local = {k: v for k, v in config.overrides.items() if k in keys}
        report = run_scenario(sid, local, seed=config.seed, out_dir=sub)
        write_report(report, sub)
        return report.summary_line(), report.all_passed(), False
    except Exception as exc:
        try:
            marker = sub / "FAILED"
            marker.write_text(traceback.format_exc())
        except OSError:
            pass
        return f"{sid}: ERROR ({exc})", False, True


def execute(config: RunConfig) -> int:
    if config.list_only:
        for sid in scenario_ids():
            print(sid)
        return 0

    targets = scenario_ids() if config.scenario == "all" else [config.scenario]
    out = config.output_dir
    try:
        if out.exists() and not config.force and any(out.iterdir()):
            print(f"error: {out} is not empty (use --force)", file=sys.stderr)
            return 2
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"error: cannot write to {out}: {exc}", file=sys.stderr)
        return 3

    jobs = max(1, int(config.jobs))
    results = []
    if jobs == 1:
        for sid in targets:
            results.append(_run_one(sid, config))
            print(results[-1][0])
    else:
        # buffered summaries keep the log order deterministic under --jobs
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_one, sid, config) for sid in targets]
            for fut in futures:
                results.append(fut.result())
                print(results[-1][0])

    if any(crashed for _, _, crashed in results):
        return 3
    if not all(passed for _, passed, _ in results):
        return 1
    return 0


def main(argv=None) -> int:
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        # argparse already printed its message; fold into the contract
        return 0 if exc.code in (0, None) else 2
    return execute(config)


if __name__ == "__main__":
    sys.exit(main())
