"""Command line front end.

Usage:
    spinphonon <scenario> [--config FILE] [--key value]... [--out PATH]

Scenarios: entangle | transfer | ensemble | squeeze | sweep. --config
accepts a filesystem path or the name of a packaged config (fig2..fig5).
Any other --key value pair overrides the corresponding config key.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 truncation-guard rejection.
"""

from __future__ import annotations

import argparse
import sys

from .errors import (ConfigError, IntegratorError, SpinPhononError,
                     TruncationGuardError)
from .runner import (SCENARIOS, build_config, format_summary, parse_config_text,
                     render_csv, resolve_config, run_scenario, run_sweep,
                     write_output, _parse_scalar)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_TRUNCATION = 4


def _collect_overrides(pairs: list[str]) -> dict:
    if len(pairs) % 2 != 0:
        raise ConfigError(f"overrides must come in '--key value' pairs, "
                          f"got {pairs!r}")
    overrides = {}
    for flag, value in zip(pairs[::2], pairs[1::2]):
        if not flag.startswith("--"):
            raise ConfigError(f"expected an override flag, got {flag!r}")
        key = flag[2:]
        if "," in value:
            overrides[key] = [_parse_scalar(v) for v in value.split(",")
                              if v.strip()]
        else:
            overrides[key] = _parse_scalar(value)
    return overrides


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="spinphonon", allow_abbrev=False,
        description="Spin-phonon hybrid-system scenarios (dimensionless "
                    "Lindblad runs) with CSV output.")
    parser.add_argument("scenario", choices=SCENARIOS)
    parser.add_argument("--config", default=None,
                        help="config file path or packaged name (fig2..fig5)")
    parser.add_argument("--out", default=None, help="output CSV path")
    args, extra = parser.parse_known_args(argv)

    try:
        file_cfg = (parse_config_text(resolve_config(args.config))
                    if args.config else {})
        overrides = _collect_overrides(extra)
        cfg = build_config(args.scenario, file_cfg, overrides)
        if args.scenario == "sweep":
            result = run_sweep(cfg)
        else:
            result = run_scenario(args.scenario, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TruncationGuardError as exc:
        print(f"truncation guard: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    except (IntegratorError, SpinPhononError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    out_path = args.out or result.scenario.out
    if out_path:
        write_output(result, out_path)
    else:
        sys.stdout.write(render_csv(result))
    print(format_summary(result), file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
