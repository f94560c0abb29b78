"""Command-line interface.

    lgtweezer run <config.json> [--out DIR] [--seed N] [--threads K]
    lgtweezer preset <name> [--out DIR] [--seed N] [--threads K]
    lgtweezer list-presets
    lgtweezer verify <manifest.json> [reference.json]

Exit codes: 0 success / all checks passed, 2 numerical-acceptance
failure, 1 usage or configuration error.  The default output directory
is taken from the LGTWEEZER_OUT environment variable when set.
"""

from __future__ import annotations

import argparse
import json
import sys

from .scenes import (
    SceneConfig,
    SceneError,
    compare_against_reference,
    list_presets,
    preset_config,
    run_scene,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lgtweezer",
        description="Optical-tweezer scenes from radial Laguerre-Gauss "
        "superpositions: field cuts, SLM verification, vector focusing, "
        "filling-factor sweeps and transport Monte Carlo runs.",
    )
    sub = parser.add_subparsers(dest="command")

    def add_run_opts(p):
        p.add_argument("--out", help="output directory (default: LGTWEEZER_OUT)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument(
            "--threads", type=int, help="cap kernel worker threads"
        )

    p_run = sub.add_parser("run", help="run a scene from a config file")
    p_run.add_argument("config", help="path to a scene config JSON file")
    add_run_opts(p_run)

    p_preset = sub.add_parser("preset", help="run a bundled preset scene")
    p_preset.add_argument("name", help="preset name (see list-presets)")
    add_run_opts(p_preset)

    sub.add_parser("list-presets", help="list bundled presets")

    p_verify = sub.add_parser(
        "verify", help="check a manifest against a reference table"
    )
    p_verify.add_argument("manifest", help="path to a scene manifest.json")
    p_verify.add_argument(
        "reference",
        nargs="?",
        default=None,
        help="reference table JSON (default: bundled table)",
    )
    return parser


def _print_manifest_summary(manifest: dict) -> None:
    print(f"scene {manifest['scene_id']} ({manifest['kind']}) done")
    for name in sorted(manifest["metrics"]):
        print(f"  {name} = {manifest['metrics'][name]:.6g}")
    for entry in manifest["outputs"]:
        print(f"  wrote {entry['name']}  sha256 {entry['sha256'][:12]}...")
    for text in manifest["warnings"]:
        print(f"  warning: {text}")


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_USAGE

    try:
        if args.command == "run":
            config = SceneConfig.from_file(
                args.config, out_dir=args.out, seed=args.seed,
                threads=args.threads,
            )
            _print_manifest_summary(run_scene(config))
            return EXIT_OK

        if args.command == "preset":
            config = preset_config(
                args.name, out_dir=args.out, seed=args.seed,
                threads=args.threads,
            )
            _print_manifest_summary(run_scene(config))
            return EXIT_OK

        if args.command == "list-presets":
            for name, desc in list_presets().items():
                print(f"{name:16s} {desc}")
            return EXIT_OK

        if args.command == "verify":
            rows, passed = compare_against_reference(
                args.manifest, args.reference
            )
            for r in rows:
                verdict = "PASS" if r["pass"] else "FAIL"
                print(
                    f"{verdict}  {r['metric']}: measured {r['measured']} "
                    f"expected {r['expected']} ({r['tolerance']})"
                )
            if not rows:
                print("no reference entries for this scene; nothing checked")
            return EXIT_OK if passed else EXIT_NUMERIC

    except SceneError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    parser.error(f"unknown command {args.command!r}")  # pragma: no cover
    return EXIT_USAGE  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
