#!/usr/bin/env python3

import sys
import argparse

from dotenv import load_dotenv

import agenttestkit
from agenttestkit import agent, case, collector, llm_client, mock_llm, pyramid, suite, tool, utils_jsonl
from agenttestkit.exceptions import ConfigError, IoFailure
from agenttestkit.pyramid import EXIT_CONFIG_ERROR, EXIT_FAILED, EXIT_OK
from agenttestkit.report import REPORT_FORMATS
from tkutils import docs_check
from tkutils.config import load_settings

_verbose_modules = [agent, case, collector, llm_client, mock_llm, pyramid, suite, tool, utils_jsonl, docs_check]


def build_parser():
    parser = argparse.ArgumentParser(prog='testkit', description='Structural tests for tool-calling agents')
    parser.add_argument('--config', type=str, help='JSON settings file (overridden by TESTKIT_* environment variables)')
    parser.add_argument('--verbose', action='store_true', help='Print progress of every module')
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', help='Run suites layer by layer (unit, integration, acceptance)')
    run.add_argument('paths', nargs='*', default=['suites'], help='Suite files or directories (default: suites)')
    run.add_argument('--layer', type=str, choices=[l.value for l in agenttestkit.Layer], help='Run only this layer')
    run.add_argument('--name', type=str, help='Run only suites whose name matches (glob or substring)')
    run.add_argument('--report', type=str, choices=REPORT_FORMATS, default='text', help='Report format')
    run.add_argument('--out', type=str, help='Write the report to this file instead of stdout')
    run.add_argument('--jobs', type=int, help='Worker threads per layer')
    run.add_argument('--trace-dir', type=str, help='Persist every completed turn as JSONL under this directory')
    run.add_argument('--fail-fast-within-layer', action='store_true', help='Skip the rest of a layer after its first failure')
    run.add_argument('--no-progress', action='store_true', help='Hide the per-layer progress bar')

    docs = sub.add_parser('validate-docs', help='Check that scenario docs cite existing cases')
    docs.add_argument('repo_root', nargs='?', default='.', help='Repository root (default: .)')
    return parser


def set_verbose(on):
    for module in _verbose_modules:
        module.VERBOSE = on


def run(args, settings):
    jobs = args.jobs if args.jobs is not None else settings.jobs
    if jobs < 1:
        raise ConfigError(f"--jobs must be at least 1, got {jobs}")
    trace_dir = args.trace_dir or settings.trace_dir
    progress = not args.no_progress and (args.verbose or sys.stderr.isatty())

    suites = agenttestkit.discover(args.paths, layer=args.layer, name=args.name)
    if not suites:
        sys.stderr.write(f"[WARN] no suites found under {', '.join(args.paths)}\n")
    report = agenttestkit.run_pyramid(
        suites, jobs=jobs, fail_fast_within_layer=args.fail_fast_within_layer,
        progress=progress, trace_dir=trace_dir,
    )
    return agenttestkit.emit_report(report, format=args.report, destination=args.out)


def validate_docs(args):
    broken = docs_check.validate_docs(args.repo_root)
    for b in broken:
        print(b)
    if broken:
        sys.stderr.write(f"[ERROR] {len(broken)} broken case reference(s)\n")
        return EXIT_FAILED
    print('docs and suites are consistent')
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    load_dotenv()
    set_verbose(args.verbose)
    try:
        settings = load_settings(args.config)
        print(f"[testkit] {settings}") if args.verbose else None
        if args.command == 'validate-docs':
            return validate_docs(args)
        return run(args, settings)
    except (ConfigError, IoFailure) as e:
        sys.stderr.write(f"[ERROR] {e}\n")
        return EXIT_CONFIG_ERROR


if __name__ == '__main__':
    raise SystemExit(main())
