#!/usr/bin/env python3

import sys
import argparse

from dotenv import load_dotenv

from agenttestkit import Case, HttpLlmClient, MockLlm, RecordReplayClient, TraceCollector, load_case_file
from agenttestkit.exceptions import AgentTestkitError
from agenttestkit.llm_client import start_record
from sample_agents import AGENT_FACTORIES
from tkutils.config import load_settings


def build_parser():
    parser = argparse.ArgumentParser(description='Record the real LLM responses behind the passthrough items of a case file')
    parser.add_argument('case_file', type=str, help='A *.case.json file with a "recording" and passthrough items')
    parser.add_argument('--config', type=str, help='JSON settings file (overridden by TESTKIT_* environment variables)')
    parser.add_argument('--append', action='store_true', help='Append to the recording instead of starting afresh')
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    load_dotenv()
    try:
        settings = load_settings(args.config)
        if not settings.has_llm:
            sys.stderr.write('[ERROR] TESTKIT_LLM_ENDPOINT is not set : cannot record real responses\n')
            return 2
        case_file = load_case_file(args.case_file)
        if not case_file.recording:
            sys.stderr.write(f"[ERROR] {args.case_file} declares no 'recording'\n")
            return 2
        if not case_file.has_passthrough:
            sys.stderr.write(f"[WARN] {args.case_file} has no passthrough items : the recording will stay empty\n")

        if not args.append:
            start_record(case_file.recording)
        recorder = RecordReplayClient(case_file.recording, mode='record', inner=HttpLlmClient.from_settings(settings))

        # the base case only; language variants replay the same recording
        case = Case(case_file.user_inputs, name=case_file.name, language_tag=case_file.language_tag)
        agent = AGENT_FACTORIES[case_file.agent](**case_file.agent_options)
        agent.bind_collector(TraceCollector())
        if case_file.mock_script is None:
            agent.bind_llm(recorder)
        else:
            agent.bind_llm(MockLlm(real_client=recorder, script=case_file.mock_script))
        result = case.run(agent)
    except (AgentTestkitError, KeyError) as e:
        sys.stderr.write(f"[ERROR] {e}\n")
        return 2

    print(f"Recorded {recorder.position} response(s) to {case_file.recording}")
    if result.error:
        sys.stderr.write(f"[WARN] turn {result.failed_turn} failed while recording: {result.error}\n")
        return 1
    return 0


if __name__ == '__main__':
    raise SystemExit(main())
