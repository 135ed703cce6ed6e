from __future__ import annotations

import json
import os

from dataclasses import dataclass, field
from typing import Any, Optional

from .case import Case, with_variants
from .exceptions import ConfigError, IoFailure
from .expect import AssertionOutcome, Expect
from .llm_client import record_replay_client
from .mock_llm import Passthrough, scripted_from_dict

# ---------------------------------------------------------------------------- #
# Declarative case files (*.case.json)                                         #
# ---------------------------------------------------------------------------- #

CASE_FILE_SUFFIX = '.case.json'

_case_keys = {
    'name', 'layer', 'agent', 'agent_options', 'user_inputs', 'language_tag',
    'language_variants', 'mock_script', 'recording', 'assertions',
}
_assertion_keys = {
    'tool', 'input_subset', 'output_subset', 'exact', 'times',
    'in_order', 'reply_contains', 'llm_invocations', 'mocked', 'stop_reason',
}


@dataclass
class CaseFile:
    """A case loaded from a JSON case file.

    Attributes:
        path (str): Source file.
        name (str): Case name.
        layer (Optional[str]): Declared pyramid layer, if any.
        agent (str): Name of the sample agent factory to run against.
        agent_options (dict): Keyword arguments for the agent factory.
        user_inputs (list[str]): Inputs of the base case.
        language_tag (Optional[str]): Language of the base case.
        language_variants (dict): Language tag to translated inputs.
        mock_script (Optional[list[ScriptedResponse]]): Script attached to every variant.
        recording (Optional[str]): Replay file serving passthrough items, resolved against the file's directory.
        assertions (list[dict]): Declarative assertions applied to every variant.
    """
    path: str
    name: str
    agent: str
    user_inputs: list
    layer: Optional[str] = None
    agent_options: dict = field(default_factory=dict)
    language_tag: Optional[str] = None
    language_variants: dict = field(default_factory=dict)
    mock_script: Optional[list] = None
    recording: Optional[str] = None
    assertions: list = field(default_factory=list)

    def __str__(self):
        return f"CaseFile(name={self.name}, agent={self.agent}, layer={self.layer}, path={self.path})"

    @property
    def has_passthrough(self) -> bool:
        return any(isinstance(item, Passthrough) for item in (self.mock_script or []))

    def build_cases(self) -> list[Case]:
        """Base case plus one case per language variant, each with the mock script attached."""
        base = Case(self.user_inputs, name=self.name, language_tag=self.language_tag)
        if self.mock_script is not None:
            recording = self.recording
            real_client = (lambda: record_replay_client(recording)) if recording else None
            base.attach_mock_script(self.mock_script, real_client)
        return with_variants(base, self.language_variants)

    def check(self, expect: Expect) -> list[AssertionOutcome]:
        return apply_assertions(expect, self.assertions)


def _fail(path: str, message: str, line_number: Optional[int] = None):
    raise ConfigError(message, path=path, line_number=line_number)

def _locate(text: str, needle: str) -> Optional[int]:
    # 1-based line of the first occurrence of a key, for error messages
    pos = text.find(f'"{needle}"')
    return text.count('\n', 0, pos) + 1 if pos >= 0 else None

def validate_assertion(entry: Any, path: str = '', line_number: Optional[int] = None) -> None:
    """Check one declarative assertion entry.

    Raises:
        ConfigError: Unknown keys or an entry that selects no assertion.
    """
    if not isinstance(entry, dict):
        _fail(path, f"assertion {entry!r} must be an object", line_number)
    unknown = set(entry) - _assertion_keys
    if unknown:
        _fail(path, f"unknown assertion keys: {', '.join(sorted(unknown))}", line_number)
    if 'in_order' in entry:
        if not isinstance(entry['in_order'], list):
            _fail(path, "'in_order' must be a list of tool names", line_number)
    elif 'reply_contains' in entry:
        if not isinstance(entry['reply_contains'], str):
            _fail(path, "'reply_contains' must be a string", line_number)
    elif 'llm_invocations' in entry:
        if not isinstance(entry['llm_invocations'], int) or isinstance(entry['llm_invocations'], bool):
            _fail(path, "'llm_invocations' must be an integer count", line_number)
    elif 'tool' in entry:
        if 'times' in entry and (not isinstance(entry['times'], int) or isinstance(entry['times'], bool) or entry['times'] < 0):
            _fail(path, "'times' must be a non-negative integer", line_number)
    else:
        _fail(path, f"assertion {entry!r} names none of tool, in_order, reply_contains, llm_invocations", line_number)

def apply_assertions(expect: Expect, assertions: list[dict]) -> list[AssertionOutcome]:
    """Evaluate declarative assertions.

    Args:
        expect (Expect): Expectation scope to evaluate against.
        assertions (list[dict]): Entries as found in case files.

    Returns:
        The outcomes, in evaluation order.
    """
    outcomes = []
    for entry in assertions:
        if 'in_order' in entry:
            outcomes.append(expect.tool_invocations.in_order(entry['in_order']))
        elif 'reply_contains' in entry:
            outcomes.append(expect.reply.to_contain(entry['reply_contains']))
        elif 'llm_invocations' in entry:
            scope = expect.llm_invocations.where(mocked=entry.get('mocked'), stop_reason=entry.get('stop_reason'))
            outcomes.append(scope.to_have_count(entry['llm_invocations']))
        elif 'times' in entry:
            outcomes.append(expect.tool_invocations.times(entry['tool'], entry['times']))
        else:
            match = expect.tool_invocations.to_include(entry['tool'])
            outcomes.append(match.outcome)
            exact = bool(entry.get('exact', False))
            if 'input_subset' in entry:
                outcomes.append(match.with_input(entry['input_subset'], exact=exact))
            if 'output_subset' in entry:
                outcomes.append(match.with_output(entry['output_subset'], exact=exact))
    return outcomes

def load_case_file(path: str) -> CaseFile:
    """Load and validate a case file.

    Args:
        path (str): Path to a `*.case.json` file.

    Returns:
        The parsed CaseFile.

    Raises:
        ConfigError: Malformed JSON or content; the message names the file and, where known, the line.
        IoFailure: The file cannot be read.
    """
    try:
        with open(path, encoding='utf-8') as fh:
            text = fh.read()
    except OSError as e:
        raise IoFailure(f"cannot read case file {path}: {e}") from e
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e.msg}", path=path, line_number=e.lineno) from None
    if not isinstance(d, dict):
        _fail(path, 'case file must contain a JSON object', 1)

    unknown = set(d) - _case_keys
    if unknown:
        key = sorted(unknown)[0]
        _fail(path, f"unknown case keys: {', '.join(sorted(unknown))}", _locate(text, key))
    for required in ('name', 'agent', 'user_inputs'):
        if required not in d:
            _fail(path, f"missing required key '{required}'", 1)
    if not isinstance(d['user_inputs'], list) or not d['user_inputs'] or not all(isinstance(u, str) for u in d['user_inputs']):
        _fail(path, "'user_inputs' must be a non-empty list of strings", _locate(text, 'user_inputs'))

    mock_script = None
    if 'mock_script' in d:
        if not isinstance(d['mock_script'], list):
            _fail(path, "'mock_script' must be a list", _locate(text, 'mock_script'))
        try:
            mock_script = [scripted_from_dict(item) for item in d['mock_script']]
        except ValueError as e:
            _fail(path, f"invalid mock script: {e}", _locate(text, 'mock_script'))

    for entry in d.get('assertions', []):
        validate_assertion(entry, path, _locate(text, 'assertions'))

    recording = d.get('recording')
    if recording:
        recording = os.path.normpath(os.path.join(os.path.dirname(os.path.abspath(path)), recording))

    try:
        case_file = CaseFile(
            path=path, name=d['name'], agent=d['agent'], user_inputs=d['user_inputs'],
            layer=d.get('layer'), agent_options=d.get('agent_options', {}),
            language_tag=d.get('language_tag'), language_variants=d.get('language_variants', {}),
            mock_script=mock_script, recording=recording, assertions=d.get('assertions', []),
        )
        case_file.build_cases()
    except ValueError as e:
        # VariantLengthMismatch and bad inputs
        _fail(path, str(e), _locate(text, 'language_variants'))
    return case_file
