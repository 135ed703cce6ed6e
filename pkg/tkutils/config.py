#!/usr/bin/env python3
from __future__ import annotations

import json
import os

from dataclasses import dataclass, fields
from typing import Optional

from agenttestkit.exceptions import ConfigError, IoFailure

# environment variable -> settings field
ENV_OVERRIDES = {
    'TESTKIT_LLM_ENDPOINT': 'llm_endpoint',
    'TESTKIT_LLM_API_KEY': 'llm_api_key',
    'TESTKIT_LLM_MODEL': 'llm_model',
    'TESTKIT_LLM_TIMEOUT': 'llm_timeout',
    'TESTKIT_TRACE_DIR': 'trace_dir',
    'TESTKIT_JOBS': 'jobs',
}


@dataclass
class KitSettings:
    """Run-wide settings for the CLI and real LLM clients.

    Attributes:
        llm_endpoint (Optional[str]): HTTPS endpoint of the real LLM.
        llm_api_key (Optional[str]): Bearer token for the endpoint.
        llm_model (Optional[str]): Model identifier forwarded with each request.
        llm_timeout (float): Request timeout in seconds.
        trace_dir (Optional[str]): Directory completed turns are persisted to.
        jobs (int): Worker threads per pyramid layer.
    """
    llm_endpoint: Optional[str] = None
    llm_api_key: Optional[str] = None
    llm_model: Optional[str] = None
    llm_timeout: float = 60.0
    trace_dir: Optional[str] = None
    jobs: int = 1

    def __str__(self):
        key = '***' if self.llm_api_key else None
        return f"KitSettings(llm_endpoint={self.llm_endpoint}, llm_api_key={key}, llm_model={self.llm_model}, trace_dir={self.trace_dir}, jobs={self.jobs})"

    @property
    def has_llm(self) -> bool:
        return bool(self.llm_endpoint)


def _coerce(name: str, value, source: str):
    if value is None:
        return None
    try:
        if name == 'jobs':
            jobs = int(value)
            if jobs < 1:
                raise ValueError('must be at least 1')
            return jobs
        if name == 'llm_timeout':
            return float(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid value {value!r} for '{name}' from {source}: {e}") from None
    return str(value)

def load_settings(path: Optional[str] = None, environ: Optional[dict] = None) -> KitSettings:
    """Load settings from an optional JSON file, then apply environment overrides.

    Args:
        path (Optional[str]): JSON config file; keys are the KitSettings field names.
        environ (Optional[dict]): Environment mapping, `os.environ` by default.

    Returns:
        The merged KitSettings.

    Raises:
        ConfigError: Invalid JSON, unknown keys or invalid values.
        IoFailure: The config file cannot be read.
    """
    environ = os.environ if environ is None else environ
    known = {f.name for f in fields(KitSettings)}
    values = {}

    if path:
        try:
            with open(path, encoding='utf-8') as fh:
                d = json.load(fh)
        except OSError as e:
            raise IoFailure(f"cannot read settings file {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON: {e.msg}", path=path, line_number=e.lineno) from None
        if not isinstance(d, dict):
            raise ConfigError('settings file must contain a JSON object', path=path)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown settings keys: {', '.join(sorted(unknown))}", path=path)
        values.update({k: _coerce(k, v, path) for k, v in d.items()})

    for env_name, field_name in ENV_OVERRIDES.items():
        if environ.get(env_name):
            values[field_name] = _coerce(field_name, environ[env_name], env_name)

    return KitSettings(**{k: v for k, v in values.items() if v is not None})
