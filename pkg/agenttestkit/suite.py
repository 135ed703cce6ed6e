from __future__ import annotations

import fnmatch
import hashlib
import importlib.util
import os

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Iterable, Mapping, Optional, Union, TYPE_CHECKING

from .case import Case, CaseResult
from .collector import TraceCollector
from .exceptions import ConfigError, ExpectationFailed
from .expect import AssertionOutcome, Expect
from .mock_llm import Passthrough
from .utils_case_file import CASE_FILE_SUFFIX, load_case_file

if TYPE_CHECKING:
    from .agent import Agent

VERBOSE = False

SUITE_FILE_PREFIX = 'suite_'


class Layer(str, Enum):
    """Pyramid layer; ordered unit < integration < acceptance."""
    UNIT = 'unit'
    INTEGRATION = 'integration'
    ACCEPTANCE = 'acceptance'

    @property
    def rank(self) -> int:
        return _layer_order.index(self)

    @classmethod
    def ordered(cls) -> list[Layer]:
        return list(_layer_order)


_layer_order = (Layer.UNIT, Layer.INTEGRATION, Layer.ACCEPTANCE)


def _failed_outcome(text: str, e: BaseException) -> AssertionOutcome:
    # first line only; rewritten asserts append the compared values
    message = str(e).strip().splitlines()
    return AssertionOutcome(False, text, message[0] if message else type(e).__name__)


@dataclass
class CaseCheck:
    """A Case run against a fresh agent, followed by its expectations.

    Attributes:
        case (Case): The case to run.
        agent_factory (Callable[[], Agent]): Builds a fresh agent per run.
        assertions (Optional[Callable[[Expect], Any]]): Evaluates expectations on the run's traces.
    """
    case: Case
    agent_factory: Callable[[], Agent]
    assertions: Optional[Callable[[Expect], Any]] = None

    @property
    def name(self) -> str:
        return self.case.name

    @property
    def has_passthrough(self) -> bool:
        return any(isinstance(item, Passthrough) for item in (self.case.mock_script or ()))

    def run(self, collector: TraceCollector) -> CaseResult:
        try:
            agent = self.agent_factory()
            if agent.collector is None:
                agent.bind_collector(collector)
            result = self.case.run(agent)
        except Exception as e:
            return CaseResult(case_name=self.case.name, error=f"{type(e).__name__}: {e}", language_tag=self.case.language_tag)
        if self.assertions is not None:
            try:
                self.assertions(result.expect())
            except ExpectationFailed:
                pass
            except AssertionError as e:
                result.assertions.append(_failed_outcome(f"assertion in {self.case.name}", e))
            except Exception as e:
                result.error = f"{type(e).__name__} in assertions: {e}"
        return result


@dataclass
class ComponentCheck:
    """A check of one agent component (tool, memory, knowledge base) without an LLM.

    `func` returns AssertionOutcome objects (or nothing); a plain `assert`
    failure is recorded as a failed outcome.
    """
    name: str
    func: Callable[[], Optional[Iterable[AssertionOutcome]]]

    def run(self, collector: Optional[TraceCollector] = None) -> CaseResult:
        result = CaseResult(case_name=self.name)
        try:
            outcomes = self.func()
            result.assertions.extend(outcomes or [])
        except AssertionError as e:
            result.assertions.append(_failed_outcome(f"assertion in {self.name}", e))
        except Exception as e:
            result.error = f"{type(e).__name__}: {e}"
        return result


@dataclass
class Suite:
    """Named group of checks tagged with one pyramid layer."""
    name: str
    layer: Layer
    checks: list = field(default_factory=list)
    path: Optional[str] = None

    def __post_init__(self):
        try:
            self.layer = Layer(self.layer)
        except ValueError:
            raise ConfigError(f"suite '{self.name}' has unknown layer {self.layer!r}", path=self.path) from None

    def __str__(self):
        return f"Suite(name={self.name}, layer={self.layer.value}, checks={len(self.checks)})"

    def lint(self) -> None:
        """Lower layers must be fully mocked.

        Raises:
            ConfigError: A unit or integration case schedules a passthrough.
        """
        if self.layer is Layer.ACCEPTANCE:
            return
        for check in self.checks:
            if isinstance(check, CaseCheck) and check.has_passthrough:
                raise ConfigError(
                    f"case '{check.name}' in {self.layer.value} suite '{self.name}' uses a passthrough; "
                    f"only acceptance suites may call a real client", path=self.path,
                )


def _load_module_suites(path: str) -> list[Suite]:
    module_name = f"testkit_suite_{hashlib.sha1(os.path.abspath(path).encode()).hexdigest()[:12]}"
    try:
        spec = importlib.util.spec_from_file_location(module_name, path)
        module = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(module)
    except ConfigError:
        raise
    except Exception as e:
        raise ConfigError(f"cannot import suite module: {type(e).__name__}: {e}", path=path) from e

    suites = getattr(module, 'SUITES', None)
    if suites is None:
        single = getattr(module, 'SUITE', None)
        suites = [single] if single is not None else []
    if not suites:
        raise ConfigError('suite module defines neither SUITES nor SUITE', path=path)
    for s in suites:
        if not isinstance(s, Suite):
            raise ConfigError(f"SUITES entry {s!r} is not a Suite", path=path)
        s.path = s.path or path
    return list(suites)

def _infer_layer(path: str) -> Optional[str]:
    for part in reversed(os.path.normpath(os.path.abspath(path)).split(os.sep)[:-1]):
        if part in (l.value for l in Layer):
            return part
    return None

def _load_case_file_suite(path: str, agent_factories: Mapping[str, Callable[..., Any]]) -> Suite:
    case_file = load_case_file(path)
    layer = case_file.layer or _infer_layer(path)
    if layer is None:
        raise ConfigError("case file declares no 'layer' and is not under a unit/integration/acceptance directory", path=path)
    if case_file.agent not in agent_factories:
        raise ConfigError(f"unknown agent '{case_file.agent}' (known: {', '.join(sorted(agent_factories))})", path=path)

    factory = agent_factories[case_file.agent]
    options = dict(case_file.agent_options)
    try:
        factory(**options)
    except Exception as e:
        raise ConfigError(f"agent '{case_file.agent}' rejects agent_options {options}: {type(e).__name__}: {e}", path=path) from e
    checks = [
        CaseCheck(case, lambda: factory(**options), case_file.check)
        for case in case_file.build_cases()
    ]
    return Suite(case_file.name, layer, checks, path=path)

def _candidate_files(paths: Iterable[str]) -> list[str]:
    files = []
    for p in paths:
        if not os.path.exists(p):
            raise ConfigError(f"suite path does not exist: {p}")
        if os.path.isfile(p):
            files.append(p)
            continue
        for root, dirs, names in os.walk(p):
            dirs[:] = sorted(d for d in dirs if not d.startswith(('.', '__')))
            files.extend(os.path.join(root, n) for n in sorted(names))
    return files

def _name_matches(name: str, pattern: Optional[str]) -> bool:
    if not pattern:
        return True
    if any(c in pattern for c in '*?['):
        return fnmatch.fnmatchcase(name, pattern)
    return pattern in name

def discover(paths: Union[str, Iterable[str]], layer: Optional[Union[Layer, str]] = None, name: Optional[str] = None,
             agent_factories: Optional[Mapping[str, Callable[..., Any]]] = None) -> list[Suite]:
    """Find programmatic suites (`suite_*.py`) and JSON case files (`*.case.json`).

    Args:
        paths (Union[str, Iterable[str]]): Files or directories to search.
        layer (Optional[Union[Layer, str]], optional): Keep only suites of this layer.
        name (Optional[str], optional): Keep only suites whose name matches (glob, or substring without wildcards).
        agent_factories (Optional[Mapping], optional): Agent factories for case files; defaults to the sample agents.

    Returns:
        Suites ordered by layer, then name.

    Raises:
        ConfigError: A suite or case file is malformed, or a lower-layer case uses a passthrough.
    """
    if isinstance(paths, str):
        paths = [paths]
    if agent_factories is None:
        from sample_agents import AGENT_FACTORIES
        agent_factories = AGENT_FACTORIES
    wanted_layer = Layer(layer) if layer else None

    suites = []
    for f in _candidate_files(paths):
        base = os.path.basename(f)
        if base.endswith(CASE_FILE_SUFFIX):
            found = [_load_case_file_suite(f, agent_factories)]
        elif base.startswith(SUITE_FILE_PREFIX) and base.endswith('.py'):
            found = _load_module_suites(f)
        else:
            continue
        print(f"[discover] {f}: {', '.join(s.name for s in found)}") if VERBOSE else None
        suites.extend(found)

    for s in suites:
        s.lint()
    suites = [s for s in suites if (wanted_layer is None or s.layer is wanted_layer) and _name_matches(s.name, name)]
    return sorted(suites, key=lambda s: (s.layer.rank, s.name))
