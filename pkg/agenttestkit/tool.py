from __future__ import annotations

import re
import threading

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .exceptions import DuplicateToolName, HandlerError, SchemaViolation, ToolNotFound

VERBOSE = False

ToolHandler = Callable[[Any], Any]

_NAME_RE = re.compile(r'^[a-z][a-z0-9_]*$')

# schema type name -> accepted python types (bool is excluded from the numeric types below)
_json_types = {
    'string': (str,),
    'integer': (int,),
    'number': (int, float),
    'boolean': (bool,),
    'object': (dict,),
    'array': (list, tuple),
    'null': (type(None),),
}

def _type_matches(type_name: str, value: Any) -> bool:
    if type_name in ('integer', 'number') and isinstance(value, bool):
        return False
    return isinstance(value, _json_types[type_name])


@dataclass(frozen=True)
class ToolSpec:
    """A tool the agent can offer to the LLM.

    Attributes:
        name (str): Unique lowercase snake_case identifier.
        description (str): What the tool does, shown to the LLM.
        parameter_schema (dict): `{"type": "object", "properties": {...}, "required": [...]}`.
    """
    name: str
    description: str = ''
    parameter_schema: dict = field(default_factory=lambda: {'type': 'object', 'properties': {}, 'required': []})

    def __post_init__(self):
        if not isinstance(self.name, str) or not _NAME_RE.match(self.name):
            raise ValueError(f"tool name {self.name!r} must be a lowercase snake_case identifier")
        schema = self.parameter_schema
        if not isinstance(schema, dict) or schema.get('type', 'object') != 'object':
            raise ValueError(f"tool '{self.name}': parameter schema must be an object schema")
        properties = schema.get('properties', {})
        if not isinstance(properties, dict):
            raise ValueError(f"tool '{self.name}': schema properties must be a map")
        for prop, prop_schema in properties.items():
            prop_type = prop_schema.get('type') if isinstance(prop_schema, dict) else None
            if prop_type is not None and prop_type not in _json_types:
                raise ValueError(f"tool '{self.name}': property '{prop}' has unknown type {prop_type!r}")
        for req in schema.get('required', []):
            if req not in properties:
                raise ValueError(f"tool '{self.name}': required property '{req}' is not declared")

    def __str__(self):
        return f"ToolSpec(name={self.name}, required={self.required})"

    @property
    def properties(self) -> dict:
        return self.parameter_schema.get('properties', {})

    @property
    def required(self) -> list:
        return list(self.parameter_schema.get('required', []))

    def validate_input(self, tool_input: Any) -> None:
        """Shallow schema check: required keys present and primitive types match.

        Raises:
            SchemaViolation: Names the first failing property.
        """
        if not isinstance(tool_input, dict):
            raise SchemaViolation(self.name, '$', f"input must be an object, got {type(tool_input).__name__}")
        for req in self.required:
            if req not in tool_input:
                raise SchemaViolation(self.name, req, 'is required but missing')
        for key, value in tool_input.items():
            prop_schema = self.properties.get(key)
            if not isinstance(prop_schema, dict) or 'type' not in prop_schema:
                continue
            if not _type_matches(prop_schema['type'], value):
                raise SchemaViolation(self.name, key, f"expected {prop_schema['type']}, got {type(value).__name__}")

    def to_dict(self) -> dict:
        return {'name': self.name, 'description': self.description, 'parameter_schema': self.parameter_schema}


class ToolRegistry:
    """Map of tool name to (ToolSpec, handler), in registration order."""
    def __init__(self):
        self._entries: dict[str, tuple[ToolSpec, ToolHandler]] = {}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self._entries)

    def __contains__(self, name: str):
        return name in self._entries

    def __str__(self):
        return f"ToolRegistry(tools={self.names()})"

    def register(self, spec: ToolSpec, handler: ToolHandler) -> None:
        """Register a tool.

        Raises:
            DuplicateToolName: A tool with this name is already registered.
        """
        with self._lock:
            if spec.name in self._entries:
                raise DuplicateToolName(f"tool '{spec.name}' is already registered")
            self._entries[spec.name] = (spec, handler)
        print(f"[tools] registered {spec.name}") if VERBOSE else None

    def lookup(self, name: str) -> tuple[ToolSpec, ToolHandler]:
        try:
            return self._entries[name]
        except KeyError:
            raise ToolNotFound(f"tool '{name}' is not registered (registered: {', '.join(self.names()) or 'none'})") from None

    def specs(self) -> list[ToolSpec]:
        return [spec for spec, _ in self._entries.values()]

    def names(self) -> list[str]:
        return list(self._entries)


def execute_tool(registry: ToolRegistry, name: str, tool_input: Any) -> Any:
    """Validate the input against the tool's schema and run its handler.

    Args:
        registry (ToolRegistry): Registry to look the tool up in.
        name (str): Tool name.
        tool_input (Any): JSON input requested by the LLM.

    Returns:
        The handler's JSON output.

    Raises:
        ToolNotFound: `name` is not registered.
        SchemaViolation: Input misses a required key or has a wrong type.
        HandlerError: The handler raised; the original exception is the cause.
    """
    spec, handler = registry.lookup(name)
    spec.validate_input(tool_input)
    try:
        return handler(tool_input)
    except Exception as e:
        raise HandlerError(f"tool '{name}' failed: {type(e).__name__}: {e}") from e


def tool(name: str, description: str = '', properties: Optional[dict] = None, required: Optional[list] = None) -> ToolSpec:
    """Shorthand to build a ToolSpec from property types.

    Example:
        `tool('get_logs', 'Fetch service logs', {'service': 'string'}, ['service'])`
    """
    props = {k: (v if isinstance(v, dict) else {'type': v}) for k, v in (properties or {}).items()}
    return ToolSpec(name, description, {'type': 'object', 'properties': props, 'required': list(required or [])})
