from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any, Optional

# ---------------------------------------------------------------------------- #
# Deep-subset matching of JSON values                                          #
# ---------------------------------------------------------------------------- #

@dataclass(frozen=True)
class Mismatch:
    """First place where `actual` fails to match `expected`.

    Attributes:
        path (str): Location such as `.status.lastUpdate` or `[0]`; empty for the top level.
        expected (Any): Expected value at `path`.
        actual (Any): Actual value at `path` (`None` when missing).
        reason (str): Short description.
    """
    path: str
    expected: Any
    actual: Any
    reason: str

    def __str__(self):
        return f"at path '{self.path or '$'}': {self.reason}"


_MISSING = object()

def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)

def _is_list(v):
    return isinstance(v, (list, tuple))

def _key_path(path: str, key) -> str:
    return f"{path}.{key}"

def _mismatches(expected: Any, actual: Any, path: str, exact: bool, found: list, stop_at_first: bool) -> None:
    if stop_at_first and found:
        return
    if actual is _MISSING:
        found.append(Mismatch(path, expected, None, 'key is missing'))
        return
    if expected is None:
        if actual is not None:
            found.append(Mismatch(path, expected, actual, f"expected null, got {actual!r}"))
        return
    if isinstance(expected, Mapping):
        if not isinstance(actual, Mapping):
            found.append(Mismatch(path, expected, actual, f"expected an object, got {type(actual).__name__}"))
            return
        for k, v in expected.items():
            _mismatches(v, actual.get(k, _MISSING), _key_path(path, k), exact, found, stop_at_first)
            if stop_at_first and found:
                return
        if exact:
            extra = sorted(str(k) for k in actual if k not in expected)
            if extra:
                found.append(Mismatch(path, expected, actual, f"unexpected keys {extra}"))
        return
    if _is_list(expected):
        if not _is_list(actual):
            found.append(Mismatch(path, expected, actual, f"expected a list, got {type(actual).__name__}"))
            return
        if len(expected) != len(actual):
            found.append(Mismatch(path, expected, actual, f"expected {len(expected)} elements, got {len(actual)}"))
            return
        for i, (e, a) in enumerate(zip(expected, actual)):
            _mismatches(e, a, f"{path}[{i}]", exact, found, stop_at_first)
            if stop_at_first and found:
                return
        return
    if isinstance(expected, bool) or isinstance(actual, bool):
        if not (isinstance(expected, bool) and isinstance(actual, bool) and expected == actual):
            found.append(Mismatch(path, expected, actual, f"expected {expected!r}, got {actual!r}"))
        return
    if _is_number(expected):
        if not (_is_number(actual) and expected == actual):
            found.append(Mismatch(path, expected, actual, f"expected {expected!r}, got {actual!r}"))
        return
    if type(expected) is not type(actual) or expected != actual:
        found.append(Mismatch(path, expected, actual, f"expected {expected!r}, got {actual!r}"))


def first_mismatch(expected: Any, actual: Any, exact: bool = False) -> Optional[Mismatch]:
    """Return the first mismatch between `expected` and `actual`, or `None` when they match.

    Args:
        expected (Any): Expected JSON value; maps are matched as subsets unless `exact`.
        actual (Any): Actual JSON value.
        exact (bool, optional): If `True`, maps must have exactly the expected keys.

    Returns:
        A Mismatch or `None`.
    """
    found: list = []
    _mismatches(expected, actual, '', exact, found, stop_at_first=True)
    return found[0] if found else None

def mismatch_count(expected: Any, actual: Any, exact: bool = False) -> int:
    """Number of mismatching locations; used to rank candidates by closeness."""
    found: list = []
    _mismatches(expected, actual, '', exact, found, stop_at_first=False)
    return len(found)

def deep_subset_match(expected: Any, actual: Any) -> bool:
    """Recursive partial match of JSON values.

    Maps match when every expected key exists in `actual` and matches
    recursively; lists need equal length and element-wise matches; numbers
    compare numerically (booleans are not numbers); `null` matches only `null`.

    Args:
        expected (Any): Expected JSON value.
        actual (Any): Actual JSON value.

    Returns:
        `True` if `actual` matches `expected`.
    """
    return first_mismatch(expected, actual) is None
