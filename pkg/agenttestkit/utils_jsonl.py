from __future__ import annotations

import os
import sys

from typing import IO, Iterable, Optional, Union, TYPE_CHECKING

from .exceptions import IoFailure, MalformedSpan
from .span import Span, parse_span, serialize_span

if TYPE_CHECKING:
    from .collector import TraceSnapshot

# ---------------------------------------------------------------------------- #
# JSON Lines helpers for span files (*.spans.jsonl)                            #
# ---------------------------------------------------------------------------- #

SPAN_FILE_SUFFIX = '.spans.jsonl'

PathOrFile = Union[str, os.PathLike, IO[str]]

def _canonical_order(spans: Iterable[Span]) -> list[Span]:
    return sorted(spans, key=lambda s: s.sort_key())

def _open_for(destination: PathOrFile, mode: str):
    if hasattr(destination, 'write') or hasattr(destination, 'read'):
        return destination, False
    try:
        if 'r' not in mode:
            parent = os.path.dirname(os.fspath(destination))
            if parent:
                os.makedirs(parent, exist_ok=True)
        return open(destination, mode, encoding='utf-8', newline='\n'), True
    except OSError as e:
        raise IoFailure(f"cannot open {os.fspath(destination)}: {e}") from e

def write_spans(destination: PathOrFile, spans: Iterable[Span], append: bool = False, debug: bool = False) -> int:
    """Write spans in canonical file order, one serialized span per line.

    Args:
        destination (PathOrFile): File path or writable text stream.
        spans (Iterable[Span]): Spans to write.
        append (bool, optional): If `True`, append to an existing file instead of replacing it.
        debug (bool, optional): If `True`, print debug information.

    Returns:
        Number of spans written.
    """
    ordered = _canonical_order(spans)
    fh, owned = _open_for(destination, 'a' if append else 'w')
    if debug:
        print(f"--> {'Appending' if append else 'Writing'} {len(ordered)} spans to {getattr(fh, 'name', destination)}")
    try:
        for s in ordered:
            fh.write(serialize_span(s))
            fh.write('\n')
    except OSError as e:
        raise IoFailure(f"cannot write spans: {e}") from e
    finally:
        if owned:
            fh.close()
    return len(ordered)

def read_spans(source: PathOrFile) -> list[Span]:
    """Read all spans from a span file.

    Args:
        source (PathOrFile): File path or readable text stream.

    Returns:
        List of Span objects in file order.

    Raises:
        MalformedSpan: A line is not a valid span; the error cites its 1-based line number.
        IoFailure: The source cannot be read.
    """
    fh, owned = _open_for(source, 'r')
    spans = []
    try:
        for line_number, line in enumerate(fh, start=1):
            line = line.rstrip('\n')
            if not line.strip():
                continue
            spans.append(parse_span(line, line_number=line_number))
    except OSError as e:
        raise IoFailure(f"cannot read spans: {e}") from e
    except UnicodeDecodeError as e:
        raise MalformedSpan('json', f"not UTF-8 ({e.reason})") from e
    finally:
        if owned:
            fh.close()
    return spans

def export_jsonl(snapshot: TraceSnapshot, destination: PathOrFile, debug: bool = False) -> int:
    """Write every span of a snapshot to `destination` in canonical file order.

    Args:
        snapshot (TraceSnapshot): Snapshot to export.
        destination (PathOrFile): File path or writable text stream.
        debug (bool, optional): If `True`, print debug information.

    Returns:
        Number of spans written.
    """
    return write_spans(destination, snapshot.all_spans(), debug=debug)

def import_jsonl(source: PathOrFile) -> TraceSnapshot:
    """Rebuild a snapshot from a span file written by `export_jsonl`.

    Args:
        source (PathOrFile): File path or readable text stream.

    Returns:
        The reconstructed TraceSnapshot.
    """
    from .collector import TraceSnapshot
    return TraceSnapshot.from_spans(read_spans(source))

def conversation_file(trace_dir: str, conversation_id: str) -> str:
    """Return the span file path for a conversation under `trace_dir`."""
    return os.path.join(trace_dir, f"{conversation_id}{SPAN_FILE_SUFFIX}")

def append_turn(trace_dir: str, conversation_id: str, spans: Iterable[Span], debug: bool = False) -> Optional[str]:
    """Append a completed turn to its conversation file; failures are reported, not raised."""
    path = conversation_file(trace_dir, conversation_id)
    try:
        write_spans(path, spans, append=True, debug=debug)
    except IoFailure as e:
        sys.stderr.write(f"[WARN] could not persist turn for conversation {conversation_id}: {e}\n")
        return None
    return path
