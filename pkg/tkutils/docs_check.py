#!/usr/bin/env python3
from __future__ import annotations

import glob
import os
import re

from dataclasses import dataclass

from agenttestkit.suite import discover

VERBOSE = False

SCENARIO_DIR = os.path.join('docs', 'scenarios')
SUITE_DIR = 'suites'

# scenario docs cite cases as `case:NAME`
CASE_REF_RE = re.compile(r'`case:([^`\s]+)`')


@dataclass(frozen=True)
class BrokenReference:
    doc: str
    case_name: str

    def __str__(self):
        return f"{self.doc}: case '{self.case_name}' does not exist"


def case_references(doc_path: str) -> list[str]:
    """Case names cited in one scenario document, in order of appearance."""
    with open(doc_path, encoding='utf-8') as fh:
        return CASE_REF_RE.findall(fh.read())

def known_case_names(repo_root: str) -> set[str]:
    suite_dir = os.path.join(repo_root, SUITE_DIR)
    if not os.path.isdir(suite_dir):
        return set()
    names = set()
    for suite in discover([suite_dir]):
        names.add(suite.name)
        names.update(check.name for check in suite.checks)
    return names

def validate_docs(repo_root: str = '.') -> list[BrokenReference]:
    """Check that every case cited by the scenario docs exists in the shipped suites.

    Args:
        repo_root (str): Repository root containing `docs/scenarios/` and `suites/`.

    Returns:
        Broken references; empty when docs and suites agree.
    """
    docs = sorted(glob.glob(os.path.join(repo_root, SCENARIO_DIR, '*.md')))
    if not docs:
        return []
    known = known_case_names(repo_root)
    broken = []
    for doc in docs:
        rel = os.path.relpath(doc, repo_root)
        refs = case_references(doc)
        print(f"[docs] {rel}: {len(refs)} case references") if VERBOSE else None
        broken.extend(BrokenReference(rel, name) for name in refs if name not in known)
    return broken
