from __future__ import annotations

import re

from typing import Optional

from agenttestkit.tool import tool

from .records import load_fixture

SNIPPET_LENGTH = 160

_token_re = re.compile(r'\w+', re.UNICODE)

def tokenize(text: str) -> list[str]:
    return [t.lower() for t in _token_re.findall(text or '')]


class KnowledgeBase:
    """In-memory document list with case-insensitive keyword search.

    Attributes:
        documents (list[dict]): `{"doc_id", "title", "text"}` entries.
    """
    def __init__(self, documents: Optional[list[dict]] = None):
        if documents is None:
            documents = load_fixture('knowledge')['documents']
        self.documents = [dict(d) for d in documents]
        self._tokens = [set(tokenize(d.get('title', '') + ' ' + d.get('text', ''))) for d in self.documents]

    def __len__(self):
        return len(self.documents)

    def __str__(self):
        return f"KnowledgeBase(documents={len(self.documents)})"

    def query(self, text: str, limit: int = 3) -> list[dict]:
        """Rank documents by the number of distinct query words they contain.

        Args:
            text (str): Free-text query; punctuation and symbols are ignored.
            limit (int, optional): Maximum number of results.

        Returns:
            Up to `limit` results (`doc_id`, `title`, `snippet`, `score`), best first;
            empty when no word matches.
        """
        words = set(tokenize(text))
        if not words or limit < 1:
            return []
        scored = []
        for doc, tokens in zip(self.documents, self._tokens):
            score = len(words & tokens)
            if score:
                scored.append((score, doc))
        scored.sort(key=lambda s: (-s[0], s[1]['doc_id']))
        return [{
            'doc_id': doc['doc_id'],
            'title': doc.get('title', ''),
            'snippet': doc.get('text', '')[:SNIPPET_LENGTH],
            'score': score,
        } for score, doc in scored[:limit]]


SEARCH_KNOWLEDGE_BASE = tool(
    'search_knowledge_base',
    'Search the service knowledge base for documents about a topic',
    {'query': 'string', 'limit': 'integer'},
    ['query'],
)

def knowledge_handler(kb: KnowledgeBase):
    def search_knowledge_base(tool_input: dict) -> dict:
        return {'results': kb.query(tool_input['query'], tool_input.get('limit', 3))}
    return search_knowledge_base
