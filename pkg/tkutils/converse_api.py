#!/usr/bin/env python3

import sys

from typing import Optional

import requests
from requests.adapters import HTTPAdapter
from urllib3.util.retry import Retry

VERBOSE = False

retry_strategy = Retry(
    total=5,
    connect=5,
    read=3,
    backoff_factor=1.5,           # 1.5s → 3s → 6s → 12s → 24s
    status_forcelist=[429, 500, 502, 503, 504],
    allowed_methods=["POST"],
    raise_on_status=False,
    respect_retry_after_header=True,
)

def new_session(api_key: Optional[str] = None) -> requests.Session:
    """Create a session mounted with the retry adapter.

    Args:
        api_key (Optional[str]): Bearer token sent with every request.

    Returns:
        A configured `requests.Session`.
    """
    adapter = HTTPAdapter(max_retries=retry_strategy)
    session = requests.Session()
    session.mount("https://", adapter)
    session.mount("http://", adapter)
    session.headers.update({"User-Agent": "agenttestkit/1.0", "Content-Type": "application/json"})
    if api_key:
        session.headers.update({"Authorization": f"Bearer {api_key}"})
    return session

def post_converse(session: requests.Session, endpoint: str, payload: dict, timeout: float = 60) -> dict:
    """POST one Converse-style request and return the decoded response body.

    Args:
        session (requests.Session): Session from `new_session`.
        endpoint (str): Full endpoint URL.
        payload (dict): Request body (`LlmRequest.to_dict()` plus model settings).
        timeout (float, optional): Per-request timeout in seconds.

    Returns:
        The JSON response body.

    Raises:
        requests.RequestException: Transport failure after retries.
        ValueError: Non-200 status or a body that is not JSON.
    """
    print(f"[converse] POST {endpoint} ({len(payload.get('messages', []))} messages)") if VERBOSE else None
    response = session.post(endpoint, json=payload, timeout=timeout)
    if response.status_code != 200:
        sys.stderr.write(f"[WARN] {endpoint} answered {response.status_code}\n")
        raise ValueError(f"endpoint returned HTTP {response.status_code}: {response.text[:200]}")
    try:
        return response.json()
    except ValueError:
        raise ValueError(f"endpoint returned a non-JSON body: {response.text[:200]}") from None
