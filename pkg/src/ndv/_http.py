"""JSON-over-HTTP plumbing shared by the NER and embedding backend clients."""

from __future__ import annotations

import time

import requests

from .errors import BackendUnavailable, ProtocolError

DEFAULT_RETRIES = 3
DEFAULT_BACKOFF_S = 0.25
DEFAULT_TIMEOUT_S = 60.0


def post_json(
    url: str,
    payload: dict,
    retries: int = DEFAULT_RETRIES,
    backoff_s: float = DEFAULT_BACKOFF_S,
    timeout_s: float = DEFAULT_TIMEOUT_S,
) -> dict:
    """POST a JSON payload and return the decoded JSON reply.

    Connection failures, timeouts, and 5xx replies are retried with
    exponential backoff and surface as BackendUnavailable once retries run
    out. 4xx replies and non-JSON bodies are not retried: the request itself
    is wrong, so they raise ProtocolError immediately.
    """
    last_exc: Exception | None = None
    for attempt in range(max(1, retries)):
        if attempt:
            time.sleep(backoff_s * (2 ** (attempt - 1)))
        try:
            resp = requests.post(url, json=payload, timeout=timeout_s)
        except requests.RequestException as e:
            last_exc = e
            continue
        if resp.status_code >= 500:
            last_exc = BackendUnavailable(f"{url} replied {resp.status_code}")
            continue
        if resp.status_code >= 400:
            raise ProtocolError(f"{url} rejected request: {resp.status_code} {resp.text[:200]}")
        try:
            body = resp.json()
        except ValueError as e:
            raise ProtocolError(f"{url} returned a non-JSON body") from e
        if not isinstance(body, dict):
            raise ProtocolError(f"{url} returned a non-object JSON body")
        return body
    raise BackendUnavailable(f"backend {url} unreachable after {retries} attempts: {last_exc}")
