"""Shared HTTP POST helper implementing the provider retry policy."""

from __future__ import annotations

import time

import requests

from .errors import ProviderError


def _retryable(status: int) -> bool:
    return status == 429 or 500 <= status <= 599


def post_json(
    session,
    url: str,
    payload: dict,
    headers: dict | None = None,
    timeout: float = 120.0,
    attempts: int = 3,
    backoff_base: float = 1.0,
    sleep=time.sleep,
) -> dict:
    """POST JSON and return the decoded body.

    Retries 429 and 5xx responses with exponential backoff (base, 2x base,
    4x base, ...); other failures raise immediately.
    """
    last: ProviderError | None = None
    for attempt in range(attempts):
        if attempt:
            sleep(backoff_base * 2 ** (attempt - 1))
        try:
            resp = session.post(url, json=payload, headers=headers or {}, timeout=timeout)
        except requests.RequestException as exc:
            raise ProviderError(f"request to {url} failed: {exc}") from exc
        if resp.status_code == 200:
            try:
                return resp.json()
            except ValueError as exc:
                raise ProviderError(f"non-JSON response from {url}") from exc
        last = ProviderError(f"HTTP {resp.status_code} from {url}", status=resp.status_code)
        if not _retryable(resp.status_code):
            raise last
    assert last is not None
    raise ProviderError(f"HTTP {last.status} from {url} after {attempts} attempts", status=last.status)
