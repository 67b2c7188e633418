"""Rate-limited, cached RDAP lookups.

Strictly optional enrichment: every pipeline stage runs fully offline, and
this client only fills local cache files whose rows match the ``load_rdap``
schema.  Responses are cached per domain (write-then-rename), requests are
throttled per endpoint, and throttling signals are honored with backoff.
"""

from __future__ import annotations

import json
import logging
import sys
import time
from datetime import date
from pathlib import Path
from typing import Callable

import requests

from .dataio import atomic_write_text
from .days import parse_day, today_utc
from .epochs import RdapRecord
from .errors import ConfigError, FetchError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

RETRYABLE_STATUSES = (429, 503)


def load_endpoint_map(path: str | Path) -> dict[str, str]:
    """TOML map of TLD to RDAP base URL (a bootstrap-registry extract)."""
    with open(path, "rb") as handle:
        try:
            payload = tomllib.load(handle)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}")
    endpoints = {}
    for tld, url in payload.items():
        if not isinstance(url, str) or not url.startswith(("http://", "https://")):
            raise ConfigError(f"endpoint for {tld!r} must be an http(s) URL")
        endpoints[tld.lower().lstrip(".")] = url.rstrip("/")
    return endpoints


def _registration_date(payload: dict) -> date | None:
    for event in payload.get("events", []):
        if event.get("eventAction") == "registration" and event.get("eventDate"):
            return parse_day(str(event["eventDate"])[:10])
    return None


class RdapFetcher:
    """Fetch current registration records for domains, with a local cache."""

    def __init__(
        self,
        endpoints: dict[str, str],
        cache_dir: str | Path,
        min_interval: float = 0.5,
        max_retries: int = 3,
        timeout: float = 15.0,
        offline: bool = False,
        session: requests.Session | None = None,
        sleep: Callable[[float], None] = time.sleep,
        today: Callable[[], date] = today_utc,
    ):
        self.endpoints = endpoints
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.min_interval = min_interval
        self.max_retries = max_retries
        self.timeout = timeout
        self.offline = offline
        self.session = session or requests.Session()
        self._sleep = sleep
        self._today = today
        self._last_request: dict[str, float] = {}
        self.partial = False  # set when throttling exhausted the retry budget

    # cache entries hold exactly what an RDAP row needs, nothing else
    def _cache_path(self, domain: str) -> Path:
        safe = domain.replace("/", "_")
        return self.cache_dir / f"{safe}.json"

    def _read_cache(self, domain: str) -> RdapRecord | None:
        path = self._cache_path(domain)
        if not path.exists():
            return None
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
        return RdapRecord(
            domain=domain,
            query_time=parse_day(payload["query_time"]),
            polarity=payload["status"],
            registration_date=(
                parse_day(payload["registration_date"])
                if payload.get("registration_date")
                else None
            ),
        )

    def _write_cache(self, record: RdapRecord) -> None:
        payload = {
            "query_time": record.query_time.isoformat(),
            "status": record.polarity,
            "registration_date": (
                record.registration_date.isoformat() if record.registration_date else None
            ),
        }
        atomic_write_text(self._cache_path(record.domain), json.dumps(payload, sort_keys=True) + "\n")

    def _throttle(self, endpoint: str) -> None:
        if self.min_interval <= 0:
            return
        last = self._last_request.get(endpoint)
        now = time.monotonic()
        if last is not None and now - last < self.min_interval:
            self._sleep(self.min_interval - (now - last))
        self._last_request[endpoint] = time.monotonic()

    def fetch(self, domain: str) -> RdapRecord | None:
        """One record per domain; None when the domain cannot be queried."""
        domain = domain.strip().lower().rstrip(".")
        cached = self._read_cache(domain)
        if cached is not None:
            return cached
        if self.offline:
            log.warning("offline and no cache entry for %s; skipped", domain)
            return None
        tld = domain.rsplit(".", 1)[-1]
        endpoint = self.endpoints.get(tld)
        if endpoint is None:
            log.warning("no RDAP endpoint known for TLD %r; skipping %s", tld, domain)
            return None
        url = f"{endpoint}/domain/{domain}"
        backoff = 1.0
        for attempt in range(self.max_retries + 1):
            self._throttle(endpoint)
            try:
                response = self.session.get(url, timeout=self.timeout)
            except requests.RequestException as exc:
                raise FetchError(f"request for {domain} failed: {exc}")
            if response.status_code == 200:
                try:
                    payload = response.json()
                except ValueError as exc:
                    raise FetchError(f"invalid JSON from {url}: {exc}")
                record = RdapRecord(domain, self._today(), "positive", _registration_date(payload))
                self._write_cache(record)
                return record
            if response.status_code == 404:
                record = RdapRecord(domain, self._today(), "negative")
                self._write_cache(record)
                return record
            if response.status_code in RETRYABLE_STATUSES and attempt < self.max_retries:
                retry_after = response.headers.get("Retry-After")
                delay = float(retry_after) if retry_after else backoff
                backoff *= 2
                log.info("throttled on %s (%d); retrying in %.1fs", domain, response.status_code, delay)
                self._sleep(delay)
                continue
            if response.status_code in RETRYABLE_STATUSES:
                log.warning("retry budget exhausted for %s; result is partial", domain)
                self.partial = True
                return None
            log.warning("unexpected status %d for %s; skipped", response.status_code, domain)
            return None
        return None

    def fetch_many(self, domains: list[str]) -> tuple[list[RdapRecord], int]:
        records = []
        skipped = 0
        for domain in domains:
            record = self.fetch(domain)
            if record is None:
                skipped += 1
            else:
                records.append(record)
        return records, skipped
