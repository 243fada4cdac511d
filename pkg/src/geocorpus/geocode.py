"""Client for a Nominatim-compatible search endpoint.

Two modes:

* fixture (default): results come from a local JSON replay file and the
  network is never touched; a miss is an explicit error.
* live: HTTP GET ``{base}/search?q={name}&format=jsonv2`` with outbound
  requests serialized and spaced >= 1 s apart (provider policy).

Responses are cached by normalized name; the cache never alters result
order or content.  Names are normalized only for cache keys, never for
the outbound query.
"""
from __future__ import annotations

import json
import os
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import requests

from .geo import BBox

BASE_URL_ENV = "GEOCODER_BASE_URL"
MIN_REQUEST_SPACING_S = 1.0
_WS = re.compile(r"\s+")


class GeocodeError(Exception):
    """Network or HTTP failure; safe to retry."""


class FixtureMissError(KeyError):
    """Name absent from the replay fixture while in fixture mode."""


@dataclass(frozen=True)
class GeocodeResult:
    display_name: str
    bbox: BBox
    provider_place_id: str

    def to_json(self) -> dict:
        return {
            "display_name": self.display_name,
            "bbox": self.bbox.as_list(),
            "provider_place_id": self.provider_place_id,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GeocodeResult":
        return cls(
            display_name=obj["display_name"],
            bbox=BBox(*obj["bbox"]),
            provider_place_id=str(obj["provider_place_id"]),
        )


def normalize_name(name: str) -> str:
    return _WS.sub(" ", name.strip().lower())


def load_fixture(path: str | Path) -> dict[str, list[GeocodeResult]]:
    with open(path, encoding="utf-8") as f:
        raw = json.load(f)
    return {
        normalize_name(name): [GeocodeResult.from_json(r) for r in results]
        for name, results in raw.items()
    }


def save_fixture(fixture: dict[str, list[GeocodeResult]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(
            {name: [r.to_json() for r in results] for name, results in fixture.items()},
            f, indent=1, sort_keys=True,
        )


def _parse_provider_results(payload: list) -> list[GeocodeResult]:
    results = []
    for item in payload:
        south, north, west, east = (float(v) for v in item["boundingbox"])
        results.append(GeocodeResult(
            display_name=item.get("display_name", ""),
            bbox=BBox(west, south, east, north),
            provider_place_id=str(item.get("place_id", "")),
        ))
    return results


class GeocodeClient:
    """Serialized, cached search client.

    ``request_count`` counts backend hits (fixture lookups or HTTP GETs),
    so the cache contract is observable from tests.
    """

    def __init__(
        self,
        fixture: Optional[dict[str, list[GeocodeResult]]] = None,
        fixture_path: Optional[str | Path] = None,
        base_url: Optional[str] = None,
        session: Optional[requests.Session] = None,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if fixture_path is not None:
            fixture = load_fixture(fixture_path)
        self.fixture = fixture
        self.base_url = base_url or os.environ.get(BASE_URL_ENV)
        if self.fixture is None and not self.base_url:
            raise ValueError(
                f"no fixture given and no base URL (flag or ${BASE_URL_ENV}) for live mode"
            )
        self._session = session
        self._clock = clock
        self._sleep = sleep
        self._cache: dict[str, list[GeocodeResult]] = {}
        self._lock = threading.Lock()
        self._last_request_at: Optional[float] = None
        self.request_count = 0

    @property
    def live(self) -> bool:
        return self.fixture is None

    def search(self, name: str) -> list[GeocodeResult]:
        """Return provider-ordered results for a place name."""
        if not name or not name.strip():
            raise ValueError("empty geocode query")
        key = normalize_name(name)
        with self._lock:
            if key in self._cache:
                return list(self._cache[key])
            if self.fixture is not None:
                if key not in self.fixture:
                    raise FixtureMissError(key)
                results = list(self.fixture[key])
            else:
                results = self._fetch(name)
            self.request_count += 1
            self._cache[key] = results
            return list(results)

    def _fetch(self, name: str) -> list[GeocodeResult]:
        now = self._clock()
        if self._last_request_at is not None:
            wait = MIN_REQUEST_SPACING_S - (now - self._last_request_at)
            if wait > 0:
                self._sleep(wait)
        self._last_request_at = self._clock()
        if self._session is None:
            self._session = requests.Session()
        try:
            resp = self._session.get(
                f"{self.base_url.rstrip('/')}/search",
                params={"q": name, "format": "jsonv2"},
                headers={"User-Agent": "geocorpus/0.1"},
                timeout=30,
            )
            resp.raise_for_status()
            payload = resp.json()
        except (requests.RequestException, ValueError) as e:
            raise GeocodeError(f"geocoder request failed for {name!r}: {e}") from e
        return _parse_provider_results(payload)
