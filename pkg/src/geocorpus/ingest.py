"""Parsing of raw tweet JSON objects (one per line) into typed records.

Only the handful of fields the pipeline consumes are kept: id, full text,
timestamp, originating application, the optional GPS point, the optional
attached place, and the optional profile-derived place.  When a raw object
is flagged ``truncated`` the extended text is used, never the stub.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Iterator, Optional, TextIO

from .geo import BBox, GeometryError, GeoPoint

LEGACY_TIME_FORMAT = "%a %b %d %H:%M:%S %z %Y"


class TweetParseError(ValueError):
    """Line is not a JSON object."""


class TweetSchemaError(ValueError):
    """JSON object lacks a required field (id or text)."""


class TweetValidationError(ValueError):
    """A field is present but outside its valid range."""


@dataclass(frozen=True)
class TweetPlace:
    name: str
    bbox: BBox
    place_id: str


@dataclass(frozen=True)
class DerivedPlace:
    name: str
    centroid: GeoPoint


@dataclass(frozen=True)
class TweetRecord:
    id: str
    text: str
    created_at: datetime
    source_label: str
    coordinates: Optional[GeoPoint] = None
    place: Optional[TweetPlace] = None
    user_location_freeform: Optional[str] = None
    derived_place: Optional[DerivedPlace] = None

    def __post_init__(self):
        if not self.id or not self.id.isdigit():
            raise TweetValidationError(f"tweet id must be a decimal string: {self.id!r}")


def strip_source_anchor(source: str) -> str:
    """Reduce an HTML anchor like ``<a href=...>Label</a>`` to ``Label``.

    Non-anchor values pass through verbatim.
    """
    closing = source.rfind("</a>")
    if closing == -1:
        return source
    opening = source.rfind(">", 0, closing)
    if opening == -1:
        return source
    return source[opening + 1:closing]


def _parse_created_at(obj: dict) -> datetime:
    raw = obj.get("created_at")
    if isinstance(raw, str):
        try:
            return datetime.strptime(raw, LEGACY_TIME_FORMAT).astimezone(timezone.utc)
        except ValueError:
            if raw.isdigit():
                raw = int(raw)
    if isinstance(raw, (int, float)):
        return datetime.fromtimestamp(raw / 1000.0, tz=timezone.utc)
    ts_ms = obj.get("timestamp_ms")
    if ts_ms is not None:
        return datetime.fromtimestamp(int(ts_ms) / 1000.0, tz=timezone.utc)
    raise TweetSchemaError("no parseable timestamp (created_at / timestamp_ms)")


def _parse_point(geojson_point: dict) -> GeoPoint:
    coords = geojson_point.get("coordinates")
    if not isinstance(coords, (list, tuple)) or len(coords) != 2:
        raise TweetValidationError(f"malformed point: {geojson_point!r}")
    try:
        return GeoPoint(float(coords[0]), float(coords[1]))
    except GeometryError as e:
        raise TweetValidationError(str(e)) from e


def _parse_place(place: dict) -> TweetPlace:
    ring = place["bounding_box"]["coordinates"][0]
    lons = [float(c[0]) for c in ring]
    lats = [float(c[1]) for c in ring]
    try:
        bbox = BBox(min(lons), min(lats), max(lons), max(lats))
    except GeometryError as e:
        raise TweetValidationError(str(e)) from e
    return TweetPlace(
        name=place.get("full_name") or place.get("name") or "",
        bbox=bbox,
        place_id=str(place.get("id", "")),
    )


def parse_tweet(raw_json_line: str) -> TweetRecord:
    """Parse one raw tweet JSON object into a TweetRecord.

    Raises TweetParseError for malformed JSON, TweetSchemaError when id or
    text is missing, TweetValidationError for out-of-range coordinates.
    """
    try:
        obj = json.loads(raw_json_line)
    except json.JSONDecodeError as e:
        raise TweetParseError(f"malformed JSON: {e}") from e
    if not isinstance(obj, dict):
        raise TweetParseError("line is not a JSON object")

    tweet_id = obj.get("id_str") or (str(obj["id"]) if "id" in obj else None)
    if not tweet_id:
        raise TweetSchemaError("missing id_str/id")

    text = obj.get("text")
    if obj.get("truncated") and isinstance(obj.get("extended_tweet"), dict):
        text = obj["extended_tweet"].get("full_text", text)
    if text is None:
        text = obj.get("full_text")
    if text is None:
        raise TweetSchemaError("missing text")

    coordinates = None
    if isinstance(obj.get("coordinates"), dict):
        coordinates = _parse_point(obj["coordinates"])

    place = None
    if isinstance(obj.get("place"), dict) and obj["place"].get("bounding_box"):
        place = _parse_place(obj["place"])

    user = obj.get("user") or {}
    user_location = user.get("location") or None

    derived_place = None
    derived_locations = (user.get("derived") or {}).get("locations") or []
    if derived_locations:
        # Multiple derived entries are not prioritized upstream; take the first.
        first = derived_locations[0]
        geo = first.get("geo") or {}
        if geo.get("coordinates"):
            derived_place = DerivedPlace(
                name=first.get("full_name") or first.get("locality") or "",
                centroid=_parse_point(geo),
            )

    try:
        return TweetRecord(
            id=tweet_id,
            text=text,
            created_at=_parse_created_at(obj),
            source_label=strip_source_anchor(obj.get("source", "")),
            coordinates=coordinates,
            place=place,
            user_location_freeform=user_location,
            derived_place=derived_place,
        )
    except TweetValidationError:
        raise


def serialize_tweet(record: TweetRecord) -> str:
    """Serialize a TweetRecord back to a raw-tweet-shaped JSON line.

    parse_tweet(serialize_tweet(r)) == r, field for field.
    """
    obj = {
        "id_str": record.id,
        "text": record.text,
        "created_at": record.created_at.astimezone(timezone.utc).strftime(LEGACY_TIME_FORMAT),
        "source": f'<a href="http://example.invalid" rel="nofollow">{record.source_label}</a>',
        "truncated": False,
    }
    if record.coordinates is not None:
        obj["coordinates"] = {
            "type": "Point",
            "coordinates": [record.coordinates.lon, record.coordinates.lat],
        }
    if record.place is not None:
        b = record.place.bbox
        obj["place"] = {
            "id": record.place.place_id,
            "full_name": record.place.name,
            "bounding_box": {
                "type": "Polygon",
                "coordinates": [[
                    [b.west, b.south], [b.east, b.south],
                    [b.east, b.north], [b.west, b.north],
                ]],
            },
        }
    user = {}
    if record.user_location_freeform is not None:
        user["location"] = record.user_location_freeform
    if record.derived_place is not None:
        user["derived"] = {"locations": [{
            "full_name": record.derived_place.name,
            "geo": {
                "type": "Point",
                "coordinates": [record.derived_place.centroid.lon,
                                record.derived_place.centroid.lat],
            },
        }]}
    if user:
        obj["user"] = user
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"), sort_keys=True)


@dataclass
class IngestReport:
    lines_read: int = 0
    parsed: int = 0
    blank: int = 0
    errors: list = field(default_factory=list)  # (line_number, message)

    @property
    def error_count(self) -> int:
        return len(self.errors)


def parse_ndjson(lines: Iterable[str], report: IngestReport | None = None) -> Iterator[TweetRecord]:
    """Parse an NDJSON stream, skipping blanks and counting per-line errors.

    Junk lines are reported with their line number on the IngestReport and
    never abort the stream.
    """
    report = report if report is not None else IngestReport()
    for lineno, line in enumerate(lines, start=1):
        report.lines_read += 1
        if not line.strip():
            report.blank += 1
            continue
        try:
            record = parse_tweet(line)
        except (TweetParseError, TweetSchemaError, TweetValidationError) as e:
            report.errors.append((lineno, str(e)))
            continue
        report.parsed += 1
        yield record


def write_ndjson(records: Iterable[TweetRecord], out: TextIO) -> int:
    n = 0
    for record in records:
        out.write(serialize_tweet(record))
        out.write("\n")
        n += 1
    return n
