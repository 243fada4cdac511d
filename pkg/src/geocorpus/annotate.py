"""Typed geographic annotations derived from tweet records.

An annotation pairs a tweet id with one of three kinds: ``geotag`` (exact
GPS point), ``bbox`` (bounding box of the attached place), or ``pbbox``
(bounding box recovered for the profile-derived place through a geocoder).
Recovery keeps the first geocoder result whose box contains the derived
centroid.  The RoI post-filter drops geotags and place boxes that do not
overlap the region, and cascades onto profile boxes of the same tweets.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .geo import BBox, GeoPoint, RoI, bbox_contains_point, bbox_surface_km2, roi_overlaps_bbox, roi_overlaps_point
from .geocode import FixtureMissError, GeocodeClient, GeocodeError
from .ingest import TweetRecord

KINDS = ("geotag", "bbox", "pbbox")
SUBTYPES = ("geotag", "s_bbox", "l_bbox", "s_pbbox", "l_pbbox")
DEFAULT_THRESHOLD_KM2 = 350.0

ORIGIN_TWEET_PLACE = "tweet-place"
ORIGIN_PROFILE = "profile-recovered"


class AnnotationError(ValueError):
    pass


class IntegrityError(RuntimeError):
    """A bbox/pbbox annotation references a place id with no document."""


@dataclass(frozen=True)
class Annotation:
    tweet_id: str
    kind: str
    point: Optional[GeoPoint] = None
    place_id: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise AnnotationError(f"unknown annotation kind: {self.kind}")
        if self.kind == "geotag":
            if self.point is None or self.place_id is not None:
                raise AnnotationError("geotag annotations carry a point and no place id")
        else:
            if self.place_id is None or self.point is not None:
                raise AnnotationError(f"{self.kind} annotations carry a place id and no point")


@dataclass(frozen=True)
class PlaceDoc:
    place_id: str
    name: str
    bbox: BBox
    origin: str

    def __post_init__(self):
        if self.origin not in (ORIGIN_TWEET_PLACE, ORIGIN_PROFILE):
            raise AnnotationError(f"unknown place origin: {self.origin}")


def stable_place_id(name: str, bbox: BBox) -> str:
    """64-bit stable id from the normalized name and the box at 1e-6 degrees."""
    key = "|".join([
        " ".join(name.strip().lower().split()),
        *(f"{c:.6f}" for c in bbox.as_list()),
    ])
    return "h_" + hashlib.blake2b(key.encode("utf-8"), digest_size=8).hexdigest()


@dataclass
class DeriveCounters:
    tweets: int = 0
    annotations: dict = field(default_factory=lambda: {k: 0 for k in KINDS})
    recovery_failed: int = 0      # geocoder errors / fixture misses
    recovery_unmatched: int = 0   # no result box contains the derived centroid

    def to_json(self) -> dict:
        return {
            "tweets": self.tweets,
            "annotations": dict(self.annotations),
            "recovery_failed": self.recovery_failed,
            "recovery_unmatched": self.recovery_unmatched,
        }


def derive_annotations(
    t: TweetRecord,
    geocoder: Optional[GeocodeClient] = None,
    counters: Optional[DeriveCounters] = None,
) -> list[tuple[Annotation, Optional[PlaceDoc]]]:
    """Derive every applicable annotation for one tweet.

    Geocoder trouble never aborts the stream: failures skip the pbbox
    annotation and bump the matching counter.
    """
    counters = counters if counters is not None else DeriveCounters()
    counters.tweets += 1
    out: list[tuple[Annotation, Optional[PlaceDoc]]] = []

    if t.coordinates is not None:
        out.append((Annotation(t.id, "geotag", point=t.coordinates), None))
        counters.annotations["geotag"] += 1

    if t.place is not None:
        place_id = t.place.place_id or stable_place_id(t.place.name, t.place.bbox)
        doc = PlaceDoc(place_id, t.place.name, t.place.bbox, ORIGIN_TWEET_PLACE)
        out.append((Annotation(t.id, "bbox", place_id=place_id), doc))
        counters.annotations["bbox"] += 1

    if t.derived_place is not None and geocoder is not None:
        centroid = t.derived_place.centroid
        try:
            results = geocoder.search(t.derived_place.name)
        except (GeocodeError, FixtureMissError):
            counters.recovery_failed += 1
            results = None
        if results is not None:
            # First retrieved box that contains the derived centroid wins.
            match = next((r for r in results if bbox_contains_point(r.bbox, centroid)), None)
            if match is None:
                counters.recovery_unmatched += 1
            else:
                place_id = match.provider_place_id or stable_place_id(match.display_name, match.bbox)
                doc = PlaceDoc(place_id, match.display_name, match.bbox, ORIGIN_PROFILE)
                out.append((Annotation(t.id, "pbbox", place_id=place_id), doc))
                counters.annotations["pbbox"] += 1

    return out


def check_integrity(annotations: Iterable[Annotation], places: Mapping[str, PlaceDoc]) -> None:
    for a in annotations:
        if a.place_id is not None and a.place_id not in places:
            raise IntegrityError(f"annotation {a.tweet_id}/{a.kind} references unknown place {a.place_id}")


@dataclass
class FilterReport:
    input_by_kind: dict
    excluded_by_kind: dict
    places_input: int = 0
    places_excluded: int = 0

    @property
    def input_total(self) -> int:
        return sum(self.input_by_kind.values())

    @property
    def excluded_total(self) -> int:
        return sum(self.excluded_by_kind.values())

    def to_json(self) -> dict:
        total = self.input_total
        return {
            "annotations_input": dict(self.input_by_kind),
            "annotations_excluded": dict(self.excluded_by_kind),
            "annotations_excluded_total": self.excluded_total,
            "annotations_excluded_fraction": self.excluded_total / total if total else 0.0,
            "places_input": self.places_input,
            "places_excluded": self.places_excluded,
            "places_excluded_fraction": self.places_excluded / self.places_input if self.places_input else 0.0,
        }


def roi_postfilter(
    annotations: list[Annotation],
    places: Mapping[str, PlaceDoc],
    roi: RoI,
) -> tuple[list[Annotation], dict[str, PlaceDoc], FilterReport]:
    """Drop out-of-RoI geotag/bbox annotations and their tweets' pbboxes.

    A profile-derived box is dropped when any sibling geotag or bbox
    annotation of the same tweet was dropped (content posted away from the
    region makes the profile location moot).  Places left unreferenced are
    pruned.  Idempotent.
    """
    check_integrity(annotations, places)
    report = FilterReport(
        input_by_kind={k: 0 for k in KINDS},
        excluded_by_kind={k: 0 for k in KINDS},
        places_input=len(places),
    )

    poisoned_tweets = set()
    keep_flags: list[bool] = []
    for a in annotations:
        report.input_by_kind[a.kind] += 1
        if a.kind == "geotag":
            keep = roi_overlaps_point(roi, a.point)
        elif a.kind == "bbox":
            keep = roi_overlaps_bbox(roi, places[a.place_id].bbox)
        else:
            keep = True  # resolved against siblings below
        keep_flags.append(keep)
        if not keep:
            poisoned_tweets.add(a.tweet_id)

    kept: list[Annotation] = []
    for a, keep in zip(annotations, keep_flags):
        if a.kind == "pbbox":
            keep = a.tweet_id not in poisoned_tweets
        if keep:
            kept.append(a)
        else:
            report.excluded_by_kind[a.kind] += 1

    referenced = {a.place_id for a in kept if a.place_id is not None}
    kept_places = {pid: doc for pid, doc in places.items() if pid in referenced}
    report.places_excluded = len(places) - len(kept_places)
    return kept, kept_places, report


def classify_specificity(
    a: Annotation,
    places: Mapping[str, PlaceDoc],
    threshold_km2: float = DEFAULT_THRESHOLD_KM2,
) -> str:
    """Subtype of an annotation: geotag, or s_/l_ by box surface.

    A surface exactly at the threshold classifies as large.
    """
    if threshold_km2 <= 0:
        raise AnnotationError(f"threshold must be positive: {threshold_km2}")
    if a.kind == "geotag":
        return "geotag"
    surface = bbox_surface_km2(places[a.place_id].bbox)
    prefix = "s_" if surface < threshold_km2 else "l_"
    return prefix + a.kind
