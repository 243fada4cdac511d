"""Deterministic synthetic-corpus generator for desk-scale pipeline runs.

Each generated tweet carries exactly one geography field (GPS point,
attached place, or profile-derived place), so annotation-type shares equal
the configured per-tweet shares.  Place pools are stratified into small and
large surfaces with per-stratum sampling weights tied to surface, which
plants a known log-log surface/frequency relation that the statistics stage
can recover.  Everything is a pure function of (n, mix, seed, roi).
"""
from __future__ import annotations

import bisect
import json
import math
import random
import sys
from dataclasses import dataclass, field, fields, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterator, Optional

from .geo import BBox, GeoPoint, RoI, bbox_centroid, bbox_intersects, default_roi
from .geocode import GeocodeResult

KM_PER_DEG = math.pi / 180.0 * 6371.0088

WINDOW_START = datetime(2017, 8, 19, tzinfo=timezone.utc)
WINDOW_SECONDS = 33 * 24 * 3600

# Sampling box for out-of-RoI geometry; must stay disjoint from the RoI.
OUT_REGION = BBox(-90.0, 33.0, -80.0, 43.0)

SMALL_SURFACE_RANGE = (4.0, 340.0)      # km^2, safely below the 350 threshold
LARGE_SURFACE_RANGE = (360.0, 60000.0)  # km^2, safely above it
OUT_SURFACE_RANGE = (10.0, 5000.0)

# Within-stratum weight model: weight ~ surface^ALPHA * 10^N(0, JITTER),
# blended with a uniform floor so every pool place keeps a usable
# expected count at desk scale.
WEIGHT_ALPHA = 0.55
WEIGHT_JITTER = 0.25
WEIGHT_FLOOR = 0.25

KEYWORD_TEXTS = [
    "Flooding on the bayou again, stay off the roads",
    "Stay safe during Harvey everyone",
    "harvey update: shelters open near the stadium",
    "My street is completely flooded this morning",
    "#HarveyRelief donations needed at the church",
    "Flood warning extended for our county",
    "Never seen flood water rise this fast",
    "HARVEY is no joke, boarded up and heading north",
]

PLAIN_TEXTS = [
    "Traffic on I-45 is unreal today",
    "Sunset over the bay was stunning",
    "Coffee first, questions later",
    "RT @stormwatcher: heavy rain bands moving through downtown",
    "Game night with the crew",
    "New job starts Monday, wish me luck",
    "Brisket done low and slow, worth the wait",
    "Power came back on in our block",
]

USER_LOCATIONS = ["H-Town", "Gulf Coast", "somewhere sunny", "TX", None, None]


class MixConfigError(ValueError):
    """Invalid generator proportions."""


@dataclass(frozen=True)
class MixConfig:
    """Target proportions for the generator.

    geotag/bbox/pbbox shares are annotation-type shares and must sum to 1.
    ``out_of_roi_fraction`` is the share of all tweets whose geometry falls
    outside the RoI (drawn among geotag/bbox tweets; profile-derived places
    always sit inside, mirroring profile-filtered collection).
    """

    geotag_share: float
    bbox_share: float
    pbbox_share: float
    out_of_roi_fraction: float = 0.02
    small_bbox_fraction: float = 0.027
    small_pbbox_fraction: float = 0.7
    keyword_fraction: float = 0.1
    recovery_miss_fraction: float = 0.0
    truncated_fraction: float = 0.05
    source_mix: dict = field(default_factory=lambda: dict(DEFAULT_SOURCE_MIX))
    n_bbox_places_small: int = 60
    n_bbox_places_large: int = 120
    n_pbbox_places_small: int = 110
    n_pbbox_places_large: int = 60
    n_out_places: int = 1400

    def validate(self) -> None:
        shares = (self.geotag_share, self.bbox_share, self.pbbox_share)
        for name, value in zip(("geotag", "bbox", "pbbox"), shares):
            if not 0.0 <= value <= 1.0:
                raise MixConfigError(f"{name}_share out of [0,1]: {value}")
        if abs(sum(shares) - 1.0) > 1e-9:
            raise MixConfigError(f"annotation-type shares must sum to 1, got {sum(shares)}")
        for name in ("out_of_roi_fraction", "small_bbox_fraction", "small_pbbox_fraction",
                     "keyword_fraction", "recovery_miss_fraction", "truncated_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise MixConfigError(f"{name} out of [0,1]: {value}")
        geo_mass = self.geotag_share + self.bbox_share
        if self.out_of_roi_fraction > geo_mass:
            raise MixConfigError(
                f"out_of_roi_fraction {self.out_of_roi_fraction} exceeds geotag+bbox mass {geo_mass}"
            )
        if not self.source_mix:
            raise MixConfigError("source_mix must not be empty")
        if abs(sum(self.source_mix.values()) - 1.0) > 1e-9:
            raise MixConfigError("source_mix shares must sum to 1")


DEFAULT_SOURCE_MIX = {
    "Twitter for iPhone": 0.33,
    "Twitter for Android": 0.28,
    "Twitter Web Client": 0.15,
    "Facebook": 0.03,
    "Instagram": 0.02,
    "Twitter for iPad": 0.01,
    "TweetDeck": 0.01,
    "SocialOomph": 0.01,
    "IFTTT": 0.01,
    "Other Client": 0.15,
}


def default_mix(
    geotag_share_postfilter: float = 0.01,
    excluded_fraction: float = 0.02,
    usable_fraction_postfilter: float = 0.174,
    pbbox_share: float = 0.2,
    small_pbbox_fraction: float = 0.7,
) -> MixConfig:
    """Mix whose post-filter marginals land on the given targets.

    Solves the raw geotag share and the small-bbox weight so that after the
    RoI post-filter the geotag share, exclusion fraction, and usable
    fraction match the requested values in expectation.
    """
    f = excluded_fraction
    q = f / (1.0 - pbbox_share)  # per-(geotag|bbox)-tweet out-of-RoI probability
    g = geotag_share_postfilter * (1.0 - f) / (1.0 - q)
    b = 1.0 - pbbox_share - g
    usable_mass = usable_fraction_postfilter * (1.0 - f)
    small_bbox = (usable_mass - g * (1.0 - q) - pbbox_share * small_pbbox_fraction) / (b * (1.0 - q))
    if not 0.0 <= small_bbox <= 1.0:
        raise MixConfigError(f"targets are not jointly reachable (small_bbox={small_bbox})")
    mix = MixConfig(
        geotag_share=g,
        bbox_share=b,
        pbbox_share=pbbox_share,
        out_of_roi_fraction=f,
        small_bbox_fraction=small_bbox,
        small_pbbox_fraction=small_pbbox_fraction,
    )
    mix.validate()
    return mix


def load_mix(path: str | Path) -> MixConfig:
    """Read a MixConfig from a TOML or JSON file (by extension)."""
    path = Path(path)
    if path.suffix.lower() in (".toml", ".tml"):
        try:
            import tomllib  # py311+
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    else:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    known = {f.name for f in fields(MixConfig)}
    unknown = set(doc) - known
    if unknown:
        raise MixConfigError(f"unknown mix keys: {sorted(unknown)}")
    base = default_mix()
    mix = replace(base, **doc)
    mix.validate()
    return mix


# --------------------------------------------------------------------------
# Place pools


@dataclass(frozen=True)
class PoolPlace:
    place_id: str
    name: str
    bbox: BBox
    weight: float
    small: bool

    @property
    def centroid(self) -> GeoPoint:
        return bbox_centroid(self.bbox)


@dataclass(frozen=True)
class PlacePools:
    bbox_in: tuple[PoolPlace, ...]
    pbbox: tuple[PoolPlace, ...]
    bbox_out: tuple[PoolPlace, ...]


def _box_around(center: GeoPoint, surface_km2: float) -> BBox:
    """Roughly square lon/lat box centered at ``center`` with the given area."""
    side_km = math.sqrt(surface_km2)
    half_lat = side_km / (2.0 * KM_PER_DEG)
    half_lon = side_km / (2.0 * KM_PER_DEG * math.cos(math.radians(center.lat)))
    return BBox(center.lon - half_lon, center.lat - half_lat,
                center.lon + half_lon, center.lat + half_lat)


def _log_uniform(rng: random.Random, lo: float, hi: float) -> float:
    return 10.0 ** rng.uniform(math.log10(lo), math.log10(hi))


def _point_in_roi(rng: random.Random, roi: RoI) -> GeoPoint:
    extents = [(r.east - r.west) * (r.north - r.south) for r in roi.rects]
    rect = rng.choices(roi.rects, weights=extents)[0]
    return GeoPoint(rng.uniform(rect.west, rect.east), rng.uniform(rect.south, rect.north))


def _point_out(rng: random.Random, margin_deg: float = 1.2) -> GeoPoint:
    return GeoPoint(
        rng.uniform(OUT_REGION.west + margin_deg, OUT_REGION.east - margin_deg),
        rng.uniform(OUT_REGION.south + margin_deg, OUT_REGION.north - margin_deg),
    )


def _stratified_places(
    rng: random.Random,
    n_small: int,
    n_large: int,
    small_total_weight: float,
    id_prefix: str,
    name_pool: tuple[str, str],
    roi: RoI,
) -> list[PoolPlace]:
    """Build a pool whose small-stratum weights sum exactly to the target."""
    places = []
    raws: dict[bool, list[float]] = {True: [], False: []}
    for i in range(n_small + n_large):
        small = i < n_small
        lo, hi = SMALL_SURFACE_RANGE if small else LARGE_SURFACE_RANGE
        surface = _log_uniform(rng, lo, hi)
        center = _point_in_roi(rng, roi)
        raw = surface ** WEIGHT_ALPHA * 10.0 ** rng.gauss(0.0, WEIGHT_JITTER)
        raws[small].append(raw)
        label = name_pool[0] if small else name_pool[1]
        places.append(PoolPlace(
            place_id=f"{id_prefix}{i:05d}",
            name=f"{label} {i:03d}",
            bbox=_box_around(center, surface),
            weight=raw,  # provisional, normalized below
            small=small,
        ))
    normalized = []
    for place in places:
        group = raws[place.small]
        total = sum(group)
        count = len(group)
        stratum_target = small_total_weight if place.small else 1.0 - small_total_weight
        # Uniform floor keeps the rarest places observable at desk scale.
        share = WEIGHT_FLOOR / count + (1.0 - WEIGHT_FLOOR) * place.weight / total
        normalized.append(replace(place, weight=stratum_target * share))
    return normalized


def build_pools(mix: MixConfig, seed: int, roi: Optional[RoI] = None) -> PlacePools:
    roi = roi or default_roi()
    for rect in roi.rects:
        if bbox_intersects(rect, OUT_REGION):
            raise MixConfigError("RoI overlaps the out-of-RoI sampling region")
    rng = random.Random(f"pools-{seed}")
    bbox_in = _stratified_places(
        rng, mix.n_bbox_places_small, mix.n_bbox_places_large,
        mix.small_bbox_fraction, "twp_", ("Creekside Park", "Harris Area"), roi,
    )
    pbbox = _stratified_places(
        rng, mix.n_pbbox_places_small, mix.n_pbbox_places_large,
        mix.small_pbbox_fraction, "nomp_", ("Brookshire Town", "Bayview Region"), roi,
    )
    out_places = []
    for i in range(mix.n_out_places):
        surface = _log_uniform(rng, *OUT_SURFACE_RANGE)
        center = _point_out(rng)
        out_places.append(PoolPlace(
            place_id=f"outp_{i:05d}",
            name=f"Elsewhere City {i:04d}",
            bbox=_box_around(center, surface),
            weight=1.0 / mix.n_out_places,
            small=surface < 350.0,
        ))
    return PlacePools(bbox_in=tuple(bbox_in), pbbox=tuple(pbbox), bbox_out=tuple(out_places))


def build_fixture(mix: MixConfig, seed: int, roi: Optional[RoI] = None) -> dict[str, list[GeocodeResult]]:
    """Geocoder replay fixture resolving every profile-derived pool name."""
    pools = build_pools(mix, seed, roi)
    fixture = {}
    for place in pools.pbbox:
        fixture[place.name.lower()] = [GeocodeResult(
            display_name=f"{place.name}, Texas, United States",
            bbox=place.bbox,
            provider_place_id=place.place_id,
        )]
    return fixture


# --------------------------------------------------------------------------
# Tweet stream


@dataclass(frozen=True)
class GeneratedTruth:
    """Ground-truth labels for one generated tweet."""

    kind: str                 # geotag | bbox | pbbox
    in_roi: bool
    small: Optional[bool]     # None for geotag and unrecovered pbbox
    keyword: bool
    source_label: str
    recovered: bool           # False only for planted recovery misses
    place_id: Optional[str]


def _weighted_label(rng: random.Random, labels: list[str], cumulative: list[float]) -> str:
    return labels[bisect.bisect_left(cumulative, rng.random())]


def generate_records(
    n: int,
    mix: Optional[MixConfig] = None,
    seed: int = 0,
    roi: Optional[RoI] = None,
) -> Iterator[tuple[dict, GeneratedTruth]]:
    """Yield (raw tweet object, truth) pairs, deterministic per (n, mix, seed)."""
    mix = mix or default_mix()
    mix.validate()
    roi = roi or default_roi()
    pools = build_pools(mix, seed, roi)
    rng = random.Random(f"tweets-{seed}")

    geo_mass = mix.geotag_share + mix.bbox_share
    out_prob = mix.out_of_roi_fraction / geo_mass if geo_mass > 0 else 0.0
    source_labels = list(mix.source_mix)
    cum, acc = [], 0.0
    for label in source_labels:
        acc += mix.source_mix[label]
        cum.append(acc)
    cum[-1] = 1.0

    pool_cums: dict[int, list[float]] = {}

    def pick_place(pool: tuple[PoolPlace, ...]) -> PoolPlace:
        return rng.choices(pool, cum_weights=_pool_cum(pool))[0]

    def _pool_cum(pool: tuple[PoolPlace, ...]) -> list[float]:
        key = id(pool)
        if key not in pool_cums:
            total, out = 0.0, []
            for p in pool:
                total += p.weight
                out.append(total)
            pool_cums[key] = out
        return pool_cums[key]

    for idx in range(n):
        draw = rng.random()
        if draw < mix.geotag_share:
            kind = "geotag"
        elif draw < geo_mass:
            kind = "bbox"
        else:
            kind = "pbbox"

        in_roi = True
        if kind in ("geotag", "bbox"):
            in_roi = rng.random() >= out_prob

        keyword = rng.random() < mix.keyword_fraction
        pool_texts = KEYWORD_TEXTS if keyword else PLAIN_TEXTS
        text = f"{rng.choice(pool_texts)} ({idx})"
        source = _weighted_label(rng, source_labels, cum)
        created = WINDOW_START + timedelta(seconds=rng.randrange(WINDOW_SECONDS))

        obj = {
            "id_str": str(900000000000000000 + idx),
            "text": text,
            "created_at": created.strftime("%a %b %d %H:%M:%S %z %Y"),
            "source": f'<a href="http://example.invalid" rel="nofollow">{source}</a>',
            "truncated": False,
        }

        small: Optional[bool] = None
        recovered = True
        place_id: Optional[str] = None
        if kind == "geotag":
            point = _point_in_roi(rng, roi) if in_roi else _point_out(rng)
            obj["coordinates"] = {"type": "Point", "coordinates": [point.lon, point.lat]}
        elif kind == "bbox":
            place = pick_place(pools.bbox_in) if in_roi else pick_place(pools.bbox_out)
            small = place.small
            place_id = place.place_id
            b = place.bbox
            obj["place"] = {
                "id": place.place_id,
                "full_name": place.name,
                "bounding_box": {
                    "type": "Polygon",
                    "coordinates": [[
                        [b.west, b.south], [b.east, b.south],
                        [b.east, b.north], [b.west, b.north],
                    ]],
                },
            }
        else:
            recovered = rng.random() >= mix.recovery_miss_fraction
            if recovered:
                place = pick_place(pools.pbbox)
                small = place.small
                place_id = place.place_id
                name, centroid = place.name, place.centroid
            else:
                name, centroid = f"Unlisted Hamlet {idx}", _point_in_roi(rng, roi)
                small = None
            obj["user"] = {
                "location": name,
                "derived": {"locations": [{
                    "full_name": name,
                    "geo": {"type": "Point", "coordinates": [centroid.lon, centroid.lat]},
                }]},
            }

        if "user" not in obj:
            loc = rng.choice(USER_LOCATIONS)
            if loc is not None:
                obj["user"] = {"location": loc}

        if mix.truncated_fraction and rng.random() < mix.truncated_fraction and len(text) > 24:
            obj["truncated"] = True
            obj["extended_tweet"] = {"full_text": text}
            obj["text"] = text[:20] + "…"

        yield obj, GeneratedTruth(
            kind=kind, in_roi=in_roi, small=small, keyword=keyword,
            source_label=source, recovered=recovered, place_id=place_id,
        )


def generate_synthetic(
    n: int,
    mix: Optional[MixConfig] = None,
    seed: int = 0,
    roi: Optional[RoI] = None,
) -> Iterator[str]:
    """Raw tweet JSON lines; byte-identical for identical (n, mix, seed, roi)."""
    for obj, _ in generate_records(n, mix=mix, seed=seed, roi=roi):
        yield json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


# --------------------------------------------------------------------------
# Expected post-filter marginals (used by calibration checks)


def annotation_mass(mix: MixConfig) -> float:
    """Expected annotations per generated tweet."""
    return mix.geotag_share + mix.bbox_share + mix.pbbox_share * (1.0 - mix.recovery_miss_fraction)


def expected_excluded_annotation_fraction(mix: MixConfig) -> float:
    return mix.out_of_roi_fraction / annotation_mass(mix)


def expected_postfilter_geotag_share(mix: MixConfig) -> float:
    q = mix.out_of_roi_fraction / (mix.geotag_share + mix.bbox_share)
    kept = annotation_mass(mix) - mix.out_of_roi_fraction
    return mix.geotag_share * (1.0 - q) / kept


def expected_postfilter_usable_fraction(mix: MixConfig) -> float:
    q = mix.out_of_roi_fraction / (mix.geotag_share + mix.bbox_share)
    kept = annotation_mass(mix) - mix.out_of_roi_fraction
    usable = (mix.geotag_share * (1.0 - q)
              + mix.bbox_share * (1.0 - q) * mix.small_bbox_fraction
              + mix.pbbox_share * (1.0 - mix.recovery_miss_fraction) * mix.small_pbbox_fraction)
    return usable / kept


def main_write(n: int, mix: MixConfig, seed: int, out_path: Optional[str], roi: Optional[RoI] = None) -> int:
    """Stream generated lines to a file or stdout; returns the line count."""
    written = 0
    if out_path and out_path != "-":
        with open(out_path, "w", encoding="utf-8") as fh:
            for line in generate_synthetic(n, mix, seed, roi):
                fh.write(line + "\n")
                written += 1
    else:
        for line in generate_synthetic(n, mix, seed, roi):
            sys.stdout.write(line + "\n")
            written += 1
    return written
