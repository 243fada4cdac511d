"""Geometric primitives: points, lon/lat bounding boxes, rectangle-union regions.

All predicates are boundary-inclusive (closed sets) so containment and
threshold decisions are reproducible bit-for-bit.  The surface model is a
sphere of mean radius 6371.0088 km; no antimeridian wrapping is supported.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

EARTH_RADIUS_KM = 6371.0088


class GeometryError(ValueError):
    """Raised when coordinates fall outside their valid ranges."""


@dataclass(frozen=True)
class GeoPoint:
    lon: float
    lat: float

    def __post_init__(self):
        if not (-180.0 <= self.lon <= 180.0):
            raise GeometryError(f"longitude out of range: {self.lon}")
        if not (-90.0 <= self.lat <= 90.0):
            raise GeometryError(f"latitude out of range: {self.lat}")


@dataclass(frozen=True)
class BBox:
    west: float
    south: float
    east: float
    north: float

    def __post_init__(self):
        if not (-180.0 <= self.west <= 180.0 and -180.0 <= self.east <= 180.0):
            raise GeometryError(f"longitude out of range: {self}")
        if not (-90.0 <= self.south <= 90.0 and -90.0 <= self.north <= 90.0):
            raise GeometryError(f"latitude out of range: {self}")
        if self.west > self.east:
            raise GeometryError(f"west > east (antimeridian wrap unsupported): {self}")
        if self.south > self.north:
            raise GeometryError(f"south > north: {self}")

    def as_list(self) -> list:
        return [self.west, self.south, self.east, self.north]


def bbox_surface_km2(b: BBox) -> float:
    """Spherical surface area of a lon/lat rectangle.

    A = R^2 * dlambda * (sin(lat_n) - sin(lat_s)), with dlambda in radians.
    """
    dlon_rad = math.radians(b.east - b.west)
    band = math.sin(math.radians(b.north)) - math.sin(math.radians(b.south))
    return EARTH_RADIUS_KM ** 2 * dlon_rad * band


def bbox_contains_point(b: BBox, p: GeoPoint) -> bool:
    return b.west <= p.lon <= b.east and b.south <= p.lat <= b.north


def bbox_intersects(a: BBox, b: BBox) -> bool:
    """Closed-rectangle intersection; boxes touching only at an edge count."""
    return (a.west <= b.east and b.west <= a.east
            and a.south <= b.north and b.south <= a.north)


def bbox_centroid(b: BBox) -> GeoPoint:
    return GeoPoint((b.west + b.east) / 2.0, (b.south + b.north) / 2.0)


@dataclass(frozen=True)
class RoI:
    """Region of interest: a union of valid bounding boxes (order irrelevant)."""

    rects: tuple[BBox, ...]

    def __post_init__(self):
        if not self.rects:
            raise GeometryError("RoI needs at least one rectangle")

    def envelope(self) -> BBox:
        return BBox(
            west=min(r.west for r in self.rects),
            south=min(r.south for r in self.rects),
            east=max(r.east for r in self.rects),
            north=max(r.north for r in self.rects),
        )


def roi_overlaps_point(roi: RoI, p: GeoPoint) -> bool:
    return any(bbox_contains_point(r, p) for r in roi.rects)


def roi_overlaps_bbox(roi: RoI, b: BBox) -> bool:
    return any(bbox_intersects(r, b) for r in roi.rects)


def default_roi() -> RoI:
    """Built-in approximation of the Texas coastal collection region.

    The exact collection rectangles were never published as coordinates;
    these three boxes (Houston metro, central coast, Beaumont/Port Arthur)
    are a documented stand-in and can be overridden with any RoI file.
    """
    return RoI(rects=(
        BBox(-96.2, 28.8, -94.5, 30.5),
        BBox(-97.9, 27.2, -96.2, 28.8),
        BBox(-94.5, 29.3, -93.5, 30.3),
    ))


def roi_from_file(path: str | Path) -> RoI:
    """Load an RoI from GeoJSON (MultiPolygon of rectangles) or a rect list.

    The rect-list form is ``{"rects": [[west, south, east, north], ...]}``.
    GeoJSON rings must be axis-aligned rectangles; anything else is rejected.
    """
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)
    if "rects" in doc:
        return RoI(rects=tuple(BBox(*r) for r in doc["rects"]))
    geom = doc.get("geometry", doc)
    if geom.get("type") == "Feature":
        geom = geom["geometry"]
    if geom.get("type") != "MultiPolygon":
        raise GeometryError(f"unsupported RoI document in {path}")
    rects = []
    for polygon in geom["coordinates"]:
        ring = polygon[0]
        lons = {round(c[0], 12) for c in ring}
        lats = {round(c[1], 12) for c in ring}
        if len(lons) != 2 or len(lats) != 2:
            raise GeometryError("RoI polygons must be axis-aligned rectangles")
        rects.append(BBox(min(lons), min(lats), max(lons), max(lats)))
    return RoI(rects=tuple(rects))


def roi_to_file(roi: RoI, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump({"rects": [r.as_list() for r in roi.rects]}, f)
