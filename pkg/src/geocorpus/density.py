"""Keyword filtering and spatial density-grid aggregation.

The grid tiles the RoI envelope with square lon/lat cells, half-open on
their east and north edges (floor convention), so refining the grid and
re-aggregating 2x2 blocks reproduces the coarse counts exactly.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .annotate import Annotation, PlaceDoc, classify_specificity, DEFAULT_THRESHOLD_KM2
from .geo import GeoPoint, RoI, bbox_centroid
from .ingest import TweetRecord

GRID_SUBTYPES = ("geotag", "s_bbox")
DEFAULT_CELL_DEG = 0.01  # ~1.1 km north-south


class DensityError(ValueError):
    pass


def keyword_filter(tweets: Iterable[TweetRecord], keywords: Sequence[str]) -> set[str]:
    """Ids of tweets whose text contains any keyword, case-insensitively."""
    if not keywords:
        raise DensityError("keywords must not be empty")
    lowered = [k.lower() for k in keywords]
    matched = set()
    for t in tweets:
        text = t.text.lower()
        if any(k in text for k in lowered):
            matched.add(t.id)
    return matched


@dataclass
class DensityGrid:
    origin: GeoPoint
    cell_deg: float
    ncols: int
    nrows: int
    cells: dict = field(default_factory=dict)  # (col, row) -> count
    selected: int = 0
    dropped: int = 0

    @property
    def aggregated(self) -> int:
        return sum(self.cells.values())

    def cell_bounds(self, col: int, row: int) -> tuple[float, float, float, float]:
        west = self.origin.lon + col * self.cell_deg
        south = self.origin.lat + row * self.cell_deg
        return west, south, west + self.cell_deg, south + self.cell_deg


def density_grid(
    annotations: Iterable[Annotation],
    places: Mapping[str, PlaceDoc],
    roi: RoI,
    cell_deg: float = DEFAULT_CELL_DEG,
    subtypes: Sequence[str] = GRID_SUBTYPES,
    threshold_km2: float = DEFAULT_THRESHOLD_KM2,
    tweet_ids: Optional[set] = None,
) -> DensityGrid:
    """Aggregate annotation representative points over the RoI envelope.

    geotags count at their GPS point, small boxes at their box centroid.
    Representative points outside the envelope are dropped and counted.
    """
    if cell_deg <= 0:
        raise DensityError(f"cell_deg must be positive: {cell_deg}")
    unknown = set(subtypes) - set(GRID_SUBTYPES)
    if unknown or not subtypes:
        raise DensityError(f"subtypes must be a nonempty subset of {GRID_SUBTYPES}")
    env = roi.envelope()
    ncols = max(1, math.ceil((env.east - env.west) / cell_deg))
    nrows = max(1, math.ceil((env.north - env.south) / cell_deg))
    grid = DensityGrid(
        origin=GeoPoint(env.west, env.south),
        cell_deg=cell_deg, ncols=ncols, nrows=nrows,
    )
    wanted = set(subtypes)
    for a in annotations:
        if tweet_ids is not None and a.tweet_id not in tweet_ids:
            continue
        subtype = classify_specificity(a, places, threshold_km2)
        if subtype not in wanted:
            continue
        grid.selected += 1
        point = a.point if a.kind == "geotag" else bbox_centroid(places[a.place_id].bbox)
        col = math.floor((point.lon - env.west) / cell_deg)
        row = math.floor((point.lat - env.south) / cell_deg)
        if 0 <= col < ncols and 0 <= row < nrows:
            key = (col, row)
            grid.cells[key] = grid.cells.get(key, 0) + 1
        else:
            grid.dropped += 1
    return grid


def grid_to_geojson(grid: DensityGrid) -> dict:
    """FeatureCollection with one polygon per nonzero cell (count property)."""
    features = []
    for (col, row) in sorted(grid.cells):
        west, south, east, north = grid.cell_bounds(col, row)
        features.append({
            "type": "Feature",
            "geometry": {
                "type": "Polygon",
                "coordinates": [[
                    [west, south], [east, south], [east, north], [west, north], [west, south],
                ]],
            },
            "properties": {"col": col, "row": row, "count": grid.cells[(col, row)]},
        })
    return {
        "type": "FeatureCollection",
        "features": features,
        "properties": {
            "cell_deg": grid.cell_deg,
            "ncols": grid.ncols,
            "nrows": grid.nrows,
            "origin": [grid.origin.lon, grid.origin.lat],
            "selected": grid.selected,
            "dropped": grid.dropped,
        },
    }


def grid_to_csv(grid: DensityGrid) -> str:
    """Nonzero cells as ``col,row,lon,lat,count`` with cell-center coordinates."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["col", "row", "lon", "lat", "count"])
    half = grid.cell_deg / 2.0
    for (col, row) in sorted(grid.cells):
        west, south, _, _ = grid.cell_bounds(col, row)
        writer.writerow([col, row, repr(west + half), repr(south + half), grid.cells[(col, row)]])
    return buf.getvalue()
