import json
import random
from collections import Counter
from datetime import datetime, timezone

import pytest

from geocorpus.annotate import Annotation, PlaceDoc
from geocorpus.density import (
    DensityError,
    density_grid,
    grid_to_csv,
    grid_to_geojson,
    keyword_filter,
)
from geocorpus.geo import BBox, GeoPoint, RoI
from geocorpus.ingest import TweetRecord
from geocorpus.synth import default_mix, generate_records

TS = datetime(2017, 8, 30, tzinfo=timezone.utc)
ROI = RoI(rects=(BBox(-96.0, 29.0, -94.0, 31.0),))


def tweet(tweet_id, text):
    return TweetRecord(id=tweet_id, text=text, created_at=TS, source_label="t")


class TestKeywordFilter:
    def test_case_insensitive(self):
        tweets = [tweet("1", "Harvey is coming"), tweet("2", "sunny day")]
        assert keyword_filter(tweets, ["flood", "harvey"]) == {"1"}

    def test_substring_semantics(self):
        tweets = [tweet("1", "flooding everywhere")]
        assert keyword_filter(tweets, ["flood"]) == {"1"}

    def test_any_keyword_matches(self):
        tweets = [tweet("1", "abc FLOOD xyz"), tweet("2", "xyzharveyabc"), tweet("3", "dry")]
        assert keyword_filter(tweets, ["flood", "harvey"]) == {"1", "2"}

    def test_empty_keywords_rejected(self):
        with pytest.raises(DensityError):
            keyword_filter([], [])

    def test_exact_against_generator_truth(self):
        from geocorpus.ingest import parse_tweet
        records, expected = [], set()
        for obj, truth in generate_records(4000, default_mix(), seed=21):
            record = parse_tweet(json.dumps(obj))
            records.append(record)
            if truth.keyword:
                expected.add(record.id)
        got = keyword_filter(records, ["flood", "harvey"])
        assert got == expected  # precision and recall both exactly 1.0


def geotag(tweet_id, lon, lat):
    return Annotation(tweet_id, "geotag", point=GeoPoint(lon, lat))


class TestDensityGrid:
    def test_single_geotag_single_cell(self):
        grid = density_grid([geotag("1", -95.4, 29.7)], {}, ROI, cell_deg=0.01)
        assert grid.aggregated == 1
        assert grid.dropped == 0
        assert len(grid.cells) == 1

    def test_boundary_goes_to_larger_index(self):
        # dyadic cell size so the boundary is exactly representable: a point
        # sitting on a cell edge belongs to the higher-index (east) cell
        roi = RoI(rects=(BBox(0.0, 0.0, 2.0, 2.0),))
        grid = density_grid([geotag("1", 0.25, 0.1)], {}, roi, cell_deg=0.25)
        ((col, row),) = grid.cells
        assert col == 1  # not 0: right-exclusive cells
        assert row == 0

    def test_small_bbox_uses_centroid_and_large_excluded(self):
        small = PlaceDoc("s", "small", BBox(-95.45, 29.65, -95.35, 29.75), "tweet-place")
        large = PlaceDoc("l", "large", BBox(-96.0, 29.0, -94.0, 31.0), "tweet-place")
        annotations = [
            Annotation("1", "bbox", place_id="s"),
            Annotation("2", "bbox", place_id="l"),
        ]
        grid = density_grid(annotations, {"s": small, "l": large}, ROI, cell_deg=0.01)
        assert grid.selected == 1  # l_bbox filtered out by subtype
        ((col, row),) = grid.cells
        assert col == int((-95.4 - -96.0) / 0.01)
        assert row == int((29.7 - 29.0) / 0.01)

    def test_out_of_envelope_dropped_and_counted(self):
        grid = density_grid(
            [geotag("1", -95.0, 30.0), geotag("2", -80.0, 40.0)], {}, ROI, cell_deg=0.1,
        )
        assert grid.aggregated == 1
        assert grid.dropped == 1
        assert grid.selected == 2

    def test_conservation_and_refinement_on_random_annotations(self):
        rng = random.Random(29)
        annotations = [
            geotag(str(i), rng.uniform(-97.0, -93.0), rng.uniform(28.0, 32.0))
            for i in range(10_000)
        ]
        coarse = density_grid(annotations, {}, ROI, cell_deg=0.02)
        assert coarse.aggregated + coarse.dropped == coarse.selected == len(annotations)

        fine = density_grid(annotations, {}, ROI, cell_deg=0.02 * 0.5)
        assert fine.aggregated == coarse.aggregated
        reaggregated = Counter()
        for (col, row), count in fine.cells.items():
            reaggregated[(col // 2, row // 2)] += count
        assert dict(reaggregated) == coarse.cells

    def test_invalid_params(self):
        with pytest.raises(DensityError):
            density_grid([], {}, ROI, cell_deg=0.0)
        with pytest.raises(DensityError):
            density_grid([], {}, ROI, subtypes=("l_bbox",))
        with pytest.raises(DensityError):
            density_grid([], {}, ROI, subtypes=())

    def test_tweet_id_restriction(self):
        annotations = [geotag("1", -95.0, 30.0), geotag("2", -95.0, 30.0)]
        grid = density_grid(annotations, {}, ROI, tweet_ids={"2"})
        assert grid.selected == 1
        assert grid.aggregated == 1


class TestExports:
    def test_geojson_cells(self):
        grid = density_grid([geotag("1", -95.4, 29.7)], {}, ROI, cell_deg=0.01)
        doc = grid_to_geojson(grid)
        assert doc["type"] == "FeatureCollection"
        (feature,) = doc["features"]
        assert feature["properties"]["count"] == 1
        ring = feature["geometry"]["coordinates"][0]
        assert len(ring) == 5 and ring[0] == ring[-1]
        lons = [c[0] for c in ring]
        lats = [c[1] for c in ring]
        assert min(lons) <= -95.4 <= max(lons)
        assert min(lats) <= 29.7 <= max(lats)
        assert doc["properties"]["dropped"] == 0

    def test_csv_cell_centers(self):
        grid = density_grid([geotag("1", -95.995, 29.005)], {}, ROI, cell_deg=0.01)
        lines = grid_to_csv(grid).strip().split("\r\n")
        assert lines[0] == "col,row,lon,lat,count"
        col, row, lon, lat, count = lines[1].split(",")
        assert (col, row, count) == ("0", "0", "1")
        assert float(lon) == pytest.approx(-95.995)
        assert float(lat) == pytest.approx(29.005)
